#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>

#include "moodifier/sentiment/model.hpp"
#include "moodifier/store/feed_source.hpp"
#include "moodifier/store/store.hpp"

namespace moodifier::gateway {

struct RetryPolicy {
  int max_attempts = 6;
  // First wait after Error(SourceUnavailable); doubles per retry.
  std::chrono::milliseconds initial_backoff{500};
  // Longest single wait, including server-requested retry_after.
  std::chrono::milliseconds max_wait{std::chrono::minutes{5}};
  std::function<void(std::chrono::milliseconds)> sleep;  // defaults to sleeping the thread
};

// ingest_timeline with retries: waits retry_after on RateLimitedError and
// an exponential backoff on Error(SourceUnavailable). The final failure is
// rethrown once attempts run out. Safe to retry because ingestion is
// idempotent.
std::size_t ingest_with_backoff(store::FeedSource& source, store::Store& store, const std::string& user_id,
                                Timestamp from, Timestamp to, const sentiment::SentimentModel* model,
                                const RetryPolicy& policy = {}, std::ostream* log = nullptr);

// Entry point of the `moodifier` tool. `args` excludes the program name.
// Returns 0 on success, 1 on an operational error (message on `err`) and 2
// on a usage error.
int run_command(std::span<const std::string> args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace moodifier::gateway
