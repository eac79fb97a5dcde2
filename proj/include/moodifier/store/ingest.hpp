#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "moodifier/common/time.hpp"
#include "moodifier/sentiment/model.hpp"
#include "moodifier/store/feed_source.hpp"
#include "moodifier/store/store.hpp"

namespace moodifier::store {

// Fetches every page of `user_id`'s timeline in [from, to) and upserts the
// posts by id. Returns the number of posts that were not stored before.
// With a model, every non-protected ingested post is classified and its
// label stored; protected posts are stored unlabeled.
//
// Throws Error(InvalidRange) unless from < to. Source errors propagate
// unchanged; pages stored before the failure stay stored, so rerunning the
// same call resumes idempotently.
std::size_t ingest_timeline(FeedSource& source, Store& store, const std::string& user_id,
                            Timestamp from, Timestamp to,
                            const sentiment::SentimentModel* model = nullptr);

// Friend ids with duplicates removed (first occurrence kept). No cap.
std::vector<std::string> fetch_friends_capped(FeedSource& source, const std::string& user_id);

}  // namespace moodifier::store
