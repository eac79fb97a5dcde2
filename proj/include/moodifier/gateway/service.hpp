#pragma once

#include <memory>
#include <string>

#include "moodifier/gateway/config.hpp"
#include "moodifier/sentiment/model.hpp"
#include "moodifier/store/store.hpp"

namespace moodifier::gateway {

// HTTP+JSON front end over the store and an immutable model.
//
//   GET  /health                      status and model fingerprint
//   POST /classify      {text}        label, log_odds, confidence
//   GET  /feed?user&mode[&at&limit]   the user's cohort feed as display items
//   POST /override      {user, post_id, label[, at]}
//   GET  /stats?user[&from&to]        personal statistics, T1 only
//   POST /events        [events] or {events: [...]}
//   POST /enroll        {handle, protected[, friends, at]}
//   GET  /survey/{pre|post}?user[&at]
//   POST /survey/{pre|post}           survey response
//   GET  /report?format=text|csv|json
//
// Errors come back as {"error": <code>, "message": ...} with a 4xx status.
// Writes go through one serialized path; reads run concurrently.
class Service {
 public:
  // Loads the model and opens the store named in `config`. Throws
  // Error(ModelLoadFailure) when the model cannot be loaded and Error(Io)
  // or CorruptRecordError when the store cannot be opened.
  explicit Service(ServiceConfig config);
  Service(ServiceConfig config, sentiment::SentimentModel model, std::shared_ptr<store::Store> store);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds the listening socket and returns the bound port. Throws
  // Error(BindFailure).
  int bind();
  // Serves on the bound socket until stop(); blocks.
  void listen();
  // bind() then listen() on a background thread; returns the port.
  int start();
  // Stops serving and flushes the store. Idempotent.
  void stop();

  store::Store& store();
  const sentiment::SentimentModel& model() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace moodifier::gateway
