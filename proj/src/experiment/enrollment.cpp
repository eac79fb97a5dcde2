#include <algorithm>
#include <numeric>
#include <unordered_set>

#include <fmt/format.h>

#include "moodifier/common/error.hpp"
#include "moodifier/experiment/participant.hpp"

namespace moodifier::experiment {

std::string_view to_string(TreatmentGroup g) { return g == TreatmentGroup::T1 ? "T1" : "T2"; }

std::optional<TreatmentGroup> parse_group(std::string_view text) {
  if (text == "T1") return TreatmentGroup::T1;
  if (text == "T2") return TreatmentGroup::T2;
  return std::nullopt;
}

Participant enroll(ParticipantDirectory& directory, TreatmentAssigner& assigner,
                   const std::string& handle, bool protected_account, Timestamp now) {
  if (handle.empty()) throw Error(Errc::InvalidArgument, "handle must not be empty");
  if (directory.find_by_handle(handle)) {
    throw Error(Errc::AlreadyEnrolled, fmt::format("'{}' is already enrolled", handle));
  }
  std::size_t seq = directory.participant_count() + 1;
  std::string id;
  do {
    id = fmt::format("p{:05}", seq++);
  } while (directory.find_participant(id));

  Participant p{std::move(id), handle, assigner.next(), now, protected_account, std::nullopt};
  directory.put_participant(p);
  return p;
}

std::vector<std::string> sample_control(std::span<const std::string> friend_ids, std::size_t cap,
                                        std::uint64_t seed) {
  std::vector<std::string> unique;
  std::unordered_set<std::string_view> seen;
  for (const auto& id : friend_ids) {
    if (seen.insert(id).second) unique.push_back(id);
  }
  if (unique.size() <= cap) return unique;

  // Partial Fisher-Yates over positions; the chosen positions are then
  // emitted in input order.
  std::vector<std::size_t> pos(unique.size());
  std::iota(pos.begin(), pos.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < cap; ++i) {
    const std::uint64_t span = pos.size() - i;
    const std::size_t j = i + static_cast<std::size_t>(rng() % span);
    std::swap(pos[i], pos[j]);
  }
  pos.resize(cap);
  std::sort(pos.begin(), pos.end());

  std::vector<std::string> out;
  out.reserve(cap);
  for (auto p : pos) out.push_back(std::move(unique[p]));
  return out;
}

Participant assign_control_cohort(ParticipantDirectory& directory, const std::string& participant_id,
                                  std::vector<std::string> cohort) {
  auto p = directory.find_participant(participant_id);
  if (!p) {
    throw Error(Errc::UnknownParticipant, fmt::format("no participant '{}'", participant_id));
  }
  if (p->control_cohort) {
    throw Error(Errc::CohortAlreadySampled,
                fmt::format("control cohort for '{}' was already sampled", participant_id));
  }
  if (cohort.size() > kControlCohortCap) {
    throw Error(Errc::InvalidArgument, "control cohort exceeds 100 ids");
  }
  if (std::unordered_set<std::string>(cohort.begin(), cohort.end()).size() != cohort.size()) {
    throw Error(Errc::InvalidArgument, "control cohort ids must be distinct");
  }
  p->control_cohort = std::move(cohort);
  directory.put_participant(*p);
  return *p;
}

}  // namespace moodifier::experiment
