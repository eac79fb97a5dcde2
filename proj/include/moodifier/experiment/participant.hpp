#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "moodifier/common/time.hpp"

namespace moodifier::experiment {

enum class TreatmentGroup { T1, T2 };

std::string_view to_string(TreatmentGroup g);
std::optional<TreatmentGroup> parse_group(std::string_view text);

inline constexpr std::size_t kControlCohortCap = 100;

struct Participant {
  std::string id;
  std::string handle;
  TreatmentGroup group = TreatmentGroup::T1;
  Timestamp installed_at{};
  // Protected accounts only contribute survey data.
  bool protected_account = false;
  // Sampled once at enrollment; nullopt until sampled.
  std::optional<std::vector<std::string>> control_cohort;

  bool operator==(const Participant&) const = default;
};

class ParticipantDirectory {
 public:
  virtual ~ParticipantDirectory() = default;
  virtual std::optional<Participant> find_participant(const std::string& id) const = 0;
  virtual std::optional<Participant> find_by_handle(const std::string& handle) const = 0;
  virtual std::size_t participant_count() const = 0;
  // Insert or replace by id.
  virtual void put_participant(const Participant& p) = 0;
};

// Uniform 50/50 group assignment from a seeded generator. The draw uses the
// top bit of mt19937_64 output so sequences are identical across standard
// library implementations.
class TreatmentAssigner {
 public:
  explicit TreatmentAssigner(std::uint64_t seed) : rng_(seed) {}
  TreatmentGroup next() { return (rng_() >> 63) == 0 ? TreatmentGroup::T1 : TreatmentGroup::T2; }

 private:
  std::mt19937_64 rng_;
};

// Registers a new participant with a freshly drawn group and installed_at =
// now. Throws Error(AlreadyEnrolled) for a known handle.
Participant enroll(ParticipantDirectory& directory, TreatmentAssigner& assigner,
                   const std::string& handle, bool protected_account, Timestamp now);

// Uniform sample without replacement of min(cap, unique friends) ids.
// Duplicates are removed first (first occurrence wins). Deterministic in
// (friend_ids, cap, seed); the result keeps input order.
std::vector<std::string> sample_control(std::span<const std::string> friend_ids,
                                        std::size_t cap, std::uint64_t seed);

// Attaches a control cohort to a participant exactly once. Throws
// Error(CohortAlreadySampled) on a second call and Error(UnknownParticipant).
Participant assign_control_cohort(ParticipantDirectory& directory, const std::string& participant_id,
                                  std::vector<std::string> cohort);

}  // namespace moodifier::experiment
