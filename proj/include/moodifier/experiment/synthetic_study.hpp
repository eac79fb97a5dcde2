#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "moodifier/analysis/survey.hpp"
#include "moodifier/common/post.hpp"
#include "moodifier/common/window.hpp"
#include "moodifier/experiment/participant.hpp"
#include "moodifier/experiment/telemetry.hpp"
#include "moodifier/feed/overrides.hpp"

namespace moodifier::experiment {

// Fixture generator: a full study (participants, control users, posts with
// planted labels, telemetry, surveys) whose per-window valence proportions
// converge to a plan.

enum class Cohort { Control, T1, T2 };

std::string_view to_string(Cohort c);

// Percentages; valid when every component is finite and >= 0 and the sum
// is within 0.5 of 100 (published tables round to one decimal).
struct Mixture {
  double positive = 0;
  double neutral = 0;
  double negative = 0;

  std::array<double, 3> as_array() const { return {positive, neutral, negative}; }
};

struct CellPlan {
  Mixture mean;
  // Between-user standard deviation of the neutral share, in percentage
  // points. 0 gives every user the mean mixture. Positive and negative
  // split the remainder in the mean's ratio.
  double neutral_sd = 0.0;
};

struct SurveyPlan {
  bool enabled = true;
  double post_completion = 28.0 / 55.0;
  // Planted fraction of stated dominant valences that match the actual one.
  double own_agreement_pre = 0.41;
  double own_agreement_post = 0.50;
  double friends_agreement_pre = 0.42;
  double friends_agreement_post = 0.58;
};

struct EngagementPlan {
  bool enabled = true;
  int sessions_per_day = 3;
  double view_session_share = 0.254;
  std::array<double, 3> mode_share{0.77, 0.12, 0.11};  // MoodColors, PositiveOnly, NegativeOnly
  double displayed_per_view_session = 12.0;
  double relabeling_user_share = 0.35;
  double relabel_rate = 0.03;
};

struct StudySpec {
  std::size_t t1_users = 24;
  std::size_t t2_users = 28;
  std::size_t protected_users = 3;
  std::size_t control_users = 1000;
  std::size_t treatment_posts_per_window = 11;
  std::size_t control_posts_per_window = 15;
  std::map<std::pair<Cohort, Window>, CellPlan> cells;
  // Correlation of a user's latent disposition between windows
  // (Gaussian copula); only matters when neutral_sd > 0.
  double persistence = 0.9;
  double quoted_share = 0.1;
  Timestamp start{};  // first day of the earliest W-2
  SurveyPlan surveys;
  EngagementPlan engagement;

  // Cell means from the published per-group tables: control W-2/W-1/W0,
  // T1 and T2 W-1/W0, and the all-participant W-2 column for both arms.
  static StudySpec published_defaults();

  // Sets neutral_sd on every cell to the published between-user standard
  // deviation of the neutral share: control 26.1 (W-2, W-1) and 26.7 (W0);
  // T1 30.8 (W-2, W-1) and 21.3 (W0); T2 30.8 (W-2, W-1) and 31.1 (W0).
  // Cells without a published value borrow the nearest published one.
  StudySpec& with_published_spread();

  // Throws Error(InvalidMixture) for an invalid or missing cell mixture and
  // Error(InvalidArgument) for impossible sizes.
  void validate() const;
};

// Counts the generator planted in the telemetry stream, for replay checks.
struct EngagementTally {
  std::size_t sessions = 0;
  std::size_t view_sessions = 0;
  std::array<std::size_t, 4> activations{};  // indexed by ViewMode, non-Original only
  std::size_t displayed = 0;
  std::size_t relabels = 0;
  std::size_t relabeling_users = 0;
};

struct StudyData {
  std::vector<Participant> participants;
  std::vector<Post> posts;
  std::vector<PostLabel> labels;
  std::vector<feed::OverrideRecord> overrides;
  std::vector<TelemetryEvent> events;
  std::vector<analysis::SurveyResponse> surveys;
  EngagementTally tally;
};

StudyData generate_synthetic_study(const StudySpec& spec, std::uint64_t seed);

// Share vector (fractions, indexed by Valence) of a user whose standardized
// latent position in the cell is `g`. The neutral share is the quantile at
// Phi(g) of a Beta distribution with the cell's mean and neutral_sd, so
// user shares average to the planted mean.
std::array<double, 3> user_mixture(const CellPlan& plan, double g);

}  // namespace moodifier::experiment
