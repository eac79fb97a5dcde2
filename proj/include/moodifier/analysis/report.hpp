#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "moodifier/analysis/engagement.hpp"
#include "moodifier/analysis/shares.hpp"
#include "moodifier/analysis/survey.hpp"
#include "moodifier/analysis/ttest.hpp"
#include "moodifier/store/store.hpp"

namespace moodifier::analysis {

inline constexpr double kSignificanceLevel = 0.05;

struct ReportOptions {
  TTestVariant two_sample_variant = TTestVariant::Welch;
  // Tweet-pooled group shares instead of the per-user mean.
  bool pooled_shares = false;
  double alpha = kSignificanceLevel;
  std::chrono::seconds session_gap = kDefaultSessionGap;
};

// Group labels used throughout the report. "T" is T1 and T2 together.
inline constexpr std::array<std::string_view, 4> kReportGroups{"control", "T", "T1", "T2"};

struct ShareRow {
  std::string group;
  Window window = Window::W0;
  std::optional<GroupSummary> summary;
  std::string note;  // why summary is absent
};

struct GroupCell {
  std::string group;
  Window window = Window::W0;
  std::string label() const;  // e.g. "T1 W0"
};

struct PairTest {
  GroupCell a;
  GroupCell b;
  bool paired = false;
  Valence metric = Valence::Positive;
  std::optional<TTestResult> result;
  bool significant = false;
  std::string note;
  std::size_t n_a = 0;
  std::size_t n_b = 0;

  std::string pair_name() const;  // "<a> vs <b>"
};

struct MeanSd {
  std::size_t n = 0;
  std::optional<double> mean;
  std::optional<double> sd;
};

struct QuestionSummary {
  int question = 1;
  MeanSd pre_all;   // every pre-survey response
  MeanSd pre_both;  // participants with both surveys
  MeanSd post_both;
  std::optional<TTestResult> paired;
  std::string note;
};

struct Phq8Summary {
  std::size_t n = 0;
  std::optional<double> mean_total;
  std::size_t flagged = 0;
};

struct AccuracySummary {
  std::size_t eligible = 0;  // respondents with a stated and an actual valence
  std::optional<double> accuracy;
};

struct SurveySummary {
  std::size_t pre_responses = 0;
  std::size_t post_responses = 0;
  std::size_t completed_both = 0;
  std::vector<QuestionSummary> questions;
  std::map<std::string, std::size_t> emoji_pre;
  Phq8Summary phq8_pre;
  Phq8Summary phq8_post;
  AccuracySummary own_pre;
  AccuracySummary own_post;
  AccuracySummary friends_pre;
  AccuracySummary friends_post;
};

struct Report {
  ReportOptions options;
  std::size_t participants = 0;
  std::size_t control_users = 0;
  std::size_t posts = 0;
  std::vector<ShareRow> shares;
  std::vector<PairTest> tests;
  SurveySummary survey;
  EngagementMetrics engagement;

  const ShareRow* find_share(std::string_view group, Window w) const;
  const PairTest* find_test(std::string_view pair_name, Valence metric) const;
};

// Throws Error(EmptyStore) when the snapshot holds no participants.
// Sub-analyses that cannot run (too few users, degenerate variance) leave
// an explanatory note instead of failing the report.
Report build_report(const store::Snapshot& snapshot, const ReportOptions& options = {});

// The per-user share vectors behind a report cell, keyed by user id.
std::map<std::string, ShareVector> cell_shares(const store::Snapshot& snapshot, std::string_view group,
                                               Window window);

enum class ReportFormat { Text, Csv, Json };

std::optional<ReportFormat> parse_report_format(std::string_view text);

std::string render_text(const Report& report);
// Group shares: group,window,valence,mean,std
std::string render_shares_csv(const Report& report);
// Pairwise tests: pair,metric,t,dof,p,significant
std::string render_tests_csv(const Report& report);
// Both CSV tables separated by one blank line.
std::string render_csv(const Report& report);
std::string render_json(const Report& report);
std::string render(const Report& report, ReportFormat format);

}  // namespace moodifier::analysis
