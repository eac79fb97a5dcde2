#include "moodifier/analysis/report.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "moodifier/common/error.hpp"

namespace moodifier::analysis {

namespace {

struct Member {
  std::string id;
  Timestamp anchor;
};

// Index over a snapshot: who belongs to which group and each author's posts
// with machine labels attached.
class StudyView {
 public:
  explicit StudyView(const store::Snapshot& s) {
    std::map<std::string, Valence, std::less<>> labels;
    for (const auto& l : s.labels) labels.emplace(l.post_id, l.label);
    for (const auto& p : s.posts) {
      LabeledPost lp{p.id, p.created_at, p.is_protected, std::nullopt};
      if (!p.is_protected) {
        if (auto it = labels.find(p.id); it != labels.end()) lp.label = it->second;
      }
      by_author_[p.author_id].push_back(std::move(lp));
    }

    std::set<std::string> participant_ids;
    for (const auto& p : s.participants) participant_ids.insert(p.id);
    // Participants arrive sorted by id; a friend shared by several cohorts is
    // counted once, anchored to the first participant that sampled them.
    std::set<std::string> seen;
    for (const auto& p : s.participants) {
      auto& group = members_[std::string(to_string(p.group))];
      group.push_back({p.id, p.installed_at});
      members_["T"].push_back({p.id, p.installed_at});
      if (!p.control_cohort) continue;
      for (const auto& f : *p.control_cohort) {
        if (participant_ids.contains(f) || !seen.insert(f).second) continue;
        members_["control"].push_back({f, p.installed_at});
      }
    }
  }

  const std::vector<Member>& members(std::string_view group) const {
    static const std::vector<Member> kNone;
    const auto it = members_.find(std::string(group));
    return it == members_.end() ? kNone : it->second;
  }

  std::span<const LabeledPost> posts_of(const std::string& author) const {
    const auto it = by_author_.find(author);
    if (it == by_author_.end()) return {};
    return it->second;
  }

  std::map<std::string, ShareVector> shares(std::string_view group, Window w) const {
    std::map<std::string, ShareVector> out;
    for (const auto& m : members(group)) {
      if (auto s = compute_shares(posts_of(m.id), window_bounds(m.anchor, w))) out.emplace(m.id, *s);
    }
    return out;
  }

 private:
  std::map<std::string, std::vector<LabeledPost>> by_author_;
  std::map<std::string, std::vector<Member>> members_;
};

std::vector<ShareVector> values_of(const std::map<std::string, ShareVector>& m) {
  std::vector<ShareVector> out;
  out.reserve(m.size());
  for (const auto& [k, v] : m) out.push_back(v);
  return out;
}

struct PairSpec {
  GroupCell a;
  GroupCell b;
  bool paired;
};

// Control-vs-participant contrasts, within-group shifts, and the placebo
// checks that should come out null.
const std::vector<PairSpec>& pair_specs() {
  static const std::vector<PairSpec> kPairs{
      {{"control", Window::Wm1}, {"T1", Window::Wm1}, false},
      {{"control", Window::W0}, {"T1", Window::W0}, false},
      {{"T1", Window::Wm1}, {"T1", Window::W0}, true},
      {{"T2", Window::W0}, {"T1", Window::W0}, false},
      {{"T2", Window::Wm1}, {"T2", Window::W0}, true},
      {{"control", Window::Wm2}, {"control", Window::W0}, true},
  };
  return kPairs;
}

MeanSd mean_sd(const std::vector<double>& x) {
  MeanSd m;
  m.n = x.size();
  if (x.empty()) return m;
  double sum = 0.0;
  for (double v : x) sum += v;
  m.mean = sum / static_cast<double>(x.size());
  if (x.size() >= 2) {
    double ss = 0.0;
    for (double v : x) ss += (v - *m.mean) * (v - *m.mean);
    m.sd = std::sqrt(ss / static_cast<double>(x.size() - 1));
  }
  return m;
}

Phq8Summary phq_summary(const std::vector<const SurveyResponse*>& rs) {
  Phq8Summary s;
  s.n = rs.size();
  if (rs.empty()) return s;
  double total = 0.0;
  for (const auto* r : rs) {
    const auto score = phq8_score(r->phq8);
    total += score.total;
    if (score.flagged) ++s.flagged;
  }
  s.mean_total = total / static_cast<double>(rs.size());
  return s;
}

AccuracySummary accuracy(const std::vector<const SurveyResponse*>& rs, bool friends,
                         const std::map<std::string, Valence, std::less<>>& actual) {
  std::vector<StatedValence> stated;
  for (const auto* r : rs) {
    const auto& v = friends ? r->friends_valence : r->own_valence;
    if (v && actual.contains(r->participant_id)) stated.push_back({r->participant_id, *v});
  }
  AccuracySummary a;
  a.eligible = stated.size();
  if (!stated.empty()) a.accuracy = self_report_accuracy(stated, actual);
  return a;
}

SurveySummary summarize_surveys(const store::Snapshot& s, const StudyView& view) {
  SurveySummary out;
  std::map<std::string, const SurveyResponse*> pre;
  std::map<std::string, const SurveyResponse*> post;
  for (const auto& r : s.surveys) (r.phase == SurveyPhase::Pre ? pre : post)[r.participant_id] = &r;
  out.pre_responses = pre.size();
  out.post_responses = post.size();

  std::vector<std::pair<const SurveyResponse*, const SurveyResponse*>> both;
  for (const auto& [id, r] : pre) {
    if (auto it = post.find(id); it != post.end()) both.emplace_back(r, it->second);
  }
  out.completed_both = both.size();

  for (int q = 0; q < kQuestionCount; ++q) {
    QuestionSummary qs;
    qs.question = q + 1;
    std::vector<double> all;
    std::vector<double> a;
    std::vector<double> b;
    for (const auto& [id, r] : pre) all.push_back(r->questions[static_cast<std::size_t>(q)]);
    for (const auto& [r0, r1] : both) {
      a.push_back(r0->questions[static_cast<std::size_t>(q)]);
      b.push_back(r1->questions[static_cast<std::size_t>(q)]);
    }
    qs.pre_all = mean_sd(all);
    qs.pre_both = mean_sd(a);
    qs.post_both = mean_sd(b);
    try {
      qs.paired = paired_t(a, b);
    } catch (const Error& e) {
      qs.note = std::string(to_string(e.code()));
    }
    out.questions.push_back(std::move(qs));
  }

  for (auto e : kEmojiChoices) out.emoji_pre[std::string(e)] = 0;
  for (const auto& [id, r] : pre) ++out.emoji_pre[r->emoji];

  std::vector<const SurveyResponse*> pre_list;
  std::vector<const SurveyResponse*> post_list;
  for (const auto& [id, r] : pre) pre_list.push_back(r);
  for (const auto& [id, r] : post) post_list.push_back(r);
  out.phq8_pre = phq_summary(pre_list);
  out.phq8_post = phq_summary(post_list);

  // Actual dominant valences: a participant's own posts with their own
  // relabels applied, and their control cohort's posts as classified.
  std::map<std::string, std::map<std::string, Valence>> overrides;
  for (const auto& o : s.overrides) overrides[o.user_id][o.post_id] = o.label;
  auto own_actual = [&](Window w) {
    std::map<std::string, Valence, std::less<>> out_map;
    for (const auto& p : s.participants) {
      const auto& mine = overrides[p.id];
      std::array<std::size_t, 3> counts{};
      const auto bounds = window_bounds(p.installed_at, w);
      for (const auto& lp : view.posts_of(p.id)) {
        if (lp.is_protected || !bounds.contains(lp.created_at)) continue;
        auto label = lp.label;
        if (auto it = mine.find(lp.post_id); it != mine.end()) label = it->second;
        if (label) ++counts[index_of(*label)];
      }
      if (auto d = dominant_valence(counts)) out_map.emplace(p.id, *d);
    }
    return out_map;
  };
  auto friends_actual = [&](Window w) {
    std::map<std::string, Valence, std::less<>> out_map;
    for (const auto& p : s.participants) {
      if (!p.control_cohort) continue;
      std::array<std::size_t, 3> counts{};
      const auto bounds = window_bounds(p.installed_at, w);
      for (const auto& f : *p.control_cohort) {
        for (const auto& lp : view.posts_of(f)) {
          if (lp.is_protected || !lp.label || !bounds.contains(lp.created_at)) continue;
          ++counts[index_of(*lp.label)];
        }
      }
      if (auto d = dominant_valence(counts)) out_map.emplace(p.id, *d);
    }
    return out_map;
  };
  const auto own_pre = own_actual(Window::Wm1);
  const auto own_post = own_actual(Window::W0);
  const auto friends_pre = friends_actual(Window::Wm1);
  const auto friends_post = friends_actual(Window::W0);
  out.own_pre = accuracy(pre_list, false, own_pre);
  out.own_post = accuracy(post_list, false, own_post);
  out.friends_pre = accuracy(pre_list, true, friends_pre);
  out.friends_post = accuracy(post_list, true, friends_post);
  return out;
}

}  // namespace

std::string GroupCell::label() const { return fmt::format("{} {}", group, to_string(window)); }

std::string PairTest::pair_name() const { return fmt::format("{} vs {}", a.label(), b.label()); }

const ShareRow* Report::find_share(std::string_view group, Window w) const {
  for (const auto& r : shares) {
    if (r.group == group && r.window == w) return &r;
  }
  return nullptr;
}

const PairTest* Report::find_test(std::string_view pair_name, Valence metric) const {
  for (const auto& t : tests) {
    if (t.metric == metric && t.pair_name() == pair_name) return &t;
  }
  return nullptr;
}

std::optional<ReportFormat> parse_report_format(std::string_view text) {
  if (text == "text" || text == "txt") return ReportFormat::Text;
  if (text == "csv") return ReportFormat::Csv;
  if (text == "json") return ReportFormat::Json;
  return std::nullopt;
}

std::map<std::string, ShareVector> cell_shares(const store::Snapshot& snapshot, std::string_view group,
                                               Window window) {
  return StudyView(snapshot).shares(group, window);
}

Report build_report(const store::Snapshot& snapshot, const ReportOptions& options) {
  if (snapshot.participants.empty()) {
    throw Error(Errc::EmptyStore, "the store holds no participants; nothing to report");
  }
  const StudyView view(snapshot);
  Report report;
  report.options = options;
  report.participants = snapshot.participants.size();
  report.control_users = view.members("control").size();
  report.posts = snapshot.posts.size();

  std::map<std::pair<std::string, Window>, std::map<std::string, ShareVector>> cells;
  for (auto group : kReportGroups) {
    for (auto w : kAllWindows) {
      auto shares = view.shares(group, w);
      ShareRow row{std::string(group), w, std::nullopt, {}};
      const auto vec = values_of(shares);
      try {
        row.summary = options.pooled_shares ? pooled_summary(vec, row.group, w)
                                            : group_summary(vec, row.group, w);
      } catch (const Error& e) {
        row.note = fmt::format("{}: {}", to_string(e.code()), e.what());
      }
      report.shares.push_back(std::move(row));
      cells.emplace(std::pair{std::string(group), w}, std::move(shares));
    }
  }

  for (const auto& spec : pair_specs()) {
    const auto& a = cells.at({spec.a.group, spec.a.window});
    const auto& b = cells.at({spec.b.group, spec.b.window});
    for (auto metric : kAllValences) {
      PairTest t;
      t.a = spec.a;
      t.b = spec.b;
      t.paired = spec.paired;
      t.metric = metric;
      std::vector<double> xa;
      std::vector<double> xb;
      if (spec.paired) {
        for (const auto& [id, s] : a) {
          if (auto it = b.find(id); it != b.end()) {
            xa.push_back(s.of(metric));
            xb.push_back(it->second.of(metric));
          }
        }
      } else {
        for (const auto& [id, s] : a) xa.push_back(s.of(metric));
        for (const auto& [id, s] : b) xb.push_back(s.of(metric));
      }
      t.n_a = xa.size();
      t.n_b = xb.size();
      try {
        t.result = spec.paired ? paired_t(xa, xb) : two_sample_t(xa, xb, options.two_sample_variant);
        t.significant = t.result->p < options.alpha;
      } catch (const Error& e) {
        t.note = std::string(to_string(e.code()));
      }
      report.tests.push_back(std::move(t));
    }
  }

  report.survey = summarize_surveys(snapshot, view);
  report.engagement = replay_engagement(snapshot.events, options.session_gap);
  return report;
}

}  // namespace moodifier::analysis
