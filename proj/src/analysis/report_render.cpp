#include <json.hpp>

#include <fmt/format.h>

#include "moodifier/analysis/report.hpp"

namespace moodifier::analysis {

namespace {

using nlohmann::json;

std::string fixed(std::optional<double> v, int digits) {
  return v ? fmt::format("{:.{}f}", *v, digits) : std::string("-");
}

std::string p_text(const PairTest& t) {
  if (!t.result) return fmt::format("n/a ({})", t.note);
  return fmt::format("{:.4f}{}", t.result->p, t.significant ? "*" : "");
}

json json_opt(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

json json_mean_sd(const MeanSd& m) {
  return {{"n", m.n}, {"mean", json_opt(m.mean)}, {"std", json_opt(m.sd)}};
}

json json_ttest(const std::optional<TTestResult>& r) {
  if (!r) return nullptr;
  return {{"t", r->t}, {"dof", r->dof}, {"p", r->p}, {"variant", to_string(r->variant)}};
}

json json_accuracy(const AccuracySummary& a) {
  return {{"eligible", a.eligible}, {"accuracy", json_opt(a.accuracy)}};
}

json json_phq(const Phq8Summary& s) {
  return {{"n", s.n}, {"mean_total", json_opt(s.mean_total)}, {"flagged", s.flagged}};
}

}  // namespace

std::string render_text(const Report& r) {
  std::string out;
  auto line = [&out](std::string s) {
    out += s;
    out += '\n';
  };
  line("MOODIFIER STUDY REPORT");
  line(fmt::format("participants: {}  control users: {}  posts: {}", r.participants, r.control_users,
                   r.posts));
  line(fmt::format("group shares: {}; two-sample test: {}; significance: p < {}",
                   r.options.pooled_shares ? "post-pooled" : "per-user mean",
                   to_string(r.options.two_sample_variant), r.options.alpha));
  line("");

  line("Emotional content by group and window (%, mean over users)");
  line(fmt::format("{:<8} {:<5} {:>6} {:>9} {:>8} {:>8}  {}", "group", "window", "users", "positive",
                   "neutral", "negative", ""));
  for (const auto& row : r.shares) {
    if (!row.summary) {
      line(fmt::format("{:<8} {:<5}  {}", row.group, to_string(row.window), row.note));
      continue;
    }
    const auto& s = *row.summary;
    line(fmt::format("{:<8} {:<6} {:>6} {:>9.1f} {:>8.1f} {:>8.1f}", row.group, to_string(row.window),
                     s.users, s.mean[0], s.mean[1], s.mean[2]));
  }
  line("");

  line("Standard deviations of user shares (%)");
  line(fmt::format("{:<8} {:<6} {:>9} {:>8} {:>8}", "group", "window", "positive", "neutral", "negative"));
  for (const auto& row : r.shares) {
    if (!row.summary) continue;
    const auto& s = *row.summary;
    line(fmt::format("{:<8} {:<6} {:>9.1f} {:>8.1f} {:>8.1f}", row.group, to_string(row.window), s.sd[0],
                     s.sd[1], s.sd[2]));
  }
  line("");

  line(fmt::format("P-values for group differences (* marks p < {})", r.options.alpha));
  line(fmt::format("{:<26} {:<11} {:>14} {:>14} {:>14}", "pair", "test", "positive", "neutral", "negative"));
  for (std::size_t i = 0; i + 2 < r.tests.size(); i += 3) {
    const auto& t = r.tests[i];
    line(fmt::format("{:<26} {:<11} {:>14} {:>14} {:>14}", t.pair_name(),
                     t.paired ? "paired" : to_string(r.options.two_sample_variant), p_text(r.tests[i]),
                     p_text(r.tests[i + 1]), p_text(r.tests[i + 2])));
  }
  line("");

  const auto& sv = r.survey;
  line(fmt::format("Surveys: {} pre, {} post, {} completed both", sv.pre_responses, sv.post_responses,
                   sv.completed_both));
  line(fmt::format("{:<4} {:>12} {:>12} {:>12} {:>12} {:>10}", "q", "pre (all)", "pre (both)", "post (both)",
                   "t", "p"));
  for (const auto& q : sv.questions) {
    auto cell = [](const MeanSd& m) { return fmt::format("{}±{}", fixed(m.mean, 1), fixed(m.sd, 1)); };
    line(fmt::format("Q{:<3} {:>12} {:>12} {:>12} {:>12} {:>10}", q.question, cell(q.pre_all),
                     cell(q.pre_both), cell(q.post_both),
                     q.paired ? fmt::format("{:.3f}", q.paired->t) : std::string("-"),
                     q.paired ? fmt::format("{:.3f}{}", q.paired->p, q.paired->p < r.options.alpha ? "*" : "")
                              : fmt::format("n/a ({})", q.note)));
  }
  std::string emoji = "emoji (pre):";
  for (const auto& [name, n] : sv.emoji_pre) emoji += fmt::format(" {}={}", name, n);
  line(emoji);
  line(fmt::format("PHQ-8 pre:  n={} mean={} flagged={}", sv.phq8_pre.n, fixed(sv.phq8_pre.mean_total, 2),
                   sv.phq8_pre.flagged));
  line(fmt::format("PHQ-8 post: n={} mean={} flagged={}", sv.phq8_post.n, fixed(sv.phq8_post.mean_total, 2),
                   sv.phq8_post.flagged));
  auto acc = [](const AccuracySummary& a) { return fmt::format("{} (n={})", fixed(a.accuracy, 3), a.eligible); };
  line(fmt::format("self-report accuracy, own posts:     pre {}  post {}", acc(sv.own_pre), acc(sv.own_post)));
  line(fmt::format("self-report accuracy, friends' posts: pre {}  post {}", acc(sv.friends_pre),
                   acc(sv.friends_post)));
  line("");

  const auto& e = r.engagement;
  line("Engagement");
  line(fmt::format("sessions: {}  with a view: {} ({:.1f}%)", e.sessions, e.view_sessions,
                   100.0 * e.view_session_share()));
  line(fmt::format("view activations: mood_colors {:.1f}%  positive_only {:.1f}%  negative_only {:.1f}%",
                   100.0 * e.mode_share(ViewMode::MoodColors), 100.0 * e.mode_share(ViewMode::PositiveOnly),
                   100.0 * e.mode_share(ViewMode::NegativeOnly)));
  line(fmt::format("posts displayed per participant-day: {:.2f}", e.daily_displayed_mean()));
  line(fmt::format("relabeling participants: {} of {} ({:.1f}%), relabel rate {:.2f}% of displayed posts",
                   e.relabeling_users, e.participants, 100.0 * e.relabeling_user_share(),
                   100.0 * e.relabel_rate()));
  line(fmt::format("reminders: {}  stats views: {}", e.reminders, e.stats_views));
  return out;
}

std::string render_shares_csv(const Report& r) {
  std::string out = "group,window,valence,mean,std\n";
  for (const auto& row : r.shares) {
    if (!row.summary) continue;
    for (auto v : kAllValences) {
      out += fmt::format("{},{},{},{:.6f},{:.6f}\n", row.group, to_string(row.window), to_string(v),
                         row.summary->mean_of(v), row.summary->sd_of(v));
    }
  }
  return out;
}

std::string render_tests_csv(const Report& r) {
  std::string out = "pair,metric,t,dof,p,significant\n";
  for (const auto& t : r.tests) {
    if (t.result) {
      out += fmt::format("{},{},{:.6f},{:.6f},{:.6g},{}\n", t.pair_name(), to_string(t.metric), t.result->t,
                         t.result->dof, t.result->p, t.significant ? "true" : "false");
    } else {
      out += fmt::format("{},{},,,,\n", t.pair_name(), to_string(t.metric));
    }
  }
  return out;
}

std::string render_csv(const Report& r) { return render_shares_csv(r) + "\n" + render_tests_csv(r); }

std::string render_json(const Report& r) {
  json doc;
  doc["options"] = {{"two_sample_variant", to_string(r.options.two_sample_variant)},
                    {"pooled_shares", r.options.pooled_shares},
                    {"alpha", r.options.alpha}};
  doc["participants"] = r.participants;
  doc["control_users"] = r.control_users;
  doc["posts"] = r.posts;

  json shares = json::array();
  for (const auto& row : r.shares) {
    json j{{"group", row.group}, {"window", to_string(row.window)}};
    if (row.summary) {
      j["users"] = row.summary->users;
      j["posts"] = row.summary->posts;
      for (auto v : kAllValences) {
        j["mean"][std::string(to_string(v))] = row.summary->mean_of(v);
        j["std"][std::string(to_string(v))] = row.summary->sd_of(v);
      }
    } else {
      j["note"] = row.note;
    }
    shares.push_back(std::move(j));
  }
  doc["shares"] = std::move(shares);

  json tests = json::array();
  for (const auto& t : r.tests) {
    json j{{"pair", t.pair_name()},
           {"metric", to_string(t.metric)},
           {"paired", t.paired},
           {"n_a", t.n_a},
           {"n_b", t.n_b},
           {"result", json_ttest(t.result)},
           {"significant", t.significant}};
    if (!t.result) j["note"] = t.note;
    tests.push_back(std::move(j));
  }
  doc["tests"] = std::move(tests);

  const auto& sv = r.survey;
  json questions = json::array();
  for (const auto& q : sv.questions) {
    questions.push_back({{"question", q.question},
                         {"pre_all", json_mean_sd(q.pre_all)},
                         {"pre_both", json_mean_sd(q.pre_both)},
                         {"post_both", json_mean_sd(q.post_both)},
                         {"paired", json_ttest(q.paired)}});
  }
  doc["survey"] = {{"pre_responses", sv.pre_responses},
                   {"post_responses", sv.post_responses},
                   {"completed_both", sv.completed_both},
                   {"questions", std::move(questions)},
                   {"emoji_pre", sv.emoji_pre},
                   {"phq8_pre", json_phq(sv.phq8_pre)},
                   {"phq8_post", json_phq(sv.phq8_post)},
                   {"accuracy",
                    {{"own_pre", json_accuracy(sv.own_pre)},
                     {"own_post", json_accuracy(sv.own_post)},
                     {"friends_pre", json_accuracy(sv.friends_pre)},
                     {"friends_post", json_accuracy(sv.friends_post)}}}};

  const auto& e = r.engagement;
  doc["engagement"] = {{"participants", e.participants},
                       {"sessions", e.sessions},
                       {"view_sessions", e.view_sessions},
                       {"view_session_share", e.view_session_share()},
                       {"mode_share",
                        {{"mood_colors", e.mode_share(ViewMode::MoodColors)},
                         {"positive_only", e.mode_share(ViewMode::PositiveOnly)},
                         {"negative_only", e.mode_share(ViewMode::NegativeOnly)}}},
                       {"displayed", e.displayed},
                       {"daily_displayed_mean", e.daily_displayed_mean()},
                       {"relabels", e.relabels},
                       {"relabeling_users", e.relabeling_users},
                       {"relabeling_user_share", e.relabeling_user_share()},
                       {"relabel_rate", e.relabel_rate()},
                       {"reminders", e.reminders},
                       {"stats_views", e.stats_views}};
  return doc.dump(2) + "\n";
}

std::string render(const Report& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::Text: return render_text(report);
    case ReportFormat::Csv: return render_csv(report);
    case ReportFormat::Json: return render_json(report);
  }
  return render_text(report);
}

}  // namespace moodifier::analysis
