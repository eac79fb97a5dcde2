#include "moodifier/experiment/synthetic_study.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <set>

#include <fmt/format.h>

#include "moodifier/analysis/special_functions.hpp"
#include "moodifier/common/error.hpp"
#include "moodifier/sentiment/synthetic_corpus.hpp"

namespace moodifier::experiment {

namespace {

using std::chrono::sys_days;

// Pre-survey means/stds for Q1..Q7 and the mean pre-to-post change among
// participants who returned both surveys.
constexpr std::array<double, 7> kPreMean{44.5, 46.3, 52.9, 21.6, 61.2, 58.7, 50.2};
constexpr std::array<double, 7> kPreSd{28.1, 24.1, 28.5, 22.1, 30.9, 31.6, 24.3};
constexpr std::array<double, 7> kPrePostShift{10.7, 9.8, 13.0, 12.6, 11.2, 18.1, 12.5};
constexpr double kPostNoiseSd = 15.0;

constexpr std::array<double, 4> kPhqItemWeights{0.52, 0.30, 0.12, 0.06};
constexpr std::array<double, 6> kEmojiWeights{0.08, 0.17, 0.45, 0.15, 0.10, 0.05};

void check_mixture(const Mixture& m, std::string_view where) {
  const auto a = m.as_array();
  double sum = 0.0;
  for (double x : a) {
    if (!std::isfinite(x) || x < 0.0) {
      throw Error(Errc::InvalidMixture, fmt::format("{}: components must be finite and >= 0", where));
    }
    sum += x;
  }
  if (std::abs(sum - 100.0) > 0.5) {
    throw Error(Errc::InvalidMixture,
                fmt::format("{}: components sum to {} instead of 100", where, sum));
  }
}

std::array<double, 3> fractions(const Mixture& m) {
  auto a = m.as_array();
  const double sum = a[0] + a[1] + a[2];
  for (auto& x : a) x /= sum;
  return a;
}

Valence draw_valence(const std::array<double, 3>& probs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = u(rng);
  if (r < probs[0]) return Valence::Positive;
  if (r < probs[0] + probs[1]) return Valence::Neutral;
  return probs[2] > 0.0 ? Valence::Negative : Valence::Neutral;
}

Valence other_valence(Valence v, std::mt19937_64& rng) {
  std::array<Valence, 2> others{};
  std::size_t n = 0;
  for (auto c : kAllValences) {
    if (c != v) others[n++] = c;
  }
  return others[rng() % 2];
}

Timestamp uniform_time(const TimeRange& r, std::mt19937_64& rng) {
  std::uniform_int_distribution<long long> d(0, (r.to - r.from).count() - 1);
  return r.from + Seconds{d(rng)};
}

int clamp_answer(double x) { return static_cast<int>(std::clamp(std::lround(x), 1L, 100L)); }

struct UserPlan {
  std::string id;
  Cohort cohort;
  Timestamp anchor;
  bool is_protected = false;
};

class Generator {
 public:
  Generator(const StudySpec& spec, std::uint64_t seed)
      : spec_(spec), rng_(seed), text_(seed ^ 0x9e3779b97f4a7c15ULL) {}

  StudyData run() {
    make_participants();
    make_controls();
    make_posts();
    if (spec_.surveys.enabled) make_surveys();
    if (spec_.engagement.enabled) make_engagement();
    return std::move(data_);
  }

 private:
  const StudySpec& spec_;
  std::mt19937_64 rng_;
  sentiment::SyntheticTextGenerator text_;
  StudyData data_;
  std::vector<UserPlan> users_;
  // Planted label per post id, and per-(user, window) label counts.
  std::map<std::string, Valence, std::less<>> planted_;
  std::map<std::pair<std::string, Window>, std::array<std::size_t, 3>> counts_;
  std::map<std::string, std::vector<std::string>> w0_posts_by_author_;

  void make_participants() {
    std::vector<std::pair<TreatmentGroup, bool>> slots;
    for (std::size_t i = 0; i < spec_.t1_users; ++i) slots.emplace_back(TreatmentGroup::T1, false);
    for (std::size_t i = 0; i < spec_.t2_users; ++i) slots.emplace_back(TreatmentGroup::T2, false);
    for (std::size_t i = 0; i < spec_.protected_users; ++i) {
      slots.emplace_back(i % 2 == 0 ? TreatmentGroup::T1 : TreatmentGroup::T2, true);
    }
    std::shuffle(slots.begin(), slots.end(), rng_);

    const TimeRange recruitment{spec_.start + days(14), spec_.start + days(28)};
    for (std::size_t i = 0; i < slots.size(); ++i) {
      Participant p;
      p.id = fmt::format("p{:05}", i + 1);
      p.handle = fmt::format("user_{:05}", i + 1);
      p.group = slots[i].first;
      p.protected_account = slots[i].second;
      p.installed_at = uniform_time(recruitment, rng_);
      p.control_cohort = std::vector<std::string>{};
      data_.participants.push_back(p);
      users_.push_back({p.id, p.group == TreatmentGroup::T1 ? Cohort::T1 : Cohort::T2,
                        p.installed_at, p.protected_account});
    }
  }

  void make_controls() {
    const std::size_t n_participants = data_.participants.size();
    for (std::size_t k = 0; k < spec_.control_users; ++k) {
      auto& home = data_.participants[k % n_participants];
      std::string id = fmt::format("c{:05}", k + 1);
      home.control_cohort->push_back(id);
      users_.push_back({std::move(id), Cohort::Control, home.installed_at, false});
    }
  }

  void make_posts() {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double rho = std::clamp(spec_.persistence, 0.0, 1.0);
    const double shared = std::sqrt(rho);
    const double own = std::sqrt(1.0 - rho);

    for (const auto& user : users_) {
      const double latent = gauss(rng_);
      const std::size_t per_window = user.cohort == Cohort::Control
                                         ? spec_.control_posts_per_window
                                         : spec_.treatment_posts_per_window;
      for (auto w : kAllWindows) {
        const double g = shared * latent + own * gauss(rng_);
        const auto mix = user.is_protected
                             ? std::array<double, 3>{0.0, 1.0, 0.0}
                             : user_mixture(spec_.cells.at({user.cohort, w}), g);
        const auto bounds = window_bounds(user.anchor, w);
        auto& counts = counts_[{user.id, w}];
        for (std::size_t i = 0; i < per_window; ++i) {
          const Valence v = draw_valence(mix, rng_);
          Post post;
          post.id = fmt::format("{}-{}-{:03}", user.id, to_string(w), i);
          post.author_id = user.id;
          post.created_at = uniform_time(bounds, rng_);
          post.text = text_.text(v);
          post.is_protected = user.is_protected;
          if (u(rng_) < spec_.quoted_share) post.quoted_text = text_.text(v);
          if (!user.is_protected) {
            data_.labels.push_back({post.id, v, 0.0, "planted"});
            planted_.emplace(post.id, v);
            ++counts[index_of(v)];
            if (w == Window::W0) w0_posts_by_author_[user.id].push_back(post.id);
          }
          data_.posts.push_back(std::move(post));
        }
      }
    }
  }

  std::optional<Valence> own_actual(const Participant& p, Window w) const {
    const auto it = counts_.find({p.id, w});
    if (it == counts_.end()) return std::nullopt;
    return analysis::dominant_valence(it->second);
  }

  std::optional<Valence> friends_actual(const Participant& p, Window w) const {
    std::array<std::size_t, 3> pooled{};
    for (const auto& f : *p.control_cohort) {
      const auto it = counts_.find({f, w});
      if (it == counts_.end()) continue;
      for (std::size_t k = 0; k < 3; ++k) pooled[k] += it->second[k];
    }
    return analysis::dominant_valence(pooled);
  }

  // Assigns stated valences so that exactly round(share * eligible) of the
  // participants with a defined actual value agree with it.
  std::map<std::string, Valence> plant_statements(
      const std::vector<const Participant*>& who, double share,
      const std::function<std::optional<Valence>(const Participant&)>& actual_of) {
    std::vector<std::pair<const Participant*, Valence>> eligible;
    std::map<std::string, Valence> out;
    for (const auto* p : who) {
      if (auto a = actual_of(*p)) {
        eligible.emplace_back(p, *a);
      } else {
        out[p->id] = kAllValences[rng_() % 3];
      }
    }
    std::shuffle(eligible.begin(), eligible.end(), rng_);
    const auto agree = static_cast<std::size_t>(std::llround(share * static_cast<double>(eligible.size())));
    for (std::size_t i = 0; i < eligible.size(); ++i) {
      const auto& [p, actual] = eligible[i];
      out[p->id] = i < agree ? actual : other_valence(actual, rng_);
    }
    return out;
  }

  void make_surveys() {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::discrete_distribution<int> phq_item(kPhqItemWeights.begin(), kPhqItemWeights.end());
    std::discrete_distribution<std::size_t> emoji(kEmojiWeights.begin(), kEmojiWeights.end());
    std::uniform_real_distribution<double> u(0.0, 1.0);

    std::vector<const Participant*> everyone;
    for (const auto& p : data_.participants) everyone.push_back(&p);
    std::vector<const Participant*> completers = everyone;
    std::shuffle(completers.begin(), completers.end(), rng_);
    completers.resize(static_cast<std::size_t>(
        std::llround(spec_.surveys.post_completion * static_cast<double>(everyone.size()))));
    std::sort(completers.begin(), completers.end(),
              [](const Participant* a, const Participant* b) { return a->id < b->id; });

    const auto own_pre = plant_statements(everyone, spec_.surveys.own_agreement_pre,
                                          [this](const Participant& p) { return own_actual(p, Window::Wm1); });
    const auto friends_pre =
        plant_statements(everyone, spec_.surveys.friends_agreement_pre,
                         [this](const Participant& p) { return friends_actual(p, Window::Wm1); });
    const auto own_post = plant_statements(completers, spec_.surveys.own_agreement_post,
                                           [this](const Participant& p) { return own_actual(p, Window::W0); });
    const auto friends_post =
        plant_statements(completers, spec_.surveys.friends_agreement_post,
                         [this](const Participant& p) { return friends_actual(p, Window::W0); });

    std::map<std::string, analysis::SurveyResponse> pre_by_id;
    for (const auto* p : everyone) {
      analysis::SurveyResponse r;
      r.participant_id = p->id;
      r.phase = analysis::SurveyPhase::Pre;
      r.submitted_at = p->installed_at;
      for (std::size_t q = 0; q < 7; ++q) r.questions[q] = clamp_answer(kPreMean[q] + kPreSd[q] * gauss(rng_));
      r.emoji = std::string(analysis::kEmojiChoices[emoji(rng_)]);
      r.own_valence = own_pre.at(p->id);
      r.friends_valence = friends_pre.at(p->id);
      for (auto& item : r.phq8) item = phq_item(rng_);
      r.free_text = "curious about my feed";
      pre_by_id.emplace(p->id, r);
      data_.surveys.push_back(std::move(r));
    }
    for (const auto* p : completers) {
      const auto& pre = pre_by_id.at(p->id);
      analysis::SurveyResponse r = pre;
      r.phase = analysis::SurveyPhase::Post;
      r.submitted_at = p->installed_at + days(7);
      for (std::size_t q = 0; q < 7; ++q) {
        r.questions[q] = clamp_answer(pre.questions[q] + kPrePostShift[q] + kPostNoiseSd * gauss(rng_));
      }
      r.own_valence = own_post.at(p->id);
      r.friends_valence = friends_post.at(p->id);
      for (auto& item : r.phq8) {
        if (u(rng_) < 0.2) item = phq_item(rng_);
      }
      r.free_text = "the filters helped me notice the tone of my feed";
      data_.surveys.push_back(std::move(r));
    }
  }

  void make_engagement() {
    const auto& plan = spec_.engagement;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> session_count(1, std::max(1, 2 * plan.sessions_per_day - 1));
    std::uniform_int_distribution<int> jitter(0, 20 * 60);
    std::poisson_distribution<int> extra_displayed(std::max(0.0, plan.displayed_per_view_session - 1.0));
    std::discrete_distribution<int> mode_pick(plan.mode_share.begin(), plan.mode_share.end());
    constexpr std::array<ViewMode, 3> kViewModes{ViewMode::MoodColors, ViewMode::PositiveOnly,
                                                 ViewMode::NegativeOnly};
    auto& tally = data_.tally;

    for (const auto& p : data_.participants) {
      std::vector<std::string> feed_posts;
      for (const auto& f : *p.control_cohort) {
        if (auto it = w0_posts_by_author_.find(f); it != w0_posts_by_author_.end()) {
          feed_posts.insert(feed_posts.end(), it->second.begin(), it->second.end());
        }
      }
      const bool relabeler = u(rng_) < plan.relabeling_user_share;
      std::set<std::string> relabeled;
      std::size_t seq = 0;
      auto emit = [&](Timestamp at, EventPayload payload) {
        data_.events.push_back({fmt::format("{}:{:06}", p.id, seq++), p.id, at, std::move(payload)});
      };

      for (int d = 0; d < 7; ++d) {
        const Timestamp day_start = p.installed_at + days(d);
        const int k = session_count(rng_);
        for (int s = 0; s < k; ++s) {
          const Timestamp t0 = day_start + Seconds{86400LL * s / k + jitter(rng_)};
          ++tally.sessions;
          emit(t0, events::ViewActivated{ViewMode::Original});
          if (u(rng_) >= plan.view_session_share) continue;

          ++tally.view_sessions;
          const ViewMode mode = kViewModes[static_cast<std::size_t>(mode_pick(rng_))];
          ++tally.activations[static_cast<std::size_t>(mode)];
          emit(t0 + Seconds{60}, events::ViewActivated{mode});
          const int shown = 1 + extra_displayed(rng_);
          tally.displayed += static_cast<std::size_t>(shown);
          emit(t0 + Seconds{120}, events::PostsDisplayed{shown});

          int offset = 180;
          if (relabeler && !feed_posts.empty()) {
            for (int i = 0; i < shown; ++i) {
              if (u(rng_) >= plan.relabel_rate) continue;
              const auto& post_id = feed_posts[rng_() % feed_posts.size()];
              if (!relabeled.insert(post_id).second) continue;
              const Valence from = planted_.at(post_id);
              const Valence to = other_valence(from, rng_);
              const Timestamp at = t0 + Seconds{offset++};
              emit(at, events::Relabel{post_id, from, to});
              data_.overrides.push_back({p.id, post_id, to, at});
              ++tally.relabels;
            }
          }
          if (mode == ViewMode::NegativeOnly && u(rng_) < 0.2) {
            emit(t0 + Seconds{60 + 901}, events::Reminder{});
            emit(t0 + Seconds{60 + 1000}, events::ViewActivated{ViewMode::Original});
          } else {
            emit(t0 + Seconds{600}, events::ViewActivated{ViewMode::Original});
          }
        }
      }
      if (!relabeled.empty()) ++tally.relabeling_users;
    }
  }
};

}  // namespace

std::string_view to_string(Cohort c) {
  switch (c) {
    case Cohort::Control: return "control";
    case Cohort::T1: return "T1";
    case Cohort::T2: return "T2";
  }
  return "control";
}

StudySpec StudySpec::published_defaults() {
  using namespace std::chrono;
  StudySpec s;
  s.start = sys_days{year{2019} / March / 1};
  auto set = [&s](Cohort c, Window w, Mixture m) { s.cells[{c, w}] = CellPlan{m, 0.0}; };
  set(Cohort::Control, Window::Wm2, {29.3, 64.9, 5.8});
  set(Cohort::Control, Window::Wm1, {30.3, 64.1, 5.7});
  set(Cohort::Control, Window::W0, {28.2, 65.9, 5.9});
  set(Cohort::T1, Window::Wm2, {26.8, 68.2, 5.0});
  set(Cohort::T2, Window::Wm2, {26.8, 68.2, 5.0});
  set(Cohort::T1, Window::Wm1, {34.7, 62.8, 2.5});
  set(Cohort::T1, Window::W0, {16.9, 79.7, 3.4});
  set(Cohort::T2, Window::Wm1, {27.8, 69.4, 2.8});
  set(Cohort::T2, Window::W0, {31.9, 64.3, 3.8});
  return s;
}

StudySpec& StudySpec::with_published_spread() {
  auto set = [this](Cohort c, Window w, double sd) { cells[{c, w}].neutral_sd = sd; };
  set(Cohort::Control, Window::Wm2, 26.1);
  set(Cohort::Control, Window::Wm1, 26.1);
  set(Cohort::Control, Window::W0, 26.7);
  set(Cohort::T1, Window::Wm2, 30.8);
  set(Cohort::T1, Window::Wm1, 30.8);
  set(Cohort::T1, Window::W0, 21.3);
  set(Cohort::T2, Window::Wm2, 30.8);
  set(Cohort::T2, Window::Wm1, 30.8);
  set(Cohort::T2, Window::W0, 31.1);
  return *this;
}

void StudySpec::validate() const {
  const std::size_t participants = t1_users + t2_users + protected_users;
  if (control_users > 0 && control_users > kControlCohortCap * participants) {
    throw Error(Errc::InvalidArgument,
                fmt::format("{} control users do not fit into {} cohorts of at most {}",
                            control_users, participants, kControlCohortCap));
  }
  if (!(persistence >= 0.0 && persistence <= 1.0)) {
    throw Error(Errc::InvalidArgument, "persistence must lie in [0, 1]");
  }
  auto needs = [&](Cohort c) {
    switch (c) {
      case Cohort::Control: return control_users > 0;
      case Cohort::T1: return t1_users > 0;
      case Cohort::T2: return t2_users > 0;
    }
    return false;
  };
  for (auto c : {Cohort::Control, Cohort::T1, Cohort::T2}) {
    if (!needs(c)) continue;
    for (auto w : kAllWindows) {
      const auto where = fmt::format("{} {}", to_string(c), to_string(w));
      const auto it = cells.find({c, w});
      if (it == cells.end()) throw Error(Errc::InvalidMixture, fmt::format("{}: no mixture", where));
      check_mixture(it->second.mean, where);
      const double sd = it->second.neutral_sd / 100.0;
      if (sd < 0.0 || !std::isfinite(sd)) {
        throw Error(Errc::InvalidMixture, fmt::format("{}: neutral_sd must be >= 0", where));
      }
      if (sd > 0.0) {
        const double m = fractions(it->second.mean)[1];
        if (!(m > 0.0 && m < 1.0) || sd * sd >= m * (1.0 - m)) {
          throw Error(Errc::InvalidMixture,
                      fmt::format("{}: neutral_sd too large for mean {}", where, 100.0 * m));
        }
      }
    }
  }
}

std::array<double, 3> user_mixture(const CellPlan& plan, double g) {
  auto f = fractions(plan.mean);
  if (plan.neutral_sd <= 0.0) return f;
  const double m = f[1];
  const double var = (plan.neutral_sd / 100.0) * (plan.neutral_sd / 100.0);
  const double nu = m * (1.0 - m) / var - 1.0;
  const double neutral =
      analysis::inverse_regularized_incomplete_beta(m * nu, (1.0 - m) * nu, analysis::normal_cdf(g));
  const double polar = f[0] + f[2];
  const double rest = 1.0 - neutral;
  if (polar <= 0.0) return {rest / 2.0, neutral, rest / 2.0};
  return {rest * f[0] / polar, neutral, rest * f[2] / polar};
}

StudyData generate_synthetic_study(const StudySpec& spec, std::uint64_t seed) {
  spec.validate();
  return Generator(spec, seed).run();
}

}  // namespace moodifier::experiment
