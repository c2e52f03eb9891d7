#include "mouseauth/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mouseauth/error.hpp"
#include "mouseauth/rng.hpp"

namespace mouseauth {
namespace {

void check_set(const ScoredSet& scored) {
  if (scored.scores.size() != scored.labels.size()) {
    fail(ErrorCode::kLengthMismatch, "scores and labels differ in length");
  }
  if (scored.scores.empty()) fail(ErrorCode::kEmptySet, "empty scored set");
  for (int y : scored.labels) {
    if (y != kLegitimateClass && y != kImposterClass) {
      fail(ErrorCode::kLabelOutOfRange, "label " + std::to_string(y) + " out of range");
    }
  }
}

struct ClassSplit {
  std::vector<double> legit;
  std::vector<double> imposter;
};

ClassSplit by_class(const ScoredSet& scored) {
  check_set(scored);
  ClassSplit out;
  for (std::size_t i = 0; i < scored.scores.size(); ++i) {
    (scored.labels[i] == kLegitimateClass ? out.legit : out.imposter)
        .push_back(scored.scores[i]);
  }
  if (out.legit.empty() || out.imposter.empty()) {
    fail(ErrorCode::kSingleClass, "both classes are required");
  }
  std::sort(out.legit.begin(), out.legit.end());
  std::sort(out.imposter.begin(), out.imposter.end());
  return out;
}

// Number of sorted values >= threshold.
std::size_t count_at_or_above(const std::vector<double>& sorted, double threshold) {
  return static_cast<std::size_t>(
      sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), threshold));
}

MetricSummary summarize(const std::vector<double>& xs) {
  MetricSummary s;
  if (xs.empty()) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

}  // namespace

Confusion confusion_at(const ScoredSet& scored, double threshold) {
  check_set(scored);
  Confusion c;
  for (std::size_t i = 0; i < scored.scores.size(); ++i) {
    const bool accepted = scored.scores[i] >= threshold;
    if (scored.labels[i] == kLegitimateClass) {
      ++(accepted ? c.tp : c.fn);
    } else {
      ++(accepted ? c.fp : c.tn);
    }
  }
  return c;
}

double f1_score(const ScoredSet& scored, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "threshold must lie in [0, 1]");
  }
  const Confusion c = confusion_at(scored, threshold);
  const double tp = static_cast<double>(c.tp);
  const double precision = c.tp + c.fp > 0 ? tp / static_cast<double>(c.tp + c.fp) : 0.0;
  const double recall = c.tp + c.fn > 0 ? tp / static_cast<double>(c.tp + c.fn) : 0.0;
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double roc_auc(const ScoredSet& scored) {
  const ClassSplit cls = by_class(scored);
  // Twice the pair score: 2 per correctly ordered pair, 1 per tie.
  std::uint64_t doubled = 0;
  for (double s : cls.legit) {
    const auto lower = std::lower_bound(cls.imposter.begin(), cls.imposter.end(), s);
    const auto upper = std::upper_bound(lower, cls.imposter.end(), s);
    doubled += 2 * static_cast<std::uint64_t>(lower - cls.imposter.begin()) +
               static_cast<std::uint64_t>(upper - lower);
  }
  return static_cast<double>(doubled) /
         (2.0 * static_cast<double>(cls.legit.size()) *
          static_cast<double>(cls.imposter.size()));
}

namespace {

std::vector<double> candidate_thresholds(const ScoredSet& scored) {
  std::vector<double> t = scored.scores;
  t.push_back(0.0);
  t.push_back(1.0);
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

}  // namespace

EerPoint eer(const ScoredSet& scored) {
  const ClassSplit cls = by_class(scored);
  const double n_legit = static_cast<double>(cls.legit.size());
  const double n_imp = static_cast<double>(cls.imposter.size());
  EerPoint best;
  double best_gap = INFINITY;
  for (double t : candidate_thresholds(scored)) {
    const double far = static_cast<double>(count_at_or_above(cls.imposter, t)) / n_imp;
    const double frr =
        static_cast<double>(cls.legit.size() - count_at_or_above(cls.legit, t)) / n_legit;
    const double gap = std::abs(far - frr);
    if (gap < best_gap) {
      best_gap = gap;
      best = {(far + frr) / 2.0, t, far, frr};
    }
  }
  return best;
}

std::vector<RocPoint> roc_curve(const ScoredSet& scored) {
  const ClassSplit cls = by_class(scored);
  std::vector<RocPoint> out;
  const auto thresholds = candidate_thresholds(scored);
  for (auto it = thresholds.rbegin(); it != thresholds.rend(); ++it) {
    out.push_back({*it,
                   static_cast<double>(count_at_or_above(cls.imposter, *it)) /
                       static_cast<double>(cls.imposter.size()),
                   static_cast<double>(count_at_or_above(cls.legit, *it)) /
                       static_cast<double>(cls.legit.size())});
  }
  return out;
}

double dsr(std::span<const double> attack_scores, double threshold) {
  if (attack_scores.empty()) fail(ErrorCode::kEmptySet, "no attack scores");
  const auto rejected = std::count_if(attack_scores.begin(), attack_scores.end(),
                                      [&](double s) { return s < threshold; });
  return static_cast<double>(rejected) / static_cast<double>(attack_scores.size());
}

void SplitOptions::validate() const {
  if (!(pos_neg_ratio > 0.0)) fail(ErrorCode::kInvalidConfig, "pos_neg_ratio must be > 0");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    fail(ErrorCode::kInvalidConfig, "train_fraction must lie in (0, 1)");
  }
}

Split build_splits(const std::map<std::string, std::vector<Mau>>& users,
                   const std::string& legit_user, const SplitOptions& options) {
  options.validate();
  const auto legit_it = users.find(legit_user);
  if (legit_it == users.end()) {
    fail(ErrorCode::kInsufficientUsers, "legitimate user '" + legit_user + "' not found");
  }
  const std::size_t unseen_n =
      options.unseen_users.empty() ? options.unseen_count : options.unseen_users.size();
  if (users.size() < 2 + unseen_n) {
    fail(ErrorCode::kInsufficientUsers,
         "need at least " + std::to_string(2 + unseen_n) + " users, have " +
             std::to_string(users.size()));
  }

  Rng rng(options.seed);
  Split split;
  split.legit_user = legit_user;
  std::vector<std::string> others;
  for (const auto& [user, maus] : users) {
    if (user != legit_user) others.push_back(user);
  }
  rng.shuffle(std::span<std::string>(others));
  if (options.unseen_users.empty()) {
    split.unseen_users.assign(others.begin(),
                              others.begin() + static_cast<std::ptrdiff_t>(options.unseen_count));
    split.known_users.assign(others.begin() + static_cast<std::ptrdiff_t>(options.unseen_count),
                             others.end());
  } else {
    for (const auto& u : options.unseen_users) {
      if (u == legit_user || !users.contains(u)) {
        fail(ErrorCode::kInsufficientUsers, "unseen user '" + u + "' is not an imposter in the data");
      }
    }
    for (const auto& u : others) {
      const bool unseen = std::find(options.unseen_users.begin(), options.unseen_users.end(), u) !=
                          options.unseen_users.end();
      (unseen ? split.unseen_users : split.known_users).push_back(u);
    }
    if (split.known_users.empty()) {
      fail(ErrorCode::kInsufficientUsers, "no known imposters left for training");
    }
  }
  std::sort(split.unseen_users.begin(), split.unseen_users.end());
  std::sort(split.known_users.begin(), split.known_users.end());

  std::vector<const Mau*> legit;
  for (const auto& m : legit_it->second) legit.push_back(&m);
  if (legit.size() < 2) {
    fail(ErrorCode::kInsufficientData, "legitimate user needs at least 2 MAUs");
  }
  rng.shuffle(std::span<const Mau*>(legit));
  const auto train_pos = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(options.train_fraction *
                                            static_cast<double>(legit.size()))),
      1, legit.size() - 1);
  const std::size_t test_pos = legit.size() - train_pos;

  std::vector<const Mau*> pool;
  for (const auto& user : split.known_users) {
    for (const auto& m : users.at(user)) pool.push_back(&m);
  }
  rng.shuffle(std::span<const Mau*>(pool));
  auto negatives_for = [&](std::size_t positives) {
    return std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::llround(static_cast<double>(positives) / options.pos_neg_ratio)));
  };
  const std::size_t train_neg = negatives_for(train_pos);
  const std::size_t test_neg = negatives_for(test_pos);
  if (pool.size() < train_neg + test_neg) {
    fail(ErrorCode::kInsufficientData,
         "known imposters provide " + std::to_string(pool.size()) + " MAUs, need " +
             std::to_string(train_neg + test_neg));
  }

  for (std::size_t i = 0; i < legit.size(); ++i) {
    (i < train_pos ? split.train : split.test).push_back({*legit[i], kLegitimateClass, false});
  }
  for (std::size_t i = 0; i < train_neg + test_neg; ++i) {
    (i < train_neg ? split.train : split.test).push_back({*pool[i], kImposterClass, false});
  }
  for (const auto& user : split.unseen_users) {
    for (const auto& m : users.at(user)) split.test.push_back({m, kImposterClass, true});
  }
  if (split.test.size() == test_pos + test_neg) {
    fail(ErrorCode::kInsufficientData, "unseen users contribute no MAUs");
  }
  return split;
}

EvalReport evaluate_scores(const ScoredSet& scored, const std::vector<bool>& unseen) {
  if (unseen.size() != scored.scores.size()) {
    fail(ErrorCode::kLengthMismatch, "unseen flags differ in length from scores");
  }
  EvalReport report;
  report.samples = scored.scores.size();
  report.f1 = f1_score(scored, kDecisionThreshold);
  report.auc = roc_auc(scored);
  const EerPoint point = eer(scored);
  report.eer = point.eer;
  report.eer_threshold = point.threshold;
  report.counts = confusion_at(scored, kDecisionThreshold);

  std::vector<double> attack;
  for (std::size_t i = 0; i < unseen.size(); ++i) {
    if (unseen[i]) attack.push_back(scored.scores[i]);
  }
  report.unseen_samples = attack.size();
  if (!attack.empty()) {
    report.dsr = dsr(attack, kDecisionThreshold);
    report.dsr_at_eer = dsr(attack, point.threshold);
  }
  return report;
}

EvalReport blind_attack_eval(const ModelParams& params, const Split& split,
                             std::size_t threads) {
  std::vector<Mau> batch;
  ScoredSet scored;
  std::vector<bool> unseen;
  bool any_unseen = false;
  for (const auto& s : split.test) {
    batch.push_back(s.mau);
    scored.labels.push_back(s.label);
    unseen.push_back(s.unseen);
    any_unseen = any_unseen || s.unseen;
  }
  if (!any_unseen) {
    fail(ErrorCode::kInvalidArgument, "test split has no unseen-user MAUs");
  }
  scored.scores = predict_batch(params, batch, threads);
  EvalReport report = evaluate_scores(scored, unseen);
  report.legit_user = split.legit_user;
  return report;
}

AggregateReport aggregate_reports(std::span<const EvalReport> reports) {
  AggregateReport agg;
  agg.users = reports.size();
  std::vector<double> f1, auc, eer_values, dsr_values;
  for (const auto& r : reports) {
    f1.push_back(r.f1);
    auc.push_back(r.auc);
    eer_values.push_back(r.eer);
    if (r.dsr) dsr_values.push_back(*r.dsr);
  }
  agg.f1 = summarize(f1);
  agg.auc = summarize(auc);
  agg.eer = summarize(eer_values);
  agg.dsr = summarize(dsr_values);
  return agg;
}

}  // namespace mouseauth
