#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mouseauth/mau.hpp"
#include "mouseauth/model.hpp"

namespace mouseauth {

/// Scores are probabilities of the legitimate class; labels use
/// kLegitimateClass / kImposterClass. A sample is accepted when its score is
/// at or above the threshold.
struct ScoredSet {
  std::vector<double> scores;
  std::vector<int> labels;
};

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

Confusion confusion_at(const ScoredSet& scored, double threshold);

double f1_score(const ScoredSet& scored, double threshold);

/// Mann-Whitney form: share of (legitimate, imposter) pairs ordered
/// correctly, ties worth one half.
double roc_auc(const ScoredSet& scored);

struct EerPoint {
  double eer = 0.0;
  double threshold = 0.0;
  double far = 0.0;
  double frr = 0.0;
};

/// Sweeps every distinct score plus 0 and 1, keeps the threshold minimising
/// |FAR - FRR| (lowest on ties) and reports (FAR + FRR) / 2 there.
EerPoint eer(const ScoredSet& scored);

struct RocPoint {
  double threshold = 0.0;
  double far = 0.0;
  double tpr = 0.0;
};
std::vector<RocPoint> roc_curve(const ScoredSet& scored);

/// Share of attack scores rejected (below the threshold).
double dsr(std::span<const double> attack_scores, double threshold);

struct SplitSample {
  Mau mau;
  int label = kImposterClass;
  bool unseen = false;
};

struct Split {
  std::string legit_user;
  std::vector<std::string> known_users;
  std::vector<std::string> unseen_users;
  std::vector<SplitSample> train;
  std::vector<SplitSample> test;
};

struct SplitOptions {
  double pos_neg_ratio = 5.0;
  std::size_t unseen_count = 1;
  /// Names the held-out users instead of drawing `unseen_count` at random.
  std::vector<std::string> unseen_users;
  /// Share of the legitimate user's MAUs used for training.
  double train_fraction = 0.7;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Train: legitimate MAUs plus known-imposter MAUs at pos_neg_ratio.
/// Test: held-out legitimate MAUs, fresh known-imposter MAUs at the same
/// ratio, and every MAU of `unseen_count` users absent from training.
Split build_splits(const std::map<std::string, std::vector<Mau>>& users,
                   const std::string& legit_user, const SplitOptions& options);

struct EvalReport {
  std::string legit_user;
  double f1 = 0.0;
  double auc = 0.0;
  double eer = 0.0;
  double eer_threshold = 0.0;
  std::optional<double> dsr;         // unseen users, threshold 0.5
  std::optional<double> dsr_at_eer;  // unseen users, EER threshold
  Confusion counts;                  // whole test set, threshold 0.5
  std::size_t samples = 0;
  std::size_t unseen_samples = 0;
};

inline constexpr double kDecisionThreshold = 0.5;

EvalReport evaluate_scores(const ScoredSet& scored, const std::vector<bool>& unseen);

/// Scores the test split with predict() and evaluates it.
EvalReport blind_attack_eval(const ModelParams& params, const Split& split,
                             std::size_t threads = 1);

struct MetricSummary {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation; 0 for a single report
};

struct AggregateReport {
  std::size_t users = 0;
  MetricSummary f1, auc, eer, dsr;
};

/// Unweighted mean over per-user reports; DSR over the reports that have one.
AggregateReport aggregate_reports(std::span<const EvalReport> reports);

}  // namespace mouseauth
