// Acceptance checks: one PASS/FAIL/SKIP line per criterion, exit 1 on any FAIL.
//
// Criterion 8 needs real datasets. Point MOUSEAUTH_BALABIT_DIR and/or
// MOUSEAUTH_DFL_DIR at a directory with one sub-directory per user.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <thread>
#include <string>
#include <vector>

#include "mouseauth/error.hpp"
#include "mouseauth/eval.hpp"
#include "mouseauth/io.hpp"
#include "mouseauth/mau.hpp"
#include "mouseauth/model.hpp"
#include "mouseauth/pipeline.hpp"
#include "mouseauth/rng.hpp"
#include "mouseauth/sufficiency.hpp"
#include "mouseauth/synth.hpp"

using namespace mouseauth;

namespace {

enum class Outcome { kPass, kFail, kSkip };

struct Result {
  Outcome outcome;
  std::string detail;
};

Result verdict(bool ok, std::string detail) {
  return {ok ? Outcome::kPass : Outcome::kFail, std::move(detail)};
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<double> gaussian(std::size_t n, double mean, double sd, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& x : out) x = rng.normal(mean, sd);
  return out;
}

double sample_sd(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// 1. KDE integrates to one on the padded grid.
Result kde_normalization() {
  const auto s = gaussian(1000, 20.0, 3.0, 1);
  const double h = silverman_bandwidth(s);
  const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
  const auto est = kde(s, uniform_grid(*lo - 5 * h, *hi + 5 * h, kGridPoints), h);
  const double integral = trapezoid(est.grid, est.density);
  return verdict(std::abs(integral - 1.0) <= 1e-3, fmt("integral=%.9f", integral));
}

// 2. KL between two unit Gaussians one apart is 0.5.
Result kl_oracle() {
  const auto a = gaussian(5000, 0.0, 1.0, 2);
  const auto b = gaussian(5000, 1.0, 1.0, 3);
  const double ha = silverman_bandwidth(a), hb = silverman_bandwidth(b);
  double lo = std::min(*std::min_element(a.begin(), a.end()), *std::min_element(b.begin(), b.end()));
  double hi = std::max(*std::max_element(a.begin(), a.end()), *std::max_element(b.begin(), b.end()));
  const double pad = 5 * std::max(ha, hb);
  const auto grid = uniform_grid(lo - pad, hi + pad, 2048);
  const auto p = kde(a, grid, ha);
  const auto q = kde(b, grid, hb);
  const double kl = kl_divergence(p, q);
  const double self = kl_divergence(p, p);
  return verdict(std::abs(kl - 0.5) <= 0.125 && self == 0.0,
                 fmt("KL=%.4f (closed form 0.5), KL(p||p)=%g", kl, self));
}

// 3. Sufficiency converges on stationary streams, consistently across seeds.
Result sufficiency_convergence() {
  std::vector<std::size_t> found;
  bool minimal = true;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const VelocitySequence vel{"u", "s", 0.01, gaussian(50000, 20.0, 2.0, 100 + seed)};
    const auto r = sufficiency_point(vel, 200, 1e-4, 1e-6);
    if (!r.n_hat) return verdict(false, fmt("seed %llu exhausted", (unsigned long long)seed));
    found.push_back(*r.n_hat);
    std::size_t idx = 0;
    while (r.kl_trajectory[idx].n != *r.n_hat) ++idx;
    minimal = minimal && satisfies_conditions(r, idx);
    for (std::size_t i = 0; i < idx; ++i) minimal = minimal && !satisfies_conditions(r, i);
  }
  const auto [lo, hi] = std::minmax_element(found.begin(), found.end());
  std::string list;
  for (auto n : found) list += (list.empty() ? "" : ",") + std::to_string(n);
  return verdict(*hi <= 2 * *lo && minimal,
                 "n_hat=[" + list + "]" + (minimal ? " minimal" : " NOT minimal"));
}

double brute_apen(const std::vector<double>& u, std::size_t m, double r) {
  auto phi = [&](std::size_t len) {
    const std::size_t w = u.size() - len + 1;
    double sum = 0.0;
    for (std::size_t i = 0; i < w; ++i) {
      std::size_t c = 0;
      for (std::size_t j = 0; j < w; ++j) {
        double d = 0.0;
        for (std::size_t k = 0; k < len; ++k) d = std::max(d, std::abs(u[i + k] - u[j + k]));
        c += d <= r;
      }
      sum += std::log(static_cast<double>(c) / static_cast<double>(w));
    }
    return sum / static_cast<double>(w);
  };
  return phi(m) - phi(m + 1);
}

// 4. ApEn: constant is zero, noise beats a sine, brute force agrees.
Result apen_oracles() {
  const double constant = apen(std::vector<double>(300, 5.0), 2, 0.1);
  Rng rng(4);
  std::vector<double> noise(300), sine(300);
  for (std::size_t i = 0; i < 300; ++i) {
    noise[i] = rng.uniform();
    sine[i] = std::sin(2 * std::numbers::pi * static_cast<double>(i) / 30.0);
  }
  const double a_noise = apen(noise, 2, 0.2 * sample_sd(noise));
  const double a_sine = apen(sine, 2, 0.2 * sample_sd(sine));
  double worst = 0.0;
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<double> v(10 + rng.below(191));
    for (auto& x : v) x = trial % 2 ? rng.normal() : static_cast<double>(rng.below(4));
    const std::size_t m = 1 + rng.below(4);
    const double r = trial % 2 ? 0.2 * sample_sd(v) : 1.0;
    worst = std::max(worst, std::abs(apen(v, m, r) - brute_apen(v, m, r)));
  }
  return verdict(constant == 0.0 && a_noise > a_sine && worst <= 1e-12,
                 fmt("ApEn(const)=%g noise=%.4f sine=%.4f max|diff|=%.2e", constant, a_noise,
                     a_sine, worst));
}

// 5. Analytic gradients against central differences on a tiny network.
Result gradient_check() {
  ModelConfig cfg;
  cfg.input_length = 8;
  cfg.conv_channels = 2;
  cfg.kernel_size = 3;
  cfg.res_blocks = 1;
  cfg.res_kernel = 3;
  cfg.gru_hidden = 3;
  cfg.seed = 5;
  auto params = init_params(cfg);
  Rng rng(6);
  for (double& x : params.values()) x += rng.uniform(-0.3, 0.3);
  std::vector<Mau> batch(4);
  for (auto& m : batch) {
    m.values.resize(8);
    for (auto& x : m.values) x = rng.uniform(0.0, 40.0);
  }
  const std::vector<int> labels{1, 0, 0, 1};
  const auto grads = backward(params, batch, labels, forward(params, batch));
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t i = 0; i < params.values().size(); ++i) {
    auto plus = params, minus = params;
    plus.values()[i] += h;
    minus.values()[i] -= h;
    const double numeric = (cross_entropy(forward(plus, batch).probs, labels) -
                            cross_entropy(forward(minus, batch).probs, labels)) /
                           (2 * h);
    const double analytic = grads.values()[i];
    worst = std::max(worst, std::abs(numeric - analytic) /
                                std::max({std::abs(numeric), std::abs(analytic), 1e-6}));
  }
  return verdict(worst < 1e-4, fmt("%zu params, max rel err=%.2e", params.values().size(), worst));
}

struct E2eRun {
  std::size_t length = 0;
  EvalReport report;
};

E2eRun e2e_run(const std::map<std::string, std::vector<VelocitySequence>>& corpus,
               const std::string& unseen, InputScaling scaling) {
  PipelineConfig cfg;
  cfg.apply_preset("balabit");  // 5:1
  cfg.threads = 1;
  cfg.model.input_scaling = scaling;
  cfg.split.unseen_users = {unseen};
  cfg.set_seed(1);
  E2eRun run;
  run.length = select_mau_length(cfg, corpus.at("user0"));
  std::map<std::string, std::vector<Mau>> maus;
  for (const auto& [user, seqs] : corpus) {
    for (const auto& s : seqs) {
      auto w = segment(s, run.length);
      maus[user].insert(maus[user].end(), w.begin(), w.end());
    }
  }
  const Split split = build_splits(maus, "user0", cfg.split);
  std::vector<Mau> inputs;
  std::vector<int> labels;
  for (const auto& s : split.train) {
    inputs.push_back(s.mau);
    labels.push_back(s.label);
  }
  ModelConfig mcfg = cfg.model;
  mcfg.input_length = run.length;
  const auto trained = train(inputs, labels, mcfg, cfg.train);
  run.report = blind_attack_eval(trained.params, split);
  return run;
}

std::string describe(const E2eRun& r) {
  return fmt("L=%zu AUC=%.4f EER=%.4f DSR@0.5=%.4f DSR@EER=%.4f", r.length, r.report.auc,
             r.report.eer, r.report.dsr.value_or(-1.0), r.report.dsr_at_eer.value_or(-1.0));
}

std::map<std::string, std::vector<VelocitySequence>> e2e_corpus() {
  const auto spec = default_synth_corpus(1, 20000);
  std::map<std::string, std::vector<SynthSpec>> specs;
  for (const auto& [user, list] : spec.users) specs[user] = list;
  return generate_user_pool(specs).users;
}

// 6. Three AR(1) users, known imposter user1, unseen user2.
Result end_to_end(std::vector<std::string>& info) {
  const auto corpus = e2e_corpus();
  const auto main = e2e_run(corpus, "user2", InputScaling::kPerMau);
  const auto& r = main.report;
  const bool ok = r.auc >= 0.90 && r.eer <= 0.15 && r.dsr.value_or(0.0) >= 0.80;

  const auto global = e2e_run(corpus, "user2", InputScaling::kGlobal);
  info.push_back("6 global input scaling, same split: " + describe(global));
  const auto swapped = e2e_run(corpus, "user1", InputScaling::kPerMau);
  info.push_back("6 swapped split (unseen user1 lies between legit and known imposter): " +
                 describe(swapped));
  const auto swapped_global = e2e_run(corpus, "user1", InputScaling::kGlobal);
  info.push_back("6 swapped split, global input scaling: " + describe(swapped_global));
  return verdict(ok, "legit user0, known user1, unseen user2: " + describe(main));
}

// 7. AUC and EER against brute force on random score sets.
Result metric_oracles() {
  Rng rng(7);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    ScoredSet s;
    const std::size_t n = 2 + rng.below(199);
    for (std::size_t i = 0; i < n; ++i) {
      s.labels.push_back(i < 2 ? static_cast<int>(i) : static_cast<int>(rng.below(2)));
      const double raw = rng.uniform();
      s.scores.push_back(trial % 3 == 0 ? std::round(raw * 20) / 20 : raw);
    }
    double wins = 0, pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (s.labels[i] != 1 || s.labels[j] != 0) continue;
        pairs += 1;
        wins += s.scores[i] > s.scores[j] ? 1.0 : s.scores[i] == s.scores[j] ? 0.5 : 0.0;
      }
    }
    std::set<double> ts(s.scores.begin(), s.scores.end());
    ts.insert(0.0);
    ts.insert(1.0);
    double best_gap = 2, best = 0;
    for (double t : ts) {
      double fa = 0, fr = 0, nl = 0, ni = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (s.labels[i] == 1) {
          nl += 1;
          fr += s.scores[i] < t;
        } else {
          ni += 1;
          fa += s.scores[i] >= t;
        }
      }
      if (std::abs(fa / ni - fr / nl) < best_gap) {
        best_gap = std::abs(fa / ni - fr / nl);
        best = (fa / ni + fr / nl) / 2;
      }
    }
    mismatches += roc_auc(s) != wins / pairs;
    mismatches += eer(s).eer != best;
  }
  return verdict(mismatches == 0, fmt("100 sets, %zu mismatches", mismatches));
}

// 8. Real datasets: proper volume below total volume.
Result dataset_reproduction(std::vector<std::string>& info) {
  const char* balabit = std::getenv("MOUSEAUTH_BALABIT_DIR");
  const char* dfl = std::getenv("MOUSEAUTH_DFL_DIR");
  if (!balabit && !dfl) return {Outcome::kSkip, "set MOUSEAUTH_BALABIT_DIR / MOUSEAUTH_DFL_DIR"};
  bool ok = true;
  std::string detail;
  for (const auto& [preset, dir] : {std::pair{"balabit", balabit}, std::pair{"dfl", dfl}}) {
    if (!dir) continue;
    PipelineConfig cfg;
    cfg.apply_preset(preset);
    cfg.threads = std::max(1u, std::thread::hardware_concurrency());
    cfg.out_dir = std::filesystem::temp_directory_path() / ("mouseauth_acceptance_" + std::string(preset));
    const Json report = cmd_sufficiency(cfg, dir);
    const auto& users = report.at("users");
    std::size_t below = 0;
    double ratio_sum = 0.0;
    for (const auto& u : users) {
      const double proper = u.at("proper_volume").get<double>();
      const double total = u.at("total_volume").get<double>();
      below += proper < total;
      ratio_sum += proper > 0 ? total / proper : 0.0;
    }
    const double share = static_cast<double>(below) / static_cast<double>(users.size());
    const double mean_ratio = ratio_sum / static_cast<double>(users.size());
    const double avg_proper = report.at("average_proper_volume").get<double>();
    const double avg_total = report.at("average_total_volume").get<double>();
    bool this_ok = share >= 0.90;
    if (std::string(preset) == "dfl") this_ok = this_ok && mean_ratio >= 2.0;
    ok = ok && this_ok;
    detail += fmt("%s: %zu users, %.0f%% below total, avg proper %.1f vs total %.1f, mean reduction %.2fx; ",
                  preset, users.size(), 100 * share, avg_proper, avg_total, mean_ratio);
    info.push_back(fmt("8 %s average proper volume %.1f, average total %.1f", preset, avg_proper,
                       avg_total));
  }
  return verdict(ok, detail);
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Result(std::vector<std::string>&)> run;
  };
  const std::vector<Criterion> criteria{
      {1, "KDE normalization", 1, [](auto&) { return kde_normalization(); }},
      {2, "KL oracle", 5, [](auto&) { return kl_oracle(); }},
      {3, "sufficiency convergence", 30, [](auto&) { return sufficiency_convergence(); }},
      {4, "ApEn oracle suite", 10, [](auto&) { return apen_oracles(); }},
      {5, "gradient check", 30, [](auto&) { return gradient_check(); }},
      {6, "end-to-end authentication", 300, end_to_end},
      {7, "metric oracles", 5, [](auto&) { return metric_oracles(); }},
      {8, "dataset reproduction", 3600, dataset_reproduction},
  };
  int failures = 0;
  std::vector<std::string> info;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Result r;
    try {
      r = c.run(info);
    } catch (const std::exception& e) {
      r = {Outcome::kFail, std::string("threw: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (r.outcome == Outcome::kPass && secs > c.budget_s) {
      r.outcome = Outcome::kFail;
      r.detail += fmt(" [over %.0fs budget]", c.budget_s);
    }
    const char* tag = r.outcome == Outcome::kPass ? "PASS" : r.outcome == Outcome::kFail ? "FAIL" : "SKIP";
    failures += r.outcome == Outcome::kFail;
    std::printf("[%s] %d %s (%.2fs): %s\n", tag, c.id, c.name, secs, r.detail.c_str());
    std::fflush(stdout);
  }
  for (const auto& line : info) std::printf("[INFO] %s\n", line.c_str());
  return failures == 0 ? 0 : 1;
}
