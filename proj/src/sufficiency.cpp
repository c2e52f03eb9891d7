#include "mouseauth/sufficiency.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mouseauth/error.hpp"

namespace mouseauth {
namespace {

constexpr double kInvSqrt2Pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;

// Values below this add nothing the density floor would not erase.
constexpr double kKernelCutoff = 1e-300;
// Exact restart period for the recurrence; bounds accumulated rounding.
constexpr std::size_t kRefresh = 64;

void check_grid(std::span<const double> grid) {
  if (grid.empty()) fail(ErrorCode::kEmptyInput, "empty grid");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      fail(ErrorCode::kInvalidArgument, "grid must be strictly increasing");
    }
  }
}

double sample_sd(std::span<const double> samples) {
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1.0));
}

}  // namespace

double silverman_bandwidth(std::span<const double> samples) {
  if (samples.size() < 2) {
    fail(ErrorCode::kTooFewSamples, "bandwidth needs at least 2 samples");
  }
  const double sd = sample_sd(samples);
  if (!(sd >= 1e-12)) return kBandwidthFloor;
  return 1.06 * sd * std::pow(static_cast<double>(samples.size()), -0.2);
}

DensityEstimate kde(std::span<const double> samples, std::span<const double> grid,
                    double bandwidth) {
  if (samples.empty()) fail(ErrorCode::kEmptyInput, "kde needs samples");
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    fail(ErrorCode::kInvalidBandwidth, "bandwidth must be positive");
  }
  check_grid(grid);
  DensityEstimate est{{grid.begin(), grid.end()}, std::vector<double>(grid.size(), 0.0),
                      bandwidth, samples.size()};
  const double inv_two_h2 = 1.0 / (2.0 * bandwidth * bandwidth);
  const double scale = kInvSqrt2Pi / (bandwidth * static_cast<double>(samples.size()));
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double acc = 0.0;
    for (double v : samples) {
      const double z = grid[k] - v;
      acc += std::exp(-z * z * inv_two_h2);
    }
    est.density[k] = acc * scale;
  }
  return est;
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t points) {
  if (points < 2 || !(hi > lo)) {
    fail(ErrorCode::kInvalidArgument, "uniform grid needs hi > lo and >= 2 points");
  }
  std::vector<double> grid(points);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t k = 0; k < points; ++k) grid[k] = lo + static_cast<double>(k) * step;
  return grid;
}

DensityEstimate kde_uniform(std::span<const double> samples, double lo, double hi,
                            std::size_t points, double bandwidth) {
  if (samples.empty()) fail(ErrorCode::kEmptyInput, "kde needs samples");
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    fail(ErrorCode::kInvalidBandwidth, "bandwidth must be positive");
  }
  DensityEstimate est{uniform_grid(lo, hi, points), std::vector<double>(points, 0.0),
                      bandwidth, samples.size()};
  const double step = (hi - lo) / static_cast<double>(points - 1);
  const double inv_two_h2 = 1.0 / (2.0 * bandwidth * bandwidth);
  const double decay = std::exp(-2.0 * step * step * inv_two_h2);
  const auto last = static_cast<std::ptrdiff_t>(points - 1);
  auto& acc = est.density;

  for (double v : samples) {
    const auto centre = static_cast<std::ptrdiff_t>(
        std::clamp(std::round((v - lo) / step), 0.0, static_cast<double>(last)));

    // Walk outwards in each direction. Moving one cell from offset a = x_k - v
    // multiplies the kernel by exp(-(2*a*dir*step + step^2) / (2h^2)), and that
    // ratio itself shrinks by `decay` per cell.
    for (const int dir : {+1, -1}) {
      std::ptrdiff_t k = centre;
      double g = 0.0;
      double ratio = 0.0;
      std::size_t since_refresh = kRefresh;
      if (dir < 0) {
        if (k == 0) continue;
        --k;
      }
      for (; k >= 0 && k <= last; k += dir) {
        if (since_refresh == kRefresh) {
          const double a = est.grid[static_cast<std::size_t>(k)] - v;
          g = std::exp(-a * a * inv_two_h2);
          ratio = std::exp(-(2.0 * a * dir * step + step * step) * inv_two_h2);
          since_refresh = 0;
        } else {
          g *= ratio;
          ratio *= decay;
        }
        ++since_refresh;
        if (g < kKernelCutoff) break;
        acc[static_cast<std::size_t>(k)] += g;
      }
    }
  }
  const double scale = kInvSqrt2Pi / (bandwidth * static_cast<double>(samples.size()));
  for (double& d : acc) d *= scale;
  return est;
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorCode::kLengthMismatch, "trapezoid: size mismatch");
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  }
  return s;
}

double kl_divergence(const DensityEstimate& p, const DensityEstimate& q) {
  if (p.grid != q.grid) fail(ErrorCode::kGridMismatch, "KL needs a shared grid");
  if (p.density.size() != p.grid.size() || q.density.size() != q.grid.size()) {
    fail(ErrorCode::kGridMismatch, "density length differs from grid length");
  }
  std::vector<double> integrand(p.grid.size());
  for (std::size_t k = 0; k < integrand.size(); ++k) {
    const double pk = std::max(p.density[k], kDensityFloor);
    const double qk = std::max(q.density[k], kDensityFloor);
    integrand[k] = pk * std::log(pk / qk);
  }
  double kl = trapezoid(p.grid, integrand);
  if (kl < 0.0 && kl >= -1e-9) kl = 0.0;
  return kl;
}

namespace {

// KL(f(v; n+m) || f(v; n)) on the shared grid of the larger prefix.
double prefix_kl(std::span<const double> v, std::size_t n, std::size_t m) {
  const auto small = v.first(n);
  const auto large = v.first(n + m);
  const double h_small = silverman_bandwidth(small);
  const double h_large = silverman_bandwidth(large);
  const double h_max = std::max(h_small, h_large);
  const auto [lo_it, hi_it] = std::minmax_element(large.begin(), large.end());
  const double lo = *lo_it - 5.0 * h_max;
  const double hi = *hi_it + 5.0 * h_max;
  const auto p = kde_uniform(large, lo, hi, kGridPoints, h_large);
  const auto q = kde_uniform(small, lo, hi, kGridPoints, h_small);
  return kl_divergence(p, q);
}

}  // namespace

bool satisfies_conditions(const SufficiencyReport& report, std::size_t index) {
  const auto& traj = report.kl_trajectory;
  if (index + 1 >= traj.size()) return false;
  const double kl = traj[index].kl;
  const double next = traj[index + 1].kl;
  return std::abs(kl) <= report.eps1 && std::abs(next - kl) <= report.eps2;
}

SufficiencyReport sufficiency_point(const VelocitySequence& vel, std::size_t step_m,
                                    double eps1, double eps2) {
  if (step_m < 2) fail(ErrorCode::kInvalidArgument, "step_m must be >= 2");
  if (!(eps1 > 0.0) || !(eps2 > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "eps1 and eps2 must be positive");
  }
  const std::size_t len = vel.v.size();
  if (len < 3 * step_m) {
    fail(ErrorCode::kTooShort, "sufficiency needs at least 3*step_m samples, got " +
                                   std::to_string(len));
  }
  SufficiencyReport report{vel.user_id, vel.session_id, len, step_m, eps1, eps2, {}, {}, false};
  const std::span<const double> v(vel.v);

  for (std::size_t n = step_m; n + step_m <= len; n += step_m) {
    report.kl_trajectory.push_back({n, prefix_kl(v, n, step_m)});
    const std::size_t count = report.kl_trajectory.size();
    if (count >= 2 && satisfies_conditions(report, count - 2)) {
      report.n_hat = report.kl_trajectory[count - 2].n;
      break;
    }
  }
  return report;
}

UserVolume aggregate_user_volume(std::span<const SufficiencyReport> reports) {
  UserVolume out;
  if (!reports.empty()) out.user_id = reports.front().user_id;
  for (const auto& r : reports) {
    out.raw_total += r.length;
    if (r.n_hat) {
      out.total += *r.n_hat;
    } else {
      out.total += r.length;
      ++out.exhausted_sessions;
    }
  }
  return out;
}

}  // namespace mouseauth
