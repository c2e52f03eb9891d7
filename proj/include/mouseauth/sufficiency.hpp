#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mouseauth/kinematics.hpp"

namespace mouseauth {

struct DensityEstimate {
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 0.0;
  std::size_t n = 0;
};

inline constexpr double kBandwidthFloor = 1e-6;
inline constexpr double kDensityFloor = 1e-300;
inline constexpr std::size_t kGridPoints = 1024;

/// h = 1.06 * sd * n^(-1/5), sample standard deviation with n-1 denominator.
/// Degenerate spread (sd < 1e-12) returns kBandwidthFloor.
double silverman_bandwidth(std::span<const double> samples);

/// Equal-weight Gaussian kernel density evaluated at each grid point.
DensityEstimate kde(std::span<const double> samples, std::span<const double> grid,
                    double bandwidth);

/// `points` equally spaced values from lo to hi inclusive.
std::vector<double> uniform_grid(double lo, double hi, std::size_t points);

/// Same estimate as kde() on uniform_grid(lo, hi, points), computed with a
/// multiplicative recurrence along the grid instead of one exp per cell.
/// Agrees with kde() to ~1e-12 relative where the density is above 1e-250.
DensityEstimate kde_uniform(std::span<const double> samples, double lo, double hi,
                            std::size_t points, double bandwidth);

/// Trapezoid integral of p*log(p/q) over the shared grid; both densities are
/// floored at kDensityFloor. Values in [-1e-9, 0) are clamped to 0.
double kl_divergence(const DensityEstimate& p, const DensityEstimate& q);

double trapezoid(std::span<const double> x, std::span<const double> y);

struct KlPoint {
  std::size_t n = 0;
  double kl = 0.0;  // KL(f(v; n+m) || f(v; n))
};

struct SufficiencyReport {
  std::string user_id;
  std::string session_id;
  std::size_t length = 0;
  std::size_t step_m = 0;
  double eps1 = 0.0;
  double eps2 = 0.0;
  std::vector<KlPoint> kl_trajectory;
  /// Empty when the sequence ran out before both conditions held.
  std::optional<std::size_t> n_hat;
  /// Set by callers that record a session shorter than 3*step_m instead of
  /// analysing it; such reports count as exhausted.
  bool too_short = false;

  bool exhausted() const { return !n_hat.has_value(); }
};

/// Grows the prefix by `step_m` and stops at the first n with
/// |KL(n+m||n)| <= eps1 and |KL(n+2m||n+m) - KL(n+m||n)| <= eps2.
/// Each comparison shares a kGridPoints grid spanning the larger prefix
/// padded by 5 of the larger bandwidth.
SufficiencyReport sufficiency_point(const VelocitySequence& vel, std::size_t step_m,
                                    double eps1, double eps2);

/// True when no grid point before n_hat passes both conditions and n_hat does.
bool satisfies_conditions(const SufficiencyReport& report, std::size_t index);

struct UserVolume {
  std::string user_id;
  std::size_t total = 0;        // sum of n_hat (or full length when exhausted)
  std::size_t raw_total = 0;    // sum of sequence lengths
  std::size_t exhausted_sessions = 0;

  bool flagged() const { return exhausted_sessions > 0; }
};

UserVolume aggregate_user_volume(std::span<const SufficiencyReport> reports);

}  // namespace mouseauth
