#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mouseauth/kinematics.hpp"

namespace mouseauth {

/// Fixed-length window of a velocity sequence; one classifier input.
struct Mau {
  std::string user_id;
  std::string session_id;
  std::size_t start_index = 0;
  std::vector<double> values;
};

struct ApEnProfile {
  std::vector<std::size_t> candidate_lengths;
  std::vector<double> apen_values;
  std::vector<double> slopes;
  double tolerance_r = 0.0;
  double slope_threshold = 1e-4;
  std::size_t analyzed_samples = 0;
  std::size_t selected_length = 0;
  /// No slope fell under the threshold; the largest candidate was taken.
  bool fallback = false;
};

struct ApEnOptions {
  std::vector<std::size_t> candidates;  // empty means default_candidates()
  double r_factor = 0.2;
  double slope_threshold = 1e-4;
  std::size_t cap = 5000;
  std::size_t threads = 1;

  void validate() const;
  /// 10, 20, ..., 200.
  static std::vector<std::size_t> default_candidates();
};

double chebyshev(std::span<const double> a, std::span<const double> b);

/// Fraction of the other length-m windows within Chebyshev distance r of
/// window p (1-based), over n-m+1 windows. The window itself is not counted.
double correlation_count(std::span<const double> seq, std::size_t m, std::size_t p,
                         double r);

/// Raw match counts (self included) for every length-m window, and for every
/// length-(m+1) window. Exposed for the nesting property.
struct MatchCounts {
  std::vector<std::size_t> length_m;
  std::vector<std::size_t> length_m1;
};
MatchCounts match_counts(std::span<const double> seq, std::size_t m, double r);

/// Approximate entropy with natural log. Each window's match count includes
/// itself, so every correlation fraction is at least one match over the
/// window count and the log stays finite.
double apen(std::span<const double> seq, std::size_t m, double r);

ApEnProfile apen_profile(const VelocitySequence& vel, const ApEnOptions& options);

/// Non-overlapping windows [0,L), [L,2L), ...; the remainder is dropped.
std::vector<Mau> segment(const VelocitySequence& vel, std::size_t length);

}  // namespace mouseauth
