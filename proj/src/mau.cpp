#include "mouseauth/mau.hpp"

#include <algorithm>
#include <cmath>

#include "mouseauth/error.hpp"
#include "mouseauth/parallel.hpp"

namespace mouseauth {

void ApEnOptions::validate() const {
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i] < 1) fail(ErrorCode::kInvalidConfig, "candidate lengths must be >= 1");
    if (i > 0 && candidates[i] <= candidates[i - 1]) {
      fail(ErrorCode::kInvalidConfig, "candidate lengths must be strictly increasing");
    }
  }
  if (!(r_factor > 0.0)) fail(ErrorCode::kInvalidConfig, "r_factor must be positive");
  if (!(slope_threshold >= 0.0)) {
    fail(ErrorCode::kInvalidConfig, "slope_threshold must be non-negative");
  }
  if (cap < 3) fail(ErrorCode::kInvalidConfig, "cap must be >= 3");
}

std::vector<std::size_t> ApEnOptions::default_candidates() {
  std::vector<std::size_t> c;
  for (std::size_t len = 10; len <= 200; len += 10) c.push_back(len);
  return c;
}

double chebyshev(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorCode::kLengthMismatch, "windows differ in length");
  double d = 0.0;
  for (std::size_t s = 0; s < a.size(); ++s) d = std::max(d, std::abs(a[s] - b[s]));
  return d;
}

double correlation_count(std::span<const double> seq, std::size_t m, std::size_t p,
                         double r) {
  const std::size_t n = seq.size();
  if (m < 1 || n < m + 1 || !(r > 0.0)) {
    fail(ErrorCode::kOutOfRange, "correlation_count needs m >= 1, n >= m+1, r > 0");
  }
  const std::size_t windows = n - m + 1;
  if (p < 1 || p > windows) fail(ErrorCode::kOutOfRange, "window index out of range");
  const auto ref = seq.subspan(p - 1, m);
  std::size_t count = 0;
  for (std::size_t q = 0; q < windows; ++q) {
    if (q == p - 1) continue;
    if (chebyshev(ref, seq.subspan(q, m)) <= r) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(windows);
}

MatchCounts match_counts(std::span<const double> seq, std::size_t m, double r) {
  const std::size_t n = seq.size();
  if (m < 1 || n < m + 2) {
    fail(ErrorCode::kTooShort, "need n >= m+2 for both window families");
  }
  const std::size_t windows_m = n - m + 1;
  const std::size_t windows_m1 = n - m;
  MatchCounts counts{std::vector<std::size_t>(windows_m, 1),
                     std::vector<std::size_t>(windows_m1, 1)};
  const double* x = seq.data();

  // Each unordered pair is visited once; a length-(m+1) match needs the
  // length-m prefix to match first, so one scan serves both families.
  for (std::size_t i = 0; i + 1 < windows_m; ++i) {
    for (std::size_t j = i + 1; j < windows_m; ++j) {
      std::size_t s = 0;
      while (s < m && std::abs(x[i + s] - x[j + s]) <= r) ++s;
      if (s < m) continue;
      ++counts.length_m[i];
      ++counts.length_m[j];
      if (j < windows_m1 && std::abs(x[i + m] - x[j + m]) <= r) {
        ++counts.length_m1[i];
        ++counts.length_m1[j];
      }
    }
  }
  return counts;
}

double apen(std::span<const double> seq, std::size_t m, double r) {
  if (!(r > 0.0)) fail(ErrorCode::kInvalidArgument, "tolerance r must be positive");
  const auto counts = match_counts(seq, m, r);
  auto phi = [](const std::vector<std::size_t>& c) {
    const double total = static_cast<double>(c.size());
    double acc = 0.0;
    for (std::size_t k : c) acc += std::log(static_cast<double>(k) / total);
    return acc / total;
  };
  return phi(counts.length_m) - phi(counts.length_m1);
}

ApEnProfile apen_profile(const VelocitySequence& vel, const ApEnOptions& options) {
  options.validate();
  ApEnProfile profile;
  profile.candidate_lengths =
      options.candidates.empty() ? ApEnOptions::default_candidates() : options.candidates;
  profile.slope_threshold = options.slope_threshold;

  const std::size_t used = std::min(options.cap, vel.v.size());
  const std::span<const double> seq(vel.v.data(), used);
  const std::size_t longest = profile.candidate_lengths.back();
  if (used < longest + 2) {
    fail(ErrorCode::kTooShort, "ApEn profile needs at least " +
                                   std::to_string(longest + 2) + " samples, got " +
                                   std::to_string(used));
  }
  profile.analyzed_samples = used;

  double mean = 0.0;
  for (double x : seq) mean += x;
  mean /= static_cast<double>(used);
  double ss = 0.0;
  for (double x : seq) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(used - 1));
  // A flat sequence has sd 0; any positive r then matches exactly the equal windows.
  profile.tolerance_r = std::max(options.r_factor * sd, 1e-12);

  const auto& lengths = profile.candidate_lengths;
  profile.apen_values.assign(lengths.size(), 0.0);
  parallel_for(lengths.size(), options.threads, [&](std::size_t k) {
    profile.apen_values[k] = apen(seq, lengths[k], profile.tolerance_r);
  });

  for (std::size_t k = 0; k + 1 < lengths.size(); ++k) {
    profile.slopes.push_back((profile.apen_values[k + 1] - profile.apen_values[k]) /
                             static_cast<double>(lengths[k + 1] - lengths[k]));
  }
  for (std::size_t k = 0; k < profile.slopes.size(); ++k) {
    if (std::abs(profile.slopes[k]) <= options.slope_threshold) {
      profile.selected_length = lengths[k + 1];
      return profile;
    }
  }
  profile.selected_length = lengths.back();
  profile.fallback = true;
  return profile;
}

std::vector<Mau> segment(const VelocitySequence& vel, std::size_t length) {
  if (length < 1) fail(ErrorCode::kInvalidArgument, "MAU length must be >= 1");
  std::vector<Mau> out;
  const std::size_t count = vel.v.size() / length;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const auto first = vel.v.begin() + static_cast<std::ptrdiff_t>(k * length);
    out.push_back({vel.user_id, vel.session_id, k * length,
                   std::vector<double>(first, first + static_cast<std::ptrdiff_t>(length))});
  }
  return out;
}

}  // namespace mouseauth
