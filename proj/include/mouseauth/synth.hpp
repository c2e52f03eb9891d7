#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mouseauth/ingest.hpp"
#include "mouseauth/kinematics.hpp"

namespace mouseauth {

enum class SynthKind { kGaussianIid, kAr1, kSinePlusNoise };

const char* synth_kind_name(SynthKind kind);
SynthKind parse_synth_kind(std::string_view name);

/// Seeded synthetic speed series. Only the fields of the chosen kind are read:
///   gaussian_iid:    v_t = mean + std * e_t
///   ar1:             v_t = mean + phi * (v_{t-1} - mean) + sigma * e_t,
///                    started at the stationary mean
///   sine_plus_noise: v_t = mean + amplitude * sin(2 pi (t mod period) / period)
///                    + noise_std * e_t
/// e_t are standard normals from Rng(seed). Outputs are clamped at 0; the
/// ar1 recursion runs on the unclamped state.
struct SynthSpec {
  SynthKind kind = SynthKind::kGaussianIid;
  double mean = 20.0;
  double std = 1.0;
  double phi = 0.5;
  double sigma = 1.0;
  double amplitude = 5.0;
  double period = 50.0;
  double noise_std = 0.0;
  std::size_t length = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

VelocitySequence generate(const SynthSpec& spec);

struct UserPool {
  std::map<std::string, std::vector<VelocitySequence>> users;
  std::vector<std::string> warnings;
};

/// One session per spec; session ids are "s0", "s1", ... in spec order.
/// Users with no specs are left out and mentioned in `warnings`.
UserPool generate_user_pool(const std::map<std::string, std::vector<SynthSpec>>& specs);

/// Cursor trajectory whose fixed-interval speeds reproduce `vel`: each step
/// has length v*dt in a heading drawn from Rng(heading_seed); timestamps are
/// multiples of dt starting at 0.
Session to_session(const VelocitySequence& vel, std::uint64_t heading_seed);

/// "t,x,y" CSV with round-trip precision, readable with the default SchemaMap.
std::string session_to_csv(const Session& session);

}  // namespace mouseauth
