#include "mouseauth/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "mouseauth/error.hpp"
#include "mouseauth/rng.hpp"

namespace mouseauth {

const char* synth_kind_name(SynthKind kind) {
  switch (kind) {
    case SynthKind::kGaussianIid: return "gaussian_iid";
    case SynthKind::kAr1: return "ar1";
    case SynthKind::kSinePlusNoise: return "sine_plus_noise";
  }
  return "unknown";
}

SynthKind parse_synth_kind(std::string_view name) {
  if (name == "gaussian_iid") return SynthKind::kGaussianIid;
  if (name == "ar1") return SynthKind::kAr1;
  if (name == "sine_plus_noise") return SynthKind::kSinePlusNoise;
  fail(ErrorCode::kInvalidSpec, "unknown synth kind '" + std::string(name) + "'");
}

void SynthSpec::validate() const {
  if (length < 1) fail(ErrorCode::kInvalidSpec, "length must be >= 1");
  if (!std::isfinite(mean)) fail(ErrorCode::kInvalidSpec, "mean must be finite");
  switch (kind) {
    case SynthKind::kGaussianIid:
      if (!(std > 0.0)) fail(ErrorCode::kInvalidSpec, "std must be > 0");
      break;
    case SynthKind::kAr1:
      if (!(std::abs(phi) < 1.0)) fail(ErrorCode::kInvalidSpec, "ar1 needs |phi| < 1");
      if (!(sigma > 0.0)) fail(ErrorCode::kInvalidSpec, "sigma must be > 0");
      break;
    case SynthKind::kSinePlusNoise:
      if (!(amplitude > 0.0) || !(period > 0.0)) {
        fail(ErrorCode::kInvalidSpec, "amplitude and period must be > 0");
      }
      if (!(noise_std >= 0.0)) fail(ErrorCode::kInvalidSpec, "noise_std must be >= 0");
      break;
  }
}

VelocitySequence generate(const SynthSpec& spec) {
  spec.validate();
  VelocitySequence out{"synthetic", "s0", 0.01, std::vector<double>(spec.length)};
  Rng rng(spec.seed);
  double state = 0.0;  // ar1 deviation from the mean
  for (std::size_t t = 0; t < spec.length; ++t) {
    double v = 0.0;
    switch (spec.kind) {
      case SynthKind::kGaussianIid:
        v = spec.mean + spec.std * rng.normal();
        break;
      case SynthKind::kAr1:
        state = spec.phi * state + spec.sigma * rng.normal();
        v = spec.mean + state;
        break;
      case SynthKind::kSinePlusNoise: {
        const double phase = std::fmod(static_cast<double>(t), spec.period) / spec.period;
        v = spec.mean + spec.amplitude * std::sin(2.0 * std::numbers::pi * phase);
        if (spec.noise_std > 0.0) v += spec.noise_std * rng.normal();
        break;
      }
    }
    out.v[t] = std::max(v, 0.0);
  }
  return out;
}

UserPool generate_user_pool(const std::map<std::string, std::vector<SynthSpec>>& specs) {
  UserPool pool;
  for (const auto& [user, list] : specs) {
    if (list.empty()) {
      pool.warnings.push_back("user '" + user + "' has no specs; omitted");
      continue;
    }
    auto& sessions = pool.users[user];
    for (std::size_t i = 0; i < list.size(); ++i) {
      auto vel = generate(list[i]);
      vel.user_id = user;
      vel.session_id = "s" + std::to_string(i);
      sessions.push_back(std::move(vel));
    }
  }
  return pool;
}

Session to_session(const VelocitySequence& vel, std::uint64_t heading_seed) {
  Session s{vel.user_id, vel.session_id, {}};
  s.events.reserve(vel.v.size() + 1);
  Rng rng(heading_seed);
  double x = 0.0;
  double y = 0.0;
  s.events.push_back({0.0, x, y, std::nullopt});
  for (std::size_t i = 0; i < vel.v.size(); ++i) {
    const double heading = 2.0 * std::numbers::pi * rng.uniform();
    const double step = vel.v[i] * vel.dt;
    x += step * std::cos(heading);
    y += step * std::sin(heading);
    s.events.push_back({static_cast<double>(i + 1) * vel.dt, x, y, std::nullopt});
  }
  return s;
}

std::string session_to_csv(const Session& session) {
  std::string out = "t,x,y\n";
  char line[96];
  for (const auto& ev : session.events) {
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g\n", ev.t, ev.x, ev.y);
    out += line;
  }
  return out;
}

}  // namespace mouseauth
