#include "mouseauth/kinematics.hpp"

#include <cmath>

#include "mouseauth/error.hpp"

namespace mouseauth {

std::vector<double> displacements(const Session& session) {
  const auto& ev = session.events;
  if (ev.size() < 2) {
    fail(ErrorCode::kTooShort, "need at least 2 events, got " + std::to_string(ev.size()));
  }
  std::vector<double> d(ev.size() - 1);
  for (std::size_t i = 1; i < ev.size(); ++i) {
    d[i - 1] = std::hypot(ev[i].x - ev[i - 1].x, ev[i].y - ev[i - 1].y);
  }
  return d;
}

VelocitySequence velocity_sequence(const Session& session, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    fail(ErrorCode::kInvalidDt, "dt must be positive");
  }
  VelocitySequence out{session.user_id, session.session_id, dt, displacements(session)};
  for (double& x : out.v) x /= dt;
  return out;
}

void VelocityOptions::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) fail(ErrorCode::kInvalidDt, "dt must be positive");
  if (gap_split_seconds && !(*gap_split_seconds > 0.0)) {
    fail(ErrorCode::kInvalidConfig, "gap_split_seconds must be positive");
  }
}

std::vector<VelocitySequence> velocity_sequences(const Session& session,
                                                 const VelocityOptions& options) {
  options.validate();
  const auto& ev = session.events;
  if (ev.size() < 2) {
    fail(ErrorCode::kTooShort, "need at least 2 events, got " + std::to_string(ev.size()));
  }

  std::vector<VelocitySequence> pieces;
  auto start_piece = [&] {
    VelocitySequence piece{session.user_id, session.session_id, options.dt, {}};
    if (!pieces.empty()) piece.session_id += "#" + std::to_string(pieces.size());
    pieces.push_back(std::move(piece));
  };
  start_piece();
  double gap_sum = 0.0;
  std::size_t gap_count = 0;

  for (std::size_t i = 1; i < ev.size(); ++i) {
    const double gap = ev[i].t - ev[i - 1].t;
    if (options.gap_split_seconds && gap > *options.gap_split_seconds) {
      if (!pieces.back().v.empty()) start_piece();
      continue;
    }
    const double d = std::hypot(ev[i].x - ev[i - 1].x, ev[i].y - ev[i - 1].y);
    if (options.actual_dt) {
      if (gap <= 0.0) continue;
      pieces.back().v.push_back(d / gap);
      gap_sum += gap;
      ++gap_count;
    } else {
      pieces.back().v.push_back(d / options.dt);
    }
  }
  if (pieces.back().v.empty()) pieces.pop_back();
  if (options.actual_dt && gap_count > 0) {
    for (auto& p : pieces) p.dt = gap_sum / static_cast<double>(gap_count);
  }
  return pieces;
}

}  // namespace mouseauth
