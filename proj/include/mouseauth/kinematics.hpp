#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mouseauth/ingest.hpp"

namespace mouseauth {

struct VelocitySequence {
  std::string user_id;
  std::string session_id;
  double dt = 0.01;
  std::vector<double> v;
};

/// Euclidean step lengths between consecutive events (N-1 values).
std::vector<double> displacements(const Session& session);

/// Speeds under a fixed sampling interval: v[i] = d[i] / dt.
VelocitySequence velocity_sequence(const Session& session, double dt);

struct VelocityOptions {
  double dt = 0.01;
  /// Divide by observed timestamp gaps instead of `dt`; zero-gap pairs are
  /// dropped and `dt` of the result holds the mean observed gap.
  bool actual_dt = false;
  /// Sever the sequence wherever consecutive events are further apart.
  std::optional<double> gap_split_seconds;

  void validate() const;
};

/// Applies the options; returns one sequence per gap-delimited piece with at
/// least one speed. Pieces after the first get session ids "<id>#<k>".
std::vector<VelocitySequence> velocity_sequences(const Session& session,
                                                 const VelocityOptions& options);

}  // namespace mouseauth
