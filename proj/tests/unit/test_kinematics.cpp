#include <doctest.h>

#include "mouseauth/error.hpp"
#include "mouseauth/kinematics.hpp"
#include "mouseauth/rng.hpp"

using namespace mouseauth;

namespace {

Session make_session(std::vector<std::pair<double, double>> xy, double step = 0.01) {
  Session s{"u", "s", {}};
  for (std::size_t i = 0; i < xy.size(); ++i) {
    s.events.push_back({static_cast<double>(i) * step, xy[i].first, xy[i].second, {}});
  }
  return s;
}

}  // namespace

TEST_CASE("displacements") {
  CHECK(displacements(make_session({{0, 0}, {3, 4}})) == std::vector<double>{5.0});
  CHECK(displacements(make_session({{1, 1}, {1, 1}})) == std::vector<double>{0.0});
  CHECK(displacements(make_session({{0, 0}, {1, 0}, {1, 1}})) ==
        std::vector<double>{1.0, 1.0});
  CHECK_THROWS_AS(displacements(make_session({{0, 0}})), Error);
}

TEST_CASE("velocity_sequence scales by dt") {
  const auto s = make_session({{0, 0}, {3, 4}});
  CHECK(velocity_sequence(s, 1.0).v == std::vector<double>{5.0});
  CHECK(velocity_sequence(s, 0.01).v[0] == doctest::Approx(500.0));
  try {
    velocity_sequence(s, 0.0);
    FAIL("expected InvalidDt");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidDt);
  }
  try {
    velocity_sequence(make_session({{0, 0}}), 0.01);
    FAIL("expected TooShort");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kTooShort);
  }
}

TEST_CASE("property: translation and scaling") {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::pair<double, double>> xy;
    for (int i = 0; i < 20; ++i) xy.emplace_back(rng.uniform(-50, 50), rng.uniform(-50, 50));
    const double dx = rng.uniform(-1000, 1000), dy = rng.uniform(-1000, 1000);
    const double c = rng.uniform(0.1, 10);
    auto shifted = xy, scaled = xy;
    for (auto& p : shifted) p = {p.first + dx, p.second + dy};
    for (auto& p : scaled) p = {p.first * c, p.second * c};
    const auto base = velocity_sequence(make_session(xy), 0.01).v;
    const auto base1 = velocity_sequence(make_session(xy), 1.0).v;
    const auto moved = velocity_sequence(make_session(shifted), 0.01).v;
    const auto grown = velocity_sequence(make_session(scaled), 0.01).v;
    REQUIRE(base.size() == 19);
    for (std::size_t i = 0; i < base.size(); ++i) {
      CHECK(moved[i] == doctest::Approx(base[i]).epsilon(1e-9));
      CHECK(grown[i] == doctest::Approx(c * base[i]).epsilon(1e-12));
      CHECK(base[i] == doctest::Approx(base1[i] / 0.01).epsilon(1e-14));
      CHECK(base[i] >= 0.0);
    }
  }
}

TEST_CASE("gap splitting and observed-dt mode") {
  Session s{"u", "s", {}};
  const double t[] = {0.0, 0.01, 0.02, 5.0, 5.01, 5.01, 5.03};
  for (int i = 0; i < 7; ++i) s.events.push_back({t[i], static_cast<double>(i), 0.0, {}});

  VelocityOptions fixed;
  CHECK(velocity_sequences(s, fixed).size() == 1);
  CHECK(velocity_sequences(s, fixed)[0].v.size() == 6);

  VelocityOptions split = fixed;
  split.gap_split_seconds = 1.0;
  const auto pieces = velocity_sequences(s, split);
  REQUIRE(pieces.size() == 2);
  CHECK(pieces[0].v.size() == 2);
  CHECK(pieces[1].v.size() == 3);
  CHECK(pieces[1].session_id == "s#1");

  VelocityOptions observed = split;
  observed.actual_dt = true;
  const auto obs = velocity_sequences(s, observed);
  REQUIRE(obs.size() == 2);
  REQUIRE(obs[1].v.size() == 2);  // zero gap dropped
  CHECK(obs[1].v[0] == doctest::Approx(1.0 / 0.01));
  CHECK(obs[1].v[1] == doctest::Approx(1.0 / 0.02));
}
