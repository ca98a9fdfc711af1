#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>
#include <tuple>

#include "tactile/palpation.hpp"

using namespace tactile;

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

TEST_CASE("pressing matches its closed form to 1e-12") {
  ActionParams p;
  p.primitive = Primitive::kPressing;
  p.a_z_mm = 2.0;
  p.w_z_hz = 0.2;
  const Trajectory traj = generate_trajectory(p, 10.0, 700.0);
  REQUIRE(traj.samples.size() == 7000);
  CHECK(traj.samples[0].z_mm == doctest::Approx(-2.0).epsilon(1e-14));
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    const double t = static_cast<double>(i) / 700.0;
    const double expect = 2.0 * std::cos(kTwoPi * 0.2 * t + M_PI);
    CHECK(std::abs(traj.samples[i].z_mm - expect) < 1e-12);
    CHECK(traj.samples[i].x_mm == 0.0);
    CHECK(traj.samples[i].roll_deg == 0.0);
  }
}

TEST_CASE("precession matches its closed form with the lever conversion") {
  ActionParams p;
  p.primitive = Primitive::kPrecession;
  p.a_tilt_mm = 3.0;
  p.w_tilt_hz = 0.4;
  const Trajectory traj = generate_trajectory(p, 10.0, 700.0);
  const double a_deg = tilt_deg_from_lever_mm(3.0);
  CHECK(traj.samples[0].roll_deg == doctest::Approx(a_deg).epsilon(1e-14));
  CHECK(traj.samples[0].pitch_deg == doctest::Approx(0.0));
  for (std::size_t i = 0; i < traj.samples.size(); i += 97) {
    const double t = static_cast<double>(i) / 700.0;
    CHECK(std::abs(traj.samples[i].roll_deg -
                   a_deg * std::sin(kTwoPi * 0.4 * t + M_PI / 2)) < 1e-12);
    CHECK(std::abs(traj.samples[i].pitch_deg - a_deg * std::sin(kTwoPi * 0.4 * t)) < 1e-12);
    CHECK(traj.samples[i].z_mm == 0.0);
  }
}

TEST_CASE("sliding matches its closed form and starts at the origin") {
  ActionParams p;
  p.primitive = Primitive::kSliding;
  p.a_xy_mm = 4.0;
  p.a_yaw_deg = 5.0;
  p.w_slide_hz = 0.6;
  const Trajectory traj = generate_trajectory(p, 10.0, 700.0);
  CHECK(traj.samples[0].x_mm == 0.0);
  CHECK(traj.samples[0].y_mm == 0.0);
  CHECK(traj.samples[0].yaw_deg == 0.0);
  for (std::size_t i = 0; i < traj.samples.size(); i += 131) {
    const double t = static_cast<double>(i) / 700.0;
    CHECK(std::abs(traj.samples[i].x_mm - 4.0 * std::sin(kTwoPi * 0.6 * t)) < 1e-12);
    CHECK(std::abs(traj.samples[i].y_mm - 4.0 * std::sin(kTwoPi * 0.6 * t)) < 1e-12);
    CHECK(std::abs(traj.samples[i].yaw_deg - 5.0 * std::sin(kTwoPi * 0.6 * t)) < 1e-12);
  }
}

TEST_CASE("periodicity: pose repeats after one driven period") {
  ActionParams p;
  p.primitive = Primitive::kPressing;
  p.a_z_mm = 6.0;
  p.w_z_hz = 0.5;  // period 2 s = 1400 samples at 700 Hz
  const Trajectory traj = generate_trajectory(p, 10.0, 700.0);
  for (std::size_t i = 0; i + 1400 < traj.samples.size(); i += 233)
    CHECK(std::abs(traj.samples[i].z_mm - traj.samples[i + 1400].z_mm) < 1e-9);
}

TEST_CASE("grids reproduce the tabulated 16 rows") {
  const auto pressing = action_grid(Primitive::kPressing);
  REQUIRE(pressing.size() == 16);
  CHECK(pressing[0].action_index == 1);
  CHECK(pressing[0].a_z_mm == 2.0);
  CHECK(pressing[0].w_z_hz == 0.2);
  CHECK(pressing[15].a_z_mm == 8.0);
  CHECK(pressing[15].w_z_hz == 0.8);

  const auto precession = action_grid(Primitive::kPrecession);
  CHECK(precession[14].action_index == 15);
  CHECK(precession[14].a_tilt_mm == 6.0);
  CHECK(precession[14].w_tilt_hz == 0.6);

  const auto sliding = action_grid(Primitive::kSliding);
  CHECK(sliding[12].action_index == 13);
  CHECK(sliding[12].a_xy_mm == 8.0);
  CHECK(sliding[12].a_yaw_deg == 6.0);
  CHECK(sliding[12].w_slide_hz == 0.2);

  // 16 unique tuples per grid.
  std::set<std::tuple<double, double>> press_set;
  for (const auto& a : pressing) press_set.insert(std::make_tuple(a.a_z_mm, a.w_z_hz));
  CHECK(press_set.size() == 16);
  std::set<std::tuple<double, double, double>> slide_set;
  for (const auto& a : sliding) slide_set.insert(std::make_tuple(a.a_xy_mm, a.a_yaw_deg, a.w_slide_hz));
  CHECK(slide_set.size() == 16);
}

TEST_CASE("aliasing rate and bad duration are rejected") {
  ActionParams p;
  p.primitive = Primitive::kPressing;
  p.a_z_mm = 2.0;
  p.w_z_hz = 0.8;
  CHECK_THROWS_WITH_AS(generate_trajectory(p, 10.0, 1.5), doctest::Contains("alias"),
                       std::invalid_argument);
  CHECK_THROWS_AS(generate_trajectory(p, 0.0, 700.0), std::invalid_argument);
}

TEST_CASE("action sequence decimates to the action rate") {
  ActionParams p;
  p.primitive = Primitive::kSliding;
  p.a_xy_mm = 2.0;
  p.a_yaw_deg = 3.0;
  p.w_slide_hz = 0.4;
  const Trajectory traj = generate_trajectory(p, 10.0, 700.0);
  const ActionSequence seq = action_sequence(traj, 100.0);
  REQUIRE(seq.poses.size() == 1000);
  CHECK(seq.rate_hz == 100.0);

  // Resampled poses equal the closed form at the resampled times exactly.
  for (std::size_t i = 0; i < seq.poses.size(); ++i) {
    const double t = seq.timestamps_s[i];
    CHECK(std::abs(seq.poses[i].x_mm - 2.0 * std::sin(kTwoPi * 0.4 * t)) < 1e-12);
  }

  // Constant trajectory stays constant.
  ActionParams flat;
  flat.primitive = Primitive::kPressing;
  flat.a_z_mm = 0.0;
  flat.w_z_hz = 0.2;
  const auto const_seq = action_sequence(generate_trajectory(flat, 10.0, 700.0), 100.0);
  for (const auto& pose : const_seq.poses) CHECK(pose.z_mm == 0.0);

  CHECK_THROWS_AS(action_sequence(traj, 233.0), std::invalid_argument);
}
