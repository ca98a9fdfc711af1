#include "tactile/palpation.hpp"

#include <cmath>
#include <stdexcept>

namespace tactile {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kHalfPi = 1.5707963267948966192313216916398;

constexpr double kPressAmpMm[4] = {2.0, 4.0, 6.0, 8.0};
constexpr double kTiltAmpMm[4] = {3.0, 4.0, 5.0, 6.0};
constexpr double kSlideAmpMm[4] = {2.0, 4.0, 6.0, 8.0};
constexpr double kSlideYawDeg[4] = {3.0, 4.0, 5.0, 6.0};
constexpr double kFreqHz[4] = {0.2, 0.4, 0.6, 0.8};

double max_driven_freq(const ActionParams& p) {
  switch (p.primitive) {
    case Primitive::kPressing: return p.w_z_hz;
    case Primitive::kPrecession: return p.w_tilt_hz;
    case Primitive::kSliding: return p.w_slide_hz;
  }
  return 0;
}

}  // namespace

std::string to_string(Primitive p) {
  switch (p) {
    case Primitive::kPressing: return "PRESSING";
    case Primitive::kPrecession: return "PRECESSION";
    case Primitive::kSliding: return "SLIDING";
  }
  throw std::invalid_argument("invalid primitive");
}

Primitive primitive_from_string(const std::string& s) {
  if (s == "PRESSING") return Primitive::kPressing;
  if (s == "PRECESSION") return Primitive::kPrecession;
  if (s == "SLIDING") return Primitive::kSliding;
  throw std::invalid_argument("unknown primitive '" + s +
                              "' (expected PRESSING, PRECESSION or SLIDING)");
}

Trajectory generate_trajectory(const ActionParams& params, double duration_s,
                               double rate_hz) {
  if (duration_s <= 0)
    throw std::invalid_argument("generate_trajectory: duration must be positive");
  const double fmax = max_driven_freq(params);
  if (rate_hz <= 2.0 * fmax)
    throw std::invalid_argument(
        "generate_trajectory: rate " + std::to_string(rate_hz) +
        " Hz aliases the driven frequency " + std::to_string(fmax) + " Hz");

  const auto count = static_cast<std::size_t>(std::llround(duration_s * rate_hz));
  Trajectory traj;
  traj.rate_hz = rate_hz;
  traj.duration_s = duration_s;
  traj.samples.resize(count);

  for (std::size_t i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / rate_hz;
    Pose& pose = traj.samples[i];
    switch (params.primitive) {
      case Primitive::kPressing:
        pose.z_mm = params.a_z_mm * std::cos(kTwoPi * params.w_z_hz * t + M_PI);
        break;
      case Primitive::kPrecession: {
        const double a_deg = tilt_deg_from_lever_mm(params.a_tilt_mm);
        pose.roll_deg = a_deg * std::sin(kTwoPi * params.w_tilt_hz * t + kHalfPi);
        pose.pitch_deg = a_deg * std::sin(kTwoPi * params.w_tilt_hz * t);
        break;
      }
      case Primitive::kSliding:
        pose.x_mm = params.a_xy_mm * std::sin(kTwoPi * params.w_slide_hz * t);
        pose.y_mm = params.a_xy_mm * std::sin(kTwoPi * params.w_slide_hz * t);
        pose.yaw_deg = params.a_yaw_deg * std::sin(kTwoPi * params.w_slide_hz * t);
        break;
    }
  }
  return traj;
}

std::vector<ActionParams> action_grid(Primitive primitive) {
  std::vector<ActionParams> grid;
  grid.reserve(16);
  for (int a = 0; a < 4; ++a) {
    for (int f = 0; f < 4; ++f) {
      ActionParams p;
      p.primitive = primitive;
      p.action_index = a * 4 + f + 1;
      switch (primitive) {
        case Primitive::kPressing:
          p.a_z_mm = kPressAmpMm[a];
          p.w_z_hz = kFreqHz[f];
          break;
        case Primitive::kPrecession:
          p.a_tilt_mm = kTiltAmpMm[a];
          p.w_tilt_hz = kFreqHz[f];
          break;
        case Primitive::kSliding:
          p.a_xy_mm = kSlideAmpMm[a];
          p.a_yaw_deg = kSlideYawDeg[a];
          p.w_slide_hz = kFreqHz[f];
          break;
      }
      grid.push_back(p);
    }
  }
  return grid;
}

ActionSequence action_sequence(const Trajectory& traj, double action_rate_hz) {
  if (action_rate_hz <= 0 || action_rate_hz > traj.rate_hz)
    throw std::invalid_argument("action_sequence: action rate must be in (0, trajectory rate]");
  const double ratio = traj.rate_hz / action_rate_hz;
  const auto stride = static_cast<std::size_t>(std::llround(ratio));
  if (std::abs(ratio - static_cast<double>(stride)) > 1e-9)
    throw std::invalid_argument("action_sequence: action rate must divide the trajectory rate");

  ActionSequence seq;
  seq.rate_hz = action_rate_hz;
  for (std::size_t i = 0; i < traj.samples.size(); i += stride) {
    seq.timestamps_s.push_back(static_cast<double>(i) / traj.rate_hz);
    seq.poses.push_back(traj.samples[i]);
  }
  return seq;
}

}  // namespace tactile
