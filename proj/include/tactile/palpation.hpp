#ifndef TACTILE_PALPATION_HPP
#define TACTILE_PALPATION_HPP

#include <string>
#include <vector>

namespace tactile {

enum class Primitive { kPressing = 0, kPrecession = 1, kSliding = 2 };

std::string to_string(Primitive p);
Primitive primitive_from_string(const std::string& s);

// End-effector pose relative to the post-contact reference: at the
// reference all components are zero and the skin rests at the initial
// indentation depth.
struct Pose {
  double x_mm = 0, y_mm = 0, z_mm = 0;
  double roll_deg = 0, pitch_deg = 0, yaw_deg = 0;
};

// One cell of the 16-point action grid of a primitive. Only the fields of
// the owning primitive are meaningful.
struct ActionParams {
  Primitive primitive = Primitive::kPressing;
  int action_index = 1;  // 1..16
  // pressing
  double a_z_mm = 0, w_z_hz = 0;
  // precession: amplitude in lever-arm mm, shared by roll and pitch
  double a_tilt_mm = 0, w_tilt_hz = 0;
  // sliding
  double a_xy_mm = 0, a_yaw_deg = 0, w_slide_hz = 0;
};

struct Trajectory {
  std::vector<Pose> samples;
  double rate_hz = 0;
  double duration_s = 0;
};

// Pose stream decimated to the action rate; the model's a_t input.
struct ActionSequence {
  std::vector<double> timestamps_s;
  std::vector<Pose> poses;
  double rate_hz = 0;
};

// Lever radius used to express the tabulated precession amplitudes (mm of
// rim displacement) as tilt angles.
inline constexpr double kSkinLeverRadiusMm = 25.0;
inline double tilt_deg_from_lever_mm(double lever_mm) {
  return lever_mm / kSkinLeverRadiusMm * 57.295779513082320877;
}

// Initial indentation depth substituting the force-threshold descent.
inline constexpr double kInitialIndentationMm = 1.0;

// Pose components follow the closed forms
//   pressing:   z(t) = A_z cos(2 pi w_z t + pi)
//   precession: roll(t) = A sin(2 pi w t + pi/2), pitch(t) = A sin(2 pi w t)
//   sliding:    x(t) = A_xy sin(2 pi w t), y(t) = A_xy sin(2 pi w t),
//               yaw(t) = A_yaw sin(2 pi w t)
// with every non-driven component held at the reference.
Trajectory generate_trajectory(const ActionParams& params, double duration_s,
                               double rate_hz);

// The 16-row parameter grid of a primitive, ordered by action index.
std::vector<ActionParams> action_grid(Primitive primitive);

// Decimates a trajectory to action_rate (must divide the trajectory rate).
ActionSequence action_sequence(const Trajectory& traj, double action_rate_hz);

}  // namespace tactile

#endif  // TACTILE_PALPATION_HPP
