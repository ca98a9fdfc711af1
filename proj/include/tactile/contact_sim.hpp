#ifndef TACTILE_CONTACT_SIM_HPP
#define TACTILE_CONTACT_SIM_HPP

#include <cstdint>
#include <string>

#include "tactile/ndarray.hpp"
#include "tactile/palpation.hpp"
#include "tactile/wave_objects.hpp"

namespace tactile {

enum class SkinType { kSoft = 0, kHard = 1 };

std::string to_string(SkinType t);
SkinType skin_from_string(const std::string& s);

// Geometry and mechanics of one e-Skin build. Taxels form two stacked
// 16x16 grids, accelerometer nodes a 4x4 grid, all centered on the
// end-effector axis.
struct SkinConfig {
  SkinType type = SkinType::kSoft;
  double bulk_modulus_pa = 0;      // silicone Young's modulus
  double skin_thickness_mm = 5.0;  // compliant depth above the first FSR layer
  int fsr_cells = 16;
  double fsr_pitch_mm = 2.5;
  double interlayer_depth_mm = 4.0;  // FSR layer 1 -> layer 2 separation
  int accel_cells = 4;
  double accel_pitch_mm = 10.0;
  double contact_radius_mm = 20.0;
  double taxel_damping_ns_per_m = 0.2;  // skin-side dashpot per taxel
  double fsr_noise_std_n = 0.01;
  double accel_noise_std = 0.05;       // m/s^2
  double vibration_cutoff_hz = 80.0;   // mechanical low-pass of the bulk

  // Taxel / node center coordinates in the skin frame (mm).
  double fsr_coord_mm(int i) const {
    return (static_cast<double>(i) - (fsr_cells - 1) / 2.0) * fsr_pitch_mm;
  }
  double accel_coord_mm(int i) const {
    return (static_cast<double>(i) - (accel_cells - 1) / 2.0) * accel_pitch_mm;
  }
};

SkinConfig skin_config(SkinType type);

struct TrialMeta {
  int object_id = 0;
  SkinType skin_type = SkinType::kSoft;
  Primitive primitive = Primitive::kPressing;
  int action_index = 1;
  int repeat = 0;
  std::uint64_t seed = 0;
};

// Raw simulated streams of one palpation trial.
struct RawTrial {
  ArrayF fsr;    // [T, 16, 16, 2] normal force, N
  ArrayF accel;  // [T, 4, 4, 3] acceleration, m/s^2
  double tactile_rate_hz = 0;
  TrialMeta meta;
};

inline constexpr double kTactileRateHz = 700.0;
inline constexpr std::size_t kTrialSamples = 7000;

// Per-taxel series-spring effective stiffness (N/m) of a skin pressing on
// an object's local layer stack. Exposed for tests and diagnostics.
double effective_taxel_stiffness(const SkinConfig& skin,
                                 const MaterialParams& material);

// Kelvin-Voigt contact simulation with texture-, loading- and
// stiffness-driven accelerometer vibrations. Deterministic in meta.seed.
RawTrial simulate_trial(const CatalogEntry& object, const SkinConfig& skin,
                        const Trajectory& traj, const TrialMeta& meta);

}  // namespace tactile

#endif  // TACTILE_CONTACT_SIM_HPP
