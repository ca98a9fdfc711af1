#include "tactile/contact_sim.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "tactile/rng.hpp"

namespace tactile {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kDegToRad = 0.017453292519943295769236907684886;

// Object bulk thickness under the contact patch.
constexpr double kObjectThicknessMm = 30.0;

// Deep-layer force image processing.
constexpr double kSmearSigmaMm = 4.0;       // lateral smear into layer 2
constexpr double kHetSmearSigmaMm = 3.0;    // extra spread by a stiff top layer
constexpr double kShearGainMmPerMm = 0.3;   // image shift per tangential mm
constexpr double kShearCapTaxels = 2.0;
constexpr double kLayer2CutoffHz = 25.0;

// Vibration synthesis.
constexpr double kSlideGain = 10.0;        // texture carrier, x amp x (2 pi f_c)^2
constexpr double kEngageVelocity = 1.2;    // m/s; engagement carrier = v * f_s
constexpr double kEngageGain = 0.15;
constexpr double kEngageRateRef = 0.01;    // m/s normalization of |d(delta)/dt|
constexpr double kHumGain = 0.2;
constexpr double kHumRateRef = 0.01;       // m/s
constexpr double kRingBaseHz = 60.0;       // stiffness ring at the reference k
constexpr double kRingCapHz = 250.0;
constexpr double kLateralAxisGain = 0.6;

// Loss-factor dashpot conversion frequency.
constexpr double kDampingRefHz = 1.0;

double ring_reference_stiffness() {
  // k_eff of Ecoflex 00-50 bulk under the soft skin; fixed anchor so ring
  // frequencies are comparable across skins.
  static const double k = effective_taxel_stiffness(
      skin_config(SkinType::kSoft),
      material_properties(StiffnessClass::kEcoflex0050, false));
  return k;
}

// Separable Gaussian blur with edge clamping, sigma in cells.
void gaussian_smear(Eigen::MatrixXd& img, double sigma_cells) {
  if (sigma_cells <= 0) return;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma_cells)));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0;
  for (int k = -radius; k <= radius; ++k) {
    kernel[k + radius] = std::exp(-0.5 * k * k / (sigma_cells * sigma_cells));
    sum += kernel[k + radius];
  }
  for (auto& v : kernel) v /= sum;

  const auto n = img.rows();
  Eigen::MatrixXd tmp(n, n);
  for (Eigen::Index y = 0; y < n; ++y)
    for (Eigen::Index x = 0; x < n; ++x) {
      double acc = 0;
      for (int k = -radius; k <= radius; ++k) {
        const auto xx = std::clamp<Eigen::Index>(x + k, 0, n - 1);
        acc += kernel[k + radius] * img(y, xx);
      }
      tmp(y, x) = acc;
    }
  for (Eigen::Index y = 0; y < n; ++y)
    for (Eigen::Index x = 0; x < n; ++x) {
      double acc = 0;
      for (int k = -radius; k <= radius; ++k) {
        const auto yy = std::clamp<Eigen::Index>(y + k, 0, n - 1);
        acc += kernel[k + radius] * tmp(yy, x);
      }
      img(y, x) = acc;
    }
}

// Samples img at fractional offset (image shifted by (dx, dy) cells).
Eigen::MatrixXd shift_image(const Eigen::MatrixXd& img, double dx, double dy) {
  const auto n = img.rows();
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index y = 0; y < n; ++y)
    for (Eigen::Index x = 0; x < n; ++x) {
      const double sx = std::clamp(static_cast<double>(x) - dx, 0.0,
                                   static_cast<double>(n - 1));
      const double sy = std::clamp(static_cast<double>(y) - dy, 0.0,
                                   static_cast<double>(n - 1));
      const auto x0 = static_cast<Eigen::Index>(sx);
      const auto y0 = static_cast<Eigen::Index>(sy);
      const auto x1 = std::min(x0 + 1, n - 1);
      const auto y1 = std::min(y0 + 1, n - 1);
      const double tx = sx - static_cast<double>(x0);
      const double ty = sy - static_cast<double>(y0);
      out(y, x) = (1 - ty) * ((1 - tx) * img(y0, x0) + tx * img(y0, x1)) +
                  ty * ((1 - tx) * img(y1, x0) + tx * img(y1, x1));
    }
  return out;
}

}  // namespace

std::string to_string(SkinType t) {
  return t == SkinType::kSoft ? "SOFT" : "HARD";
}

SkinType skin_from_string(const std::string& s) {
  if (s == "SOFT") return SkinType::kSoft;
  if (s == "HARD") return SkinType::kHard;
  throw std::invalid_argument("unknown skin type '" + s + "' (expected SOFT or HARD)");
}

SkinConfig skin_config(SkinType type) {
  SkinConfig c;
  c.type = type;
  if (type == SkinType::kSoft) {
    // Ecoflex 00-31 bulk; frozen from tools/durometer_modulus.py.
    c.bulk_modulus_pa = 107643.21750681021;
    c.vibration_cutoff_hz = 80.0;
  } else {
    // Dragon Skin 30 (Shore A 30), Gent relation.
    c.bulk_modulus_pa = 1142371.731732508;
    c.vibration_cutoff_hz = 180.0;
  }
  return c;
}

double effective_taxel_stiffness(const SkinConfig& skin,
                                 const MaterialParams& material) {
  const double area_m2 = (skin.fsr_pitch_mm * 1e-3) * (skin.fsr_pitch_mm * 1e-3);
  const double k_skin = skin.bulk_modulus_pa * area_m2 / (skin.skin_thickness_mm * 1e-3);

  double k_obj;
  if (material.top_layer_modulus_pa) {
    const double t_top = *material.top_layer_thickness_mm * 1e-3;
    const double t_bulk = kObjectThicknessMm * 1e-3 - t_top;
    const double k_top = *material.top_layer_modulus_pa * area_m2 / t_top;
    const double k_bulk = material.young_modulus_pa * area_m2 / t_bulk;
    k_obj = k_top * k_bulk / (k_top + k_bulk);
  } else {
    k_obj = material.young_modulus_pa * area_m2 / (kObjectThicknessMm * 1e-3);
  }
  return k_skin * k_obj / (k_skin + k_obj);
}

RawTrial simulate_trial(const CatalogEntry& object, const SkinConfig& skin,
                        const Trajectory& traj, const TrialMeta& meta) {
  if (std::abs(traj.rate_hz - kTactileRateHz) > 1e-9)
    throw std::invalid_argument("simulate_trial: trajectory rate must be " +
                                std::to_string(kTactileRateHz) + " Hz");
  const std::size_t steps = traj.samples.size();
  const int nf = skin.fsr_cells;
  const int na = skin.accel_cells;
  const double dt = 1.0 / traj.rate_hz;

  const double k_eff = effective_taxel_stiffness(skin, object.material);
  const double c_taxel = object.material.loss_factor * k_eff / (kTwoPi * kDampingRefHz) +
                         skin.taxel_damping_ns_per_m;
  const double f_ring = std::min(
      kRingCapHz, kRingBaseHz * std::sqrt(k_eff / ring_reference_stiffness()));
  const double f_engage = kEngageVelocity * object.spec.spatial_freq;
  const double roughness = object.spec.amplitude_mm / 20.0;

  // Mean tangential speed over the trial fixes the texture carrier.
  double v_bar = 0;
  for (std::size_t t = 1; t < steps; ++t) {
    const double vx = (traj.samples[t].x_mm - traj.samples[t - 1].x_mm) * 1e-3 / dt;
    const double vy = (traj.samples[t].y_mm - traj.samples[t - 1].y_mm) * 1e-3 / dt;
    v_bar += std::hypot(vx, vy);
  }
  v_bar /= static_cast<double>(steps > 1 ? steps - 1 : 1);
  const double f_texture = object.spec.spatial_freq * v_bar;

  RawTrial trial;
  trial.meta = meta;
  trial.tactile_rate_hz = traj.rate_hz;
  trial.fsr = ArrayF({steps, static_cast<std::size_t>(nf),
                      static_cast<std::size_t>(nf), 2});
  trial.accel = ArrayF({steps, static_cast<std::size_t>(na),
                        static_cast<std::size_t>(na), 3});

  SplitMix64 fsr_noise(derive_stream(meta.seed, 1));
  SplitMix64 accel_noise(derive_stream(meta.seed, 2));
  SplitMix64 phase_rng(derive_stream(meta.seed, 3));

  // Per node/axis/component carrier phases.
  std::vector<double> phases(static_cast<std::size_t>(na) * na * 3 * 3);
  for (auto& p : phases) p = phase_rng.uniform() * kTwoPi;
  auto phase = [&](int ny, int nx, int axis, int comp) {
    return phases[((static_cast<std::size_t>(ny) * na + nx) * 3 + axis) * 3 + comp];
  };

  Eigen::MatrixXd delta_prev = Eigen::MatrixXd::Zero(nf, nf);
  Eigen::MatrixXd height_prev = Eigen::MatrixXd::Zero(nf, nf);
  Eigen::MatrixXd layer2_state = Eigen::MatrixXd::Zero(nf, nf);
  const double a_layer2 = 1.0 - std::exp(-kTwoPi * kLayer2CutoffHz * dt);
  const double a_vib = 1.0 - std::exp(-kTwoPi * skin.vibration_cutoff_hz * dt);
  std::vector<double> vib_state(static_cast<std::size_t>(na) * na * 3, 0.0);

  const double patch_radius =
      std::hypot(skin.fsr_coord_mm(0), skin.fsr_coord_mm(0));

  for (std::size_t t = 0; t < steps; ++t) {
    const Pose& pose = traj.samples[t];
    const double cg = std::cos(pose.yaw_deg * kDegToRad);
    const double sg = std::sin(pose.yaw_deg * kDegToRad);
    const double sa = std::sin(pose.roll_deg * kDegToRad);
    const double sb = std::sin(pose.pitch_deg * kDegToRad);

    if (!object.surface.contains(pose.x_mm + patch_radius, pose.y_mm + patch_radius) ||
        !object.surface.contains(pose.x_mm - patch_radius, pose.y_mm - patch_radius))
      throw std::invalid_argument(
          "simulate_trial: trajectory exits the surface extent at t = " +
          std::to_string(static_cast<double>(t) * dt) + " s");

    Eigen::MatrixXd force1(nf, nf);
    double rate_pose_sum = 0, rate_total_sum = 0;
    int contact_count = 0;

    for (int j = 0; j < nf; ++j) {
      const double v = skin.fsr_coord_mm(j);
      for (int i = 0; i < nf; ++i) {
        const double u = skin.fsr_coord_mm(i);
        const double wx = pose.x_mm + cg * u - sg * v;
        const double wy = pose.y_mm + sg * u + cg * v;
        const double h = object.surface.height_at(wx, wy);
        // Skin bottom height above the mean surface plane at this taxel.
        const double tilt = v * sa - u * sb;
        const double skin_z = pose.z_mm - kInitialIndentationMm + tilt;
        const double delta = h - skin_z;  // mm, > 0 in contact

        const double dh = (t == 0) ? 0.0 : (h - height_prev(j, i)) / dt;
        const double dpose = (t == 0) ? 0.0
                                      : (delta - delta_prev(j, i)) / dt - dh;
        const double ddelta = dh + dpose;
        height_prev(j, i) = h;
        delta_prev(j, i) = delta;

        double f = 0;
        if (delta > 0) {
          f = std::max(0.0, k_eff * delta * 1e-3 + c_taxel * ddelta * 1e-3);
          ++contact_count;
          rate_pose_sum += std::abs(dpose) * 1e-3;
          rate_total_sum += std::abs(ddelta) * 1e-3;
        }
        force1(j, i) = f;
      }
    }

    // Stiff top layers spread load laterally before it reaches the skin.
    if (object.spec.heterogeneous)
      gaussian_smear(force1, kHetSmearSigmaMm / skin.fsr_pitch_mm);

    // Layer 2: smeared, shear-shifted, low-passed copy of layer 1.
    Eigen::MatrixXd force2 = force1;
    gaussian_smear(force2, kSmearSigmaMm / skin.fsr_pitch_mm);
    const double shift_x = std::clamp(
        kShearGainMmPerMm * (pose.x_mm - traj.samples[0].x_mm) / skin.fsr_pitch_mm,
        -kShearCapTaxels, kShearCapTaxels);
    const double shift_y = std::clamp(
        kShearGainMmPerMm * (pose.y_mm - traj.samples[0].y_mm) / skin.fsr_pitch_mm,
        -kShearCapTaxels, kShearCapTaxels);
    if (shift_x != 0 || shift_y != 0) force2 = shift_image(force2, shift_x, shift_y);
    layer2_state += a_layer2 * (force2 - layer2_state);

    for (int j = 0; j < nf; ++j)
      for (int i = 0; i < nf; ++i) {
        double f1 = force1(j, i);
        double f2 = layer2_state(j, i);
        if (f1 > 0) f1 = std::max(0.0, f1 + skin.fsr_noise_std_n * fsr_noise.gaussian());
        if (f2 > 0) f2 = std::max(0.0, f2 + skin.fsr_noise_std_n * fsr_noise.gaussian());
        trial.fsr(t, j, i, 0) = static_cast<float>(f1);
        trial.fsr(t, j, i, 1) = static_cast<float>(f2);
      }

    // Vibration drives.
    const double contact_frac = static_cast<double>(contact_count) / (nf * nf);
    const double rate_pose = contact_count ? rate_pose_sum / contact_count : 0.0;
    const double rate_total = contact_count ? rate_total_sum / contact_count : 0.0;
    const double vx = (t == 0) ? 0.0
                               : (pose.x_mm - traj.samples[t - 1].x_mm) * 1e-3 / dt;
    const double vy = (t == 0) ? 0.0
                               : (pose.y_mm - traj.samples[t - 1].y_mm) * 1e-3 / dt;
    const double speed = std::hypot(vx, vy);

    const double time_s = static_cast<double>(t) * dt;
    const double amp_slide =
        (v_bar > 1e-6)
            ? kSlideGain * (object.spec.amplitude_mm * 1e-3) *
                  (kTwoPi * f_texture) * (kTwoPi * f_texture) * (speed / v_bar) *
                  contact_frac
            : 0.0;
    const double amp_engage =
        kEngageGain * roughness * (rate_total / kEngageRateRef) * contact_frac;
    const double amp_hum = kHumGain * (rate_pose / kHumRateRef) * contact_frac;

    for (int ny = 0; ny < na; ++ny)
      for (int nx = 0; nx < na; ++nx)
        for (int axis = 0; axis < 3; ++axis) {
          const double gain = (axis == 2) ? 1.0 : kLateralAxisGain;
          double mech =
              amp_slide * std::sin(kTwoPi * f_texture * time_s + phase(ny, nx, axis, 0)) +
              amp_engage * std::sin(kTwoPi * f_engage * time_s + phase(ny, nx, axis, 1)) +
              amp_hum * std::sin(kTwoPi * f_ring * time_s + phase(ny, nx, axis, 2));
          mech *= gain;
          auto& state = vib_state[(static_cast<std::size_t>(ny) * na + nx) * 3 + axis];
          state += a_vib * (mech - state);
          trial.accel(t, ny, nx, axis) =
              static_cast<float>(state + skin.accel_noise_std * accel_noise.gaussian());
        }
  }
  return trial;
}

}  // namespace tactile
