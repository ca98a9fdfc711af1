#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include <fftw3.h>

#include "tactile/contact_sim.hpp"
#include "tactile/dataset.hpp"
#include "tactile/wave_objects.hpp"

using namespace tactile;

namespace {

CatalogEntry make_object(double freq, double amp, StiffnessClass cls,
                         std::uint64_t seed, bool het = false) {
  CatalogEntry e;
  e.spec.object_id = 0;
  e.spec.spatial_freq = freq;
  e.spec.amplitude_mm = amp;
  e.spec.stiffness = cls;
  e.spec.heterogeneous = het;
  e.spec.seed = seed;
  e.surface = generate_surface(e.spec);
  e.material = material_properties(cls, het);
  return e;
}

Trajectory constant_trajectory(double z_mm, std::size_t samples = kTrialSamples) {
  Trajectory t;
  t.rate_hz = kTactileRateHz;
  t.duration_s = static_cast<double>(samples) / kTactileRateHz;
  t.samples.assign(samples, Pose{});
  for (auto& p : t.samples) p.z_mm = z_mm;
  return t;
}

Trajectory sliding_trajectory(int action_index) {
  const auto grid = action_grid(Primitive::kSliding);
  return generate_trajectory(grid[static_cast<std::size_t>(action_index - 1)],
                             kTrialDurationS, kTactileRateHz);
}

TrialMeta meta_with_seed(std::uint64_t seed) {
  TrialMeta m;
  m.seed = seed;
  return m;
}

// Power spectrum of the summed z-channel spectra over all accel nodes;
// bin k is k * rate / N Hz.
std::vector<double> accel_power_spectrum(const RawTrial& trial) {
  const std::size_t n = trial.accel.dim(0);
  std::vector<double> power(n / 2 + 1, 0.0);
  std::vector<double> in(n);
  std::vector<std::complex<double>> out(n / 2 + 1);
  fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                        reinterpret_cast<fftw_complex*>(out.data()),
                                        FFTW_ESTIMATE);
  for (std::size_t ny = 0; ny < 4; ++ny)
    for (std::size_t nx = 0; nx < 4; ++nx) {
      for (std::size_t t = 0; t < n; ++t) in[t] = trial.accel(t, ny, nx, 2);
      fftw_execute(plan);
      for (std::size_t k = 0; k < power.size(); ++k) power[k] += std::norm(out[k]);
    }
  fftw_destroy_plan(plan);
  return power;
}

double mean_tangential_speed(const Trajectory& traj) {
  double sum = 0;
  for (std::size_t t = 1; t < traj.samples.size(); ++t) {
    const double vx =
        (traj.samples[t].x_mm - traj.samples[t - 1].x_mm) * 1e-3 * traj.rate_hz;
    const double vy =
        (traj.samples[t].y_mm - traj.samples[t - 1].y_mm) * 1e-3 * traj.rate_hz;
    sum += std::hypot(vx, vy);
  }
  return sum / static_cast<double>(traj.samples.size() - 1);
}

double total_layer_force(const RawTrial& trial, std::size_t t, int layer) {
  double sum = 0;
  for (std::size_t j = 0; j < 16; ++j)
    for (std::size_t i = 0; i < 16; ++i)
      sum += trial.fsr(t, j, i, static_cast<std::size_t>(layer));
  return sum;
}

}  // namespace

TEST_CASE("skin configs expose the documented layouts and ordering") {
  const SkinConfig soft = skin_config(SkinType::kSoft);
  const SkinConfig hard = skin_config(SkinType::kHard);
  CHECK(soft.bulk_modulus_pa < hard.bulk_modulus_pa);
  CHECK(soft.fsr_cells == 16);
  CHECK(hard.fsr_cells == 16);
  CHECK(soft.accel_cells == 4);
  CHECK(hard.accel_cells == 4);
  CHECK(soft.fsr_noise_std_n == hard.fsr_noise_std_n);
  CHECK(soft.accel_noise_std == hard.accel_noise_std);
  CHECK(soft.vibration_cutoff_hz < hard.vibration_cutoff_hz);
}

TEST_CASE("never-indenting trajectory produces exactly zero FSR values") {
  const auto object = make_object(30, 10, StiffnessClass::kEcoflex0010, 3);
  const auto traj = constant_trajectory(50.0);  // hovering well above the surface
  const RawTrial trial = simulate_trial(object, skin_config(SkinType::kSoft), traj,
                                        meta_with_seed(5));
  for (std::size_t i = 0; i < trial.fsr.size(); ++i) CHECK(trial.fsr(i) == 0.0f);
}

TEST_CASE("same seed gives a bit-identical trial") {
  const auto object = make_object(30, 10, StiffnessClass::kEcoflex0050, 4);
  const auto traj = sliding_trajectory(6);
  const RawTrial a = simulate_trial(object, skin_config(SkinType::kSoft), traj,
                                    meta_with_seed(17));
  const RawTrial b = simulate_trial(object, skin_config(SkinType::kSoft), traj,
                                    meta_with_seed(17));
  for (std::size_t i = 0; i < a.fsr.size(); ++i) REQUIRE(a.fsr(i) == b.fsr(i));
  for (std::size_t i = 0; i < a.accel.size(); ++i) REQUIRE(a.accel(i) == b.accel(i));
}

TEST_CASE("stiffer objects produce strictly larger peak total force") {
  // Same surface, same trajectory, same seed; only the material differs.
  auto soft_obj = make_object(10, 5, StiffnessClass::kEcoflex0010, 6);
  auto stiff_obj = soft_obj;
  stiff_obj.spec.stiffness = StiffnessClass::kEcoflex0050;
  stiff_obj.material = material_properties(StiffnessClass::kEcoflex0050, false);
  auto pla_obj = soft_obj;
  pla_obj.spec.stiffness = StiffnessClass::kPla;
  pla_obj.material = material_properties(StiffnessClass::kPla, false);

  const auto grid = action_grid(Primitive::kPressing);
  const auto traj = generate_trajectory(grid[5], kTrialDurationS, kTactileRateHz);
  const SkinConfig skin = skin_config(SkinType::kSoft);

  auto peak_force = [&](const CatalogEntry& obj) {
    const RawTrial trial = simulate_trial(obj, skin, traj, meta_with_seed(21));
    double peak = 0;
    for (std::size_t t = 0; t < trial.fsr.dim(0); ++t)
      peak = std::max(peak, total_layer_force(trial, t, 0));
    return peak;
  };
  const double f_soft = peak_force(soft_obj);
  const double f_stiff = peak_force(stiff_obj);
  const double f_pla = peak_force(pla_obj);
  CHECK(f_soft < f_stiff);
  CHECK(f_stiff < f_pla);
}

TEST_CASE("sliding vibration peaks at spatial frequency times mean speed") {
  const auto object = make_object(30, 10, StiffnessClass::kEcoflex0050, 8);
  const auto traj = sliding_trajectory(15);
  const double v_bar = mean_tangential_speed(traj);
  const double f_expect = 30.0 * v_bar;

  const RawTrial trial = simulate_trial(object, skin_config(SkinType::kSoft), traj,
                                        meta_with_seed(31));
  const auto power = accel_power_spectrum(trial);
  const double df = kTactileRateHz / static_cast<double>(trial.accel.dim(0));
  std::size_t best = 1;
  for (std::size_t k = 1; k < power.size(); ++k)
    if (power[k] > power[best]) best = k;
  const double f_peak = static_cast<double>(best) * df;
  INFO("expected " << f_expect << " Hz, peak at " << f_peak << " Hz");
  CHECK(f_peak >= 0.8 * f_expect);
  CHECK(f_peak <= 1.2 * f_expect);
}

TEST_CASE("monotone indentation: deeper profile dominates the force trace") {
  const auto object = make_object(10, 5, StiffnessClass::kEcoflex0050, 9);
  SkinConfig skin = skin_config(SkinType::kSoft);
  skin.fsr_noise_std_n = 0.0;
  skin.accel_noise_std = 0.0;

  const auto grid = action_grid(Primitive::kPressing);
  const auto deep = generate_trajectory(grid[1], kTrialDurationS, kTactileRateHz);
  Trajectory shallow = deep;
  for (auto& p : shallow.samples) p.z_mm += 0.5;  // lifted: same rates, smaller depth

  const RawTrial a = simulate_trial(object, skin, deep, meta_with_seed(41));
  const RawTrial b = simulate_trial(object, skin, shallow, meta_with_seed(41));
  for (std::size_t t = 0; t < a.fsr.dim(0); ++t)
    CHECK(total_layer_force(a, t, 0) >= total_layer_force(b, t, 0) - 1e-9);
}

TEST_CASE("sliding injects energy relative to a static hold") {
  const auto object = make_object(50, 20, StiffnessClass::kEcoflex0010, 10);
  const SkinConfig skin = skin_config(SkinType::kSoft);
  const RawTrial moving = simulate_trial(object, skin, sliding_trajectory(15),
                                         meta_with_seed(51));
  const RawTrial still = simulate_trial(object, skin, constant_trajectory(0.0),
                                        meta_with_seed(51));
  auto rms = [](const RawTrial& t) {
    double sum = 0;
    for (std::size_t i = 0; i < t.accel.size(); ++i)
      sum += static_cast<double>(t.accel(i)) * t.accel(i);
    return std::sqrt(sum / static_cast<double>(t.accel.size()));
  };
  CHECK(rms(moving) > 2.0 * rms(still));
}

TEST_CASE("soft skin lowers the accel spectral centroid (mechanical low-pass)") {
  const auto object = make_object(50, 10, StiffnessClass::kEcoflex0050, 11);
  const auto traj = sliding_trajectory(15);
  const RawTrial soft = simulate_trial(object, skin_config(SkinType::kSoft), traj,
                                       meta_with_seed(61));
  const RawTrial hard = simulate_trial(object, skin_config(SkinType::kHard), traj,
                                       meta_with_seed(61));
  auto centroid = [](const RawTrial& t) {
    // Spectral centroid of the per-sample accel magnitude over all nodes.
    const std::size_t n = t.accel.dim(0);
    std::vector<double> mag(n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      double m = 0;
      for (std::size_t ny = 0; ny < 4; ++ny)
        for (std::size_t nx = 0; nx < 4; ++nx) {
          double q = 0;
          for (std::size_t ax = 0; ax < 3; ++ax)
            q += static_cast<double>(t.accel(s, ny, nx, ax)) * t.accel(s, ny, nx, ax);
          m += std::sqrt(q);
        }
      mag[s] = m;
    }
    std::vector<std::complex<double>> out(n / 2 + 1);
    fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), mag.data(),
                                          reinterpret_cast<fftw_complex*>(out.data()),
                                          FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    double num = 0, den = 0;
    for (std::size_t k = 1; k < out.size(); ++k) {
      const double p = std::norm(out[k]);
      num += static_cast<double>(k) * p;
      den += p;
    }
    return num / den;
  };
  CHECK(centroid(soft) <= centroid(hard));
}

TEST_CASE("trajectory leaving the surface extent is rejected") {
  const auto object = make_object(10, 5, StiffnessClass::kEcoflex0010, 12);
  ActionParams p;
  p.primitive = Primitive::kSliding;
  p.a_xy_mm = 95.0;
  p.a_yaw_deg = 0.0;
  p.w_slide_hz = 0.2;
  const auto traj = generate_trajectory(p, kTrialDurationS, kTactileRateHz);
  CHECK_THROWS_WITH_AS(
      simulate_trial(object, skin_config(SkinType::kSoft), traj, meta_with_seed(71)),
      doctest::Contains("surface extent"), std::invalid_argument);
}

TEST_CASE("effective stiffness is monotone in the object modulus") {
  const SkinConfig skin = skin_config(SkinType::kSoft);
  const double k10 =
      effective_taxel_stiffness(skin, material_properties(StiffnessClass::kEcoflex0010, false));
  const double k50 =
      effective_taxel_stiffness(skin, material_properties(StiffnessClass::kEcoflex0050, false));
  const double kpla =
      effective_taxel_stiffness(skin, material_properties(StiffnessClass::kPla, false));
  CHECK(k10 < k50);
  CHECK(k50 < kpla);

  // A stiff 2 mm top layer stiffens the soft bulk.
  const double khet =
      effective_taxel_stiffness(skin, material_properties(StiffnessClass::kEcoflex0010, true));
  CHECK(khet > k10);

  // T_a invariant: 7000 samples for a 10 s trial.
  const auto object = make_object(10, 5, StiffnessClass::kEcoflex0010, 13);
  const RawTrial trial = simulate_trial(object, skin, constant_trajectory(0.0),
                                        meta_with_seed(81));
  CHECK(trial.accel.dim(0) == kTrialSamples);
  CHECK(trial.fsr.dim(0) == kTrialSamples);
}
