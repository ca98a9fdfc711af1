#include <doctest.h>

#include <cmath>
#include <complex>
#include <set>

#include <fftw3.h>

#include "tactile/wave_objects.hpp"

using namespace tactile;

namespace {

// Test-side radial spectrum oracle: plain full DFT, power summed per
// integer radial bin (independent of the library's analysis helper).
struct RadialOracle {
  std::vector<double> power_sum;
  std::vector<std::size_t> count;
};

RadialOracle radial_oracle(const Eigen::MatrixXd& grid, double resolution_mm) {
  const int n = static_cast<int>(grid.rows());
  const double extent_m = n * resolution_mm / 1000.0;
  std::vector<std::complex<double>> in(static_cast<std::size_t>(n) * n), out(in.size());
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) in[static_cast<std::size_t>(y) * n + x] = grid(y, x);
  fftw_plan plan = fftw_plan_dft_2d(n, n, reinterpret_cast<fftw_complex*>(in.data()),
                                    reinterpret_cast<fftw_complex*>(out.data()),
                                    FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  RadialOracle r;
  r.power_sum.assign(static_cast<std::size_t>(n), 0.0);
  r.count.assign(static_cast<std::size_t>(n), 0);
  for (int ky = 0; ky < n; ++ky) {
    const double fy = ((ky <= n / 2) ? ky : ky - n) / extent_m;
    for (int kx = 0; kx < n; ++kx) {
      const double fx = ((kx <= n / 2) ? kx : kx - n) / extent_m;
      const auto bin = static_cast<std::size_t>(std::lround(std::hypot(fx, fy) * extent_m));
      if (bin >= r.power_sum.size()) continue;
      r.power_sum[bin] += std::norm(out[static_cast<std::size_t>(ky) * n + kx]);
      r.count[bin]++;
    }
  }
  return r;
}

ObjectSpec make_spec(double freq, double amp, std::uint64_t seed) {
  ObjectSpec s;
  s.spatial_freq = freq;
  s.amplitude_mm = amp;
  s.seed = seed;
  return s;
}

// Durometer oracle (ASTM Type 00 + Hertz), mirrored from
// tools/durometer_modulus.py.
double type00_modulus_pa(double shore00) {
  const double radius = 1.190625e-3, travel = 2.54e-3;
  const double force = 0.203 + 0.00908 * shore00;
  const double depth = travel * (1.0 - shore00 / 100.0);
  const double e_star = 3.0 * force / (4.0 * std::sqrt(radius) * std::pow(depth, 1.5));
  return e_star * 0.75;
}

}  // namespace

TEST_CASE("zero amplitude gives a flat all-zero map") {
  const HeightMap map = generate_surface(make_spec(30, 0.0, 5));
  CHECK(map.grid_mm.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("generation is deterministic in the seed") {
  const HeightMap a = generate_surface(make_spec(30, 10, 7));
  const HeightMap b = generate_surface(make_spec(30, 10, 7));
  REQUIRE(a.grid_mm.rows() == b.grid_mm.rows());
  CHECK((a.grid_mm - b.grid_mm).cwiseAbs().maxCoeff() == 0.0);
  const HeightMap c = generate_surface(make_spec(30, 10, 8));
  CHECK((a.grid_mm - c.grid_mm).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("zero mean and half peak-to-peak equal amplitude") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const double amp = 10.0;
    const HeightMap map = generate_surface(make_spec(30, amp, seed));
    CHECK(std::abs(map.grid_mm.mean()) < 1e-9 * amp);
    const double half_p2p = (map.grid_mm.maxCoeff() - map.grid_mm.minCoeff()) / 2.0;
    CHECK(half_p2p == doctest::Approx(amp).epsilon(1e-6));
    CHECK(map.grid_mm.maxCoeff() - map.grid_mm.minCoeff() <= 2.0 * amp * (1 + 1e-12));
  }
}

TEST_CASE("radially averaged spectrum peaks within one octave band") {
  // freq = 30 cycles/m: the averaged power spectrum must attain its
  // maximum inside [20, 40] cycles/m.
  const HeightMap map = generate_surface(make_spec(30, 10, 7));
  const auto oracle = radial_oracle(map.grid_mm, map.resolution_mm);
  const double extent_m = map.grid_mm.rows() * map.resolution_mm / 1000.0;
  double best = -1;
  std::size_t best_bin = 0;
  for (std::size_t k = 1; k < oracle.power_sum.size(); ++k) {
    if (oracle.count[k] == 0) continue;
    const double avg = oracle.power_sum[k] / static_cast<double>(oracle.count[k]);
    if (avg > best) {
      best = avg;
      best_bin = k;
    }
  }
  const double peak_freq = static_cast<double>(best_bin) / extent_m;
  CHECK(peak_freq >= 20.0);
  CHECK(peak_freq <= 40.0);
}

TEST_CASE("spectral concentration within one octave on all 27 homogeneous objects") {
  const auto catalog = build_catalog(99);
  for (int id = 0; id < kHomogeneousCount; ++id) {
    const auto& entry = catalog[static_cast<std::size_t>(id)];
    const auto oracle = radial_oracle(entry.surface.grid_mm, entry.surface.resolution_mm);
    const double extent_m =
        entry.surface.grid_mm.rows() * entry.surface.resolution_mm / 1000.0;
    const double f0 = entry.spec.spatial_freq;
    double total = 0, in_band = 0;
    for (std::size_t k = 1; k < oracle.power_sum.size(); ++k) {
      const double f = static_cast<double>(k) / extent_m;
      total += oracle.power_sum[k];
      if (f >= f0 / 2 && f <= 2 * f0) in_band += oracle.power_sum[k];
    }
    INFO("object " << id << " freq " << f0 << " fraction " << in_band / total);
    CHECK(in_band / total >= 0.60);
  }
}

TEST_CASE("Nyquist violation is rejected with an explicit message") {
  CHECK_THROWS_WITH_AS(generate_surface(make_spec(200.0, 5, 1), 64),
                       doctest::Contains("Nyquist"), std::invalid_argument);
  CHECK_THROWS_AS(generate_surface(make_spec(30, 5, 1), 32), std::invalid_argument);
}

TEST_CASE("catalog enumerates the full grid exactly once") {
  const auto catalog = build_catalog(42);
  REQUIRE(catalog.size() == 32);

  // Objects 0-26: lexicographic (freq, amp, stiffness) bijection.
  std::set<std::tuple<double, double, int>> seen;
  for (int id = 0; id < kHomogeneousCount; ++id) {
    const auto& s = catalog[static_cast<std::size_t>(id)].spec;
    CHECK(s.object_id == id);
    CHECK_FALSE(s.heterogeneous);
    seen.insert({s.spatial_freq, s.amplitude_mm, static_cast<int>(s.stiffness)});
  }
  CHECK(seen.size() == 27);

  // First lexicographic element.
  CHECK(catalog[0].spec.spatial_freq == 10.0);
  CHECK(catalog[0].spec.amplitude_mm == 5.0);
  CHECK(catalog[0].spec.stiffness == StiffnessClass::kEcoflex0010);

  // Heterogeneous slots.
  for (int id = kHomogeneousCount; id < kCatalogSize; ++id) {
    const auto& entry = catalog[static_cast<std::size_t>(id)];
    CHECK(entry.spec.heterogeneous);
    CHECK(entry.material.top_layer_modulus_pa.has_value());
    CHECK(entry.material.top_layer_thickness_mm.has_value());
    CHECK(entry.spec.stiffness != StiffnessClass::kPla);
  }

  // Regeneration with the same base seed is bit-identical.
  const auto again = build_catalog(42);
  for (std::size_t i = 0; i < catalog.size(); ++i)
    CHECK((catalog[i].surface.grid_mm - again[i].surface.grid_mm).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("material moduli are ordered and within the durometer-oracle bounds") {
  const auto e10 = material_properties(StiffnessClass::kEcoflex0010, false);
  const auto e50 = material_properties(StiffnessClass::kEcoflex0050, false);
  const auto pla = material_properties(StiffnessClass::kPla, false);
  CHECK(e10.young_modulus_pa < e50.young_modulus_pa);
  CHECK(e50.young_modulus_pa < pla.young_modulus_pa);

  CHECK(e10.young_modulus_pa > 10e3);
  CHECK(e10.young_modulus_pa < 100e3);
  CHECK(e10.young_modulus_pa == doctest::Approx(type00_modulus_pa(10)).epsilon(1e-12));
  CHECK(e50.young_modulus_pa == doctest::Approx(type00_modulus_pa(50)).epsilon(1e-12));

  CHECK_FALSE(e10.top_layer_modulus_pa.has_value());
  const auto het = material_properties(StiffnessClass::kEcoflex0010, true);
  CHECK(het.top_layer_modulus_pa.has_value());
  CHECK(*het.top_layer_thickness_mm == 2.0);
}

TEST_CASE("height lookup interpolates and rejects out-of-extent points") {
  const HeightMap map = generate_surface(make_spec(10, 5, 3));
  CHECK(map.height_at(0, 0) == map.height_at(0, 0));
  CHECK_THROWS_AS(map.height_at(150.0, 0.0), std::out_of_range);
  // Continuity: nearby points have nearby heights.
  const double h0 = map.height_at(10.0, -20.0);
  const double h1 = map.height_at(10.1, -20.0);
  CHECK(std::abs(h1 - h0) < 1.0);
}
