#include "tactile/wave_objects.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <stdexcept>

#include <fftw3.h>

#include "tactile/rng.hpp"

namespace tactile {

namespace {

// FFTW planning is not thread-safe; execution of distinct plans is.
std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

// Durometer-derived moduli, frozen from tools/durometer_modulus.py.
constexpr double kModulusEcoflex0010 = 43820.010821065574;    // Pa, Shore 00-10
constexpr double kModulusEcoflex0050 = 236643.62872387678;    // Pa, Shore 00-50
constexpr double kModulusPla = 3.5e9;                         // Pa, rigid print
constexpr double kLossEcoflex0010 = 0.30;
constexpr double kLossEcoflex0050 = 0.20;
constexpr double kLossPla = 0.01;
constexpr double kTopLayerThicknessMm = 2.0;

struct HetSlot {
  double freq;
  double amp;
  StiffnessClass stiffness;
};

// The five soft-class combinations reused for the heterogeneous ids 27-31
// (spans all frequencies and amplitudes; soft bulk classes only).
constexpr HetSlot kHetSlots[5] = {
    {10.0, 5.0, StiffnessClass::kEcoflex0010},
    {30.0, 10.0, StiffnessClass::kEcoflex0010},
    {50.0, 20.0, StiffnessClass::kEcoflex0010},
    {10.0, 20.0, StiffnessClass::kEcoflex0050},
    {50.0, 5.0, StiffnessClass::kEcoflex0050},
};

}  // namespace

std::string to_string(StiffnessClass c) {
  switch (c) {
    case StiffnessClass::kEcoflex0010: return "ECOFLEX_00_10";
    case StiffnessClass::kEcoflex0050: return "ECOFLEX_00_50";
    case StiffnessClass::kPla: return "PLA";
  }
  throw std::invalid_argument("invalid stiffness class");
}

StiffnessClass stiffness_from_string(const std::string& s) {
  if (s == "ECOFLEX_00_10") return StiffnessClass::kEcoflex0010;
  if (s == "ECOFLEX_00_50") return StiffnessClass::kEcoflex0050;
  if (s == "PLA") return StiffnessClass::kPla;
  throw std::invalid_argument("unknown stiffness class '" + s +
                              "' (expected ECOFLEX_00_10, ECOFLEX_00_50 or PLA)");
}

bool HeightMap::contains(double x_mm, double y_mm) const {
  const double half = extent_mm / 2.0;
  return x_mm >= -half && x_mm <= half && y_mm >= -half && y_mm <= half;
}

double HeightMap::height_at(double x_mm, double y_mm) const {
  if (!contains(x_mm, y_mm))
    throw std::out_of_range("height_at: position (" + std::to_string(x_mm) + ", " +
                            std::to_string(y_mm) + ") mm outside the " +
                            std::to_string(extent_mm) + " mm surface extent");
  const auto n = grid_mm.rows();
  // Cell centers at -extent/2 + (i + 0.5) * res; clamp to the center span.
  auto to_index = [&](double v) {
    double idx = (v + extent_mm / 2.0) / resolution_mm - 0.5;
    return std::clamp(idx, 0.0, static_cast<double>(n - 1));
  };
  const double fx = to_index(x_mm);
  const double fy = to_index(y_mm);
  const auto x0 = static_cast<Eigen::Index>(fx);
  const auto y0 = static_cast<Eigen::Index>(fy);
  const auto x1 = std::min(x0 + 1, n - 1);
  const auto y1 = std::min(y0 + 1, n - 1);
  const double tx = fx - static_cast<double>(x0);
  const double ty = fy - static_cast<double>(y0);
  return (1 - ty) * ((1 - tx) * grid_mm(y0, x0) + tx * grid_mm(y0, x1)) +
         ty * ((1 - tx) * grid_mm(y1, x0) + tx * grid_mm(y1, x1));
}

HeightMap generate_surface(const ObjectSpec& spec, int grid_res) {
  if (grid_res < 64)
    throw std::invalid_argument("generate_surface: grid_res must be >= 64, got " +
                                std::to_string(grid_res));
  if (spec.spatial_freq <= 0 || spec.amplitude_mm < 0)
    throw std::invalid_argument("generate_surface: invalid spec parameters");

  const int n = grid_res;
  const double extent_m = kDefaultExtentMm / 1000.0;
  const double nyquist = static_cast<double>(n) / (2.0 * extent_m);
  if (spec.spatial_freq > nyquist)
    throw std::invalid_argument(
        "generate_surface: spatial frequency " + std::to_string(spec.spatial_freq) +
        " cycles/m exceeds the grid Nyquist limit " + std::to_string(nyquist) +
        " cycles/m; increase grid_res");

  HeightMap map;
  map.resolution_mm = kDefaultExtentMm / n;
  map.extent_mm = kDefaultExtentMm;
  map.grid_mm = Eigen::MatrixXd::Zero(n, n);
  if (spec.amplitude_mm == 0.0) return map;

  // White noise field.
  std::vector<double> field(static_cast<std::size_t>(n) * n);
  SplitMix64 rng(derive_stream(spec.seed, 0x5746u /* 'WF' */));
  for (auto& v : field) v = rng.gaussian();

  const int nc = n / 2 + 1;
  std::vector<std::complex<double>> spectrum(static_cast<std::size_t>(n) * nc);
  fftw_plan fwd, inv;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fwd = fftw_plan_dft_r2c_2d(n, n, field.data(),
                               reinterpret_cast<fftw_complex*>(spectrum.data()),
                               FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_2d(n, n,
                               reinterpret_cast<fftw_complex*>(spectrum.data()),
                               field.data(), FFTW_ESTIMATE);
  }
  fftw_execute(fwd);

  // Gaussian annulus gain around the target spatial frequency.
  const double f0 = spec.spatial_freq;
  const double sigma = f0 / 3.0;
  for (int ky = 0; ky < n; ++ky) {
    const double fy = ((ky <= n / 2) ? ky : ky - n) / extent_m;
    for (int kx = 0; kx < nc; ++kx) {
      const double fx = kx / extent_m;
      const double fr = std::hypot(fx, fy);
      double gain = std::exp(-(fr - f0) * (fr - f0) / (2.0 * sigma * sigma));
      if (kx == 0 && ky == 0) gain = 0.0;  // no DC
      spectrum[static_cast<std::size_t>(ky) * nc + kx] *= gain;
    }
  }
  fftw_execute(inv);
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
  }

  Eigen::Map<Eigen::MatrixXd> g(field.data(), n, n);
  const double mean = g.mean();
  g.array() -= mean;
  const double half_p2p = (g.maxCoeff() - g.minCoeff()) / 2.0;
  if (half_p2p > 0) g.array() *= spec.amplitude_mm / half_p2p;
  map.grid_mm = g;
  return map;
}

MaterialParams material_properties(StiffnessClass c, bool heterogeneous) {
  MaterialParams p;
  switch (c) {
    case StiffnessClass::kEcoflex0010:
      p.young_modulus_pa = kModulusEcoflex0010;
      p.loss_factor = kLossEcoflex0010;
      break;
    case StiffnessClass::kEcoflex0050:
      p.young_modulus_pa = kModulusEcoflex0050;
      p.loss_factor = kLossEcoflex0050;
      break;
    case StiffnessClass::kPla:
      p.young_modulus_pa = kModulusPla;
      p.loss_factor = kLossPla;
      break;
  }
  if (heterogeneous) {
    p.top_layer_modulus_pa = kModulusEcoflex0050;
    p.top_layer_thickness_mm = kTopLayerThicknessMm;
  }
  return p;
}

ObjectSpec heterogeneous_slot(int object_id, std::uint64_t base_seed) {
  if (object_id < kHomogeneousCount || object_id >= kCatalogSize)
    throw std::invalid_argument("heterogeneous_slot: id " + std::to_string(object_id) +
                                " out of range [27, 31]");
  const HetSlot& slot = kHetSlots[object_id - kHomogeneousCount];
  ObjectSpec spec;
  spec.object_id = object_id;
  spec.spatial_freq = slot.freq;
  spec.amplitude_mm = slot.amp;
  spec.stiffness = slot.stiffness;
  spec.heterogeneous = true;
  spec.seed = derive_stream(base_seed, static_cast<std::uint64_t>(object_id));
  return spec;
}

std::vector<CatalogEntry> build_catalog(std::uint64_t base_seed, int grid_res) {
  std::vector<CatalogEntry> catalog;
  catalog.reserve(kCatalogSize);
  int id = 0;
  for (double freq : kSpatialFreqLevels) {
    for (double amp : kAmplitudeLevels) {
      for (int s = 0; s < 3; ++s) {
        ObjectSpec spec;
        spec.object_id = id;
        spec.spatial_freq = freq;
        spec.amplitude_mm = amp;
        spec.stiffness = static_cast<StiffnessClass>(s);
        spec.heterogeneous = false;
        spec.seed = derive_stream(base_seed, static_cast<std::uint64_t>(id));
        catalog.push_back({spec, generate_surface(spec, grid_res),
                           material_properties(spec.stiffness, false)});
        ++id;
      }
    }
  }
  for (; id < kCatalogSize; ++id) {
    ObjectSpec spec = heterogeneous_slot(id, base_seed);
    catalog.push_back({spec, generate_surface(spec, grid_res),
                       material_properties(spec.stiffness, true)});
  }
  return catalog;
}

std::vector<double> radial_power_spectrum(const Eigen::MatrixXd& grid,
                                          double resolution_mm) {
  const int n = static_cast<int>(grid.rows());
  if (grid.cols() != n) throw std::invalid_argument("radial_power_spectrum: square grid required");
  const double extent_m = n * resolution_mm / 1000.0;

  std::vector<std::complex<double>> in(static_cast<std::size_t>(n) * n);
  std::vector<std::complex<double>> out(in.size());
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      in[static_cast<std::size_t>(y) * n + x] = grid(y, x);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    plan = fftw_plan_dft_2d(n, n, reinterpret_cast<fftw_complex*>(in.data()),
                            reinterpret_cast<fftw_complex*>(out.data()),
                            FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(plan);
  }

  std::vector<double> power(n, 0.0);
  std::vector<std::size_t> count(n, 0);
  for (int ky = 0; ky < n; ++ky) {
    const double fy = ((ky <= n / 2) ? ky : ky - n) / extent_m;
    for (int kx = 0; kx < n; ++kx) {
      const double fx = ((kx <= n / 2) ? kx : kx - n) / extent_m;
      const double fr = std::hypot(fx, fy);
      const auto bin = static_cast<std::size_t>(std::lround(fr * extent_m));
      if (bin >= power.size()) continue;
      power[bin] += std::norm(out[static_cast<std::size_t>(ky) * n + kx]);
      count[bin]++;
    }
  }
  for (std::size_t k = 0; k < power.size(); ++k)
    if (count[k] > 0) power[k] /= static_cast<double>(count[k]);
  return power;
}

}  // namespace tactile
