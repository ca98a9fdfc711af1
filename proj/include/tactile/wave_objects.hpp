#ifndef TACTILE_WAVE_OBJECTS_HPP
#define TACTILE_WAVE_OBJECTS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tactile {

enum class StiffnessClass { kEcoflex0010 = 0, kEcoflex0050 = 1, kPla = 2 };

std::string to_string(StiffnessClass c);
StiffnessClass stiffness_from_string(const std::string& s);

// Generative parameters of one wave object.
struct ObjectSpec {
  int object_id = 0;
  double spatial_freq = 10.0;  // cycles/m
  double amplitude_mm = 5.0;   // half peak-to-peak surface height
  StiffnessClass stiffness = StiffnessClass::kEcoflex0010;
  bool heterogeneous = false;
  std::uint64_t seed = 0;
};

// Sampled surface field on a regular lateral grid, heights in mm,
// zero-mean by construction.
struct HeightMap {
  Eigen::MatrixXd grid_mm;    // rows = y cells, cols = x cells
  double resolution_mm = 1.0; // mm per cell
  double extent_mm = 200.0;   // square extent, centered on the origin

  // Bilinear height lookup at a world position (mm, origin at center).
  // Out-of-extent positions throw.
  double height_at(double x_mm, double y_mm) const;
  bool contains(double x_mm, double y_mm) const;
};

struct MaterialParams {
  double young_modulus_pa = 0.0;
  double loss_factor = 0.0;  // viscous loss tangent, >= 0
  std::optional<double> top_layer_modulus_pa;   // present iff heterogeneous
  std::optional<double> top_layer_thickness_mm; // present iff heterogeneous
};

struct CatalogEntry {
  ObjectSpec spec;
  HeightMap surface;
  MaterialParams material;
};

inline constexpr int kCatalogSize = 32;
inline constexpr int kHomogeneousCount = 27;
inline constexpr double kDefaultExtentMm = 200.0;
inline constexpr int kDefaultGridRes = 200;  // cells per side at 1 mm/cell

// The three-level parameter grids of the homogeneous catalog.
inline constexpr double kSpatialFreqLevels[3] = {10.0, 30.0, 50.0};
inline constexpr double kAmplitudeLevels[3] = {5.0, 10.0, 20.0};

// Band-pass filtered white noise surface: radially symmetric Gaussian
// annulus (center = spec.spatial_freq, sigma = center/3) applied in the
// frequency domain, then shifted to zero mean and rescaled so the half
// peak-to-peak range equals spec.amplitude_mm. Deterministic in spec.seed.
HeightMap generate_surface(const ObjectSpec& spec, int grid_res = kDefaultGridRes);

// Frozen material constants per stiffness class. Values derive from the
// durometer indentation model in tools/durometer_modulus.py.
MaterialParams material_properties(StiffnessClass c, bool heterogeneous);

// Full 32-object catalog: ids 0-26 enumerate freq x amplitude x stiffness
// lexicographically (stiffness fastest); ids 27-31 are the five designated
// soft combinations with a stiff 2 mm top layer.
std::vector<CatalogEntry> build_catalog(std::uint64_t base_seed,
                                        int grid_res = kDefaultGridRes);

// Parameter tuple for a heterogeneous catalog slot (ids 27-31).
ObjectSpec heterogeneous_slot(int object_id, std::uint64_t base_seed);

// Radially averaged power spectrum of a height grid; bin k covers radial
// frequency k / extent_m cycles/m. Shared by generation diagnostics and
// the object catalog manifest.
std::vector<double> radial_power_spectrum(const Eigen::MatrixXd& grid,
                                          double resolution_mm);

}  // namespace tactile

#endif  // TACTILE_WAVE_OBJECTS_HPP
