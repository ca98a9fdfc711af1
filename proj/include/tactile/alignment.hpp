#ifndef TACTILE_ALIGNMENT_HPP
#define TACTILE_ALIGNMENT_HPP

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tactile/contact_sim.hpp"

namespace tactile {

inline constexpr int kNumProperties = 4;
inline constexpr const char* kPropertyNames[kNumProperties] = {
    "spatial_freq", "amplitude", "stiffness", "heterogeneity"};

// Regression targets of one object.
struct PropertyVector {
  double spatial_freq = 0;   // cycles/m
  double amplitude = 0;      // mm
  double stiffness = 0;      // ordinal 0/1/2
  double heterogeneity = 0;  // 0/1

  Eigen::Vector4d as_vector() const {
    return {spatial_freq, amplitude, stiffness, heterogeneity};
  }
};

PropertyVector property_vector(const ObjectSpec& spec);

// RBF kernel ridge regressor over final-segment latent features.
struct AlignmentModel {
  double bandwidth = 1.0;           // RBF length scale
  double ridge = 1e-6;              // selected by cross-validation
  Eigen::MatrixXd train_points;     // [n, d]
  Eigen::MatrixXd dual_coef;        // [n, properties]
  Eigen::Vector4d target_mean = Eigen::Vector4d::Zero();
  Eigen::Vector4d target_std = Eigen::Vector4d::Ones();
  std::array<bool, kNumProperties> active{true, true, true, true};
};

// Fits the regressor (bandwidth = median pairwise distance; ridge chosen
// by 5-fold cross-validation on a log grid). Zero-variance properties are
// deactivated with a warning; degenerate kernels are rejected with a
// conditioning diagnostic.
AlignmentModel krr_fit(const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets);

// Predicted property matrix [m, 4]; inactive properties yield NaN.
Eigen::MatrixXd krr_predict(const AlignmentModel& model, const Eigen::MatrixXd& features);

// NMSE of predictions against targets: per-property mean squared error
// divided by the population variance of the target column. Zero-variance
// columns are skipped (NaN) with a warning.
Eigen::Vector4d nmse(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& targets);

// Per-step NMSE over latent trajectories. latents: one [T, d] matrix per
// trial; targets: [trials, 4]. Returns [T, 4].
Eigen::MatrixXd nmse_timeseries(const AlignmentModel& model,
                                const std::vector<Eigen::MatrixXd>& latents,
                                const Eigen::MatrixXd& targets);

// Latent feature for the regressor: mean of the last `last_k` per-step
// latent mean vectors.
Eigen::VectorXd final_segment_feature(const Eigen::MatrixXd& latents, int last_k = 10);

struct DistanceMatrices {
  std::vector<int> label_ids;       // row/col order
  Eigen::VectorXd intra;            // mean within-class pairwise distance
  Eigen::MatrixXd inter;            // centroid distances
  Eigen::VectorXd intra_normalized; // joint min-max with inter
  Eigen::MatrixXd inter_normalized;
};

DistanceMatrices distance_matrices(const Eigen::MatrixXd& features,
                                   const std::vector<int>& labels);

// Object groups of the grouped comparison tables.
enum class ObjectGroup { kSoft = 0, kHard = 1, kHeterogeneous = 2 };
ObjectGroup object_group(int object_id);
std::string to_string(ObjectGroup g);

// One evaluated trial: predictions at the final step, plus identifiers.
struct GroupedInput {
  int object_id = 0;
  Primitive primitive = Primitive::kPressing;
  Eigen::Vector4d prediction;
  Eigen::Vector4d target;
};

// NMSE per group x property x primitive; the property axis carries the
// four properties plus an "overall" row (their mean). Normalization uses
// the global per-property population variance so groups are comparable.
struct GroupedNmse {
  // [group][property 0..3, 4 = overall][primitive]; NaN where undefined.
  double value[3][kNumProperties + 1][3];
  int group_sizes[3];  // distinct objects per group among the inputs
};

GroupedNmse grouped_nmse(const std::vector<GroupedInput>& inputs);

}  // namespace tactile

#endif  // TACTILE_ALIGNMENT_HPP
