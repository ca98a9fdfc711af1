#include "tactile/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <set>
#include <stdexcept>

namespace tactile {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

Eigen::MatrixXd rbf_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                           double bandwidth) {
  Eigen::MatrixXd k(a.rows(), b.rows());
  const double denom = 2.0 * bandwidth * bandwidth;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      k(i, j) = std::exp(-(a.row(i) - b.row(j)).squaredNorm() / denom);
  return k;
}

double median_pairwise_distance(const Eigen::MatrixXd& x) {
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(x.rows() * (x.rows() - 1) / 2));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = i + 1; j < x.rows(); ++j)
      dists.push_back((x.row(i) - x.row(j)).norm());
  if (dists.empty()) return 0;
  std::sort(dists.begin(), dists.end());
  const std::size_t n = dists.size();
  return (n % 2 == 1) ? dists[n / 2] : 0.5 * (dists[n / 2 - 1] + dists[n / 2]);
}

// Population (1/N) variance of a column.
double population_variance(const Eigen::VectorXd& v) {
  const double mean = v.mean();
  return (v.array() - mean).square().sum() / static_cast<double>(v.size());
}

}  // namespace

PropertyVector property_vector(const ObjectSpec& spec) {
  PropertyVector p;
  p.spatial_freq = spec.spatial_freq;
  p.amplitude = spec.amplitude_mm;
  p.stiffness = static_cast<double>(static_cast<int>(spec.stiffness));
  p.heterogeneity = spec.heterogeneous ? 1.0 : 0.0;
  return p;
}

AlignmentModel krr_fit(const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets) {
  if (features.rows() != targets.rows())
    throw std::invalid_argument("krr_fit: feature/target row mismatch");
  if (features.rows() < 2)
    throw std::invalid_argument("krr_fit: at least two samples required");
  if (targets.cols() != kNumProperties)
    throw std::invalid_argument("krr_fit: expected 4 target columns");

  AlignmentModel model;
  model.train_points = features;

  // Target normalization; constant columns are deactivated.
  for (int p = 0; p < kNumProperties; ++p) {
    const double var = population_variance(targets.col(p));
    model.target_mean(p) = targets.col(p).mean();
    if (var <= 0) {
      model.active[static_cast<std::size_t>(p)] = false;
      model.target_std(p) = 1.0;
      std::cerr << "krr_fit: property '" << kPropertyNames[p]
                << "' has zero variance; skipped\n";
    } else {
      model.target_std(p) = std::sqrt(var);
    }
  }
  int n_active = 0;
  for (bool a : model.active) n_active += a ? 1 : 0;
  if (n_active == 0) throw std::invalid_argument("krr_fit: no property with >= 2 distinct values");

  const double bw = median_pairwise_distance(features);
  if (!(bw > 0))
    throw std::invalid_argument(
        "krr_fit: degenerate kernel matrix (median pairwise distance is zero; "
        "all feature rows coincide)");
  model.bandwidth = bw;

  Eigen::MatrixXd y = targets;
  for (int p = 0; p < kNumProperties; ++p)
    y.col(p) = (targets.col(p).array() - model.target_mean(p)) / model.target_std(p);

  const Eigen::MatrixXd K = rbf_kernel(features, features, bw);

  // 5-fold cross-validation for the ridge weight on a log grid.
  const int n = static_cast<int>(features.rows());
  const int folds = std::min(5, n);
  std::vector<double> grid;
  for (int e = -8; e <= 2; ++e) grid.push_back(std::pow(10.0, e));
  double best_score = std::numeric_limits<double>::infinity();
  double best_ridge = grid.front();
  if (n >= 2 * folds) {
    for (double ridge : grid) {
      double score = 0;
      for (int f = 0; f < folds; ++f) {
        std::vector<int> train_idx, val_idx;
        for (int i = 0; i < n; ++i)
          ((i % folds == f) ? val_idx : train_idx).push_back(i);
        Eigen::MatrixXd Ktt(train_idx.size(), train_idx.size());
        Eigen::MatrixXd Kvt(val_idx.size(), train_idx.size());
        Eigen::MatrixXd yt(train_idx.size(), kNumProperties);
        Eigen::MatrixXd yv(val_idx.size(), kNumProperties);
        for (std::size_t i = 0; i < train_idx.size(); ++i) {
          yt.row(static_cast<Eigen::Index>(i)) = y.row(train_idx[i]);
          for (std::size_t j = 0; j < train_idx.size(); ++j)
            Ktt(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                K(train_idx[i], train_idx[j]);
        }
        for (std::size_t i = 0; i < val_idx.size(); ++i) {
          yv.row(static_cast<Eigen::Index>(i)) = y.row(val_idx[i]);
          for (std::size_t j = 0; j < train_idx.size(); ++j)
            Kvt(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                K(val_idx[i], train_idx[j]);
        }
        Eigen::MatrixXd reg = Ktt;
        reg.diagonal().array() += ridge;
        const Eigen::MatrixXd alpha = reg.ldlt().solve(yt);
        const Eigen::MatrixXd pred = Kvt * alpha;
        for (int p = 0; p < kNumProperties; ++p)
          if (model.active[static_cast<std::size_t>(p)])
            score += (pred.col(p) - yv.col(p)).squaredNorm();
      }
      if (score < best_score - 1e-15) {
        best_score = score;
        best_ridge = ridge;
      }
    }
  } else {
    best_ridge = 1e-6;
  }
  model.ridge = best_ridge;

  Eigen::MatrixXd reg = K;
  reg.diagonal().array() += model.ridge;
  const auto ldlt = reg.ldlt();
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("krr_fit: kernel system factorization failed (size " +
                             std::to_string(n) + ", ridge " + std::to_string(model.ridge) +
                             "); kernel matrix is numerically degenerate");
  model.dual_coef = ldlt.solve(y);
  return model;
}

Eigen::MatrixXd krr_predict(const AlignmentModel& model, const Eigen::MatrixXd& features) {
  const Eigen::MatrixXd K = rbf_kernel(features, model.train_points, model.bandwidth);
  Eigen::MatrixXd pred = K * model.dual_coef;
  for (int p = 0; p < kNumProperties; ++p) {
    if (!model.active[static_cast<std::size_t>(p)]) {
      pred.col(p).setConstant(kNan);
      continue;
    }
    pred.col(p) = pred.col(p).array() * model.target_std(p) + model.target_mean(p);
  }
  return pred;
}

Eigen::Vector4d nmse(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& targets) {
  if (predictions.rows() != targets.rows() || predictions.cols() != kNumProperties)
    throw std::invalid_argument("nmse: shape mismatch");
  Eigen::Vector4d out;
  for (int p = 0; p < kNumProperties; ++p) {
    const double var = population_variance(targets.col(p));
    if (var <= 0) {
      std::cerr << "nmse: property '" << kPropertyNames[p]
                << "' has zero variance; skipped\n";
      out(p) = kNan;
      continue;
    }
    const double mse =
        (predictions.col(p) - targets.col(p)).squaredNorm() /
        static_cast<double>(targets.rows());
    out(p) = mse / var;
  }
  return out;
}

Eigen::VectorXd final_segment_feature(const Eigen::MatrixXd& latents, int last_k) {
  const auto rows = latents.rows();
  const auto k = std::min<Eigen::Index>(last_k, rows);
  return latents.bottomRows(k).colwise().mean();
}

Eigen::MatrixXd nmse_timeseries(const AlignmentModel& model,
                                const std::vector<Eigen::MatrixXd>& latents,
                                const Eigen::MatrixXd& targets) {
  if (latents.empty()) throw std::invalid_argument("nmse_timeseries: no trajectories");
  const auto T = latents[0].rows();
  for (const auto& l : latents)
    if (l.rows() != T)
      throw std::invalid_argument("nmse_timeseries: trajectories of unequal length");

  Eigen::MatrixXd out(T, kNumProperties);
  Eigen::MatrixXd step_features(static_cast<Eigen::Index>(latents.size()), latents[0].cols());
  for (Eigen::Index t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < latents.size(); ++i)
      step_features.row(static_cast<Eigen::Index>(i)) = latents[i].row(t);
    const Eigen::MatrixXd pred = krr_predict(model, step_features);
    out.row(t) = nmse(pred, targets).transpose();
  }
  return out;
}

DistanceMatrices distance_matrices(const Eigen::MatrixXd& features,
                                   const std::vector<int>& labels) {
  if (static_cast<Eigen::Index>(labels.size()) != features.rows())
    throw std::invalid_argument("distance_matrices: label count mismatch");
  DistanceMatrices dm;
  std::set<int> unique(labels.begin(), labels.end());
  dm.label_ids.assign(unique.begin(), unique.end());
  const auto n = static_cast<Eigen::Index>(dm.label_ids.size());

  Eigen::MatrixXd centroids(n, features.cols());
  dm.intra.resize(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    std::vector<Eigen::Index> members;
    for (Eigen::Index i = 0; i < features.rows(); ++i)
      if (labels[static_cast<std::size_t>(i)] == dm.label_ids[static_cast<std::size_t>(c)])
        members.push_back(i);
    if (members.size() < 2)
      throw std::invalid_argument("distance_matrices: label " +
                                  std::to_string(dm.label_ids[static_cast<std::size_t>(c)]) +
                                  " has fewer than 2 samples");
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(features.cols());
    for (auto i : members) mean += features.row(i).transpose();
    centroids.row(c) = (mean / static_cast<double>(members.size())).transpose();
    double sum = 0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        sum += (features.row(members[a]) - features.row(members[b])).norm();
        ++pairs;
      }
    dm.intra(c) = sum / static_cast<double>(pairs);
  }

  dm.inter.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      dm.inter(i, j) = (centroids.row(i) - centroids.row(j)).norm();

  double lo = dm.inter.minCoeff(), hi = dm.inter.maxCoeff();
  lo = std::min(lo, dm.intra.minCoeff());
  hi = std::max(hi, dm.intra.maxCoeff());
  const double span = hi - lo;
  dm.inter_normalized = dm.inter;
  dm.intra_normalized = dm.intra;
  if (span > 0) {
    dm.inter_normalized = (dm.inter.array() - lo) / span;
    dm.intra_normalized = (dm.intra.array() - lo) / span;
  } else {
    dm.inter_normalized.setZero();
    dm.intra_normalized.setZero();
  }
  return dm;
}

ObjectGroup object_group(int object_id) {
  static const std::set<int> soft = {0, 1, 3, 4, 9, 10, 12, 13, 18, 19, 21, 22};
  if (object_id >= kHomogeneousCount && object_id < kCatalogSize)
    return ObjectGroup::kHeterogeneous;
  if (soft.count(object_id)) return ObjectGroup::kSoft;
  if (object_id >= 0 && object_id < kHomogeneousCount) return ObjectGroup::kHard;
  throw std::invalid_argument("object_group: id " + std::to_string(object_id) +
                              " outside the catalog");
}

std::string to_string(ObjectGroup g) {
  switch (g) {
    case ObjectGroup::kSoft: return "soft";
    case ObjectGroup::kHard: return "hard";
    case ObjectGroup::kHeterogeneous: return "heterogeneous";
  }
  throw std::invalid_argument("invalid object group");
}

GroupedNmse grouped_nmse(const std::vector<GroupedInput>& inputs) {
  if (inputs.empty()) throw std::invalid_argument("grouped_nmse: no inputs");

  GroupedNmse out{};
  // Global per-property population variance keeps groups comparable.
  Eigen::Vector4d global_var;
  for (int p = 0; p < kNumProperties; ++p) {
    Eigen::VectorXd col(static_cast<Eigen::Index>(inputs.size()));
    for (std::size_t i = 0; i < inputs.size(); ++i)
      col(static_cast<Eigen::Index>(i)) = inputs[i].target(p);
    global_var(p) = population_variance(col);
  }

  for (int g = 0; g < 3; ++g) {
    std::set<int> objects;
    for (const auto& in : inputs)
      if (object_group(in.object_id) == static_cast<ObjectGroup>(g))
        objects.insert(in.object_id);
    out.group_sizes[g] = static_cast<int>(objects.size());

    for (int prim = 0; prim < 3; ++prim) {
      std::vector<const GroupedInput*> members;
      for (const auto& in : inputs)
        if (object_group(in.object_id) == static_cast<ObjectGroup>(g) &&
            static_cast<int>(in.primitive) == prim)
          members.push_back(&in);
      if (members.empty()) {
        for (int p = 0; p <= kNumProperties; ++p) out.value[g][p][prim] = kNan;
        continue;
      }
      double overall = 0;
      int overall_terms = 0;
      for (int p = 0; p < kNumProperties; ++p) {
        if (global_var(p) <= 0) {
          out.value[g][p][prim] = kNan;
          continue;
        }
        double mse = 0;
        for (const auto* in : members) {
          const double d = in->prediction(p) - in->target(p);
          mse += d * d;
        }
        mse /= static_cast<double>(members.size());
        out.value[g][p][prim] = mse / global_var(p);
        overall += out.value[g][p][prim];
        ++overall_terms;
      }
      out.value[g][kNumProperties][prim] =
          overall_terms ? overall / static_cast<double>(overall_terms) : kNan;
    }
  }
  return out;
}

}  // namespace tactile
