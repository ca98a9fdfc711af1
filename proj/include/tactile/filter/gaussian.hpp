#ifndef TACTILE_FILTER_GAUSSIAN_HPP
#define TACTILE_FILTER_GAUSSIAN_HPP

#include <torch/torch.h>

namespace tactile::filter {

// Diagonal Gaussian belief. mean and var share a shape; var is strictly
// positive (softplus heads upstream enforce this for learned beliefs).
struct GaussianDiag {
  torch::Tensor mean;
  torch::Tensor var;

  // Reparameterized sample with externally injected standard-normal noise.
  torch::Tensor rsample(const torch::Tensor& noise) const {
    return mean + var.sqrt() * noise;
  }
  std::int64_t dim() const { return mean.size(-1); }
};

// Precision-weighted product of two diagonal Gaussians (the Bayesian
// measurement update, normalizer absorbed):
//   var = v1 v2 / (v1 + v2),  mean = (m1 v2 + m2 v1) / (v1 + v2)
GaussianDiag fuse_gaussians(const GaussianDiag& meas, const GaussianDiag& pred);

// Closed-form KL[q || p] between diagonal Gaussians, summed over the last
// dimension (one value per leading/batch index).
torch::Tensor kl_diag(const GaussianDiag& q, const GaussianDiag& p);

// log N(x | mean, var) summed over all but the first (batch) dimension.
torch::Tensor gaussian_log_prob(const torch::Tensor& x, const torch::Tensor& mean,
                                const torch::Tensor& var);

}  // namespace tactile::filter

#endif  // TACTILE_FILTER_GAUSSIAN_HPP
