#include "tactile/filter/gaussian.hpp"

#include <stdexcept>

namespace tactile::filter {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void check_pair(const GaussianDiag& a, const GaussianDiag& b, const char* what) {
  if (a.mean.sizes() != b.mean.sizes())
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}
}  // namespace

GaussianDiag fuse_gaussians(const GaussianDiag& meas, const GaussianDiag& pred) {
  check_pair(meas, pred, "fuse_gaussians");
  if ((meas.var.min().item<double>() <= 0) || (pred.var.min().item<double>() <= 0))
    throw std::invalid_argument("fuse_gaussians: variances must be strictly positive");
  const auto total = meas.var + pred.var;
  GaussianDiag out;
  out.var = meas.var * pred.var / total;
  out.mean = (meas.mean * pred.var + pred.mean * meas.var) / total;
  return out;
}

torch::Tensor kl_diag(const GaussianDiag& q, const GaussianDiag& p) {
  check_pair(q, p, "kl_diag");
  const auto ratio = q.var / p.var;
  const auto md = p.mean - q.mean;
  return 0.5 * (ratio + md * md / p.var - 1.0 - ratio.log()).sum(-1);
}

torch::Tensor gaussian_log_prob(const torch::Tensor& x, const torch::Tensor& mean,
                                const torch::Tensor& var) {
  const auto d = x - mean;
  auto ll = -0.5 * (kLog2Pi + var.log() + d * d / var);
  std::vector<std::int64_t> dims;
  for (std::int64_t i = 1; i < ll.dim(); ++i) dims.push_back(i);
  return dims.empty() ? ll : ll.sum(dims);
}

}  // namespace tactile::filter
