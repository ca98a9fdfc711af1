#ifndef TACTILE_FILTER_MODEL_HPP
#define TACTILE_FILTER_MODEL_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include "tactile/filter/gaussian.hpp"
#include "tactile/preprocessing.hpp"

namespace tactile::filter {

// One observation stream. Image streams run through the convolutional
// stacks; vector streams (used by the linear-Gaussian verification rigs)
// through dense stacks.
struct StreamSpec {
  int channels = 1;
  int image_size = 28;  // square side; ignored for vector streams
  int vector_dim = 0;   // > 0 selects a vector stream
  bool is_image() const { return vector_dim == 0; }
};

struct ModelConfig {
  int n_z = 16;
  int n_y = 16;
  int n_a = 6;
  int conv_base = 8;    // channels of the first conv layer
  int hidden = 64;      // dense feature width (transition, priors, vector stacks)
  int lstm_hidden = 64;
  int label_embed = 8;
  int n_labels = 32;
  double var_eps = 1e-6;        // belief variance floor
  double dec_var_floor = 1e-3;  // decoder observation variance floor
  std::vector<StreamSpec> streams;
  torch::Dtype dtype = torch::kFloat;

  static ModelConfig for_fusion(FusionMode mode, int n_labels,
                                torch::Dtype dtype = torch::kFloat);
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
};

// Standard-normal noise injected into the reparameterized samples; a
// filtering pass is deterministic given (parameters, noise).
struct NoiseBundle {
  torch::Tensor z;  // [B, T, n_z]
  torch::Tensor y;  // [B, T, n_y]

  static NoiseBundle randn(std::int64_t batch, std::int64_t steps,
                           const ModelConfig& cfg);
  static NoiseBundle zeros(std::int64_t batch, std::int64_t steps,
                           const ModelConfig& cfg);
};

// Diagnostic variance clamps, applied per step by the verification suite
// to drive the filter into its analytic limit cases.
struct FilterOverrides {
  std::map<std::int64_t, double> encoder_var;     // step -> variance
  std::map<std::int64_t, double> transition_var;  // step -> variance
};

struct FilterResult {
  std::vector<GaussianDiag> z_filtered;   // length T
  std::vector<GaussianDiag> z_predicted;  // length T, first entry empty tensors
  std::vector<GaussianDiag> z_measured;   // length T
  std::vector<GaussianDiag> y_beliefs;    // length T (t=0: learned initial)
  torch::Tensor z_samples;                // [B, T, n_z]
  torch::Tensor y_samples;                // [B, T, n_y]

  // Convenience [B, T, n] views of the belief means.
  torch::Tensor z_means() const;
  torch::Tensor y_means() const;
};

struct ElboResult {
  torch::Tensor elbo;       // scalar, batch mean of per-sequence ELBO
  torch::Tensor recon;      // scalar, batch mean reconstruction term
  torch::Tensor kl_z;       // scalar
  torch::Tensor kl_y;       // scalar
  torch::Tensor recon_mse;  // scalar, plain MSE diagnostic
};

class LatentFilterImpl : public torch::nn::Module {
 public:
  explicit LatentFilterImpl(ModelConfig config);

  // Inverse measurement model q(z_t | o_t); one tensor per stream, each
  // [B, C, H, W] (or [B, D] for vector streams).
  GaussianDiag encode(const std::vector<torch::Tensor>& obs_frames);

  // Dynamics prediction q(z_t | z_{t-1}, y_t, a_t); near-identity in
  // z_prev at initialization.
  GaussianDiag transition(const torch::Tensor& z_prev, const torch::Tensor& y_t,
                          const torch::Tensor& a_t);

  using LstmState = std::tuple<torch::Tensor, torch::Tensor>;
  LstmState initial_lstm_state(std::int64_t batch);

  // Gated recurrent estimate q(y_t | z_{t-1}, y_{t-1}, a_{t-1}).
  std::pair<GaussianDiag, LstmState> recurrent_y(const torch::Tensor& z_prev,
                                                 const torch::Tensor& y_prev,
                                                 const torch::Tensor& a_prev,
                                                 const LstmState& state);

  // Learnable label-conditioned prior p(y_t | a_t, label); training only.
  GaussianDiag hierarchical_prior(const torch::Tensor& a_t,
                                  const torch::Tensor& labels);

  GaussianDiag initial_y(std::int64_t batch);

  // Decoder means per stream for flat samples [N, n_z].
  std::vector<torch::Tensor> decode(const torch::Tensor& z);
  // Learned per-channel observation variance of a stream, shape [C,1,1]
  // (or [D] for vector streams).
  torch::Tensor decoder_variance(std::size_t stream);

  // Runs the filter over aligned sequences. obs: per stream [B,T,C,H,W]
  // or [B,T,D]; actions: [B,T,n_a].
  FilterResult filter_sequence(const std::vector<torch::Tensor>& obs,
                               const torch::Tensor& actions,
                               const NoiseBundle& noise,
                               const FilterOverrides* overrides = nullptr);

  // Evidence lower bound with annealing weight beta; labels [B] int64.
  ElboResult elbo(const std::vector<torch::Tensor>& obs,
                  const torch::Tensor& actions, const torch::Tensor& labels,
                  double beta, const NoiseBundle& noise,
                  const FilterOverrides* overrides = nullptr);

  const ModelConfig& config() const { return config_; }

 private:
  struct EncoderStack {
    torch::nn::Sequential net{nullptr};
    int feature_dim = 0;
  };
  struct DecoderStack {
    torch::nn::Linear head{nullptr};
    torch::nn::Sequential net{nullptr};
    torch::Tensor raw_var;  // per-channel observation variance parameter
    int seed_channels = 0, seed_size = 0;
    bool image = false;
  };

  // Encodes every frame of every stream at once; returns beliefs with
  // flat batch [B*T, n_z].
  GaussianDiag encode_all(const std::vector<torch::Tensor>& obs,
                          std::int64_t batch, std::int64_t steps);

  ModelConfig config_;
  std::vector<EncoderStack> encoders_;
  std::vector<DecoderStack> decoders_;
  torch::nn::Linear enc_mean_{nullptr}, enc_var_{nullptr};
  torch::nn::Sequential trans_body_{nullptr};
  torch::nn::Linear trans_mean_{nullptr}, trans_var_{nullptr};
  torch::nn::LSTMCell y_cell_{nullptr};
  torch::nn::Linear y_mean_{nullptr}, y_var_{nullptr};
  torch::nn::Embedding label_table_{nullptr};
  torch::nn::Sequential prior_body_{nullptr};
  torch::nn::Linear prior_mean_{nullptr}, prior_var_{nullptr};
  torch::Tensor y1_mean_, y1_raw_var_;
};

TORCH_MODULE(LatentFilter);

}  // namespace tactile::filter

#endif  // TACTILE_FILTER_MODEL_HPP
