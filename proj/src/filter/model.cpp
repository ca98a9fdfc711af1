#include "tactile/filter/model.hpp"

#include <cmath>
#include <stdexcept>

namespace tactile::filter {

namespace {

// softplus(x) = 1 at x = ln(e - 1); variance heads start near 1.
constexpr double kUnitVarBias = 0.54132485461292249;

torch::Tensor softplus_var(const torch::Tensor& raw, double eps) {
  return torch::softplus(raw) + eps;
}

void fill_var_bias(torch::nn::Linear& layer) {
  torch::NoGradGuard guard;
  layer->bias.fill_(kUnitVarBias);
}

int conv_out_size(int in) { return (in - 1) / 2 + 1; }  // k3 s2 p1

}  // namespace

ModelConfig ModelConfig::for_fusion(FusionMode mode, int n_labels,
                                    torch::Dtype dtype) {
  ModelConfig cfg;
  cfg.n_labels = n_labels;
  cfg.dtype = dtype;
  for (int ch : fusion_stream_channels(mode))
    cfg.streams.push_back(StreamSpec{ch, kImageSize, 0});
  return cfg;
}

nlohmann::json ModelConfig::to_json() const {
  nlohmann::json j;
  j["n_z"] = n_z;
  j["n_y"] = n_y;
  j["n_a"] = n_a;
  j["conv_base"] = conv_base;
  j["hidden"] = hidden;
  j["lstm_hidden"] = lstm_hidden;
  j["label_embed"] = label_embed;
  j["n_labels"] = n_labels;
  j["var_eps"] = var_eps;
  j["dec_var_floor"] = dec_var_floor;
  j["dtype"] = (dtype == torch::kDouble) ? "f64" : "f32";
  auto streams_json = nlohmann::json::array();
  for (const auto& s : streams)
    streams_json.push_back({{"channels", s.channels},
                            {"image_size", s.image_size},
                            {"vector_dim", s.vector_dim}});
  j["streams"] = streams_json;
  return j;
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig cfg;
  cfg.n_z = j.at("n_z").get<int>();
  cfg.n_y = j.at("n_y").get<int>();
  cfg.n_a = j.at("n_a").get<int>();
  cfg.conv_base = j.at("conv_base").get<int>();
  cfg.hidden = j.at("hidden").get<int>();
  cfg.lstm_hidden = j.at("lstm_hidden").get<int>();
  cfg.label_embed = j.at("label_embed").get<int>();
  cfg.n_labels = j.at("n_labels").get<int>();
  cfg.var_eps = j.at("var_eps").get<double>();
  cfg.dec_var_floor = j.at("dec_var_floor").get<double>();
  cfg.dtype = j.at("dtype").get<std::string>() == "f64" ? torch::kDouble : torch::kFloat;
  for (const auto& s : j.at("streams")) {
    StreamSpec spec;
    spec.channels = s.at("channels").get<int>();
    spec.image_size = s.at("image_size").get<int>();
    spec.vector_dim = s.at("vector_dim").get<int>();
    cfg.streams.push_back(spec);
  }
  return cfg;
}

NoiseBundle NoiseBundle::randn(std::int64_t batch, std::int64_t steps,
                               const ModelConfig& cfg) {
  NoiseBundle n;
  n.z = torch::randn({batch, steps, cfg.n_z}, cfg.dtype);
  n.y = torch::randn({batch, steps, cfg.n_y}, cfg.dtype);
  return n;
}

NoiseBundle NoiseBundle::zeros(std::int64_t batch, std::int64_t steps,
                               const ModelConfig& cfg) {
  NoiseBundle n;
  n.z = torch::zeros({batch, steps, cfg.n_z}, cfg.dtype);
  n.y = torch::zeros({batch, steps, cfg.n_y}, cfg.dtype);
  return n;
}

torch::Tensor FilterResult::z_means() const {
  std::vector<torch::Tensor> means;
  means.reserve(z_filtered.size());
  for (const auto& g : z_filtered) means.push_back(g.mean);
  return torch::stack(means, 1);
}

torch::Tensor FilterResult::y_means() const {
  std::vector<torch::Tensor> means;
  means.reserve(y_beliefs.size());
  for (const auto& g : y_beliefs) means.push_back(g.mean);
  return torch::stack(means, 1);
}

LatentFilterImpl::LatentFilterImpl(ModelConfig config) : config_(std::move(config)) {
  if (config_.streams.empty())
    throw std::invalid_argument("LatentFilter: at least one observation stream required");

  int feature_total = 0;
  for (std::size_t s = 0; s < config_.streams.size(); ++s) {
    const StreamSpec& spec = config_.streams[s];
    EncoderStack enc;
    DecoderStack dec;
    const std::string tag = "s" + std::to_string(s);
    if (spec.is_image()) {
      const int c1 = config_.conv_base, c2 = 2 * c1, c3 = 4 * c1;
      const int s0 = spec.image_size;
      const int s1 = conv_out_size(s0), s2 = conv_out_size(s1), s3 = conv_out_size(s2);
      enc.net = torch::nn::Sequential(
          torch::nn::Conv2d(torch::nn::Conv2dOptions(spec.channels, c1, 3).stride(2).padding(1)),
          torch::nn::Tanh(),
          torch::nn::Conv2d(torch::nn::Conv2dOptions(c1, c2, 3).stride(2).padding(1)),
          torch::nn::Tanh(),
          torch::nn::Conv2d(torch::nn::Conv2dOptions(c2, c3, 3).stride(2).padding(1)),
          torch::nn::Tanh(), torch::nn::Flatten());
      enc.feature_dim = c3 * s3 * s3;

      dec.image = true;
      dec.seed_channels = c3;
      dec.seed_size = s3;
      dec.head = torch::nn::Linear(config_.n_z, c3 * s3 * s3);
      auto up = [](int in, int out) {
        const int op = out - ((in - 1) * 2 - 2 + 3);
        return op;
      };
      dec.net = torch::nn::Sequential(
          torch::nn::ConvTranspose2d(torch::nn::ConvTranspose2dOptions(c3, c2, 3)
                                         .stride(2).padding(1).output_padding(up(s3, s2))),
          torch::nn::Tanh(),
          torch::nn::ConvTranspose2d(torch::nn::ConvTranspose2dOptions(c2, c1, 3)
                                         .stride(2).padding(1).output_padding(up(s2, s1))),
          torch::nn::Tanh(),
          torch::nn::ConvTranspose2d(torch::nn::ConvTranspose2dOptions(c1, spec.channels, 3)
                                         .stride(2).padding(1).output_padding(up(s1, s0))));
      dec.raw_var = register_parameter(
          "dec_raw_var_" + tag,
          torch::full({spec.channels, 1, 1}, kUnitVarBias, config_.dtype));
    } else {
      enc.net = torch::nn::Sequential(
          torch::nn::Linear(spec.vector_dim, config_.hidden), torch::nn::Tanh(),
          torch::nn::Linear(config_.hidden, config_.hidden), torch::nn::Tanh());
      enc.feature_dim = config_.hidden;

      dec.image = false;
      dec.head = torch::nn::Linear(config_.n_z, config_.hidden);
      dec.net = torch::nn::Sequential(
          torch::nn::Tanh(), torch::nn::Linear(config_.hidden, config_.hidden),
          torch::nn::Tanh(), torch::nn::Linear(config_.hidden, spec.vector_dim));
      dec.raw_var = register_parameter(
          "dec_raw_var_" + tag,
          torch::full({spec.vector_dim}, kUnitVarBias, config_.dtype));
    }
    register_module("encoder_" + tag, enc.net);
    register_module("decoder_head_" + tag, dec.head);
    register_module("decoder_" + tag, dec.net);
    feature_total += enc.feature_dim;
    encoders_.push_back(std::move(enc));
    decoders_.push_back(std::move(dec));
  }

  enc_mean_ = register_module("enc_mean", torch::nn::Linear(feature_total, config_.n_z));
  enc_var_ = register_module("enc_var", torch::nn::Linear(feature_total, config_.n_z));
  fill_var_bias(enc_var_);

  const int trans_in = config_.n_z + config_.n_y + config_.n_a;
  trans_body_ = register_module(
      "trans_body",
      torch::nn::Sequential(torch::nn::Linear(trans_in, config_.hidden), torch::nn::Tanh(),
                            torch::nn::Linear(config_.hidden, config_.hidden),
                            torch::nn::Tanh()));
  trans_mean_ = register_module("trans_mean", torch::nn::Linear(config_.hidden, config_.n_z));
  trans_var_ = register_module("trans_var", torch::nn::Linear(config_.hidden, config_.n_z));
  {
    // Near-identity initialization: the prediction mean starts at z_prev.
    torch::NoGradGuard guard;
    trans_mean_->weight.zero_();
    trans_mean_->bias.zero_();
  }
  fill_var_bias(trans_var_);

  y_cell_ = register_module(
      "y_cell", torch::nn::LSTMCell(torch::nn::LSTMCellOptions(
                    config_.n_z + config_.n_y + config_.n_a, config_.lstm_hidden)));
  y_mean_ = register_module("y_mean", torch::nn::Linear(config_.lstm_hidden, config_.n_y));
  y_var_ = register_module("y_var", torch::nn::Linear(config_.lstm_hidden, config_.n_y));
  fill_var_bias(y_var_);

  label_table_ = register_module(
      "label_table", torch::nn::Embedding(config_.n_labels, config_.label_embed));
  prior_body_ = register_module(
      "prior_body",
      torch::nn::Sequential(
          torch::nn::Linear(config_.label_embed + config_.n_a, config_.hidden),
          torch::nn::Tanh()));
  prior_mean_ = register_module("prior_mean", torch::nn::Linear(config_.hidden, config_.n_y));
  prior_var_ = register_module("prior_var", torch::nn::Linear(config_.hidden, config_.n_y));
  fill_var_bias(prior_var_);

  y1_mean_ = register_parameter("y1_mean", torch::zeros({config_.n_y}, config_.dtype));
  y1_raw_var_ = register_parameter(
      "y1_raw_var", torch::full({config_.n_y}, kUnitVarBias, config_.dtype));

  this->to(config_.dtype);
}

GaussianDiag LatentFilterImpl::encode(const std::vector<torch::Tensor>& obs_frames) {
  if (obs_frames.size() != encoders_.size())
    throw std::invalid_argument("encode: expected " + std::to_string(encoders_.size()) +
                                " observation streams, got " +
                                std::to_string(obs_frames.size()));
  std::vector<torch::Tensor> features;
  features.reserve(encoders_.size());
  for (std::size_t s = 0; s < encoders_.size(); ++s) {
    const StreamSpec& spec = config_.streams[s];
    const auto& frame = obs_frames[s];
    if (spec.is_image()) {
      if (frame.dim() != 4 || frame.size(1) != spec.channels ||
          frame.size(2) != spec.image_size || frame.size(3) != spec.image_size)
        throw std::invalid_argument("encode: stream " + std::to_string(s) +
                                    " frame shape mismatch");
    } else if (frame.dim() != 2 || frame.size(1) != spec.vector_dim) {
      throw std::invalid_argument("encode: stream " + std::to_string(s) +
                                  " vector shape mismatch");
    }
    features.push_back(encoders_[s].net->forward(frame));
  }
  const auto feat = features.size() == 1 ? features[0] : torch::cat(features, 1);
  GaussianDiag g;
  g.mean = enc_mean_(feat);
  g.var = softplus_var(enc_var_(feat), config_.var_eps);
  return g;
}

GaussianDiag LatentFilterImpl::transition(const torch::Tensor& z_prev,
                                          const torch::Tensor& y_t,
                                          const torch::Tensor& a_t) {
  const auto h = trans_body_->forward(torch::cat({z_prev, y_t, a_t}, 1));
  GaussianDiag g;
  g.mean = z_prev + trans_mean_(h);
  g.var = softplus_var(trans_var_(h), config_.var_eps);
  return g;
}

LatentFilterImpl::LstmState LatentFilterImpl::initial_lstm_state(std::int64_t batch) {
  auto opts = torch::TensorOptions().dtype(config_.dtype);
  return {torch::zeros({batch, config_.lstm_hidden}, opts),
          torch::zeros({batch, config_.lstm_hidden}, opts)};
}

std::pair<GaussianDiag, LatentFilterImpl::LstmState> LatentFilterImpl::recurrent_y(
    const torch::Tensor& z_prev, const torch::Tensor& y_prev,
    const torch::Tensor& a_prev, const LstmState& state) {
  const auto input = torch::cat({z_prev, y_prev, a_prev}, 1);
  auto [h, c] = y_cell_(input, state);
  GaussianDiag g;
  g.mean = y_mean_(h);
  g.var = softplus_var(y_var_(h), config_.var_eps);
  return {g, {h, c}};
}

GaussianDiag LatentFilterImpl::hierarchical_prior(const torch::Tensor& a_t,
                                                  const torch::Tensor& labels) {
  if (labels.min().item<std::int64_t>() < 0 ||
      labels.max().item<std::int64_t>() >= config_.n_labels)
    throw std::invalid_argument("hierarchical_prior: label outside the catalog (0.." +
                                std::to_string(config_.n_labels - 1) + ")");
  const auto emb = label_table_(labels);
  const auto h = prior_body_->forward(torch::cat({emb, a_t}, 1));
  GaussianDiag g;
  g.mean = prior_mean_(h);
  g.var = softplus_var(prior_var_(h), config_.var_eps);
  return g;
}

GaussianDiag LatentFilterImpl::initial_y(std::int64_t batch) {
  GaussianDiag g;
  g.mean = y1_mean_.unsqueeze(0).expand({batch, config_.n_y});
  g.var = softplus_var(y1_raw_var_, config_.var_eps).unsqueeze(0).expand({batch, config_.n_y});
  return g;
}

std::vector<torch::Tensor> LatentFilterImpl::decode(const torch::Tensor& z) {
  std::vector<torch::Tensor> out;
  out.reserve(decoders_.size());
  for (auto& dec : decoders_) {
    if (dec.image) {
      auto x = torch::tanh(dec.head(z));
      x = x.view({-1, dec.seed_channels, dec.seed_size, dec.seed_size});
      out.push_back(dec.net->forward(x));
    } else {
      out.push_back(dec.net->forward(dec.head(z)));
    }
  }
  return out;
}

torch::Tensor LatentFilterImpl::decoder_variance(std::size_t stream) {
  return torch::softplus(decoders_.at(stream).raw_var) + config_.dec_var_floor;
}

GaussianDiag LatentFilterImpl::encode_all(const std::vector<torch::Tensor>& obs,
                                          std::int64_t batch, std::int64_t steps) {
  std::vector<torch::Tensor> flat;
  flat.reserve(obs.size());
  for (std::size_t s = 0; s < obs.size(); ++s) {
    const StreamSpec& spec = config_.streams[s];
    if (spec.is_image())
      flat.push_back(obs[s].reshape({batch * steps, spec.channels, spec.image_size,
                                     spec.image_size}));
    else
      flat.push_back(obs[s].reshape({batch * steps, spec.vector_dim}));
  }
  return encode(flat);
}

FilterResult LatentFilterImpl::filter_sequence(const std::vector<torch::Tensor>& obs,
                                               const torch::Tensor& actions,
                                               const NoiseBundle& noise,
                                               const FilterOverrides* overrides) {
  if (obs.size() != config_.streams.size())
    throw std::invalid_argument("filter_sequence: stream count mismatch");
  const std::int64_t batch = obs[0].size(0);
  const std::int64_t steps = obs[0].size(1);
  for (const auto& stream : obs)
    if (stream.size(0) != batch || stream.size(1) != steps)
      throw std::invalid_argument("filter_sequence: observation streams disagree on [B,T]");
  if (actions.size(0) != batch || actions.size(1) != steps)
    throw std::invalid_argument("filter_sequence: actions misaligned with observations (" +
                                std::to_string(actions.size(1)) + " vs " +
                                std::to_string(steps) + " steps)");
  if (noise.z.size(0) != batch || noise.z.size(1) != steps)
    throw std::invalid_argument("filter_sequence: noise bundle misaligned");

  // All measurement beliefs in one pass.
  auto enc = encode_all(obs, batch, steps);
  const auto enc_mean = enc.mean.view({batch, steps, config_.n_z});
  const auto enc_var = enc.var.view({batch, steps, config_.n_z});

  FilterResult result;
  result.z_filtered.reserve(steps);
  result.z_predicted.resize(steps);
  result.z_measured.reserve(steps);
  result.y_beliefs.reserve(steps);

  auto get_meas = [&](std::int64_t t) {
    GaussianDiag g{enc_mean.select(1, t), enc_var.select(1, t)};
    if (overrides) {
      auto it = overrides->encoder_var.find(t);
      if (it != overrides->encoder_var.end()) g.var = torch::full_like(g.var, it->second);
    }
    return g;
  };

  std::vector<torch::Tensor> z_samples, y_samples;
  z_samples.reserve(steps);
  y_samples.reserve(steps);

  // t = 0: z from the encoder alone, y from the learned initial belief.
  auto q_meas0 = get_meas(0);
  result.z_measured.push_back(q_meas0);
  result.z_filtered.push_back(q_meas0);
  auto q_y0 = initial_y(batch);
  result.y_beliefs.push_back(q_y0);
  z_samples.push_back(q_meas0.rsample(noise.z.select(1, 0)));
  y_samples.push_back(q_y0.rsample(noise.y.select(1, 0)));

  auto state = initial_lstm_state(batch);
  for (std::int64_t t = 1; t < steps; ++t) {
    auto [q_y, new_state] = recurrent_y(z_samples[t - 1], y_samples[t - 1],
                                        actions.select(1, t - 1), state);
    state = new_state;
    result.y_beliefs.push_back(q_y);
    y_samples.push_back(q_y.rsample(noise.y.select(1, t)));

    auto q_pred = transition(z_samples[t - 1], y_samples[t], actions.select(1, t));
    if (overrides) {
      auto it = overrides->transition_var.find(t);
      if (it != overrides->transition_var.end())
        q_pred.var = torch::full_like(q_pred.var, it->second);
    }
    result.z_predicted[t] = q_pred;

    auto q_meas = get_meas(t);
    result.z_measured.push_back(q_meas);
    auto q_filt = fuse_gaussians(q_meas, q_pred);
    result.z_filtered.push_back(q_filt);
    z_samples.push_back(q_filt.rsample(noise.z.select(1, t)));
  }

  result.z_samples = torch::stack(z_samples, 1);
  result.y_samples = torch::stack(y_samples, 1);
  return result;
}

ElboResult LatentFilterImpl::elbo(const std::vector<torch::Tensor>& obs,
                                  const torch::Tensor& actions,
                                  const torch::Tensor& labels, double beta,
                                  const NoiseBundle& noise,
                                  const FilterOverrides* overrides) {
  const std::int64_t batch = obs[0].size(0);
  const std::int64_t steps = obs[0].size(1);
  auto filt = filter_sequence(obs, actions, noise, overrides);

  // Reconstruction over all steps at once.
  const auto z_flat = filt.z_samples.reshape({batch * steps, config_.n_z});
  auto dec_means = decode(z_flat);
  torch::Tensor recon = torch::zeros({batch}, torch::TensorOptions().dtype(config_.dtype));
  torch::Tensor sq_sum = torch::zeros({1}, torch::TensorOptions().dtype(config_.dtype));
  double numel = 0;
  for (std::size_t s = 0; s < dec_means.size(); ++s) {
    const StreamSpec& spec = config_.streams[s];
    torch::Tensor target, mean;
    if (spec.is_image()) {
      target = obs[s].reshape({batch * steps, spec.channels, spec.image_size, spec.image_size});
      mean = dec_means[s];
    } else {
      target = obs[s].reshape({batch * steps, spec.vector_dim});
      mean = dec_means[s];
    }
    const auto var = decoder_variance(s);
    auto ll = gaussian_log_prob(target, mean, var.expand_as(mean));
    recon = recon + ll.view({batch, steps}).sum(1);
    sq_sum = sq_sum + (target - mean).pow(2).sum();
    numel += static_cast<double>(target.numel());
  }

  // KL terms for t >= 2 (1-indexed), i.e. steps 1..T-1.
  torch::Tensor kl_z = torch::zeros({batch}, torch::TensorOptions().dtype(config_.dtype));
  torch::Tensor kl_y = torch::zeros({batch}, torch::TensorOptions().dtype(config_.dtype));
  for (std::int64_t t = 1; t < steps; ++t) {
    kl_z = kl_z + kl_diag(filt.z_filtered[static_cast<std::size_t>(t)],
                          filt.z_predicted[static_cast<std::size_t>(t)]);
    const auto prior = hierarchical_prior(actions.select(1, t), labels);
    kl_y = kl_y + kl_diag(filt.y_beliefs[static_cast<std::size_t>(t)], prior);
  }

  ElboResult out;
  out.recon = recon.mean();
  out.kl_z = kl_z.mean();
  out.kl_y = kl_y.mean();
  out.elbo = out.recon - beta * (out.kl_z + out.kl_y);
  out.recon_mse = sq_sum.squeeze() / numel;
  return out;
}

}  // namespace tactile::filter
