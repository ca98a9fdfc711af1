#include "tactile/filter/train.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "tactile/rng.hpp"

namespace tactile::filter {

namespace {
constexpr const char* kCheckpointFormat = "tactile-ckpt-v1";
}

nlohmann::json TrainConfig::to_json() const {
  return nlohmann::json{{"learning_rate", learning_rate},
                        {"batch_size", batch_size},
                        {"epochs", epochs},
                        {"max_steps", max_steps},
                        {"beta_min", beta_min},
                        {"anneal_fraction", anneal_fraction},
                        {"seed", seed},
                        {"fusion", tactile::to_string(fusion)},
                        {"primitive", tactile::to_string(primitive)},
                        {"skin", tactile::to_string(skin)},
                        {"dtype", dtype},
                        {"threads", threads},
                        {"n_z", n_z},
                        {"n_y", n_y},
                        {"conv_base", conv_base},
                        {"hidden", hidden},
                        {"lstm_hidden", lstm_hidden},
                        {"label_embed", label_embed}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.learning_rate = j.at("learning_rate").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.epochs = j.at("epochs").get<int>();
  c.max_steps = j.at("max_steps").get<int>();
  c.beta_min = j.at("beta_min").get<double>();
  c.anneal_fraction = j.at("anneal_fraction").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.fusion = fusion_from_string(j.at("fusion").get<std::string>());
  c.primitive = primitive_from_string(j.at("primitive").get<std::string>());
  c.skin = skin_from_string(j.at("skin").get<std::string>());
  c.dtype = j.at("dtype").get<std::string>();
  c.threads = j.at("threads").get<int>();
  c.n_z = j.at("n_z").get<int>();
  c.n_y = j.at("n_y").get<int>();
  c.conv_base = j.at("conv_base").get<int>();
  c.hidden = j.at("hidden").get<int>();
  c.lstm_hidden = j.at("lstm_hidden").get<int>();
  c.label_embed = j.at("label_embed").get<int>();
  return c;
}

TrainConfig TrainConfig::desk() {
  TrainConfig c;
  c.learning_rate = 1e-3;
  c.batch_size = 8;
  c.epochs = 1000;
  c.max_steps = 2000;
  return c;
}

std::vector<std::int64_t> SequenceDataset::train_rows() const {
  std::vector<std::int64_t> rows;
  for (std::int64_t i = 0; i < size(); ++i)
    if (!is_test[static_cast<std::size_t>(i)]) rows.push_back(i);
  return rows;
}

std::vector<std::int64_t> SequenceDataset::test_rows() const {
  std::vector<std::int64_t> rows;
  for (std::int64_t i = 0; i < size(); ++i)
    if (is_test[static_cast<std::size_t>(i)]) rows.push_back(i);
  return rows;
}

SequenceDataset SequenceDataset::select(const std::vector<std::int64_t>& rows) const {
  SequenceDataset out;
  const auto idx = torch::tensor(rows, torch::kLong);
  for (const auto& s : streams) out.streams.push_back(s.index_select(0, idx));
  out.actions = actions.index_select(0, idx);
  out.labels = labels.index_select(0, idx);
  out.label_objects = label_objects;
  for (auto r : rows) {
    out.metas.push_back(metas[static_cast<std::size_t>(r)]);
    out.is_test.push_back(is_test[static_cast<std::size_t>(r)]);
  }
  return out;
}

void TrainCurves::write_csv(const std::filesystem::path& path) const {
  const auto tmp = path.string() + ".tmp";
  std::ofstream out(tmp, std::ios::trunc);
  if (!out) throw std::runtime_error("TrainCurves: cannot write " + tmp);
  out << "step,beta,elbo,recon,kl_z,kl_y,recon_mse\n";
  char buf[256];
  for (std::size_t i = 0; i < elbo.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", i,
                  beta[i], elbo[i], recon[i], kl_z[i], kl_y[i], recon_mse[i]);
    out << buf;
  }
  out.close();
  std::filesystem::rename(tmp, path);
}

double beta_at_step(const TrainConfig& cfg, int step, int total_steps) {
  const int anneal_steps =
      std::max(1, static_cast<int>(std::lround(cfg.anneal_fraction * total_steps)));
  const double frac = std::min(1.0, static_cast<double>(step) / anneal_steps);
  return cfg.beta_min + (1.0 - cfg.beta_min) * frac;
}

int total_train_steps(const TrainConfig& cfg, std::int64_t n_train) {
  const auto spe = static_cast<int>((n_train + cfg.batch_size - 1) / cfg.batch_size);
  const long total = static_cast<long>(cfg.epochs) * std::max(1, spe);
  if (cfg.max_steps > 0) return static_cast<int>(std::min<long>(total, cfg.max_steps));
  return static_cast<int>(total);
}

TrainResult train(const SequenceDataset& data, const TrainConfig& cfg,
                  const std::function<void(int, LatentFilter&)>& hook,
                  int hook_every) {
  at::set_num_threads(std::max(1, cfg.threads));
  torch::manual_seed(cfg.seed);

  const auto train_rows = data.train_rows();
  if (train_rows.empty()) throw std::invalid_argument("train: no training rows");

  ModelConfig mc;
  mc.n_z = cfg.n_z;
  mc.n_y = cfg.n_y;
  mc.n_a = static_cast<int>(data.actions.size(2));
  mc.conv_base = cfg.conv_base;
  mc.hidden = cfg.hidden;
  mc.lstm_hidden = cfg.lstm_hidden;
  mc.label_embed = cfg.label_embed;
  mc.n_labels = static_cast<int>(data.label_objects.size());
  mc.dtype = cfg.torch_dtype();
  for (const auto& s : data.streams) {
    StreamSpec spec;
    if (s.dim() == 5) {
      spec.channels = static_cast<int>(s.size(2));
      spec.image_size = static_cast<int>(s.size(3));
    } else {
      spec.vector_dim = static_cast<int>(s.size(2));
      spec.image_size = 0;
    }
    mc.streams.push_back(spec);
  }

  LatentFilter model(mc);
  model->train();

  std::vector<torch::Tensor> params;
  for (auto& p : model->parameters()) params.push_back(p);
  torch::optim::Adam optimizer(params, torch::optim::AdamOptions(cfg.learning_rate));

  const int total_steps = total_train_steps(cfg, static_cast<std::int64_t>(train_rows.size()));

  TrainResult result;
  result.curves.elbo.reserve(static_cast<std::size_t>(total_steps));

  SplitMix64 shuffle_rng(derive_stream(cfg.seed, 0xBA7C4));
  std::vector<std::int64_t> order = train_rows;
  std::size_t cursor = order.size();  // force an initial shuffle

  const SequenceDataset train_view = data.select(train_rows);
  // Map row index within train_view.
  std::vector<std::int64_t> view_rows(train_rows.size());
  for (std::size_t i = 0; i < train_rows.size(); ++i)
    view_rows[i] = static_cast<std::int64_t>(i);

  for (int step = 0; step < total_steps; ++step) {
    if (cursor + 1 > view_rows.size()) {
      for (std::size_t i = view_rows.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(shuffle_rng.next_u64() % i);
        std::swap(view_rows[i - 1], view_rows[j]);
      }
      cursor = 0;
    }
    const std::size_t take =
        std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size),
                              view_rows.size() - cursor);
    std::vector<std::int64_t> batch_rows(view_rows.begin() + static_cast<long>(cursor),
                                         view_rows.begin() + static_cast<long>(cursor + take));
    cursor += take;

    const auto idx = torch::tensor(batch_rows, torch::kLong);
    std::vector<torch::Tensor> obs;
    for (const auto& s : train_view.streams) obs.push_back(s.index_select(0, idx));
    const auto actions = train_view.actions.index_select(0, idx);
    const auto labels = train_view.labels.index_select(0, idx);

    const auto noise =
        NoiseBundle::randn(static_cast<std::int64_t>(batch_rows.size()), data.steps(), mc);
    const double beta = beta_at_step(cfg, step, total_steps);

    optimizer.zero_grad();
    const auto elbo = model->elbo(obs, actions, labels, beta, noise);
    const auto loss = -elbo.elbo;

    const double loss_val = loss.item<double>();
    if (!std::isfinite(loss_val)) {
      nlohmann::json dump;
      dump["step"] = step;
      dump["beta"] = beta;
      dump["recon"] = elbo.recon.item<double>();
      dump["kl_z"] = elbo.kl_z.item<double>();
      dump["kl_y"] = elbo.kl_y.item<double>();
      std::vector<int> rows_int(batch_rows.begin(), batch_rows.end());
      dump["batch_rows"] = rows_int;
      std::ofstream nan_dump("nan_dump.json", std::ios::trunc);
      nan_dump << dump.dump(2) << "\n";
      throw std::runtime_error("train: non-finite loss at step " + std::to_string(step) +
                               " (diagnostics in nan_dump.json): " + dump.dump());
    }

    loss.backward();
    optimizer.step();

    result.curves.elbo.push_back(elbo.elbo.item<double>());
    result.curves.recon.push_back(elbo.recon.item<double>());
    result.curves.kl_z.push_back(elbo.kl_z.item<double>());
    result.curves.kl_y.push_back(elbo.kl_y.item<double>());
    result.curves.beta.push_back(beta);
    result.curves.recon_mse.push_back(elbo.recon_mse.item<double>());

    if (hook && hook_every > 0 && (step + 1) % hook_every == 0) {
      model->eval();
      hook(step + 1, model);
      model->train();
    }
  }
  if (hook) {
    model->eval();
    hook(total_steps, model);
  }
  model->eval();
  result.model = model;
  return result;
}

void save_checkpoint(const std::filesystem::path& path, LatentFilter& model,
                     const TrainConfig& cfg, const std::string& prep_version) {
  torch::serialize::OutputArchive archive;
  archive.write("format", kCheckpointFormat);
  archive.write("model_config", model->config().to_json().dump());
  archive.write("train_config", cfg.to_json().dump());
  archive.write("prep_version", prep_version);
  archive.write("seed", std::to_string(cfg.seed));
  torch::serialize::OutputArchive params;
  for (const auto& p : model->named_parameters())
    params.write(p.key(), p.value());
  archive.write("params", params);
  const auto tmp = path.string() + ".tmp";
  archive.save_to(tmp);
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  torch::serialize::InputArchive archive;
  archive.load_from(path.string());
  c10::IValue format;
  archive.read("format", format);
  if (format.toStringRef() != kCheckpointFormat)
    throw std::runtime_error("load_checkpoint: file format '" + format.toStringRef() +
                             "' unsupported (reader supports '" + kCheckpointFormat +
                             "'): " + path.string());
  c10::IValue model_json, train_json, prep;
  archive.read("model_config", model_json);
  archive.read("train_config", train_json);
  archive.read("prep_version", prep);

  Checkpoint ckpt;
  ckpt.config = TrainConfig::from_json(nlohmann::json::parse(train_json.toStringRef()));
  ckpt.prep_version = prep.toStringRef();
  const auto mc = ModelConfig::from_json(nlohmann::json::parse(model_json.toStringRef()));
  ckpt.model = LatentFilter(mc);

  torch::serialize::InputArchive params;
  archive.read("params", params);
  torch::NoGradGuard guard;
  for (const auto& p : ckpt.model->named_parameters()) {
    torch::Tensor value;
    params.read(p.key(), value);
    p.value().copy_(value);
  }
  ckpt.model->eval();
  return ckpt;
}

}  // namespace tactile::filter
