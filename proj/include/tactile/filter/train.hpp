#ifndef TACTILE_FILTER_TRAIN_HPP
#define TACTILE_FILTER_TRAIN_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tactile/contact_sim.hpp"
#include "tactile/filter/model.hpp"

namespace tactile::filter {

struct TrainConfig {
  double learning_rate = 1e-5;
  int batch_size = 48;
  int epochs = 500;
  int max_steps = 0;  // > 0 caps the total number of optimization steps
  double beta_min = 0.01;
  double anneal_fraction = 0.2;  // fraction of steps spent annealing to 1
  std::uint64_t seed = 0;
  FusionMode fusion = FusionMode::kMultiL;
  Primitive primitive = Primitive::kPressing;
  SkinType skin = SkinType::kSoft;
  std::string dtype = "f32";
  int threads = 2;
  // Model dimensions.
  int n_z = 16, n_y = 16;
  int conv_base = 8, hidden = 64, lstm_hidden = 64, label_embed = 8;

  torch::Dtype torch_dtype() const {
    return dtype == "f64" ? torch::kDouble : torch::kFloat;
  }
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);

  // Desk-scale defaults (small dataset, 2000 steps, lr tuned for Adam at
  // this scale); the struct defaults above follow the reference protocol.
  static TrainConfig desk();
};

// In-memory tensors of one (skin, primitive) block under one fusion mode.
struct SequenceDataset {
  std::vector<torch::Tensor> streams;  // per stream [N, T, C, H, W] or [N, T, D]
  torch::Tensor actions;               // [N, T, n_a]
  torch::Tensor labels;                // [N] int64 label indices
  std::vector<int> label_objects;      // label index -> object id
  std::vector<TrialMeta> metas;        // per row
  std::vector<bool> is_test;           // per row

  std::int64_t size() const { return actions.size(0); }
  std::int64_t steps() const { return actions.size(1); }
  std::vector<std::int64_t> train_rows() const;
  std::vector<std::int64_t> test_rows() const;
  // Row-gathered copy (streams, actions, labels).
  SequenceDataset select(const std::vector<std::int64_t>& rows) const;
};

struct TrainCurves {
  std::vector<double> elbo, recon, kl_z, kl_y, beta, recon_mse;
  void write_csv(const std::filesystem::path& path) const;
};

struct TrainResult {
  LatentFilter model{nullptr};
  TrainCurves curves;
};

double beta_at_step(const TrainConfig& cfg, int step, int total_steps);
int total_train_steps(const TrainConfig& cfg, std::int64_t n_train);

// Adam on -ELBO over the training rows. The optional hook runs after each
// `hook_every` steps and once more after the final step.
TrainResult train(const SequenceDataset& data, const TrainConfig& cfg,
                  const std::function<void(int, LatentFilter&)>& hook = {},
                  int hook_every = 0);

// Versioned checkpoint: parameters + model/train config + preprocessing tag.
void save_checkpoint(const std::filesystem::path& path, LatentFilter& model,
                     const TrainConfig& cfg, const std::string& prep_version);

struct Checkpoint {
  LatentFilter model{nullptr};
  TrainConfig config;
  std::string prep_version;
};
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace tactile::filter

#endif  // TACTILE_FILTER_TRAIN_HPP
