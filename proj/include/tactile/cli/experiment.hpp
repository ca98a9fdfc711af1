#ifndef TACTILE_CLI_EXPERIMENT_HPP
#define TACTILE_CLI_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tactile/dataset.hpp"
#include "tactile/filter/train.hpp"

namespace tactile::cli {

// Exit codes, also documented in the README.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitTrain = 4;
inline constexpr int kExitEval = 5;

struct ExperimentConfig {
  std::string profile = "desk";  // desk | full | custom
  DatasetSpec dataset;
  std::filesystem::path dataset_dir = "dataset";
  FusionMode fusion = FusionMode::kMultiL;
  SkinType skin = SkinType::kSoft;
  Primitive primitive = Primitive::kPressing;
  filter::TrainConfig train = filter::TrainConfig::desk();
  int eval_last_k = 10;
  std::filesystem::path out_dir = "runs/run";
  std::uint64_t seed = 7;

  // Canonical form: defaults filled, enums normalized; hashing input.
  nlohmann::json to_json() const;
};

// Parses and normalizes a config JSON. Unknown keys and invalid values are
// errors; all of them are reported at once in the exception message.
ExperimentConfig validate_config(const nlohmann::json& raw);
ExperimentConfig load_config_file(const std::filesystem::path& path);

// FNV-1a over the canonical JSON; stamped into run artifacts.
std::uint64_t config_hash(const ExperimentConfig& cfg);
std::string config_hash_hex(const ExperimentConfig& cfg);

// gen (if absent) -> preprocess -> train -> eval -> report, resumable from
// the last completed stage (stage markers carry the config hash). Returns
// an exit code; partial results are preserved on failure.
int run_experiment(const ExperimentConfig& cfg);

// Independent runs over fusion x primitive; directories named
// <out_dir>/<fusion>-<primitive>.
int run_matrix(const ExperimentConfig& base, const std::vector<FusionMode>& fusions,
               const std::vector<Primitive>& primitives);

}  // namespace tactile::cli

#endif  // TACTILE_CLI_EXPERIMENT_HPP
