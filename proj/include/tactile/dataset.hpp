#ifndef TACTILE_DATASET_HPP
#define TACTILE_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tactile/container.hpp"
#include "tactile/contact_sim.hpp"
#include "tactile/ndarray.hpp"
#include "tactile/palpation.hpp"
#include "tactile/preprocessing.hpp"
#include "tactile/wave_objects.hpp"

namespace tactile {

inline constexpr double kActionRateHz = 100.0;
inline constexpr double kTrialDurationS = 10.0;

// On-disk representation of one trial: raw streams with timestamps plus
// the 100 Hz pose stream, wrapped in the checksummed bundle container.
struct TrialRecord {
  TrialMeta meta;
  std::uint64_t base_seed = 0;
  ArrayF fsr;        // [7000,16,16,2]
  ArrayD fsr_ts;     // [7000]
  ArrayF accel;      // [7000,4,4,3]
  ArrayD accel_ts;   // [7000]
  ArrayD action;     // [1000,6] pose (x,y,z,roll,pitch,yaw)
  ArrayD action_ts;  // [1000]
  double tactile_rate_hz = kTactileRateHz;
  double action_rate_hz = kActionRateHz;
};

TrialRecord make_trial_record(const RawTrial& raw, const ActionSequence& actions,
                              std::uint64_t base_seed);
void write_trial(const std::filesystem::path& path, const TrialRecord& record);
TrialRecord read_trial(const std::filesystem::path& path);

enum class Split { kTrain = 0, kTest = 1 };

struct ManifestEntry {
  TrialMeta meta;
  std::string file;  // relative to the dataset directory
  Split split = Split::kTrain;
};

struct Manifest {
  std::string dataset_id;
  std::uint64_t base_seed = 0;
  std::string catalog_file;
  double test_fraction = 0.25;
  std::string prep_version;
  std::vector<ManifestEntry> trials;
};

void save_manifest(const std::filesystem::path& path, const Manifest& m);
Manifest load_manifest(const std::filesystem::path& path);

// Factorial dataset specification; trials enumerate objects x skins x
// primitives x actions x repeats in that (row-major) order.
struct DatasetSpec {
  std::vector<int> object_ids;
  std::vector<SkinType> skins;
  std::vector<Primitive> primitives;
  std::vector<int> action_indices;  // 1..16
  int repeats = 1;
  std::uint64_t base_seed = 1;
  double test_fraction = 0.25;

  std::size_t trial_count() const {
    return object_ids.size() * skins.size() * primitives.size() *
           action_indices.size() * static_cast<std::size_t>(repeats);
  }
  static DatasetSpec desk(std::uint64_t seed);
  static DatasetSpec full(std::uint64_t seed);
};

// Per-trial seed: base_seed + 1 + linear trial index (injective).
std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t linear_index);

// Writes the height-map container (objects.tact) and the human-readable
// catalog manifest (catalog.json) into dir.
void write_catalog(const std::filesystem::path& dir,
                   const std::vector<CatalogEntry>& catalog);

// Simulates and writes every trial plus catalog and manifest into out_dir.
// Trials run on `threads` workers (0 = hardware concurrency); outputs are
// independent of scheduling. Aborts before writing if the free-space
// precheck fails.
Manifest generate_dataset(const std::vector<CatalogEntry>& catalog,
                          const DatasetSpec& spec,
                          const std::filesystem::path& out_dir, int threads = 0);

// Zero-order-hold alignment of a timestamped pose stream onto the model
// frames (frame f at f / frame_rate seconds). Rejects streams with gaps
// larger than two action periods.
ArrayD time_align_actions(const ArrayD& action, const ArrayD& action_ts,
                          std::size_t frames, double frame_rate_hz);

// Per-frame pose deltas (first row zero): the model's raw action vector.
ArrayD action_frame_deltas(const ArrayD& aligned);

// ---- Preprocessing cache ------------------------------------------------

// Normalization statistics of one (skin, primitive) block, estimated on
// its training split only.
struct BlockStats {
  AccelNormStats accel;
  FsrNormStats fsr;
  std::array<double, 6> action_mean{};
  std::array<double, 6> action_std{1, 1, 1, 1, 1, 1};
};

std::string block_key(SkinType skin, Primitive primitive);

// Resolves the processed-trial cache directory: $TACTILE_CACHE_DIR if set,
// else <dataset_dir>/<prep version>.
std::filesystem::path prep_cache_dir(const std::filesystem::path& dataset_dir);

// Transforms every trial of the dataset into model-ready arrays
// (acc_img [300,28,28], fsr_img [300,28,28,2], actions [300,6], all
// normalized with block training-split statistics) and caches them next to
// the dataset, stamped with the preprocessing version tag. Returns the
// cache directory. No-op if the cache is complete and version-matched.
std::filesystem::path preprocess_dataset(const std::filesystem::path& dataset_dir,
                                         int threads = 0);

}  // namespace tactile

#endif  // TACTILE_DATASET_HPP
