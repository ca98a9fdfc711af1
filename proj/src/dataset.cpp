#include "tactile/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "tactile/rng.hpp"

namespace tactile {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json meta_to_json(const TrialMeta& m) {
  return json{{"object_id", m.object_id},
              {"skin_type", to_string(m.skin_type)},
              {"primitive", to_string(m.primitive)},
              {"action_index", m.action_index},
              {"repeat", m.repeat},
              {"seed", m.seed}};
}

TrialMeta meta_from_json(const json& j) {
  TrialMeta m;
  m.object_id = j.at("object_id").get<int>();
  m.skin_type = skin_from_string(j.at("skin_type").get<std::string>());
  m.primitive = primitive_from_string(j.at("primitive").get<std::string>());
  m.action_index = j.at("action_index").get<int>();
  m.repeat = j.at("repeat").get<int>();
  m.seed = j.at("seed").get<std::uint64_t>();
  return m;
}

ArrayD pose_matrix(const ActionSequence& seq) {
  ArrayD out({seq.poses.size(), 6});
  for (std::size_t i = 0; i < seq.poses.size(); ++i) {
    const Pose& p = seq.poses[i];
    out(i, 0) = p.x_mm;
    out(i, 1) = p.y_mm;
    out(i, 2) = p.z_mm;
    out(i, 3) = p.roll_deg;
    out(i, 4) = p.pitch_deg;
    out(i, 5) = p.yaw_deg;
  }
  return out;
}

int run_threads(int requested) {
  if (requested > 0) return requested;
  const auto hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 2;
}

// Runs fn(i) for i in [0, count) on a worker pool, rethrowing the first error.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int n = std::max(1, threads);
  pool.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::string trial_filename(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "trial_%06zu.tact", index);
  return buf;
}

std::string prep_filename(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "prep_%06zu.tact", index);
  return buf;
}

}  // namespace

TrialRecord make_trial_record(const RawTrial& raw, const ActionSequence& actions,
                              std::uint64_t base_seed) {
  TrialRecord rec;
  rec.meta = raw.meta;
  rec.base_seed = base_seed;
  rec.fsr = raw.fsr;
  rec.accel = raw.accel;
  rec.tactile_rate_hz = raw.tactile_rate_hz;
  rec.action_rate_hz = actions.rate_hz;

  const std::size_t nt = raw.fsr.dim(0);
  rec.fsr_ts = ArrayD({nt});
  rec.accel_ts = ArrayD({nt});
  for (std::size_t t = 0; t < nt; ++t) {
    rec.fsr_ts(t) = static_cast<double>(t) / raw.tactile_rate_hz;
    rec.accel_ts(t) = rec.fsr_ts(t);
  }
  rec.action = pose_matrix(actions);
  rec.action_ts = ArrayD({actions.timestamps_s.size()});
  for (std::size_t i = 0; i < actions.timestamps_s.size(); ++i)
    rec.action_ts(i) = actions.timestamps_s[i];
  return rec;
}

void write_trial(const fs::path& path, const TrialRecord& record) {
  ArrayBundle b("trial");
  b.meta()["trial"] = meta_to_json(record.meta);
  b.meta()["base_seed"] = record.base_seed;
  b.meta()["streams"] = json::array(
      {json{{"name", "fsr"}, {"rate_hz", record.tactile_rate_hz}, {"dtype", "f32"},
            {"shape", record.fsr.shape()}},
       json{{"name", "accel"}, {"rate_hz", record.tactile_rate_hz}, {"dtype", "f32"},
            {"shape", record.accel.shape()}},
       json{{"name", "action"}, {"rate_hz", record.action_rate_hz}, {"dtype", "f64"},
            {"shape", record.action.shape()}}});
  b.add("fsr", record.fsr);
  b.add("fsr_ts", record.fsr_ts);
  b.add("accel", record.accel);
  b.add("accel_ts", record.accel_ts);
  b.add("action", record.action);
  b.add("action_ts", record.action_ts);
  b.write(path);
}

TrialRecord read_trial(const fs::path& path) {
  const ArrayBundle b = ArrayBundle::read(path);
  if (b.kind() != "trial")
    throw std::runtime_error("read_trial: '" + path.string() + "' is a '" + b.kind() +
                             "' bundle, not a trial");
  TrialRecord rec;
  rec.meta = meta_from_json(b.meta().at("trial"));
  rec.base_seed = b.meta().at("base_seed").get<std::uint64_t>();
  rec.fsr = b.get_f32("fsr");
  rec.fsr_ts = b.get_f64("fsr_ts");
  rec.accel = b.get_f32("accel");
  rec.accel_ts = b.get_f64("accel_ts");
  rec.action = b.get_f64("action");
  rec.action_ts = b.get_f64("action_ts");
  for (const auto& s : b.meta().at("streams")) {
    if (s.at("name") == "fsr") rec.tactile_rate_hz = s.at("rate_hz").get<double>();
    if (s.at("name") == "action") rec.action_rate_hz = s.at("rate_hz").get<double>();
  }
  // Monotone timestamps are part of the record contract.
  for (std::size_t t = 1; t < rec.fsr_ts.size(); ++t)
    if (rec.fsr_ts(t) <= rec.fsr_ts(t - 1))
      throw std::runtime_error("read_trial: non-monotone fsr timestamps in " + path.string());
  for (std::size_t t = 1; t < rec.action_ts.size(); ++t)
    if (rec.action_ts(t) <= rec.action_ts(t - 1))
      throw std::runtime_error("read_trial: non-monotone action timestamps in " + path.string());
  return rec;
}

void save_manifest(const fs::path& path, const Manifest& m) {
  json j;
  j["dataset_id"] = m.dataset_id;
  j["base_seed"] = m.base_seed;
  j["catalog_file"] = m.catalog_file;
  j["test_fraction"] = m.test_fraction;
  j["prep_version"] = m.prep_version;
  auto trials = json::array();
  for (const auto& e : m.trials) {
    json t = meta_to_json(e.meta);
    t["file"] = e.file;
    t["split"] = (e.split == Split::kTrain) ? "train" : "test";
    trials.push_back(t);
  }
  j["trials"] = trials;
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("save_manifest: cannot write " + tmp);
    out << j.dump(2) << "\n";
  }
  fs::rename(tmp, path);
}

Manifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_manifest: cannot open " + path.string());
  json j;
  in >> j;
  Manifest m;
  m.dataset_id = j.at("dataset_id").get<std::string>();
  m.base_seed = j.at("base_seed").get<std::uint64_t>();
  m.catalog_file = j.at("catalog_file").get<std::string>();
  m.test_fraction = j.at("test_fraction").get<double>();
  m.prep_version = j.at("prep_version").get<std::string>();
  for (const auto& t : j.at("trials")) {
    ManifestEntry e;
    e.meta = meta_from_json(t);
    e.file = t.at("file").get<std::string>();
    e.split = (t.at("split").get<std::string>() == "train") ? Split::kTrain : Split::kTest;
    m.trials.push_back(e);
  }
  return m;
}

DatasetSpec DatasetSpec::desk(std::uint64_t seed) {
  DatasetSpec s;
  s.object_ids = {0, 4, 8, 9, 13, 17, 22, 26};
  s.skins = {SkinType::kSoft, SkinType::kHard};
  s.primitives = {Primitive::kPressing, Primitive::kPrecession, Primitive::kSliding};
  s.action_indices = {1, 6, 11, 16};
  s.repeats = 1;
  s.base_seed = seed;
  return s;
}

DatasetSpec DatasetSpec::full(std::uint64_t seed) {
  DatasetSpec s;
  for (int i = 0; i < kCatalogSize; ++i) s.object_ids.push_back(i);
  s.skins = {SkinType::kSoft, SkinType::kHard};
  s.primitives = {Primitive::kPressing, Primitive::kPrecession, Primitive::kSliding};
  for (int a = 1; a <= 16; ++a) s.action_indices.push_back(a);
  s.repeats = 1;
  s.base_seed = seed;
  return s;
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t linear_index) {
  return base_seed + 1 + static_cast<std::uint64_t>(linear_index);
}

namespace {

struct TrialPlan {
  TrialMeta meta;
  std::size_t linear_index;
};

std::vector<TrialPlan> plan_trials(const DatasetSpec& spec) {
  std::vector<TrialPlan> plans;
  plans.reserve(spec.trial_count());
  std::size_t index = 0;
  for (int obj : spec.object_ids)
    for (SkinType skin : spec.skins)
      for (Primitive prim : spec.primitives)
        for (int action : spec.action_indices)
          for (int rep = 0; rep < spec.repeats; ++rep) {
            TrialMeta m;
            m.object_id = obj;
            m.skin_type = skin;
            m.primitive = prim;
            m.action_index = action;
            m.repeat = rep;
            m.seed = trial_seed(spec.base_seed, index);
            plans.push_back({m, index});
            ++index;
          }
  return plans;
}

}  // namespace

void write_catalog(const fs::path& dir, const std::vector<CatalogEntry>& catalog) {
  ArrayBundle b("heightmaps");
  auto list = json::array();
  for (const auto& entry : catalog) {
    const ObjectSpec& s = entry.spec;
    char name[16];
    std::snprintf(name, sizeof(name), "hm_%02d", s.object_id);
    ArrayD grid({static_cast<std::size_t>(entry.surface.grid_mm.rows()),
                 static_cast<std::size_t>(entry.surface.grid_mm.cols())});
    for (Eigen::Index r = 0; r < entry.surface.grid_mm.rows(); ++r)
      for (Eigen::Index c = 0; c < entry.surface.grid_mm.cols(); ++c)
        grid(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) =
            entry.surface.grid_mm(r, c);
    b.add(name, grid);

    json obj{{"object_id", s.object_id},
             {"spatial_freq_cpm", s.spatial_freq},
             {"amplitude_mm", s.amplitude_mm},
             {"stiffness_class", to_string(s.stiffness)},
             {"heterogeneity", s.heterogeneous ? 1 : 0},
             {"seed", s.seed},
             {"young_modulus_pa", entry.material.young_modulus_pa},
             {"loss_factor", entry.material.loss_factor}};
    if (entry.material.top_layer_modulus_pa) {
      obj["top_layer_modulus_pa"] = *entry.material.top_layer_modulus_pa;
      obj["top_layer_thickness_mm"] = *entry.material.top_layer_thickness_mm;
    }
    list.push_back(obj);
  }
  b.meta()["resolution_mm"] = catalog.empty() ? 1.0 : catalog[0].surface.resolution_mm;
  b.meta()["extent_mm"] = catalog.empty() ? kDefaultExtentMm : catalog[0].surface.extent_mm;
  b.write(dir / "objects.tact");

  json cat;
  cat["objects"] = list;
  const auto tmp = (dir / "catalog.json.tmp").string();
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << cat.dump(2) << "\n";
  }
  fs::rename(tmp, dir / "catalog.json");
}

Manifest generate_dataset(const std::vector<CatalogEntry>& catalog,
                          const DatasetSpec& spec, const fs::path& out_dir,
                          int threads) {
  if (spec.object_ids.empty() || spec.skins.empty() || spec.primitives.empty() ||
      spec.action_indices.empty() || spec.repeats < 1)
    throw std::invalid_argument("generate_dataset: empty factorial axis");
  for (int id : spec.object_ids)
    if (id < 0 || id >= static_cast<int>(catalog.size()))
      throw std::invalid_argument("generate_dataset: object id " + std::to_string(id) +
                                  " not in catalog");
  for (int a : spec.action_indices)
    if (a < 1 || a > 16)
      throw std::invalid_argument("generate_dataset: action index " + std::to_string(a) +
                                  " outside 1..16");

  fs::create_directories(out_dir);
  const auto plans = plan_trials(spec);

  // Free-space precheck before any trial hits the disk.
  constexpr std::uintmax_t kBytesPerTrial = 16ull << 20;
  const std::uintmax_t needed = plans.size() * kBytesPerTrial;
  const auto space = fs::space(out_dir);
  if (space.available < needed + (needed / 10))
    throw std::runtime_error(
        "generate_dataset: insufficient disk space: need about " +
        std::to_string(needed >> 20) + " MiB plus margin, have " +
        std::to_string(space.available >> 20) + " MiB available");

  write_catalog(out_dir, catalog);

  parallel_for(plans.size(), run_threads(threads), [&](std::size_t i) {
    const TrialPlan& plan = plans[i];
    const CatalogEntry& object = catalog[static_cast<std::size_t>(plan.meta.object_id)];
    const SkinConfig skin = skin_config(plan.meta.skin_type);
    const auto grid = action_grid(plan.meta.primitive);
    const ActionParams& params = grid[static_cast<std::size_t>(plan.meta.action_index - 1)];
    const Trajectory traj = generate_trajectory(params, kTrialDurationS, kTactileRateHz);
    const RawTrial raw = simulate_trial(object, skin, traj, plan.meta);
    const ActionSequence actions = action_sequence(traj, kActionRateHz);
    const TrialRecord rec = make_trial_record(raw, actions, spec.base_seed);
    write_trial(out_dir / trial_filename(plan.linear_index), rec);
  });

  Manifest m;
  {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t v) {
      h ^= v;
      h *= 1099511628211ull;
    };
    mix(spec.base_seed);
    mix(plans.size());
    for (int id : spec.object_ids) mix(static_cast<std::uint64_t>(id) + 101);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "ds-%016llx", static_cast<unsigned long long>(h));
    m.dataset_id = buf;
  }
  m.base_seed = spec.base_seed;
  m.catalog_file = "objects.tact";
  m.test_fraction = spec.test_fraction;
  m.prep_version = kPrepVersion;
  m.trials.resize(plans.size());
  for (const auto& plan : plans) {
    ManifestEntry e;
    e.meta = plan.meta;
    e.file = trial_filename(plan.linear_index);
    e.split = Split::kTrain;
    m.trials[plan.linear_index] = e;
  }

  // Stratified split: per object, a seeded shuffle sends test_fraction of
  // the trials to the test split.
  for (int obj : spec.object_ids) {
    std::vector<std::size_t> indices;
    for (std::size_t i = 0; i < m.trials.size(); ++i)
      if (m.trials[i].meta.object_id == obj) indices.push_back(i);
    SplitMix64 rng(derive_stream(spec.base_seed, 0xC0DEull + static_cast<std::uint64_t>(obj)));
    for (std::size_t i = indices.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
      std::swap(indices[i - 1], indices[j]);
    }
    const auto n_test = static_cast<std::size_t>(
        std::lround(spec.test_fraction * static_cast<double>(indices.size())));
    for (std::size_t k = 0; k < n_test && k < indices.size(); ++k)
      m.trials[indices[k]].split = Split::kTest;
  }

  save_manifest(out_dir / "manifest.json", m);
  return m;
}

ArrayD time_align_actions(const ArrayD& action, const ArrayD& action_ts,
                          std::size_t frames, double frame_rate_hz) {
  if (action.rank() != 2 || action.dim(0) != action_ts.dim(0))
    throw std::invalid_argument("time_align_actions: action/timestamp shape mismatch");
  const std::size_t n = action.dim(0);
  if (n == 0) throw std::invalid_argument("time_align_actions: empty action stream");
  const std::size_t dims = action.dim(1);

  // Reject gaps of more than two action periods.
  double period = 0;
  if (n > 1) {
    period = (action_ts(n - 1) - action_ts(0)) / static_cast<double>(n - 1);
    for (std::size_t i = 1; i < n; ++i)
      if (action_ts(i) - action_ts(i - 1) > 2.0 * period + 1e-12)
        throw std::invalid_argument(
            "time_align_actions: gap of " + std::to_string(action_ts(i) - action_ts(i - 1)) +
            " s at sample " + std::to_string(i) + " exceeds two action periods");
  }
  if (action_ts(0) > 0.0 + 1e-12)
    throw std::invalid_argument("time_align_actions: action stream starts after the frames");

  ArrayD out({frames, dims});
  std::size_t cursor = 0;
  for (std::size_t f = 0; f < frames; ++f) {
    const double t = static_cast<double>(f) / frame_rate_hz;
    while (cursor + 1 < n && action_ts(cursor + 1) <= t + 1e-12) ++cursor;
    for (std::size_t d = 0; d < dims; ++d) out(f, d) = action(cursor, d);
  }
  return out;
}

ArrayD action_frame_deltas(const ArrayD& aligned) {
  ArrayD out(aligned.shape(), 0.0);
  for (std::size_t f = 1; f < aligned.dim(0); ++f)
    for (std::size_t d = 0; d < aligned.dim(1); ++d)
      out(f, d) = aligned(f, d) - aligned(f - 1, d);
  return out;
}

std::string block_key(SkinType skin, Primitive primitive) {
  return to_string(skin) + "_" + to_string(primitive);
}

fs::path prep_cache_dir(const fs::path& dataset_dir) {
  if (const char* env = std::getenv("TACTILE_CACHE_DIR"); env && *env) {
    const Manifest m = load_manifest(dataset_dir / "manifest.json");
    return fs::path(env) / m.dataset_id / kPrepVersion;
  }
  return dataset_dir / kPrepVersion;
}

namespace {

json block_stats_to_json(const BlockStats& s) {
  json j;
  std::vector<double> am, as;
  for (int ny = 0; ny < 4; ++ny)
    for (int nx = 0; nx < 4; ++nx) {
      am.push_back(s.accel.mean(ny, nx));
      as.push_back(s.accel.stdev(ny, nx));
    }
  j["accel_mean"] = am;
  j["accel_std"] = as;
  j["fsr_mean"] = s.fsr.mean;
  j["fsr_std"] = s.fsr.stdev;
  j["action_mean"] = s.action_mean;
  j["action_std"] = s.action_std;
  return j;
}

}  // namespace

fs::path preprocess_dataset(const fs::path& dataset_dir, int threads) {
  const Manifest manifest = load_manifest(dataset_dir / "manifest.json");
  const fs::path cache = prep_cache_dir(dataset_dir);

  // Complete cache with a matching version tag is reused as-is.
  const fs::path prep_manifest_path = cache / "prep_manifest.json";
  if (fs::exists(prep_manifest_path)) {
    std::ifstream in(prep_manifest_path);
    json j;
    in >> j;
    if (j.value("prep_version", "") == std::string(kPrepVersion)) {
      bool complete = true;
      for (std::size_t i = 0; i < manifest.trials.size(); ++i)
        if (!fs::exists(cache / prep_filename(i))) {
          complete = false;
          break;
        }
      if (complete) return cache;
    }
  }
  fs::create_directories(cache);

  // Group trial indices by (skin, primitive) block.
  std::vector<std::pair<std::string, std::vector<std::size_t>>> blocks;
  auto block_of = [&](const TrialMeta& m) -> std::vector<std::size_t>& {
    const std::string key = block_key(m.skin_type, m.primitive);
    for (auto& [k, v] : blocks)
      if (k == key) return v;
    blocks.emplace_back(key, std::vector<std::size_t>{});
    return blocks.back().second;
  };
  for (std::size_t i = 0; i < manifest.trials.size(); ++i)
    block_of(manifest.trials[i].meta).push_back(i);

  json stats_json = json::object();
  for (auto& [key, indices] : blocks) {
    // Pass 1: training-split statistics, in manifest order.
    NormStatsAccumulator acc;
    std::array<double, 6> a_sum{}, a_sumsq{};
    double a_count = 0;
    for (std::size_t i : indices) {
      if (manifest.trials[i].split != Split::kTrain) continue;
      const TrialRecord rec = read_trial(dataset_dir / manifest.trials[i].file);
      acc.add_accel(rec.accel);
      acc.add_fsr_processed(fsr_preprocess(rec.fsr));
      const ArrayD aligned = time_align_actions(rec.action, rec.action_ts, kModelFrames, 30.0);
      const ArrayD deltas = action_frame_deltas(aligned);
      for (std::size_t f = 0; f < deltas.dim(0); ++f)
        for (std::size_t d = 0; d < 6; ++d) {
          a_sum[d] += deltas(f, d);
          a_sumsq[d] += deltas(f, d) * deltas(f, d);
        }
      a_count += static_cast<double>(deltas.dim(0));
    }
    BlockStats stats;
    stats.accel = acc.accel_stats();
    stats.fsr = acc.fsr_stats();
    for (std::size_t d = 0; d < 6; ++d) {
      const double mean = a_count > 0 ? a_sum[d] / a_count : 0.0;
      const double var =
          a_count > 0 ? std::max(0.0, a_sumsq[d] / a_count - mean * mean) : 0.0;
      stats.action_mean[d] = mean;
      stats.action_std[d] = std::max(1e-9, std::sqrt(var));
    }
    stats_json[key] = block_stats_to_json(stats);

    // Pass 2: processed arrays for every trial of the block.
    const BlockStats& st = stats;
    parallel_for(indices.size(), run_threads(threads), [&](std::size_t bi) {
      const std::size_t i = indices[bi];
      const ManifestEntry& entry = manifest.trials[i];
      const TrialRecord rec = read_trial(dataset_dir / entry.file);

      const ArrayD mag = accel_magnitude_downsample(rec.accel, &st.accel);
      const ArrayD spec = log_mel_spectrogram(mag);
      const ArrayD acc_img = reshape_spec(spec);
      ArrayD fsr_img = fsr_preprocess(rec.fsr);
      normalize_fsr(fsr_img, st.fsr);
      const ArrayD aligned = time_align_actions(rec.action, rec.action_ts, kModelFrames, 30.0);
      const ArrayD deltas = action_frame_deltas(aligned);

      ArrayF acc32({kModelFrames, kImageSize, kImageSize});
      for (std::size_t k = 0; k < acc32.size(); ++k)
        acc32(k) = static_cast<float>(acc_img(k));
      ArrayF fsr32({kModelFrames, kImageSize, kImageSize, 2});
      for (std::size_t k = 0; k < fsr32.size(); ++k)
        fsr32(k) = static_cast<float>(fsr_img(k));
      ArrayF act32({kModelFrames, 6});
      for (std::size_t f = 0; f < kModelFrames; ++f)
        for (std::size_t d = 0; d < 6; ++d)
          act32(f, d) = static_cast<float>((deltas(f, d) - st.action_mean[d]) /
                                           st.action_std[d]);

      ArrayBundle b("processed");
      b.meta()["trial"] = meta_to_json(entry.meta);
      b.meta()["prep_version"] = kPrepVersion;
      b.meta()["block"] = key;
      b.meta()["split"] = entry.split == Split::kTrain ? "train" : "test";
      b.meta()["source"] = entry.file;
      b.add("acc_img", acc32);
      b.add("fsr_img", fsr32);
      b.add("actions", act32);
      b.write(cache / prep_filename(i));
    });
  }

  json pm;
  pm["prep_version"] = kPrepVersion;
  pm["dataset_id"] = manifest.dataset_id;
  pm["block_stats"] = stats_json;
  const auto tmp = prep_manifest_path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << pm.dump(2) << "\n";
  }
  fs::rename(tmp, prep_manifest_path);
  return cache;
}

}  // namespace tactile
