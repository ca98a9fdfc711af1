#include "tactile/cli/experiment.hpp"

#include <fstream>
#include <iostream>
#include <set>

#include "tactile/cli/evaluate.hpp"
#include "tactile/filter/data.hpp"

namespace tactile::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void check_keys(const json& j, const std::set<std::string>& known,
                const std::string& prefix, std::vector<std::string>& errors) {
  if (!j.is_object()) return;
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!known.count(key))
      errors.push_back("unknown key '" + prefix + key + "'");
  }
}

json dataset_to_json(const DatasetSpec& d) {
  json j;
  j["objects"] = d.object_ids;
  auto skins = json::array();
  for (auto s : d.skins) skins.push_back(to_string(s));
  j["skins"] = skins;
  auto prims = json::array();
  for (auto p : d.primitives) prims.push_back(to_string(p));
  j["primitives"] = prims;
  j["actions"] = d.action_indices;
  j["repeats"] = d.repeats;
  j["seed"] = d.base_seed;
  j["test_fraction"] = d.test_fraction;
  return j;
}

void write_stage_marker(const fs::path& run_dir, const std::string& stage,
                        const std::string& hash) {
  json j{{"stage", stage}, {"config_hash", hash}};
  const auto path = run_dir / ("stage_" + stage + ".json");
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << j.dump() << "\n";
  }
  fs::rename(tmp, path);
}

bool stage_done(const fs::path& run_dir, const std::string& stage,
                const std::string& hash) {
  const auto path = run_dir / ("stage_" + stage + ".json");
  std::ifstream in(path);
  if (!in) return false;
  json j;
  try {
    in >> j;
  } catch (...) {
    return false;
  }
  return j.value("config_hash", "") == hash;
}

}  // namespace

json ExperimentConfig::to_json() const {
  json j;
  j["profile"] = profile;
  j["seed"] = seed;
  j["dataset"] = dataset_to_json(dataset);
  j["dataset_dir"] = dataset_dir.string();
  j["fusion_mode"] = to_string(fusion);
  j["skin_type"] = to_string(skin);
  j["primitive"] = to_string(primitive);
  j["train"] = train.to_json();
  j["eval"] = json{{"last_k", eval_last_k}};
  j["out_dir"] = out_dir.string();
  return j;
}

ExperimentConfig validate_config(const json& raw) {
  std::vector<std::string> errors;
  ExperimentConfig cfg;

  static const std::set<std::string> top_keys = {
      "profile", "seed", "dataset", "dataset_dir", "fusion_mode",
      "skin_type", "primitive", "train", "eval", "out_dir"};
  static const std::set<std::string> dataset_keys = {
      "objects", "skins", "primitives", "actions", "repeats", "seed", "test_fraction"};
  static const std::set<std::string> train_keys = {
      "learning_rate", "batch_size", "epochs", "max_steps", "beta_min",
      "anneal_fraction", "seed", "fusion", "primitive", "skin", "dtype", "threads",
      "n_z", "n_y", "conv_base", "hidden", "lstm_hidden", "label_embed"};
  static const std::set<std::string> eval_keys = {"last_k"};

  if (!raw.is_object() && !raw.is_null())
    errors.push_back("config root must be a JSON object");
  if (raw.is_object()) check_keys(raw, top_keys, "", errors);

  auto get = [&](const char* key) -> const json* {
    if (raw.is_object() && raw.contains(key)) return &raw.at(key);
    return nullptr;
  };

  if (const json* v = get("profile")) {
    const auto p = v->get<std::string>();
    if (p != "desk" && p != "full" && p != "custom")
      errors.push_back("profile '" + p + "' invalid (expected desk, full or custom)");
    else
      cfg.profile = p;
  }
  if (const json* v = get("seed")) cfg.seed = v->get<std::uint64_t>();

  // Dataset axes: profile defaults, overridable under "custom".
  std::uint64_t dataset_seed = cfg.seed;
  if (const json* d = get("dataset")) {
    check_keys(*d, dataset_keys, "dataset.", errors);
    if (d->contains("seed")) dataset_seed = d->at("seed").get<std::uint64_t>();
  }
  cfg.dataset = (cfg.profile == "full") ? DatasetSpec::full(dataset_seed)
                                        : DatasetSpec::desk(dataset_seed);
  if (const json* d = get("dataset")) {
    if (cfg.profile == "custom") {
      try {
        if (d->contains("objects")) cfg.dataset.object_ids = d->at("objects").get<std::vector<int>>();
        if (d->contains("skins")) {
          cfg.dataset.skins.clear();
          for (const auto& s : d->at("skins"))
            cfg.dataset.skins.push_back(skin_from_string(s.get<std::string>()));
        }
        if (d->contains("primitives")) {
          cfg.dataset.primitives.clear();
          for (const auto& p : d->at("primitives"))
            cfg.dataset.primitives.push_back(primitive_from_string(p.get<std::string>()));
        }
        if (d->contains("actions"))
          cfg.dataset.action_indices = d->at("actions").get<std::vector<int>>();
        if (d->contains("repeats")) cfg.dataset.repeats = d->at("repeats").get<int>();
      } catch (const std::exception& e) {
        errors.push_back(std::string("dataset: ") + e.what());
      }
    }
    if (d->contains("test_fraction")) {
      const double f = d->at("test_fraction").get<double>();
      if (f <= 0 || f >= 1)
        errors.push_back("dataset.test_fraction must lie in (0, 1), got " + std::to_string(f));
      else
        cfg.dataset.test_fraction = f;
    }
  }
  if (const json* v = get("dataset_dir")) cfg.dataset_dir = v->get<std::string>();
  if (const json* v = get("out_dir")) cfg.out_dir = v->get<std::string>();

  auto parse_enum = [&](const char* key, auto parser, auto& target) {
    if (const json* v = get(key)) {
      try {
        target = parser(v->get<std::string>());
      } catch (const std::exception& e) {
        errors.push_back(e.what());
      }
    }
  };
  parse_enum("fusion_mode", fusion_from_string, cfg.fusion);
  parse_enum("skin_type", skin_from_string, cfg.skin);
  parse_enum("primitive", primitive_from_string, cfg.primitive);

  cfg.train = (cfg.profile == "full") ? filter::TrainConfig{} : filter::TrainConfig::desk();
  if (const json* t = get("train")) {
    check_keys(*t, train_keys, "train.", errors);
    auto td = cfg.train.to_json();
    for (const auto& [key, value] : t->items())
      if (train_keys.count(key) && key != "fusion" && key != "primitive" && key != "skin")
        td[key] = value;
    try {
      cfg.train = filter::TrainConfig::from_json(td);
    } catch (const std::exception& e) {
      errors.push_back(std::string("train: ") + e.what());
    }
  }
  if (const json* e = get("eval")) {
    check_keys(*e, eval_keys, "eval.", errors);
    if (e->contains("last_k")) cfg.eval_last_k = e->at("last_k").get<int>();
  }

  if (cfg.train.learning_rate <= 0)
    errors.push_back("train.learning_rate must be positive, got " +
                     std::to_string(cfg.train.learning_rate));
  if (cfg.train.batch_size < 1) errors.push_back("train.batch_size must be >= 1");
  if (cfg.train.epochs < 1) errors.push_back("train.epochs must be >= 1");
  if (cfg.train.beta_min < 0 || cfg.train.beta_min > 1)
    errors.push_back("train.beta_min must lie in [0, 1]");
  if (cfg.eval_last_k < 1) errors.push_back("eval.last_k must be >= 1");

  // Synchronized fields.
  cfg.train.fusion = cfg.fusion;
  cfg.train.primitive = cfg.primitive;
  cfg.train.skin = cfg.skin;
  cfg.train.seed = cfg.seed;

  if (!errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw std::invalid_argument(msg);
  }
  return cfg;
}

ExperimentConfig load_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  json j = json::object();
  // An empty file selects the full default (desk) configuration.
  if (text.find_first_not_of(" \t\r\n") != std::string::npos) j = json::parse(text);
  return validate_config(j);
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  return fnv1a64(cfg.to_json().dump());
}

std::string config_hash_hex(const ExperimentConfig& cfg) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(config_hash(cfg)));
  return buf;
}

int run_experiment(const ExperimentConfig& cfg) {
  const std::string hash = config_hash_hex(cfg);
  fs::create_directories(cfg.out_dir);
  {
    const auto tmp = (cfg.out_dir / "config.json.tmp").string();
    json j = cfg.to_json();
    j["config_hash"] = hash;
    std::ofstream out(tmp, std::ios::trunc);
    out << j.dump(2) << "\n";
    out.close();
    fs::rename(tmp, cfg.out_dir / "config.json");
  }

  const bool all_done = stage_done(cfg.out_dir, "train", hash) &&
                        stage_done(cfg.out_dir, "eval", hash) &&
                        stage_done(cfg.out_dir, "report", hash);
  if (all_done) {
    std::cout << "run " << cfg.out_dir.string() << ": up to date\n";
    return kExitOk;
  }

  // gen (if absent)
  try {
    if (!fs::exists(cfg.dataset_dir / "manifest.json")) {
      std::cout << "[gen] building catalog and dataset at " << cfg.dataset_dir << "\n";
      const auto catalog = build_catalog(cfg.dataset.base_seed);
      generate_dataset(catalog, cfg.dataset, cfg.dataset_dir, cfg.train.threads);
    }
  } catch (const std::exception& e) {
    std::cerr << "[gen] failed: " << e.what() << "\n";
    return kExitData;
  }

  // preprocess
  try {
    std::cout << "[prep] preprocessing cache\n";
    preprocess_dataset(cfg.dataset_dir, cfg.train.threads);
  } catch (const std::exception& e) {
    std::cerr << "[prep] failed: " << e.what() << "\n";
    return kExitData;
  }

  // train
  if (!stage_done(cfg.out_dir, "train", hash)) {
    try {
      std::cout << "[train] " << to_string(cfg.fusion) << " / " << to_string(cfg.skin)
                << " / " << to_string(cfg.primitive) << "\n";
      auto data = filter::load_sequence_dataset(cfg.dataset_dir, cfg.skin, cfg.primitive,
                                                cfg.fusion, cfg.train.torch_dtype());
      auto result = filter::train(data, cfg.train);
      filter::save_checkpoint(cfg.out_dir / "checkpoint.pt", result.model, cfg.train,
                              kPrepVersion);
      result.curves.write_csv(cfg.out_dir / "curves.csv");
      write_stage_marker(cfg.out_dir, "train", hash);
    } catch (const std::exception& e) {
      std::cerr << "[train] failed: " << e.what() << "\n";
      return kExitTrain;
    }
  }

  // eval
  if (!stage_done(cfg.out_dir, "eval", hash)) {
    try {
      std::cout << "[eval] alignment and tables\n";
      evaluate_run(cfg.dataset_dir, cfg.out_dir, cfg.eval_last_k);
      write_stage_marker(cfg.out_dir, "eval", hash);
    } catch (const std::exception& e) {
      std::cerr << "[eval] failed: " << e.what() << "\n";
      return kExitEval;
    }
  }

  // report (single-run aggregate)
  if (!stage_done(cfg.out_dir, "report", hash)) {
    try {
      write_report({cfg.out_dir}, cfg.out_dir);
      write_stage_marker(cfg.out_dir, "report", hash);
    } catch (const std::exception& e) {
      std::cerr << "[report] failed: " << e.what() << "\n";
      return kExitEval;
    }
  }
  return kExitOk;
}

int run_matrix(const ExperimentConfig& base, const std::vector<FusionMode>& fusions,
               const std::vector<Primitive>& primitives) {
  int rc = kExitOk;
  for (const auto fusion : fusions)
    for (const auto primitive : primitives) {
      ExperimentConfig cfg = base;
      cfg.fusion = fusion;
      cfg.primitive = primitive;
      cfg.train.fusion = fusion;
      cfg.train.primitive = primitive;
      cfg.out_dir = base.out_dir / (to_string(fusion) + "-" + to_string(primitive));
      const int r = run_experiment(cfg);
      if (r != kExitOk) rc = r;
    }
  return rc;
}

}  // namespace tactile::cli
