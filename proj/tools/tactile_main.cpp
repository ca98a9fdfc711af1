#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "tactile/cli/evaluate.hpp"
#include "tactile/cli/experiment.hpp"
#include "tactile/container.hpp"
#include "tactile/dataset.hpp"
#include "tactile/filter/data.hpp"

namespace fs = std::filesystem;
using namespace tactile;

namespace {

int cmd_gen_objects(std::uint64_t seed, const std::string& out, int grid_res) {
  try {
    fs::create_directories(out);
    const auto catalog = build_catalog(seed, grid_res);
    write_catalog(out, catalog);
    std::cout << "wrote " << catalog.size() << " objects to " << out << "\n";
    return cli::kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "gen-objects failed: " << e.what() << "\n";
    return cli::kExitData;
  }
}

int cmd_inspect(const std::string& file) {
  try {
    const fs::path path(file);
    if (path.filename() == "manifest.json") {
      const Manifest m = load_manifest(path);
      std::cout << "dataset_id: " << m.dataset_id << "\nbase_seed: " << m.base_seed
                << "\ncatalog: " << m.catalog_file << "\ntest_fraction: " << m.test_fraction
                << "\nprep_version: " << m.prep_version << "\ntrials: " << m.trials.size()
                << "\n";
      int test = 0;
      for (const auto& t : m.trials) test += (t.split == Split::kTest) ? 1 : 0;
      std::cout << "split: " << (m.trials.size() - static_cast<std::size_t>(test))
                << " train / " << test << " test\n";
      return cli::kExitOk;
    }
    const ArrayBundle b = ArrayBundle::read(path);
    std::cout << "kind: " << b.kind() << "\nmeta: " << b.meta().dump(2) << "\narrays:\n";
    for (const auto& name : b.names()) {
      std::cout << "  " << name << " [";
      const auto& shape = b.shape(name);
      for (std::size_t i = 0; i < shape.size(); ++i)
        std::cout << (i ? "," : "") << shape[i];
      std::cout << "]\n";
    }
    return cli::kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "inspect failed: " << e.what() << "\n";
    return cli::kExitData;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulated multi-layer e-Skin palpation pipeline"};
  app.require_subcommand(1);

  // gen-objects
  std::uint64_t seed = 7;
  std::string out_dir = "objects";
  int grid_res = kDefaultGridRes;
  auto* gen_objects = app.add_subcommand("gen-objects", "Generate the 32-object catalog");
  gen_objects->add_option("--seed", seed, "Catalog base seed");
  gen_objects->add_option("--out", out_dir, "Output directory");
  gen_objects->add_option("--grid-res", grid_res, "Height map cells per side");

  // gen-dataset
  std::string ds_out = "dataset";
  std::string ds_objects = "desk", ds_skins = "SOFT,HARD",
              ds_primitives = "PRESSING,PRECESSION,SLIDING", ds_actions = "desk";
  int ds_repeats = 1;
  int threads = 0;
  std::uint64_t ds_seed = 7;
  auto* gen_dataset = app.add_subcommand("gen-dataset", "Simulate a trial dataset");
  gen_dataset->add_option("--out", ds_out, "Dataset directory");
  gen_dataset->add_option("--objects", ds_objects, "'desk', 'all' or comma-separated ids");
  gen_dataset->add_option("--skins", ds_skins, "Comma-separated SOFT,HARD");
  gen_dataset->add_option("--primitives", ds_primitives, "Comma-separated primitives");
  gen_dataset->add_option("--actions", ds_actions, "'desk', 'all' or comma-separated 1..16");
  gen_dataset->add_option("--repeats", ds_repeats, "Repeats per cell");
  gen_dataset->add_option("--seed", ds_seed, "Dataset base seed");
  gen_dataset->add_option("--threads", threads, "Worker threads (0 = auto)");

  // preprocess
  std::string prep_dataset = "dataset";
  auto* prep = app.add_subcommand("preprocess", "Build the processed-trial cache");
  prep->add_option("--dataset", prep_dataset, "Dataset directory");
  prep->add_option("--threads", threads, "Worker threads (0 = auto)");

  // train / eval / report / matrix / run
  std::string config_file;
  std::string run_dir = "runs/run";
  std::string dataset_dir = "dataset";
  std::string fusion_str = "MULTI_L", skin_str = "SOFT", primitive_str = "PRESSING";
  std::uint64_t run_seed = 7;
  auto* train_cmd = app.add_subcommand("train", "Train a latent filter (full run pipeline)");
  train_cmd->add_option("--config", config_file, "Experiment config JSON");
  train_cmd->add_option("--out", run_dir, "Run directory");
  train_cmd->add_option("--dataset", dataset_dir, "Dataset directory");
  train_cmd->add_option("--fusion", fusion_str, "Fusion mode");
  train_cmd->add_option("--skin", skin_str, "Skin type");
  train_cmd->add_option("--primitive", primitive_str, "Palpation primitive");
  train_cmd->add_option("--seed", run_seed, "Training seed");

  std::string eval_run = "runs/run";
  auto* eval_cmd = app.add_subcommand("eval", "Re-run evaluation on a checkpoint");
  eval_cmd->add_option("--run", eval_run, "Run directory with checkpoint.pt");
  eval_cmd->add_option("--dataset", dataset_dir, "Dataset directory");

  std::string report_runs;
  std::string report_out = "report";
  auto* report_cmd = app.add_subcommand("report", "Aggregate runs into grouped tables");
  report_cmd->add_option("--runs", report_runs, "Comma-separated run directories")->required();
  report_cmd->add_option("--out", report_out, "Report output directory");

  std::string inspect_file;
  auto* inspect_cmd = app.add_subcommand("inspect", "Print bundle or manifest headers");
  inspect_cmd->add_option("file", inspect_file, "File to inspect")->required();

  std::string matrix_fusions = "ACC,FSR_T,FSR_B,FSR_TB,MULTI_E,MULTI_L";
  std::string matrix_primitives = "PRESSING,PRECESSION,SLIDING";
  auto* matrix_cmd = app.add_subcommand("matrix", "Run the fusion x primitive matrix");
  matrix_cmd->add_option("--config", config_file, "Experiment config JSON");
  matrix_cmd->add_option("--out", run_dir, "Matrix root directory");
  matrix_cmd->add_option("--dataset", dataset_dir, "Dataset directory");
  matrix_cmd->add_option("--fusions", matrix_fusions, "Comma-separated fusion modes");
  matrix_cmd->add_option("--primitives", matrix_primitives, "Comma-separated primitives");
  matrix_cmd->add_option("--seed", run_seed, "Training seed");

  CLI11_PARSE(app, argc, argv);

  auto split_csv = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
      if (c == ',') {
        if (!cur.empty()) out.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
  };

  try {
    if (gen_objects->parsed()) return cmd_gen_objects(seed, out_dir, grid_res);

    if (gen_dataset->parsed()) {
      DatasetSpec spec = DatasetSpec::desk(ds_seed);
      if (ds_objects == "all") {
        spec.object_ids.clear();
        for (int i = 0; i < kCatalogSize; ++i) spec.object_ids.push_back(i);
      } else if (ds_objects != "desk") {
        spec.object_ids.clear();
        for (const auto& tok : split_csv(ds_objects)) spec.object_ids.push_back(std::stoi(tok));
      }
      spec.skins.clear();
      for (const auto& tok : split_csv(ds_skins)) spec.skins.push_back(skin_from_string(tok));
      spec.primitives.clear();
      for (const auto& tok : split_csv(ds_primitives))
        spec.primitives.push_back(primitive_from_string(tok));
      if (ds_actions == "all") {
        spec.action_indices.clear();
        for (int a = 1; a <= 16; ++a) spec.action_indices.push_back(a);
      } else if (ds_actions != "desk") {
        spec.action_indices.clear();
        for (const auto& tok : split_csv(ds_actions)) spec.action_indices.push_back(std::stoi(tok));
      }
      spec.repeats = ds_repeats;
      const auto catalog = build_catalog(spec.base_seed);
      const Manifest m = generate_dataset(catalog, spec, ds_out, threads);
      std::cout << "wrote " << m.trials.size() << " trials to " << ds_out << " ("
                << m.dataset_id << ")\n";
      return cli::kExitOk;
    }

    if (prep->parsed()) {
      const auto cache = preprocess_dataset(prep_dataset, threads);
      std::cout << "processed cache at " << cache << "\n";
      return cli::kExitOk;
    }

    if (train_cmd->parsed() || matrix_cmd->parsed()) {
      cli::ExperimentConfig cfg;
      if (!config_file.empty()) {
        cfg = cli::load_config_file(config_file);
      } else {
        nlohmann::json j;
        j["seed"] = run_seed;
        j["dataset_dir"] = dataset_dir;
        j["out_dir"] = run_dir;
        j["fusion_mode"] = fusion_str;
        j["skin_type"] = skin_str;
        j["primitive"] = primitive_str;
        cfg = cli::validate_config(j);
      }
      if (matrix_cmd->parsed()) {
        std::vector<FusionMode> fusions;
        for (const auto& tok : split_csv(matrix_fusions))
          fusions.push_back(fusion_from_string(tok));
        std::vector<Primitive> prims;
        for (const auto& tok : split_csv(matrix_primitives))
          prims.push_back(primitive_from_string(tok));
        return cli::run_matrix(cfg, fusions, prims);
      }
      return cli::run_experiment(cfg);
    }

    if (eval_cmd->parsed()) {
      const auto summary = cli::evaluate_run(dataset_dir, eval_run);
      std::cout << summary.dump(2) << "\n";
      return cli::kExitOk;
    }

    if (report_cmd->parsed()) {
      std::vector<fs::path> runs;
      for (const auto& tok : split_csv(report_runs)) runs.emplace_back(tok);
      cli::write_report(runs, report_out);
      std::cout << "report written to " << report_out << "\n";
      return cli::kExitOk;
    }

    if (inspect_cmd->parsed()) return cmd_inspect(inspect_file);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitData;
  }
  return cli::kExitConfig;
}
