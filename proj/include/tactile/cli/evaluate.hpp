#ifndef TACTILE_CLI_EVALUATE_HPP
#define TACTILE_CLI_EVALUATE_HPP

#include <filesystem>
#include <map>
#include <vector>

#include <nlohmann/json.hpp>

#include "tactile/alignment.hpp"

namespace tactile::cli {

// Object id -> regression targets, read from the dataset's catalog manifest.
std::map<int, PropertyVector> load_catalog_properties(
    const std::filesystem::path& dataset_dir);

// Loads <run>/checkpoint.pt, filters every trial of its block, fits the
// alignment regressor on the training split and writes the evaluation
// tables (nmse_timeseries.csv, action_nmse.csv, eval_trials.csv,
// latents_final.csv, distance_*.csv) and figures into the run directory.
// Returns a summary (final-step held-out NMSE per property, etc.).
nlohmann::json evaluate_run(const std::filesystem::path& dataset_dir,
                            const std::filesystem::path& run_dir, int last_k = 10);

// Aggregates eval_trials.csv from several runs into the grouped
// object-category table and comparison figures.
void write_report(const std::vector<std::filesystem::path>& run_dirs,
                  const std::filesystem::path& out_dir);

}  // namespace tactile::cli

#endif  // TACTILE_CLI_EVALUATE_HPP
