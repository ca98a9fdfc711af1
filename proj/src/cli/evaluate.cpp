#include "tactile/cli/evaluate.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "tactile/filter/data.hpp"
#include "tactile/svg.hpp"

namespace tactile::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void atomic_write(const fs::path& path, const std::string& content) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
  }
  fs::rename(tmp, path);
}

constexpr const char* kSeriesColors[4] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

}  // namespace

std::map<int, PropertyVector> load_catalog_properties(const fs::path& dataset_dir) {
  std::ifstream in(dataset_dir / "catalog.json");
  if (!in)
    throw std::runtime_error("load_catalog_properties: missing " +
                             (dataset_dir / "catalog.json").string());
  json j;
  in >> j;
  std::map<int, PropertyVector> out;
  for (const auto& obj : j.at("objects")) {
    PropertyVector p;
    p.spatial_freq = obj.at("spatial_freq_cpm").get<double>();
    p.amplitude = obj.at("amplitude_mm").get<double>();
    p.stiffness = static_cast<double>(static_cast<int>(
        stiffness_from_string(obj.at("stiffness_class").get<std::string>())));
    p.heterogeneity = obj.at("heterogeneity").get<int>() != 0 ? 1.0 : 0.0;
    out[obj.at("object_id").get<int>()] = p;
  }
  return out;
}

json evaluate_run(const fs::path& dataset_dir, const fs::path& run_dir, int last_k) {
  auto ckpt = filter::load_checkpoint(run_dir / "checkpoint.pt");
  const auto& tc = ckpt.config;
  at::set_num_threads(std::max(1, tc.threads));

  auto data = filter::load_sequence_dataset(dataset_dir, tc.skin, tc.primitive,
                                            tc.fusion, ckpt.model->config().dtype);
  const auto targets_by_object = load_catalog_properties(dataset_dir);

  // Deterministic latent extraction: zero injected noise (mean propagation).
  const auto N = data.size();
  const auto T = data.steps();
  const int n_z = ckpt.model->config().n_z;
  const int n_y = ckpt.model->config().n_y;
  std::vector<Eigen::MatrixXd> latents(static_cast<std::size_t>(N));
  {
    torch::NoGradGuard guard;
    const std::int64_t chunk = 8;
    for (std::int64_t start = 0; start < N; start += chunk) {
      const auto stop = std::min(N, start + chunk);
      std::vector<std::int64_t> rows;
      for (std::int64_t i = start; i < stop; ++i) rows.push_back(i);
      const auto view = data.select(rows);
      const auto noise = filter::NoiseBundle::zeros(stop - start, T, ckpt.model->config());
      auto result = ckpt.model->filter_sequence(view.streams, view.actions, noise);
      const auto z = result.z_means().to(torch::kDouble);
      const auto y = result.y_means().to(torch::kDouble);
      for (std::int64_t i = 0; i < stop - start; ++i) {
        Eigen::MatrixXd m(T, n_z + n_y);
        for (std::int64_t t = 0; t < T; ++t) {
          for (int d = 0; d < n_z; ++d) m(t, d) = z[i][t][d].item<double>();
          for (int d = 0; d < n_y; ++d) m(t, n_z + d) = y[i][t][d].item<double>();
        }
        latents[static_cast<std::size_t>(start + i)] = std::move(m);
      }
    }
  }

  auto targets_of = [&](std::int64_t row) {
    const auto it = targets_by_object.find(data.metas[static_cast<std::size_t>(row)].object_id);
    if (it == targets_by_object.end())
      throw std::runtime_error("evaluate_run: object " +
                               std::to_string(data.metas[static_cast<std::size_t>(row)].object_id) +
                               " missing from catalog");
    return it->second.as_vector();
  };

  const auto train_rows = data.train_rows();
  const auto test_rows = data.test_rows();
  if (train_rows.empty() || test_rows.empty())
    throw std::runtime_error("evaluate_run: empty split");

  Eigen::MatrixXd train_features(static_cast<Eigen::Index>(train_rows.size()), n_z + n_y);
  Eigen::MatrixXd train_targets(static_cast<Eigen::Index>(train_rows.size()), kNumProperties);
  for (std::size_t i = 0; i < train_rows.size(); ++i) {
    train_features.row(static_cast<Eigen::Index>(i)) =
        final_segment_feature(latents[static_cast<std::size_t>(train_rows[i])], last_k)
            .transpose();
    train_targets.row(static_cast<Eigen::Index>(i)) = targets_of(train_rows[i]).transpose();
  }
  const AlignmentModel model = krr_fit(train_features, train_targets);

  std::vector<Eigen::MatrixXd> test_latents;
  Eigen::MatrixXd test_targets(static_cast<Eigen::Index>(test_rows.size()), kNumProperties);
  for (std::size_t i = 0; i < test_rows.size(); ++i) {
    test_latents.push_back(latents[static_cast<std::size_t>(test_rows[i])]);
    test_targets.row(static_cast<Eigen::Index>(i)) = targets_of(test_rows[i]).transpose();
  }
  const Eigen::MatrixXd nmse_t = nmse_timeseries(model, test_latents, test_targets);

  const std::string run_tag = to_string(tc.fusion) + "," + to_string(tc.skin) + "," +
                              to_string(tc.primitive);

  // nmse_timeseries.csv: one row per (t, property).
  {
    std::ostringstream out;
    out << "fusion,skin,primitive,t,property,nmse\n";
    for (Eigen::Index t = 0; t < nmse_t.rows(); ++t)
      for (int p = 0; p < kNumProperties; ++p)
        out << run_tag << "," << t << "," << kPropertyNames[p] << ","
            << num(nmse_t(t, p)) << "\n";
    atomic_write(run_dir / "nmse_timeseries.csv", out.str());
  }

  // Per-trial final-step predictions (grouped-table input).
  Eigen::MatrixXd final_features(static_cast<Eigen::Index>(N), n_z + n_y);
  for (std::int64_t i = 0; i < N; ++i)
    final_features.row(static_cast<Eigen::Index>(i)) =
        latents[static_cast<std::size_t>(i)].row(T - 1);
  const Eigen::MatrixXd final_pred = krr_predict(model, final_features);
  {
    std::ostringstream out;
    out << "fusion,skin,primitive,trial,object_id,action_index,split,"
           "pred_spatial_freq,pred_amplitude,pred_stiffness,pred_heterogeneity,"
           "target_spatial_freq,target_amplitude,target_stiffness,target_heterogeneity\n";
    for (std::int64_t i = 0; i < N; ++i) {
      const auto& meta = data.metas[static_cast<std::size_t>(i)];
      const auto tgt = targets_of(i);
      out << run_tag << "," << i << "," << meta.object_id << "," << meta.action_index
          << "," << (data.is_test[static_cast<std::size_t>(i)] ? "test" : "train");
      for (int p = 0; p < kNumProperties; ++p)
        out << "," << num(final_pred(static_cast<Eigen::Index>(i), p));
      for (int p = 0; p < kNumProperties; ++p) out << "," << num(tgt(p));
      out << "\n";
    }
    atomic_write(run_dir / "eval_trials.csv", out.str());
  }

  // Action-grid table: held-out NMSE averaged over time and properties.
  {
    std::ostringstream out;
    out << "fusion,skin,primitive,action_index,nmse\n";
    std::set<int> action_ids;
    for (auto r : test_rows)
      action_ids.insert(data.metas[static_cast<std::size_t>(r)].action_index);
    for (int action : action_ids) {
      std::vector<Eigen::MatrixXd> lat;
      std::vector<Eigen::Index> rows;
      for (std::size_t i = 0; i < test_rows.size(); ++i)
        if (data.metas[static_cast<std::size_t>(test_rows[i])].action_index == action)
          rows.push_back(static_cast<Eigen::Index>(i));
      if (rows.size() < 2) continue;  // need variance within the slice
      Eigen::MatrixXd tg(static_cast<Eigen::Index>(rows.size()), kNumProperties);
      for (std::size_t k = 0; k < rows.size(); ++k) {
        lat.push_back(test_latents[static_cast<std::size_t>(rows[k])]);
        tg.row(static_cast<Eigen::Index>(k)) = test_targets.row(rows[k]);
      }
      const Eigen::MatrixXd curve = nmse_timeseries(model, lat, tg);
      double mean = 0;
      int terms = 0;
      for (Eigen::Index t = 0; t < curve.rows(); ++t)
        for (int p = 0; p < kNumProperties; ++p)
          if (std::isfinite(curve(t, p))) {
            mean += curve(t, p);
            ++terms;
          }
      out << run_tag << "," << action << "," << num(terms ? mean / terms : NAN) << "\n";
    }
    atomic_write(run_dir / "action_nmse.csv", out.str());
  }

  // Latent export for external projection tools.
  {
    std::ostringstream out;
    out << "fusion,skin,primitive,trial,object_id,split";
    for (int d = 0; d < n_z; ++d) out << ",z" << d;
    for (int d = 0; d < n_y; ++d) out << ",y" << d;
    out << "\n";
    for (std::int64_t i = 0; i < N; ++i) {
      out << run_tag << "," << i << "," << data.metas[static_cast<std::size_t>(i)].object_id
          << "," << (data.is_test[static_cast<std::size_t>(i)] ? "test" : "train");
      for (int d = 0; d < n_z + n_y; ++d)
        out << "," << num(final_features(static_cast<Eigen::Index>(i), d));
      out << "\n";
    }
    atomic_write(run_dir / "latents_final.csv", out.str());
  }

  // Distance matrices over final-segment features of all trials.
  {
    Eigen::MatrixXd seg_features(static_cast<Eigen::Index>(N), n_z + n_y);
    std::vector<int> labels;
    for (std::int64_t i = 0; i < N; ++i) {
      seg_features.row(static_cast<Eigen::Index>(i)) =
          final_segment_feature(latents[static_cast<std::size_t>(i)], last_k).transpose();
      labels.push_back(data.metas[static_cast<std::size_t>(i)].object_id);
    }
    const DistanceMatrices dm = distance_matrices(seg_features, labels);
    std::ostringstream out;
    out << "object_id,intra_normalized";
    for (int id : dm.label_ids) out << ",inter_" << id;
    out << "\n";
    for (std::size_t i = 0; i < dm.label_ids.size(); ++i) {
      out << dm.label_ids[i] << "," << num(dm.intra_normalized(static_cast<Eigen::Index>(i)));
      for (std::size_t j = 0; j < dm.label_ids.size(); ++j)
        out << "," << num(dm.inter_normalized(static_cast<Eigen::Index>(i),
                                              static_cast<Eigen::Index>(j)));
      out << "\n";
    }
    atomic_write(run_dir / "distance_matrix.csv", out.str());

    std::vector<std::string> ticks;
    for (int id : dm.label_ids) ticks.push_back(std::to_string(id));
    write_heatmap(run_dir / "distance_matrix.svg", "Inter-class distances (" + run_tag + ")",
                  dm.inter_normalized, ticks);
  }

  // NMSE curves figure.
  {
    std::vector<SvgSeries> series;
    for (int p = 0; p < kNumProperties; ++p) {
      SvgSeries s;
      s.label = kPropertyNames[p];
      s.color = kSeriesColors[p];
      for (Eigen::Index t = 0; t < nmse_t.rows(); ++t) {
        s.x.push_back(static_cast<double>(t));
        s.y.push_back(nmse_t(t, p));
      }
      series.push_back(std::move(s));
    }
    write_line_plot(run_dir / "nmse_curves.svg", "Held-out NMSE (" + run_tag + ")",
                    "frame", "NMSE", series);
  }

  json summary;
  summary["fusion"] = to_string(tc.fusion);
  summary["skin"] = to_string(tc.skin);
  summary["primitive"] = to_string(tc.primitive);
  summary["last_k"] = last_k;
  summary["ridge"] = model.ridge;
  summary["bandwidth"] = model.bandwidth;
  for (int p = 0; p < kNumProperties; ++p) {
    const double v = nmse_t(nmse_t.rows() - 1, p);
    summary["final_nmse"][kPropertyNames[p]] = std::isfinite(v) ? json(v) : json();
  }
  atomic_write(run_dir / "eval_summary.json", summary.dump(2) + "\n");
  return summary;
}

void write_report(const std::vector<fs::path>& run_dirs, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  std::vector<GroupedInput> inputs;
  for (const auto& dir : run_dirs) {
    std::ifstream in(dir / "eval_trials.csv");
    if (!in)
      throw std::runtime_error("write_report: missing eval_trials.csv in " + dir.string());
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> cells;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      if (cells.size() < 15) continue;
      GroupedInput gi;
      gi.primitive = primitive_from_string(cells[2]);
      gi.object_id = std::stoi(cells[4]);
      if (cells[6] != "test") continue;  // grouped table is held-out only
      for (int p = 0; p < kNumProperties; ++p) {
        gi.prediction(p) = std::stod(cells[static_cast<std::size_t>(7 + p)]);
        gi.target(p) = std::stod(cells[static_cast<std::size_t>(11 + p)]);
      }
      inputs.push_back(gi);
    }
  }
  const GroupedNmse table = grouped_nmse(inputs);

  std::ostringstream out;
  out << "group,group_size,property,primitive,nmse\n";
  const char* prim_names[3] = {"PRESSING", "PRECESSION", "SLIDING"};
  for (int g = 0; g < 3; ++g)
    for (int p = 0; p <= kNumProperties; ++p)
      for (int prim = 0; prim < 3; ++prim) {
        const char* prop = (p < kNumProperties) ? kPropertyNames[p] : "overall";
        out << to_string(static_cast<ObjectGroup>(g)) << "," << table.group_sizes[g]
            << "," << prop << "," << prim_names[prim] << ","
            << num(table.value[g][p][prim]) << "\n";
      }
  atomic_write(out_dir / "grouped_nmse.csv", out.str());
}

}  // namespace tactile::cli
