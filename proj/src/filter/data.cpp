#include "tactile/filter/data.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace tactile::filter {

namespace fs = std::filesystem;

namespace {

std::string prep_filename(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "prep_%06zu.tact", index);
  return buf;
}

torch::Tensor to_tensor(const ArrayF& a, torch::Dtype dtype) {
  std::vector<std::int64_t> shape;
  for (auto d : a.shape()) shape.push_back(static_cast<std::int64_t>(d));
  auto t = torch::from_blob(const_cast<float*>(a.data()), shape, torch::kFloat).clone();
  return dtype == torch::kFloat ? t : t.to(dtype);
}

}  // namespace

SequenceDataset load_sequence_dataset(const fs::path& dataset_dir, SkinType skin,
                                      Primitive primitive, FusionMode fusion,
                                      torch::Dtype dtype) {
  const Manifest manifest = load_manifest(dataset_dir / "manifest.json");
  const fs::path cache = prep_cache_dir(dataset_dir);
  if (!fs::exists(cache / "prep_manifest.json"))
    throw std::runtime_error("load_sequence_dataset: preprocessing cache missing at " +
                             cache.string() + "; run the preprocess stage first");

  std::vector<std::size_t> indices;
  for (std::size_t i = 0; i < manifest.trials.size(); ++i) {
    const auto& m = manifest.trials[i].meta;
    if (m.skin_type == skin && m.primitive == primitive) indices.push_back(i);
  }
  if (indices.empty())
    throw std::runtime_error("load_sequence_dataset: no trials for block " +
                             block_key(skin, primitive));

  std::set<int> object_set;
  for (auto i : indices) object_set.insert(manifest.trials[i].meta.object_id);

  SequenceDataset data;
  data.label_objects.assign(object_set.begin(), object_set.end());
  auto label_of = [&](int object_id) {
    const auto it = std::lower_bound(data.label_objects.begin(),
                                     data.label_objects.end(), object_id);
    return static_cast<std::int64_t>(it - data.label_objects.begin());
  };

  const auto n_streams = fusion_stream_channels(fusion).size();
  std::vector<std::vector<torch::Tensor>> stream_rows(n_streams);
  std::vector<torch::Tensor> action_rows;
  std::vector<std::int64_t> label_rows;

  for (auto i : indices) {
    const ArrayBundle b = ArrayBundle::read(cache / prep_filename(i));
    if (b.meta().at("prep_version").get<std::string>() != kPrepVersion)
      throw std::runtime_error("load_sequence_dataset: preprocessing version mismatch in " +
                               prep_filename(i));
    const auto acc = to_tensor(b.get_f32("acc_img"), dtype);   // [300,28,28]
    const auto fsr = to_tensor(b.get_f32("fsr_img"), dtype);   // [300,28,28,2]
    const auto act = to_tensor(b.get_f32("actions"), dtype);   // [300,6]
    const auto fsr_chw = fsr.permute({0, 3, 1, 2});            // [300,2,28,28]
    const auto acc_chw = acc.unsqueeze(1);                     // [300,1,28,28]

    switch (fusion) {
      case FusionMode::kAcc:
        stream_rows[0].push_back(acc_chw);
        break;
      case FusionMode::kFsrT:
        stream_rows[0].push_back(fsr_chw.slice(1, 0, 1));
        break;
      case FusionMode::kFsrB:
        stream_rows[0].push_back(fsr_chw.slice(1, 1, 2));
        break;
      case FusionMode::kFsrTb:
        stream_rows[0].push_back(fsr_chw);
        break;
      case FusionMode::kMultiE:
        stream_rows[0].push_back(torch::cat({acc_chw, fsr_chw}, 1));
        break;
      case FusionMode::kMultiL:
        stream_rows[0].push_back(acc_chw);
        stream_rows[1].push_back(fsr_chw);
        break;
    }
    action_rows.push_back(act);
    label_rows.push_back(label_of(manifest.trials[i].meta.object_id));
    data.metas.push_back(manifest.trials[i].meta);
    data.is_test.push_back(manifest.trials[i].split == Split::kTest);
  }

  for (std::size_t s = 0; s < n_streams; ++s)
    data.streams.push_back(torch::stack(stream_rows[s], 0).contiguous());
  data.actions = torch::stack(action_rows, 0).contiguous();
  data.labels = torch::tensor(label_rows, torch::kLong);
  return data;
}

}  // namespace tactile::filter
