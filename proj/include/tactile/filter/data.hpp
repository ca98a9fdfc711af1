#ifndef TACTILE_FILTER_DATA_HPP
#define TACTILE_FILTER_DATA_HPP

#include <filesystem>

#include "tactile/dataset.hpp"
#include "tactile/filter/train.hpp"

namespace tactile::filter {

// Loads the processed trials of one (skin, primitive) block from the
// preprocessing cache and assembles the fusion-specific tensor streams.
// Rows follow manifest order; labels index the sorted distinct object ids.
SequenceDataset load_sequence_dataset(const std::filesystem::path& dataset_dir,
                                      SkinType skin, Primitive primitive,
                                      FusionMode fusion, torch::Dtype dtype);

}  // namespace tactile::filter

#endif  // TACTILE_FILTER_DATA_HPP
