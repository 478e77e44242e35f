#ifndef ZOO_DATASET_HPP
#define ZOO_DATASET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "zoo/tensor.hpp"

namespace zoo {

struct LabeledImage {
  Tensor image;        // H x W x C, values in [0, 1]
  std::int64_t label;  // class index in [0, K)
};

// IDX binary format (big-endian): images carry magic 0x00000803 followed by
// u32 count, rows, cols and count*rows*cols pixel bytes; labels carry magic
// 0x00000801 followed by u32 count and count label bytes.
std::vector<Tensor> parse_idx_images(const std::vector<std::uint8_t>& bytes);
std::vector<std::int64_t> parse_idx_labels(const std::vector<std::uint8_t>& bytes);

/// Inverse of parse_idx_images; pixels are quantized back with round(v*255).
std::vector<std::uint8_t> write_idx_images(const std::vector<Tensor>& images);
std::vector<std::uint8_t> write_idx_labels(const std::vector<std::int64_t>& labels);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);

/// Pair up images with labels, normalizing nothing further; rejects label
/// values >= num_classes and count mismatches.
std::vector<LabeledImage> pair_dataset(std::vector<Tensor> images,
                                       const std::vector<std::int64_t>& labels,
                                       std::int64_t num_classes);

/// Deterministic side x side x 1 dataset with k bar-pattern classes: class
/// 2b is a horizontal bar at band b, class 2b+1 the vertical counterpart,
/// plus uniform noise in [0, 0.1]. Labels cycle i % k so counts stay within
/// one of n/k.
std::vector<LabeledImage> synthetic_dataset(std::uint64_t seed, std::int64_t n,
                                            std::int64_t side, std::int64_t k);

}  // namespace zoo

#endif  // ZOO_DATASET_HPP
