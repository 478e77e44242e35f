#ifndef ZOO_IMAGE_IO_HPP
#define ZOO_IMAGE_IO_HPP

#include <string>

#include "zoo/tensor.hpp"

namespace zoo {

/// Binary PPM (P6), 8 bits per channel. Values are clamped to [0,1] and
/// quantized with round(v*255); single-channel tensors are replicated to
/// gray RGB.
void write_ppm(const Tensor& image, const std::string& path);

/// Binary PGM (P5) for single-channel tensors.
void write_pgm(const Tensor& image, const std::string& path);

Tensor read_ppm(const std::string& path);

/// Lossless tensor container ("ZOOTEN01", little-endian u32 rank and dims,
/// flat f64 payload) for adversarial images that must re-query exactly.
void save_tensor_raw(const Tensor& t, const std::string& path);
Tensor load_tensor_raw(const std::string& path);

}  // namespace zoo

#endif  // ZOO_IMAGE_IO_HPP
