#ifndef ZOO_TENSOR_HPP
#define ZOO_TENSOR_HPP

#include <cstdint>
#include <vector>

namespace zoo {

using Shape = std::vector<std::int64_t>;

std::int64_t shape_size(const Shape& shape);

/// Dense row-major tensor of doubles. Images use H x W x C order, so the
/// flat index of (row, col, chan) is (row * W + col) * C + chan.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);  // zero-filled
  Tensor(Shape shape, std::vector<double> data);

  static Tensor full(Shape shape, double value);

  const Shape& shape() const { return shape_; }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }
  double operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }
  double& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }

  // 3-D accessors for H x W x C tensors.
  double at3(std::int64_t row, std::int64_t col, std::int64_t chan) const;
  double& at3(std::int64_t row, std::int64_t col, std::int64_t chan);

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;

 private:
  Shape shape_;
  std::vector<double> data_;
};

Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator*(double s, const Tensor& a);

double l2_norm(const Tensor& t);

/// Corner-aligned bilinear resize of an H x W x C tensor. Sample coordinate
/// for output index d is d * (src_size - 1) / (dst_size - 1); a size-1 output
/// axis samples coordinate 0. Identity resizes are bit-exact.
Tensor bilinear_resize(const Tensor& src, std::int64_t out_h, std::int64_t out_w);

/// Per-channel non-overlapping max pooling over absolute values with kernel
/// k; edge windows may be partial. Output is ceil(H/k) x ceil(W/k) x C.
Tensor maxpool_abs(const Tensor& src, std::int64_t k);

/// Elementwise clamp into [lo, hi].
Tensor project_box(const Tensor& t, double lo, double hi);

}  // namespace zoo

#endif  // ZOO_TENSOR_HPP
