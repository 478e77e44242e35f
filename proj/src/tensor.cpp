#include "zoo/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace zoo {

std::int64_t shape_size(const Shape& shape) {
  std::int64_t n = 1;
  for (std::int64_t d : shape) {
    if (d <= 0) throw std::invalid_argument("tensor dimensions must be positive");
    n *= d;
  }
  return n;
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
  data_.assign(static_cast<std::size_t>(shape_size(shape_)), 0.0);
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_size(shape_) != static_cast<std::int64_t>(data_.size()))
    throw std::invalid_argument("tensor data length does not match shape");
}

Tensor Tensor::full(Shape shape, double value) {
  Tensor t(std::move(shape));
  std::fill(t.data_.begin(), t.data_.end(), value);
  return t;
}

double Tensor::at3(std::int64_t row, std::int64_t col, std::int64_t chan) const {
  const std::int64_t w = shape_[1], c = shape_[2];
  return data_[static_cast<std::size_t>((row * w + col) * c + chan)];
}

double& Tensor::at3(std::int64_t row, std::int64_t col, std::int64_t chan) {
  const std::int64_t w = shape_[1], c = shape_[2];
  return data_[static_cast<std::size_t>((row * w + col) * c + chan)];
}

bool Tensor::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

static void require_same_shape(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("tensor shape mismatch");
}

Tensor operator+(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b);
  Tensor out(a.shape());
  for (std::int64_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Tensor operator-(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b);
  Tensor out(a.shape());
  for (std::int64_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Tensor operator*(double s, const Tensor& a) {
  Tensor out(a.shape());
  for (std::int64_t i = 0; i < a.size(); ++i) out[i] = s * a[i];
  return out;
}

double l2_norm(const Tensor& t) {
  if (t.empty()) throw std::invalid_argument("empty tensor");
  double sum = 0.0;
  for (double v : t.data()) sum += v * v;
  return std::sqrt(sum);
}

static void require_hwc(const Tensor& t) {
  if (t.shape().size() != 3) throw std::invalid_argument("expected an H x W x C tensor");
}

Tensor bilinear_resize(const Tensor& src, std::int64_t out_h, std::int64_t out_w) {
  require_hwc(src);
  if (out_h < 1 || out_w < 1) throw std::invalid_argument("resize output must be nonempty");
  const std::int64_t h = src.shape()[0], w = src.shape()[1], c = src.shape()[2];

  const double sy = out_h > 1 ? static_cast<double>(h - 1) / static_cast<double>(out_h - 1) : 0.0;
  const double sx = out_w > 1 ? static_cast<double>(w - 1) / static_cast<double>(out_w - 1) : 0.0;

  Tensor out({out_h, out_w, c});
  for (std::int64_t oy = 0; oy < out_h; ++oy) {
    const double fy = static_cast<double>(oy) * sy;
    std::int64_t y0 = static_cast<std::int64_t>(fy);
    if (y0 > h - 1) y0 = h - 1;
    const std::int64_t y1 = std::min(y0 + 1, h - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::int64_t ox = 0; ox < out_w; ++ox) {
      const double fx = static_cast<double>(ox) * sx;
      std::int64_t x0 = static_cast<std::int64_t>(fx);
      if (x0 > w - 1) x0 = w - 1;
      const std::int64_t x1 = std::min(x0 + 1, w - 1);
      const double wx = fx - static_cast<double>(x0);
      for (std::int64_t ch = 0; ch < c; ++ch) {
        const double top = src.at3(y0, x0, ch) * (1.0 - wx) + src.at3(y0, x1, ch) * wx;
        const double bot = src.at3(y1, x0, ch) * (1.0 - wx) + src.at3(y1, x1, ch) * wx;
        out.at3(oy, ox, ch) = top * (1.0 - wy) + bot * wy;
      }
    }
  }
  return out;
}

Tensor maxpool_abs(const Tensor& src, std::int64_t k) {
  require_hwc(src);
  if (k < 1) throw std::invalid_argument("pooling kernel must be >= 1");
  const std::int64_t h = src.shape()[0], w = src.shape()[1], c = src.shape()[2];
  const std::int64_t oh = (h + k - 1) / k, ow = (w + k - 1) / k;

  Tensor out({oh, ow, c});
  for (std::int64_t oy = 0; oy < oh; ++oy) {
    const std::int64_t y_end = std::min((oy + 1) * k, h);
    for (std::int64_t ox = 0; ox < ow; ++ox) {
      const std::int64_t x_end = std::min((ox + 1) * k, w);
      for (std::int64_t ch = 0; ch < c; ++ch) {
        double best = 0.0;
        for (std::int64_t y = oy * k; y < y_end; ++y)
          for (std::int64_t x = ox * k; x < x_end; ++x)
            best = std::max(best, std::abs(src.at3(y, x, ch)));
        out.at3(oy, ox, ch) = best;
      }
    }
  }
  return out;
}

Tensor project_box(const Tensor& t, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("box bounds out of order");
  Tensor out(t.shape());
  for (std::int64_t i = 0; i < t.size(); ++i) out[i] = std::clamp(t[i], lo, hi);
  return out;
}

}  // namespace zoo
