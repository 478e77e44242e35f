#include "zoo/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "zoo/rng.hpp"

namespace zoo {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

class BigEndianReader {
 public:
  explicit BigEndianReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    if (pos_ + 4 > bytes_.size()) throw std::runtime_error("unexpected EOF");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | bytes_[pos_++];
    return v;
  }

  std::uint8_t u8() {
    if (pos_ >= bytes_.size()) throw std::runtime_error("unexpected EOF");
    return bytes_[pos_++];
  }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

void push_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

}  // namespace

std::vector<Tensor> parse_idx_images(const std::vector<std::uint8_t>& bytes) {
  BigEndianReader in(bytes);
  if (in.u32() != kImageMagic) throw std::runtime_error("bad magic");
  const std::uint32_t count = in.u32();
  const std::int64_t rows = in.u32();
  const std::int64_t cols = in.u32();

  std::vector<Tensor> images;
  images.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    Tensor img({rows, cols, 1});
    for (std::int64_t p = 0; p < rows * cols; ++p) img[p] = in.u8() / 255.0;
    images.push_back(std::move(img));
  }
  return images;
}

std::vector<std::int64_t> parse_idx_labels(const std::vector<std::uint8_t>& bytes) {
  BigEndianReader in(bytes);
  if (in.u32() != kLabelMagic) throw std::runtime_error("bad magic");
  const std::uint32_t count = in.u32();
  std::vector<std::int64_t> labels;
  labels.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) labels.push_back(in.u8());
  return labels;
}

std::vector<std::uint8_t> write_idx_images(const std::vector<Tensor>& images) {
  std::vector<std::uint8_t> out;
  const std::int64_t rows = images.empty() ? 0 : images[0].shape()[0];
  const std::int64_t cols = images.empty() ? 0 : images[0].shape()[1];
  push_u32_be(out, kImageMagic);
  push_u32_be(out, static_cast<std::uint32_t>(images.size()));
  push_u32_be(out, static_cast<std::uint32_t>(rows));
  push_u32_be(out, static_cast<std::uint32_t>(cols));
  for (const Tensor& img : images) {
    if (img.shape() != Shape{rows, cols, 1})
      throw std::invalid_argument("images in one IDX file must share a shape");
    for (double v : img.data())
      out.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
  }
  return out;
}

std::vector<std::uint8_t> write_idx_labels(const std::vector<std::int64_t>& labels) {
  std::vector<std::uint8_t> out;
  push_u32_be(out, kLabelMagic);
  push_u32_be(out, static_cast<std::uint32_t>(labels.size()));
  for (std::int64_t l : labels) out.push_back(static_cast<std::uint8_t>(l));
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

std::vector<LabeledImage> pair_dataset(std::vector<Tensor> images,
                                       const std::vector<std::int64_t>& labels,
                                       std::int64_t num_classes) {
  if (images.size() != labels.size())
    throw std::invalid_argument("image/label counts differ");
  std::vector<LabeledImage> out;
  out.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes)
      throw std::invalid_argument("label out of range");
    out.push_back({std::move(images[i]), labels[i]});
  }
  return out;
}

std::vector<LabeledImage> synthetic_dataset(std::uint64_t seed, std::int64_t n,
                                            std::int64_t side, std::int64_t k) {
  if (side < 1 || k < 1 || n < 0) throw std::invalid_argument("bad synthetic dataset parameters");
  Rng rng(seed);
  const std::int64_t bands = (k + 1) / 2;
  const std::int64_t thickness = std::max<std::int64_t>(1, side / (2 * bands));

  std::vector<LabeledImage> out;
  out.reserve(n);
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t label = i % k;
    const std::int64_t band = label / 2;
    const bool vertical = (label % 2) == 1;
    const std::int64_t start = band * side / bands;
    const std::int64_t stop = std::min(side, start + thickness);

    Tensor img({side, side, 1});
    for (std::int64_t r = 0; r < side; ++r) {
      for (std::int64_t c = 0; c < side; ++c) {
        const std::int64_t pos = vertical ? c : r;
        const double base = (pos >= start && pos < stop) ? 0.9 : 0.0;
        img.at3(r, c, 0) = std::min(1.0, base + rng_uniform(rng, 0.0, 0.1));
      }
    }
    out.push_back({std::move(img), label});
  }
  return out;
}

}  // namespace zoo
