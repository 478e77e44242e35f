#include "zoo/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace zoo {

namespace {

std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

std::ofstream open_binary(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

void write_ppm(const Tensor& image, const std::string& path) {
  if (image.shape().size() != 3 || (image.shape()[2] != 1 && image.shape()[2] != 3))
    throw std::invalid_argument("PPM output needs an H x W x 1 or H x W x 3 tensor");
  const std::int64_t h = image.shape()[0], w = image.shape()[1], c = image.shape()[2];
  std::ofstream out = open_binary(path);
  out << "P6\n" << w << " " << h << "\n255\n";
  for (std::int64_t r = 0; r < h; ++r)
    for (std::int64_t col = 0; col < w; ++col)
      for (std::int64_t ch = 0; ch < 3; ++ch)
        out.put(static_cast<char>(quantize(image.at3(r, col, c == 3 ? ch : 0))));
}

void write_pgm(const Tensor& image, const std::string& path) {
  if (image.shape().size() != 3 || image.shape()[2] != 1)
    throw std::invalid_argument("PGM output needs an H x W x 1 tensor");
  const std::int64_t h = image.shape()[0], w = image.shape()[1];
  std::ofstream out = open_binary(path);
  out << "P5\n" << w << " " << h << "\n255\n";
  for (std::int64_t r = 0; r < h; ++r)
    for (std::int64_t col = 0; col < w; ++col)
      out.put(static_cast<char>(quantize(image.at3(r, col, 0))));
}

Tensor read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string magic;
  std::int64_t w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P6" || maxval != 255 || w < 1 || h < 1)
    throw std::runtime_error("unsupported PPM " + path);
  in.get();  // single whitespace after the header
  Tensor out({h, w, 3});
  for (std::int64_t i = 0; i < out.size(); ++i) {
    const int byte = in.get();
    if (byte < 0) throw std::runtime_error("truncated PPM " + path);
    out[i] = byte / 255.0;
  }
  return out;
}

namespace {

constexpr char kTensorMagic[8] = {'Z', 'O', 'O', 'T', 'E', 'N', '0', '1'};

}  // namespace

void save_tensor_raw(const Tensor& t, const std::string& path) {
  std::ofstream out = open_binary(path);
  out.write(kTensorMagic, 8);
  const auto put_u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.put(static_cast<char>(v >> (8 * i)));
  };
  put_u32(static_cast<std::uint32_t>(t.shape().size()));
  for (std::int64_t d : t.shape()) put_u32(static_cast<std::uint32_t>(d));
  out.write(reinterpret_cast<const char*>(t.data().data()),
            static_cast<std::streamsize>(t.data().size() * sizeof(double)));
}

Tensor load_tensor_raw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (in.gcount() != 8 || std::memcmp(magic, kTensorMagic, 8) != 0)
    throw std::runtime_error("bad tensor file " + path);
  const auto get_u32 = [&]() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      const int byte = in.get();
      if (byte < 0) throw std::runtime_error("truncated tensor file " + path);
      v |= static_cast<std::uint32_t>(byte) << (8 * i);
    }
    return v;
  };
  Shape shape(get_u32());
  for (std::int64_t& d : shape) d = get_u32();
  Tensor out(shape);
  in.read(reinterpret_cast<char*>(out.data().data()),
          static_cast<std::streamsize>(out.data().size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(out.data().size() * sizeof(double)))
    throw std::runtime_error("truncated tensor file " + path);
  return out;
}

}  // namespace zoo
