#include "zoo/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "zoo/rng.hpp"

namespace zoo {

namespace {

Shape layer_output_shape(const Layer& layer, const Shape& in) {
  if (std::holds_alternative<DenseLayer>(layer)) {
    const auto& d = std::get<DenseLayer>(layer);
    if (in.size() != 1 || in[0] != d.in)
      throw std::invalid_argument("dense layer input shape mismatch");
    return {d.out};
  }
  if (std::holds_alternative<ConvLayer>(layer)) {
    const auto& c = std::get<ConvLayer>(layer);
    if (in.size() != 3 || in[2] != c.cin || in[0] < c.kh || in[1] < c.kw)
      throw std::invalid_argument("conv layer input shape mismatch");
    return {in[0] - c.kh + 1, in[1] - c.kw + 1, c.cout};
  }
  if (std::holds_alternative<MaxPoolLayer>(layer)) {
    const auto& p = std::get<MaxPoolLayer>(layer);
    if (in.size() != 3) throw std::invalid_argument("maxpool needs an H x W x C input");
    return {(in[0] + p.k - 1) / p.k, (in[1] + p.k - 1) / p.k, in[2]};
  }
  if (std::holds_alternative<FlattenLayer>(layer)) return {shape_size(in)};
  return in;  // relu
}

void dense_forward(const DenseLayer& d, const Tensor& in, Tensor& out) {
  const double* x = in.data().data();
  for (std::int64_t o = 0; o < d.out; ++o) {
    const double* w = &d.weights[static_cast<std::size_t>(o * d.in)];
    double acc = d.bias[static_cast<std::size_t>(o)];
    for (std::int64_t i = 0; i < d.in; ++i) acc += w[i] * x[i];
    out[o] = acc;
  }
}

void conv_forward(const ConvLayer& c, const Tensor& in, Tensor& out) {
  const std::int64_t oh = out.shape()[0], ow = out.shape()[1];
  for (std::int64_t y = 0; y < oh; ++y)
    for (std::int64_t x = 0; x < ow; ++x)
      for (std::int64_t co = 0; co < c.cout; ++co) {
        double acc = c.bias[static_cast<std::size_t>(co)];
        for (std::int64_t r = 0; r < c.kh; ++r)
          for (std::int64_t s = 0; s < c.kw; ++s)
            for (std::int64_t ci = 0; ci < c.cin; ++ci)
              acc += in.at3(y + r, x + s, ci) *
                     c.kernel[static_cast<std::size_t>(((r * c.kw + s) * c.cin + ci) * c.cout + co)];
        out.at3(y, x, co) = acc;
      }
}

void maxpool_forward(const MaxPoolLayer& p, const Tensor& in, Tensor& out) {
  const std::int64_t h = in.shape()[0], w = in.shape()[1], c = in.shape()[2];
  for (std::int64_t oy = 0; oy < out.shape()[0]; ++oy) {
    const std::int64_t y_end = std::min((oy + 1) * p.k, h);
    for (std::int64_t ox = 0; ox < out.shape()[1]; ++ox) {
      const std::int64_t x_end = std::min((ox + 1) * p.k, w);
      for (std::int64_t ch = 0; ch < c; ++ch) {
        double best = in.at3(oy * p.k, ox * p.k, ch);
        for (std::int64_t y = oy * p.k; y < y_end; ++y)
          for (std::int64_t x = ox * p.k; x < x_end; ++x)
            best = std::max(best, in.at3(y, x, ch));
        out.at3(oy, ox, ch) = best;
      }
    }
  }
}

Tensor apply_layer(const Layer& layer, const Tensor& in) {
  Tensor out(layer_output_shape(layer, in.shape()));
  if (const auto* d = std::get_if<DenseLayer>(&layer)) {
    dense_forward(*d, in, out);
  } else if (const auto* c = std::get_if<ConvLayer>(&layer)) {
    conv_forward(*c, in, out);
  } else if (const auto* p = std::get_if<MaxPoolLayer>(&layer)) {
    maxpool_forward(*p, in, out);
  } else if (std::holds_alternative<FlattenLayer>(layer)) {
    out.data() = in.data();
  } else {
    for (std::int64_t i = 0; i < in.size(); ++i) out[i] = std::max(0.0, in[i]);
  }
  return out;
}

struct GradSlices {
  // Offsets into the flat parameter vector, one entry per layer.
  std::vector<std::size_t> offsets;
  std::size_t total = 0;
};

GradSlices parameter_layout(const Network& net) {
  GradSlices s;
  for (const Layer& layer : net.layers()) {
    s.offsets.push_back(s.total);
    if (const auto* d = std::get_if<DenseLayer>(&layer))
      s.total += d->weights.size() + d->bias.size();
    else if (const auto* c = std::get_if<ConvLayer>(&layer))
      s.total += c->kernel.size() + c->bias.size();
  }
  return s;
}

// Backpropagates the cross-entropy gradient of one sample into flat_grad.
void accumulate_gradient(const Network& net, const LabeledImage& sample,
                         const GradSlices& layout, std::vector<double>& flat_grad) {
  const auto& layers = net.layers();
  std::vector<Tensor> acts;
  acts.reserve(layers.size() + 1);
  acts.push_back(sample.image);
  for (const Layer& layer : layers) acts.push_back(apply_layer(layer, acts.back()));

  Tensor delta = softmax(acts.back());
  delta[sample.label] -= 1.0;

  for (std::size_t li = layers.size(); li-- > 0;) {
    const Layer& layer = layers[li];
    const Tensor& in = acts[li];
    Tensor din(in.shape());

    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      double* gw = &flat_grad[layout.offsets[li]];
      double* gb = gw + d->weights.size();
      for (std::int64_t o = 0; o < d->out; ++o) {
        const double g = delta[o];
        gb[o] += g;
        const double* w = &d->weights[static_cast<std::size_t>(o * d->in)];
        double* gwr = gw + o * d->in;
        for (std::int64_t i = 0; i < d->in; ++i) {
          gwr[i] += g * in[i];
          din[i] += w[i] * g;
        }
      }
    } else if (const auto* c = std::get_if<ConvLayer>(&layer)) {
      double* gk = &flat_grad[layout.offsets[li]];
      double* gb = gk + c->kernel.size();
      const std::int64_t oh = delta.shape()[0], ow = delta.shape()[1];
      for (std::int64_t y = 0; y < oh; ++y)
        for (std::int64_t x = 0; x < ow; ++x)
          for (std::int64_t co = 0; co < c->cout; ++co) {
            const double g = delta.at3(y, x, co);
            gb[co] += g;
            for (std::int64_t r = 0; r < c->kh; ++r)
              for (std::int64_t s = 0; s < c->kw; ++s)
                for (std::int64_t ci = 0; ci < c->cin; ++ci) {
                  const std::size_t ki =
                      static_cast<std::size_t>(((r * c->kw + s) * c->cin + ci) * c->cout + co);
                  gk[ki] += g * in.at3(y + r, x + s, ci);
                  din.at3(y + r, x + s, ci) += g * c->kernel[ki];
                }
          }
    } else if (const auto* p = std::get_if<MaxPoolLayer>(&layer)) {
      const std::int64_t h = in.shape()[0], w = in.shape()[1], ch_n = in.shape()[2];
      for (std::int64_t oy = 0; oy < delta.shape()[0]; ++oy) {
        const std::int64_t y_end = std::min((oy + 1) * p->k, h);
        for (std::int64_t ox = 0; ox < delta.shape()[1]; ++ox) {
          const std::int64_t x_end = std::min((ox + 1) * p->k, w);
          for (std::int64_t ch = 0; ch < ch_n; ++ch) {
            std::int64_t by = oy * p->k, bx = ox * p->k;
            double best = in.at3(by, bx, ch);
            for (std::int64_t y = oy * p->k; y < y_end; ++y)
              for (std::int64_t x = ox * p->k; x < x_end; ++x)
                if (in.at3(y, x, ch) > best) {
                  best = in.at3(y, x, ch);
                  by = y;
                  bx = x;
                }
            din.at3(by, bx, ch) += delta.at3(oy, ox, ch);
          }
        }
      }
    } else if (std::holds_alternative<FlattenLayer>(layer)) {
      din.data() = delta.data();
    } else {
      for (std::int64_t i = 0; i < in.size(); ++i) din[i] = in[i] > 0.0 ? delta[i] : 0.0;
    }
    delta = std::move(din);
  }
}

template <typename Fn>
void for_each_param_buffer(Network& net, Fn&& fn) {
  for (Layer& layer : net.layers()) {
    if (auto* d = std::get_if<DenseLayer>(&layer)) {
      fn(d->weights);
      fn(d->bias);
    } else if (auto* c = std::get_if<ConvLayer>(&layer)) {
      fn(c->kernel);
      fn(c->bias);
    }
  }
}

void xavier_fill(std::vector<double>& w, std::int64_t fan_in, std::int64_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : w) v = rng_uniform(rng, -limit, limit);
}

}  // namespace

Network::Network(Shape input_shape, std::int64_t num_classes, std::vector<Layer> layers)
    : input_shape_(std::move(input_shape)), num_classes_(num_classes), layers_(std::move(layers)) {
  Shape cur = input_shape_;
  for (const Layer& layer : layers_) cur = layer_output_shape(layer, cur);
  if (cur != Shape{num_classes_})
    throw std::invalid_argument("network does not end in num_classes logits");
}

Tensor Network::forward_logits(const Tensor& x) const {
  if (x.shape() != input_shape_) throw std::invalid_argument("input shape mismatch");
  Tensor cur = x;
  for (const Layer& layer : layers_) cur = apply_layer(layer, cur);
  return cur;
}

Tensor softmax(const Tensor& logits) {
  Tensor out(logits.shape());
  const double m = *std::max_element(logits.data().begin(), logits.data().end());
  double sum = 0.0;
  for (std::int64_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    sum += out[i];
  }
  for (std::int64_t i = 0; i < logits.size(); ++i) out[i] /= sum;
  return out;
}

Tensor log_softmax(const Tensor& logits) {
  Tensor out(logits.shape());
  const double m = *std::max_element(logits.data().begin(), logits.data().end());
  double sum = 0.0;
  for (std::int64_t i = 0; i < logits.size(); ++i) sum += std::exp(logits[i] - m);
  const double lse = m + std::log(sum);
  for (std::int64_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

Network train(Network net, const std::vector<LabeledImage>& data, const TrainConfig& cfg) {
  if (data.empty()) throw std::invalid_argument("empty training set");
  if (cfg.batch_size < 1 || cfg.learning_rate <= 0.0 || cfg.epochs < 0)
    throw std::invalid_argument("bad train config");
  for (const LabeledImage& s : data)
    if (s.label < 0 || s.label >= net.num_classes())
      throw std::invalid_argument("label out of range");

  const GradSlices layout = parameter_layout(net);
  std::vector<double> grad(layout.total, 0.0);
  Rng rng(cfg.seed);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = data.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng_below(rng, i)]);

    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t j = start; j < stop; ++j)
        accumulate_gradient(net, data[order[j]], layout, grad);

      const double scale = cfg.learning_rate / static_cast<double>(stop - start);
      std::size_t off = 0;
      for_each_param_buffer(net, [&](std::vector<double>& buf) {
        for (double& v : buf) v -= scale * grad[off++];
      });
    }
  }
  return net;
}

double accuracy(const Network& net, const std::vector<LabeledImage>& data) {
  if (data.empty()) throw std::invalid_argument("empty dataset");
  std::int64_t correct = 0;
  for (const LabeledImage& s : data) {
    const Tensor logits = net.forward_logits(s.image);
    std::int64_t best = 0;
    for (std::int64_t i = 1; i < logits.size(); ++i)
      if (logits[i] > logits[best]) best = i;
    if (best == s.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

double mean_cross_entropy(const Network& net, const std::vector<LabeledImage>& data) {
  if (data.empty()) throw std::invalid_argument("empty dataset");
  double sum = 0.0;
  for (const LabeledImage& s : data)
    sum -= log_softmax(net.forward_logits(s.image))[s.label];
  return sum / static_cast<double>(data.size());
}

std::vector<double> parameter_gradient(const Network& net, const LabeledImage& sample) {
  const GradSlices layout = parameter_layout(net);
  std::vector<double> grad(layout.total, 0.0);
  accumulate_gradient(net, sample, layout, grad);
  return grad;
}

std::vector<double> flatten_parameters(const Network& net) {
  std::vector<double> out;
  for_each_param_buffer(const_cast<Network&>(net), [&](std::vector<double>& buf) {
    out.insert(out.end(), buf.begin(), buf.end());
  });
  return out;
}

void load_flat_parameters(Network& net, const std::vector<double>& params) {
  std::size_t off = 0;
  for_each_param_buffer(net, [&](std::vector<double>& buf) {
    if (off + buf.size() > params.size()) throw std::invalid_argument("parameter vector too short");
    std::copy(params.begin() + off, params.begin() + off + buf.size(), buf.begin());
    off += buf.size();
  });
  if (off != params.size()) throw std::invalid_argument("parameter vector too long");
}

Network make_mlp(Shape input_shape, const std::vector<std::int64_t>& hidden,
                 std::int64_t num_classes, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Layer> layers;
  std::int64_t prev = shape_size(input_shape);
  if (input_shape.size() > 1) layers.emplace_back(FlattenLayer{});
  for (std::int64_t width : hidden) {
    DenseLayer d{width, prev, std::vector<double>(static_cast<std::size_t>(width * prev)),
                 std::vector<double>(static_cast<std::size_t>(width), 0.0)};
    xavier_fill(d.weights, prev, width, rng);
    layers.emplace_back(std::move(d));
    layers.emplace_back(ReluLayer{});
    prev = width;
  }
  DenseLayer out{num_classes, prev,
                 std::vector<double>(static_cast<std::size_t>(num_classes * prev)),
                 std::vector<double>(static_cast<std::size_t>(num_classes), 0.0)};
  xavier_fill(out.weights, prev, num_classes, rng);
  layers.emplace_back(std::move(out));
  return Network(std::move(input_shape), num_classes, std::move(layers));
}

Network make_convnet(Shape input_shape, std::int64_t conv_channels, std::int64_t kernel,
                     std::int64_t pool, std::int64_t dense_hidden, std::int64_t num_classes,
                     std::uint64_t seed) {
  Rng rng(seed);
  const std::int64_t h = input_shape[0], w = input_shape[1], cin = input_shape[2];
  ConvLayer conv{kernel, kernel, cin, conv_channels,
                 std::vector<double>(static_cast<std::size_t>(kernel * kernel * cin * conv_channels)),
                 std::vector<double>(static_cast<std::size_t>(conv_channels), 0.0)};
  xavier_fill(conv.kernel, kernel * kernel * cin, kernel * kernel * conv_channels, rng);

  const std::int64_t ch = h - kernel + 1, cw = w - kernel + 1;
  const std::int64_t ph = (ch + pool - 1) / pool, pw = (cw + pool - 1) / pool;
  const std::int64_t flat = ph * pw * conv_channels;

  std::vector<Layer> layers;
  layers.emplace_back(std::move(conv));
  layers.emplace_back(ReluLayer{});
  layers.emplace_back(MaxPoolLayer{pool});
  layers.emplace_back(FlattenLayer{});
  DenseLayer d1{dense_hidden, flat,
                std::vector<double>(static_cast<std::size_t>(dense_hidden * flat)),
                std::vector<double>(static_cast<std::size_t>(dense_hidden), 0.0)};
  xavier_fill(d1.weights, flat, dense_hidden, rng);
  layers.emplace_back(std::move(d1));
  layers.emplace_back(ReluLayer{});
  DenseLayer d2{num_classes, dense_hidden,
                std::vector<double>(static_cast<std::size_t>(num_classes * dense_hidden)),
                std::vector<double>(static_cast<std::size_t>(num_classes), 0.0)};
  xavier_fill(d2.weights, dense_hidden, num_classes, rng);
  layers.emplace_back(std::move(d2));
  return Network(std::move(input_shape), num_classes, std::move(layers));
}

namespace {

constexpr char kNetMagic[8] = {'Z', 'O', 'O', 'N', 'E', 'T', 'v', '1'};

void push_u32_le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t read_u32_le(const std::vector<std::uint8_t>& b, std::size_t& pos) {
  if (pos + 4 > b.size()) throw std::runtime_error("truncated network file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[pos++]) << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> serialize_network(const Network& net) {
  std::vector<std::uint8_t> out(kNetMagic, kNetMagic + 8);
  push_u32_le(out, static_cast<std::uint32_t>(net.input_shape().size()));
  for (std::int64_t d : net.input_shape()) push_u32_le(out, static_cast<std::uint32_t>(d));
  push_u32_le(out, static_cast<std::uint32_t>(net.num_classes()));
  push_u32_le(out, static_cast<std::uint32_t>(net.layers().size()));

  for (const Layer& layer : net.layers()) {
    std::uint32_t kind = 0, dims[4] = {0, 0, 0, 0};
    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      kind = 1;
      dims[0] = static_cast<std::uint32_t>(d->out);
      dims[1] = static_cast<std::uint32_t>(d->in);
    } else if (const auto* c = std::get_if<ConvLayer>(&layer)) {
      kind = 2;
      dims[0] = static_cast<std::uint32_t>(c->kh);
      dims[1] = static_cast<std::uint32_t>(c->kw);
      dims[2] = static_cast<std::uint32_t>(c->cin);
      dims[3] = static_cast<std::uint32_t>(c->cout);
    } else if (std::holds_alternative<ReluLayer>(layer)) {
      kind = 3;
    } else if (std::holds_alternative<FlattenLayer>(layer)) {
      kind = 4;
    } else {
      kind = 5;
      dims[0] = static_cast<std::uint32_t>(std::get<MaxPoolLayer>(layer).k);
    }
    push_u32_le(out, kind);
    for (std::uint32_t d : dims) push_u32_le(out, d);
  }

  const std::vector<double> params = flatten_parameters(net);
  for (double v : params) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  return out;
}

Network deserialize_network(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kNetMagic, 8) != 0)
    throw std::runtime_error("bad network file magic");
  std::size_t pos = 8;
  const std::uint32_t rank = read_u32_le(bytes, pos);
  Shape input_shape;
  for (std::uint32_t i = 0; i < rank; ++i) input_shape.push_back(read_u32_le(bytes, pos));
  const std::uint32_t num_classes = read_u32_le(bytes, pos);
  const std::uint32_t n_layers = read_u32_le(bytes, pos);

  std::vector<Layer> layers;
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    const std::uint32_t kind = read_u32_le(bytes, pos);
    std::uint32_t dims[4];
    for (std::uint32_t& d : dims) d = read_u32_le(bytes, pos);
    switch (kind) {
      case 1: {
        DenseLayer d{dims[0], dims[1],
                     std::vector<double>(static_cast<std::size_t>(dims[0]) * dims[1]),
                     std::vector<double>(dims[0])};
        layers.emplace_back(std::move(d));
        break;
      }
      case 2: {
        ConvLayer c{dims[0], dims[1], dims[2], dims[3],
                    std::vector<double>(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2] * dims[3]),
                    std::vector<double>(dims[3])};
        layers.emplace_back(std::move(c));
        break;
      }
      case 3:
        layers.emplace_back(ReluLayer{});
        break;
      case 4:
        layers.emplace_back(FlattenLayer{});
        break;
      case 5:
        layers.emplace_back(MaxPoolLayer{dims[0]});
        break;
      default:
        throw std::runtime_error("unknown layer kind in network file");
    }
  }

  Network net(std::move(input_shape), num_classes, std::move(layers));
  const GradSlices layout = parameter_layout(net);
  if (bytes.size() - pos != layout.total * 8)
    throw std::runtime_error("truncated network file");
  std::vector<double> params(layout.total);
  for (double& v : params) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[pos++]) << (8 * i);
    std::memcpy(&v, &bits, 8);
  }
  load_flat_parameters(net, params);
  return net;
}

void save_network(const Network& net, const std::string& path) {
  const std::vector<std::uint8_t> bytes = serialize_network(net);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Network load_network(const std::string& path) {
  return deserialize_network(read_file_bytes(path));
}

}  // namespace zoo
