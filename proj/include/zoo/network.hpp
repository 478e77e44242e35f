#ifndef ZOO_NETWORK_HPP
#define ZOO_NETWORK_HPP

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "zoo/dataset.hpp"
#include "zoo/tensor.hpp"

namespace zoo {

struct DenseLayer {
  std::int64_t out = 0, in = 0;
  std::vector<double> weights;  // row-major out x in
  std::vector<double> bias;     // out
};

struct ConvLayer {
  // Valid convolution, stride 1. Kernel layout is kh x kw x cin x cout.
  std::int64_t kh = 0, kw = 0, cin = 0, cout = 0;
  std::vector<double> kernel;
  std::vector<double> bias;  // cout
};

struct ReluLayer {};
struct FlattenLayer {};
struct MaxPoolLayer {
  std::int64_t k = 1;  // non-overlapping spatial max, partial edge windows allowed
};

using Layer = std::variant<DenseLayer, ConvLayer, ReluLayer, FlattenLayer, MaxPoolLayer>;

/// Feed-forward classifier ending in K logits; the softmax output lives in
/// softmax()/the oracle, never inside the layer stack.
class Network {
 public:
  Network() = default;
  Network(Shape input_shape, std::int64_t num_classes, std::vector<Layer> layers);

  const Shape& input_shape() const { return input_shape_; }
  std::int64_t num_classes() const { return num_classes_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }

  Tensor forward_logits(const Tensor& x) const;

 private:
  Shape input_shape_;
  std::int64_t num_classes_ = 0;
  std::vector<Layer> layers_;
};

Tensor softmax(const Tensor& logits);
Tensor log_softmax(const Tensor& logits);

struct TrainConfig {
  std::int64_t epochs = 5;
  std::int64_t batch_size = 64;
  double learning_rate = 0.1;
  std::uint64_t seed = 1;
};

Network train(Network net, const std::vector<LabeledImage>& data, const TrainConfig& cfg);
double accuracy(const Network& net, const std::vector<LabeledImage>& data);
double mean_cross_entropy(const Network& net, const std::vector<LabeledImage>& data);

/// Cross-entropy gradient with respect to every parameter, flattened in
/// layer order (dense/conv: weights then bias). Used by the finite-difference
/// self-check and the trainer.
std::vector<double> parameter_gradient(const Network& net, const LabeledImage& sample);
std::vector<double> flatten_parameters(const Network& net);
void load_flat_parameters(Network& net, const std::vector<double>& params);

Network make_mlp(Shape input_shape, const std::vector<std::int64_t>& hidden,
                 std::int64_t num_classes, std::uint64_t seed);
Network make_convnet(Shape input_shape, std::int64_t conv_channels, std::int64_t kernel,
                     std::int64_t pool, std::int64_t dense_hidden, std::int64_t num_classes,
                     std::uint64_t seed);

// Little-endian container: "ZOONETv1", u32 header and per-layer shape table,
// then one flat f64 parameter payload.
void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);
std::vector<std::uint8_t> serialize_network(const Network& net);
Network deserialize_network(const std::vector<std::uint8_t>& bytes);

}  // namespace zoo

#endif  // ZOO_NETWORK_HPP
