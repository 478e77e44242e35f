#ifndef ZOO_ORACLE_HPP
#define ZOO_ORACLE_HPP

#include <atomic>
#include <cstdint>
#include <vector>

#include "zoo/network.hpp"
#include "zoo/tensor.hpp"

namespace zoo {

/// Confidence scores for one query. log_probs, when present, carries the
/// numerically exact log of each probability (an in-process oracle can
/// compute it as a log-softmax; remote callers would leave it empty and the
/// loss falls back to log(prob)).
struct ProbabilityVector {
  std::vector<double> probs;
  std::vector<double> log_probs;

  std::int64_t num_classes() const { return static_cast<std::int64_t>(probs.size()); }
  double log_prob(std::int64_t i) const;
  std::int64_t argmax() const;  // ties resolve to the lowest index
  void validate() const;        // entries in [0,1], sum 1 within 1e-9
};

/// Black-box boundary: image in, probability vector out, every query
/// counted. Queries issued through query_overhead are additionally tallied
/// in a separate overhead counter so estimator cost (total - overhead) stays
/// exactly reconcilable with 2*B*iterations.
class Oracle {
 public:
  virtual ~Oracle() = default;

  virtual const Shape& input_shape() const = 0;
  virtual std::int64_t num_classes() const = 0;

  ProbabilityVector query(const Tensor& x);
  ProbabilityVector query_overhead(const Tensor& x);
  std::vector<ProbabilityVector> query_batch(const std::vector<Tensor>& xs);

  std::uint64_t total_queries() const { return total_.load(); }
  std::uint64_t overhead_queries() const { return overhead_.load(); }
  std::uint64_t estimator_queries() const { return total_.load() - overhead_.load(); }

 private:
  virtual ProbabilityVector evaluate(const Tensor& x) const = 0;

  std::atomic<std::uint64_t> total_{0};
  std::atomic<std::uint64_t> overhead_{0};
};

/// Wraps a trained network; exposes probabilities only, never logits.
class ModelOracle final : public Oracle {
 public:
  explicit ModelOracle(const Network& net) : net_(net) {}

  const Shape& input_shape() const override { return net_.input_shape(); }
  std::int64_t num_classes() const override { return net_.num_classes(); }

 private:
  ProbabilityVector evaluate(const Tensor& x) const override;

  const Network& net_;
};

}  // namespace zoo

#endif  // ZOO_ORACLE_HPP
