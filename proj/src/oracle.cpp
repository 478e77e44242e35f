#include "zoo/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace zoo {

double ProbabilityVector::log_prob(std::int64_t i) const {
  if (!log_probs.empty()) return log_probs[static_cast<std::size_t>(i)];
  const double p = probs[static_cast<std::size_t>(i)];
  return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
}

std::int64_t ProbabilityVector::argmax() const {
  std::int64_t best = 0;
  for (std::int64_t i = 1; i < num_classes(); ++i)
    if (probs[static_cast<std::size_t>(i)] > probs[static_cast<std::size_t>(best)]) best = i;
  return best;
}

void ProbabilityVector::validate() const {
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::runtime_error("probability outside [0,1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::runtime_error("probabilities do not sum to 1");
}

ProbabilityVector Oracle::query(const Tensor& x) {
  if (x.shape() != input_shape()) throw std::invalid_argument("oracle input shape mismatch");
  total_.fetch_add(1, std::memory_order_relaxed);
  return evaluate(x);
}

ProbabilityVector Oracle::query_overhead(const Tensor& x) {
  overhead_.fetch_add(1, std::memory_order_relaxed);
  return query(x);
}

std::vector<ProbabilityVector> Oracle::query_batch(const std::vector<Tensor>& xs) {
  for (const Tensor& x : xs)
    if (x.shape() != input_shape()) throw std::invalid_argument("oracle input shape mismatch");
  total_.fetch_add(xs.size(), std::memory_order_relaxed);
  std::vector<ProbabilityVector> out;
  out.reserve(xs.size());
  for (const Tensor& x : xs) out.push_back(evaluate(x));
  return out;
}

ProbabilityVector ModelOracle::evaluate(const Tensor& x) const {
  const Tensor logp = log_softmax(net_.forward_logits(x));
  ProbabilityVector f;
  f.log_probs = logp.data();
  f.probs.resize(f.log_probs.size());
  for (std::size_t i = 0; i < f.probs.size(); ++i) f.probs[i] = std::exp(f.log_probs[i]);
  return f;
}

}  // namespace zoo
