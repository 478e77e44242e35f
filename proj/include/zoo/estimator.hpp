#ifndef ZOO_ESTIMATOR_HPP
#define ZOO_ESTIMATOR_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "zoo/rng.hpp"
#include "zoo/tensor.hpp"

namespace zoo {

/// Objective exposed to the zeroth-order machinery. value_batch exists so
/// oracle-backed objectives can ship all probe points in one batch; the
/// default just loops.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual double value(const Tensor& x) = 0;
  virtual std::vector<double> value_batch(const std::vector<Tensor>& xs) {
    std::vector<double> out;
    out.reserve(xs.size());
    for (const Tensor& x : xs) out.push_back(value(x));
    return out;
  }
};

struct CoordinateEstimate {
  std::int64_t index = 0;
  double grad = 0.0;
  std::optional<double> hess;
};

/// Symmetric-difference gradient g_i = (f(x + h e_i) - f(x - h e_i)) / 2h
/// for each requested coordinate; costs exactly 2 * indices.size()
/// objective evaluations, issued as one batch.
std::vector<CoordinateEstimate> estimate_gradient(Objective& f, const Tensor& x,
                                                  const std::vector<std::int64_t>& indices,
                                                  double h);

/// Coordinate Hessian h_i = (f(x + h e_i) - 2 f(x) + f(x - h e_i)) / h^2.
/// The center value f(x) is supplied by the caller and shared across the
/// batch, so this also costs 2 * indices.size() evaluations.
std::vector<CoordinateEstimate> estimate_hessian_diag(Objective& f, const Tensor& x,
                                                      double f_at_x,
                                                      const std::vector<std::int64_t>& indices,
                                                      double h);

/// Fused mode: both estimates from one probe set, still 2 * indices.size()
/// evaluations.
std::vector<CoordinateEstimate> estimate_gradient_hessian(Objective& f, const Tensor& x,
                                                          double f_at_x,
                                                          const std::vector<std::int64_t>& indices,
                                                          double h);

/// batch distinct coordinate ids out of [0, n_total): uniform without
/// replacement, or weighted without replacement (sequential draw and
/// renormalize) when probs is given. probs must be nonnegative and sum to 1
/// within 1e-9.
std::vector<std::int64_t> sample_coordinates(std::int64_t n_total, std::int64_t batch,
                                             const std::vector<double>* probs, Rng& rng);

}  // namespace zoo

#endif  // ZOO_ESTIMATOR_HPP
