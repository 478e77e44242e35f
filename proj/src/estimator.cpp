#include "zoo/estimator.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace zoo {

namespace {

void check_indices(const Tensor& x, const std::vector<std::int64_t>& indices, double h) {
  if (h <= 0.0) throw std::invalid_argument("h must be positive");
  std::unordered_set<std::int64_t> seen;
  for (std::int64_t i : indices) {
    if (i < 0 || i >= x.size()) throw std::invalid_argument("coordinate index out of range");
    if (!seen.insert(i).second) throw std::invalid_argument("duplicate coordinate index");
  }
}

// Probe order is [x + h e_{i0}, x - h e_{i0}, x + h e_{i1}, ...].
std::vector<double> probe_values(Objective& f, const Tensor& x,
                                 const std::vector<std::int64_t>& indices, double h) {
  std::vector<Tensor> probes;
  probes.reserve(2 * indices.size());
  for (std::int64_t i : indices) {
    Tensor plus = x;
    plus[i] += h;
    probes.push_back(std::move(plus));
    Tensor minus = x;
    minus[i] -= h;
    probes.push_back(std::move(minus));
  }
  return f.value_batch(probes);
}

}  // namespace

std::vector<CoordinateEstimate> estimate_gradient(Objective& f, const Tensor& x,
                                                  const std::vector<std::int64_t>& indices,
                                                  double h) {
  check_indices(x, indices, h);
  const std::vector<double> vals = probe_values(f, x, indices, h);
  std::vector<CoordinateEstimate> out(indices.size());
  for (std::size_t j = 0; j < indices.size(); ++j) {
    out[j].index = indices[j];
    out[j].grad = (vals[2 * j] - vals[2 * j + 1]) / (2.0 * h);
  }
  return out;
}

std::vector<CoordinateEstimate> estimate_hessian_diag(Objective& f, const Tensor& x,
                                                      double f_at_x,
                                                      const std::vector<std::int64_t>& indices,
                                                      double h) {
  check_indices(x, indices, h);
  const std::vector<double> vals = probe_values(f, x, indices, h);
  std::vector<CoordinateEstimate> out(indices.size());
  for (std::size_t j = 0; j < indices.size(); ++j) {
    out[j].index = indices[j];
    out[j].hess = (vals[2 * j] - 2.0 * f_at_x + vals[2 * j + 1]) / (h * h);
  }
  return out;
}

std::vector<CoordinateEstimate> estimate_gradient_hessian(Objective& f, const Tensor& x,
                                                          double f_at_x,
                                                          const std::vector<std::int64_t>& indices,
                                                          double h) {
  check_indices(x, indices, h);
  const std::vector<double> vals = probe_values(f, x, indices, h);
  std::vector<CoordinateEstimate> out(indices.size());
  for (std::size_t j = 0; j < indices.size(); ++j) {
    out[j].index = indices[j];
    out[j].grad = (vals[2 * j] - vals[2 * j + 1]) / (2.0 * h);
    out[j].hess = (vals[2 * j] - 2.0 * f_at_x + vals[2 * j + 1]) / (h * h);
  }
  return out;
}

std::vector<std::int64_t> sample_coordinates(std::int64_t n_total, std::int64_t batch,
                                             const std::vector<double>* probs, Rng& rng) {
  if (batch < 1 || batch > n_total) throw std::invalid_argument("batch out of range");

  if (probs == nullptr) {
    std::vector<std::int64_t> idx(static_cast<std::size_t>(n_total));
    std::iota(idx.begin(), idx.end(), 0);
    for (std::int64_t j = 0; j < batch; ++j) {
      const std::int64_t pick = j + static_cast<std::int64_t>(
                                        rng_below(rng, static_cast<std::uint64_t>(n_total - j)));
      std::swap(idx[j], idx[pick]);
    }
    idx.resize(static_cast<std::size_t>(batch));
    return idx;
  }

  if (static_cast<std::int64_t>(probs->size()) != n_total)
    throw std::invalid_argument("probability vector length mismatch");
  double total = 0.0;
  for (double p : *probs) {
    if (p < 0.0) throw std::invalid_argument("negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("probabilities do not sum to 1");

  std::vector<double> weight = *probs;
  std::vector<std::int64_t> out;
  out.reserve(static_cast<std::size_t>(batch));
  for (std::int64_t j = 0; j < batch; ++j) {
    const double u = rng_unit(rng) * total;
    double acc = 0.0;
    std::int64_t pick = -1;
    for (std::int64_t i = 0; i < n_total; ++i) {
      acc += weight[static_cast<std::size_t>(i)];
      if (u < acc && weight[static_cast<std::size_t>(i)] > 0.0) {
        pick = i;
        break;
      }
    }
    if (pick < 0) {  // fp slack: fall back to the last positive-mass index
      for (std::int64_t i = n_total - 1; i >= 0; --i)
        if (weight[static_cast<std::size_t>(i)] > 0.0) {
          pick = i;
          break;
        }
    }
    total -= weight[static_cast<std::size_t>(pick)];
    weight[static_cast<std::size_t>(pick)] = 0.0;
    out.push_back(pick);
  }
  return out;
}

}  // namespace zoo
