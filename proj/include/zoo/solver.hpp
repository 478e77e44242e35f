#ifndef ZOO_SOLVER_HPP
#define ZOO_SOLVER_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "zoo/attack_space.hpp"
#include "zoo/estimator.hpp"
#include "zoo/loss.hpp"
#include "zoo/oracle.hpp"
#include "zoo/rng.hpp"
#include "zoo/tensor.hpp"

namespace zoo {

enum class BoxMode { projection, tanh_change };
enum class SolverKind { adam, newton };

/// Per-coordinate ADAM moments with per-coordinate step counts, exactly the
/// M, v, T vectors of the coordinate-wise update.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::vector<std::int64_t> t;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamState(std::int64_t n) { resize(n); }
  void resize(std::int64_t n);
  void reset();
  std::int64_t dim() const { return static_cast<std::int64_t>(m.size()); }
};

/// Mutates coordinate i only and returns the step
/// delta = -eta * Mhat_i / (sqrt(vhat_i) + eps).
double adam_coordinate_update(AdamState& state, std::int64_t i, double g, double eta);

/// Newton step -eta * g / h, falling back to the gradient step -eta * g
/// whenever the curvature estimate is non-positive.
double newton_coordinate_update(double g, double h_est, double eta);

/// projection: clamp(base + v, 0, 1). tanh: (1 + tanh(base + v)) / 2 with v
/// living in the unconstrained w-space.
Tensor apply_box_mode(BoxMode mode, const Tensor& base, const Tensor& v);

/// w0 such that (1 + tanh(w0)) / 2 == x0 up to the 1e-6 interior margin that
/// keeps atanh finite at pixel values 0 and 1.
Tensor box_to_tanh(const Tensor& x0);

struct SolverConfig {
  SolverKind solver = SolverKind::adam;
  double eta = 0.01;
  std::int64_t max_iterations = 1000;
  std::int64_t batch = 128;
  double h = 1e-4;
  BoxMode box_mode = BoxMode::projection;
  std::int64_t early_stop_patience = 100;
  bool reset_adam_on_first_success = false;
  std::int64_t trace_every = 1;
};

struct TraceRow {
  std::int64_t iteration = 0;
  double total_loss = 0.0;
  double c_times_f = 0.0;
  double l2 = 0.0;
  std::uint64_t queries = 0;
};

struct StageTransition {
  std::int64_t iteration = 0;
  double loss_before = 0.0;
  double loss_after = 0.0;
};

struct QueryLedger {
  std::uint64_t estimator = 0;
  std::uint64_t overhead_initial = 0;
  std::uint64_t overhead_iterate = 0;
  std::uint64_t overhead_stage = 0;

  std::uint64_t overhead_total() const {
    return overhead_initial + overhead_iterate + overhead_stage;
  }
  std::uint64_t total() const { return estimator + overhead_total(); }
};

struct AttackResult {
  bool success = false;
  Tensor adversarial_image;
  double l2_distortion = 0.0;
  std::optional<std::int64_t> first_valid_iteration;
  std::int64_t iterations = 0;
  QueryLedger queries;
  double final_c = 0.0;
  double final_loss = 0.0;
  std::vector<TraceRow> trace;
  std::vector<StageTransition> stage_transitions;
  std::vector<double> c_history;  // c values tried by binary_search_c
  // Importance-map state and health, copied from the attack space after the
  // run (Fig. 4-style inspection and validity checks).
  ImportanceMap final_importance;
  StageDims final_stage;
  std::int64_t importance_updates = 0;
  double importance_worst_sum_error = 0.0;
  double importance_min_prob = 1.0;
};

/// Zeroth-order stochastic coordinate descent on the dimension-reduced
/// attack objective, starting from zero noise. Returns the successful
/// iterate with the smallest distortion if any iterate succeeded, otherwise
/// the lowest-objective iterate with success=false.
AttackResult solve(const Tensor& x0, const AttackGoal& goal, double c, const SolverConfig& cfg,
                   const AttackSpaceConfig& space_cfg, Oracle& oracle, Rng& rng);

/// C&W-style schedule over the regularization constant: halve into
/// [c_lo, c_hi] on success, grow by 10x (or bisect once bounded) on failure.
/// Queries and iterations aggregate over all steps; the rest of the result
/// is the minimum-distortion success, or the last failure.
AttackResult binary_search_c(const Tensor& x0, const AttackGoal& goal, const SolverConfig& cfg,
                             const AttackSpaceConfig& space_cfg, Oracle& oracle, Rng& rng,
                             double c0, std::int64_t steps);

void write_trace_csv(const AttackResult& result, const std::string& path);

}  // namespace zoo

#endif  // ZOO_SOLVER_HPP
