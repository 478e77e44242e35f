#include "zoo/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace zoo {

void AdamState::resize(std::int64_t n) {
  m.assign(static_cast<std::size_t>(n), 0.0);
  v.assign(static_cast<std::size_t>(n), 0.0);
  t.assign(static_cast<std::size_t>(n), 0);
}

void AdamState::reset() { resize(dim()); }

double adam_coordinate_update(AdamState& state, std::int64_t i, double g, double eta) {
  const auto k = static_cast<std::size_t>(i);
  state.t[k] += 1;
  state.m[k] = state.beta1 * state.m[k] + (1.0 - state.beta1) * g;
  state.v[k] = state.beta2 * state.v[k] + (1.0 - state.beta2) * g * g;
  const double tk = static_cast<double>(state.t[k]);
  const double m_hat = state.m[k] / (1.0 - std::pow(state.beta1, tk));
  const double v_hat = state.v[k] / (1.0 - std::pow(state.beta2, tk));
  return -eta * m_hat / (std::sqrt(v_hat) + state.eps);
}

double newton_coordinate_update(double g, double h_est, double eta) {
  if (h_est <= 0.0) return -eta * g;
  return -eta * g / h_est;
}

Tensor apply_box_mode(BoxMode mode, const Tensor& base, const Tensor& v) {
  if (mode == BoxMode::projection) return project_box(base + v, 0.0, 1.0);
  Tensor out(base.shape());
  for (std::int64_t i = 0; i < base.size(); ++i)
    out[i] = 0.5 * (1.0 + std::tanh(base[i] + v[i]));
  return out;
}

Tensor box_to_tanh(const Tensor& x0) {
  Tensor w(x0.shape());
  for (std::int64_t i = 0; i < x0.size(); ++i)
    w[i] = std::atanh((2.0 * x0[i] - 1.0) * (1.0 - 1e-6));
  return w;
}

namespace {

double sq(double x) { return x * x; }

/// Attack objective of the reduced problem, f(y) = ||x - x0||^2 +
/// c * loss(F(x)). Probe points are evaluated raw in projection mode (no
/// clamping; the projection applies only to accepted updates), so there the
/// distortion term is exactly ||D(y)||^2.
class AttackObjective final : public Objective {
 public:
  AttackObjective(const Tensor& x0, const AttackGoal& goal, double c, BoxMode mode,
                  const AttackSpace& space, Oracle& oracle)
      : x0_(x0), goal_(goal), c_(c), mode_(mode), space_(space), oracle_(oracle) {
    if (mode_ == BoxMode::tanh_change) w0_ = box_to_tanh(x0);
  }

  Tensor probe_image(const Tensor& y) const {
    if (mode_ == BoxMode::projection) return x0_ + space_.decode(y);
    return apply_box_mode(BoxMode::tanh_change, w0_, space_.decode(y));
  }

  Tensor iterate_image(const Tensor& y) const {
    if (mode_ == BoxMode::projection) return project_box(x0_ + space_.decode(y), 0.0, 1.0);
    return apply_box_mode(BoxMode::tanh_change, w0_, space_.decode(y));
  }

  double value(const Tensor& y) override {
    std::vector<Tensor> one;
    one.push_back(y);
    return value_batch(one)[0];
  }

  std::vector<double> value_batch(const std::vector<Tensor>& ys) override {
    std::vector<Tensor> xs;
    xs.reserve(ys.size());
    std::vector<double> dist2(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) {
      Tensor x = probe_image(ys[i]);
      dist2[i] = sq(l2_norm(x - x0_));
      xs.push_back(std::move(x));
    }
    const std::vector<ProbabilityVector> fs = oracle_.query_batch(xs);
    std::vector<double> out(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i)
      out[i] = dist2[i] + c_ * attack_loss(fs[i], goal_);
    return out;
  }

 private:
  const Tensor& x0_;
  AttackGoal goal_;
  double c_;
  BoxMode mode_;
  const AttackSpace& space_;
  Oracle& oracle_;
  Tensor w0_;
};

struct IterateEval {
  Tensor x;
  double loss_f = 0.0;
  double l2 = 0.0;
  double total = 0.0;
  bool success = false;
};

void check_config(const SolverConfig& cfg, double c) {
  if (cfg.eta <= 0.0 || cfg.h <= 0.0 || cfg.batch < 1 || cfg.max_iterations < 0 ||
      cfg.early_stop_patience < 1 || cfg.trace_every < 1)
    throw std::invalid_argument("bad solver config");
  if (c <= 0.0) throw std::invalid_argument("c must be positive");
}

}  // namespace

AttackResult solve(const Tensor& x0, const AttackGoal& goal, double c, const SolverConfig& cfg,
                   const AttackSpaceConfig& space_cfg, Oracle& oracle, Rng& rng) {
  check_config(cfg, c);
  if (x0.shape() != oracle.input_shape())
    throw std::invalid_argument("x0 does not match the oracle input shape");

  const std::uint64_t base_total = oracle.total_queries();
  const std::uint64_t base_overhead = oracle.overhead_queries();

  AttackSpace space(space_cfg, x0.shape());
  AdamState adam(space.dim());
  AttackObjective objective(x0, goal, c, cfg.box_mode, space, oracle);

  AttackResult result;
  result.final_c = c;

  const auto evaluate_iterate = [&](IterateEval& ev) {
    ev.x = objective.iterate_image(space.y());
    const ProbabilityVector f = oracle.query_overhead(ev.x);
    ev.loss_f = attack_loss(f, goal);
    ev.l2 = l2_norm(ev.x - x0);
    ev.total = sq(ev.l2) + c * ev.loss_f;
    ev.success = is_success(f, goal);
  };

  // Full-resolution projection stages project the pixel values after each
  // update; the pullback through the identity decode is exact there.
  const auto full_res = [&]() {
    return space.dim() == shape_size(x0.shape());
  };

  IterateEval cur;
  evaluate_iterate(cur);
  result.queries.overhead_initial = 1;

  std::optional<IterateEval> best_success;
  const auto note_success = [&](const IterateEval& ev, std::int64_t iteration) {
    if (!ev.success) return;
    if (!result.first_valid_iteration) {
      result.first_valid_iteration = iteration;
      if (cfg.reset_adam_on_first_success) adam.reset();
    }
    if (!best_success || ev.l2 < best_success->l2) best_success = ev;
  };

  note_success(cur, 0);
  result.trace.push_back({0, cur.total, c * cur.loss_f, cur.l2, result.queries.total()});

  if (cur.success) {
    // Already adversarial before any update: nothing to optimize, both
    // objective terms are at their floor.
    result.success = true;
    result.adversarial_image = cur.x;
    result.l2_distortion = cur.l2;
    result.final_loss = cur.total;
    return result;
  }

  double best_total = cur.total;
  std::int64_t stall = 0;

  std::int64_t it = 0;
  for (; it < cfg.max_iterations; ++it) {
    while (space.has_next_stage() && space.next_stage_start() == it) {
      const double loss_before = cur.total;
      space.upscale_stage();
      adam.resize(space.dim());
      evaluate_iterate(cur);
      result.queries.overhead_stage += 1;
      result.stage_transitions.push_back({it, loss_before, cur.total});
      note_success(cur, it);
      if (space.importance_active()) space.update_importance(cur.x - x0);
    }

    const std::int64_t batch = std::min<std::int64_t>(cfg.batch, space.dim());
    const std::vector<double>* probs =
        space.importance_active() ? &space.importance().probs : nullptr;
    const std::vector<std::int64_t> indices = sample_coordinates(space.dim(), batch, probs, rng);

    // cur.total doubles as the shared center value f(x) for the Hessian
    // probes; with the projection pullback or tanh mode it is exact.
    std::vector<CoordinateEstimate> estimates;
    if (cfg.solver == SolverKind::newton)
      estimates = estimate_gradient_hessian(objective, space.y(), cur.total, indices, cfg.h);
    else
      estimates = estimate_gradient(objective, space.y(), indices, cfg.h);
    result.queries.estimator += 2 * static_cast<std::uint64_t>(batch);

    for (const CoordinateEstimate& est : estimates) {
      const double delta =
          cfg.solver == SolverKind::newton
              ? newton_coordinate_update(est.grad, est.hess.value(), cfg.eta)
              : adam_coordinate_update(adam, est.index, est.grad, cfg.eta);
      space.y()[est.index] += delta;
    }

    if (cfg.box_mode == BoxMode::projection && full_res()) {
      Tensor& y = space.y();
      for (std::int64_t i = 0; i < y.size(); ++i)
        y[i] = std::clamp(x0[i] + y[i], 0.0, 1.0) - x0[i];
    }

    evaluate_iterate(cur);
    result.queries.overhead_iterate += 1;
    const std::int64_t iteration = it + 1;
    note_success(cur, iteration);
    if (iteration % cfg.trace_every == 0 || iteration == cfg.max_iterations)
      result.trace.push_back({iteration, cur.total, c * cur.loss_f, cur.l2, result.queries.total()});

    if (space.importance_active() &&
        iteration % std::max<std::int64_t>(1, space.config().importance_refresh_every) == 0)
      space.update_importance(cur.x - x0);

    if (cur.total < best_total) {
      best_total = cur.total;
      stall = 0;
    } else if (++stall >= cfg.early_stop_patience) {
      ++it;
      break;
    }
  }

  result.iterations = it;
  if (best_success) {
    result.success = true;
    result.adversarial_image = best_success->x;
    result.l2_distortion = best_success->l2;
    result.final_loss = best_success->total;
  } else {
    result.success = false;
    result.adversarial_image = cur.x;
    result.l2_distortion = cur.l2;
    result.final_loss = cur.total;
  }

  result.importance_updates = space.importance_updates();
  result.importance_worst_sum_error = space.importance_worst_sum_error();
  result.importance_min_prob = space.importance_min_prob();
  if (space.importance_active()) {
    result.final_importance = space.importance();
    result.final_stage = space.config().stages[static_cast<std::size_t>(space.current_stage())];
  }

  if (oracle.total_queries() - base_total != result.queries.total() ||
      oracle.overhead_queries() - base_overhead != result.queries.overhead_total())
    throw std::logic_error("query ledger does not reconcile with the oracle counters");
  return result;
}

AttackResult binary_search_c(const Tensor& x0, const AttackGoal& goal, const SolverConfig& cfg,
                             const AttackSpaceConfig& space_cfg, Oracle& oracle, Rng& rng,
                             double c0, std::int64_t steps) {
  if (c0 <= 0.0 || steps < 1) throw std::invalid_argument("bad binary search parameters");

  double c_lo = 0.0;
  double c_hi = std::numeric_limits<double>::infinity();
  double c = c0;
  std::optional<AttackResult> best;
  AttackResult last_failure;
  QueryLedger ledger;
  std::int64_t iterations = 0;
  std::vector<double> history;

  for (std::int64_t step = 0; step < steps; ++step) {
    history.push_back(c);
    AttackResult r = solve(x0, goal, c, cfg, space_cfg, oracle, rng);
    ledger.estimator += r.queries.estimator;
    ledger.overhead_initial += r.queries.overhead_initial;
    ledger.overhead_iterate += r.queries.overhead_iterate;
    ledger.overhead_stage += r.queries.overhead_stage;
    iterations += r.iterations;

    if (r.success) {
      if (!best || r.l2_distortion < best->l2_distortion) best = std::move(r);
      c_hi = c;
      c = (c_lo + c_hi) / 2.0;
    } else {
      last_failure = std::move(r);
      c_lo = c;
      c = std::isinf(c_hi) ? c * 10.0 : (c_lo + c_hi) / 2.0;
    }
  }

  AttackResult out = best ? std::move(*best) : std::move(last_failure);
  out.queries = ledger;
  out.iterations = iterations;
  out.c_history = std::move(history);
  return out;
}

void write_trace_csv(const AttackResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "iteration,total_loss,c_times_f,l2,queries\n";
  out.precision(17);
  for (const TraceRow& row : result.trace)
    out << row.iteration << ',' << row.total_loss << ',' << row.c_times_f << ',' << row.l2 << ','
        << row.queries << '\n';
}

}  // namespace zoo
