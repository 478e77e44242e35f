#include "zoo/loss.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace zoo {

namespace {

void check_goal(const ProbabilityVector& f, std::int64_t cls) {
  if (f.num_classes() < 2) throw std::invalid_argument("loss needs at least two classes");
  if (cls < 0 || cls >= f.num_classes()) throw std::invalid_argument("class index out of range");
}

double max_other_log(const ProbabilityVector& f, std::int64_t skip) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::int64_t i = 0; i < f.num_classes(); ++i)
    if (i != skip) best = std::max(best, f.log_prob(i));
  return best;
}

}  // namespace

double targeted_loss(const ProbabilityVector& f, std::int64_t t, double kappa) {
  check_goal(f, t);
  return std::max(max_other_log(f, t) - f.log_prob(t), -kappa);
}

double untargeted_loss(const ProbabilityVector& f, std::int64_t t0, double kappa) {
  check_goal(f, t0);
  return std::max(f.log_prob(t0) - max_other_log(f, t0), -kappa);
}

double attack_loss(const ProbabilityVector& f, const AttackGoal& goal) {
  return goal.mode == AttackMode::targeted ? targeted_loss(f, goal.cls, goal.kappa)
                                           : untargeted_loss(f, goal.cls, goal.kappa);
}

bool is_success(const ProbabilityVector& f, const AttackGoal& goal) {
  const std::int64_t top = f.argmax();
  return goal.mode == AttackMode::targeted ? top == goal.cls : top != goal.cls;
}

double total_objective(const Tensor& x, const Tensor& x0, const AttackGoal& goal, double c,
                       Oracle& oracle) {
  if (!x.same_shape(x0)) throw std::invalid_argument("x and x0 shapes differ");
  if (c <= 0.0) throw std::invalid_argument("c must be positive");
  const double dist = l2_norm(x - x0);
  return dist * dist + c * attack_loss(oracle.query(x), goal);
}

}  // namespace zoo
