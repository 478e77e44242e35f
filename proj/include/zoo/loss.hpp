#ifndef ZOO_LOSS_HPP
#define ZOO_LOSS_HPP

#include <cstdint>

#include "zoo/oracle.hpp"
#include "zoo/tensor.hpp"

namespace zoo {

enum class AttackMode { targeted, untargeted };

struct AttackGoal {
  AttackMode mode = AttackMode::untargeted;
  std::int64_t cls = 0;  // target class t, or original class t0 for untargeted
  double kappa = 0.0;
};

/// max{ max_{i != t} log F_i - log F_t, -kappa }. log 0 is -inf, so a zero
/// target probability with any other class positive yields +inf.
double targeted_loss(const ProbabilityVector& f, std::int64_t t, double kappa);

/// max{ log F_t0 - max_{i != t0} log F_i, -kappa }.
double untargeted_loss(const ProbabilityVector& f, std::int64_t t0, double kappa);

double attack_loss(const ProbabilityVector& f, const AttackGoal& goal);

/// Success is judged on the argmax with ties resolved to the lowest index,
/// so a tie never counts as a targeted success on a higher index.
bool is_success(const ProbabilityVector& f, const AttackGoal& goal);

/// ||x - x0||^2 + c * attack_loss(F(x)); consumes exactly one oracle query.
double total_objective(const Tensor& x, const Tensor& x0, const AttackGoal& goal, double c,
                       Oracle& oracle);

}  // namespace zoo

#endif  // ZOO_LOSS_HPP
