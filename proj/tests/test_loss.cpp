#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "zoo/loss.hpp"
#include "zoo/rng.hpp"

using namespace zoo;

namespace {

ProbabilityVector make_f(std::vector<double> probs) {
  ProbabilityVector f;
  f.probs = std::move(probs);
  return f;
}

class FixedOracle final : public Oracle {
 public:
  FixedOracle(Shape shape, std::vector<double> probs)
      : shape_(std::move(shape)), probs_(std::move(probs)) {}
  const Shape& input_shape() const override { return shape_; }
  std::int64_t num_classes() const override { return static_cast<std::int64_t>(probs_.size()); }

 private:
  ProbabilityVector evaluate(const Tensor&) const override { return make_f(probs_); }
  Shape shape_;
  std::vector<double> probs_;
};

}  // namespace

TEST_CASE("targeted loss hand-computed values") {
  CHECK(targeted_loss(make_f({0.1, 0.9}), 1, 0.0) == 0.0);
  CHECK(targeted_loss(make_f({0.5, 0.5}), 0, 0.0) == 0.0);
  CHECK(targeted_loss(make_f({0.9, 0.1}), 1, 0.0) ==
        doctest::Approx(std::log(9.0)).epsilon(1e-12));
  CHECK_THROWS(targeted_loss(make_f({1.0}), 0, 0.0));
}

TEST_CASE("untargeted loss hand-computed values") {
  CHECK(untargeted_loss(make_f({0.9, 0.1}), 0, 0.0) ==
        doctest::Approx(std::log(9.0)).epsilon(1e-12));
  CHECK(untargeted_loss(make_f({0.1, 0.9}), 0, 0.0) == 0.0);
  CHECK(untargeted_loss(make_f({0.25, 0.25, 0.25, 0.25}), 2, 0.0) == 0.0);
}

TEST_CASE("log 0 semantics produce infinities consistently") {
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(targeted_loss(make_f({1.0, 0.0}), 1, 0.0) == inf);
  // Target holds all mass: every other log is -inf, hinge floors at -kappa.
  CHECK(targeted_loss(make_f({0.0, 1.0}), 1, 0.5) == -0.5);
}

TEST_CASE("losses depend only on log ratios") {
  ProbabilityVector f = make_f({0.2, 0.5, 0.3});
  f.log_probs = {std::log(0.2), std::log(0.5), std::log(0.3)};
  const double base_t = targeted_loss(f, 2, 0.0);
  const double base_u = untargeted_loss(f, 1, 0.0);
  for (double shift : {-3.0, 0.7, 40.0}) {
    ProbabilityVector g = f;
    for (double& lp : g.log_probs) lp += shift;
    CHECK(targeted_loss(g, 2, 0.0) == doctest::Approx(base_t).epsilon(1e-12));
    CHECK(untargeted_loss(g, 1, 0.0) == doctest::Approx(base_u).epsilon(1e-12));
  }
}

TEST_CASE("hinge floor and zero-loss characterization") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const std::int64_t k = 2 + static_cast<std::int64_t>(rng_below(rng, 4));
    std::vector<double> p(static_cast<std::size_t>(k));
    double sum = 0.0;
    for (double& v : p) {
      v = rng_uniform(rng, 1e-6, 1.0);
      sum += v;
    }
    for (double& v : p) v /= sum;
    const ProbabilityVector f = make_f(p);
    const double kappa = rng_uniform(rng, 0.0, 2.0);
    const std::int64_t cls = static_cast<std::int64_t>(rng_below(rng, k));

    CHECK(targeted_loss(f, cls, kappa) >= -kappa);
    CHECK(untargeted_loss(f, cls, kappa) >= -kappa);

    // kappa = 0: zero loss iff the goal class weakly attains the max.
    const bool target_weak_max =
        *std::max_element(p.begin(), p.end()) <= p[static_cast<std::size_t>(cls)] + 1e-15;
    CHECK((targeted_loss(f, cls, 0.0) == 0.0) == target_weak_max);

    // For K=2 the two losses coincide.
    if (k == 2) CHECK(targeted_loss(f, 1, kappa) == untargeted_loss(f, 0, kappa));
  }
}

TEST_CASE("is_success uses lowest-index tie breaking") {
  CHECK(is_success(make_f({0.2, 0.8}), {AttackMode::targeted, 1, 0.0}));
  CHECK_FALSE(is_success(make_f({0.5, 0.5}), {AttackMode::untargeted, 0, 0.0}));
  CHECK(is_success(make_f({0.4, 0.3, 0.3}), {AttackMode::untargeted, 1, 0.0}));
  CHECK_FALSE(is_success(make_f({0.5, 0.5}), {AttackMode::targeted, 1, 0.0}));
}

TEST_CASE("total objective composes distortion and loss with one query") {
  const Shape shape{2, 1, 1};

  SUBCASE("x == x0 with the attack already successful") {
    FixedOracle oracle(shape, {0.1, 0.9});
    const Tensor x0({2, 1, 1}, {0.3, 0.4});
    CHECK(total_objective(x0, x0, {AttackMode::targeted, 1, 0.0}, 1.0, oracle) == 0.0);
    CHECK(oracle.total_queries() == 1);
  }
  SUBCASE("x == x0 unsuccessful leaves only c*f") {
    FixedOracle oracle(shape, {0.9, 0.1});
    const Tensor x0({2, 1, 1}, {0.3, 0.4});
    const double expected = 2.0 * std::log(9.0);
    CHECK(total_objective(x0, x0, {AttackMode::untargeted, 0, 0.0}, 2.0, oracle) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("c=10, distortion^2=0.04, f=0.5") {
    const double q = 1.0 / (1.0 + std::exp(0.5));
    FixedOracle oracle(shape, {1.0 - q, q});
    const Tensor x0({2, 1, 1}, {0.3, 0.4});
    const Tensor x({2, 1, 1}, {0.5, 0.4});
    CHECK(total_objective(x, x0, {AttackMode::untargeted, 0, 0.0}, 10.0, oracle) ==
          doctest::Approx(5.04).epsilon(1e-12));
  }
  SUBCASE("shape mismatch propagates") {
    FixedOracle oracle(shape, {0.5, 0.5});
    CHECK_THROWS(total_objective(Tensor({3}), Tensor({2, 1, 1}), {AttackMode::untargeted, 0, 0.0},
                                 1.0, oracle));
  }
}
