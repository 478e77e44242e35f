#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "zoo/estimator.hpp"

using namespace zoo;

namespace {

class FnObjective final : public Objective {
 public:
  explicit FnObjective(std::function<double(const Tensor&)> fn) : fn_(std::move(fn)) {}
  double value(const Tensor& x) override {
    ++evals;
    return fn_(x);
  }
  std::vector<double> value_batch(const std::vector<Tensor>& xs) override {
    std::vector<double> out;
    out.reserve(xs.size());
    for (const Tensor& x : xs) out.push_back(value(x));
    return out;
  }
  std::int64_t evals = 0;

 private:
  std::function<double(const Tensor&)> fn_;
};

double sum_of_squares(const Tensor& x) {
  double s = 0.0;
  for (double v : x.data()) s += v * v;
  return s;
}

}  // namespace

TEST_CASE("gradient estimate is exact on quadratics") {
  FnObjective f(sum_of_squares);
  const Tensor x({2}, {1.0, 0.0});
  for (double h : {0.5, 1e-2, 1e-4}) {
    const auto est = estimate_gradient(f, x, {0}, h);
    REQUIRE(est.size() == 1);
    CHECK(est[0].index == 0);
    CHECK(est[0].grad == doctest::Approx(2.0).epsilon(1e-9));
    CHECK_FALSE(est[0].hess.has_value());
  }
}

TEST_CASE("gradient estimate on constants and cubics") {
  FnObjective constant([](const Tensor&) { return 3.7; });
  const Tensor x({3});
  for (const auto& e : estimate_gradient(constant, x, {0, 1, 2}, 0.1)) CHECK(e.grad == 0.0);

  FnObjective cubic([](const Tensor& t) { return t[0] * t[0] * t[0]; });
  const auto est = estimate_gradient(cubic, Tensor({1}, {1.0}), {0}, 0.1);
  CHECK(est[0].grad == doctest::Approx(3.01).epsilon(1e-12));
}

TEST_CASE("hessian estimate on quadratic, linear and quartic") {
  FnObjective quad(sum_of_squares);
  const Tensor x({2}, {0.3, -0.7});
  const auto hq = estimate_hessian_diag(quad, x, sum_of_squares(x), {0, 1}, 1e-3);
  for (const auto& e : hq) CHECK(*e.hess == doctest::Approx(2.0).epsilon(1e-7));

  FnObjective lin([](const Tensor& t) { return 2.0 * t[0] - t[1]; });
  const Tensor y({2}, {0.1, 0.2});
  const auto hl = estimate_hessian_diag(lin, y, 2.0 * 0.1 - 0.2, {0, 1}, 1e-4);
  for (const auto& e : hl) CHECK(std::abs(*e.hess) <= 1e-6);

  FnObjective quart([](const Tensor& t) { return std::pow(t[0], 4.0); });
  const auto hx = estimate_hessian_diag(quart, Tensor({1}, {1.0}), 1.0, {0}, 0.1);
  CHECK(*hx[0].hess == doctest::Approx(12.02).epsilon(1e-9));
}

TEST_CASE("fused mode returns both estimates from 2*batch evaluations") {
  FnObjective f(sum_of_squares);
  const Tensor x({4}, {0.5, -1.0, 2.0, 0.0});
  const double fx = sum_of_squares(x);
  const auto fused = estimate_gradient_hessian(f, x, fx, {0, 2, 3}, 1e-3);
  CHECK(f.evals == 6);
  REQUIRE(fused.size() == 3);
  CHECK(fused[0].grad == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(fused[1].grad == doctest::Approx(4.0).epsilon(1e-8));
  CHECK(fused[2].grad == doctest::Approx(0.0).epsilon(1e-8));
  for (const auto& e : fused) CHECK(*e.hess == doctest::Approx(2.0).epsilon(1e-6));

  f.evals = 0;
  (void)estimate_gradient(f, x, {0, 1}, 1e-3);
  CHECK(f.evals == 4);
}

TEST_CASE("estimator rejects bad arguments") {
  FnObjective f(sum_of_squares);
  const Tensor x({3});
  CHECK_THROWS(estimate_gradient(f, x, {3}, 0.1));
  CHECK_THROWS(estimate_gradient(f, x, {-1}, 0.1));
  CHECK_THROWS(estimate_gradient(f, x, {1, 1}, 0.1));
  CHECK_THROWS(estimate_gradient(f, x, {0}, 0.0));
  CHECK_THROWS(estimate_gradient(f, x, {0}, -1e-4));
}

TEST_CASE("gradient error shrinks like h^2 on Rosenbrock") {
  const auto rosenbrock = [](const Tensor& t) {
    const double x = t[0], y = t[1];
    return 100.0 * (y - x * x) * (y - x * x) + (1.0 - x) * (1.0 - x);
  };
  FnObjective f(rosenbrock);
  const Tensor at({2}, {-0.3, 0.7});
  const double gx = -400.0 * at[0] * (at[1] - at[0] * at[0]) - 2.0 * (1.0 - at[0]);
  const double gy = 200.0 * (at[1] - at[0] * at[0]);

  const auto err_at = [&](double h) {
    const auto est = estimate_gradient(f, at, {0, 1}, h);
    return std::max(std::abs(est[0].grad - gx), std::abs(est[1].grad - gy));
  };
  const double e2 = err_at(1e-2), e3 = err_at(1e-3);
  const double ratio = e2 / e3;  // ideal O(h^2) gives 100
  CHECK(ratio >= 100.0 / 3.0);
  CHECK(ratio <= 100.0 * 3.0);
}

TEST_CASE("uniform sampling without replacement") {
  Rng rng(77);
  const auto all = sample_coordinates(6, 6, nullptr, rng);
  std::set<std::int64_t> unique(all.begin(), all.end());
  CHECK(unique.size() == 6);
  CHECK(*unique.begin() == 0);
  CHECK(*unique.rbegin() == 5);

  for (int trial = 0; trial < 50; ++trial) {
    const auto batch = sample_coordinates(20, 7, nullptr, rng);
    std::set<std::int64_t> s(batch.begin(), batch.end());
    CHECK(s.size() == batch.size());
    for (std::int64_t i : batch) {
      CHECK(i >= 0);
      CHECK(i < 20);
    }
  }

  CHECK_THROWS(sample_coordinates(4, 5, nullptr, rng));
  CHECK_THROWS(sample_coordinates(4, 0, nullptr, rng));
}

TEST_CASE("weighted sampling honors one-hot weights and validates input") {
  Rng rng(78);
  const std::vector<double> one_hot = {0.0, 0.0, 1.0, 0.0};
  for (int trial = 0; trial < 20; ++trial)
    CHECK(sample_coordinates(4, 1, &one_hot, rng)[0] == 2);

  const std::vector<double> bad_sum = {0.5, 0.4, 0.2};
  CHECK_THROWS(sample_coordinates(3, 1, &bad_sum, rng));
  const std::vector<double> negative = {1.5, -0.5};
  CHECK_THROWS(sample_coordinates(2, 1, &negative, rng));
  const std::vector<double> wrong_len = {0.5, 0.5};
  CHECK_THROWS(sample_coordinates(3, 1, &wrong_len, rng));
}

TEST_CASE("weighted sampling frequencies match uniform weights") {
  Rng rng(79);
  const std::vector<double> probs(4, 0.25);
  std::map<std::int64_t, int> counts;
  const int trials = 100000;
  for (int trial = 0; trial < trials; ++trial)
    for (std::int64_t i : sample_coordinates(4, 2, &probs, rng)) counts[i]++;
  for (const auto& [idx, count] : counts) {
    const double freq = static_cast<double>(count) / trials;
    CHECK(freq == doctest::Approx(0.5).epsilon(0.02));
  }
}

TEST_CASE("sampling is deterministic for a fixed rng state") {
  const std::vector<double> probs = {0.1, 0.2, 0.3, 0.4};
  Rng a(123), b(123);
  for (int trial = 0; trial < 10; ++trial) {
    CHECK(sample_coordinates(4, 2, &probs, a) == sample_coordinates(4, 2, &probs, b));
    CHECK(sample_coordinates(4, 3, nullptr, a) == sample_coordinates(4, 3, nullptr, b));
  }
}
