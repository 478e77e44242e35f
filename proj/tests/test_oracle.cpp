#include <doctest.h>

#include <cmath>

#include "zoo/oracle.hpp"
#include "zoo/rng.hpp"

using namespace zoo;

namespace {

Network small_net(std::uint64_t seed) { return make_mlp({3, 3, 1}, {4}, 3, seed); }

Tensor random_image(Rng& rng) {
  Tensor x({3, 3, 1});
  for (std::int64_t i = 0; i < x.size(); ++i) x[i] = rng_uniform(rng, 0.0, 1.0);
  return x;
}

}  // namespace

TEST_CASE("query counts and is deterministic") {
  const Network net = small_net(1);
  ModelOracle oracle(net);
  CHECK(oracle.total_queries() == 0);

  Rng rng(2);
  const Tensor x = random_image(rng);
  const ProbabilityVector a = oracle.query(x);
  const ProbabilityVector b = oracle.query(x);
  CHECK(oracle.total_queries() == 2);
  REQUIRE(a.probs.size() == b.probs.size());
  for (std::size_t i = 0; i < a.probs.size(); ++i) CHECK(a.probs[i] == b.probs[i]);
  a.validate();

  CHECK_THROWS(oracle.query(Tensor({2, 2, 1})));
}

TEST_CASE("probabilities agree with softmax over logits") {
  const Network net = small_net(3);
  ModelOracle oracle(net);
  Rng rng(4);
  const Tensor x = random_image(rng);
  const ProbabilityVector f = oracle.query(x);
  const Tensor expected = softmax(net.forward_logits(x));
  for (std::int64_t i = 0; i < expected.size(); ++i)
    CHECK(f.probs[static_cast<std::size_t>(i)] == doctest::Approx(expected[i]).epsilon(1e-12));
  // log_probs channel matches log of probs where probs are representable
  for (std::int64_t i = 0; i < expected.size(); ++i)
    CHECK(f.log_prob(i) == doctest::Approx(std::log(expected[i])).epsilon(1e-9));
}

TEST_CASE("query_batch equals sequential queries in order and count") {
  const Network net = small_net(5);
  ModelOracle batch_oracle(net);
  ModelOracle seq_oracle(net);

  Rng rng(6);
  std::vector<Tensor> xs;
  for (int i = 0; i < 7; ++i) xs.push_back(random_image(rng));

  const auto batched = batch_oracle.query_batch(xs);
  REQUIRE(batched.size() == xs.size());
  CHECK(batch_oracle.total_queries() == xs.size());

  for (std::size_t i = 0; i < xs.size(); ++i) {
    const ProbabilityVector single = seq_oracle.query(xs[i]);
    for (std::size_t k = 0; k < single.probs.size(); ++k)
      CHECK(batched[i].probs[k] == single.probs[k]);
  }
  CHECK(seq_oracle.total_queries() == xs.size());

  CHECK(batch_oracle.query_batch({}).empty());
  CHECK(batch_oracle.total_queries() == xs.size());
}

TEST_CASE("a bad shape fails the whole batch before counting") {
  const Network net = small_net(7);
  ModelOracle oracle(net);
  Rng rng(8);
  std::vector<Tensor> xs = {random_image(rng), Tensor({2, 2, 1}), random_image(rng)};
  CHECK_THROWS(oracle.query_batch(xs));
  CHECK(oracle.total_queries() == 0);
}

TEST_CASE("overhead queries are tallied separately") {
  const Network net = small_net(9);
  ModelOracle oracle(net);
  Rng rng(10);
  const Tensor x = random_image(rng);
  oracle.query(x);
  oracle.query_overhead(x);
  oracle.query(x);
  CHECK(oracle.total_queries() == 3);
  CHECK(oracle.overhead_queries() == 1);
  CHECK(oracle.estimator_queries() == 2);
}

TEST_CASE("probability vector argmax breaks ties toward the lowest index") {
  ProbabilityVector f;
  f.probs = {0.25, 0.25, 0.25, 0.25};
  CHECK(f.argmax() == 0);
  f.probs = {0.2, 0.4, 0.4};
  CHECK(f.argmax() == 1);
}
