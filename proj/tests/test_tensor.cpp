#include <doctest.h>

#include <cmath>

#include "zoo/rng.hpp"
#include "zoo/tensor.hpp"

using namespace zoo;

namespace {

Tensor random_tensor(const Shape& shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(shape);
  for (std::int64_t i = 0; i < t.size(); ++i) t[i] = rng_uniform(rng, lo, hi);
  return t;
}

// Independent scalar reference for one bilinear sample, corner-aligned.
double bilinear_reference(const Tensor& src, std::int64_t oy, std::int64_t ox, std::int64_t ch,
                          std::int64_t out_h, std::int64_t out_w) {
  const std::int64_t h = src.shape()[0], w = src.shape()[1];
  const double fy = out_h > 1 ? oy * double(h - 1) / double(out_h - 1) : 0.0;
  const double fx = out_w > 1 ? ox * double(w - 1) / double(out_w - 1) : 0.0;
  const auto y0 = std::min<std::int64_t>(std::int64_t(std::floor(fy)), h - 1);
  const auto x0 = std::min<std::int64_t>(std::int64_t(std::floor(fx)), w - 1);
  const auto y1 = std::min(y0 + 1, h - 1);
  const auto x1 = std::min(x0 + 1, w - 1);
  const double wy = fy - y0, wx = fx - x0;
  return src.at3(y0, x0, ch) * (1 - wy) * (1 - wx) + src.at3(y0, x1, ch) * (1 - wy) * wx +
         src.at3(y1, x0, ch) * wy * (1 - wx) + src.at3(y1, x1, ch) * wy * wx;
}

}  // namespace

TEST_CASE("tensor construction checks shape/data consistency") {
  CHECK_THROWS(Tensor({2, 3}, {1.0, 2.0}));
  CHECK_THROWS(Tensor({0, 3}));
  const Tensor t({2, 3});
  CHECK(t.size() == 6);
  for (std::int64_t i = 0; i < t.size(); ++i) CHECK(t[i] == 0.0);
}

TEST_CASE("l2_norm basics") {
  CHECK(l2_norm(Tensor({2}, {3.0, 4.0})) == doctest::Approx(5.0));
  CHECK(l2_norm(Tensor({3, 2, 1})) == 0.0);
  CHECK(l2_norm(Tensor({4}, {1.0, 1.0, 1.0, 1.0})) == doctest::Approx(2.0));
  CHECK_THROWS_WITH(l2_norm(Tensor{}), "empty tensor");
}

TEST_CASE("l2_norm scales homogeneously") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor t = random_tensor({7, 3, 2}, rng);
    const double a = rng_uniform(rng, -5.0, 5.0);
    CHECK(l2_norm(a * t) == doctest::Approx(std::abs(a) * l2_norm(t)).epsilon(1e-12));
  }
}

TEST_CASE("bilinear_resize identity is bit exact") {
  Rng rng(12);
  const Tensor t = random_tensor({5, 7, 3}, rng);
  const Tensor r = bilinear_resize(t, 5, 7);
  for (std::int64_t i = 0; i < t.size(); ++i) CHECK(r[i] == t[i]);
}

TEST_CASE("bilinear_resize of a constant stays constant") {
  const Tensor t = Tensor::full({3, 3, 2}, 0.5);
  for (const auto& [oh, ow] : {std::pair{1, 9}, {7, 2}, {16, 16}}) {
    const Tensor r = bilinear_resize(t, oh, ow);
    for (double v : r.data()) CHECK(v == doctest::Approx(0.5).epsilon(1e-15));
  }
}

TEST_CASE("bilinear_resize 2x2 to 3x3 hand-computed grid") {
  const Tensor src({2, 2, 1}, {0.0, 1.0, 2.0, 3.0});
  const Tensor r = bilinear_resize(src, 3, 3);
  const double expected[9] = {0.0, 0.5, 1.0, 1.0, 1.5, 2.0, 2.0, 2.5, 3.0};
  for (int i = 0; i < 9; ++i) CHECK(r[i] == doctest::Approx(expected[i]).epsilon(1e-15));
}

TEST_CASE("bilinear_resize matches the scalar reference on random input") {
  Rng rng(13);
  const Tensor src = random_tensor({6, 4, 2}, rng);
  for (const auto& [oh, ow] : {std::pair{9, 11}, {3, 2}, {1, 5}}) {
    const Tensor r = bilinear_resize(src, oh, ow);
    for (std::int64_t y = 0; y < oh; ++y)
      for (std::int64_t x = 0; x < ow; ++x)
        for (std::int64_t c = 0; c < 2; ++c)
          CHECK(r.at3(y, x, c) ==
                doctest::Approx(bilinear_reference(src, y, x, c, oh, ow)).epsilon(1e-12));
  }
}

TEST_CASE("bilinear_resize stays within the source range and rejects empty output") {
  Rng rng(14);
  const Tensor src = random_tensor({4, 4, 1}, rng);
  double lo = src[0], hi = src[0];
  for (double v : src.data()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const Tensor r = bilinear_resize(src, 13, 9);
  for (double v : r.data()) {
    CHECK(v >= lo - 1e-12);
    CHECK(v <= hi + 1e-12);
  }
  CHECK_THROWS(bilinear_resize(src, 0, 4));
}

TEST_CASE("down-up round trip preserves constants and linear ramps") {
  const std::int64_t h = 6, w = 8;
  Tensor ramp({2 * h, 2 * w, 1});
  for (std::int64_t y = 0; y < 2 * h; ++y)
    for (std::int64_t x = 0; x < 2 * w; ++x)
      ramp.at3(y, x, 0) = 0.3 * y + 0.1 * x;
  // Upscale then downscale along the same corner-aligned grid.
  const Tensor up = bilinear_resize(ramp, 4 * h - 1, 4 * w - 1);
  const Tensor back = bilinear_resize(up, 2 * h, 2 * w);
  for (std::int64_t i = 0; i < ramp.size(); ++i)
    CHECK(back[i] == doctest::Approx(ramp[i]).epsilon(1e-12));

  const Tensor c = Tensor::full({h, w, 1}, 0.25);
  const Tensor c2 = bilinear_resize(bilinear_resize(c, 2 * h, 2 * w), h, w);
  for (std::int64_t i = 0; i < c.size(); ++i) CHECK(c2[i] == 0.25);
}

TEST_CASE("maxpool_abs examples") {
  SUBCASE("k=1 is elementwise absolute value") {
    const Tensor t({2, 2, 1}, {-1.0, 2.0, -3.0, 0.5});
    const Tensor p = maxpool_abs(t, 1);
    CHECK(p.shape() == Shape{2, 2, 1});
    CHECK(p[0] == 1.0);
    CHECK(p[1] == 2.0);
    CHECK(p[2] == 3.0);
    CHECK(p[3] == 0.5);
  }
  SUBCASE("single negative entry dominates") {
    Tensor t({4, 4, 1});
    t.at3(2, 1, 0) = -9.0;
    const Tensor p = maxpool_abs(t, 4);
    CHECK(p.shape() == Shape{1, 1, 1});
    CHECK(p[0] == 9.0);
  }
  SUBCASE("row-major 0..15 with k=2") {
    std::vector<double> v(16);
    for (int i = 0; i < 16; ++i) v[i] = i;
    const Tensor p = maxpool_abs(Tensor({4, 4, 1}, v), 2);
    CHECK(p.shape() == Shape{2, 2, 1});
    CHECK(p[0] == 5.0);
    CHECK(p[1] == 7.0);
    CHECK(p[2] == 13.0);
    CHECK(p[3] == 15.0);
  }
  SUBCASE("invalid kernel") { CHECK_THROWS(maxpool_abs(Tensor({2, 2, 1}), 0)); }
}

TEST_CASE("maxpool_abs agrees with a brute-force oracle and ignores sign") {
  Rng rng(15);
  const Tensor t = random_tensor({7, 5, 2}, rng, -4.0, 4.0);
  for (std::int64_t k : {2, 3, 4}) {
    const Tensor p = maxpool_abs(t, k);
    const std::int64_t oh = (7 + k - 1) / k, ow = (5 + k - 1) / k;
    REQUIRE(p.shape() == Shape{oh, ow, 2});
    for (std::int64_t oy = 0; oy < oh; ++oy)
      for (std::int64_t ox = 0; ox < ow; ++ox)
        for (std::int64_t c = 0; c < 2; ++c) {
          double best = 0.0;
          for (std::int64_t y = oy * k; y < std::min<std::int64_t>((oy + 1) * k, 7); ++y)
            for (std::int64_t x = ox * k; x < std::min<std::int64_t>((ox + 1) * k, 5); ++x)
              best = std::max(best, std::abs(t.at3(y, x, c)));
          CHECK(p.at3(oy, ox, c) == best);
        }
  }

  Tensor flipped = t;
  for (std::int64_t i = 0; i < flipped.size(); ++i) flipped[i] = -flipped[i];
  const Tensor a = maxpool_abs(t, 3), b = maxpool_abs(flipped, 3);
  for (std::int64_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("project_box clamps, is idempotent and monotone") {
  const Tensor t({3}, {-0.2, 0.5, 1.3});
  const Tensor p = project_box(t, 0.0, 1.0);
  CHECK(p[0] == 0.0);
  CHECK(p[1] == 0.5);
  CHECK(p[2] == 1.0);

  Rng rng(16);
  const Tensor r = random_tensor({5, 5, 1}, rng, -2.0, 2.0);
  const Tensor once = project_box(r, -0.5, 0.5);
  const Tensor twice = project_box(once, -0.5, 0.5);
  for (std::int64_t i = 0; i < r.size(); ++i) CHECK(once[i] == twice[i]);

  const Tensor in_range = random_tensor({4}, rng, 0.1, 0.9);
  const Tensor same = project_box(in_range, 0.0, 1.0);
  for (std::int64_t i = 0; i < in_range.size(); ++i) CHECK(same[i] == in_range[i]);

  Tensor bigger = r;
  for (std::int64_t i = 0; i < bigger.size(); ++i) bigger[i] += rng_uniform(rng, 0.0, 1.0);
  const Tensor pa = project_box(r, -0.5, 0.5), pb = project_box(bigger, -0.5, 0.5);
  for (std::int64_t i = 0; i < pa.size(); ++i) CHECK(pa[i] <= pb[i]);

  CHECK_THROWS(project_box(t, 1.0, 0.0));
}
