#include "zoo/attack_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "zoo/image_io.hpp"

namespace zoo {

namespace {
constexpr double kProbFloor = 1e-12;
}

AttackSpaceConfig full_space_config(const Shape& image_shape) {
  AttackSpaceConfig cfg;
  cfg.stages.push_back({image_shape[0], image_shape[1], image_shape[2], 0});
  cfg.importance_from_stage = std::numeric_limits<std::int64_t>::max();
  cfg.importance_refresh_every = 10;
  return cfg;
}

AttackSpace::AttackSpace(AttackSpaceConfig cfg, Shape target_shape)
    : cfg_(std::move(cfg)), target_(std::move(target_shape)) {
  if (target_.size() != 3) throw std::invalid_argument("target shape must be H x W x C");
  if (cfg_.stages.empty()) throw std::invalid_argument("attack space needs at least one stage");
  if (cfg_.stages.front().start_iteration != 0)
    throw std::invalid_argument("first stage must start at iteration 0");
  for (std::size_t i = 0; i < cfg_.stages.size(); ++i) {
    const StageDims& s = cfg_.stages[i];
    if (s.c != target_[2]) throw std::invalid_argument("stage channels must match the image");
    if (s.h > target_[0] || s.w > target_[1])
      throw std::invalid_argument("stage larger than the image");
    if (i > 0) {
      const StageDims& prev = cfg_.stages[i - 1];
      if (s.h <= prev.h || s.w <= prev.w)
        throw std::invalid_argument("stage dimensions must strictly increase");
      if (s.start_iteration <= prev.start_iteration)
        throw std::invalid_argument("stage start iterations must strictly increase");
    }
  }
  const StageDims& s0 = cfg_.stages[0];
  y_ = Tensor({s0.h, s0.w, s0.c});
  reset_uniform_map();
}

Tensor AttackSpace::decode(const Tensor& y) const {
  const StageDims& s = cfg_.stages[static_cast<std::size_t>(stage_)];
  if (y.shape() != Shape{s.h, s.w, s.c})
    throw std::invalid_argument("y does not match the current stage");
  if (s.h == target_[0] && s.w == target_[1]) return y;
  return bilinear_resize(y, target_[0], target_[1]);
}

bool AttackSpace::has_next_stage() const {
  return static_cast<std::size_t>(stage_ + 1) < cfg_.stages.size();
}

std::int64_t AttackSpace::next_stage_start() const {
  if (!has_next_stage()) return std::numeric_limits<std::int64_t>::max();
  return cfg_.stages[static_cast<std::size_t>(stage_ + 1)].start_iteration;
}

void AttackSpace::upscale_stage() {
  if (!has_next_stage()) throw std::logic_error("no next stage");
  const StageDims& next = cfg_.stages[static_cast<std::size_t>(stage_ + 1)];
  // D_i^{-1}(D_{i-1}(y)) collapses to a grid-to-grid resize under the
  // corner-aligned convention.
  y_ = bilinear_resize(y_, next.h, next.w);
  ++stage_;
  reset_uniform_map();
}

bool AttackSpace::importance_active() const {
  return stage_ >= cfg_.importance_from_stage;
}

void AttackSpace::reset_uniform_map() {
  map_.probs.assign(static_cast<std::size_t>(y_.size()), 1.0 / static_cast<double>(y_.size()));
}

const ImportanceMap& AttackSpace::update_importance(const Tensor& delta_x) {
  if (delta_x.shape() != target_) throw std::invalid_argument("delta_x must be full resolution");
  const StageDims& s = cfg_.stages[static_cast<std::size_t>(stage_)];

  double max_abs = 0.0;
  for (double v : delta_x.data()) max_abs = std::max(max_abs, std::abs(v));

  if (max_abs == 0.0) {
    reset_uniform_map();
  } else {
    std::int64_t kernel = cfg_.pool_kernel;
    if (kernel <= 0) kernel = std::max<std::int64_t>(1, (std::min(target_[0], target_[1]) + 4) / 8);
    const Tensor pooled = maxpool_abs(delta_x, kernel);
    const Tensor up = bilinear_resize(pooled, s.h, s.w);

    map_.probs.resize(static_cast<std::size_t>(up.size()));
    double sum = 0.0;
    for (std::int64_t i = 0; i < up.size(); ++i) {
      map_.probs[static_cast<std::size_t>(i)] = up[i] + kProbFloor;
      sum += map_.probs[static_cast<std::size_t>(i)];
    }
    for (double& p : map_.probs) p /= sum;
  }

  ++updates_;
  double sum = 0.0, lo = 1.0;
  for (double p : map_.probs) {
    sum += p;
    lo = std::min(lo, p);
  }
  worst_sum_err_ = std::max(worst_sum_err_, std::abs(sum - 1.0));
  min_prob_ = std::min(min_prob_, lo);
  return map_;
}

void write_importance_pgm(const ImportanceMap& map, const StageDims& dims,
                          const std::string& path) {
  // Channel-max per pixel, scaled so the hottest cell renders white.
  Tensor gray({dims.h, dims.w, 1});
  double peak = 0.0;
  for (std::int64_t r = 0; r < dims.h; ++r)
    for (std::int64_t c = 0; c < dims.w; ++c) {
      double m = 0.0;
      for (std::int64_t ch = 0; ch < dims.c; ++ch)
        m = std::max(m, map.probs[static_cast<std::size_t>((r * dims.w + c) * dims.c + ch)]);
      gray.at3(r, c, 0) = m;
      peak = std::max(peak, m);
    }
  if (peak > 0.0)
    for (double& v : gray.data()) v /= peak;
  write_pgm(gray, path);
}

}  // namespace zoo
