#ifndef ZOO_ATTACK_SPACE_HPP
#define ZOO_ATTACK_SPACE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "zoo/tensor.hpp"

namespace zoo {

struct StageDims {
  std::int64_t h = 0, w = 0, c = 0;
  std::int64_t start_iteration = 0;
};

struct AttackSpaceConfig {
  std::vector<StageDims> stages;          // dims strictly increasing, first starts at 0
  std::int64_t importance_from_stage = 1; // stages below this sample uniformly
  std::int64_t importance_refresh_every = 1;
  std::int64_t pool_kernel = 0;           // 0: side/8, the 8x8-region reading
};

struct ImportanceMap {
  std::vector<double> probs;
};

/// Single stage spanning the full image, no importance sampling: the small
/// image setting where dimension reduction is switched off.
AttackSpaceConfig full_space_config(const Shape& image_shape);

/// The reduced-dimension noise variable y, its upscaling transform D, the
/// stage schedule that grows y, and the sampling distribution over its
/// coordinates.
class AttackSpace {
 public:
  AttackSpace(AttackSpaceConfig cfg, Shape target_shape);

  const AttackSpaceConfig& config() const { return cfg_; }
  const Shape& target_shape() const { return target_; }
  std::int64_t current_stage() const { return stage_; }
  std::int64_t dim() const { return y_.size(); }

  const Tensor& y() const { return y_; }
  Tensor& y() { return y_; }

  /// D(y): bilinear upscale to the target shape; identity when the stage
  /// already matches the target dimensions.
  Tensor decode(const Tensor& y) const;
  Tensor decode() const { return decode(y_); }

  bool has_next_stage() const;
  std::int64_t next_stage_start() const;  // INT64_MAX when exhausted
  void upscale_stage();                   // y moves to the next grid via resize

  bool importance_active() const;
  const ImportanceMap& importance() const { return map_; }
  const ImportanceMap& update_importance(const Tensor& delta_x);

  // Health counters accumulated over every update_importance call.
  std::int64_t importance_updates() const { return updates_; }
  double importance_worst_sum_error() const { return worst_sum_err_; }
  double importance_min_prob() const { return min_prob_; }

 private:
  void reset_uniform_map();

  AttackSpaceConfig cfg_;
  Shape target_;
  std::int64_t stage_ = 0;
  Tensor y_;
  ImportanceMap map_;
  std::int64_t updates_ = 0;
  double worst_sum_err_ = 0.0;
  double min_prob_ = 1.0;
};

void write_importance_pgm(const ImportanceMap& map, const StageDims& dims,
                          const std::string& path);

}  // namespace zoo

#endif  // ZOO_ATTACK_SPACE_HPP
