#ifndef ZOO_CAMPAIGN_HPP
#define ZOO_CAMPAIGN_HPP

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "zoo/dataset.hpp"
#include "zoo/network.hpp"
#include "zoo/solver.hpp"

namespace zoo {

/// Campaign-level failure (exit code 1), as opposed to config/IO errors
/// which surface as std::runtime_error / std::invalid_argument (exit 2).
struct CampaignFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Every key of the flat key=value config file, defaults matching the
/// reference experimental settings where one exists.
struct CampaignConfig {
  // dataset
  std::string dataset = "synthetic";  // synthetic | idx
  std::string idx_images;             // attack/eval images (IDX)
  std::string idx_labels;
  std::string train_images;           // training images for the train command
  std::string train_labels;
  std::uint64_t synthetic_seed = 7;
  std::int64_t synthetic_n = 4000;
  std::int64_t synthetic_side = 28;
  std::int64_t synthetic_k = 10;
  double train_split = 0.8;  // synthetic train fraction
  std::int64_t num_classes = 10;

  // model
  std::string model_path = "model.zoonet";
  std::string hidden = "128";  // comma-separated dense widths
  std::int64_t epochs = 10;
  std::int64_t batch_size = 64;
  double learning_rate = 0.1;

  // attack
  std::string mode = "untargeted";  // untargeted | targeted
  std::int64_t n_images = 10;
  std::string solver = "adam";      // adam | newton
  double eta = 0.01;
  std::int64_t max_iterations = 1000;
  std::int64_t batch = 128;
  double h = 1e-4;
  double kappa = 0.0;
  std::string box_mode = "projection";  // projection | tanh
  std::int64_t patience = 100;
  bool reset_adam = false;
  std::int64_t trace_every = 1;
  double c0 = 0.01;
  std::int64_t c_steps = 9;
  std::string space_stages;  // "16x16@0,32x32@500"; empty = full resolution
  std::int64_t importance_from_stage = 1;
  std::int64_t importance_every = 1;
  std::int64_t pool_kernel = 0;

  // io
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  std::int64_t threads = 0;  // 0 = hardware concurrency
  bool save_traces = true;
  bool save_images = true;
  bool save_importance = false;
};

CampaignConfig parse_campaign_config(std::istream& in);
CampaignConfig load_campaign_config(const std::string& path);
void apply_config_override(CampaignConfig& cfg, const std::string& key, const std::string& value);

SolverConfig solver_config_of(const CampaignConfig& cfg);
AttackSpaceConfig space_config_of(const CampaignConfig& cfg, const Shape& image_shape);

struct DatasetSplit {
  std::vector<LabeledImage> train;
  std::vector<LabeledImage> test;
};
DatasetSplit load_campaign_dataset(const CampaignConfig& cfg);

struct AttackRow {
  std::int64_t attack_id = 0;
  std::int64_t image_index = 0;  // position in the test set
  std::int64_t label = 0;
  std::string goal;              // "untargeted" | "targeted"
  std::int64_t target = -1;      // -1 for untargeted
  bool success = false;
  double l2 = 0.0;
  std::int64_t first_valid = -1;
  std::int64_t iterations = 0;
  std::uint64_t estimator_queries = 0;
  std::uint64_t overhead_queries = 0;
  std::uint64_t total_queries = 0;
  double final_c = 0.0;
  double final_loss = 0.0;
  double wall_ms = 0.0;  // kept out of report.json so reruns are byte-identical
};

struct CampaignReport {
  std::vector<AttackRow> rows;

  std::int64_t successes() const;
  double success_rate() const;
  double mean_l2_over_successes() const;
  double mean_queries() const;
  double mean_wall_ms() const;
};

/// Full campaign: load model and data, pick the first n correctly
/// classified test images in seeded shuffle order, attack each goal with
/// binary search over c, write artifacts. results_out, when non-null,
/// receives the raw AttackResults in row order.
CampaignReport run_campaign(const CampaignConfig& cfg, std::ostream& log,
                            std::vector<AttackResult>* results_out = nullptr);

std::string report_to_json(const CampaignConfig& cfg, const CampaignReport& report);
CampaignReport report_from_json(const std::string& text);

int cmd_train(const CampaignConfig& cfg, std::ostream& log);
int cmd_attack(const CampaignConfig& cfg, std::ostream& log);
int cmd_eval(const std::string& report_path, std::ostream& log);

}  // namespace zoo

#endif  // ZOO_CAMPAIGN_HPP
