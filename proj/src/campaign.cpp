#include "zoo/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "zoo/image_io.hpp"
#include "zoo/oracle.hpp"
#include "zoo/rng.hpp"

namespace zoo {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::int64_t parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const std::int64_t out = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw std::runtime_error("config key " + key + ": bad integer '" + v + "'");
  }
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw std::runtime_error("config key " + key + ": bad number '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on") return true;
  if (v == "0" || v == "false" || v == "off") return false;
  throw std::runtime_error("config key " + key + ": bad boolean '" + v + "'");
}

}  // namespace

void apply_config_override(CampaignConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "dataset") cfg.dataset = value;
  else if (key == "idx_images") cfg.idx_images = value;
  else if (key == "idx_labels") cfg.idx_labels = value;
  else if (key == "train_images") cfg.train_images = value;
  else if (key == "train_labels") cfg.train_labels = value;
  else if (key == "synthetic_seed") cfg.synthetic_seed = static_cast<std::uint64_t>(parse_int(key, value));
  else if (key == "synthetic_n") cfg.synthetic_n = parse_int(key, value);
  else if (key == "synthetic_side") cfg.synthetic_side = parse_int(key, value);
  else if (key == "synthetic_k") cfg.synthetic_k = parse_int(key, value);
  else if (key == "train_split") cfg.train_split = parse_real(key, value);
  else if (key == "num_classes") cfg.num_classes = parse_int(key, value);
  else if (key == "model") cfg.model_path = value;
  else if (key == "hidden") cfg.hidden = value;
  else if (key == "epochs") cfg.epochs = parse_int(key, value);
  else if (key == "batch_size") cfg.batch_size = parse_int(key, value);
  else if (key == "learning_rate") cfg.learning_rate = parse_real(key, value);
  else if (key == "mode") cfg.mode = value;
  else if (key == "n_images") cfg.n_images = parse_int(key, value);
  else if (key == "solver") cfg.solver = value;
  else if (key == "eta") cfg.eta = parse_real(key, value);
  else if (key == "max_iterations") cfg.max_iterations = parse_int(key, value);
  else if (key == "batch") cfg.batch = parse_int(key, value);
  else if (key == "h") cfg.h = parse_real(key, value);
  else if (key == "kappa") cfg.kappa = parse_real(key, value);
  else if (key == "box_mode") cfg.box_mode = value;
  else if (key == "patience") cfg.patience = parse_int(key, value);
  else if (key == "reset_adam") cfg.reset_adam = parse_bool(key, value);
  else if (key == "trace_every") cfg.trace_every = parse_int(key, value);
  else if (key == "c0") cfg.c0 = parse_real(key, value);
  else if (key == "c_steps") cfg.c_steps = parse_int(key, value);
  else if (key == "space_stages") cfg.space_stages = value;
  else if (key == "importance_from_stage") cfg.importance_from_stage = parse_int(key, value);
  else if (key == "importance_every") cfg.importance_every = parse_int(key, value);
  else if (key == "pool_kernel") cfg.pool_kernel = parse_int(key, value);
  else if (key == "output_dir") cfg.output_dir = value;
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
  else if (key == "threads") cfg.threads = parse_int(key, value);
  else if (key == "save_traces") cfg.save_traces = parse_bool(key, value);
  else if (key == "save_images") cfg.save_images = parse_bool(key, value);
  else if (key == "save_importance") cfg.save_importance = parse_bool(key, value);
  else throw std::runtime_error("unknown config key '" + key + "'");
}

CampaignConfig parse_campaign_config(std::istream& in) {
  CampaignConfig cfg;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key=value");
    apply_config_override(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

CampaignConfig load_campaign_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  return parse_campaign_config(in);
}

SolverConfig solver_config_of(const CampaignConfig& cfg) {
  SolverConfig s;
  if (cfg.solver == "adam") s.solver = SolverKind::adam;
  else if (cfg.solver == "newton") s.solver = SolverKind::newton;
  else throw std::runtime_error("solver must be adam or newton");
  if (cfg.box_mode == "projection") s.box_mode = BoxMode::projection;
  else if (cfg.box_mode == "tanh") s.box_mode = BoxMode::tanh_change;
  else throw std::runtime_error("box_mode must be projection or tanh");
  s.eta = cfg.eta;
  s.max_iterations = cfg.max_iterations;
  s.batch = cfg.batch;
  s.h = cfg.h;
  s.early_stop_patience = cfg.patience;
  s.reset_adam_on_first_success = cfg.reset_adam;
  s.trace_every = cfg.trace_every;
  return s;
}

AttackSpaceConfig space_config_of(const CampaignConfig& cfg, const Shape& image_shape) {
  AttackSpaceConfig out;
  if (cfg.space_stages.empty()) {
    out = full_space_config(image_shape);
  } else {
    std::stringstream ss(cfg.space_stages);
    std::string part;
    while (std::getline(ss, part, ',')) {
      part = trim(part);
      const auto x = part.find('x');
      const auto at = part.find('@');
      if (x == std::string::npos || at == std::string::npos || at < x)
        throw std::runtime_error("space_stages entries look like 16x16@0");
      StageDims s;
      s.h = parse_int("space_stages", part.substr(0, x));
      s.w = parse_int("space_stages", part.substr(x + 1, at - x - 1));
      s.c = image_shape[2];
      s.start_iteration = parse_int("space_stages", part.substr(at + 1));
      out.stages.push_back(s);
    }
    out.importance_from_stage = cfg.importance_from_stage;
  }
  out.importance_refresh_every = cfg.importance_every;
  out.pool_kernel = cfg.pool_kernel;
  return out;
}

DatasetSplit load_campaign_dataset(const CampaignConfig& cfg) {
  DatasetSplit split;
  if (cfg.dataset == "synthetic") {
    auto all = synthetic_dataset(cfg.synthetic_seed, cfg.synthetic_n, cfg.synthetic_side,
                                 cfg.synthetic_k);
    const auto n_train = static_cast<std::size_t>(
        std::llround(cfg.train_split * static_cast<double>(all.size())));
    split.train.assign(all.begin(), all.begin() + n_train);
    split.test.assign(all.begin() + n_train, all.end());
  } else if (cfg.dataset == "idx") {
    if (!cfg.train_images.empty()) {
      split.train = pair_dataset(parse_idx_images(read_file_bytes(cfg.train_images)),
                                 parse_idx_labels(read_file_bytes(cfg.train_labels)),
                                 cfg.num_classes);
    }
    if (!cfg.idx_images.empty()) {
      split.test = pair_dataset(parse_idx_images(read_file_bytes(cfg.idx_images)),
                                parse_idx_labels(read_file_bytes(cfg.idx_labels)),
                                cfg.num_classes);
    }
  } else {
    throw std::runtime_error("dataset must be synthetic or idx");
  }
  return split;
}

std::int64_t CampaignReport::successes() const {
  return std::count_if(rows.begin(), rows.end(), [](const AttackRow& r) { return r.success; });
}

double CampaignReport::success_rate() const {
  return rows.empty() ? 0.0 : static_cast<double>(successes()) / static_cast<double>(rows.size());
}

double CampaignReport::mean_l2_over_successes() const {
  double sum = 0.0;
  std::int64_t n = 0;
  for (const AttackRow& r : rows)
    if (r.success) {
      sum += r.l2;
      ++n;
    }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

double CampaignReport::mean_queries() const {
  if (rows.empty()) return 0.0;
  double sum = 0.0;
  for (const AttackRow& r : rows) sum += static_cast<double>(r.total_queries);
  return sum / static_cast<double>(rows.size());
}

double CampaignReport::mean_wall_ms() const {
  if (rows.empty()) return 0.0;
  double sum = 0.0;
  for (const AttackRow& r : rows) sum += r.wall_ms;
  return sum / static_cast<double>(rows.size());
}

namespace {

ordered_json config_echo(const CampaignConfig& cfg) {
  ordered_json j;
  j["dataset"] = cfg.dataset;
  if (cfg.dataset == "synthetic") {
    j["synthetic_seed"] = cfg.synthetic_seed;
    j["synthetic_n"] = cfg.synthetic_n;
    j["synthetic_side"] = cfg.synthetic_side;
    j["synthetic_k"] = cfg.synthetic_k;
    j["train_split"] = cfg.train_split;
  } else {
    j["idx_images"] = cfg.idx_images;
    j["idx_labels"] = cfg.idx_labels;
  }
  j["num_classes"] = cfg.num_classes;
  j["model"] = cfg.model_path;
  j["mode"] = cfg.mode;
  j["n_images"] = cfg.n_images;
  j["solver"] = cfg.solver;
  j["eta"] = cfg.eta;
  j["max_iterations"] = cfg.max_iterations;
  j["batch"] = cfg.batch;
  j["h"] = cfg.h;
  j["kappa"] = cfg.kappa;
  j["box_mode"] = cfg.box_mode;
  j["patience"] = cfg.patience;
  j["reset_adam"] = cfg.reset_adam;
  j["c0"] = cfg.c0;
  j["c_steps"] = cfg.c_steps;
  j["space_stages"] = cfg.space_stages;
  j["importance_from_stage"] = cfg.importance_from_stage;
  j["importance_every"] = cfg.importance_every;
  j["pool_kernel"] = cfg.pool_kernel;
  j["seed"] = cfg.seed;
  return j;
}

struct AttackTask {
  std::int64_t attack_id;
  std::int64_t image_index;
  std::int64_t label;
  AttackGoal goal;
};

std::string attack_stem(std::int64_t id) {
  std::ostringstream ss;
  ss << "attack_" << std::setw(4) << std::setfill('0') << id;
  return ss.str();
}

}  // namespace

CampaignReport run_campaign(const CampaignConfig& cfg, std::ostream& log,
                            std::vector<AttackResult>* results_out) {
  if (cfg.n_images < 1) throw std::runtime_error("n_images must be >= 1");
  const Network net = load_network(cfg.model_path);
  const DatasetSplit data = load_campaign_dataset(cfg);
  if (data.test.empty()) throw std::runtime_error("no test images available");

  // Seeded shuffle, then keep the first n correctly classified images.
  std::vector<std::size_t> order(data.test.size());
  std::iota(order.begin(), order.end(), 0);
  Rng pick_rng(mix_seed(cfg.seed, 0xA11CE));
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[rng_below(pick_rng, i)]);

  std::vector<std::size_t> selected;
  for (std::size_t idx : order) {
    if (static_cast<std::int64_t>(selected.size()) == cfg.n_images) break;
    const LabeledImage& s = data.test[idx];
    const Tensor logits = net.forward_logits(s.image);
    std::int64_t best = 0;
    for (std::int64_t i = 1; i < logits.size(); ++i)
      if (logits[i] > logits[best]) best = i;
    if (best == s.label) selected.push_back(idx);
  }
  if (selected.empty()) throw CampaignFailure("no correctly classified images to attack");
  if (static_cast<std::int64_t>(selected.size()) < cfg.n_images)
    log << "note: only " << selected.size() << " of " << cfg.n_images
        << " requested images are correctly classified\n";

  std::vector<AttackTask> tasks;
  for (std::size_t s : selected) {
    const std::int64_t label = data.test[s].label;
    if (cfg.mode == "untargeted") {
      tasks.push_back({static_cast<std::int64_t>(tasks.size()), static_cast<std::int64_t>(s),
                       label, AttackGoal{AttackMode::untargeted, label, cfg.kappa}});
    } else if (cfg.mode == "targeted") {
      for (std::int64_t t = 0; t < net.num_classes(); ++t) {
        if (t == label) continue;
        tasks.push_back({static_cast<std::int64_t>(tasks.size()), static_cast<std::int64_t>(s),
                         label, AttackGoal{AttackMode::targeted, t, cfg.kappa}});
      }
    } else {
      throw std::runtime_error("mode must be untargeted or targeted");
    }
  }

  const SolverConfig solver_cfg = solver_config_of(cfg);
  const AttackSpaceConfig space_cfg = space_config_of(cfg, data.test[selected[0]].image.shape());

  std::vector<AttackResult> results(tasks.size());
  std::vector<double> wall_ms(tasks.size(), 0.0);
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  const auto worker = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= tasks.size()) return;
      try {
        const AttackTask& task = tasks[k];
        ModelOracle oracle(net);
        Rng rng(mix_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(task.attack_id)));
        const auto t0 = std::chrono::steady_clock::now();
        results[k] = binary_search_c(data.test[static_cast<std::size_t>(task.image_index)].image,
                                     task.goal, solver_cfg, space_cfg, oracle, rng, cfg.c0,
                                     cfg.c_steps);
        wall_ms[k] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                         .count();
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  std::size_t n_threads = cfg.threads > 0 ? static_cast<std::size_t>(cfg.threads)
                                          : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min(n_threads, tasks.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (std::thread& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);

  CampaignReport report;
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    const AttackTask& task = tasks[k];
    const AttackResult& r = results[k];
    AttackRow row;
    row.attack_id = task.attack_id;
    row.image_index = task.image_index;
    row.label = task.label;
    row.goal = cfg.mode;
    row.target = task.goal.mode == AttackMode::targeted ? task.goal.cls : -1;
    row.success = r.success;
    row.l2 = r.l2_distortion;
    row.first_valid = r.first_valid_iteration.value_or(-1);
    row.iterations = r.iterations;
    row.estimator_queries = r.queries.estimator;
    row.overhead_queries = r.queries.overhead_total();
    row.total_queries = r.queries.total();
    row.final_c = r.final_c;
    row.final_loss = r.final_loss;
    row.wall_ms = wall_ms[k];
    report.rows.push_back(std::move(row));
  }

  if (!cfg.output_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);
    const fs::path dir(cfg.output_dir);

    std::ofstream rj(dir / "report.json", std::ios::binary);
    rj << report_to_json(cfg, report);
    rj.close();

    ordered_json timing;
    timing["per_attack_ms"] = wall_ms;
    timing["total_ms"] = std::accumulate(wall_ms.begin(), wall_ms.end(), 0.0);
    std::ofstream tj(dir / "timing.json", std::ios::binary);
    tj << timing.dump(2) << "\n";
    tj.close();

    for (std::size_t k = 0; k < tasks.size(); ++k) {
      const std::string stem = attack_stem(tasks[k].attack_id);
      const Tensor& x0 = data.test[static_cast<std::size_t>(tasks[k].image_index)].image;
      const AttackResult& r = results[k];
      if (cfg.save_traces) write_trace_csv(r, (dir / (stem + "_trace.csv")).string());
      if (cfg.save_images) {
        write_ppm(x0, (dir / (stem + "_original.ppm")).string());
        write_ppm(r.adversarial_image, (dir / (stem + "_adv.ppm")).string());
        // Gray background: no modification renders as 0.5.
        Tensor noise = r.adversarial_image - x0;
        for (double& v : noise.data()) v = std::clamp(v + 0.5, 0.0, 1.0);
        write_ppm(noise, (dir / (stem + "_noise.ppm")).string());
        save_tensor_raw(r.adversarial_image, (dir / (stem + "_adv.t64")).string());
      }
      if (cfg.save_importance && !r.final_importance.probs.empty())
        write_importance_pgm(r.final_importance, r.final_stage,
                             (dir / (stem + "_importance.pgm")).string());
    }
  }

  if (results_out) *results_out = std::move(results);
  return report;
}

std::string report_to_json(const CampaignConfig& cfg, const CampaignReport& report) {
  ordered_json j;
  j["schema"] = "zoo-report-v1";
  j["config"] = config_echo(cfg);
  ordered_json rows = ordered_json::array();
  for (const AttackRow& r : report.rows) {
    ordered_json row;
    row["id"] = r.attack_id;
    row["image_index"] = r.image_index;
    row["label"] = r.label;
    row["goal"] = r.goal;
    row["target"] = r.target;
    row["success"] = r.success;
    row["l2"] = r.l2;
    row["first_valid"] = r.first_valid;
    row["iterations"] = r.iterations;
    row["estimator_queries"] = r.estimator_queries;
    row["overhead_queries"] = r.overhead_queries;
    row["total_queries"] = r.total_queries;
    row["final_c"] = r.final_c;
    row["final_loss"] = r.final_loss;
    rows.push_back(std::move(row));
  }
  j["attacks"] = std::move(rows);
  ordered_json agg;
  agg["attacks"] = report.rows.size();
  agg["successes"] = report.successes();
  agg["success_rate"] = report.success_rate();
  agg["mean_l2_over_successes"] = report.mean_l2_over_successes();
  agg["mean_queries"] = report.mean_queries();
  j["aggregate"] = std::move(agg);
  return j.dump(2) + "\n";
}

CampaignReport report_from_json(const std::string& text) {
  const ordered_json j = ordered_json::parse(text);
  if (!j.contains("schema") || j["schema"] != "zoo-report-v1")
    throw std::runtime_error("not a zoo report");
  CampaignReport report;
  for (const auto& row : j.at("attacks")) {
    AttackRow r;
    r.attack_id = row.at("id").get<std::int64_t>();
    r.image_index = row.at("image_index").get<std::int64_t>();
    r.label = row.at("label").get<std::int64_t>();
    r.goal = row.at("goal").get<std::string>();
    r.target = row.at("target").get<std::int64_t>();
    r.success = row.at("success").get<bool>();
    r.l2 = row.at("l2").get<double>();
    r.first_valid = row.at("first_valid").get<std::int64_t>();
    r.iterations = row.at("iterations").get<std::int64_t>();
    r.estimator_queries = row.at("estimator_queries").get<std::uint64_t>();
    r.overhead_queries = row.at("overhead_queries").get<std::uint64_t>();
    r.total_queries = row.at("total_queries").get<std::uint64_t>();
    r.final_c = row.at("final_c").get<double>();
    r.final_loss = row.at("final_loss").get<double>();
    report.rows.push_back(std::move(r));
  }
  return report;
}

int cmd_train(const CampaignConfig& cfg, std::ostream& log) {
  const DatasetSplit data = load_campaign_dataset(cfg);
  if (data.train.empty()) throw std::runtime_error("no training data configured");

  std::vector<std::int64_t> hidden;
  std::stringstream ss(cfg.hidden);
  std::string part;
  while (std::getline(ss, part, ','))
    if (!trim(part).empty()) hidden.push_back(parse_int("hidden", trim(part)));

  const std::int64_t k = cfg.dataset == "synthetic" ? cfg.synthetic_k : cfg.num_classes;
  Network net = make_mlp(data.train[0].image.shape(), hidden, k, cfg.seed);
  TrainConfig tc{cfg.epochs, cfg.batch_size, cfg.learning_rate, cfg.seed};
  net = train(std::move(net), data.train, tc);
  save_network(net, cfg.model_path);

  log << "train_accuracy " << accuracy(net, data.train) << "\n";
  if (!data.test.empty()) log << "test_accuracy " << accuracy(net, data.test) << "\n";
  log << "model " << cfg.model_path << "\n";
  return 0;
}

int cmd_attack(const CampaignConfig& cfg_in, std::ostream& log) {
  CampaignConfig cfg = cfg_in;
  if (const char* env = std::getenv("ZOO_OUTPUT_DIR"); env && *env) cfg.output_dir = env;
  const CampaignReport report = run_campaign(cfg, log);
  log << "attacks " << report.rows.size() << "\n";
  log << "success_rate " << report.success_rate() << "\n";
  if (report.successes() > 0) log << "mean_l2 " << report.mean_l2_over_successes() << "\n";
  log << "report " << (std::filesystem::path(cfg.output_dir) / "report.json").string() << "\n";
  return 0;
}

int cmd_eval(const std::string& report_path, std::ostream& log) {
  std::ifstream in(report_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open report " + report_path);
  std::stringstream buf;
  buf << in.rdbuf();
  const CampaignReport report = report_from_json(buf.str());

  if (report.rows.empty()) {
    log << "no attacks\n";
    return 0;
  }

  double mean_time_ms = -1.0;
  const auto timing_path = std::filesystem::path(report_path).parent_path() / "timing.json";
  if (std::ifstream tin(timing_path, std::ios::binary); tin) {
    try {
      const ordered_json t = ordered_json::parse(tin);
      const auto& per = t.at("per_attack_ms");
      if (!per.empty()) {
        double sum = 0.0;
        for (const auto& v : per) sum += v.get<double>();
        mean_time_ms = sum / static_cast<double>(per.size());
      }
    } catch (const std::exception&) {
      mean_time_ms = -1.0;  // sidecar is optional
    }
  }

  log << std::fixed << std::setprecision(4);
  log << "attacks        " << report.rows.size() << "\n";
  log << "success_rate   " << 100.0 * report.success_rate() << " %\n";
  if (report.successes() > 0)
    log << "avg_l2         " << report.mean_l2_over_successes() << "\n";
  else
    log << "avg_l2         -\n";
  log << "avg_queries    " << report.mean_queries() << "\n";
  if (mean_time_ms >= 0.0)
    log << "avg_time       " << mean_time_ms / 1000.0 << " s\n";
  else
    log << "avg_time       -\n";
  return 0;
}

}  // namespace zoo
