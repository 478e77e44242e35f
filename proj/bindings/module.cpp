#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <sstream>

#include "zoo/attack_space.hpp"
#include "zoo/campaign.hpp"
#include "zoo/dataset.hpp"
#include "zoo/estimator.hpp"
#include "zoo/loss.hpp"
#include "zoo/network.hpp"
#include "zoo/oracle.hpp"
#include "zoo/rng.hpp"
#include "zoo/solver.hpp"
#include "zoo/tensor.hpp"

namespace py = pybind11;
using namespace zoo;

namespace {

Tensor tensor_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  Shape shape(a.ndim());
  for (py::ssize_t i = 0; i < a.ndim(); ++i) shape[static_cast<std::size_t>(i)] = a.shape(i);
  std::vector<double> data(static_cast<std::size_t>(a.size()));
  std::memcpy(data.data(), a.data(), data.size() * sizeof(double));
  return Tensor(std::move(shape), std::move(data));
}

py::array_t<double> tensor_to_array(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  py::array_t<double> out(shape);
  std::memcpy(out.mutable_data(), t.data().data(), t.data().size() * sizeof(double));
  return out;
}

AttackGoal make_goal(const std::string& mode, std::int64_t cls, double kappa) {
  AttackGoal goal;
  if (mode == "targeted") goal.mode = AttackMode::targeted;
  else if (mode == "untargeted") goal.mode = AttackMode::untargeted;
  else throw std::invalid_argument("mode must be targeted or untargeted");
  goal.cls = cls;
  goal.kappa = kappa;
  return goal;
}

py::dict result_to_dict(const AttackResult& r) {
  py::dict d;
  d["success"] = r.success;
  d["adversarial_image"] = tensor_to_array(r.adversarial_image);
  d["l2_distortion"] = r.l2_distortion;
  d["first_valid_iteration"] =
      r.first_valid_iteration ? py::object(py::int_(*r.first_valid_iteration)) : py::none();
  d["iterations"] = r.iterations;
  d["estimator_queries"] = r.queries.estimator;
  d["overhead_queries"] = r.queries.overhead_total();
  d["total_queries"] = r.queries.total();
  d["final_c"] = r.final_c;
  d["final_loss"] = r.final_loss;
  d["c_history"] = r.c_history;
  py::list trace;
  for (const TraceRow& row : r.trace)
    trace.append(py::make_tuple(row.iteration, row.total_loss, row.c_times_f, row.l2, row.queries));
  d["trace"] = std::move(trace);
  py::list stages;
  for (const StageTransition& s : r.stage_transitions)
    stages.append(py::make_tuple(s.iteration, s.loss_before, s.loss_after));
  d["stage_transitions"] = std::move(stages);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Zeroth-order black-box adversarial attack toolkit";

  py::class_<Tensor>(m, "Tensor", py::buffer_protocol())
      .def(py::init(&tensor_from_array), py::arg("array"))
      .def_property_readonly("shape", [](const Tensor& t) { return t.shape(); })
      .def("numpy", &tensor_to_array)
      .def_buffer([](Tensor& t) -> py::buffer_info {
        std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
        std::vector<py::ssize_t> strides(shape.size());
        py::ssize_t acc = static_cast<py::ssize_t>(sizeof(double));
        for (std::size_t i = shape.size(); i-- > 0;) {
          strides[i] = acc;
          acc *= shape[i];
        }
        return py::buffer_info(t.data().data(), sizeof(double),
                               py::format_descriptor<double>::format(),
                               static_cast<py::ssize_t>(shape.size()), shape, strides);
      });

  m.def("l2_norm", &l2_norm);
  m.def("bilinear_resize", &bilinear_resize, py::arg("src"), py::arg("out_h"), py::arg("out_w"));
  m.def("maxpool_abs", &maxpool_abs, py::arg("src"), py::arg("k"));
  m.def("project_box", &project_box, py::arg("t"), py::arg("lo"), py::arg("hi"));

  py::class_<LabeledImage>(m, "LabeledImage")
      .def_property_readonly("image", [](const LabeledImage& s) { return tensor_to_array(s.image); })
      .def_readonly("label", &LabeledImage::label);

  m.def("synthetic_dataset", &synthetic_dataset, py::arg("seed"), py::arg("n"), py::arg("side"),
        py::arg("k"));
  m.def("parse_idx_images", [](py::bytes b) {
    const std::string s = b;
    return parse_idx_images(std::vector<std::uint8_t>(s.begin(), s.end()));
  });
  m.def("parse_idx_labels", [](py::bytes b) {
    const std::string s = b;
    return parse_idx_labels(std::vector<std::uint8_t>(s.begin(), s.end()));
  });
  m.def("write_idx_images", [](const std::vector<Tensor>& images) {
    const std::vector<std::uint8_t> out = write_idx_images(images);
    return py::bytes(reinterpret_cast<const char*>(out.data()), out.size());
  });

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("seed", &TrainConfig::seed);

  py::class_<Network>(m, "Network")
      .def_property_readonly("input_shape", [](const Network& n) { return n.input_shape(); })
      .def_property_readonly("num_classes", &Network::num_classes)
      .def("forward_logits",
           [](const Network& n, const Tensor& x) { return tensor_to_array(n.forward_logits(x)); });

  m.def("make_mlp", &make_mlp, py::arg("input_shape"), py::arg("hidden"), py::arg("num_classes"),
        py::arg("seed"));
  m.def("train", &train, py::arg("net"), py::arg("data"), py::arg("cfg"));
  m.def("accuracy", &accuracy);
  m.def("mean_cross_entropy", &mean_cross_entropy);
  m.def("save_network", &save_network);
  m.def("load_network", &load_network);
  m.def("softmax", [](const Tensor& logits) { return tensor_to_array(softmax(logits)); });

  py::class_<ProbabilityVector>(m, "ProbabilityVector")
      .def_readonly("probs", &ProbabilityVector::probs)
      .def("log_prob", &ProbabilityVector::log_prob)
      .def("argmax", &ProbabilityVector::argmax);

  py::class_<Oracle>(m, "Oracle")
      .def("query", &Oracle::query)
      .def("query_batch", &Oracle::query_batch)
      .def_property_readonly("total_queries", &Oracle::total_queries)
      .def_property_readonly("overhead_queries", &Oracle::overhead_queries)
      .def_property_readonly("estimator_queries", &Oracle::estimator_queries);

  py::class_<ModelOracle, Oracle>(m, "ModelOracle")
      .def(py::init<const Network&>(), py::arg("net"), py::keep_alive<1, 2>());

  py::class_<AttackGoal>(m, "AttackGoal")
      .def(py::init(&make_goal), py::arg("mode"), py::arg("cls"), py::arg("kappa") = 0.0);

  m.def("targeted_loss", &targeted_loss);
  m.def("untargeted_loss", &untargeted_loss);
  m.def("is_success", &is_success);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_property(
          "solver",
          [](const SolverConfig& c) { return c.solver == SolverKind::adam ? "adam" : "newton"; },
          [](SolverConfig& c, const std::string& v) {
            if (v == "adam") c.solver = SolverKind::adam;
            else if (v == "newton") c.solver = SolverKind::newton;
            else throw std::invalid_argument("solver must be adam or newton");
          })
      .def_property(
          "box_mode",
          [](const SolverConfig& c) {
            return c.box_mode == BoxMode::projection ? "projection" : "tanh";
          },
          [](SolverConfig& c, const std::string& v) {
            if (v == "projection") c.box_mode = BoxMode::projection;
            else if (v == "tanh") c.box_mode = BoxMode::tanh_change;
            else throw std::invalid_argument("box_mode must be projection or tanh");
          })
      .def_readwrite("eta", &SolverConfig::eta)
      .def_readwrite("max_iterations", &SolverConfig::max_iterations)
      .def_readwrite("batch", &SolverConfig::batch)
      .def_readwrite("h", &SolverConfig::h)
      .def_readwrite("early_stop_patience", &SolverConfig::early_stop_patience)
      .def_readwrite("reset_adam_on_first_success", &SolverConfig::reset_adam_on_first_success)
      .def_readwrite("trace_every", &SolverConfig::trace_every);

  py::class_<StageDims>(m, "StageDims")
      .def(py::init([](std::int64_t h, std::int64_t w, std::int64_t c, std::int64_t start) {
             return StageDims{h, w, c, start};
           }),
           py::arg("h"), py::arg("w"), py::arg("c"), py::arg("start_iteration"));

  py::class_<AttackSpaceConfig>(m, "AttackSpaceConfig")
      .def(py::init<>())
      .def_readwrite("stages", &AttackSpaceConfig::stages)
      .def_readwrite("importance_from_stage", &AttackSpaceConfig::importance_from_stage)
      .def_readwrite("importance_refresh_every", &AttackSpaceConfig::importance_refresh_every)
      .def_readwrite("pool_kernel", &AttackSpaceConfig::pool_kernel);

  m.def("full_space_config", &full_space_config, py::arg("image_shape"));

  m.def(
      "solve",
      [](const Tensor& x0, const AttackGoal& goal, double c, const SolverConfig& cfg,
         const AttackSpaceConfig& space_cfg, Oracle& oracle, std::uint64_t seed) {
        Rng rng(seed);
        return result_to_dict(solve(x0, goal, c, cfg, space_cfg, oracle, rng));
      },
      py::arg("x0"), py::arg("goal"), py::arg("c"), py::arg("cfg"), py::arg("space_cfg"),
      py::arg("oracle"), py::arg("seed"));

  m.def(
      "binary_search_c",
      [](const Tensor& x0, const AttackGoal& goal, const SolverConfig& cfg,
         const AttackSpaceConfig& space_cfg, Oracle& oracle, std::uint64_t seed, double c0,
         std::int64_t steps) {
        Rng rng(seed);
        return result_to_dict(binary_search_c(x0, goal, cfg, space_cfg, oracle, rng, c0, steps));
      },
      py::arg("x0"), py::arg("goal"), py::arg("cfg"), py::arg("space_cfg"), py::arg("oracle"),
      py::arg("seed"), py::arg("c0"), py::arg("steps"));

  py::class_<CampaignConfig>(m, "CampaignConfig")
      .def(py::init<>())
      .def("set", &apply_config_override, py::arg("key"), py::arg("value"));

  m.def("load_campaign_config", &load_campaign_config);
  m.def("run_campaign", [](const CampaignConfig& cfg) {
    std::ostringstream log;
    const CampaignReport report = run_campaign(cfg, log);
    py::dict d;
    d["log"] = log.str();
    d["attacks"] = report.rows.size();
    d["successes"] = report.successes();
    d["success_rate"] = report.success_rate();
    d["mean_l2_over_successes"] = report.mean_l2_over_successes();
    d["mean_queries"] = report.mean_queries();
    return d;
  });

#ifdef ZOO_VERSION_INFO
  m.attr("__version__") = ZOO_VERSION_INFO;
#else
  m.attr("__version__") = "dev";
#endif
}
