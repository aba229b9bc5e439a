#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "lfh/bench.hpp"
#include "lfh/controller.hpp"
#include "lfh/datagen.hpp"
#include "lfh/globalplan.hpp"
#include "lfh/io.hpp"
#include "lfh/kinematics.hpp"
#include "lfh/lidar.hpp"
#include "lfh/pipeline.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace lfh;

namespace {

PlannerChoice make_planner(const std::string& kind, const std::string& model_path, const Settings& s) {
  if (kind == "dwa") return DwaPlanner{s.dwa, s.pipeline};
  if (kind == "reference") return ReferencePlanner{0.3, 0.2, s.pipeline};
  if (kind == "lfh") {
    if (model_path.empty()) throw std::invalid_argument("the lfh planner needs a model path");
    return LfhPlanner{load_model(model_path, default_dims(s.pipeline.spec)), s.pipeline};
  }
  throw std::invalid_argument("planner must be lfh, dwa or reference");
}

Settings settings_from(const std::string& config_json) {
  return config_json.empty() ? Settings{} : apply_config_json(config_json);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Learning from Hallucination: simulator, data generation, training and benchmarks";

  py::register_exception<NoPathError>(m, "NoPathError");

  py::class_<Point2>(m, "Point2")
      .def(py::init<double, double>(), "x"_a = 0.0, "y"_a = 0.0)
      .def_readwrite("x", &Point2::x)
      .def_readwrite("y", &Point2::y)
      .def("__repr__", [](const Point2& p) { return "Point2(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")"; });

  py::class_<Pose2D>(m, "Pose2D")
      .def(py::init<double, double, double>(), "x"_a = 0.0, "y"_a = 0.0, "psi"_a = 0.0)
      .def_readwrite("x", &Pose2D::x)
      .def_readwrite("y", &Pose2D::y)
      .def_property("psi", &Pose2D::psi, &Pose2D::set_psi)
      .def("to_world", &Pose2D::to_world)
      .def("to_local", &Pose2D::to_local)
      .def("__repr__", [](const Pose2D& p) {
        return "Pose2D(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ", " + std::to_string(p.psi()) + ")";
      });

  py::class_<Control>(m, "Control")
      .def(py::init<double, double>(), "v"_a = 0.0, "omega"_a = 0.0)
      .def_readwrite("v", &Control::v)
      .def_readwrite("omega", &Control::omega)
      .def(py::self == py::self);

  py::class_<Limits>(m, "Limits")
      .def(py::init<>())
      .def_readwrite("v_min", &Limits::v_min)
      .def_readwrite("v_max", &Limits::v_max)
      .def_readwrite("omega_max", &Limits::omega_max)
      .def("clamp", &Limits::clamp);

  py::class_<Footprint>(m, "Footprint")
      .def(py::init<>())
      .def_readwrite("length", &Footprint::length)
      .def_readwrite("half_width", &Footprint::half_width);

  py::class_<ScanSpec>(m, "ScanSpec")
      .def(py::init<>())
      .def_readwrite("angle_min", &ScanSpec::angle_min)
      .def_readwrite("increment", &ScanSpec::increment)
      .def_readwrite("beam_count", &ScanSpec::beam_count)
      .def_readwrite("max_range", &ScanSpec::max_range)
      .def("beam_angle", &ScanSpec::beam_angle);

  py::class_<Scan>(m, "Scan")
      .def_readonly("spec", &Scan::spec)
      .def_readonly("ranges", &Scan::ranges)
      .def("__len__", [](const Scan& s) { return s.ranges.size(); });

  m.def("step", &step, "pose"_a, "control"_a, "dt"_a = kControlDt, "Exact unicycle step");
  m.def("angle_to_beam", &angle_to_beam, "theta"_a, "spec"_a = ScanSpec{});

  py::class_<Course>(m, "Course")
      .def_readonly("start", &Course::start)
      .def_readonly("goal", &Course::goal)
      .def_readonly("extent_w", &Course::extent_w)
      .def_readonly("extent_h", &Course::extent_h)
      .def("to_json", [](const Course& c) { return course_to_json(c); })
      .def_static("from_json", [](const std::string& s) { return course_from_json(s); })
      .def("scan", [](const Course& c, const Pose2D& pose) { return raycast_grid(c.grid, pose, ScanSpec{}); },
           "LiDAR scan of the course from `pose`")
      .def("collides", [](const Course& c, const Pose2D& pose) { return footprint_collides(c.grid, pose, Footprint{}); })
      .def("clearance", [](const Course& c, const Point2& p) { return clearance(c.grid, p); });

  m.def("generate_course",
        [](std::uint64_t seed, double ratio, int segments) { return generate_course(seed, ratio, Footprint{}, segments); },
        "seed"_a, "clearance_ratio"_a = 1.3, "segments"_a = 7);

  py::class_<TrajectoryLog>(m, "TrajectoryLog")
      .def_readonly("dt", &TrajectoryLog::dt)
      .def("__len__", [](const TrajectoryLog& l) { return l.entries.size(); })
      .def("poses", [](const TrajectoryLog& l) {
        std::vector<Pose2D> out;
        for (const auto& e : l.entries) out.push_back(e.pose);
        return out;
      })
      .def("controls", [](const TrajectoryLog& l) {
        std::vector<Control> out;
        for (const auto& e : l.entries) out.push_back(e.control);
        return out;
      })
      .def("save", [](const TrajectoryLog& l, const std::filesystem::path& p) { save_log(l, p); });

  m.def("collect",
        [](double duration, std::uint64_t seed) { return collect(duration, kControlDt, random_walk_policy(), seed); },
        "duration"_a, "seed"_a, "Random-walk exploration in open space");

  py::class_<Dataset>(m, "Dataset")
      .def("__len__", [](const Dataset& d) { return d.samples.size(); })
      .def("scan", [](const Dataset& d, std::size_t i) { return d.samples.at(i).scan; })
      .def("goal", [](const Dataset& d, std::size_t i) { return d.samples.at(i).goal; })
      .def("label", [](const Dataset& d, std::size_t i) {
        const auto& s = d.samples.at(i);
        return py::make_tuple(s.label_v, s.label_omega);
      })
      .def("save", [](const Dataset& d, const std::filesystem::path& p) { save_dataset(d, p); });

  m.def("build_dataset", [](const TrajectoryLog& log, int window) {
    DatasetParams p;
    p.window = window;
    return build_dataset(log, p);
  }, "log"_a, "window"_a = 100);
  m.def("dataset_size", &dataset_size, "length"_a, "window"_a = 100);

  py::class_<MLPParams>(m, "MLPParams")
      .def("dims", &MLPParams::dims)
      .def("save", [](const MLPParams& p, const std::filesystem::path& f) { save_model(p, f); });
  m.def("load_model", [](const std::filesystem::path& f) { return load_model(f); });
  m.def("train", [](const Dataset& ds, int epochs, double lr, int batch, std::uint64_t seed) {
    TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.learning_rate = lr;
    cfg.batch_size = batch;
    cfg.seed = seed;
    py::gil_scoped_release release;
    TrainResult r = train(ds, cfg);
    return py::make_tuple(std::move(r.params), std::move(r.epoch_loss));
  }, "dataset"_a, "epochs"_a = 60, "lr"_a = 0.01, "batch"_a = 32, "seed"_a = 0,
        "Returns (params, per-epoch loss)");
  m.def("mse", [](const MLPParams& p, const Dataset& ds) { return loss(p, make_batch(ds)); });
  m.def("predict", [](const MLPParams& p, const Scan& scan, const Control& current, const Point2& goal) {
    return predict(p, scan, current, goal);
  });

  m.def("estimate_safety", [](const Control& u, const Scan& scan, std::uint64_t seed) {
    return estimate_safety(u, scan, Footprint{}, SafetyConfig{}, seed);
  }, "u"_a, "scan"_a, "seed"_a = 0);
  m.def("modulation_factor", [](double p) { return modulation_factor(p); }, "p_safe"_a);
  m.def("savgol_filter", [](const std::vector<double>& v, int window, int order) {
    return savgol_filter(std::span<const double>(v), window, order);
  }, "values"_a, "window"_a = kSavgolWindow, "polyorder"_a = kSavgolOrder);

  py::class_<TrialResult>(m, "TrialResult")
      .def_property_readonly("outcome", [](const TrialResult& r) { return to_string(r.outcome); })
      .def_readonly("collisions", &TrialResult::collision_count)
      .def_readonly("time_s", &TrialResult::traversal_time)
      .def_readonly("seed", &TrialResult::seed);

  m.def("run_trial", [](const Course& c, const std::string& planner, std::uint64_t seed, const std::string& model,
                        double timeout, const std::string& config) {
    const PlannerChoice p = make_planner(planner, model, settings_from(config));
    TrialOptions opts;
    opts.timeout = timeout;
    py::gil_scoped_release release;
    return run_trial(c, p, seed, opts);
  }, "course"_a, "planner"_a, "seed"_a, "model"_a = "", "timeout"_a = 200.0, "config"_a = "");

  m.def("bench_csv", [](const std::vector<Course>& courses, const std::string& planner, int trials,
                        std::uint64_t seed, const std::string& model, double timeout, const std::string& config) {
    const PlannerChoice p = make_planner(planner, model, settings_from(config));
    TrialOptions opts;
    opts.timeout = timeout;
    std::vector<TrialResult> r;
    {
      py::gil_scoped_release release;
      r = run_trials(courses, p, trials, seed, opts);
    }
    return results_csv(planner, r);
  }, "courses"_a, "planner"_a, "trials"_a, "seed"_a = 0, "model"_a = "", "timeout"_a = 200.0, "config"_a = "",
        "results.csv text: planner, seed, outcome, collisions, time_s");

  m.def("complexity", [](int n, int x) {
    const ComplexityReport r = complexity_enumerate(n, x);
    py::dict d;
    // Python ints are arbitrary precision, so go through the decimal string.
    d["configurations"] = py::int_(py::str(r.config_count.str()));
    d["trajectories"] = py::int_(py::str(r.trajectory_count.str()));
    d["enumerated"] = r.enumerated_count;
    d["exhaustive"] = r.exhaustive;
    return d;
  }, "n"_a, "x"_a);
}
