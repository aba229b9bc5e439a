#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "lfh/bench.hpp"
#include "lfh/controller.hpp"
#include "lfh/datagen.hpp"
#include "lfh/io.hpp"

namespace fs = std::filesystem;
using namespace lfh;

namespace {

Settings settings_from(const std::string& config) {
  return config.empty() ? Settings{} : load_config(config);
}

std::string window_mode = "forward";

DatasetParams dataset_params(const Settings& s, std::uint64_t seed, double dt) {
  DatasetParams p;
  p.window_mode = window_mode == "centered" ? WindowMode::Centered : WindowMode::Forward;
  p.spec = s.pipeline.spec;
  p.limits = s.pipeline.limits;
  p.goal_dist = s.pipeline.goal_dist;
  p.offset = s.pipeline.corridor_offset;
  p.seed = seed;
  p.dt = dt;
  return p;
}

// A dataset file starts with a meta line holding "spec"; anything else is read as a log.
Dataset load_training_data(const fs::path& path, const Settings& s, std::uint64_t seed) {
  std::ifstream in(path);
  std::string first;
  if (!in || !std::getline(in, first)) throw std::runtime_error("cannot read " + path.string());
  if (nlohmann::json::parse(first).contains("spec")) return load_dataset(path);
  const TrajectoryLog log = load_log(path);
  return build_dataset(log, dataset_params(s, seed, log.dt));
}

std::vector<Course> load_courses(const fs::path& dir, const Footprint& fp) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Course> courses;
  for (const auto& f : files) courses.push_back(load_course(f, fp));
  if (courses.empty()) throw std::runtime_error("no course files (*.json) in " + dir.string());
  return courses;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning from Hallucination: data collection, training, deployment and benchmarks"};
  app.require_subcommand(1);
  std::string config;
  app.add_option("--config", config, "JSON file overriding the default settings")
      ->check(CLI::ExistingFile);

  // collect
  auto* collect_cmd = app.add_subcommand("collect", "random-walk exploration in open space");
  double duration = 240.0;
  std::uint64_t seed = 0;
  std::string out_path, dataset_out;
  collect_cmd->add_option("--duration", duration, "seconds of simulated driving")->required();
  collect_cmd->add_option("--seed", seed, "random seed")->required();
  collect_cmd->add_option("--out", out_path, "trajectory log (JSONL)")->required();
  collect_cmd->add_option("--dataset", dataset_out, "also write the hallucinated dataset here");
  RandomWalkConfig walk;
  collect_cmd->add_option("--sigma-v", walk.sigma_v, "random-walk step std of v")->capture_default_str();
  collect_cmd->add_option("--sigma-w", walk.sigma_omega, "random-walk step std of omega")->capture_default_str();
  for (auto* cmd : {collect_cmd}) {
    cmd->add_option("--window-mode", window_mode, "trajectory window: forward or centered")
        ->check(CLI::IsMember({"forward", "centered"}));
  }

  // dataset
  auto* dataset_cmd = app.add_subcommand("dataset", "hallucinate a training set from a trajectory log");
  std::string log_path;
  dataset_cmd->add_option("--log", log_path, "trajectory log")->required()->check(CLI::ExistingFile);
  dataset_cmd->add_option("--out", out_path, "dataset (JSONL)")->required();
  dataset_cmd->add_option("--seed", seed, "seed recorded in the dataset");
  dataset_cmd->add_option("--window-mode", window_mode, "trajectory window: forward or centered")
      ->check(CLI::IsMember({"forward", "centered"}));

  // train
  auto* train_cmd = app.add_subcommand("train", "fit the local planner network");
  std::string data_path;
  TrainConfig tcfg;
  train_cmd->add_option("--data", data_path, "dataset or trajectory log")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--epochs", tcfg.epochs, "epochs")->capture_default_str();
  train_cmd->add_option("--lr", tcfg.learning_rate, "learning rate")->capture_default_str();
  train_cmd->add_option("--batch", tcfg.batch_size, "mini-batch size")->capture_default_str();
  train_cmd->add_option("--seed", seed, "initialization and shuffling seed");
  train_cmd->add_option("--out", out_path, "model file (JSON)")->required();

  // course
  auto* course_cmd = app.add_subcommand("course", "generate serpentine evaluation courses");
  double ratio = 1.3;
  int segments = 7, count = 1;
  course_cmd->add_option("--seed", seed, "first course seed")->required();
  course_cmd->add_option("--ratio", ratio, "passage width over robot width")->capture_default_str();
  course_cmd->add_option("--segments", segments, "straight sections")->capture_default_str();
  course_cmd->add_option("--count", count, "number of courses (seeds seed, seed+1, ...)")->capture_default_str();
  course_cmd->add_option("--out", out_path, "course file, or a directory when --count > 1")->required();

  // run
  auto* run_cmd = app.add_subcommand("run", "one LfH trial on a course");
  std::string course_path, model_path, diag_path, svg_path;
  double timeout = 200.0;
  run_cmd->add_option("--course", course_path, "course file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--model", model_path, "model file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", seed, "trial seed")->required();
  run_cmd->add_option("--diag", diag_path, "per-tick diagnostics (JSONL)");
  run_cmd->add_option("--svg", svg_path, "trajectory plot");
  run_cmd->add_option("--timeout", timeout, "seconds")->capture_default_str();

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "repeated trials of one planner");
  std::string planner, courses_dir;
  int trials = 10, threads = 0;
  bench_cmd->add_option("--planner", planner, "lfh, dwa, or reference (pure pursuit inside the LfH safety layer)")
      ->required()
      ->check(CLI::IsMember({"lfh", "dwa", "reference"}));
  bench_cmd->add_option("--courses", courses_dir, "directory of course files")->required()->check(CLI::ExistingDirectory);
  bench_cmd->add_option("--trials", trials, "number of trials")->capture_default_str();
  bench_cmd->add_option("--model", model_path, "model file (lfh)")->check(CLI::ExistingFile);
  bench_cmd->add_option("--seed", seed, "seed of the first trial");
  bench_cmd->add_option("--timeout", timeout, "seconds per trial")->capture_default_str();
  bench_cmd->add_option("--threads", threads, "worker threads, 0 for all cores")->capture_default_str();
  bench_cmd->add_option("--out", out_path, "results CSV")->required();

  // complexity
  auto* cx_cmd = app.add_subcommand("complexity", "count obstacle configurations and plans");
  int n = 3, x = 2;
  cx_cmd->add_option("--n", n, "horizon (1..20)")->required();
  cx_cmd->add_option("--x", x, "branching (2..4)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const Settings s = settings_from(config);
    const PipelineConfig& pc = s.pipeline;

    if (*collect_cmd) {
      const TrajectoryLog log = collect(duration, kControlDt, random_walk_policy({walk.sigma_v, walk.sigma_omega, pc.limits}), seed);
      save_log(log, out_path);
      std::cout << "wrote " << log.entries.size() << " entries to " << out_path << "\n";
      if (!dataset_out.empty()) {
        const Dataset ds = build_dataset(log, dataset_params(s, seed, log.dt));
        save_dataset(ds, dataset_out);
        std::cout << "wrote " << ds.samples.size() << " samples to " << dataset_out << "\n";
      }
    } else if (*dataset_cmd) {
      const TrajectoryLog log = load_log(log_path);
      const Dataset ds = build_dataset(log, dataset_params(s, seed, log.dt));
      save_dataset(ds, out_path);
      std::cout << "wrote " << ds.samples.size() << " samples to " << out_path << "\n";
    } else if (*train_cmd) {
      const Dataset ds = load_training_data(data_path, s, seed);
      tcfg.seed = seed;
      const auto t0 = std::chrono::steady_clock::now();
      const TrainResult r = train(ds, tcfg);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      save_model(r.params, out_path);
      const double mse = loss(r.params, make_batch(ds));
      std::printf("%zu samples, %d epochs, %.1f s, final mse %.6f -> %s\n", ds.samples.size(), tcfg.epochs, secs, mse,
                  out_path.c_str());
    } else if (*course_cmd) {
      if (count < 1) throw std::invalid_argument("--count must be >= 1");
      if (count == 1) {
        save_course(generate_course(seed, ratio, pc.footprint, segments), out_path);
        std::cout << "wrote " << out_path << "\n";
      } else {
        fs::create_directories(out_path);
        for (int i = 0; i < count; ++i) {
          char name[64];
          std::snprintf(name, sizeof name, "course_%03d.json", i);
          save_course(generate_course(seed + static_cast<std::uint64_t>(i), ratio, pc.footprint, segments),
                      fs::path(out_path) / name);
        }
        std::cout << "wrote " << count << " courses to " << out_path << "\n";
      }
    } else if (*run_cmd) {
      const Course course = load_course(course_path, pc.footprint);
      LfhPlanner p{load_model(model_path, default_dims(pc.spec)), pc};
      std::ofstream diag;
      if (!diag_path.empty()) {
        diag.open(diag_path);
        if (!diag) throw std::runtime_error("cannot open " + diag_path);
      }
      std::vector<Pose2D> traj{course.start};
      std::vector<Point2> hits;
      bool was_contact = false;
      TrialOptions opts;
      opts.timeout = timeout;
      opts.on_tick = [&](const TickRecord& rec) {
        traj.push_back(rec.pose);
        if (rec.contact && !was_contact) hits.push_back(rec.pose.position());
        was_contact = rec.contact;
        if (diag.is_open()) diag << tick_json(rec) << "\n";
      };
      const TrialResult r = run_trial(course, p, seed, opts);
      if (!svg_path.empty()) write_text(svg_path, course_svg(course, traj, hits, pc.footprint));
      std::printf("%s collisions=%d time_s=%s\n", to_string(r.outcome).c_str(), r.collision_count,
                  std::isinf(r.traversal_time) ? "inf" : std::to_string(r.traversal_time).c_str());
    } else if (*bench_cmd) {
      const std::vector<Course> courses = load_courses(courses_dir, pc.footprint);
      PlannerChoice choice = DwaPlanner{s.dwa, pc};
      if (planner == "reference") choice = ReferencePlanner{0.3, 0.2, pc};
      if (planner == "lfh") {
        if (model_path.empty()) throw std::invalid_argument("--model is required for the lfh planner");
        choice = LfhPlanner{load_model(model_path, default_dims(pc.spec)), pc};
      }
      TrialOptions opts;
      opts.timeout = timeout;
      const auto results = run_trials(courses, choice, trials, seed, opts, threads);
      write_text(out_path, results_csv(planner, results));
      std::cout << report_table(planner, report(results));
    } else if (*cx_cmd) {
      const ComplexityReport r = complexity_enumerate(n, x);
      std::cout << "n=" << r.n << " x=" << r.x << "\n"
                << "configurations 2^(n^2) = " << r.config_count << "\n"
                << "trajectories x^n = " << r.trajectory_count << "\n"
                << "enumerated = " << r.enumerated_count << (r.exhaustive ? "" : " (per-depth subtree reuse)") << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
