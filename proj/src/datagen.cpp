#include "lfh/datagen.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

namespace lfh {

using nlohmann::json;

Control random_policy(Rng& rng, Control previous, const RandomWalkConfig& cfg) {
  std::normal_distribution<double> dv(0.0, cfg.sigma_v);
  std::normal_distribution<double> dw(0.0, cfg.sigma_omega);
  const double v = previous.v + dv(rng);
  const double w = previous.omega + dw(rng);
  return cfg.limits.clamp({v, w});
}

Policy random_walk_policy(RandomWalkConfig cfg) {
  if (cfg.hold_steps < 1) throw std::invalid_argument("random_walk_policy: hold_steps must be >= 1");
  return [cfg, k = 0](Rng& rng, const Control& previous) mutable {
    return k++ % cfg.hold_steps == 0 ? random_policy(rng, previous, cfg) : previous;
  };
}

TrajectoryLog collect(double duration, double dt, const Policy& policy, std::uint64_t seed) {
  if (!(duration > 0.0) || !(dt > 0.0)) throw std::invalid_argument("collect: duration and dt must be positive");
  const auto steps = static_cast<std::size_t>(std::floor(duration / dt + 1e-9));
  Rng rng(seed);
  TrajectoryLog log;
  log.dt = dt;
  log.entries.reserve(steps);
  Pose2D pose;
  Control previous;
  for (std::size_t i = 0; i < steps; ++i) {
    const Control u = policy(rng, previous);
    log.entries.push_back({pose, u});
    pose = step(pose, u, dt);
    previous = u;
  }
  return log;
}

std::size_t dataset_size(std::size_t length, int window) {
  const auto w = static_cast<std::size_t>(window);
  return length > w + 1 ? length - w - 1 : 0;
}

std::vector<Point2> window_centerline(const TrajectoryLog& log, std::size_t index, const DatasetParams& params) {
  const std::size_t n = log.entries.size();
  const auto w = static_cast<std::size_t>(params.window);
  std::size_t first = index;
  std::size_t last = index + w;
  if (params.window_mode == WindowMode::Centered) {
    first = index >= w / 2 ? index - w / 2 : 0;
    last = index + (w - w / 2);
  }
  last = std::min(last, n - 1);
  const Pose2D& frame = log.entries[index].pose;
  std::vector<Point2> pts;
  pts.reserve(last - first + 1);
  for (std::size_t j = first; j <= last; ++j) {
    const Point2 p = frame.to_local(log.entries[j].pose.position());
    if (pts.empty() || distance(p, pts.back()) > 1e-9) pts.push_back(p);
  }
  if (pts.size() < 2) {
    // Turning on the spot: keep a minimal straight corridor along the heading.
    pts.assign({{0.0, 0.0}, {0.01, 0.0}});
  }
  return pts;
}

Point2 goal_along(std::span<const Point2> centerline, double dist) {
  double s = 0.0;
  for (std::size_t i = 1; i < centerline.size(); ++i) {
    s += distance(centerline[i - 1], centerline[i]);
    // slack for summation error, so 80 steps of 0.0125 count as 1 m
    if (s >= dist - 1e-9) return centerline[i];
  }
  return centerline.back();
}

Dataset build_dataset(const TrajectoryLog& log, const DatasetParams& params) {
  params.spec.validate();
  if (params.window < 1) throw std::invalid_argument("build_dataset: window must be positive");
  if (!(params.goal_dist > 0.0)) throw std::invalid_argument("build_dataset: goal_dist must be positive");
  if (log.entries.size() <= static_cast<std::size_t>(params.window)) {
    throw std::invalid_argument("build_dataset: log is shorter than the window");
  }
  Dataset ds;
  ds.meta = params;
  ds.meta.dt = log.dt;
  const std::size_t count = dataset_size(log.entries.size(), params.window);
  ds.samples.reserve(params.mirror ? 2 * count : count);
  const Pose2D origin;
  for (std::size_t i = 0; i < count; ++i) {
    const std::vector<Point2> line = window_centerline(log, i, params);
    const Corridor corridor = corridor_from_centerline(line, params.offset);
    const Scan scan = hallucinate_scan(corridor, origin, params.spec);

    // In centered mode the goal is measured from the robot, i.e. from the origin onwards.
    std::span<const Point2> ahead(line);
    if (params.window_mode == WindowMode::Centered) {
      std::size_t k = 0;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < line.size(); ++j) {
        if (line[j].norm() < best) best = line[j].norm(), k = j;
      }
      ahead = ahead.subspan(k);
    }
    const Point2 goal = goal_along(ahead, params.goal_dist);
    const Control current = i == 0 ? Control{} : log.entries[i - 1].control;
    const Control label = log.entries[i].control;

    TrainingSample s;
    s.scan.resize(scan.ranges.size());
    for (std::size_t k = 0; k < scan.ranges.size(); ++k) s.scan[k] = normalize_range(scan.ranges[k], params.spec);
    s.v = normalize_v(current.v, params.limits);
    s.omega = normalize_omega(current.omega, params.limits);
    s.goal = (1.0 / params.goal_dist) * goal;
    s.label_v = normalize_v(label.v, params.limits);
    s.label_omega = normalize_omega(label.omega, params.limits);
    ds.samples.push_back(std::move(s));
  }
  if (params.mirror) {
    for (std::size_t i = 0; i < count; ++i) ds.samples.push_back(mirrored(ds.samples[i], params.spec));
  }
  return ds;
}

TrainingSample mirrored(const TrainingSample& s, const ScanSpec& spec) {
  if (s.scan.size() != static_cast<std::size_t>(spec.beam_count)) {
    throw std::invalid_argument("mirrored: scan size does not match spec");
  }
  TrainingSample m = s;
  for (int k = 0; k < spec.beam_count; ++k) m.scan[k] = s.scan[angle_to_beam(-spec.beam_angle(k), spec)];
  m.omega = -s.omega;
  m.goal.y = -s.goal.y;
  m.label_omega = -s.label_omega;
  return m;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json spec_to_json(const ScanSpec& s) {
  return {{"angle_min", s.angle_min}, {"angle_max", s.angle_max}, {"increment", s.increment},
          {"beam_count", s.beam_count}, {"max_range", s.max_range}};
}

ScanSpec spec_from_json(const json& j) {
  ScanSpec s;
  s.angle_min = j.at("angle_min").get<double>();
  s.angle_max = j.at("angle_max").get<double>();
  s.increment = j.at("increment").get<double>();
  s.beam_count = j.at("beam_count").get<int>();
  s.max_range = j.at("max_range").get<double>();
  return s;
}

json parse_line(const std::string& text, std::size_t line) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(line, e.what());
  }
}

template <typename F>
auto field(std::size_t line, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ParseError(line, e.what());
  }
}

}  // namespace

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const DatasetParams& m = ds.meta;
  json meta = {{"spec", spec_to_json(m.spec)},
               {"limits", {m.limits.v_min, m.limits.v_max, m.limits.omega_max}},
               {"window", m.window},
               {"window_mode", m.window_mode == WindowMode::Forward ? "forward" : "centered"},
               {"mirror", m.mirror},
               {"goal_dist", m.goal_dist},
               {"offset", m.offset},
               {"seed", m.seed},
               {"dt", m.dt},
               {"count", ds.samples.size()}};
  out << meta.dump() << '\n';
  for (const TrainingSample& s : ds.samples) {
    json j = {{"scan", s.scan},
              {"v", s.v},
              {"w", s.omega},
              {"goal", {s.goal.x, s.goal.y}},
              {"label", {s.label_v, s.label_omega}}};
    out << j.dump() << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string text;
  if (!std::getline(in, text)) throw ParseError(1, "missing meta line");
  const json meta = parse_line(text, 1);
  Dataset ds;
  std::size_t expected = 0;
  field(1, [&] {
    DatasetParams& m = ds.meta;
    m.spec = spec_from_json(meta.at("spec"));
    const auto lim = meta.at("limits").get<std::vector<double>>();
    if (lim.size() != 3) throw ParseError(1, "limits must have three entries");
    m.limits = {lim[0], lim[1], lim[2]};
    m.window = meta.at("window").get<int>();
    const std::string mode = meta.at("window_mode").get<std::string>();
    if (mode != "forward" && mode != "centered") throw ParseError(1, "unknown window_mode " + mode);
    m.window_mode = mode == "forward" ? WindowMode::Forward : WindowMode::Centered;
    m.mirror = meta.value("mirror", false);
    m.goal_dist = meta.at("goal_dist").get<double>();
    m.offset = meta.at("offset").get<double>();
    m.seed = meta.at("seed").get<std::uint64_t>();
    m.dt = meta.at("dt").get<double>();
    expected = meta.at("count").get<std::size_t>();
    return 0;
  });
  ds.samples.reserve(expected);
  std::size_t line = 1;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    const json j = parse_line(text, line);
    TrainingSample s;
    field(line, [&] {
      s.scan = j.at("scan").get<std::vector<double>>();
      s.v = j.at("v").get<double>();
      s.omega = j.at("w").get<double>();
      const auto g = j.at("goal").get<std::vector<double>>();
      const auto l = j.at("label").get<std::vector<double>>();
      if (g.size() != 2 || l.size() != 2) throw ParseError(line, "goal and label must have two entries");
      s.goal = {g[0], g[1]};
      s.label_v = l[0];
      s.label_omega = l[1];
      return 0;
    });
    if (s.scan.size() != static_cast<std::size_t>(ds.meta.spec.beam_count)) {
      throw ParseError(line, "scan length does not match beam_count");
    }
    ds.samples.push_back(std::move(s));
  }
  if (ds.samples.size() != expected) {
    throw ParseError(line, "expected " + std::to_string(expected) + " samples, found " +
                               std::to_string(ds.samples.size()));
  }
  return ds;
}

void save_log(const TrajectoryLog& log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << json{{"dt", log.dt}, {"count", log.entries.size()}}.dump() << '\n';
  for (const LogEntry& e : log.entries) {
    out << json{{"pose", {e.pose.x, e.pose.y, e.pose.psi()}}, {"control", {e.control.v, e.control.omega}}}.dump()
        << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

TrajectoryLog load_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string text;
  if (!std::getline(in, text)) throw ParseError(1, "missing header line");
  const json header = parse_line(text, 1);
  TrajectoryLog log;
  std::size_t expected = 0;
  field(1, [&] {
    log.dt = header.at("dt").get<double>();
    expected = header.at("count").get<std::size_t>();
    return 0;
  });
  std::size_t line = 1;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    const json j = parse_line(text, line);
    field(line, [&] {
      const auto p = j.at("pose").get<std::vector<double>>();
      const auto c = j.at("control").get<std::vector<double>>();
      if (p.size() != 3 || c.size() != 2) throw ParseError(line, "malformed log entry");
      log.entries.push_back({Pose2D{p[0], p[1], p[2]}, Control{c[0], c[1]}});
      return 0;
    });
  }
  if (log.entries.size() != expected) throw ParseError(line, "log entry count mismatch");
  return log;
}

}  // namespace lfh
