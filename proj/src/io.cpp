#include "lfh/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>
#include <variant>

namespace lfh {

using json = nlohmann::json;

namespace {

json pose_json(const Pose2D& p) { return {p.x, p.y, p.psi()}; }

Pose2D pose_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("pose must be [x, y, psi]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

std::string course_to_json(const Course& c) {
  json rects = json::array();
  for (const Rect& r : c.rects) rects.push_back({r.x0, r.y0, r.x1, r.y1});
  const json j = {{"resolution", c.resolution},
                  {"extent", {c.extent_w, c.extent_h}},
                  {"rects", rects},
                  {"start", pose_json(c.start)},
                  {"goal", pose_json(c.goal)}};
  return j.dump() + "\n";
}

Course course_from_json(const std::string& text, const Footprint& fp) {
  json j;
  try {
    j = json::parse(text);
    std::vector<Rect> rects;
    for (const json& r : j.at("rects")) {
      if (r.size() != 4) throw std::invalid_argument("rect must have four numbers");
      rects.push_back({r[0].get<double>(), r[1].get<double>(), r[2].get<double>(), r[3].get<double>()});
    }
    const json& ext = j.at("extent");
    if (ext.size() != 2) throw std::invalid_argument("extent must be [w, h]");
    return Course::build(std::move(rects), j.at("resolution").get<double>(), ext[0].get<double>(),
                         ext[1].get<double>(), pose_from(j.at("start")), pose_from(j.at("goal")), fp);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed course: ") + e.what());
  }
}

void save_course(const Course& course, const std::filesystem::path& path) { write_file(path, course_to_json(course)); }

Course load_course(const std::filesystem::path& path, const Footprint& fp) {
  return course_from_json(read_file(path), fp);
}

// ---------------------------------------------------------------------------

namespace {

using FieldRef = std::variant<double*, int*>;

void apply_section(const json& obj, const std::string& section, const std::map<std::string, FieldRef>& fields) {
  if (!obj.is_object()) throw std::invalid_argument("config section '" + section + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    const auto it = fields.find(key);
    if (it == fields.end()) throw std::invalid_argument("unknown config key " + section + "." + key);
    if (!value.is_number()) throw std::invalid_argument("config key " + section + "." + key + " must be a number");
    if (auto* d = std::get_if<double*>(&it->second)) {
      **d = value.get<double>();
    } else {
      if (!value.is_number_integer()) throw std::invalid_argument(section + "." + key + " must be an integer");
      *std::get<int*>(it->second) = value.get<int>();
    }
  }
}

}  // namespace

Settings apply_config_json(const std::string& text, Settings s) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed config: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  PipelineConfig& p = s.pipeline;
  SafetyConfig& sc = p.safety;
  for (const auto& [section, obj] : j.items()) {
    if (section == "safety") {
      apply_section(obj, section,
                    {{"noise_frac", &sc.noise_frac},
                     {"noise_floor", &sc.noise_floor},
                     {"samples", &sc.samples},
                     {"horizon", &sc.horizon},
                     {"mpc_dt", &sc.mpc_dt},
                     {"perimeter_points", &sc.perimeter_points},
                     {"w1", &sc.w1},
                     {"w2", &sc.w2},
                     {"omega_deadband", &sc.omega_deadband},
                     {"heading_threshold", &sc.heading_threshold},
                     {"pid_gain", &sc.pid_gain},
                     {"recovery_iters", &sc.recovery_iters},
                     {"recovery_rate", &sc.recovery_rate},
                     {"backup_v", &sc.backup_v}});
    } else if (section == "limits") {
      apply_section(obj, section,
                    {{"v_min", &p.limits.v_min}, {"v_max", &p.limits.v_max}, {"omega_max", &p.limits.omega_max}});
    } else if (section == "scan") {
      apply_section(obj, section,
                    {{"angle_min", &p.spec.angle_min},
                     {"angle_max", &p.spec.angle_max},
                     {"increment", &p.spec.increment},
                     {"beam_count", &p.spec.beam_count},
                     {"max_range", &p.spec.max_range}});
    } else if (section == "footprint") {
      apply_section(obj, section, {{"length", &p.footprint.length}, {"half_width", &p.footprint.half_width}});
    } else if (section == "pipeline") {
      json rest = obj;
      if (rest.is_object() && rest.contains("inflation_ladder")) {
        const json ladder = rest["inflation_ladder"];
        rest.erase("inflation_ladder");
        if (!ladder.is_array() || ladder.empty()) throw std::invalid_argument("inflation_ladder must be a non-empty array");
        p.inflation_ladder = ladder.get<std::vector<double>>();
      }
      apply_section(rest, section,
                    {{"goal_dist", &p.goal_dist},
                     {"corridor_offset", &p.corridor_offset},
                     {"corridor_length", &p.corridor_length},
                     {"corridor_behind", &p.corridor_behind},
                     {"clearance_weight", &p.clearance.weight},
                     {"clearance_cap", &p.clearance.cap}});
    } else if (section == "dwa") {
      apply_section(obj, section,
                    {{"max_vel_x", &s.dwa.max_vel_x},
                     {"max_vel_theta", &s.dwa.max_vel_theta},
                     {"vx_samples", &s.dwa.vx_samples},
                     {"vtheta_samples", &s.dwa.vtheta_samples},
                     {"occdist_scale", &s.dwa.occdist_scale},
                     {"pdist_scale", &s.dwa.pdist_scale},
                     {"gdist_scale", &s.dwa.gdist_scale},
                     {"local_goal_dist", &s.dwa.local_goal_dist}});
    } else {
      throw std::invalid_argument("unknown config section " + section);
    }
  }
  sc.validate();
  p.limits.validate();
  p.spec.validate();
  p.footprint.validate();
  s.dwa.validate();
  return s;
}

Settings load_config(const std::filesystem::path& path, Settings base) {
  return apply_config_json(read_file(path), std::move(base));
}

// ---------------------------------------------------------------------------

std::string tick_json(const TickRecord& rec) {
  json j = {{"tick", rec.tick},
            {"pose", pose_json(rec.pose)},
            {"control", {rec.control.v, rec.control.omega}},
            {"contact", rec.contact},
            {"stuck", rec.stuck}};
  if (rec.diag) {
    const Diagnostics& d = *rec.diag;
    j["mode"] = to_string(d.mode);
    j["recovery_stage"] = d.recovery_stage;
    j["p_safety"] = d.p_safety;
    j["tangent_error"] = d.tangent_error;
    j["modulation"] = d.modulation;
    j["learned"] = {d.learned.v, d.learned.omega};
    j["candidate"] = {d.candidate.v, d.candidate.omega};
    j["local_goal"] = {d.local_goal.x, d.local_goal.y};
    j["hallucinated"] = d.hallucinated;
    j["inflation"] = d.inflation;
  }
  return j.dump();
}

std::string course_svg(const Course& course, std::span<const Pose2D> trajectory, std::span<const Point2> collisions,
                       const Footprint& fp) {
  const double scale = 100.0;  // px per meter
  const double w = course.extent_w * scale, h = course.extent_h * scale;
  std::string out;
  char buf[256];
  auto X = [&](double x) { return x * scale; };
  auto Y = [&](double y) { return h - y * scale; };
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.2f %.2f\">\n", w,
                h, w, h);
  out += buf;
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n<g fill=\"#444\">\n";
  for (const Rect& r : course.rects) {
    std::snprintf(buf, sizeof buf, "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\"/>\n", X(r.x0), Y(r.y1),
                  (r.x1 - r.x0) * scale, (r.y1 - r.y0) * scale);
    out += buf;
  }
  out += "</g>\n";
  auto footprint_poly = [&](const Pose2D& p, const char* style) {
    const double hl = fp.half_length(), hw = fp.half_width;
    const Point2 c[4] = {p.to_world({hl, hw}), p.to_world({-hl, hw}), p.to_world({-hl, -hw}), p.to_world({hl, -hw})};
    std::snprintf(buf, sizeof buf, "<polygon points=\"%.2f,%.2f %.2f,%.2f %.2f,%.2f %.2f,%.2f\" %s/>\n", X(c[0].x),
                  Y(c[0].y), X(c[1].x), Y(c[1].y), X(c[2].x), Y(c[2].y), X(c[3].x), Y(c[3].y), style);
    out += buf;
  };
  footprint_poly(course.start, "fill=\"none\" stroke=\"#2a7\" stroke-width=\"1.5\"");
  footprint_poly(course.goal, "fill=\"none\" stroke=\"#27a\" stroke-width=\"1.5\"");
  if (!trajectory.empty()) {
    out += "<polyline fill=\"none\" stroke=\"#d33\" stroke-width=\"1.5\" points=\"";
    for (const Pose2D& p : trajectory) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", X(p.x), Y(p.y));
      out += buf;
    }
    out += "\"/>\n";
  }
  for (const Point2& c : collisions) {
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"6\" fill=\"none\" stroke=\"#f80\" stroke-width=\"2\"/>\n",
                  X(c.x), Y(c.y));
    out += buf;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace lfh
