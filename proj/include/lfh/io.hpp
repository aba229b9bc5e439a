#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "lfh/bench.hpp"
#include "lfh/pipeline.hpp"
#include "lfh/world.hpp"

namespace lfh {

/// Course file: {"resolution", "extent": [w, h], "rects": [[x0, y0, x1, y1], ...],
/// "start": [x, y, psi], "goal": [x, y, psi]}. Doubles are written in shortest round-trip
/// form, so save/load is bit-exact.
std::string course_to_json(const Course& course);
Course course_from_json(const std::string& text, const Footprint& fp = {});
void save_course(const Course& course, const std::filesystem::path& path);
Course load_course(const std::filesystem::path& path, const Footprint& fp = {});

/// Everything a config file may override.
struct Settings {
  PipelineConfig pipeline;
  DWAParams dwa;
};

/// Applies {"safety": {...}, "limits": {...}, "scan": {...}, "footprint": {...},
/// "pipeline": {...}, "dwa": {...}} on top of `base`. Unknown keys are errors.
Settings apply_config_json(const std::string& text, Settings base = {});
Settings load_config(const std::filesystem::path& path, Settings base = {});

/// One JSON object per tick: tick, pose, control, contact, and for LfH the FSM mode,
/// recovery stage, P(safety), tangent error, modulation, learned control and local goal.
std::string tick_json(const TickRecord& rec);

/// Course solids, the executed trajectory and collision markers.
std::string course_svg(const Course& course, std::span<const Pose2D> trajectory,
                       std::span<const Point2> collisions, const Footprint& fp = {});

}  // namespace lfh
