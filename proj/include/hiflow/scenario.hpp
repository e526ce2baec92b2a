#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hiflow/curve.hpp"
#include "hiflow/flow.hpp"

namespace hiflow {

struct ScenarioConfig {
    std::string name;
    ShapeSpec shape;
    FlowConfig flow;
    int snapshot_every = 0;  // must be >= 1 in a parsed config
    std::filesystem::path output_dir = "out";
};

// Strict parse: unknown keys anywhere are errors, snapshot_every must be >= 1.
ScenarioConfig scenario_from_json(const std::string& text);
ScenarioConfig load_scenario(const std::filesystem::path& file);

std::string trajectory_csv(const Trajectory& traj);

struct RunResult {
    ScenarioConfig config;
    Trajectory trajectory;
    double wall_seconds = 0.0;
    std::filesystem::path scenario_dir;           // output_dir / name
    std::vector<std::filesystem::path> files;     // everything written, incl. manifest.json
};

// Runs the flow and writes diagnostics.csv, numbered snapshots, final.svg and
// manifest.json into output_dir/name. Stepper failures are recorded in the
// manifest before being rethrown.
RunResult run_scenario(const ScenarioConfig& cfg);

// Weighted flow (m=1, alpha=1, beta=eps) against the curve-shortening
// baseline from the same initial curve, compared at t_compare.
struct SweepRow {
    double eps = 0.0;
    double hausdorff = 0.0;
    double length_gap = 0.0;
    double max_curvature_gap = 0.0;
};

std::vector<SweepRow> degiorgi_sweep(const ScenarioConfig& base, const std::vector<double>& eps,
                                     double t_compare);

std::string sweep_csv(const std::vector<SweepRow>& rows);

// Single closed path with a 5% margin viewBox; overlay_fit adds the
// least-squares circle, dashed.
std::string render_svg(const DiscreteCurve& c, bool overlay_fit = false);

}  // namespace hiflow
