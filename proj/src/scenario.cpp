#include "hiflow/scenario.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "hiflow/diagnostics.hpp"
#include "hiflow/error.hpp"
#include "hiflow/snapshot.hpp"
#include "hiflow/version.hpp"

namespace hiflow {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

double get_number(const json& obj, const std::string& key, const std::string& where) {
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError("'" + key + "' in " + where + " must be a number");
    return v.get<double>();
}

long get_integer(const json& obj, const std::string& key, const std::string& where) {
    const json& v = obj.at(key);
    if (!v.is_number_integer())
        throw ConfigError("'" + key + "' in " + where + " must be an integer");
    return v.get<long>();
}

ShapeSpec shape_from_json(const json& obj) {
    if (!obj.is_object() || !obj.contains("kind"))
        throw ConfigError("shape must be an object with a 'kind'");
    std::string kind = obj.at("kind").get<std::string>();
    ShapeSpec spec;
    if (kind == "circle") {
        reject_unknown_keys(obj, {"kind", "r"}, "shape(circle)");
        spec.kind = ShapeSpec::Kind::circle;
        spec.radius = get_number(obj, "r", "shape(circle)");
    } else if (kind == "ellipse") {
        reject_unknown_keys(obj, {"kind", "a", "b"}, "shape(ellipse)");
        spec.kind = ShapeSpec::Kind::ellipse;
        spec.a = get_number(obj, "a", "shape(ellipse)");
        spec.b = get_number(obj, "b", "shape(ellipse)");
    } else if (kind == "fourier") {
        reject_unknown_keys(obj, {"kind", "coeffs"}, "shape(fourier)");
        spec.kind = ShapeSpec::Kind::fourier;
        const json& c = obj.at("coeffs");
        if (!c.is_array()) throw ConfigError("'coeffs' must be an array of numbers");
        for (const json& v : c) {
            if (!v.is_number()) throw ConfigError("'coeffs' must be an array of numbers");
            spec.coeffs.push_back(v.get<double>());
        }
    } else if (kind == "figure_eight") {
        reject_unknown_keys(obj, {"kind", "scale"}, "shape(figure_eight)");
        spec.kind = ShapeSpec::Kind::figure_eight;
        spec.scale = get_number(obj, "scale", "shape(figure_eight)");
    } else if (kind == "rounded_polygon") {
        reject_unknown_keys(obj, {"kind", "sides", "corner_radius"}, "shape(rounded_polygon)");
        spec.kind = ShapeSpec::Kind::rounded_polygon;
        spec.sides = static_cast<int>(get_integer(obj, "sides", "shape(rounded_polygon)"));
        spec.corner_radius = get_number(obj, "corner_radius", "shape(rounded_polygon)");
    } else {
        throw ConfigError("unknown shape kind '" + kind + "'");
    }
    return spec;
}

json shape_to_json(const ShapeSpec& s) {
    switch (s.kind) {
        case ShapeSpec::Kind::circle: return {{"kind", "circle"}, {"r", s.radius}};
        case ShapeSpec::Kind::ellipse: return {{"kind", "ellipse"}, {"a", s.a}, {"b", s.b}};
        case ShapeSpec::Kind::fourier: return {{"kind", "fourier"}, {"coeffs", s.coeffs}};
        case ShapeSpec::Kind::figure_eight:
            return {{"kind", "figure_eight"}, {"scale", s.scale}};
        case ShapeSpec::Kind::rounded_polygon:
            return {{"kind", "rounded_polygon"},
                    {"sides", s.sides},
                    {"corner_radius", s.corner_radius}};
    }
    throw ConfigError("unhandled shape kind");
}

FlowConfig flow_from_json(const json& obj) {
    reject_unknown_keys(obj,
                        {"m", "alpha", "beta", "integrator", "dt_initial", "safety",
                         "remesh_every", "n", "t_max", "sigma_tol", "max_steps", "record_every"},
                        "flow");
    FlowConfig f;
    if (obj.contains("m")) f.m = static_cast<int>(get_integer(obj, "m", "flow"));
    if (obj.contains("alpha")) f.alpha = get_number(obj, "alpha", "flow");
    if (obj.contains("beta")) f.beta = get_number(obj, "beta", "flow");
    if (obj.contains("integrator"))
        f.integrator = integrator_from_string(obj.at("integrator").get<std::string>());
    if (obj.contains("dt_initial")) f.dt_initial = get_number(obj, "dt_initial", "flow");
    if (obj.contains("safety")) f.safety = get_number(obj, "safety", "flow");
    if (obj.contains("remesh_every"))
        f.remesh_every = static_cast<int>(get_integer(obj, "remesh_every", "flow"));
    if (obj.contains("n")) {
        long n = get_integer(obj, "n", "flow");
        if (n < static_cast<long>(kMinVertices)) throw ConfigError("flow n must be >= 16");
        f.n = static_cast<std::size_t>(n);
    }
    if (obj.contains("t_max")) f.t_max = get_number(obj, "t_max", "flow");
    if (obj.contains("sigma_tol")) f.sigma_tol = get_number(obj, "sigma_tol", "flow");
    if (obj.contains("max_steps")) f.max_steps = get_integer(obj, "max_steps", "flow");
    if (obj.contains("record_every"))
        f.record_every = static_cast<int>(get_integer(obj, "record_every", "flow"));
    return f;
}

json flow_to_json(const FlowConfig& f) {
    return {{"m", f.m},
            {"alpha", f.alpha},
            {"beta", f.beta},
            {"integrator", to_string(f.integrator)},
            {"dt_initial", f.dt_initial},
            {"safety", f.safety},
            {"remesh_every", f.remesh_every},
            {"n", f.n},
            {"t_max", f.t_max},
            {"sigma_tol", f.sigma_tol},
            {"max_steps", f.max_steps},
            {"record_every", f.record_every}};
}

json record_to_json(const DiagnosticsRecord& r) {
    return {{"t", r.t},
            {"F_total", r.energy.total},
            {"F_length", r.energy.length_term},
            {"F_deriv", r.energy.derivative_term},
            {"sigma", r.sigma},
            {"length", r.length},
            {"area", r.area_enclosed},
            {"max_k", r.max_abs_curvature},
            {"k_L2m", r.curvature_l2m},
            {"total_abs_k", r.total_abs_curvature},
            {"winding", r.winding},
            {"self_int", r.self_intersecting},
            {"circle_residual", r.circle_fit_residual}};
}

std::string utc_stamp(std::chrono::system_clock::time_point tp) {
    std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw NumericalError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw NumericalError("failed writing " + path.string());
}

bool filename_safe(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '_' || c == '-' || c == '.';
        if (!ok) return false;
    }
    return true;
}

}  // namespace

ScenarioConfig scenario_from_json(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config root must be an object");
    reject_unknown_keys(root, {"name", "shape", "flow", "snapshot_every", "output_dir"},
                        "config");
    if (!root.contains("name") || !root.at("name").is_string())
        throw ConfigError("config needs a string 'name'");
    if (!root.contains("shape")) throw ConfigError("config needs a 'shape'");
    if (!root.contains("snapshot_every")) throw ConfigError("config needs 'snapshot_every'");

    ScenarioConfig cfg;
    cfg.name = root.at("name").get<std::string>();
    if (!filename_safe(cfg.name))
        throw ConfigError("scenario name must be nonempty and use only [A-Za-z0-9_.-]");
    cfg.shape = shape_from_json(root.at("shape"));
    if (root.contains("flow")) {
        if (!root.at("flow").is_object()) throw ConfigError("'flow' must be an object");
        cfg.flow = flow_from_json(root.at("flow"));
    }
    long snap = get_integer(root, "snapshot_every", "config");
    if (snap < 1) throw ConfigError("snapshot_every must be >= 1");
    cfg.snapshot_every = static_cast<int>(snap);
    if (root.contains("output_dir"))
        cfg.output_dir = root.at("output_dir").get<std::string>();
    return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return scenario_from_json(ss.str());
}

std::string trajectory_csv(const Trajectory& traj) {
    std::string out = csv_header();
    for (const DiagnosticsRecord& r : traj.records) out += csv_row(r);
    return out;
}

RunResult run_scenario(const ScenarioConfig& cfg) {
    if (!filename_safe(cfg.name))
        throw ConfigError("scenario name must be nonempty and use only [A-Za-z0-9_.-]");
    if (cfg.snapshot_every < 1) throw ConfigError("snapshot_every must be >= 1");

    RunResult result;
    result.config = cfg;
    result.scenario_dir = cfg.output_dir / cfg.name;
    std::filesystem::create_directories(result.scenario_dir);

    json manifest;
    manifest["scenario"] = {{"name", cfg.name},
                            {"shape", shape_to_json(cfg.shape)},
                            {"flow", flow_to_json(cfg.flow)},
                            {"snapshot_every", cfg.snapshot_every},
                            {"output_dir", cfg.output_dir.string()}};
    manifest["tool"] = {{"name", kToolName}, {"version", kToolVersion}};

    auto t0 = std::chrono::system_clock::now();
    auto clock0 = std::chrono::steady_clock::now();
    manifest["started_utc"] = utc_stamp(t0);

    DiscreteCurve initial = generate_curve(cfg.shape, cfg.flow.n);
    try {
        result.trajectory = run_flow(initial, cfg.flow, cfg.snapshot_every);
    } catch (const NumericalError& e) {
        auto t1 = std::chrono::system_clock::now();
        manifest["finished_utc"] = utc_stamp(t1);
        manifest["wall_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - clock0).count();
        manifest["termination"] = "error";
        manifest["error"] = e.what();
        manifest["files"] = json::object();
        write_text_file(result.scenario_dir / "manifest.json", manifest.dump(2) + "\n");
        throw;
    }

    auto t1 = std::chrono::system_clock::now();
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - clock0).count();

    write_text_file(result.scenario_dir / "diagnostics.csv", trajectory_csv(result.trajectory));
    result.files.push_back("diagnostics.csv");

    json snap_names = json::array();
    for (std::size_t i = 0; i < result.trajectory.snapshots.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "snap_%06zu.txt", i);
        const auto& [t, curve] = result.trajectory.snapshots[i];
        save_snapshot(curve, t, (result.scenario_dir / name).string());
        snap_names.push_back(name);
        result.files.push_back(name);
    }

    bool overlay = result.trajectory.termination == Termination::converged;
    const DiscreteCurve& final_curve = result.trajectory.snapshots.empty()
                                           ? initial
                                           : result.trajectory.snapshots.back().second;
    write_text_file(result.scenario_dir / "final.svg", render_svg(final_curve, overlay));
    result.files.push_back("final.svg");

    manifest["finished_utc"] = utc_stamp(t1);
    manifest["wall_seconds"] = result.wall_seconds;
    manifest["termination"] = to_string(result.trajectory.termination);
    if (!result.trajectory.records.empty())
        manifest["final"] = record_to_json(result.trajectory.records.back());
    manifest["files"] = {{"csv", "diagnostics.csv"},
                         {"snapshots", snap_names},
                         {"svg", json::array({"final.svg"})}};
    write_text_file(result.scenario_dir / "manifest.json", manifest.dump(2) + "\n");
    result.files.push_back("manifest.json");
    return result;
}

std::vector<SweepRow> degiorgi_sweep(const ScenarioConfig& base, const std::vector<double>& eps,
                                     double t_compare) {
    if (eps.empty()) throw ConfigError("eps list must not be empty");
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0.0)) throw ConfigError("eps values must be positive");
        if (i > 0 && !(eps[i] < eps[i - 1]))
            throw ConfigError("eps values must be strictly descending");
    }
    if (!(t_compare > 0.0)) throw ConfigError("t_compare must be positive");

    constexpr int kEndpointsOnly = 1 << 30;  // records/snapshots at step 0 and the final state
    DiscreteCurve initial = generate_curve(base.shape, base.flow.n);

    CsfOptions csf;
    csf.safety = base.flow.safety;
    csf.t_max = t_compare;
    csf.max_steps = base.flow.max_steps;
    csf.remesh_every = base.flow.remesh_every;
    csf.n = base.flow.n;
    csf.record_every = kEndpointsOnly;
    Trajectory baseline = run_curve_shortening(initial, csf, kEndpointsOnly);
    if (baseline.termination != Termination::t_max)
        throw NumericalError(
            "curve-shortening baseline ended with '" + to_string(baseline.termination) +
            "' before t_compare; choose a smaller --t-compare (before extinction)");
    const DiscreteCurve& csf_curve = baseline.snapshots.back().second;
    const DiagnosticsRecord& csf_rec = baseline.records.back();

    std::vector<SweepRow> rows;
    for (double e : eps) {
        FlowConfig f = base.flow;
        f.m = 1;
        f.alpha = 1.0;
        f.beta = e;
        f.integrator = Integrator::semi_implicit;
        f.t_max = t_compare;
        f.sigma_tol = 1e-14;  // compare states at t_compare, not at convergence
        f.record_every = kEndpointsOnly;
        Trajectory traj = run_flow(initial, f, kEndpointsOnly);
        if (traj.termination == Termination::blowup_guard ||
            traj.termination == Termination::max_steps)
            throw NumericalError("weighted flow at eps=" + fmt6(e) + " ended with '" +
                                 to_string(traj.termination) + "' before t_compare");
        const DiscreteCurve& flow_curve = traj.snapshots.back().second;
        const DiagnosticsRecord& flow_rec = traj.records.back();

        SweepRow row;
        row.eps = e;
        row.hausdorff = hausdorff_distance(flow_curve, csf_curve);
        row.length_gap = std::abs(flow_rec.length - csf_rec.length);
        row.max_curvature_gap =
            std::abs(flow_rec.max_abs_curvature - csf_rec.max_abs_curvature);
        rows.push_back(row);
    }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "eps,hausdorff,length_gap,max_k_gap\n";
    for (const SweepRow& r : rows) {
        out += fmt17(r.eps);
        out += ',';
        out += fmt17(r.hausdorff);
        out += ',';
        out += fmt17(r.length_gap);
        out += ',';
        out += fmt17(r.max_curvature_gap);
        out += '\n';
    }
    return out;
}

std::string render_svg(const DiscreteCurve& c, bool overlay_fit) {
    const std::vector<Vec2>& pts = c.pts();
    double min_x = pts[0].x, max_x = pts[0].x;
    double min_y = -pts[0].y, max_y = -pts[0].y;
    for (const Vec2& p : pts) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, -p.y);
        max_y = std::max(max_y, -p.y);
    }

    CircleFit fit;
    if (overlay_fit) {
        fit = fit_circle(pts);
        min_x = std::min(min_x, fit.center.x - fit.radius);
        max_x = std::max(max_x, fit.center.x + fit.radius);
        min_y = std::min(min_y, -fit.center.y - fit.radius);
        max_y = std::max(max_y, -fit.center.y + fit.radius);
    }

    double span = std::max(max_x - min_x, max_y - min_y);
    if (!(span > 0.0)) span = 1.0;
    double margin = 0.05 * span;
    double view_x = min_x - margin;
    double view_y = min_y - margin;
    double view_w = (max_x - min_x) + 2.0 * margin;
    double view_h = (max_y - min_y) + 2.0 * margin;
    double stroke = 0.005 * span;

    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" + fmt6(view_x) +
                      " " + fmt6(view_y) + " " + fmt6(view_w) + " " + fmt6(view_h) + "\">\n";
    svg += "  <path d=\"M " + fmt6(pts[0].x) + " " + fmt6(-pts[0].y);
    for (std::size_t i = 1; i < pts.size(); ++i)
        svg += " L " + fmt6(pts[i].x) + " " + fmt6(-pts[i].y);
    svg += " Z\" fill=\"none\" stroke=\"black\" stroke-width=\"" + fmt6(stroke) + "\"/>\n";
    if (overlay_fit) {
        svg += "  <circle cx=\"" + fmt6(fit.center.x) + "\" cy=\"" + fmt6(-fit.center.y) +
               "\" r=\"" + fmt6(fit.radius) +
               "\" fill=\"none\" stroke=\"red\" stroke-width=\"" + fmt6(stroke) +
               "\" stroke-dasharray=\"" + fmt6(4.0 * stroke) + " " + fmt6(4.0 * stroke) +
               "\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace hiflow
