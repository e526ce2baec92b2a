#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hiflow/curve.hpp"
#include "hiflow/diagnostics.hpp"
#include "hiflow/energy.hpp"
#include "hiflow/error.hpp"
#include "hiflow/flow.hpp"
#include "hiflow/scenario.hpp"
#include "hiflow/snapshot.hpp"
#include "hiflow/version.hpp"

namespace {

using namespace hiflow;

int cmd_run(const std::vector<std::string>& config_files) {
    std::vector<ScenarioConfig> configs;
    std::set<std::string> names;
    for (const std::string& file : config_files) {
        ScenarioConfig cfg = load_scenario(file);
        if (!names.insert(cfg.name).second)
            throw ConfigError("duplicate scenario name '" + cfg.name + "' in batch");
        configs.push_back(std::move(cfg));
    }

    // Parallel across scenarios only; each flow loop stays sequential.
    std::vector<std::future<RunResult>> futures;
    futures.reserve(configs.size());
    for (const ScenarioConfig& cfg : configs)
        futures.push_back(std::async(std::launch::async, [&cfg] { return run_scenario(cfg); }));

    for (std::size_t i = 0; i < futures.size(); ++i) {
        RunResult r = futures[i].get();
        const DiagnosticsRecord& last = r.trajectory.records.back();
        std::printf("%s: %s at t=%.6g, sigma=%.3g, %zu records, %zu snapshots, %.2fs -> %s\n",
                    r.config.name.c_str(), to_string(r.trajectory.termination).c_str(), last.t,
                    last.sigma, r.trajectory.records.size(), r.trajectory.snapshots.size(),
                    r.wall_seconds, r.scenario_dir.string().c_str());
    }
    return 0;
}

int cmd_sweep(const std::string& config_file, const std::string& eps_arg, double t_compare,
              const std::string& out_file) {
    ScenarioConfig base = load_scenario(config_file);

    std::vector<double> eps;
    std::string token;
    std::istringstream ss(eps_arg);
    while (std::getline(ss, token, ',')) {
        try {
            std::size_t used = 0;
            double v = std::stod(token, &used);
            if (used != token.size()) throw std::invalid_argument(token);
            eps.push_back(v);
        } catch (const std::exception&) {
            throw ConfigError("cannot parse eps value '" + token + "'");
        }
    }

    std::vector<SweepRow> rows = degiorgi_sweep(base, eps, t_compare);
    std::string csv = sweep_csv(rows);
    std::fputs(csv.c_str(), stdout);
    if (!out_file.empty()) {
        std::ofstream out(out_file, std::ios::binary);
        if (!out) throw NumericalError("cannot open " + out_file + " for writing");
        out << csv;
    }
    return 0;
}

int cmd_render(const std::string& snapshot_file, const std::string& out_file, bool overlay) {
    Snapshot snap = load_snapshot(snapshot_file);
    std::string svg = render_svg(snap.curve, overlay);
    std::ofstream out(out_file, std::ios::binary);
    if (!out) throw NumericalError("cannot open " + out_file + " for writing");
    out << svg;
    return 0;
}

int cmd_selftest() {
    int failures = 0;
    auto check = [&](const std::string& name, const std::function<bool()>& fn) {
        bool ok = false;
        std::string note;
        try {
            ok = fn();
        } catch (const std::exception& e) {
            note = std::string(" (") + e.what() + ")";
        }
        std::printf("selftest: %-34s %s%s\n", name.c_str(), ok ? "ok" : "FAILED", note.c_str());
        if (!ok) ++failures;
    };

    check("circle energy closed form", [] {
        std::size_t n = 256;
        double r = 2.0;
        DiscreteCurve c = make_circle(r, n);
        double f = energy(compute_geometry(c), 1, 1.0, 1.0).total;
        double an = 2.0 * static_cast<double>(n) * std::sin(std::numbers::pi / n);
        double expected = an * (r + 1.0 / r);
        return std::abs(f - expected) <= 1e-12 * expected;
    });

    check("unit circle is critical (m=1)", [] {
        GradientField g = gradient_exact(make_circle(1.0, 256), 1, 1.0, 1.0);
        double sup = 0.0;
        for (double v : g.normal_speed) sup = std::max(sup, std::abs(v));
        return sup <= 1e-8;
    });

    check("gradient matches finite differences", [] {
        DiscreteCurve c = resample_uniform(make_ellipse(2.0, 1.0, 64), 64);
        GradientField ge = gradient_exact(c, 1, 1.0, 1.0);
        GradientField gf = gradient_fd(c, 1, 1.0, 1.0, 1e-6);
        double sup = 0.0, ref = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) {
            sup = std::max(sup, norm(ge.d_vertex[i] - gf.d_vertex[i]));
            ref = std::max(ref, norm(gf.d_vertex[i]));
        }
        return sup <= 1e-6 * ref;
    });

    check("rescaling identity", [] {
        DiscreteCurve c = resample_uniform(make_fourier({0.0, 0.0, 0.06, 0.0, 0.04, 0.03}, 128), 128);
        EnergyReport base = energy(compute_geometry(c), 2, 1.0, 1.0);
        double lam = 2.0;
        std::vector<Vec2> scaled = c.pts();
        for (Vec2& p : scaled) p = lam * p;
        double f = energy_from_vertices(scaled, 2, 1.0, 1.0).total;
        double expected = lam * base.length_term + std::pow(lam, 1.0 - 4.0) * base.derivative_term;
        return std::abs(f - expected) <= 1e-12 * expected;
    });

    check("total curvature bound on corpus", [] {
        std::vector<DiscreteCurve> corpus;
        corpus.push_back(make_circle(2.0, 128));
        corpus.push_back(make_ellipse(2.0, 1.0, 128));
        corpus.push_back(make_rounded_polygon(4, 0.3, 128));
        for (const DiscreteCurve& c : corpus) {
            CurveGeometry g = compute_geometry(resample_uniform(c, 128));
            if (std::abs(winding_number(g)) != 1) return false;
            double total = 0.0;
            for (std::size_t i = 0; i < g.curvature.size(); ++i)
                total += std::abs(g.curvature[i]) * g.ds[i];
            if (total < 2.0 * std::numbers::pi - 1e-3) return false;
        }
        return true;
    });

    check("resample yields equal edges", [] {
        CurveGeometry g = compute_geometry(resample_uniform(make_ellipse(2.0, 1.0, 200), 256));
        auto [lo, hi] = std::minmax_element(g.edge_length.begin(), g.edge_length.end());
        return (*hi - *lo) <= 1e-10 * *hi;
    });

    check("snapshot text round-trip", [] {
        DiscreteCurve c = make_fourier({0.1, -0.02}, 64);
        Snapshot back = snapshot_from_string(snapshot_to_string(c, 0.125));
        if (back.t != 0.125 || back.curve.size() != c.size()) return false;
        for (std::size_t i = 0; i < c.size(); ++i)
            if (back.curve[i].x != c[i].x || back.curve[i].y != c[i].y) return false;
        return true;
    });

    check("circle ode fixed point", [] {
        double target = circle_equilibrium_radius(2, 1.0, 1.0);
        auto path = circle_radius_ode(2.0, 2, 1.0, 1.0, 40.0, 1e-3);
        return std::abs(path.back().second - target) <= 1e-9 &&
               std::abs(target - std::pow(3.0, 0.25)) <= 1e-15;
    });

    check("line search dissipates energy", [] {
        FlowConfig cfg;
        cfg.m = 1;
        cfg.integrator = Integrator::linesearch;
        cfg.n = 64;
        cfg.t_max = 1e30;
        cfg.max_steps = 50;
        cfg.sigma_tol = 1e-300;
        Trajectory traj = run_flow(make_ellipse(2.0, 1.0, 64), cfg);
        for (std::size_t i = 1; i < traj.records.size(); ++i)
            if (traj.records[i].energy.total > traj.records[i - 1].energy.total) return false;
        return traj.records.size() > 10;
    });

    if (failures) std::printf("selftest: %d check(s) FAILED\n", failures);
    else std::printf("selftest: all checks passed\n");
    return failures ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gradient flows of normal-derivative energies on closed plane curves"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run one or more scenario config files");
    std::vector<std::string> config_files;
    run->add_option("configs", config_files, "scenario JSON files")->required()->expected(-1);

    auto* sweep = app.add_subcommand("sweep", "compare weighted flows against curve shortening");
    std::string sweep_config, eps_arg = "1,0.1,0.01", sweep_out;
    double t_compare = 0.5;
    sweep->add_option("config", sweep_config, "base scenario JSON file")->required();
    sweep->add_option("--eps", eps_arg, "comma-separated descending weights");
    sweep->add_option("--t-compare", t_compare, "comparison time");
    sweep->add_option("-o,--output", sweep_out, "also write the table to this CSV file");

    auto* render = app.add_subcommand("render", "render a snapshot file to SVG");
    std::string snap_file, svg_out = "out.svg";
    bool overlay = false;
    render->add_option("snapshot", snap_file, "snapshot text file")->required();
    render->add_option("-o,--output", svg_out, "output SVG path");
    render->add_flag("--overlay-fit", overlay, "draw the fitted circle, dashed");

    auto* selftest = app.add_subcommand("selftest", "run the built-in oracle checks");
    (void)selftest;

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (run->parsed()) return cmd_run(config_files);
        if (sweep->parsed()) return cmd_sweep(sweep_config, eps_arg, t_compare, sweep_out);
        if (render->parsed()) return cmd_render(snap_file, svg_out, overlay);
        return cmd_selftest();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
