#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hiflow/error.hpp"
#include "hiflow/flow.hpp"
#include "hiflow/scenario.hpp"
#include "hiflow/snapshot.hpp"
#include "oracle_utils.hpp"

using namespace hiflow;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() /
                   ("hiflow_test_" + std::to_string(::getpid()) + "_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const char* kTinyConfig = R"({
  "name": "tiny",
  "shape": {"kind": "fourier", "coeffs": [0.0, 0.0, 0.05, 0.0, 0.03, 0.02]},
  "flow": {
    "m": 1, "integrator": "linesearch", "n": 64,
    "t_max": 1e6, "sigma_tol": 1e-12, "max_steps": 30, "record_every": 1
  },
  "snapshot_every": 10,
  "output_dir": "PLACEHOLDER"
})";

ScenarioConfig tiny_scenario(const fs::path& outdir) {
    std::string text = kTinyConfig;
    text.replace(text.find("PLACEHOLDER"), 11, outdir.string());
    return scenario_from_json(text);
}

}  // namespace

TEST_CASE("scenario json parses field by field") {
    ScenarioConfig cfg = tiny_scenario("/tmp/somewhere");
    CHECK(cfg.name == "tiny");
    CHECK(cfg.shape.kind == ShapeSpec::Kind::fourier);
    CHECK(cfg.shape.coeffs.size() == 6);
    CHECK(cfg.flow.m == 1);
    CHECK(cfg.flow.integrator == Integrator::linesearch);
    CHECK(cfg.flow.n == 64);
    CHECK(cfg.flow.max_steps == 30);
    CHECK(cfg.flow.record_every == 1);
    CHECK(cfg.snapshot_every == 10);
    CHECK(cfg.output_dir == fs::path("/tmp/somewhere"));
    // Unspecified flow keys keep their defaults.
    CHECK(cfg.flow.remesh_every == 25);
    CHECK(cfg.flow.alpha == 1.0);
}

TEST_CASE("scenario json rejects malformed input") {
    CHECK_THROWS_AS(scenario_from_json("not json at all"), ConfigError);
    CHECK_THROWS_AS(scenario_from_json("[1,2,3]"), ConfigError);

    auto reject = [](const std::string& text) {
        CHECK_THROWS_AS(scenario_from_json(text), ConfigError);
    };
    // Unknown keys at every level.
    reject(R"({"name":"x","shape":{"kind":"circle","r":1},"snapshot_every":1,"bogus":1})");
    reject(R"({"name":"x","shape":{"kind":"circle","r":1,"extra":2},"snapshot_every":1})");
    reject(R"({"name":"x","shape":{"kind":"circle","r":1},"flow":{"dt":1},"snapshot_every":1})");
    // Missing required fields.
    reject(R"({"shape":{"kind":"circle","r":1},"snapshot_every":1})");
    reject(R"({"name":"x","snapshot_every":1})");
    reject(R"({"name":"x","shape":{"kind":"circle","r":1}})");
    // snapshot_every = 0 is explicitly invalid.
    reject(R"({"name":"x","shape":{"kind":"circle","r":1},"snapshot_every":0})");
    // Bad enum and bad name.
    reject(R"({"name":"x","shape":{"kind":"blob","r":1},"snapshot_every":1})");
    reject(R"({"name":"x","shape":{"kind":"circle","r":1},"flow":{"integrator":"rk9"},"snapshot_every":1})");
    reject(R"({"name":"a/b","shape":{"kind":"circle","r":1},"snapshot_every":1})");
    reject(R"({"name":"","shape":{"kind":"circle","r":1},"snapshot_every":1})");
    reject(R"({"name":"x","shape":{"kind":"fourier","coeffs":"nope"},"snapshot_every":1})");
}

TEST_CASE("bundled scenario files parse") {
    for (const char* name :
         {"ellipse21_m1.json", "circle2_m1_ode.json", "circle2_sweep.json",
          "fourier_m1_short.json"}) {
        fs::path p = fs::path(HIFLOW_SCENARIO_DIR) / name;
        REQUIRE(fs::exists(p));
        CHECK_NOTHROW(load_scenario(p));
    }
}

TEST_CASE("run_scenario writes a complete, deterministic bundle") {
    fs::path outdir = fresh_dir("bundle");
    ScenarioConfig cfg = tiny_scenario(outdir);

    RunResult r1 = run_scenario(cfg);
    CHECK(r1.trajectory.termination == Termination::max_steps);
    CHECK(r1.scenario_dir == outdir / "tiny");

    // Manifest exists, parses, and its file inventory is complete.
    nlohmann::json manifest = nlohmann::json::parse(slurp(r1.scenario_dir / "manifest.json"));
    CHECK(manifest.at("termination") == "max_steps");
    CHECK(manifest.at("tool").at("name") == "hiflow");
    CHECK(manifest.at("scenario").at("name") == "tiny");
    CHECK(manifest.at("final").at("t").get<double>() > 0.0);
    CHECK(fs::exists(r1.scenario_dir / manifest.at("files").at("csv").get<std::string>()));
    for (const auto& s : manifest.at("files").at("snapshots"))
        CHECK(fs::exists(r1.scenario_dir / s.get<std::string>()));
    for (const auto& s : manifest.at("files").at("svg"))
        CHECK(fs::exists(r1.scenario_dir / s.get<std::string>()));

    // Snapshots at steps 0, 10, 20 plus the final state at 30.
    CHECK(manifest.at("files").at("snapshots").size() == 4);

    // CSV: pinned header, one line per record plus header.
    std::string csv = slurp(r1.scenario_dir / "diagnostics.csv");
    CHECK(csv.rfind("t,F_total,", 0) == 0);
    std::size_t lines = 0;
    for (char ch : csv)
        if (ch == '\n') ++lines;
    CHECK(lines == r1.trajectory.records.size() + 1);

    // Snapshot files round-trip the in-memory states bit-exactly.
    Snapshot snap = load_snapshot((r1.scenario_dir / "snap_000001.txt").string());
    const auto& [t1, c1] = r1.trajectory.snapshots.at(1);
    CHECK(snap.t == t1);
    REQUIRE(snap.curve.size() == c1.size());
    for (std::size_t i = 0; i < c1.size(); ++i) {
        CHECK(snap.curve[i].x == c1[i].x);
        CHECK(snap.curve[i].y == c1[i].y);
    }

    // Re-running the identical config reproduces the CSV byte for byte.
    fs::path outdir2 = fresh_dir("bundle2");
    ScenarioConfig cfg2 = tiny_scenario(outdir2);
    RunResult r2 = run_scenario(cfg2);
    CHECK(slurp(r1.scenario_dir / "diagnostics.csv") ==
          slurp(r2.scenario_dir / "diagnostics.csv"));
    CHECK(slurp(r1.scenario_dir / "snap_000002.txt") ==
          slurp(r2.scenario_dir / "snap_000002.txt"));

    fs::remove_all(outdir);
    fs::remove_all(outdir2);
}

TEST_CASE("sweep validates its inputs") {
    ScenarioConfig base;
    base.name = "sweepbase";
    base.shape.kind = ShapeSpec::Kind::circle;
    base.shape.radius = 2.0;
    base.flow.n = 64;
    base.flow.safety = 0.4;

    CHECK_THROWS_AS(degiorgi_sweep(base, {}, 0.5), ConfigError);
    CHECK_THROWS_AS(degiorgi_sweep(base, {0.1, 1.0}, 0.5), ConfigError);   // ascending
    CHECK_THROWS_AS(degiorgi_sweep(base, {1.0, -0.1}, 0.5), ConfigError);  // negative
    CHECK_THROWS_AS(degiorgi_sweep(base, {1.0}, 0.0), ConfigError);
}

TEST_CASE("sweep reports the baseline dying before t_compare") {
    ScenarioConfig base;
    base.name = "shrink";
    base.shape.kind = ShapeSpec::Kind::circle;
    base.shape.radius = 0.3;  // curve-shortening extinction at t = 0.045
    base.flow.n = 64;
    base.flow.safety = 0.4;
    base.flow.max_steps = 2000000;
    CHECK_THROWS_AS(degiorgi_sweep(base, {0.5}, 0.1), NumericalError);
}

TEST_CASE("sweep on circles matches the two-ode oracle") {
    ScenarioConfig base;
    base.name = "circle_sweep";
    base.shape.kind = ShapeSpec::Kind::circle;
    base.shape.radius = 2.0;
    base.flow.n = 128;
    base.flow.safety = 0.05;
    base.flow.max_steps = 200000;

    double t_cmp = 0.2;
    std::vector<double> eps = {0.5, 0.1};
    std::vector<SweepRow> rows = degiorgi_sweep(base, eps, t_cmp);
    REQUIRE(rows.size() == 2);

    double r_csf = std::sqrt(4.0 - 2.0 * t_cmp);  // closed-form shrinking circle
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].eps == eps[i]);
        auto weighted = circle_radius_ode(2.0, 1, 1.0, eps[i], t_cmp, 1e-5);
        double expected = std::abs(weighted.back().second - r_csf);
        CHECK(std::abs(rows[i].hausdorff - expected) <= 1.5e-3);
    }
    // Closer weight, closer curves.
    CHECK(rows[1].hausdorff < rows[0].hausdorff);

    std::string csv = sweep_csv(rows);
    CHECK(csv.rfind("eps,hausdorff,length_gap,max_k_gap\n", 0) == 0);
}

TEST_CASE("svg output is a single closed path with optional overlay") {
    DiscreteCurve c = make_circle(1.0, 64);
    std::string svg = render_svg(c, false);
    CHECK(svg.rfind("<svg xmlns", 0) == 0);
    CHECK(svg.find("viewBox=") != std::string::npos);
    CHECK(svg.find(" Z\"") != std::string::npos);
    CHECK(svg.find("<circle") == std::string::npos);

    std::size_t move_cmds = 0;
    for (std::size_t pos = svg.find("M "); pos != std::string::npos;
         pos = svg.find("M ", pos + 1))
        ++move_cmds;
    CHECK(move_cmds == 1);

    std::string overlaid = render_svg(c, true);
    CHECK(overlaid.find("<circle") != std::string::npos);
    CHECK(overlaid.find("stroke-dasharray") != std::string::npos);
}

TEST_CASE("snapshot loader rejects malformed files") {
    CHECK_THROWS_AS(snapshot_from_string(""), ConfigError);
    CHECK_THROWS_AS(snapshot_from_string("N=4 t=0\n1 2\n"), ConfigError);
    CHECK_THROWS_AS(snapshot_from_string("bogus header\n"), ConfigError);
}
