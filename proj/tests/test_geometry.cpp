#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "hiflow/curve.hpp"
#include "hiflow/error.hpp"
#include "oracle_utils.hpp"

using namespace hiflow;
using oracle::kPi;

TEST_CASE("circle geometry matches closed forms") {
    std::size_t n = 256;
    double r = 2.0;
    CurveGeometry g = compute_geometry(make_circle(r, n), 2);

    double chord = 2.0 * r * std::sin(kPi / n);
    CHECK(g.total_length == doctest::Approx(n * chord).epsilon(1e-13));
    CHECK(g.total_length == doctest::Approx(2.0 * kPi * r).epsilon(1e-3));

    // Turning-angle curvature of the regular n-gon: (2 pi / n) / chord.
    double k_exact = (2.0 * kPi / n) / chord;
    for (double k : g.curvature) CHECK(k == doctest::Approx(k_exact).epsilon(1e-12));
    CHECK(k_exact == doctest::Approx(1.0 / r).epsilon(1e-4));

    // Centered stencils see an exact rotation: |D^p nu| = r^-p to roundoff.
    for (int p = 1; p <= 2; ++p) {
        for (const Vec2& v : g.derivative_cache.at(p))
            CHECK(norm(v) == doctest::Approx(std::pow(r, -p)).epsilon(1e-12));
    }
}

TEST_CASE("normals point inward on a ccw circle") {
    std::size_t n = 64;
    DiscreteCurve c = make_circle(1.5, n);
    CurveGeometry g = compute_geometry(c);
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 to_center = -1.0 * c[i];  // centered at the origin
        CHECK(dot(g.normal[i], to_center) > 0.0);
        CHECK(norm(g.normal[i]) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(std::abs(dot(g.normal[i], g.tangent[i])) < 1e-14);
    }
}

TEST_CASE("winding number distinguishes orientation and the figure eight") {
    CHECK(winding_number(compute_geometry(make_circle(1.0, 64))) == 1);
    CHECK(winding_number(compute_geometry(make_ellipse(2.0, 1.0, 64))) == 1);
    CHECK(winding_number(compute_geometry(make_figure_eight(1.0, 64))) == 0);

    std::vector<Vec2> rev = make_circle(1.0, 64).pts();
    std::reverse(rev.begin(), rev.end());
    CHECK(winding_number(compute_geometry(DiscreteCurve(rev))) == -1);

    CHECK(total_turning(compute_geometry(make_rounded_polygon(4, 0.3, 256))) ==
          doctest::Approx(2.0 * kPi).epsilon(1e-9));
}

TEST_CASE("generators validate their parameters") {
    CHECK_THROWS_AS(make_circle(0.0, 64), ConfigError);
    CHECK_THROWS_AS(make_circle(1.0, 8), ConfigError);  // below the vertex minimum
    CHECK_THROWS_AS(make_ellipse(-1.0, 1.0, 64), ConfigError);
    CHECK_THROWS_AS(make_fourier({0.1, 0.0, 0.2}, 64), ConfigError);  // odd pair list
    CHECK_THROWS_AS(make_fourier({0.9}, 64), ConfigError);
    CHECK_THROWS_AS(make_rounded_polygon(2, 0.1, 64), ConfigError);
    CHECK_THROWS_AS(make_rounded_polygon(4, 0.0, 64), ConfigError);
    CHECK_THROWS_AS(make_rounded_polygon(4, 10.0, 64), ConfigError);  // arcs eat the sides

    ShapeSpec spec;
    spec.kind = ShapeSpec::Kind::fourier;
    spec.coeffs = {0.0, 0.0, 0.06, 0.0, 0.04, 0.03};
    CHECK_NOTHROW(generate_curve(spec, 128));
}

TEST_CASE("degenerate polylines are rejected") {
    std::vector<Vec2> pts = make_circle(1.0, 32).pts();
    pts[5] = pts[6];
    CHECK_THROWS_AS(DiscreteCurve{pts}, ConfigError);

    std::vector<Vec2> all = make_circle(1.0, 32).pts();
    std::vector<Vec2> few(all.begin(), all.begin() + 10);
    CHECK_THROWS_AS(DiscreteCurve{few}, ConfigError);
}

TEST_CASE("resample produces equal edges and anchors the first vertex") {
    DiscreteCurve in = make_ellipse(2.0, 1.0, 200);
    DiscreteCurve out = resample_uniform(in, 256);
    CHECK(out.size() == 256);
    CHECK(norm(out[0] - in[0]) < 1e-12);

    CurveGeometry g = compute_geometry(out);
    auto [lo, hi] = std::minmax_element(g.edge_length.begin(), g.edge_length.end());
    CHECK((*hi - *lo) <= 1e-10 * *hi);
    CHECK(is_uniform(g));
}

TEST_CASE("resample is idempotent") {
    DiscreteCurve once = resample_uniform(make_fourier({0.0, 0.0, 0.06, 0.0, 0.04, 0.03}, 160), 128);
    DiscreteCurve twice = resample_uniform(once, 128);
    double drift = 0.0;
    for (std::size_t i = 0; i < once.size(); ++i)
        drift = std::max(drift, norm(once[i] - twice[i]));
    CHECK(drift <= 1e-8);
}

TEST_CASE("resample commutes with rigid motions") {
    DiscreteCurve base = make_ellipse(2.0, 1.0, 150);
    DiscreteCurve res = resample_uniform(base, 128);
    std::vector<Vec2> moved = oracle::transformed(base.pts(), 0.7, {3.0, -2.0});
    DiscreteCurve res_moved = resample_uniform(DiscreteCurve(moved), 128);
    std::vector<Vec2> expect = oracle::transformed(res.pts(), 0.7, {3.0, -2.0});
    double drift = 0.0;
    for (std::size_t i = 0; i < expect.size(); ++i)
        drift = std::max(drift, norm(res_moved[i] - expect[i]));
    CHECK(drift <= 1e-11);
}

TEST_CASE("resampled length converges to the smooth perimeter at second order") {
    double exact = oracle::ellipse_perimeter(2.0, 1.0);
    DiscreteCurve fine_input = make_ellipse(2.0, 1.0, 1024);
    double e128 = std::abs(compute_geometry(resample_uniform(fine_input, 128)).total_length - exact);
    double e256 = std::abs(compute_geometry(resample_uniform(fine_input, 256)).total_length - exact);
    double e512 = std::abs(compute_geometry(resample_uniform(fine_input, 512)).total_length - exact);
    CHECK(oracle::convergence_order(e128, e256) >= 1.8);
    CHECK(oracle::convergence_order(e256, e512) >= 1.8);
    CHECK(e512 <= 1e-4);
}

TEST_CASE("curvature extremes converge to the analytic values") {
    // Ellipse(2,1): k ranges over [b/a^2, a/b^2] = [0.25, 2].
    double prev_err = 0.0;
    for (std::size_t n : {128, 256, 512}) {
        CurveGeometry g = compute_geometry(resample_uniform(make_ellipse(2.0, 1.0, 1024), n));
        auto [lo, hi] = std::minmax_element(g.curvature.begin(), g.curvature.end());
        double err = std::max(std::abs(*hi - 2.0), std::abs(*lo - 0.25));
        if (prev_err > 0.0) CHECK(oracle::convergence_order(prev_err, err) >= 1.7);
        prev_err = err;
    }
    CHECK(prev_err <= 5e-4);
}

TEST_CASE("periodic derivative needs a uniform grid") {
    DiscreteCurve drifted = make_ellipse(2.0, 1.0, 128);  // uniform in angle, not arclength
    CurveGeometry g = compute_geometry(drifted);
    CHECK_FALSE(is_uniform(g));
    CHECK_THROWS_AS(periodic_derivative(g.curvature, g, 1), ConfigError);

    CurveGeometry gu = compute_geometry(resample_uniform(drifted, 128));
    CHECK_NOTHROW(periodic_derivative(gu.curvature, gu, 2));
}

TEST_CASE("periodic derivative annihilates constants and is linear") {
    CurveGeometry g = compute_geometry(resample_uniform(make_circle(1.0, 64), 64));
    std::vector<double> ones(64, 3.25);
    for (double v : periodic_derivative(ones, g, 1)) CHECK(std::abs(v) < 1e-12);

    std::vector<Vec2> f(64), h(64), sum(64);
    for (std::size_t i = 0; i < 64; ++i) {
        f[i] = g.normal[i];
        h[i] = g.tangent[i];
        sum[i] = f[i] + 2.0 * h[i];
    }
    std::vector<Vec2> df = periodic_derivative(f, g, 1);
    std::vector<Vec2> dh = periodic_derivative(h, g, 1);
    std::vector<Vec2> dsum = periodic_derivative(sum, g, 1);
    for (std::size_t i = 0; i < 64; ++i)
        CHECK(norm(dsum[i] - (df[i] + 2.0 * dh[i])) < 1e-12);
}

TEST_CASE("figure eight avoids the self-crossing point") {
    DiscreteCurve c = make_figure_eight(1.0, 64);
    double min_pair = 1e30;
    // The lemniscate passes through the origin twice; the sampling offset must
    // keep vertices away from coinciding there.
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = i + 1; j < c.size(); ++j)
            min_pair = std::min(min_pair, norm(c[i] - c[j]));
    CHECK(min_pair > 1e-4);
    CHECK_NOTHROW(compute_geometry(c));
}
