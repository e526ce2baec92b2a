#include "hiflow/curve.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>

#include "hiflow/error.hpp"

namespace hiflow {

namespace {

constexpr double kPi = std::numbers::pi;

void check_finite(const std::vector<Vec2>& pts) {
    for (const Vec2& p : pts) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw ConfigError("curve contains a non-finite vertex");
    }
}

}  // namespace

DiscreteCurve::DiscreteCurve(std::vector<Vec2> pts) : pts_(std::move(pts)) {
    if (pts_.size() < kMinVertices)
        throw ConfigError("curve needs at least " + std::to_string(kMinVertices) +
                          " vertices, got " + std::to_string(pts_.size()));
    check_finite(pts_);
    const std::size_t n = pts_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 e = pts_[(i + 1) % n] - pts_[i];
        if (norm(e) <= kMinEdgeLength)
            throw ConfigError("coincident vertices: edge " + std::to_string(i) +
                              " is shorter than 1e-12");
    }
}

// ---------------------------------------------------------------------------
// shape generators

DiscreteCurve make_circle(double r, std::size_t n) {
    if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("circle radius must be positive");
    std::vector<Vec2> pts(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double t = 2.0 * kPi * double(j) / double(n);
        pts[j] = {r * std::cos(t), r * std::sin(t)};
    }
    return DiscreteCurve(std::move(pts));
}

DiscreteCurve make_ellipse(double a, double b, std::size_t n) {
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
        throw ConfigError("ellipse semi-axes must be positive");
    std::vector<Vec2> pts(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double t = 2.0 * kPi * double(j) / double(n);
        pts[j] = {a * std::cos(t), b * std::sin(t)};
    }
    return DiscreteCurve(std::move(pts));
}

DiscreteCurve make_fourier(const std::vector<double>& coeffs, std::size_t n) {
    if (coeffs.size() % 2 != 0)
        throw ConfigError("fourier coeffs must come in (cos, sin) pairs");
    auto radius_at = [&coeffs](double th) {
        double r = 1.0;
        for (std::size_t k = 0; 2 * k < coeffs.size(); ++k) {
            const double f = double(k + 1) * th;
            r += coeffs[2 * k] * std::cos(f) + coeffs[2 * k + 1] * std::sin(f);
        }
        return r;
    };
    for (int j = 0; j < 4096; ++j) {
        if (radius_at(2.0 * kPi * j / 4096.0) < 0.05)
            throw ConfigError("fourier perturbation drives the radius below 0.05");
    }
    std::vector<Vec2> pts(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double t = 2.0 * kPi * double(j) / double(n);
        const double r = radius_at(t);
        pts[j] = {r * std::cos(t), r * std::sin(t)};
    }
    return DiscreteCurve(std::move(pts));
}

DiscreteCurve make_figure_eight(double scale, std::size_t n) {
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw ConfigError("figure_eight scale must be positive");
    // Lemniscate of Bernoulli. The half-step parameter offset keeps vertices
    // off the double point at the origin.
    std::vector<Vec2> pts(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double t = 2.0 * kPi * (double(j) + 0.5) / double(n);
        const double d = 1.0 + std::sin(t) * std::sin(t);
        pts[j] = {scale * std::cos(t) / d, scale * std::sin(t) * std::cos(t) / d};
    }
    return DiscreteCurve(std::move(pts));
}

DiscreteCurve make_rounded_polygon(int sides, double corner_radius, std::size_t n) {
    if (sides < 3) throw ConfigError("rounded_polygon needs at least 3 sides");
    if (!(corner_radius > 0.0) || !std::isfinite(corner_radius))
        throw ConfigError("rounded_polygon corner radius must be positive");
    const int k = sides;
    const double side = 2.0 * std::sin(kPi / k);      // circumradius 1 polygon
    const double theta = kPi - 2.0 * kPi / k;         // interior angle
    const double tau = corner_radius / std::tan(theta / 2.0);  // trimmed length per corner end
    if (!(tau < 0.5 * side))
        throw ConfigError("rounded_polygon corner radius too large for this side count");
    const double h = corner_radius / std::sin(theta / 2.0);  // corner-to-arc-center distance

    struct Piece {
        bool arc;
        Vec2 p0, dir;       // straight: start point and unit direction
        Vec2 center;        // arc: center
        double ang0, sweep; // arc: start angle and ccw sweep
        double len;
    };
    std::vector<Piece> pieces;
    const double arc_sweep = 2.0 * kPi / k;
    for (int j = 0; j < k; ++j) {
        const double f0 = 2.0 * kPi * j / k;
        const double f1 = 2.0 * kPi * (j + 1) / k;
        const Vec2 v0{std::cos(f0), std::sin(f0)};
        const Vec2 v1{std::cos(f1), std::sin(f1)};
        const Vec2 u = (v1 - v0) / side;
        const Vec2 a = v0 + tau * u;   // straight piece start
        const Vec2 b = v1 - tau * u;   // straight piece end
        pieces.push_back({false, a, u, {}, 0.0, 0.0, side - 2.0 * tau});
        const Vec2 c = v1 * (1.0 - h);  // arc center sits on the bisector toward the origin
        const Vec2 rb = b - c;
        pieces.push_back({true, {}, {}, c, std::atan2(rb.y, rb.x), arc_sweep,
                          corner_radius * arc_sweep});
    }
    double total = 0.0;
    for (const Piece& p : pieces) total += p.len;

    std::vector<Vec2> pts(n);
    std::size_t piece_idx = 0;
    double piece_start = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double s = total * double(j) / double(n);
        while (s >= piece_start + pieces[piece_idx].len) {
            piece_start += pieces[piece_idx].len;
            ++piece_idx;
        }
        const Piece& p = pieces[piece_idx];
        const double local = s - piece_start;
        if (p.arc) {
            const double ang = p.ang0 + local / corner_radius;
            pts[j] = p.center + corner_radius * Vec2{std::cos(ang), std::sin(ang)};
        } else {
            pts[j] = p.p0 + local * p.dir;
        }
    }
    return DiscreteCurve(std::move(pts));
}

DiscreteCurve generate_curve(const ShapeSpec& shape, std::size_t n) {
    switch (shape.kind) {
        case ShapeSpec::Kind::circle: return make_circle(shape.radius, n);
        case ShapeSpec::Kind::ellipse: return make_ellipse(shape.a, shape.b, n);
        case ShapeSpec::Kind::fourier: return make_fourier(shape.coeffs, n);
        case ShapeSpec::Kind::figure_eight: return make_figure_eight(shape.scale, n);
        case ShapeSpec::Kind::rounded_polygon:
            return make_rounded_polygon(shape.sides, shape.corner_radius, n);
    }
    throw ConfigError("unknown shape kind");
}

// ---------------------------------------------------------------------------
// periodic cubic spline through the vertices, chord-length parametrized

namespace {

// Thomas algorithm; a = sub, b = diag, c = super. Overwrites inputs.
void solve_tridiag(std::vector<double>& a, std::vector<double>& b, std::vector<double>& c,
                   std::vector<double>& r) {
    const std::size_t n = b.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        r[i] -= w * r[i - 1];
    }
    r[n - 1] /= b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) r[i] = (r[i] - c[i] * r[i + 1]) / b[i];
}

// Cyclic tridiagonal via Sherman-Morrison. corner_lo = A[0][n-1], corner_hi = A[n-1][0].
std::vector<double> solve_cyclic_tridiag(std::vector<double> a, std::vector<double> b,
                                         std::vector<double> c, std::vector<double> r,
                                         double corner_lo, double corner_hi) {
    const std::size_t n = b.size();
    const double gamma = -b[0];
    std::vector<double> bb = b;
    bb[0] = b[0] - gamma;
    bb[n - 1] = b[n - 1] - corner_lo * corner_hi / gamma;
    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = corner_hi;
    std::vector<double> aa = a, cc = c, y = r, z = u;
    {
        std::vector<double> b1 = bb, a1 = aa, c1 = cc;
        solve_tridiag(a1, b1, c1, y);
    }
    {
        std::vector<double> b2 = bb, a2 = aa, c2 = cc;
        solve_tridiag(a2, b2, c2, z);
    }
    const double fact = (y[0] + corner_lo * y[n - 1] / gamma) /
                        (1.0 + z[0] + corner_lo * z[n - 1] / gamma);
    for (std::size_t i = 0; i < n; ++i) y[i] -= fact * z[i];
    return y;
}

class PeriodicSpline {
  public:
    explicit PeriodicSpline(const std::vector<Vec2>& pts) {
        const std::size_t m = pts.size();
        p_ = pts;
        p_.push_back(pts[0]);
        u_.resize(m + 1);
        u_[0] = 0.0;
        for (std::size_t i = 0; i < m; ++i) u_[i + 1] = u_[i] + norm(p_[i + 1] - p_[i]);
        total_ = u_[m];

        // moments (second derivatives) from the periodic spline system
        std::vector<double> a(m), b(m), c(m);
        std::vector<double> rx(m), ry(m);
        for (std::size_t i = 0; i < m; ++i) {
            const double hm = u_[i == 0 ? m : i] - u_[i == 0 ? m - 1 : i - 1];
            const double hp = u_[i + 1] - u_[i];
            a[i] = hm / 6.0;
            b[i] = (hm + hp) / 3.0;
            c[i] = hp / 6.0;
            const Vec2 prev = p_[i == 0 ? m - 1 : i - 1];
            const Vec2 d = (p_[i + 1] - p_[i]) / hp - (p_[i] - prev) / hm;
            rx[i] = d.x;
            ry[i] = d.y;
        }
        const std::vector<double> sx = solve_cyclic_tridiag(a, b, c, rx, a[0], c[m - 1]);
        const std::vector<double> sy = solve_cyclic_tridiag(a, b, c, ry, a[0], c[m - 1]);
        s_.resize(m + 1);
        for (std::size_t i = 0; i < m; ++i) s_[i] = {sx[i], sy[i]};
        s_[m] = s_[0];
    }

    double total() const { return total_; }

    Vec2 eval(double u) const {
        const std::size_t i = locate(wrap(u));
        const double uw = wrap(u);
        const double h = u_[i + 1] - u_[i];
        const double t1 = u_[i + 1] - uw, t0 = uw - u_[i];
        return s_[i] * (t1 * t1 * t1 / (6.0 * h)) + s_[i + 1] * (t0 * t0 * t0 / (6.0 * h)) +
               (p_[i] / h - s_[i] * (h / 6.0)) * t1 + (p_[i + 1] / h - s_[i + 1] * (h / 6.0)) * t0;
    }

    Vec2 deriv(double u) const {
        const std::size_t i = locate(wrap(u));
        const double uw = wrap(u);
        const double h = u_[i + 1] - u_[i];
        const double t1 = u_[i + 1] - uw, t0 = uw - u_[i];
        return s_[i] * (-t1 * t1 / (2.0 * h)) + s_[i + 1] * (t0 * t0 / (2.0 * h)) +
               (p_[i + 1] - p_[i]) / h - (s_[i + 1] - s_[i]) * (h / 6.0);
    }

  private:
    double wrap(double u) const {
        u = std::fmod(u, total_);
        if (u < 0.0) u += total_;
        return u;
    }
    std::size_t locate(double u) const {
        const auto it = std::upper_bound(u_.begin(), u_.end(), u);
        const std::size_t i = std::size_t(std::max<std::ptrdiff_t>(0, it - u_.begin() - 1));
        return std::min(i, u_.size() - 2);
    }

    std::vector<Vec2> p_;     // with wrap copy
    std::vector<Vec2> s_;     // moments, with wrap copy
    std::vector<double> u_;   // knots, size m+1
    double total_ = 0.0;
};

// First u > u_lo where |S(u) - p| = c. Newton with a bisection safeguard.
double advance_by_chord(const PeriodicSpline& sp, double u_lo, const Vec2& p, double c) {
    const double c2 = c * c;
    auto g = [&](double u) { return norm2(sp.eval(u) - p) - c2; };

    double lo = u_lo, hi = u_lo + c;
    int guard = 0;
    while (g(hi) < 0.0) {
        lo = hi;
        hi += 0.5 * c;
        if (++guard > 200) throw NumericalError("resample_uniform: chord bracket failed");
    }
    double u = 0.5 * (lo + hi);
    for (int it = 0; it < 100; ++it) {
        const Vec2 d = sp.eval(u) - p;
        const double gu = norm2(d) - c2;
        if (std::abs(gu) < 1e-13 * c2 || hi - lo < 1e-16 * (u_lo + c)) break;
        if (gu < 0.0) lo = u; else hi = u;
        const double slope = 2.0 * dot(d, sp.deriv(u));
        double next = (slope != 0.0) ? u - gu / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        u = next;
    }
    return u;
}

struct MarchResult {
    std::vector<Vec2> pts;
    double closing_gap;  // |p_first - p_last| - c
};

MarchResult march_equal_chords(const PeriodicSpline& sp, std::size_t n, double c) {
    MarchResult r;
    r.pts.resize(n);
    r.pts[0] = sp.eval(0.0);
    double u = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
        u = advance_by_chord(sp, u, r.pts[j - 1], c);
        r.pts[j] = sp.eval(u);
    }
    r.closing_gap = norm(r.pts[0] - r.pts[n - 1]) - c;
    return r;
}

}  // namespace

DiscreteCurve resample_uniform(const DiscreteCurve& curve, std::size_t n_out) {
    if (n_out < kMinVertices)
        throw ConfigError("resample_uniform: target vertex count below " +
                          std::to_string(kMinVertices));
    const PeriodicSpline sp(curve.pts());
    const double total = sp.total();

    // Secant iteration on the common chord length; the closing gap is strictly
    // decreasing in c, so this converges fast from the polygon-length guess.
    double c0 = total / double(n_out);
    MarchResult m0 = march_equal_chords(sp, n_out, c0);
    double g0 = m0.closing_gap;
    double c1 = c0 * (1.0 + 1e-4);
    MarchResult m1 = march_equal_chords(sp, n_out, c1);
    double g1 = m1.closing_gap;
    const double tol = std::max(1e-14 * total, 8.0 * std::numeric_limits<double>::epsilon() * total);
    for (int it = 0; it < 60 && std::abs(g1) > tol && g1 != g0; ++it) {
        double c2 = c1 - g1 * (c1 - c0) / (g1 - g0);
        c2 = std::clamp(c2, 0.5 * total / double(n_out), 2.0 * total / double(n_out));
        c0 = c1; g0 = g1;
        c1 = c2;
        m1 = march_equal_chords(sp, n_out, c1);
        g1 = m1.closing_gap;
    }
    DiscreteCurve out(std::move(m1.pts));

    const CurveGeometry geom = compute_geometry(out);
    const auto [mn, mx] = std::minmax_element(geom.edge_length.begin(), geom.edge_length.end());
    if (*mx / *mn > kMaxEdgeRatio)
        throw NumericalError("resample_uniform: edge aspect ratio exceeds bound");
    return out;
}

// ---------------------------------------------------------------------------
// derived quantities

CurveGeometry compute_geometry(const DiscreteCurve& c, int cache_derivative_orders) {
    const std::size_t n = c.size();
    const std::vector<Vec2>& p = c.pts();
    CurveGeometry g;
    g.edge_length.resize(n);
    g.ds.resize(n);
    g.stencil_span.resize(n);
    g.tangent.resize(n);
    g.normal.resize(n);
    g.curvature.resize(n);

    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 e = p[(i + 1) % n] - p[i];
        g.edge_length[i] = norm(e);
        g.total_length += g.edge_length[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t prev = (i + n - 1) % n, next = (i + 1) % n;
        g.ds[i] = 0.5 * (g.edge_length[prev] + g.edge_length[i]);
        const Vec2 chord = p[next] - p[prev];
        const double q = norm(chord);
        if (q <= kMinEdgeLength)
            throw ConfigError("degenerate hairpin: vertices i-1 and i+1 coincide at i=" +
                              std::to_string(i));
        g.stencil_span[i] = q;
        g.tangent[i] = chord / q;
        g.normal[i] = rot90(g.tangent[i]);
        const Vec2 e_prev = p[i] - p[prev];
        const Vec2 e_next = p[next] - p[i];
        const double turn = std::atan2(cross(e_prev, e_next), dot(e_prev, e_next));
        g.curvature[i] = turn / g.ds[i];
    }

    if (cache_derivative_orders > 0) {
        if (!is_uniform(g))
            throw ConfigError("derivative cache needs a uniform grid; call resample_uniform");
        std::vector<Vec2> field = g.normal;
        for (int p_ord = 1; p_ord <= cache_derivative_orders; ++p_ord) {
            std::vector<Vec2> next(n);
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t im = (i + n - 1) % n, ip = (i + 1) % n;
                next[i] = (field[ip] - field[im]) / g.stencil_span[i];
            }
            field = std::move(next);
            g.derivative_cache[p_ord] = field;
        }
    }
    return g;
}

bool is_uniform(const CurveGeometry& g, double tol) {
    const auto [mn, mx] = std::minmax_element(g.edge_length.begin(), g.edge_length.end());
    return *mx <= (1.0 + tol) * *mn;
}

namespace {

template <typename T>
std::vector<T> periodic_derivative_impl(const std::vector<T>& f, const CurveGeometry& g,
                                        int order) {
    const std::size_t n = g.edge_length.size();
    if (f.size() != n) throw ConfigError("periodic_derivative: field size mismatch");
    if (order < 1) throw ConfigError("periodic_derivative: order must be >= 1");
    if (std::size_t(2 * order + 1) > n)
        throw ConfigError("periodic_derivative: stencil span exceeds vertex count");
    if (!is_uniform(g))
        throw ConfigError("periodic_derivative: non-uniform grid; call resample_uniform first");
    std::vector<T> cur = f, next(n);
    for (int p = 0; p < order; ++p) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t im = (i + n - 1) % n, ip = (i + 1) % n;
            next[i] = (cur[ip] - cur[im]) / g.stencil_span[i];
        }
        std::swap(cur, next);
    }
    return cur;
}

}  // namespace

std::vector<double> periodic_derivative(const std::vector<double>& f, const CurveGeometry& g,
                                        int order) {
    return periodic_derivative_impl(f, g, order);
}

std::vector<Vec2> periodic_derivative(const std::vector<Vec2>& f, const CurveGeometry& g,
                                      int order) {
    return periodic_derivative_impl(f, g, order);
}

double total_turning(const CurveGeometry& g) {
    double sum = 0.0;
    for (std::size_t i = 0; i < g.curvature.size(); ++i) sum += g.curvature[i] * g.ds[i];
    return sum;
}

int winding_number(const CurveGeometry& g) {
    return int(std::lround(total_turning(g) / (2.0 * kPi)));
}

}  // namespace hiflow
