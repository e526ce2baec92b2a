#include "hiflow/energy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hiflow/error.hpp"

namespace hiflow {

namespace {

void check_params(std::size_t n, int m, double alpha, double beta) {
    if (m < 1) throw ConfigError("derivative order m must be >= 1");
    if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
    if (!(beta > 0.0)) throw ConfigError("beta must be positive");
    if (std::size_t(2 * m + 1) > n)
        throw ConfigError("derivative order m too large for this vertex count");
}

// Forward evaluation keeping every intermediate level; shared by the energy
// value, the reverse sweep and the finite-difference probes.
struct Forward {
    std::size_t n = 0;
    std::vector<Vec2> edge;            // p_{i+1} - p_i
    std::vector<double> len;           // |edge_i|
    std::vector<double> ds;            // (len_{i-1} + len_i) / 2
    std::vector<Vec2> chord;           // p_{i+1} - p_{i-1}
    std::vector<double> span;          // |chord_i|
    std::vector<Vec2> tangent;         // chord / span
    std::vector<std::vector<Vec2>> u;  // u[0] = normal, u[p] = stencil^p applied
    double length = 0.0;
    double deriv_sum = 0.0;            // sum |u[m]|^2 ds
};

Forward forward_pass(const std::vector<Vec2>& p, int m) {
    Forward f;
    const std::size_t n = p.size();
    f.n = n;
    f.edge.resize(n);
    f.len.resize(n);
    f.ds.resize(n);
    f.chord.resize(n);
    f.span.resize(n);
    f.tangent.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        f.edge[i] = p[(i + 1) % n] - p[i];
        f.len[i] = norm(f.edge[i]);
        if (!(f.len[i] > 0.0)) throw NumericalError("degenerate edge during energy evaluation");
        f.length += f.len[i];
    }
    f.u.assign(std::size_t(m) + 1, std::vector<Vec2>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t im = (i + n - 1) % n, ip = (i + 1) % n;
        f.ds[i] = 0.5 * (f.len[im] + f.len[i]);
        f.chord[i] = p[ip] - p[im];
        f.span[i] = norm(f.chord[i]);
        if (!(f.span[i] > 0.0)) throw NumericalError("degenerate chord during energy evaluation");
        f.tangent[i] = f.chord[i] / f.span[i];
        f.u[0][i] = rot90(f.tangent[i]);
    }
    for (int p_ord = 1; p_ord <= m; ++p_ord) {
        const std::vector<Vec2>& prev = f.u[p_ord - 1];
        std::vector<Vec2>& cur = f.u[p_ord];
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t im = (i + n - 1) % n, ip = (i + 1) % n;
            cur[i] = (prev[ip] - prev[im]) / f.span[i];
        }
    }
    const std::vector<Vec2>& top = f.u[std::size_t(m)];
    for (std::size_t i = 0; i < n; ++i) f.deriv_sum += norm2(top[i]) * f.ds[i];
    return f;
}

EnergyReport report_from(const Forward& f, int m, double alpha, double beta) {
    EnergyReport r;
    r.order_m = m;
    r.alpha = alpha;
    r.beta = beta;
    r.length_term = alpha * f.length;
    r.derivative_term = beta * f.deriv_sum;
    r.total = r.length_term + r.derivative_term;
    return r;
}

}  // namespace

EnergyReport energy_from_vertices(const std::vector<Vec2>& pts, int m, double alpha,
                                  double beta) {
    check_params(pts.size(), m, alpha, beta);
    return report_from(forward_pass(pts, m), m, alpha, beta);
}

EnergyReport energy(const CurveGeometry& g, int m, double alpha, double beta) {
    check_params(g.edge_length.size(), m, alpha, beta);
    if (!is_uniform(g))
        throw ConfigError("energy: non-uniform grid; call resample_uniform first");
    const std::size_t n = g.edge_length.size();
    std::vector<Vec2> field = g.normal;
    std::vector<Vec2> next(n);
    for (int p = 0; p < m; ++p) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t im = (i + n - 1) % n, ip = (i + 1) % n;
            next[i] = (field[ip] - field[im]) / g.stencil_span[i];
        }
        std::swap(field, next);
    }
    EnergyReport r;
    r.order_m = m;
    r.alpha = alpha;
    r.beta = beta;
    r.length_term = alpha * g.total_length;
    double dsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) dsum += norm2(field[i]) * g.ds[i];
    r.derivative_term = beta * dsum;
    r.total = r.length_term + r.derivative_term;
    return r;
}

GradientField gradient_exact(const DiscreteCurve& c, int m, double alpha, double beta) {
    const std::size_t n = c.size();
    check_params(n, m, alpha, beta);
    const std::vector<Vec2>& p = c.pts();
    const Forward f = forward_pass(p, m);
    {
        // Exact for any grid, but callers are expected to keep the grid near
        // uniform; a large spread means someone skipped remeshing.
        const auto [mn, mx] = std::minmax_element(f.len.begin(), f.len.end());
        if (*mx > (1.0 + kUniformTolLoose) * *mn)
            throw ConfigError("gradient_exact: grid far from uniform; call resample_uniform");
    }

    // Reverse sweep. xbar accumulates dF/d(vertex).
    std::vector<Vec2> ubar(f.u[std::size_t(m)]);
    for (std::size_t i = 0; i < n; ++i) ubar[i] = 2.0 * beta * f.ds[i] * ubar[i];
    std::vector<double> dsbar(n), qbar(n, 0.0), lbar(n, alpha);
    for (std::size_t i = 0; i < n; ++i) dsbar[i] = beta * norm2(f.u[std::size_t(m)][i]);

    std::vector<Vec2> ubar_prev(n);
    for (int p_ord = m; p_ord >= 1; --p_ord) {
        for (std::size_t i = 0; i < n; ++i) ubar_prev[i] = {0.0, 0.0};
        const std::vector<Vec2>& up = f.u[std::size_t(p_ord)];
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t im = (i + n - 1) % n, ip = (i + 1) % n;
            const Vec2 w = ubar[i] / f.span[i];
            ubar_prev[ip] += w;
            ubar_prev[im] -= w;
            qbar[i] -= dot(ubar[i], up[i]) / f.span[i];
        }
        std::swap(ubar, ubar_prev);
    }

    std::vector<Vec2> xbar(n, Vec2{0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t im = (i + n - 1) % n, ip = (i + 1) % n;
        const Vec2 tbar = rot90_inv(ubar[i]);  // u[0] = rot90(tangent)
        Vec2 cbar = tbar / f.span[i];
        const double qb = qbar[i] - dot(tbar, f.tangent[i]) / f.span[i];
        cbar += qb * f.tangent[i];
        xbar[ip] += cbar;
        xbar[im] -= cbar;
        // ds_i spreads onto the two adjacent edge lengths
        lbar[im] += 0.5 * dsbar[i];
        lbar[i] += 0.5 * dsbar[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t ip = (i + 1) % n;
        const Vec2 ebar = (lbar[i] / f.len[i]) * f.edge[i];
        xbar[ip] += ebar;
        xbar[i] -= ebar;
    }

    GradientField out;
    out.normal_speed.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out.normal_speed[i] = dot(xbar[i], f.u[0][i]) / f.ds[i];
    out.d_vertex = std::move(xbar);
    return out;
}

GradientField gradient_fd(const DiscreteCurve& c, int m, double alpha, double beta, double h) {
    const std::size_t n = c.size();
    check_params(n, m, alpha, beta);
    if (!(h >= 1e-8 && h <= 1e-4))
        throw ConfigError("gradient_fd: h must lie in [1e-8, 1e-4]");
    std::vector<Vec2> work = c.pts();
    GradientField out;
    out.d_vertex.resize(n);
    out.normal_speed.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (int axis = 0; axis < 2; ++axis) {
            double& coord = axis == 0 ? work[i].x : work[i].y;
            const double saved = coord;
            coord = saved + h;
            const double fp = energy_from_vertices(work, m, alpha, beta).total;
            coord = saved - h;
            const double fm = energy_from_vertices(work, m, alpha, beta).total;
            coord = saved;
            (axis == 0 ? out.d_vertex[i].x : out.d_vertex[i].y) = (fp - fm) / (2.0 * h);
        }
    }
    const CurveGeometry g = compute_geometry(c);
    for (std::size_t i = 0; i < n; ++i)
        out.normal_speed[i] = dot(out.d_vertex[i], g.normal[i]) / g.ds[i];
    return out;
}

std::vector<double> normal_speed_analytic_m1(const CurveGeometry& g, double alpha, double beta) {
    if (!(alpha > 0.0) || !(beta > 0.0)) throw ConfigError("alpha and beta must be positive");
    if (!is_uniform(g, kUniformTolLoose))
        throw ConfigError("normal_speed_analytic_m1: grid far from uniform; call resample_uniform");
    const std::vector<double>& kt = g.curvature;
    const std::size_t n = kt.size();

    // Turning angles over dual chord lengths measure k + h^2 (k''/12 + k^3/24)
    // on a grid with true arclength spacing h, and chords run short of arcs by
    // h^2 k^2 / 24. Undo both so the formula below is fed fourth-order data;
    // otherwise its discretization error is dominated by the sampling bias of
    // the curvature itself rather than by the stencils.
    double h = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        h += g.ds[i] * (1.0 + g.ds[i] * g.ds[i] * kt[i] * kt[i] / 24.0);
    h /= static_cast<double>(n);
    const double h2 = h * h;

    std::vector<double> kc(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t ip = (i + 1 == n) ? 0 : i + 1;
        const std::size_t im = (i == 0) ? n - 1 : i - 1;
        const double ktpp = (kt[ip] - 2.0 * kt[i] + kt[im]) / h2;
        kc[i] = kt[i] - h2 * (ktpp / 12.0 + kt[i] * kt[i] * kt[i] / 24.0);
    }

    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t ip = (i + 1 == n) ? 0 : i + 1;
        const std::size_t im = (i == 0) ? n - 1 : i - 1;
        const std::size_t ip2 = (ip + 1 == n) ? 0 : ip + 1;
        const std::size_t im2 = (im == 0) ? n - 1 : im - 1;
        const double k_ss =
            (-kc[ip2] + 16.0 * kc[ip] - 30.0 * kc[i] + 16.0 * kc[im] - kc[im2]) / (12.0 * h2);
        out[i] = beta * (2.0 * k_ss + kc[i] * kc[i] * kc[i]) - alpha * kc[i];
    }
    return out;
}

}  // namespace hiflow
