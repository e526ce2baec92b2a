#include "hiflow/flow.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "hiflow/error.hpp"

namespace hiflow {

namespace {

constexpr double kPi = std::numbers::pi;

double max_abs_curvature(const CurveGeometry& g) {
    double mk = 0.0;
    for (double k : g.curvature) mk = std::max(mk, std::abs(k));
    return mk;
}

// Builds the new state curve and enforces the curvature ceiling before any
// commit. Degenerate geometry (coincident vertices, hairpins) from an
// oversized step is reported as blowup too, so the driver can stop cleanly.
DiscreteCurve commit_guarded(std::vector<Vec2> pts) {
    try {
        DiscreteCurve c(std::move(pts));
        CurveGeometry g = compute_geometry(c);
        double mk = max_abs_curvature(g);
        if (mk > kCurvatureGuard) {
            throw BlowupError("max |curvature| " + std::to_string(mk) +
                              " exceeded the guard ceiling " + std::to_string(kCurvatureGuard));
        }
        return c;
    } catch (const BlowupError&) {
        throw;
    } catch (const ConfigError& e) {
        throw BlowupError(std::string("step produced a degenerate curve: ") + e.what());
    }
}

Vec2 centroid(const std::vector<Vec2>& pts) {
    Vec2 c;
    for (const Vec2& p : pts) c += p;
    return c / static_cast<double>(pts.size());
}

void check_flow_params(const FlowConfig& c) {
    if (c.m < 1) throw ConfigError("flow order m must be >= 1");
    if (!(c.alpha > 0.0) || !(c.beta > 0.0))
        throw ConfigError("flow weights alpha and beta must be positive");
    if (!(c.safety > 0.0) || c.safety > 1.0) throw ConfigError("safety must lie in (0, 1]");
    if (!(c.dt_initial > 0.0)) throw ConfigError("dt_initial must be positive");
}

// Repeated centered difference with uniform spacing; the constant-coefficient
// stand-in for the highest-order part of the gradient.
std::vector<Vec2> centered_power(const std::vector<Vec2>& f, int reps, double inv_span) {
    std::size_t n = f.size();
    std::vector<Vec2> cur = f;
    std::vector<Vec2> nxt(n);
    for (int r = 0; r < reps; ++r) {
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t ip = (i + 1 == n) ? 0 : i + 1;
            std::size_t im = (i == 0) ? n - 1 : i - 1;
            nxt[i] = (cur[ip] - cur[im]) * inv_span;
        }
        cur.swap(nxt);
    }
    return cur;
}

struct FftwContext {
    std::size_t n = 0;
    double* real = nullptr;
    fftw_complex* freq = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;

    FftwContext(const FftwContext&) = delete;
    FftwContext& operator=(const FftwContext&) = delete;

    explicit FftwContext(std::size_t size);
    ~FftwContext();
};

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

FftwContext::FftwContext(std::size_t size) : n(size) {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    real = fftw_alloc_real(n);
    freq = fftw_alloc_complex(n / 2 + 1);
    if (!real || !freq) throw std::bad_alloc();
    fwd = fftw_plan_dft_r2c_1d(static_cast<int>(n), real, freq, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_c2r_1d(static_cast<int>(n), freq, real, FFTW_ESTIMATE);
    if (!fwd || !bwd) throw NumericalError("fftw plan creation failed");
}

FftwContext::~FftwContext() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
    if (real) fftw_free(real);
    if (freq) fftw_free(freq);
}

FftwContext& fft_context(std::size_t n) {
    thread_local std::map<std::size_t, std::unique_ptr<FftwContext>> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, std::make_unique<FftwContext>(n)).first;
    return *it->second;
}

// Solves (I + coef * S^(2m+2)) x = rhs componentwise, where S is the centered
// first difference with spacing span on a periodic grid. S is circulant with
// symbol i*sin(w)/span, so the system matrix has positive real eigenvalues
// 1 + coef * (sin(w_j)/span)^(2m+2) >= 1 and the solve is a pointwise divide
// in frequency space.
void solve_circulant(std::vector<Vec2>& rhs, double coef, int m, double span) {
    std::size_t n = rhs.size();
    FftwContext& ctx = fft_context(n);
    int p = 2 * m + 2;
    for (int axis = 0; axis < 2; ++axis) {
        for (std::size_t i = 0; i < n; ++i)
            ctx.real[i] = (axis == 0) ? rhs[i].x : rhs[i].y;
        fftw_execute(ctx.fwd);
        for (std::size_t j = 0; j <= n / 2; ++j) {
            double w = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(n);
            double lambda = 1.0 + coef * std::pow(std::sin(w) / span, p);
            double scale = 1.0 / (lambda * static_cast<double>(n));
            ctx.freq[j][0] *= scale;
            ctx.freq[j][1] *= scale;
        }
        fftw_execute(ctx.bwd);
        for (std::size_t i = 0; i < n; ++i)
            (axis == 0 ? rhs[i].x : rhs[i].y) = ctx.real[i];
    }
}

}  // namespace

std::string to_string(Integrator i) {
    switch (i) {
        case Integrator::explicit_euler: return "explicit";
        case Integrator::linesearch: return "linesearch";
        case Integrator::semi_implicit: return "semi_implicit";
    }
    return "unknown";
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::converged: return "converged";
        case Termination::t_max: return "t_max";
        case Termination::max_steps: return "max_steps";
        case Termination::blowup_guard: return "blowup_guard";
    }
    return "unknown";
}

Integrator integrator_from_string(const std::string& s) {
    if (s == "explicit") return Integrator::explicit_euler;
    if (s == "linesearch") return Integrator::linesearch;
    if (s == "semi_implicit") return Integrator::semi_implicit;
    throw ConfigError("unknown integrator '" + s +
                      "' (expected explicit, linesearch or semi_implicit)");
}

void step_explicit(FlowState& s, const FlowConfig& c, const GradientField* grad) {
    check_flow_params(c);
    CurveGeometry g = compute_geometry(s.curve);
    GradientField local;
    if (!grad) {
        local = gradient_exact(s.curve, c.m, c.alpha, c.beta);
        grad = &local;
    }
    std::size_t n = s.curve.size();
    double ds = g.total_length / static_cast<double>(n);
    int p = 2 * c.m + 2;
    double dt = c.safety * std::pow(ds, p) / (std::pow(2.0, p) * c.beta);
    double remaining = c.t_max - s.t;
    if (remaining > 0.0 && dt > remaining) dt = remaining;

    std::vector<Vec2> pts = s.curve.pts();
    for (std::size_t i = 0; i < n; ++i)
        pts[i] -= grad->normal_speed[i] * dt * g.normal[i];

    s.curve = commit_guarded(std::move(pts));
    s.t += dt;
    s.step += 1;
    s.dt_current = dt;
}

void step_linesearch(FlowState& s, const FlowConfig& c, const GradientField* grad) {
    check_flow_params(c);
    CurveGeometry g = compute_geometry(s.curve);
    GradientField local;
    if (!grad) {
        local = gradient_exact(s.curve, c.m, c.alpha, c.beta);
        grad = &local;
    }
    std::size_t n = s.curve.size();
    const std::vector<Vec2>& x = s.curve.pts();
    double mean_ds = g.total_length / static_cast<double>(n);

    // The tangential part of the gradient only slides the parametrization, so
    // descend along the normal projection: the shape evolution is the same and
    // the grid stays near uniform between remeshes.
    std::vector<Vec2> dir(n);
    double slope = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dn = dot(grad->d_vertex[i], g.normal[i]);
        dir[i] = dn * g.normal[i];
        slope += dn * dn;
    }
    double f0 = energy_from_vertices(x, c.m, c.alpha, c.beta).total;

    double dt = s.dt_current > 0.0 ? s.dt_current : c.dt_initial;
    // t advances by dt * mean_ds, so cap the raw step to land exactly on t_max.
    double remaining = c.t_max - s.t;
    if (remaining > 0.0 && dt * mean_ds > remaining) dt = remaining / mean_ds;

    std::vector<Vec2> trial(n);
    for (int halve = 0; halve <= kMaxHalvings; ++halve) {
        for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] - dt * dir[i];
        bool valid = true;
        for (std::size_t i = 0; i < n && valid; ++i) {
            std::size_t ip = (i + 1 == n) ? 0 : i + 1;
            if (!(norm(trial[ip] - trial[i]) > kMinEdgeLength)) valid = false;
        }
        if (valid) {
            double f1 = energy_from_vertices(trial, c.m, c.alpha, c.beta).total;
            if (std::isfinite(f1) && f1 <= f0 - kArmijoC * dt * slope) {
                if (f1 > f0) s.increase_events += 1;
                s.curve = commit_guarded(std::move(trial));
                s.t += dt * mean_ds;
                s.step += 1;
                s.dt_current = dt * kLinesearchGrowth;
                return;
            }
        }
        dt *= 0.5;
    }
    throw LinesearchError("line search failed to find a descent step after " +
                          std::to_string(kMaxHalvings) + " halvings");
}

void step_semi_implicit(FlowState& s, const FlowConfig& c, const GradientField* grad) {
    check_flow_params(c);
    CurveGeometry g = compute_geometry(s.curve);
    GradientField local;
    if (!grad) {
        local = gradient_exact(s.curve, c.m, c.alpha, c.beta);
        grad = &local;
    }
    std::size_t n = s.curve.size();
    const std::vector<Vec2>& x = s.curve.pts();
    double ds = g.total_length / static_cast<double>(n);

    double dt = c.safety * ds * ds;
    double remaining = c.t_max - s.t;
    if (remaining > 0.0 && dt > remaining) dt = remaining;

    // Split the normal velocity as sgn*2*beta*S^(2m+2) x plus a remainder and
    // treat only the stiff constant-coefficient part implicitly. sgn is the
    // sign (-1)^(m+1) that makes the operator positive on the circle symbol.
    double sgn = (c.m % 2 == 1) ? 1.0 : -1.0;
    double coef = 2.0 * c.beta * dt * sgn;
    std::vector<Vec2> lead = centered_power(x, 2 * c.m + 2, 1.0 / (2.0 * ds));

    std::vector<Vec2> rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 remainder = grad->normal_speed[i] * g.normal[i] - sgn * 2.0 * c.beta * lead[i];
        rhs[i] = x[i] - dt * remainder;
    }
    solve_circulant(rhs, std::abs(coef), c.m, ds);

    s.curve = commit_guarded(std::move(rhs));
    s.t += dt;
    s.step += 1;
    s.dt_current = dt;
}

Trajectory run_flow(const DiscreteCurve& initial, const FlowConfig& c, int snapshot_every) {
    check_flow_params(c);
    if (c.n < kMinVertices) throw ConfigError("flow resolution n must be >= 16");
    if (c.remesh_every < 1) throw ConfigError("remesh_every must be >= 1");
    if (c.record_every < 1) throw ConfigError("record_every must be >= 1");
    if (c.max_steps < 0) throw ConfigError("max_steps must be >= 0");
    if (!(c.sigma_tol > 0.0)) throw ConfigError("sigma_tol must be positive");
    if (c.t_max < 0.0) throw ConfigError("t_max must be >= 0");
    if (snapshot_every < 0) throw ConfigError("snapshot_every must be >= 0");

    Trajectory traj;
    if (c.t_max == 0.0) return traj;

    FlowState s{resample_uniform(initial, c.n), 0.0, 0, c.dt_initial};
    auto remesh = [&] {
        Vec2 before = centroid(s.curve.pts());
        DiscreteCurve remeshed = resample_uniform(s.curve, c.n);
        Vec2 shift = before - centroid(remeshed.pts());
        std::vector<Vec2> pts = remeshed.pts();
        for (Vec2& p : pts) p += shift;
        s.curve = DiscreteCurve(std::move(pts));
    };
    bool done = false;
    while (!done) {
        CurveGeometry g = compute_geometry(s.curve);
        // Normal motion still skews edge lengths slowly; remesh on demand well
        // before the gradient's uniformity gate instead of waiting for cadence.
        if (!is_uniform(g, 0.5 * kUniformTolLoose)) {
            remesh();
            g = compute_geometry(s.curve);
        }
        GradientField grad = gradient_exact(s.curve, c.m, c.alpha, c.beta);
        double sigma = 0.0;
        for (std::size_t i = 0; i < s.curve.size(); ++i)
            sigma += grad.normal_speed[i] * grad.normal_speed[i] * g.ds[i];

        bool recorded = false;
        if (s.step % c.record_every == 0) {
            traj.records.push_back(measure(s.curve, g, grad, s.t, c.m, c.alpha, c.beta));
            recorded = true;
        }
        bool snapped = false;
        if (snapshot_every > 0 && s.step % snapshot_every == 0) {
            traj.snapshots.emplace_back(s.t, s.curve);
            snapped = true;
        }

        auto finish = [&](Termination term) {
            if (!recorded)
                traj.records.push_back(measure(s.curve, g, grad, s.t, c.m, c.alpha, c.beta));
            if (snapshot_every > 0 && !snapped) traj.snapshots.emplace_back(s.t, s.curve);
            traj.termination = term;
            traj.increase_events = s.increase_events;
            done = true;
        };

        if (sigma < c.sigma_tol) {
            finish(Termination::converged);
            continue;
        }
        if (s.t >= c.t_max * (1.0 - 1e-12)) {
            finish(Termination::t_max);
            continue;
        }
        if (s.step >= c.max_steps) {
            finish(Termination::max_steps);
            continue;
        }

        bool stepped = false;
        try {
            switch (c.integrator) {
                case Integrator::explicit_euler: step_explicit(s, c, &grad); break;
                case Integrator::linesearch: step_linesearch(s, c, &grad); break;
                case Integrator::semi_implicit: step_semi_implicit(s, c, &grad); break;
            }
            stepped = true;
        } catch (const BlowupError&) {
            finish(Termination::blowup_guard);
        }

        // Cadence remesh fires only when the grid has actually drifted, so a
        // well-behaved run is not perturbed by needless resampling.
        if (stepped && s.step % c.remesh_every == 0 &&
            !is_uniform(compute_geometry(s.curve), 0.5 * kUniformTolLoose))
            remesh();
    }
    return traj;
}

std::vector<std::pair<double, double>> circle_radius_ode(double r0, int m, double alpha,
                                                         double beta, double t_end, double dt) {
    if (!(r0 > 0.0)) throw ConfigError("circle radius must be positive");
    if (m < 1) throw ConfigError("flow order m must be >= 1");
    if (!(alpha > 0.0) || !(beta > 0.0)) throw ConfigError("alpha and beta must be positive");
    if (t_end < 0.0) throw ConfigError("t_end must be >= 0");
    if (!(dt > 0.0)) throw ConfigError("ode dt must be positive");

    auto f = [&](double r) {
        return (beta * (2.0 * m - 1.0) * std::pow(r, -2.0 * m) - alpha) / r;
    };
    std::vector<std::pair<double, double>> out;
    out.emplace_back(0.0, r0);
    double t = 0.0;
    double r = r0;
    while (t < t_end * (1.0 - 1e-15)) {
        double h = std::min(dt, t_end - t);
        double k1 = f(r);
        double k2 = f(r + 0.5 * h * k1);
        double k3 = f(r + 0.5 * h * k2);
        double k4 = f(r + h * k3);
        r += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
        if (!(r > 0.0) || !std::isfinite(r))
            throw NumericalError("circle radius left (0, inf) during ode integration");
        out.emplace_back(t, r);
    }
    return out;
}

double circle_equilibrium_radius(int m, double alpha, double beta) {
    if (m < 1) throw ConfigError("flow order m must be >= 1");
    if (!(alpha > 0.0) || !(beta > 0.0)) throw ConfigError("alpha and beta must be positive");
    return std::pow(beta * (2.0 * m - 1.0) / alpha, 1.0 / (2.0 * m));
}

void curve_shortening_step(FlowState& s, double safety, double dt_cap) {
    if (!(safety > 0.0) || safety > 1.0) throw ConfigError("safety must lie in (0, 1]");
    CurveGeometry g = compute_geometry(s.curve);
    std::size_t n = s.curve.size();
    double ds = g.total_length / static_cast<double>(n);
    double dt = 0.5 * safety * ds * ds;
    if (dt_cap > 0.0 && dt > dt_cap) dt = dt_cap;

    // Normal points toward the curvature center on a ccw circle, so moving
    // with +k*normal shrinks; this is the descent direction for length.
    std::vector<Vec2> pts = s.curve.pts();
    for (std::size_t i = 0; i < n; ++i) pts[i] += g.curvature[i] * dt * g.normal[i];

    s.curve = commit_guarded(std::move(pts));
    s.t += dt;
    s.step += 1;
    s.dt_current = dt;
}

Trajectory run_curve_shortening(const DiscreteCurve& initial, const CsfOptions& opts,
                                int snapshot_every) {
    if (opts.n < kMinVertices) throw ConfigError("flow resolution n must be >= 16");
    if (opts.remesh_every < 1) throw ConfigError("remesh_every must be >= 1");
    if (opts.record_every < 1) throw ConfigError("record_every must be >= 1");
    if (opts.max_steps < 0) throw ConfigError("max_steps must be >= 0");
    if (opts.t_max < 0.0) throw ConfigError("t_max must be >= 0");
    if (snapshot_every < 0) throw ConfigError("snapshot_every must be >= 0");

    Trajectory traj;
    if (opts.t_max == 0.0) return traj;

    FlowState s{resample_uniform(initial, opts.n), 0.0, 0, 0.0};
    auto remesh = [&] {
        Vec2 before = centroid(s.curve.pts());
        DiscreteCurve remeshed = resample_uniform(s.curve, opts.n);
        Vec2 shift = before - centroid(remeshed.pts());
        std::vector<Vec2> pts = remeshed.pts();
        for (Vec2& p : pts) p += shift;
        s.curve = DiscreteCurve(std::move(pts));
    };
    bool done = false;
    while (!done) {
        if (!is_uniform(compute_geometry(s.curve), 0.5 * kUniformTolLoose)) remesh();
        bool recorded = false;
        if (s.step % opts.record_every == 0) {
            traj.records.push_back(measure(s.curve, s.t, 1, 1.0, 1.0));
            recorded = true;
        }
        bool snapped = false;
        if (snapshot_every > 0 && s.step % snapshot_every == 0) {
            traj.snapshots.emplace_back(s.t, s.curve);
            snapped = true;
        }

        auto finish = [&](Termination term) {
            if (!recorded) traj.records.push_back(measure(s.curve, s.t, 1, 1.0, 1.0));
            if (snapshot_every > 0 && !snapped) traj.snapshots.emplace_back(s.t, s.curve);
            traj.termination = term;
            done = true;
        };

        if (s.t >= opts.t_max * (1.0 - 1e-12)) {
            finish(Termination::t_max);
            continue;
        }
        if (s.step >= opts.max_steps) {
            finish(Termination::max_steps);
            continue;
        }

        bool stepped = false;
        try {
            curve_shortening_step(s, opts.safety, opts.t_max - s.t);
            stepped = true;
        } catch (const BlowupError&) {
            finish(Termination::blowup_guard);
        }

        if (stepped && s.step % opts.remesh_every == 0 &&
            !is_uniform(compute_geometry(s.curve), 0.5 * kUniformTolLoose))
            remesh();
    }
    return traj;
}

}  // namespace hiflow
