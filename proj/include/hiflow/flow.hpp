#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "hiflow/curve.hpp"
#include "hiflow/diagnostics.hpp"
#include "hiflow/energy.hpp"

namespace hiflow {

enum class Integrator { explicit_euler, linesearch, semi_implicit };
enum class Termination { converged, t_max, max_steps, blowup_guard };

std::string to_string(Integrator i);
std::string to_string(Termination t);
Integrator integrator_from_string(const std::string& s);

inline constexpr double kCurvatureGuard = 1e4;  // blowup ceiling on max |k|
inline constexpr double kArmijoC = 1e-4;
inline constexpr int kMaxHalvings = 60;
inline constexpr double kLinesearchGrowth = 1.2;

struct FlowConfig {
    int m = 1;
    double alpha = 1.0;
    double beta = 1.0;
    Integrator integrator = Integrator::linesearch;
    double dt_initial = 1e-4;   // starting raw step for the line search
    double safety = 0.5;        // scales the stability heuristics of the other steppers
    int remesh_every = 25;      // accepted steps between resample+recentre
    std::size_t n = 256;        // working resolution
    double t_max = 10.0;
    double sigma_tol = 1e-6;    // stop when sum normal_speed^2 ds falls below
    long max_steps = 2000000;
    int record_every = 1;       // diagnostics cadence in accepted steps
};

struct FlowState {
    DiscreteCurve curve;
    double t = 0.0;
    long step = 0;
    double dt_current = 0.0;  // adapted by the line search; 0 means "use dt_initial"
    long long increase_events = 0;  // accepted line-search steps with rising energy
};

struct Trajectory {
    std::vector<DiagnosticsRecord> records;
    std::vector<std::pair<double, DiscreteCurve>> snapshots;  // (t, curve)
    Termination termination = Termination::t_max;
    // Accepted steps whose energy went up, remeshes excluded. Zero for the
    // line search by construction; the fixed-step integrators are audited
    // the same way.
    long long increase_events = 0;
};

// One accepted step each. The caller may hand in the gradient of the current
// state to avoid recomputation (the flow loop already has it); pass nullptr
// to let the stepper compute its own. All three advance t in units of the
// normal-velocity flow; for the line search that means t grows by the raw
// descent step times the mean dual length.
void step_explicit(FlowState& s, const FlowConfig& c, const GradientField* grad = nullptr);
void step_linesearch(FlowState& s, const FlowConfig& c, const GradientField* grad = nullptr);
void step_semi_implicit(FlowState& s, const FlowConfig& c, const GradientField* grad = nullptr);

// Resamples the initial curve to c.n, then steps until sigma < sigma_tol,
// t >= t_max, max_steps, or the curvature guard fires. Remeshes (and recentres
// the centroid) every remesh_every accepted steps. snapshot_every > 0 stores
// (t, curve) copies at that step cadence.
Trajectory run_flow(const DiscreteCurve& initial, const FlowConfig& c, int snapshot_every = 0);

// dr/dt = (beta (2m-1) r^(-2m) - alpha) / r by RK4; the radius evolution of a
// circle under the same flow. Returns (t, r) samples including both endpoints.
std::vector<std::pair<double, double>> circle_radius_ode(double r0, int m, double alpha,
                                                         double beta, double t_end, double dt);

// Equilibrium radius (beta (2m-1) / alpha)^(1/2m) of the circle dynamics.
double circle_equilibrium_radius(int m, double alpha, double beta);

// Explicit curve-shortening step, normal velocity = curvature; the baseline
// the weighted flows approach as beta -> 0. dt = safety * mean_ds^2 / 2,
// additionally clamped to dt_cap when dt_cap > 0.
void curve_shortening_step(FlowState& s, double safety, double dt_cap = 0.0);

struct CsfOptions {
    double safety = 0.5;
    double t_max = 1.0;
    long max_steps = 2000000;
    int remesh_every = 25;
    std::size_t n = 256;
    int record_every = 1;
};

Trajectory run_curve_shortening(const DiscreteCurve& initial, const CsfOptions& opts,
                                int snapshot_every = 0);

inline DiagnosticsRecord measure(const FlowState& s, const FlowConfig& c) {
    return measure(s.curve, s.t, c.m, c.alpha, c.beta);
}

}  // namespace hiflow
