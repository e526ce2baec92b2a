#pragma once

#include <vector>

#include "hiflow/curve.hpp"

namespace hiflow {

struct EnergyReport {
    int order_m = 1;
    double alpha = 1.0;
    double beta = 1.0;
    double length_term = 0.0;      // alpha * sum of dual edge lengths
    double derivative_term = 0.0;  // beta * sum |D^m normal|^2 ds
    double total = 0.0;            // length_term + derivative_term
};

struct GradientField {
    std::vector<Vec2> d_vertex;        // dF / d(vertex i)
    std::vector<double> normal_speed;  // <dF/dx_i, normal_i> / ds_i
};

// F = alpha * length + beta * sum_i |D^m normal|_i^2 ds_i on a uniform grid.
EnergyReport energy(const CurveGeometry& g, int m, double alpha, double beta);

// Same quantity evaluated straight from vertex positions with no uniformity
// gate; this is the exact function the gradients differentiate and the probe
// path used by finite differencing and the line search.
EnergyReport energy_from_vertices(const std::vector<Vec2>& pts, int m, double alpha, double beta);

// Exact derivative of the discrete energy, by reverse accumulation through
// edge lengths, chords, tangents, normals and the derivative stencils.
GradientField gradient_exact(const DiscreteCurve& c, int m, double alpha, double beta);

// Central-difference oracle, O(N^2 m). h must lie in [1e-8, 1e-4].
GradientField gradient_fd(const DiscreteCurve& c, int m, double alpha, double beta,
                          double h = 1e-6);

// First-variation density of F_1: beta*(2 k_ss + k^3) - alpha*k. Stepping the
// curve by -(this)*normal*dt decreases F_1. Consistency check for m=1 only.
std::vector<double> normal_speed_analytic_m1(const CurveGeometry& g, double alpha, double beta);

}  // namespace hiflow
