#pragma once

#include <string>

#include "hiflow/curve.hpp"
#include "hiflow/energy.hpp"

namespace hiflow {

struct DiagnosticsRecord {
    double t = 0.0;
    EnergyReport energy;
    double sigma = 0.0;                // sum normal_speed^2 ds, discrete dissipation rate
    double length = 0.0;
    double area_enclosed = 0.0;        // shoelace, signed (positive for ccw)
    double max_abs_curvature = 0.0;
    double curvature_l2m = 0.0;        // sum |k|^(2m) ds
    double total_abs_curvature = 0.0;  // sum |k| ds
    int winding = 0;
    bool self_intersecting = false;
    double circle_fit_residual = 0.0;
};

DiagnosticsRecord measure(const DiscreteCurve& c, double t, int m, double alpha, double beta);
// Variant that reuses an already-computed gradient (the flow loop has one).
DiagnosticsRecord measure(const DiscreteCurve& c, const CurveGeometry& g,
                          const GradientField& grad, double t, int m, double alpha, double beta);

// Number of properly crossing non-adjacent segment pairs, O(N^2).
std::size_t self_intersections(const DiscreteCurve& c);

// Symmetric max-min vertex-to-polyline distance.
double hausdorff_distance(const DiscreteCurve& a, const DiscreteCurve& b);

struct CircleFit {
    Vec2 center;
    double radius = 0.0;
    double rms_residual = 0.0;  // rms of |p_i - center| - radius
};

// Algebraic least-squares circle. Throws NumericalError on (near-)collinear input.
CircleFit fit_circle(const std::vector<Vec2>& pts);

// Column order is fixed; 17 significant digits; UNIX newlines.
std::string csv_header();
std::string csv_row(const DiagnosticsRecord& r);

}  // namespace hiflow
