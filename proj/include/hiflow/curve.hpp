#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "hiflow/vec2.hpp"

namespace hiflow {

inline constexpr std::size_t kMinVertices = 16;
inline constexpr double kMinEdgeLength = 1e-12;
// Post-resample aspect ratio bound (max edge / min edge).
inline constexpr double kMaxEdgeRatio = 10.0;
// Uniform-grid gate for stencil calculus: max/min edge ratio <= 1 + this.
inline constexpr double kUniformTol = 1e-6;
// Looser sanity gate used by the flow steppers; between remeshes the grid
// drifts mildly away from exact uniformity but the gradient stays exact.
inline constexpr double kUniformTolLoose = 1e-2;

// Closed polyline; the segment from back() to front() is implied.
class DiscreteCurve {
  public:
    explicit DiscreteCurve(std::vector<Vec2> pts);

    const std::vector<Vec2>& pts() const { return pts_; }
    std::size_t size() const { return pts_.size(); }
    const Vec2& operator[](std::size_t i) const { return pts_[i]; }

  private:
    std::vector<Vec2> pts_;
};

// Per-vertex derived quantities. Immutable after construction.
struct CurveGeometry {
    std::vector<double> edge_length;    // edge i joins vertex i to i+1
    double total_length = 0.0;          // sum of edge lengths
    std::vector<double> ds;             // dual edge length (l_{i-1}+l_i)/2; sums to total_length
    std::vector<double> stencil_span;   // |x_{i+1} - x_{i-1}|, centered-stencil denominator
    std::vector<Vec2> tangent;          // unit, from centered differences
    std::vector<Vec2> normal;           // tangent rotated +90 deg (inward for a ccw circle)
    std::vector<double> curvature;      // turning angle / dual edge length; +1 on the ccw unit circle
    // order -> that arclength derivative of the normal field (uniform grids only).
    std::map<int, std::vector<Vec2>> derivative_cache;
};

struct ShapeSpec {
    enum class Kind { circle, ellipse, fourier, figure_eight, rounded_polygon };
    Kind kind = Kind::circle;
    double radius = 1.0;                // circle
    double a = 2.0, b = 1.0;            // ellipse semi-axes
    std::vector<double> coeffs;         // fourier: a1,b1,a2,b2,... radial harmonics
    double scale = 1.0;                 // figure_eight
    int sides = 4;                      // rounded_polygon
    double corner_radius = 0.3;         // rounded_polygon
};

DiscreteCurve generate_curve(const ShapeSpec& shape, std::size_t n);

DiscreteCurve make_circle(double r, std::size_t n);
DiscreteCurve make_ellipse(double a, double b, std::size_t n);
DiscreteCurve make_fourier(const std::vector<double>& coeffs, std::size_t n);
DiscreteCurve make_figure_eight(double scale, std::size_t n);
DiscreteCurve make_rounded_polygon(int sides, double corner_radius, std::size_t n);

// Periodic cubic fit through the input vertices, re-sampled so that all output
// edges have equal length (to ~1e-12 relative). The first output vertex is the
// first input vertex.
DiscreteCurve resample_uniform(const DiscreteCurve& c, std::size_t n_out);

// cache_derivative_orders > 0 additionally fills derivative_cache with
// D^1..D^p of the normal field; that part requires a uniform grid.
CurveGeometry compute_geometry(const DiscreteCurve& c, int cache_derivative_orders = 0);

bool is_uniform(const CurveGeometry& g, double tol = kUniformTol);

// p-fold application of the centered first-derivative stencil
// (f_{i+1} - f_{i-1}) / |x_{i+1} - x_{i-1}| with periodic wrap.
// Requires a uniform grid; resample_uniform first if the check trips.
std::vector<double> periodic_derivative(const std::vector<double>& f, const CurveGeometry& g, int order);
std::vector<Vec2> periodic_derivative(const std::vector<Vec2>& f, const CurveGeometry& g, int order);

// Sum of turning angles; equals 2*pi*winding for any closed polyline.
double total_turning(const CurveGeometry& g);
// Nearest integer w with total_turning ~ 2*pi*w.
int winding_number(const CurveGeometry& g);

}  // namespace hiflow
