#pragma once

#include <cstdint>
#include <vector>

#include "hyptimes/smallmat.hpp"

namespace hyptimes {

// Flat chart with optionally periodic coordinates. Periodic coordinates are
// kept in [0, period); distances and displacements use the nearest image.
struct ChartTopology {
  std::vector<std::uint8_t> periodic;  // one flag per coordinate
  std::vector<double> periods;         // period per coordinate (ignored where aperiodic)

  static ChartTopology euclidean(int dim);
  static ChartTopology torus(const std::vector<double>& periods);

  int dim() const { return static_cast<int>(periodic.size()); }
  bool any_periodic() const;
};

// Wrap periodic coordinates into their fundamental interval.
Vec wrap_point(const ChartTopology& topo, const Vec& x);

// Nearest-image displacement a - b (per periodic coordinate the representative
// in [-period/2, period/2)).
Vec displacement(const ChartTopology& topo, const Vec& a, const Vec& b);

// Euclidean norm of the nearest-image displacement.
double chart_distance(const ChartTopology& topo, const Vec& a, const Vec& b);

// Diameter of the box [lo, hi] under the chart metric (periodic coordinates
// contribute at most half a period).
double chart_diameter(const ChartTopology& topo, const Vec& lo, const Vec& hi);

// Orthogonal projection onto the hyperplane normal to v: I - v v^T / |v|^2.
// Throws InputError when |v| is too small to define a direction.
Mat orthogonal_projection(const Vec& v);

// Orthonormal basis of the hyperplane normal to base_direction, stored as the
// columns of `basis` (d x (d-1)).
struct NormalFrame {
  Vec base_direction;  // unit vector
  Mat basis;           // d x (d-1), orthonormal, columns span base_direction^perp
};

// Deterministic frame from a single Householder reflector that maps the
// direction onto a coordinate axis; the remaining reflector columns give the
// basis. Same input, same frame, no randomness.
NormalFrame normal_frame(const Vec& direction);

// Transport a frame to a new direction by projecting the previous columns
// onto the new normal hyperplane and re-orthonormalizing in order.
// Intended for directions that turn by less than a right angle per step;
// if the turn reaches that regime, or the projected columns lose rank
// (pivot below 1e-8), the frame is rebuilt from scratch and `frame_reset`
// is set.
NormalFrame transport_frame(const NormalFrame& previous, const Vec& new_direction,
                            bool* frame_reset = nullptr);

}  // namespace hyptimes
