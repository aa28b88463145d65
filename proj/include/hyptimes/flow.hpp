#pragma once

#include <cstddef>
#include <vector>

#include "hyptimes/system.hpp"

namespace hyptimes {

struct IntegrateOptions {
  double dt = 1e-3;
  bool with_fundamental = true;
  std::size_t record_stride = 1;  // keep every r-th step (plus the final state)
  double blowup_norm = 1e12;
};

// Sampled trajectory with (optionally) the fundamental matrices of the
// variational equation accumulated from the start: fundamentals[k] is
// D phi_{t_k}(x0) for flows and Df^k(x0) for maps, with fundamentals[0] = I.
// States are stored wrapped into the chart.
struct TrajectorySegment {
  SystemKind kind = SystemKind::kVectorField;
  double t0 = 0.0;
  double dt = 0.0;                // base integrator step (1 for maps)
  std::size_t record_stride = 1;
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<Mat> fundamentals;  // empty when disabled

  std::size_t size() const { return states.size(); }
  bool has_fundamentals() const { return !fundamentals.empty(); }
};

// Fixed-step classical Runge-Kutta over [0, T], state and variational
// equation advanced jointly with the same tableau. The final step is shrunk
// so the last sample lands exactly on T. Bitwise deterministic for fixed
// inputs. Throws BlowUpError when the state norm passes the guard.
TrajectorySegment integrate(const SmoothSystem& system, const Vec& x0, double T,
                            const IntegrateOptions& opts = {});

// Orbit of a map with cumulative Jacobian products.
TrajectorySegment iterate(const SmoothSystem& system, const Vec& x0, std::size_t n,
                          bool with_fundamental = true);

// Final state and fundamental matrix only (no recording); used for embedded
// time-T maps and re-integration checks.
std::pair<Vec, Mat> advance(const SmoothSystem& system, const Vec& x0, double T,
                            double dt, bool with_fundamental = true,
                            double blowup_norm = 1e12);

// Relative defect of the cocycle property of the stored fundamentals:
// || Z_{k+j} - W_j Z_k || / || Z_{k+j} || with W_j re-integrated from the
// stored state at index k over the same grid.
double cocycle_residual(const SmoothSystem& system, const TrajectorySegment& seg,
                        std::size_t k, std::size_t j);

// Field negation: trajectories of the result traverse those of the input
// with time reversed. Flows only.
SmoothSystem time_reversed(const SmoothSystem& system);

// Discretization of a flow as the time-T map, with the Jacobian supplied by
// the variational equation over one application.
SmoothSystem flow_time_map(const SmoothSystem& system, double map_time, double dt);

}  // namespace hyptimes
