#pragma once

#include <string>
#include <vector>

#include "hyptimes/flow.hpp"

namespace hyptimes {

// Cocycle of a flow restricted to the normal bundle of a trajectory:
// mats[k] represents the projected derivative from the normal space at the
// start to the normal space at sample k, written in transported orthonormal
// frames (so mats[0] = I). Assembled by chaining the projected transfer of
// each sample interval, Q_k^T Z(t_{k-1}, t_k) Q_{k-1}; the flow direction is
// invariant under the variational flow, so the chain equals Q_k^T Z_k Q_0
// while staying well conditioned over long horizons. log_norms/log_conorms
// are carried with a running scale and remain accurate even where the plain
// matrix product would leave the representable range.
struct LpfCocycle {
  std::vector<double> times;
  std::vector<Vec> directions;         // unit field directions at the samples
  std::vector<Mat> frames;             // d x (d-1) orthonormal normal frames
  std::vector<Mat> mats;               // (d-1) x (d-1) cocycle matrices
  std::vector<double> log_norms;       // ln of the largest singular value
  std::vector<double> log_conorms;     // ln of the smallest singular value
  std::vector<std::size_t> frame_resets;

  std::size_t size() const { return mats.size(); }
};

// Precondition: the field magnitude stays >= 1e-8 along the samples
// (SingularityProximityError otherwise) and the flow dimension is >= 2.
LpfCocycle lpf_cocycle(const SmoothSystem& system, const TrajectorySegment& seg,
                       const NormalFrame* initial_frame = nullptr);

inline constexpr double kMinFieldNorm = 1e-8;

// Instantaneous growth rate of the normal cocycle in direction v at x:
// <O DG v, v> for the unit normal component of v. v must have a
// non-negligible component normal to the field.
double generator_D(const SmoothSystem& system, const Vec& x, const Vec& v);

// Largest/smallest instantaneous normal rate at x: extreme eigenvalue of the
// symmetrized field derivative restricted to the normal space.
double generator_D_sup(const SmoothSystem& system, const Vec& x);
double generator_D_inf(const SmoothSystem& system, const Vec& x);

// Same quantities for the full derivative cocycle (no normal restriction).
double generator_DG(const SmoothSystem& system, const Vec& x, const Vec& v);
double generator_DG_sup(const SmoothSystem& system, const Vec& x);
double generator_DG_inf(const SmoothSystem& system, const Vec& x);

// One-sided difference quotients of t -> ln ||P^t v|| at the sample point,
// computed by short auxiliary integrations. Diagnostic only: the pipeline
// consumes generator_D and generator_D_sup.
std::pair<double, double> generator_D_one_sided(const SmoothSystem& system,
                                                const Vec& x, const Vec& v,
                                                double h, double dt);

// | ln ||P_k u0|| - integral of the generator along the orbit |, the
// integral taken with composite Simpson over the sample grid. v0 is an
// ambient vector; its normal component at the first sample is used.
double additivity_residual(const SmoothSystem& system, const TrajectorySegment& seg,
                           const LpfCocycle& cocycle, const Vec& v0, std::size_t k);

// Finite-window estimates of the sectional exponents ln||P^t||/t over
// [t_begin, t_end]. Window start must be >= 1 so the quotient is stable.
struct SectionalExponents {
  std::vector<double> times;
  std::vector<double> values;
  double liminf_estimate = 0.0;
  double limsup_estimate = 0.0;
  double window_begin = 0.0;
  double window_end = 0.0;
  std::string caveat;
};

SectionalExponents sectional_exponents(const LpfCocycle& cocycle, double t_begin,
                                       double t_end);

// Same windowed estimates for ln||(P^t)^{-1}||/t (expansion of the inverse
// cocycle), used by the source-side analysis.
SectionalExponents inverse_sectional_exponents(const LpfCocycle& cocycle,
                                               double t_begin, double t_end);

}  // namespace hyptimes
