#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hyptimes/flow.hpp"
#include "hyptimes/lpf.hpp"

namespace hyptimes {

// Newton iteration for a zero of the field (flows only). Returns nullopt
// when the iteration leaves the basin or stalls.
std::optional<Vec> locate_equilibrium(const SmoothSystem& system, const Vec& guess,
                                      double tol = 1e-12, std::size_t max_iters = 60);

struct SectionDisk {
  Vec center;
  Vec normal;       // unit normal; crossings are oriented along it
  double radius = 0.0;
};

struct SectionCrossing {
  double time = 0.0;
  Vec state;
  double speed = 0.0;  // field component along the disk normal
};

struct SectionOptions {
  double dt = 1e-3;
  bool positive_orientation_only = true;
  double min_time = 0.0;  // ignore crossings before this time
};

// Transversal crossings of the disk by the orbit of x0 over [0, horizon].
// Crossing times are bracketed by sign changes of the signed offset, then
// refined by bisection and a Newton polish on the offset.
std::vector<SectionCrossing> section_crossings(const SmoothSystem& system,
                                               const Vec& x0, double horizon,
                                               const SectionDisk& disk,
                                               const SectionOptions& opts = {});

struct ReturnMapDerivative {
  Mat derivative;        // in the disk frame, from the projected flow derivative
  Mat fd_derivative;     // Richardson-extrapolated central differences
  double relative_gap = 0.0;
  double return_time = 0.0;
  Vec return_point;
  std::vector<double> multipliers_abs;
  bool contracting = false;
};

// Derivative of the first-return map of the disk at a point on it, computed
// by projecting the flow derivative onto the section along the field and
// cross-checked against finite-difference probes.
ReturnMapDerivative return_map_derivative(const SmoothSystem& system, const Vec& x,
                                          const SectionDisk& disk, double horizon,
                                          const SectionOptions& opts = {});

struct NestedSearchResult {
  bool found = false;
  Vec point;
  std::size_t period = 0;
  double residual = 0.0;
  Mat derivative;        // derivative of the period-fold composition
  std::vector<double> multipliers_abs;
  bool contracting = false;
};

// Periodic-point search for maps: scan the orbit tail for a recurrence
// period, contract into the cycle by iterating the composition, refine by
// Newton, and reduce the period over its divisors.
NestedSearchResult nested_contraction_search(const SmoothSystem& map, const Vec& x0,
                                             std::size_t steps = 400,
                                             double cluster_radius = 0.15);

struct SingularityAnalysis {
  Vec point;
  std::vector<std::complex<double>> eigenvalues;
  std::size_t dim_stable = 0;
  std::size_t dim_unstable = 0;
  std::size_t dim_center = 0;
  bool hyperbolic = false;
  bool is_sink = false;
  bool is_source = false;
  bool is_saddle = false;
  bool codimension_one_unstable = false;  // saddle with one-dimensional unstable space
};

// Spectral data of the linearization at an equilibrium of a flow.
SingularityAnalysis analyze_singularity(const SmoothSystem& system, const Vec& x);

inline constexpr double kSpectralTol = 1e-8;

struct GronwallCheck {
  bool holds = false;
  double max_lhs = 0.0;
  double max_rhs = 0.0;
  double worst_margin = 0.0;  // max over samples of lhs - rhs
  double delta_bar = 0.0;
  double l_bound = 0.0;
  std::size_t comparisons = 0;
};

// Compares the flow derivative started inside a ball around `center` with
// the matrix exponential of the frozen linearization, against the bound
// delta_bar * t * exp(L t).
GronwallCheck gronwall_check(const SmoothSystem& system, const Vec& center,
                             double radius, double horizon,
                             std::size_t point_samples = 8,
                             std::size_t time_samples = 6, double dt = 1e-3);

struct CuspSectionHit {
  bool hit = false;
  double time = 0.0;
  Vec state;
  double f_initial = 0.0;
};

// First hit of the cusp surface ||u||^2 = |v| around a codimension-one
// saddle, with (u, v) the stable/unstable coordinates of the linearization.
// A start already inside the surface (f_initial <= 0) reports a hit at 0.
CuspSectionHit cusp_section_hit(const SmoothSystem& system, const Vec& saddle,
                                const Vec& x0, double horizon, double dt = 1e-3);

enum class TrajectoryClass {
  kFlowPeriodicSinkBasin,
  kFlowEquilibriumSink,
  kFlowSource,
  kAccumulatesSaddle,
  kMapPeriodicSink,
  kMapSourceOrbit,
  kInconclusive,
};

const char* to_string(TrajectoryClass c);

struct LocatedOrbit {
  Vec point;
  double period = 0.0;  // continuous time for flows, steps for maps
  std::vector<double> multipliers_abs;
  bool contracting = false;
};

struct ClassifyOptions {
  double horizon = 60.0;
  double dt = 1e-3;
  std::optional<double> zeta;          // detection threshold; automatic when unset
  std::size_t map_steps = 400;
  double section_radius = 0.1;
  double ball_entry_radius = 1e-2;
  std::optional<double> ball_radius;   // reuse a precomputed contracting radius
  double embed_dt = 0.02;              // step for embedded time-1 maps
  bool allow_mirror = true;            // permit the time-reversed / inverse pass
  bool cross_check_return_map = true;
};

struct ClassificationResult {
  TrajectoryClass label = TrajectoryClass::kInconclusive;
  double zeta = 0.0;
  double horizon = 0.0;
  double hyperbolic_time_fraction = 0.0;
  double contracting_radius = 0.0;
  double min_singularity_distance = -1.0;  // negative when no equilibrium is known
  std::optional<SectionalExponents> exponents;  // evidence from the located orbit
  std::optional<LocatedOrbit> orbit;
  std::optional<SingularityAnalysis> singularity;
  std::vector<std::string> caveats;
  std::vector<std::string> trace;
};

// Decision pipeline over the orbit of x0. Every branch label is backed by a
// verified object (periodic point, equilibrium, saddle visits); failed
// verification falls through rather than forcing a label.
ClassificationResult classify_trajectory(const SmoothSystem& system, const Vec& x0,
                                         const ClassifyOptions& opts = {});

}  // namespace hyptimes
