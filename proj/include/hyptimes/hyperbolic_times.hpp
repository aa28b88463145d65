#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "hyptimes/flow.hpp"
#include "hyptimes/lpf.hpp"
#include "hyptimes/pliss.hpp"

namespace hyptimes {

// Per-block log expansion rates ln||Df^b|| along a map orbit, with the
// one-block derivative rebuilt as a product of stored one-step Jacobians.
struct ExponentSeries {
  std::vector<double> values;
  std::size_t block_steps = 1;
  double max_value = 0.0;
  double min_value = 0.0;
};

ExponentSeries block_exponent_series(const SmoothSystem& system,
                                     const TrajectorySegment& seg,
                                     std::size_t block_steps = 1);

// 0.9 of the tail-average contraction rate of a block series, clamped at
// zero. A crude but deterministic default for the detection threshold.
double auto_zeta(const ExponentSeries& series);

// Times along a map orbit from which every forward window contracts at mean
// rate at least zeta/2 through the end of the data. Indices are 0-based
// positions into the step sequence.
struct ReverseHyperbolicTimes {
  std::vector<std::size_t> indices;
  double zeta = 0.0;
  double theta = 0.0;       // guaranteed density when the guarantee is active
  double fraction = 0.0;    // detected count / step count
  double h_bound = 0.0;     // upper bound used for the one-step rates
  bool guarantee_active = false;
  bool certified = false;   // direct window re-check of reported positions
  std::size_t certified_checked = 0;
};

ReverseHyperbolicTimes detect_reverse_hyperbolic_times_map(
    const SmoothSystem& system, const TrajectorySegment& seg, double zeta,
    std::optional<double> h_bound = std::nullopt);

// Flow analogue through the normal cocycle: times t after which
// ln||P_{t -> s}|| <= -(zeta/2) (s - t) for every later sample s. The scan
// produces candidates; a capped subset of (t, s) pairs is re-checked against
// the factored cocycle P_s P_t^{-1}.
struct FlowReverseHyperbolicTimes {
  std::vector<std::size_t> indices;
  std::vector<double> times;
  double zeta = 0.0;
  double rate = 0.0;        // certified contraction rate, zeta/2
  double measure = 0.0;
  double theta = 0.0;
  bool guarantee_active = false;
  bool certified = false;
  std::size_t certified_pairs = 0;
};

FlowReverseHyperbolicTimes detect_lpf_reverse_hyperbolic_times(
    const SmoothSystem& system, const TrajectorySegment& seg,
    const LpfCocycle& cocycle, double zeta,
    std::optional<double> a_lower = std::nullopt);

// Radius within which one-step derivatives vary by a factor of at most
// e^{zeta/4}: largest power of two below (e^{zeta/4} - 1) * min ||Df|| / K
// with K a sampled Lipschitz constant of Df over the system's sample box.
struct ContractingBall {
  double radius = 0.0;
  double raw_bound = 0.0;
  double lipschitz = 0.0;
  double min_derivative_norm = 0.0;
};

ContractingBall contracting_ball_radius(const SmoothSystem& system, double zeta,
                                        std::size_t probe_count = 256,
                                        std::optional<double> lipschitz = std::nullopt);

}  // namespace hyptimes
