#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace hyptimes {

// Result of a discrete Pliss selection over a finite sequence.
// `theta` is the guaranteed density (c2 - c1)/(H - c1); `guarantee_active`
// reports whether the count lower bound theta*N is in force, i.e. the
// hypotheses sum(a) >= c2*N, a_j <= H, and H > c2 hold for the data.
// (At H == c2 the bound degenerates to an equality case, so the strict
// guarantee is only claimed for H strictly above c2.)
struct PlissResult {
  std::vector<std::size_t> indices;
  double theta = 0.0;
  bool guarantee_active = false;
};

// Indices n in {1..N} such that every trailing window ending at n has mean
// at least c1: sum_{j=n'+1..n} a_j >= c1*(n - n') for all 0 <= n' < n.
// Single pass over prefix sums S_k = sum_{j<=k}(a_j - c1): n qualifies iff
// S_n >= max_{n'<n} S_{n'} (ties qualify). Requires H >= c2 > c1 > 0.
PlissResult pliss_times(std::span<const double> a, double c1, double c2, double H);

// Start positions h in {0..N-1} such that every window starting at h and
// ending at any e <= N-1 has mean at least c1. Equals pliss_times on the
// reversed sequence with indices mapped back via n -> N - n.
PlissResult reverse_pliss_times(std::span<const double> a, double c1, double c2,
                                double H);

// Continuous-time Pliss set of a sampled function H on a uniform grid
// t_k = k*grid_step, H(0) = 0 (within 1e-9). A grid time qualifies iff
// G_k = H_k - (c+eps)*t_k is a suffix maximum up to an open-set tolerance
// of 1e-12. `a_lower` is the lower bound A on the derivative of H; when
// absent it is estimated as (minimum sampled difference quotient) minus a
// one-grid-step Lipschitz margin. measure = count * grid_step.
struct FlowPlissResult {
  std::vector<std::size_t> indices;
  double grid_step = 0.0;
  double measure = 0.0;
  double theta = 0.0;
  double a_used = 0.0;
  bool guarantee_active = false;
};

FlowPlissResult flow_pliss_set(std::span<const double> h, double grid_step, double c,
                               double eps, std::optional<double> a_lower = {});

}  // namespace hyptimes
