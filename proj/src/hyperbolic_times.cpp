#include "hyptimes/hyperbolic_times.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "hyptimes/errors.hpp"
#include "hyptimes/geometry.hpp"
#include "hyptimes/smallmat.hpp"

namespace hyptimes {

namespace {

double unit_double(std::mt19937_64& rng) {
  return std::ldexp(static_cast<double>(rng() >> 11), -53);
}

}  // namespace

ExponentSeries block_exponent_series(const SmoothSystem& system,
                                     const TrajectorySegment& seg,
                                     std::size_t block_steps) {
  if (system.kind != SystemKind::kMap)
    throw InputError("block series applies to maps; flows go through the normal cocycle");
  if (block_steps == 0) throw InputError("block_steps must be positive");
  if (seg.size() < block_steps + 1)
    throw InputError("orbit too short for the requested block length");

  ExponentSeries out;
  out.block_steps = block_steps;
  const std::size_t blocks = (seg.size() - 1) / block_steps;
  out.values.reserve(blocks);
  for (std::size_t b = 0; b < blocks; ++b) {
    Mat prod = Mat::Identity(system.dimension, system.dimension);
    for (std::size_t s = 0; s < block_steps; ++s)
      prod = system.jacobian(seg.states[b * block_steps + s]) * prod;
    out.values.push_back(log_operator_norm(prod));
  }
  out.max_value = *std::max_element(out.values.begin(), out.values.end());
  out.min_value = *std::min_element(out.values.begin(), out.values.end());
  return out;
}

double auto_zeta(const ExponentSeries& series) {
  if (series.values.empty()) throw InputError("empty exponent series");
  const std::size_t begin = series.values.size() / 2;
  double mean = 0.0;
  for (std::size_t j = begin; j < series.values.size(); ++j) mean += series.values[j];
  mean /= static_cast<double>(series.values.size() - begin);
  return 0.9 * std::max(0.0, -mean) / static_cast<double>(series.block_steps);
}

ReverseHyperbolicTimes detect_reverse_hyperbolic_times_map(
    const SmoothSystem& system, const TrajectorySegment& seg, double zeta,
    std::optional<double> h_bound) {
  if (!(zeta > 0.0)) throw InputError("zeta must be positive");
  ExponentSeries series = block_exponent_series(system, seg, 1);
  const std::size_t n = series.values.size();

  // Contraction rates: b_j = -ln||Df(x_j)||, to be held at mean >= zeta/2
  // over every forward window.
  std::vector<double> b(n);
  for (std::size_t j = 0; j < n; ++j) b[j] = -series.values[j];
  const double b_max = -series.min_value;
  const double h = h_bound.value_or(std::max(b_max, zeta));
  if (h_bound && *h_bound < b_max)
    throw InputError("h_bound is below the observed one-step rates");

  PlissResult scan = reverse_pliss_times(b, 0.5 * zeta, zeta, h);

  ReverseHyperbolicTimes out;
  out.indices = scan.indices;
  out.zeta = zeta;
  out.theta = scan.theta;
  out.h_bound = h;
  out.fraction = static_cast<double>(scan.indices.size()) / static_cast<double>(n);
  out.guarantee_active = scan.guarantee_active;

  // Direct re-check of the defining inequality on a work-capped subset of
  // the reported positions.
  constexpr std::size_t kWorkCap = 2'000'000;
  std::size_t stride = 1;
  if (!scan.indices.empty()) {
    double work = 0.0;
    for (std::size_t idx : scan.indices) work += static_cast<double>(n - idx);
    if (work > kWorkCap)
      stride = static_cast<std::size_t>(work / kWorkCap) + 1;
  }
  bool all_ok = true;
  std::size_t checked = 0;
  for (std::size_t i = 0; i < scan.indices.size(); i += stride) {
    const std::size_t start = scan.indices[i];
    double sum = 0.0;
    for (std::size_t e = start; e < n; ++e) {
      sum += series.values[e];
      const double len = static_cast<double>(e - start + 1);
      if (sum > -0.5 * zeta * len + 1e-9) {
        all_ok = false;
        break;
      }
    }
    ++checked;
    if (!all_ok) break;
  }
  out.certified = all_ok && checked > 0;
  out.certified_checked = checked;
  return out;
}

FlowReverseHyperbolicTimes detect_lpf_reverse_hyperbolic_times(
    const SmoothSystem& system, const TrajectorySegment& seg,
    const LpfCocycle& cocycle, double zeta, std::optional<double> a_lower) {
  if (!(zeta > 0.0)) throw InputError("zeta must be positive");
  if (cocycle.size() < 2) throw InputError("cocycle too short");
  if (seg.size() != cocycle.size())
    throw InputError("segment and cocycle sample counts differ");
  const double grid = cocycle.times[1] - cocycle.times[0];

  // The scan reconstructs times as k * grid; a shorter final integration
  // step would shift the last point, so trim it when present.
  std::size_t usable = cocycle.size();
  const double last_gap =
      cocycle.times[usable - 1] - cocycle.times[usable - 2];
  if (std::abs(last_gap - grid) > 1e-9 * std::max(1.0, grid)) --usable;
  std::vector<double> track(cocycle.log_norms.begin(),
                            cocycle.log_norms.begin() +
                                static_cast<std::ptrdiff_t>(usable));

  double a_low;
  if (a_lower) {
    a_low = *a_lower;
  } else {
    double l_est = 0.0;
    for (std::size_t k = 0; k < seg.size(); ++k)
      l_est = std::max(l_est, operator_norm(system.jacobian(seg.states[k])));
    a_low = -(l_est + 0.05);
  }

  // Scan at c = -zeta with eps = zeta/2, so qualifying times see the tracked
  // log norm drop at rate >= zeta/2 over every later sample.
  FlowPlissResult scan = flow_pliss_set(track, grid, -zeta, 0.5 * zeta, a_low);

  FlowReverseHyperbolicTimes out;
  out.indices = scan.indices;
  out.zeta = zeta;
  out.rate = 0.5 * zeta;
  out.measure = scan.measure;
  out.theta = scan.theta;
  out.guarantee_active = scan.guarantee_active;
  out.times.reserve(scan.indices.size());
  for (std::size_t idx : scan.indices) out.times.push_back(cocycle.times[idx]);

  // Factored re-check on a capped subset of (start, later sample) pairs:
  // the cocycle from start to s is mats[s] * mats[start]^{-1} exactly.
  bool all_ok = true;
  std::size_t pairs = 0;
  const std::size_t start_stride =
      scan.indices.empty() ? 1 : std::max<std::size_t>(1, scan.indices.size() / 60);
  for (std::size_t i = 0; i < scan.indices.size(); i += start_stride) {
    const std::size_t tau = scan.indices[i];
    if (tau + 1 >= cocycle.size()) continue;
    Mat inv_tau = cocycle.mats[tau].inverse();
    const std::size_t span = cocycle.size() - 1 - tau;
    const std::size_t s_stride = std::max<std::size_t>(1, span / 40);
    for (std::size_t s = tau + 1; s < cocycle.size(); s += s_stride) {
      const double dt = cocycle.times[s] - cocycle.times[tau];
      const double grown = log_operator_norm(Mat(cocycle.mats[s] * inv_tau));
      ++pairs;
      if (grown > -out.rate * dt + 1e-9 * std::max(1.0, out.rate * dt)) {
        all_ok = false;
        break;
      }
    }
    if (!all_ok) break;
  }
  out.certified = all_ok && pairs > 0;
  out.certified_pairs = pairs;
  return out;
}

ContractingBall contracting_ball_radius(const SmoothSystem& system, double zeta,
                                        std::size_t probe_count,
                                        std::optional<double> lipschitz) {
  if (!(zeta > 0.0)) throw InputError("zeta must be positive");
  if (probe_count < 2) throw InputError("need at least two probes");
  if (system.sample_lo.size() != system.dimension ||
      system.sample_hi.size() != system.dimension)
    throw InputError("system does not declare a sampling box");

  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  auto draw = [&]() {
    Vec x(system.dimension);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double u = unit_double(rng);
      x(i) = system.sample_lo(i) + u * (system.sample_hi(i) - system.sample_lo(i));
    }
    return x;
  };

  std::vector<Vec> probes(probe_count);
  std::vector<Mat> jacs(probe_count);
  double min_norm = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < probe_count; ++i) {
    probes[i] = draw();
    jacs[i] = system.jacobian(probes[i]);
    min_norm = std::min(min_norm, operator_norm(jacs[i]));
  }
  if (!(min_norm > 0.0))
    throw HypothesisViolationError("derivative norm vanishes on the sampling box");

  double k_est;
  if (lipschitz) {
    k_est = *lipschitz;
    if (!(k_est >= 0.0)) throw InputError("lipschitz constant must be >= 0");
  } else {
    k_est = 0.0;
    for (std::size_t i = 0; i + 1 < probe_count; ++i) {
      const double dist = chart_distance(system.topology, probes[i], probes[i + 1]);
      if (dist < 1e-12) continue;
      k_est = std::max(k_est, operator_norm(Mat(jacs[i] - jacs[i + 1])) / dist);
    }
    k_est *= 1.5;  // sampled slopes undershoot the true constant
  }

  ContractingBall out;
  out.lipschitz = k_est;
  out.min_derivative_norm = min_norm;
  const double diam = chart_diameter(system.topology, system.sample_lo, system.sample_hi);
  if (k_est < 1e-12 * std::max(1.0, min_norm)) {
    out.raw_bound = diam;
  } else {
    out.raw_bound = std::min(diam, (std::exp(0.25 * zeta) - 1.0) * min_norm / k_est);
  }
  out.radius = std::exp2(std::floor(std::log2(out.raw_bound)));
  return out;
}

}  // namespace hyptimes
