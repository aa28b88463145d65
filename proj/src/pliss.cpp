#include "hyptimes/pliss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hyptimes/errors.hpp"

namespace hyptimes {

namespace {
constexpr double kSuffixTol = 1e-12;

void check_constants(double c1, double c2, double H) {
  if (!(c1 > 0.0) || !(c2 > c1) || !(H >= c2)) {
    throw InputError("pliss constants must satisfy H >= c2 > c1 > 0");
  }
}
}  // namespace

PlissResult pliss_times(std::span<const double> a, double c1, double c2, double H) {
  check_constants(c1, c2, H);
  const std::size_t n = a.size();
  PlissResult r;
  r.theta = (c2 - c1) / (H - c1);

  double sum = 0.0;
  double max_entry = -std::numeric_limits<double>::infinity();
  double prefix = 0.0;            // S_k = sum_{j<=k} (a_j - c1)
  double running_max = 0.0;       // max of S_0..S_{k-1}, S_0 = 0
  r.indices.reserve(n / 2);
  for (std::size_t k = 0; k < n; ++k) {
    sum += a[k];
    max_entry = std::max(max_entry, a[k]);
    prefix += a[k] - c1;
    if (prefix >= running_max) r.indices.push_back(k + 1);
    running_max = std::max(running_max, prefix);
  }
  r.guarantee_active = n > 0 && sum >= c2 * static_cast<double>(n) &&
                       max_entry <= H && H > c2;
  return r;
}

PlissResult reverse_pliss_times(std::span<const double> a, double c1, double c2,
                                double H) {
  std::vector<double> rev(a.rbegin(), a.rend());
  PlissResult fwd = pliss_times(rev, c1, c2, H);
  PlissResult r;
  r.theta = fwd.theta;
  r.guarantee_active = fwd.guarantee_active;
  r.indices.reserve(fwd.indices.size());
  for (auto it = fwd.indices.rbegin(); it != fwd.indices.rend(); ++it) {
    r.indices.push_back(a.size() - *it);
  }
  return r;
}

FlowPlissResult flow_pliss_set(std::span<const double> h, double grid_step, double c,
                               double eps, std::optional<double> a_lower) {
  if (h.size() < 2) throw InputError("flow_pliss_set: need at least two samples");
  if (!(grid_step > 0.0)) throw InputError("flow_pliss_set: grid step must be positive");
  if (!(eps > 0.0)) throw InputError("flow_pliss_set: eps must be positive");
  if (std::abs(h[0]) > 1e-9) {
    throw InputError("flow_pliss_set: samples must start at H(0) = 0");
  }

  const std::size_t n = h.size();
  const double T = static_cast<double>(n - 1) * grid_step;

  double min_quot = std::numeric_limits<double>::infinity();
  double max_quot_jump = 0.0;
  double prev_quot = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double q = (h[k + 1] - h[k]) / grid_step;
    min_quot = std::min(min_quot, q);
    if (k > 0) max_quot_jump = std::max(max_quot_jump, std::abs(q - prev_quot));
    prev_quot = q;
  }
  const double a = a_lower.value_or(min_quot - max_quot_jump);

  FlowPlissResult r;
  r.grid_step = grid_step;
  r.a_used = a;
  const double denom = c + eps - a;
  r.theta = denom > 0.0 ? eps / denom : std::numeric_limits<double>::quiet_NaN();

  // Suffix-maximum scan of G_k = H_k - (c+eps) t_k, back to front.
  std::vector<std::size_t> qualifying;
  double suffix_max = -std::numeric_limits<double>::infinity();
  for (std::size_t k = n; k-- > 0;) {
    const double g = h[k] - (c + eps) * (static_cast<double>(k) * grid_step);
    if (g >= suffix_max - kSuffixTol) qualifying.push_back(k);
    suffix_max = std::max(suffix_max, g);
  }
  std::reverse(qualifying.begin(), qualifying.end());
  r.indices = std::move(qualifying);
  r.measure = static_cast<double>(r.indices.size()) * grid_step;

  r.guarantee_active = denom > 0.0 && c > a && h[n - 1] < c * T && min_quot > a &&
                       c + eps > min_quot;
  return r;
}

}  // namespace hyptimes
