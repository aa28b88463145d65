#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "hyptimes/errors.hpp"
#include "hyptimes/pliss.hpp"

using namespace hyptimes;

namespace {

// Quadratic-time reference: n in {1..N} qualifies iff every window ending at
// n has mean at least c1.
std::vector<std::size_t> oracle_end_times(const std::vector<double>& a, double c1) {
  std::vector<std::size_t> out;
  const std::size_t n = a.size();
  for (std::size_t end = 1; end <= n; ++end) {
    bool ok = true;
    for (std::size_t start = 0; start < end; ++start) {
      double sum = 0.0;
      for (std::size_t j = start; j < end; ++j) sum += a[j];
      if (sum < c1 * static_cast<double>(end - start) - 1e-12) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(end);
  }
  return out;
}

// Quadratic-time reference for start positions: h in {0..N-1} qualifies iff
// every window starting at h has mean at least c1.
std::vector<std::size_t> oracle_start_positions(const std::vector<double>& a, double c1) {
  std::vector<std::size_t> out;
  const std::size_t n = a.size();
  for (std::size_t h = 0; h < n; ++h) {
    bool ok = true;
    for (std::size_t e = h; e < n; ++e) {
      double sum = 0.0;
      for (std::size_t j = h; j <= e; ++j) sum += a[j];
      if (sum < c1 * static_cast<double>(e - h + 1) - 1e-12) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(h);
  }
  return out;
}

// Quadratic-time reference for the sampled flow variant: k qualifies iff
// G_k >= G_j for all j > k with G_k = h_k - (c+eps) * t_k.
std::vector<std::size_t> oracle_flow_set(const std::vector<double>& h, double grid,
                                         double c, double eps) {
  std::vector<std::size_t> out;
  const std::size_t n = h.size();
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k)
    g[k] = h[k] - (c + eps) * grid * static_cast<double>(k);
  for (std::size_t k = 0; k < n; ++k) {
    bool ok = true;
    for (std::size_t j = k + 1; j < n; ++j) {
      if (g[j] > g[k] + 1e-12) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(k);
  }
  return out;
}

}  // namespace

TEST_CASE("end-time selection matches the quadratic oracle on all short 0/1 words") {
  for (std::size_t n = 1; n <= 12; ++n) {
    for (std::size_t mask = 0; mask < (1u << n); ++mask) {
      std::vector<double> a(n);
      for (std::size_t j = 0; j < n; ++j) a[j] = (mask >> j) & 1u ? 1.0 : 0.0;
      PlissResult r = pliss_times(a, 0.5, 0.75, 1.0);
      std::vector<std::size_t> ref = oracle_end_times(a, 0.5);
      CAPTURE(n);
      CAPTURE(mask);
      REQUIRE(r.indices == ref);
    }
  }
}

TEST_CASE("end-time selection matches the oracle on random real sequences") {
  std::mt19937_64 rng(424242);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 40;
    std::vector<double> a(n);
    for (double& x : a) x = u(rng);
    const double c1 = 0.2 + 0.6 * u(rng) / 2.0;
    PlissResult r = pliss_times(a, c1, c1 + 0.1, 2.0);
    CAPTURE(trial);
    REQUIRE(r.indices == oracle_end_times(a, c1));
  }
}

TEST_CASE("start-position selection matches its oracle, including the alternating word") {
  std::vector<double> alt = {0.0, 2.0, 0.0, 2.0};
  PlissResult r = reverse_pliss_times(alt, 0.5, 1.0, 2.0);
  CHECK(r.indices == std::vector<std::size_t>{1, 3});
  CHECK(r.indices == oracle_start_positions(alt, 0.5));

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 600; ++trial) {
    const std::size_t n = 1 + rng() % 30;
    std::vector<double> a(n);
    for (double& x : a) x = u(rng);
    const double c1 = 0.3 + 0.2 * u(rng);
    PlissResult rr = reverse_pliss_times(a, c1, c1 + 0.05, 2.0);
    CAPTURE(trial);
    REQUIRE(rr.indices == oracle_start_positions(a, c1));
  }
}

TEST_CASE("start positions of a word are mirrored end times of the reversed word") {
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> u(0.0, 1.5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 20;
    std::vector<double> a(n);
    for (double& x : a) x = u(rng);
    std::vector<double> rev(a.rbegin(), a.rend());
    PlissResult fwd = pliss_times(rev, 0.4, 0.6, 1.5);
    PlissResult bwd = reverse_pliss_times(a, 0.4, 0.6, 1.5);
    std::vector<std::size_t> mapped;
    for (std::size_t e : fwd.indices) mapped.push_back(n - e);
    std::sort(mapped.begin(), mapped.end());
    REQUIRE(bwd.indices == mapped);
  }
}

TEST_CASE("lowering the window threshold only enlarges the selection") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 5 + rng() % 25;
    std::vector<double> a(n);
    for (double& x : a) x = u(rng);
    PlissResult strict = pliss_times(a, 0.5, 0.6, 1.0);
    PlissResult loose = pliss_times(a, 0.25, 0.6, 1.0);
    CHECK(std::includes(loose.indices.begin(), loose.indices.end(),
                        strict.indices.begin(), strict.indices.end()));
  }
}

TEST_CASE("density guarantee holds whenever its hypotheses hold") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.55, 1.0);  // mean straddles c2
  const double c1 = 0.5, c2 = 0.75, cap = 1.0;
  int active_seen = 0, inactive_seen = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 4 + rng() % 24;
    std::vector<double> a(n);
    for (double& x : a) x = u(rng);
    PlissResult r = pliss_times(a, c1, c2, cap);
    double sum = 0.0;
    for (double x : a) sum += x;
    const bool hypothesis = sum >= c2 * static_cast<double>(n);
    CHECK(r.guarantee_active == hypothesis);  // cap > c2 and entries <= cap by construction
    if (r.guarantee_active) {
      ++active_seen;
      CHECK(static_cast<double>(r.indices.size()) >
            r.theta * static_cast<double>(n) - 1e-12);
      CHECK(r.theta == doctest::Approx((c2 - c1) / (cap - c1)));
    } else {
      ++inactive_seen;
    }
  }
  // The sample exercised the bound and its negation.
  CHECK(active_seen > 100);
  CHECK(inactive_seen > 100);
}

TEST_CASE("guarantee is withheld when the cap equals the mean hypothesis") {
  std::vector<double> ones(6, 1.0);
  PlissResult r = pliss_times(ones, 0.5, 1.0, 1.0);
  CHECK(r.indices.size() == 6);
  CHECK_FALSE(r.guarantee_active);  // H == c2 degenerates the density bound
  PlissResult strict = pliss_times(ones, 0.5, 0.9, 1.0);
  CHECK(strict.guarantee_active);
}

TEST_CASE("constant rejection: below-threshold sequences select nothing") {
  std::vector<double> low(10, 0.4);
  PlissResult r = pliss_times(low, 0.5, 0.75, 1.0);
  CHECK(r.indices.empty());
  CHECK_FALSE(r.guarantee_active);
}

TEST_CASE("invalid constants are rejected") {
  std::vector<double> a = {1.0, 1.0};
  CHECK_THROWS_AS(pliss_times(a, 0.8, 0.5, 1.0), InputError);   // c1 > c2
  CHECK_THROWS_AS(pliss_times(a, 0.0, 0.5, 1.0), InputError);   // c1 = 0
  CHECK_THROWS_AS(pliss_times(a, 0.2, 0.5, 0.4), InputError);   // H < c2
  CHECK_THROWS_AS(reverse_pliss_times(a, 0.8, 0.5, 1.0), InputError);
}

TEST_CASE("flow variant reproduces the closed-form set for a concave log profile") {
  // H(t) = log(1+t), c = 1/2, eps = 1/10: G(s) = log(1+s) - 0.6 s increases
  // until s = 2/3 and decreases afterwards, so the suffix-maximum set is
  // exactly [2/3, 10].
  const double grid = 1e-3, horizon = 10.0;
  const std::size_t n = static_cast<std::size_t>(std::llround(horizon / grid)) + 1;
  std::vector<double> h(n);
  for (std::size_t k = 0; k < n; ++k) h[k] = std::log1p(grid * static_cast<double>(k));
  FlowPlissResult r = flow_pliss_set(h, grid, 0.5, 0.1, 1.0 / 11.0);
  REQUIRE_FALSE(r.indices.empty());
  const double first = grid * static_cast<double>(r.indices.front());
  CHECK(std::abs(first - 2.0 / 3.0) <= grid + 1e-12);
  CHECK(grid * static_cast<double>(r.indices.back()) == doctest::Approx(10.0));
  // The qualifying indices form one contiguous block.
  for (std::size_t i = 1; i < r.indices.size(); ++i)
    REQUIRE(r.indices[i] == r.indices[i - 1] + 1);
  CHECK(r.measure == doctest::Approx(10.0 - 2.0 / 3.0).epsilon(5e-4));
  // Density guarantee with the supplied slope bound A = 1/11.
  const double theta = 0.1 / (0.6 - 1.0 / 11.0);
  CHECK(r.theta == doctest::Approx(theta));
  CHECK(r.guarantee_active);
  CHECK(r.measure >= theta * horizon - grid);
  CHECK(theta * horizon == doctest::Approx(1.9646).epsilon(1e-3));
}

TEST_CASE("flow variant matches the quadratic oracle on an oscillating profile") {
  // H(t) = (1 + sin(2t)/7) log(1+t) wiggles enough to fragment the set.
  const double grid = 2e-3, horizon = 10.0;
  const std::size_t n = static_cast<std::size_t>(std::llround(horizon / grid)) + 1;
  std::vector<double> h(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = grid * static_cast<double>(k);
    h[k] = (1.0 + std::sin(2.0 * t) / 7.0) * std::log1p(t);
  }
  FlowPlissResult r = flow_pliss_set(h, grid, 0.5, 0.1, {});
  std::vector<std::size_t> ref = oracle_flow_set(h, grid, 0.5, 0.1);
  REQUIRE(r.indices == ref);
  CHECK(r.measure == doctest::Approx(grid * static_cast<double>(ref.size())));
}

TEST_CASE("sliding property: a qualifying time stays qualifying with a relaxed margin") {
  // If tau qualifies for (c, eps) then tau + eta qualifies for (c, eps_hat)
  // with eps_hat = eps + eta (c + eps - A) / (T - tau - eta), because the
  // compensated profile loses at most the slope gap over the shift.
  const double grid = 1e-3, horizon = 10.0;
  const std::size_t n = static_cast<std::size_t>(std::llround(horizon / grid)) + 1;
  std::vector<double> h(n);
  for (std::size_t k = 0; k < n; ++k) h[k] = std::log1p(grid * static_cast<double>(k));
  const double c = 0.5, eps = 0.1, a_low = 1.0 / 11.0;
  FlowPlissResult base = flow_pliss_set(h, grid, c, eps, a_low);
  REQUIRE_FALSE(base.indices.empty());
  const std::size_t tau_idx = base.indices.front();
  const double tau = grid * static_cast<double>(tau_idx);
  for (double eta : {0.5, 1.0, 2.0}) {
    const double gap = horizon - tau - eta;
    REQUIRE(gap > 0.0);
    const double eps_hat = eps + eta * (c + eps - a_low) / gap;
    FlowPlissResult shifted = flow_pliss_set(h, grid, c, eps_hat, a_low);
    const std::size_t want = tau_idx + static_cast<std::size_t>(std::llround(eta / grid));
    CAPTURE(eta);
    CHECK(std::binary_search(shifted.indices.begin(), shifted.indices.end(), want));
  }
}

TEST_CASE("flow variant rejects malformed input") {
  CHECK_THROWS_AS(flow_pliss_set(std::vector<double>{0.0}, 1e-3, 0.5, 0.1, {}),
                  InputError);
  CHECK_THROWS_AS(flow_pliss_set(std::vector<double>{0.0, 0.1}, 0.0, 0.5, 0.1, {}),
                  InputError);
  CHECK_THROWS_AS(flow_pliss_set(std::vector<double>{0.0, 0.1}, 1e-3, 0.5, 0.0, {}),
                  InputError);
  CHECK_THROWS_AS(flow_pliss_set(std::vector<double>{0.5, 0.6}, 1e-3, 0.5, 0.1, {}),
                  InputError);
}
