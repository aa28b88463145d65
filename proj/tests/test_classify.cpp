#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <complex>

#include "hyptimes/classify.hpp"
#include "hyptimes/errors.hpp"
#include "hyptimes/flow.hpp"
#include "hyptimes/systems.hpp"

using namespace hyptimes;

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec v1(double a) {
  Vec v(1);
  v << a;
  return v;
}

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Mat stable_focus() {
  Mat a(2, 2);
  a << -0.5, -1.0, 1.0, -0.5;
  return a;
}

Mat unstable_focus() {
  Mat a(2, 2);
  a << 0.5, -1.0, 1.0, 0.5;
  return a;
}

bool near_declared_equilibrium(const SmoothSystem& sys, const Vec& p, double tol) {
  for (const Vec& q : sys.equilibria)
    if (chart_distance(sys.topology, p, q) < tol) return true;
  return false;
}

}  // namespace

TEST_CASE("newton equilibrium location converges on linear and nonlinear fields") {
  SmoothSystem focus = linear_field(stable_focus());
  auto zero = locate_equilibrium(focus, v2(3.0, -2.0));
  REQUIRE(zero.has_value());
  CHECK(zero->norm() < 1e-10);

  SmoothSystem cycle = limit_cycle_field(false);
  auto inner = locate_equilibrium(cycle, v2(0.2, -0.1));
  REQUIRE(inner.has_value());
  CHECK(inner->norm() < 1e-10);

  // A guess on the unit cycle itself is far from the basin of the Newton
  // iteration's fixed point only in degenerate cases; a constant field has
  // no zero at all and must report failure.
  SmoothSystem torus = constant_torus_field();
  CHECK(!locate_equilibrium(torus, v2(0.5, 0.5)).has_value());
}

TEST_CASE("nested periodic search finds the fixed point of contracting maps") {
  SmoothSystem half = linear_map(Mat(0.5 * Mat::Identity(2, 2)));
  NestedSearchResult r = nested_contraction_search(half, v2(1.0, 0.3));
  REQUIRE(r.found);
  CHECK(r.period == 1);
  CHECK(r.point.norm() < 1e-9);
  REQUIRE(r.multipliers_abs.size() == 2);
  CHECK(r.multipliers_abs[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(r.multipliers_abs[1] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(r.contracting);
  CHECK(r.residual < 1e-9);

  SmoothSystem sinus = sinus_sinks_map();
  NestedSearchResult s = nested_contraction_search(sinus, v1(0.0159));
  REQUIRE(s.found);
  CHECK(s.period == 1);
  CHECK(near_declared_equilibrium(sinus, s.point, 1e-6));
  const double df = std::abs(sinus.jacobian(s.point)(0, 0));
  REQUIRE(s.multipliers_abs.size() == 1);
  CHECK(s.multipliers_abs[0] == doctest::Approx(df).epsilon(1e-6));
  CHECK(s.contracting);
}

TEST_CASE("singularity analysis separates sink, source, saddle, center") {
  SmoothSystem sink = linear_field(stable_focus());
  SingularityAnalysis a = analyze_singularity(sink, v2(0.0, 0.0));
  CHECK(a.hyperbolic);
  CHECK(a.is_sink);
  CHECK(!a.is_source);
  CHECK(!a.is_saddle);
  CHECK(a.dim_stable == 2);
  REQUIRE(a.eigenvalues.size() == 2);
  auto lo = a.eigenvalues[0].imag() < a.eigenvalues[1].imag() ? a.eigenvalues[0]
                                                              : a.eigenvalues[1];
  CHECK(lo.real() == doctest::Approx(-0.5).epsilon(1e-10));
  CHECK(lo.imag() == doctest::Approx(-1.0).epsilon(1e-10));

  SingularityAnalysis b = analyze_singularity(linear_field(unstable_focus()),
                                              v2(0.0, 0.0));
  CHECK(b.is_source);
  CHECK(b.dim_unstable == 2);

  Mat saddle(2, 2);
  saddle << -1.0, 0.0, 0.0, 2.0;
  SingularityAnalysis c = analyze_singularity(linear_field(saddle), v2(0.0, 0.0));
  CHECK(c.is_saddle);
  CHECK(c.codimension_one_unstable);
  CHECK(c.dim_stable == 1);
  CHECK(c.dim_unstable == 1);

  Mat center(2, 2);
  center << 0.0, -1.0, 1.0, 0.0;
  SingularityAnalysis d = analyze_singularity(linear_field(center), v2(0.0, 0.0));
  CHECK(!d.hyperbolic);
  CHECK(d.dim_center == 2);
}

TEST_CASE("frozen-linearization comparison is exact for linear fields") {
  SmoothSystem sys = linear_field(stable_focus());
  GronwallCheck g = gronwall_check(sys, v2(0.0, 0.0), 1e-2, 1.0);
  CHECK(g.holds);
  CHECK(g.comparisons > 0);
  CHECK(g.max_lhs <= 1e-9);
  CHECK(g.worst_margin <= 1e-12);
}

TEST_CASE("frozen-linearization bound holds near the figure-eight saddles") {
  SmoothSystem sys = bowen_type_field();
  REQUIRE(!sys.equilibria.empty());
  for (double radius : {1e-2, 1e-3}) {
    CAPTURE(radius);
    GronwallCheck g = gronwall_check(sys, sys.equilibria[0], radius, 1.0, 4, 4);
    CHECK(g.holds);
    CHECK(g.comparisons > 0);
  }
}

TEST_CASE("cusp surface hit time is exact for the unit linear saddle") {
  Mat a(2, 2);
  a << -1.0, 0.0, 0.0, 1.0;
  SmoothSystem sys = linear_field(a);

  // u(t) = e^{-t}, v(t) = e^{t-3}: u^2 = |v| exactly at t = 1.
  CuspSectionHit hit = cusp_section_hit(sys, v2(0.0, 0.0), v2(1.0, std::exp(-3.0)),
                                        5.0);
  REQUIRE(hit.hit);
  CHECK(hit.time == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(hit.f_initial == doctest::Approx(1.0 - std::exp(-3.0)).epsilon(1e-12));
  CHECK(hit.state(0) * hit.state(0) ==
        doctest::Approx(std::abs(hit.state(1))).epsilon(1e-6));

  // On the stable axis the unstable coordinate stays zero and the surface is
  // never reached.
  CuspSectionHit miss = cusp_section_hit(sys, v2(0.0, 0.0), v2(1.0, 0.0), 40.0);
  CHECK(!miss.hit);
}

TEST_CASE("limit cycle basin point classifies as periodic sink basin") {
  SmoothSystem sys = limit_cycle_field(false);
  ClassificationResult r = classify_trajectory(sys, v2(0.5, 0.0));
  REQUIRE(r.label == TrajectoryClass::kFlowPeriodicSinkBasin);
  REQUIRE(r.orbit.has_value());
  CHECK(r.orbit->period == doctest::Approx(2.0 * kPi).epsilon(1e-5));
  REQUIRE(r.orbit->multipliers_abs.size() == 1);
  CHECK(r.orbit->multipliers_abs[0] ==
        doctest::Approx(std::exp(-4.0 * kPi)).epsilon(1e-3));
  CHECK(r.orbit->contracting);
  CHECK(r.exponents.has_value());
  CHECK(!r.trace.empty());
}

TEST_CASE("stable focus basin point classifies as equilibrium sink") {
  SmoothSystem sys = linear_field(stable_focus());
  ClassificationResult r = classify_trajectory(sys, v2(0.8, 0.1));
  REQUIRE(r.label == TrajectoryClass::kFlowEquilibriumSink);
  REQUIRE(r.singularity.has_value());
  CHECK(r.singularity->is_sink);
  CHECK(r.singularity->point.norm() < 1e-9);
  for (const auto& lambda : r.singularity->eigenvalues) {
    CHECK(lambda.real() == doctest::Approx(-0.5).epsilon(1e-9));
    CHECK(std::abs(lambda.imag()) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("unstable focus classifies as source through the reversed flow") {
  SmoothSystem sys = linear_field(unstable_focus());
  ClassificationResult r = classify_trajectory(sys, v2(1e-3, 0.0));
  REQUIRE(r.label == TrajectoryClass::kFlowSource);
  REQUIRE(r.singularity.has_value());
  CHECK(r.singularity->is_source);
  for (const auto& lambda : r.singularity->eigenvalues)
    CHECK(lambda.real() == doctest::Approx(0.5).epsilon(1e-9));
  bool mentions_reversal = false;
  for (const std::string& c : r.caveats)
    mentions_reversal = mentions_reversal || c.find("time-reversed") != std::string::npos;
  CHECK(mentions_reversal);
}

TEST_CASE("figure-eight orbits classify as accumulating a saddle") {
  for (bool asym : {true, false}) {
    CAPTURE(asym);
    BowenParams p;
    p.asymmetric = asym;
    SmoothSystem sys = bowen_type_field(p);
    ClassifyOptions opts;
    opts.horizon = 200.0;
    ClassificationResult r = classify_trajectory(sys, v2(1.8, 0.4), opts);
    REQUIRE(r.label == TrajectoryClass::kAccumulatesSaddle);
    REQUIRE(r.singularity.has_value());
    CHECK(r.singularity->is_saddle);
    CHECK(r.singularity->codimension_one_unstable);
  }
}

TEST_CASE("irrational torus translation stays inconclusive") {
  SmoothSystem sys = constant_torus_field();
  ClassificationResult r = classify_trajectory(sys, v2(0.1, 0.2));
  CHECK(r.label == TrajectoryClass::kInconclusive);
  CHECK(!r.caveats.empty());
}

TEST_CASE("sinus map start lands in a declared sink basin") {
  SmoothSystem sys = sinus_sinks_map();
  ClassificationResult r = classify_trajectory(sys, v1(0.0159));
  REQUIRE(r.label == TrajectoryClass::kMapPeriodicSink);
  REQUIRE(r.orbit.has_value());
  CHECK(r.orbit->period == 1.0);
  CHECK(near_declared_equilibrium(sys, r.orbit->point, 1e-6));
  const double df = std::abs(sys.jacobian(r.orbit->point)(0, 0));
  REQUIRE(r.orbit->multipliers_abs.size() == 1);
  CHECK(r.orbit->multipliers_abs[0] == doctest::Approx(df).epsilon(1e-6));
  CHECK(df < 1.0);
}

TEST_CASE("expanding linear map classifies as source through the inverse") {
  SmoothSystem sys = linear_map(Mat(2.0 * Mat::Identity(2, 2)));
  ClassificationResult r = classify_trajectory(sys, v2(0.3, 0.7));
  REQUIRE(r.label == TrajectoryClass::kMapSourceOrbit);
  REQUIRE(r.orbit.has_value());
  CHECK(r.orbit->period == 1.0);
  REQUIRE(r.orbit->multipliers_abs.size() == 2);
  CHECK(r.orbit->multipliers_abs[0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(r.orbit->multipliers_abs[1] == doctest::Approx(2.0).epsilon(1e-9));
  bool mentions_inverse = false;
  for (const std::string& c : r.caveats)
    mentions_inverse = mentions_inverse || c.find("inverse") != std::string::npos;
  CHECK(mentions_inverse);
}

TEST_CASE("circle time-1 map finds the sink from both sides") {
  SmoothSystem sys = north_south_circle_map();
  for (double x0 : {0.3, 2.6}) {
    CAPTURE(x0);
    ClassificationResult r = classify_trajectory(sys, v1(x0));
    REQUIRE(r.label == TrajectoryClass::kMapPeriodicSink);
    REQUIRE(r.orbit.has_value());
    CHECK(r.orbit->point(0) == doctest::Approx(kPi / 2.0).epsilon(1e-9));
    CHECK(r.orbit->multipliers_abs[0] ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
  }
}

TEST_CASE("the inverted circle map exposes the source as its own sink") {
  SmoothSystem sys = north_south_circle_map();
  REQUIRE(sys.has_inverse());
  ClassificationResult r = classify_trajectory(sys.inverted(), v1(0.3));
  REQUIRE(r.label == TrajectoryClass::kMapPeriodicSink);
  REQUIRE(r.orbit.has_value());
  CHECK(r.orbit->point(0) == doctest::Approx(3.0 * kPi / 2.0).epsilon(1e-9));
  CHECK(r.orbit->multipliers_abs[0] ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
}

TEST_CASE("section crossings and the return map derivative on the unit cycle") {
  SmoothSystem sys = limit_cycle_field(false);
  SectionDisk disk;
  disk.center = v2(1.0, 0.0);
  disk.normal = v2(0.0, 1.0);
  disk.radius = 0.2;

  SectionOptions so;
  so.min_time = 1e-3;
  std::vector<SectionCrossing> hits =
      section_crossings(sys, v2(1.0, 0.0), 13.0, disk, so);
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].time == doctest::Approx(2.0 * kPi).epsilon(1e-6));
  CHECK(hits[1].time == doctest::Approx(4.0 * kPi).epsilon(1e-6));
  for (const auto& h : hits) {
    CHECK(h.speed > 0.0);
    CHECK(std::abs(h.state(1)) < 1e-9);
  }

  ReturnMapDerivative rd = return_map_derivative(sys, v2(1.0, 0.0), disk, 13.0, so);
  CHECK(rd.return_time == doctest::Approx(2.0 * kPi).epsilon(1e-6));
  REQUIRE(rd.multipliers_abs.size() == 1);
  CHECK(rd.multipliers_abs[0] == doctest::Approx(std::exp(-4.0 * kPi)).epsilon(1e-3));
  CHECK(rd.relative_gap < 1e-4);
  CHECK(rd.contracting);
}

TEST_CASE("classification rejects mismatched initial states") {
  SmoothSystem sys = limit_cycle_field(false);
  CHECK_THROWS_AS(classify_trajectory(sys, v1(0.5)), InputError);
}
