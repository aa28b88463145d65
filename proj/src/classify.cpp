#include "hyptimes/classify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "hyptimes/errors.hpp"
#include "hyptimes/geometry.hpp"
#include "hyptimes/hyperbolic_times.hpp"
#include "hyptimes/smallmat.hpp"

namespace hyptimes {

namespace {

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[320];
  std::snprintf(buf, sizeof buf, f, args...);
  return std::string(buf);
}

std::vector<double> multipliers_abs_of(const Mat& a) {
  Eigen::EigenSolver<Mat> es(a);
  std::vector<double> m(static_cast<std::size_t>(a.rows()));
  for (Eigen::Index i = 0; i < a.rows(); ++i) m[static_cast<std::size_t>(i)] = std::abs(es.eigenvalues()(i));
  std::sort(m.rbegin(), m.rend());
  return m;
}

Vec apply_map(const SmoothSystem& map, Vec x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x = wrap_point(map.topology, map.value(x));
  return x;
}

Mat map_power_jacobian(const SmoothSystem& map, Vec x, std::size_t n) {
  Mat j = Mat::Identity(map.dimension, map.dimension);
  for (std::size_t i = 0; i < n; ++i) {
    j = map.jacobian(x) * j;
    x = wrap_point(map.topology, map.value(x));
  }
  return j;
}

}  // namespace

std::optional<Vec> locate_equilibrium(const SmoothSystem& system, const Vec& guess,
                                      double tol, std::size_t max_iters) {
  if (system.kind != SystemKind::kVectorField)
    throw InputError("equilibria belong to flows");
  Vec x = wrap_point(system.topology, guess);
  for (std::size_t it = 0; it < max_iters; ++it) {
    Vec g = system.value(x);
    if (g.norm() <= tol) return x;
    Mat j = system.jacobian(x);
    Eigen::ColPivHouseholderQR<Mat> qr(j);
    if (qr.rank() < j.rows()) return std::nullopt;
    Vec step = qr.solve(Vec(-g));
    if (!step.allFinite()) return std::nullopt;
    if (step.norm() > 10.0 * (1.0 + x.norm())) return std::nullopt;
    x = wrap_point(system.topology, Vec(x + step));
  }
  return std::nullopt;
}

std::vector<SectionCrossing> section_crossings(const SmoothSystem& system,
                                               const Vec& x0, double horizon,
                                               const SectionDisk& disk,
                                               const SectionOptions& opts) {
  if (system.kind != SystemKind::kVectorField)
    throw InputError("section crossings are defined for flows");
  const double n_norm = disk.normal.norm();
  if (!(n_norm > 0.0)) throw InputError("zero disk normal");
  Vec n_hat = disk.normal / n_norm;
  if (!(disk.radius > 0.0)) throw InputError("disk radius must be positive");

  auto offset = [&](const Vec& x) {
    return n_hat.dot(displacement(system.topology, x, disk.center));
  };

  IntegrateOptions io;
  io.dt = opts.dt;
  io.with_fundamental = false;
  TrajectorySegment seg = integrate(system, x0, horizon, io);

  std::vector<SectionCrossing> out;
  double s_prev = offset(seg.states[0]);
  for (std::size_t k = 1; k < seg.size(); ++k) {
    const double s_here = offset(seg.states[k]);
    const bool upward = s_prev < 0.0 && s_here >= 0.0;
    const bool downward = s_prev > 0.0 && s_here <= 0.0;
    const bool bracketed = opts.positive_orientation_only ? upward : (upward || downward);
    if (bracketed) {
      const Vec& base = seg.states[k - 1];
      const double step = seg.times[k] - seg.times[k - 1];
      auto state_at = [&](double h) {
        if (h <= 0.0) return base;
        return advance(system, base, h, h, false).first;
      };
      double lo = 0.0, hi = step, s_lo = s_prev;
      for (int it = 0; it < 60 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double s_mid = offset(state_at(mid));
        if ((s_mid >= 0.0) == (s_lo >= 0.0)) {
          lo = mid;
          s_lo = s_mid;
        } else {
          hi = mid;
        }
        if (std::abs(s_mid) <= 1e-10) {
          lo = hi = mid;
          break;
        }
      }
      double h = 0.5 * (lo + hi);
      Vec xc = state_at(h);
      for (int it = 0; it < 3; ++it) {
        const double s = offset(xc);
        const double sd = n_hat.dot(system.value(xc));
        if (std::abs(sd) < 1e-14) break;
        const double h_next = h - s / sd;
        if (!(h_next >= -opts.dt) || !(h_next <= step + opts.dt)) break;
        h = h_next;
        xc = state_at(std::max(0.0, h));
      }
      const double t_cross = seg.times[k - 1] + h;
      const double speed = n_hat.dot(system.value(xc));
      const bool oriented = !opts.positive_orientation_only || speed > 0.0;
      if (t_cross >= opts.min_time && oriented &&
          chart_distance(system.topology, xc, disk.center) <= disk.radius) {
        out.push_back({t_cross, xc, speed});
      }
    }
    s_prev = s_here;
  }
  return out;
}

ReturnMapDerivative return_map_derivative(const SmoothSystem& system, const Vec& x,
                                          const SectionDisk& disk, double horizon,
                                          const SectionOptions& opts) {
  auto first_return = [&](const Vec& start) {
    std::vector<SectionCrossing> cs = section_crossings(system, start, horizon, disk, opts);
    if (cs.empty()) throw NumericError("no section return within the horizon");
    return cs.front();
  };

  SectionCrossing ret = first_return(x);
  ReturnMapDerivative out;
  out.return_time = ret.time;
  out.return_point = ret.state;

  Mat z = advance(system, x, ret.time, opts.dt, true).second;
  Vec g_y = system.value(ret.state);
  const double n_norm = disk.normal.norm();
  Vec n_hat = disk.normal / n_norm;
  const double denom = n_hat.dot(g_y);
  if (std::abs(denom) < 1e-12)
    throw NumericError("tangential section return");
  const Eigen::Index d = system.dimension;
  Mat proj = Mat::Identity(d, d) - (g_y * n_hat.transpose()) / denom;
  Mat basis = normal_frame(n_hat).basis;
  out.derivative = basis.transpose() * proj * z * basis;

  // Central differences at steps h and h/2, Richardson-combined.
  const double h0 = std::min(1e-3, 0.1 * disk.radius);
  Mat fd = Mat::Zero(d - 1, d - 1);
  for (Eigen::Index i = 0; i < d - 1; ++i) {
    Mat cols(d - 1, 2);  // columns for h0 and h0 / 2
    for (int lvl = 0; lvl < 2; ++lvl) {
      const double h = lvl == 0 ? h0 : 0.5 * h0;
      Vec xp = wrap_point(system.topology, Vec(x + h * basis.col(i)));
      Vec xm = wrap_point(system.topology, Vec(x - h * basis.col(i)));
      Vec yp = first_return(xp).state;
      Vec ym = first_return(xm).state;
      cols.col(lvl) =
          basis.transpose() * displacement(system.topology, yp, ym) / (2.0 * h);
    }
    fd.col(i) = (4.0 * cols.col(1) - cols.col(0)) / 3.0;
  }
  out.fd_derivative = fd;
  const double scale = std::max(1e-12, operator_norm(out.derivative));
  out.relative_gap = operator_norm(Mat(out.derivative - fd)) / scale;

  out.multipliers_abs = multipliers_abs_of(out.derivative);
  out.contracting = !out.multipliers_abs.empty() && out.multipliers_abs.front() < 1.0;
  return out;
}

NestedSearchResult nested_contraction_search(const SmoothSystem& map, const Vec& x0,
                                             std::size_t steps, double cluster_radius) {
  if (map.kind != SystemKind::kMap)
    throw InputError("nested search expects a map");
  NestedSearchResult out;
  TrajectorySegment orbit = iterate(map, x0, steps, false);
  const std::size_t last = orbit.size() - 1;

  std::size_t period = 0;
  const std::size_t p_max = std::min<std::size_t>(64, steps / 4);
  for (std::size_t p = 1; p <= p_max && period == 0; ++p) {
    bool clustered = true;
    for (std::size_t k = 0; k < 3; ++k) {
      if (last < k + p || chart_distance(map.topology, orbit.states[last - k],
                                         orbit.states[last - k - p]) >= cluster_radius) {
        clustered = false;
        break;
      }
    }
    if (clustered) period = p;
  }
  if (period == 0) return out;

  // Contract into the cycle by iterating the period-fold composition.
  Vec z = orbit.states[last];
  for (int it = 0; it < 200; ++it) {
    Vec z_next = apply_map(map, z, period);
    const double gap = chart_distance(map.topology, z, z_next);
    z = z_next;
    if (gap < 1e-12) break;
  }

  auto newton_refine = [&](Vec point, std::size_t p) {
    for (int it = 0; it < 25; ++it) {
      Vec image = apply_map(map, point, p);
      Vec f = displacement(map.topology, image, point);
      if (f.norm() < 1e-13 * (1.0 + point.norm())) break;
      Mat j = map_power_jacobian(map, point, p);
      Mat lhs = j - Mat::Identity(j.rows(), j.cols());
      Eigen::ColPivHouseholderQR<Mat> qr(lhs);
      if (qr.rank() < lhs.rows()) break;
      Vec delta = qr.solve(Vec(-f));
      if (!delta.allFinite() || delta.norm() > 1.0) break;
      point = wrap_point(map.topology, Vec(point + delta));
      if (delta.norm() < 1e-14) break;
    }
    return point;
  };
  z = newton_refine(z, period);

  for (std::size_t q = 1; q < period; ++q) {
    if (period % q != 0) continue;
    if (chart_distance(map.topology, apply_map(map, z, q), z) <= 1e-9) {
      period = q;
      z = newton_refine(z, period);
      break;
    }
  }

  out.point = z;
  out.period = period;
  out.residual = chart_distance(map.topology, apply_map(map, z, period), z);
  out.derivative = map_power_jacobian(map, z, period);
  out.multipliers_abs = multipliers_abs_of(out.derivative);
  out.contracting = !out.multipliers_abs.empty() && out.multipliers_abs.front() < 1.0;
  out.found = out.residual <= 1e-8 * (1.0 + z.norm());
  return out;
}

SingularityAnalysis analyze_singularity(const SmoothSystem& system, const Vec& x) {
  if (system.kind != SystemKind::kVectorField)
    throw InputError("singularity analysis applies to flows");
  SingularityAnalysis out;
  out.point = wrap_point(system.topology, x);
  Mat j = system.jacobian(out.point);
  Eigen::EigenSolver<Mat> es(j);
  for (Eigen::Index i = 0; i < j.rows(); ++i) {
    const std::complex<double> lambda = es.eigenvalues()(i);
    out.eigenvalues.push_back(lambda);
    if (lambda.real() > kSpectralTol) {
      ++out.dim_unstable;
    } else if (lambda.real() < -kSpectralTol) {
      ++out.dim_stable;
    } else {
      ++out.dim_center;
    }
  }
  out.hyperbolic = out.dim_center == 0;
  out.is_sink = out.hyperbolic && out.dim_unstable == 0;
  out.is_source = out.hyperbolic && out.dim_stable == 0;
  out.is_saddle = out.hyperbolic && out.dim_stable > 0 && out.dim_unstable > 0;
  out.codimension_one_unstable = out.is_saddle && out.dim_unstable == 1;
  return out;
}

GronwallCheck gronwall_check(const SmoothSystem& system, const Vec& center,
                             double radius, double horizon,
                             std::size_t point_samples, std::size_t time_samples,
                             double dt) {
  if (system.kind != SystemKind::kVectorField)
    throw InputError("the comparison bound applies to flows");
  if (!(radius > 0.0) || !(horizon > 0.0))
    throw InputError("radius and horizon must be positive");
  if (point_samples == 0 || time_samples == 0)
    throw InputError("need at least one point and one time sample");

  const Eigen::Index d = system.dimension;
  Mat a = system.jacobian(center);

  std::mt19937_64 rng(0x51ab9e3779b97f4aULL);
  auto unit = [&]() { return std::ldexp(static_cast<double>(rng() >> 11), -53); };
  auto ball_point = [&]() {
    Vec v(d);
    while (true) {
      for (Eigen::Index i = 0; i < d; ++i) v(i) = 2.0 * unit() - 1.0;
      const double n = v.norm();
      if (n > 1e-6 && n <= 1.0) break;
    }
    return Vec(center + radius * v);
  };

  IntegrateOptions io;
  io.dt = dt;
  const std::size_t total_steps = static_cast<std::size_t>(std::ceil(horizon / dt));
  io.record_stride = std::max<std::size_t>(1, total_steps / 200);

  std::vector<TrajectorySegment> runs;
  runs.reserve(point_samples);
  double delta_bar = 0.0;
  double l_raw = operator_norm(a);
  for (std::size_t p = 0; p < point_samples; ++p) {
    Vec q = ball_point();
    TrajectorySegment seg = integrate(system, q, horizon, io);
    for (const Vec& s : seg.states) {
      Mat js = system.jacobian(s);
      delta_bar = std::max(delta_bar, operator_norm(Mat(js - a)));
      l_raw = std::max(l_raw, operator_norm(js));
    }
    runs.push_back(std::move(seg));
  }

  GronwallCheck out;
  out.delta_bar = delta_bar;
  out.l_bound = l_raw / 0.9;  // sampled sup, inflated
  out.holds = true;
  out.worst_margin = -std::numeric_limits<double>::infinity();
  for (const TrajectorySegment& seg : runs) {
    for (std::size_t j = 1; j <= time_samples; ++j) {
      const double target = horizon * static_cast<double>(j) /
                            static_cast<double>(time_samples);
      std::size_t idx = 0;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < seg.size(); ++k) {
        const double gap = std::abs(seg.times[k] - target);
        if (gap < best) {
          best = gap;
          idx = k;
        }
      }
      const double t = seg.times[idx];
      if (!(t > 0.0)) continue;
      Mat frozen = Mat(t * a).exp();
      const double lhs = operator_norm(Mat(seg.fundamentals[idx] - frozen));
      const double rhs = delta_bar * t * std::exp(out.l_bound * t);
      out.max_lhs = std::max(out.max_lhs, lhs);
      out.max_rhs = std::max(out.max_rhs, rhs);
      out.worst_margin = std::max(out.worst_margin, lhs - rhs);
      ++out.comparisons;
      if (lhs > rhs + 1e-9) out.holds = false;
    }
  }
  return out;
}

CuspSectionHit cusp_section_hit(const SmoothSystem& system, const Vec& saddle,
                                const Vec& x0, double horizon, double dt) {
  SingularityAnalysis sing = analyze_singularity(system, saddle);
  if (!sing.hyperbolic || !sing.codimension_one_unstable)
    throw InputError("cusp surface needs a codimension-one saddle");
  const Eigen::Index d = system.dimension;

  Mat j = system.jacobian(sing.point);
  Eigen::EigenSolver<Mat> es(j);
  Mat basis(d, d);
  Eigen::Index col = 0;
  Eigen::Index unstable_col = -1;
  std::vector<bool> used(static_cast<std::size_t>(d), false);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (used[static_cast<std::size_t>(i)]) continue;
    const std::complex<double> lambda = es.eigenvalues()(i);
    if (std::abs(lambda.imag()) <= kSpectralTol) {
      Vec v = es.eigenvectors().col(i).real();
      v.normalize();
      basis.col(col) = v;
      if (lambda.real() > 0.0) unstable_col = col;
      ++col;
      used[static_cast<std::size_t>(i)] = true;
    } else {
      Eigen::Index partner = -1;
      for (Eigen::Index k = i + 1; k < d; ++k) {
        if (!used[static_cast<std::size_t>(k)] &&
            std::abs(es.eigenvalues()(k).real() - lambda.real()) < 1e-9 &&
            std::abs(es.eigenvalues()(k).imag() + lambda.imag()) < 1e-9) {
          partner = k;
          break;
        }
      }
      if (partner < 0) throw NumericError("unpaired complex eigenvalue");
      Vec re = es.eigenvectors().col(i).real();
      Vec im = es.eigenvectors().col(i).imag();
      basis.col(col) = re / std::max(re.norm(), 1e-300);
      basis.col(col + 1) = im / std::max(im.norm(), 1e-300);
      col += 2;
      used[static_cast<std::size_t>(i)] = true;
      used[static_cast<std::size_t>(partner)] = true;
    }
  }
  if (unstable_col < 0) throw NumericError("unstable eigenvector not found");
  if (unstable_col != d - 1) basis.col(unstable_col).swap(basis.col(d - 1));

  Vec sv = jacobi_singular_values(basis);
  if (sv(0) / sv(sv.size() - 1) > 1e6)
    throw NumericError("eigenbasis too ill-conditioned for cusp coordinates");
  Mat binv = basis.inverse();
  Mat stable_rows = binv.topRows(d - 1);
  Vec w = binv.row(d - 1).transpose();

  auto f_of = [&](const Vec& x) {
    Vec delta = displacement(system.topology, x, sing.point);
    Vec u = stable_rows * delta;
    const double v = w.dot(delta);
    return u.squaredNorm() - std::abs(v);
  };

  CuspSectionHit out;
  out.f_initial = f_of(x0);
  if (out.f_initial <= 0.0) {
    out.hit = true;
    out.time = 0.0;
    out.state = wrap_point(system.topology, x0);
    return out;
  }

  Vec x = wrap_point(system.topology, x0);
  double t = 0.0;
  double f_prev = out.f_initial;
  while (t < horizon) {
    const double step = std::min(dt, horizon - t);
    Vec x_next = advance(system, x, step, step, false).first;
    const double f_next = f_of(x_next);
    if (f_next <= 0.0) {
      auto state_at = [&](double h) {
        if (h <= 0.0) return x;
        return advance(system, x, h, h, false).first;
      };
      double lo = 0.0, hi = step;
      for (int it = 0; it < 60 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (f_of(state_at(mid)) > 0.0) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      double h = 0.5 * (lo + hi);
      Vec xc = state_at(h);
      for (int it = 0; it < 3; ++it) {
        Vec delta = displacement(system.topology, xc, sing.point);
        Vec u = stable_rows * delta;
        const double v = w.dot(delta);
        Vec grad = 2.0 * stable_rows.transpose() * u - (v >= 0.0 ? 1.0 : -1.0) * w;
        const double fdot = grad.dot(system.value(xc));
        if (std::abs(fdot) < 1e-14) break;
        const double h_next = h - f_of(xc) / fdot;
        if (!(h_next >= -step) || !(h_next <= 2.0 * step)) break;
        h = h_next;
        xc = state_at(std::max(0.0, h));
      }
      out.hit = true;
      out.time = t + h;
      out.state = xc;
      return out;
    }
    x = x_next;
    t += step;
    f_prev = f_next;
  }
  (void)f_prev;
  return out;
}

const char* to_string(TrajectoryClass c) {
  switch (c) {
    case TrajectoryClass::kFlowPeriodicSinkBasin: return "flow_periodic_sink_basin";
    case TrajectoryClass::kFlowEquilibriumSink: return "flow_equilibrium_sink";
    case TrajectoryClass::kFlowSource: return "flow_source";
    case TrajectoryClass::kAccumulatesSaddle: return "accumulates_saddle";
    case TrajectoryClass::kMapPeriodicSink: return "map_periodic_sink";
    case TrajectoryClass::kMapSourceOrbit: return "map_source_orbit";
    case TrajectoryClass::kInconclusive: return "inconclusive";
  }
  return "inconclusive";
}

namespace {

double tail_mean(const std::vector<double>& v) {
  const std::size_t begin = v.size() / 2;
  double m = 0.0;
  for (std::size_t i = begin; i < v.size(); ++i) m += v[i];
  return m / static_cast<double>(v.size() - begin);
}

std::size_t count_ball_entries(const ChartTopology& topo, const std::vector<Vec>& states,
                               const Vec& center, double radius) {
  std::size_t entries = 0;
  bool inside = chart_distance(topo, states[0], center) <= radius;
  for (std::size_t k = 1; k < states.size(); ++k) {
    const bool now = chart_distance(topo, states[k], center) <= radius;
    if (now && !inside) ++entries;
    inside = now;
  }
  return entries;
}

std::vector<double> reciprocal_multipliers(const std::vector<double>& m) {
  std::vector<double> out;
  out.reserve(m.size());
  for (double v : m) out.push_back(v > 0.0 ? 1.0 / v : std::numeric_limits<double>::infinity());
  std::sort(out.rbegin(), out.rend());
  return out;
}

ClassificationResult classify_map_orbit(const SmoothSystem& system, const Vec& x0,
                                        const ClassifyOptions& opts) {
  ClassificationResult r;
  r.horizon = static_cast<double>(opts.map_steps);

  // Shared with the blow-up path: a forward-expanding orbit is a source
  // candidate, verified by classifying the inverse map from the same seed.
  auto try_mirror = [&]() -> bool {
    if (!opts.allow_mirror || !system.has_inverse()) return false;
    ClassifyOptions m = opts;
    m.allow_mirror = false;
    m.zeta.reset();
    ClassificationResult mr = classify_map_orbit(system.inverted(), x0, m);
    for (const std::string& line : mr.trace)
      r.trace.push_back("inverse: " + line);
    if (mr.label == TrajectoryClass::kMapPeriodicSink && mr.orbit) {
      r.label = TrajectoryClass::kMapSourceOrbit;
      r.orbit = LocatedOrbit{mr.orbit->point, mr.orbit->period,
                             reciprocal_multipliers(mr.orbit->multipliers_abs), false};
      r.zeta = mr.zeta;
      r.hyperbolic_time_fraction = mr.hyperbolic_time_fraction;
      r.contracting_radius = mr.contracting_radius;
      r.caveats.push_back("periodic source located through the inverse map");
      return true;
    }
    return false;
  };

  TrajectorySegment orbit;
  try {
    orbit = iterate(system, x0, opts.map_steps, false);
  } catch (const BlowUpError& e) {
    r.trace.push_back(fmt("orbit norm reached %.3g by step %.0f; treating the "
                          "orbit as forward-divergent", e.state_norm, e.time));
    if (try_mirror()) return r;
    r.label = TrajectoryClass::kInconclusive;
    r.caveats.push_back("forward orbit leaves the working region and the "
                        "inverse map gave no verified source");
    return r;
  }
  ExponentSeries series = block_exponent_series(system, orbit, 1);
  const double tail = tail_mean(series.values);
  r.trace.push_back(fmt("map orbit, %zu steps; tail mean one-step rate %.4g",
                        opts.map_steps, tail));
  const double zeta = opts.zeta ? *opts.zeta : auto_zeta(series);
  r.zeta = zeta;

  if (tail < -1e-3) {
    if (zeta > 0.0) {
      ReverseHyperbolicTimes rh =
          detect_reverse_hyperbolic_times_map(system, orbit, zeta);
      r.hyperbolic_time_fraction = rh.fraction;
      r.trace.push_back(fmt(
          "reverse hyperbolic times at zeta=%.4g: fraction %.4g, theta %.4g, "
          "certified %s over %zu checks",
          zeta, rh.fraction, rh.theta, rh.certified ? "yes" : "no",
          rh.certified_checked));
    }
    if (opts.ball_radius) {
      r.contracting_radius = *opts.ball_radius;
    } else {
      try {
        r.contracting_radius = contracting_ball_radius(system, std::max(zeta, 1e-2)).radius;
      } catch (const InputError& e) {  // covers the hypothesis violation subtype
        r.caveats.push_back(std::string("contracting radius unavailable: ") + e.what());
      }
    }
    NestedSearchResult nsr =
        nested_contraction_search(system, orbit.states.back(), opts.map_steps);
    if (nsr.found && nsr.contracting) {
      r.label = TrajectoryClass::kMapPeriodicSink;
      r.orbit = LocatedOrbit{nsr.point, static_cast<double>(nsr.period),
                             nsr.multipliers_abs, true};
      r.trace.push_back(fmt(
          "periodic sink located: period %zu, residual %.3g, largest multiplier %.6g",
          nsr.period, nsr.residual, nsr.multipliers_abs.front()));
      return r;
    }
    r.trace.push_back(fmt("periodic point search %s (residual %.3g, contracting %s)",
                          nsr.found ? "found a non-contracting orbit" : "did not converge",
                          nsr.residual,
                          nsr.contracting ? "yes" : "no"));
  } else if (tail > 1e-3 && opts.allow_mirror && system.has_inverse()) {
    r.trace.push_back("tail rate expands; analyzing the inverse map");
    if (try_mirror()) return r;
  } else {
    r.trace.push_back("tail rate is neither contracting nor expanding past tolerance");
  }

  r.label = TrajectoryClass::kInconclusive;
  r.caveats.push_back("no verified periodic structure within the step budget");
  return r;
}

ClassificationResult classify_flow_orbit(const SmoothSystem& system, const Vec& x0,
                                         const ClassifyOptions& opts) {
  ClassificationResult r;
  r.horizon = opts.horizon;

  IntegrateOptions io;
  io.dt = opts.dt;
  const std::size_t total_steps =
      static_cast<std::size_t>(std::ceil(opts.horizon / opts.dt));
  io.record_stride = std::max<std::size_t>(1, total_steps / 4000);

  TrajectorySegment seg;
  try {
    seg = integrate(system, x0, opts.horizon, io);
  } catch (const BlowUpError& e) {
    r.label = TrajectoryClass::kInconclusive;
    r.caveats.push_back(fmt("state norm exceeded %.3g at t=%.4g; orbit left the "
                            "working region", e.state_norm, e.time));
    r.trace.push_back("integration aborted on the norm guard");
    return r;
  }
  const Vec& x_end = seg.states.back();
  const double g_end = system.value(x_end).norm();
  r.trace.push_back(fmt("integrated to t=%.4g (%zu samples); final field norm %.4g",
                        opts.horizon, seg.size(), g_end));

  // Candidate equilibria: declared ones plus Newton refinements from the
  // final state and from the sample of smallest field norm.
  std::vector<Vec> equis = system.equilibria;
  auto add_unique = [&](const Vec& p) {
    for (const Vec& q : equis)
      if (chart_distance(system.topology, p, q) < 1e-6) return;
    equis.push_back(p);
  };
  double min_g = std::numeric_limits<double>::infinity();
  std::size_t min_g_idx = 0;
  for (std::size_t k = 0; k < seg.size(); ++k) {
    const double g = system.value(seg.states[k]).norm();
    if (g < min_g) {
      min_g = g;
      min_g_idx = k;
    }
  }
  if (g_end < 1e-3) {
    if (auto p = locate_equilibrium(system, x_end)) add_unique(*p);
  }
  if (min_g < 1e-3) {
    if (auto p = locate_equilibrium(system, seg.states[min_g_idx])) add_unique(*p);
  }

  if (!equis.empty()) {
    double d_min = std::numeric_limits<double>::infinity();
    for (const Vec& q : equis)
      for (const Vec& s : seg.states)
        d_min = std::min(d_min, chart_distance(system.topology, s, q));
    r.min_singularity_distance = 0.9 * d_min;
    r.trace.push_back(fmt("%zu candidate equilibria; closest approach %.4g",
                          equis.size(), d_min));
  }

  // Convergence to an equilibrium.
  if (!equis.empty()) {
    std::size_t nearest = 0;
    double dist_end = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < equis.size(); ++i) {
      const double d = chart_distance(system.topology, x_end, equis[i]);
      if (d < dist_end) {
        dist_end = d;
        nearest = i;
      }
    }
    if (dist_end < 0.05) {
      const Vec& sigma = equis[nearest];
      SingularityAnalysis sing = analyze_singularity(system, sigma);
      const std::size_t q3 = seg.size() - 1 - (seg.size() - 1) / 4;
      const double dist_q3 = chart_distance(system.topology, seg.states[q3], sigma);
      const bool approaching = dist_end <= dist_q3 + 1e-12;
      if (sing.is_sink && approaching) {
        SmoothSystem embedded = flow_time_map(system, 1.0, opts.embed_dt);
        NestedSearchResult nsr = nested_contraction_search(embedded, x_end, 40);
        if (nsr.found && nsr.period == 1 && nsr.contracting &&
            chart_distance(system.topology, nsr.point, sigma) < 1e-6) {
          r.label = TrajectoryClass::kFlowEquilibriumSink;
          r.singularity = sing;
          r.trace.push_back(fmt(
              "attracting equilibrium confirmed through the time-1 map "
              "(distance at end %.3g, largest time-1 multiplier %.6g)",
              dist_end, nsr.multipliers_abs.front()));
          return r;
        }
        r.trace.push_back(
            "equilibrium candidate failed the time-1 map confirmation");
      } else if (sing.is_saddle && approaching &&
                 dist_end < opts.ball_entry_radius) {
        r.label = TrajectoryClass::kAccumulatesSaddle;
        r.singularity = sing;
        r.trace.push_back(fmt(
            "orbit converges toward a saddle: stable dimension %zu, unstable "
            "dimension %zu, final distance %.3g",
            sing.dim_stable, sing.dim_unstable, dist_end));
        r.caveats.push_back(
            "convergence consistent with a stable-set approach; the invariant "
            "set itself is not computed");
        return r;
      }
    }
  }

  // Repeated visits to a saddle neighborhood.
  for (const Vec& q : equis) {
    SingularityAnalysis sing = analyze_singularity(system, q);
    if (!sing.is_saddle) continue;
    const std::size_t entries =
        count_ball_entries(system.topology, seg.states, q, opts.ball_entry_radius);
    if (entries >= 3) {
      r.label = TrajectoryClass::kAccumulatesSaddle;
      r.singularity = sing;
      r.trace.push_back(fmt(
          "%zu separated entries into the %.3g-ball of a saddle; stable "
          "dimension %zu, unstable dimension %zu",
          entries, opts.ball_entry_radius, sing.dim_stable, sing.dim_unstable));
      r.caveats.push_back(
          "repeated saddle visits certify accumulation on the saddle region; "
          "a periodic attractor threading the same ball would satisfy this "
          "criterion too");
      return r;
    }
  }

  if (system.dimension < 2) {
    if (opts.allow_mirror) {
      r.trace.push_back("scalar flow: checking the time-reversed field");
      ClassifyOptions m = opts;
      m.allow_mirror = false;
      m.zeta.reset();
      ClassificationResult mr = classify_flow_orbit(time_reversed(system), x0, m);
      for (const std::string& line : mr.trace)
        r.trace.push_back("reversed: " + line);
      if (mr.label == TrajectoryClass::kFlowEquilibriumSink && mr.singularity) {
        r.label = TrajectoryClass::kFlowSource;
        r.singularity = mr.singularity;
        for (auto& lambda : r.singularity->eigenvalues) lambda = -lambda;
        std::swap(r.singularity->dim_stable, r.singularity->dim_unstable);
        std::swap(r.singularity->is_sink, r.singularity->is_source);
        r.caveats.push_back("source evidence computed from the time-reversed flow");
        return r;
      }
    }
    r.label = TrajectoryClass::kInconclusive;
    r.caveats.push_back("scalar flow did not settle on a verified equilibrium");
    return r;
  }

  // Normal cocycle analysis.
  LpfCocycle coc;
  try {
    coc = lpf_cocycle(system, seg);
  } catch (const SingularityProximityError& e) {
    r.label = TrajectoryClass::kInconclusive;
    r.caveats.push_back(fmt("field norm %.3g at sample %zu is below the normal "
                            "cocycle floor", e.field_norm, e.sample_index));
    return r;
  }
  const double e_t = coc.log_norms.back() / opts.horizon;
  const double c_t = coc.log_conorms.back() / opts.horizon;
  r.trace.push_back(fmt("normal cocycle over [0,%.4g]: ln||P||/T=%.4g, "
                        "ln(conorm)/T=%.4g", opts.horizon, e_t, c_t));
  if (opts.horizon >= 2.0) {
    try {
      r.exponents = sectional_exponents(coc, std::max(1.0, opts.horizon / 2.0),
                                        opts.horizon);
    } catch (const InputError&) {
    }
  }

  const double zeta = opts.zeta ? *opts.zeta : 0.9 * std::max(0.0, -e_t);
  r.zeta = zeta;

  if (e_t < -1e-3 && zeta > 0.0) {
    FlowReverseHyperbolicTimes rh =
        detect_lpf_reverse_hyperbolic_times(system, seg, coc, zeta);
    r.hyperbolic_time_fraction = rh.measure / opts.horizon;
    r.trace.push_back(fmt(
        "flow reverse hyperbolic times at zeta=%.4g: measure %.4g of %.4g, "
        "certified %s over %zu pairs",
        zeta, rh.measure, opts.horizon, rh.certified ? "yes" : "no",
        rh.certified_pairs));

    const bool bounded_away =
        (r.min_singularity_distance < 0.0 && min_g > 1e-3) ||
        r.min_singularity_distance > opts.ball_entry_radius;
    if (bounded_away) {
      Vec g_z = system.value(x_end);
      SectionDisk disk{x_end, g_z / g_z.norm(), opts.section_radius};
      SectionOptions so;
      so.dt = opts.dt;
      so.min_time = 0.01;
      std::vector<SectionCrossing> crossings =
          section_crossings(system, x_end, opts.horizon, disk, so);
      if (crossings.size() >= 2) {
        double last_gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < crossings.size(); ++i)
          last_gap = chart_distance(system.topology, crossings[i].state,
                                    crossings[i - 1].state);
        const Vec p_star = crossings.back().state;
        const double period = crossings.back().time -
                              crossings[crossings.size() - 2].time;
        r.trace.push_back(fmt(
            "%zu section returns; final return gap %.3g, period estimate %.6g",
            crossings.size(), last_gap, period));
        if (last_gap < 1e-8) {
          try {
            ReturnMapDerivative rmd = return_map_derivative(
                system, p_star, disk, std::max(3.0 * period, 1.0), so);
            const bool gap_ok =
                !opts.cross_check_return_map || rmd.relative_gap < 1e-3;
            if (rmd.contracting && gap_ok) {
              const double t_ev = std::max(2.0, 3.0 * period);
              IntegrateOptions eo;
              eo.dt = opts.dt;
              eo.record_stride = std::max<std::size_t>(
                  1, static_cast<std::size_t>(std::ceil(t_ev / opts.dt)) / 2000);
              TrajectorySegment ev_seg = integrate(system, p_star, t_ev, eo);
              LpfCocycle ev_coc = lpf_cocycle(system, ev_seg);
              r.exponents = sectional_exponents(ev_coc, 1.0, t_ev);
              r.orbit = LocatedOrbit{p_star, period, rmd.multipliers_abs, true};
              r.label = TrajectoryClass::kFlowPeriodicSinkBasin;
              r.trace.push_back(fmt(
                  "attracting periodic orbit confirmed: period %.6g, largest "
                  "return multiplier %.6g, derivative cross-check gap %.3g",
                  period, rmd.multipliers_abs.front(), rmd.relative_gap));
              return r;
            }
            r.trace.push_back(fmt(
                "return derivative rejected the candidate (contracting %s, "
                "cross-check gap %.3g)",
                rmd.contracting ? "yes" : "no", rmd.relative_gap));
          } catch (const NumericError& e) {
            r.trace.push_back(std::string("return derivative failed: ") + e.what());
          }
        }
      } else {
        r.trace.push_back("fewer than two section returns within the horizon");
      }
    } else {
      r.trace.push_back("orbit is not bounded away from equilibria; periodic "
                        "sink branch skipped");
    }
  }

  if (c_t > 1e-3 && opts.allow_mirror) {
    // Sustained expansion: the smallest-singular-value track must grow over
    // every quarter-horizon window in the second half.
    const std::size_t n = coc.size();
    std::size_t w = 0;
    for (std::size_t k = 0; k < n; ++k)
      if (coc.times[k] <= opts.horizon / 4.0) w = k;
    bool sustained = w > 0;
    for (std::size_t k = 0; k + w < n; ++k) {
      if (coc.times[k] < opts.horizon / 2.0) continue;
      if (coc.log_conorms[k + w] - coc.log_conorms[k] <= 0.0) {
        sustained = false;
        break;
      }
    }
    if (sustained) {
      r.trace.push_back("conorm grows on every tail window; analyzing the "
                        "time-reversed flow");
      ClassifyOptions m = opts;
      m.allow_mirror = false;
      m.zeta.reset();
      ClassificationResult mr = classify_flow_orbit(time_reversed(system), x0, m);
      for (const std::string& line : mr.trace)
        r.trace.push_back("reversed: " + line);
      if (mr.label == TrajectoryClass::kFlowPeriodicSinkBasin && mr.orbit) {
        r.label = TrajectoryClass::kFlowSource;
        r.orbit = LocatedOrbit{mr.orbit->point, mr.orbit->period,
                               reciprocal_multipliers(mr.orbit->multipliers_abs),
                               false};
        r.caveats.push_back("source evidence computed from the time-reversed flow");
        return r;
      }
      if (mr.label == TrajectoryClass::kFlowEquilibriumSink && mr.singularity) {
        r.label = TrajectoryClass::kFlowSource;
        r.singularity = mr.singularity;
        for (auto& lambda : r.singularity->eigenvalues) lambda = -lambda;
        std::swap(r.singularity->dim_stable, r.singularity->dim_unstable);
        std::swap(r.singularity->is_sink, r.singularity->is_source);
        r.caveats.push_back("source evidence computed from the time-reversed flow");
        return r;
      }
    }
  }

  r.label = TrajectoryClass::kInconclusive;
  r.caveats.push_back("no branch produced a verified limit object");
  return r;
}

}  // namespace

ClassificationResult classify_trajectory(const SmoothSystem& system, const Vec& x0,
                                         const ClassifyOptions& opts) {
  if (x0.size() != system.dimension)
    throw InputError("initial state dimension mismatch");
  if (system.kind == SystemKind::kMap) return classify_map_orbit(system, x0, opts);
  return classify_flow_orbit(system, x0, opts);
}

}  // namespace hyptimes
