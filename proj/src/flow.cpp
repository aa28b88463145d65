#include "hyptimes/flow.hpp"

#include <cmath>

#include "hyptimes/errors.hpp"
#include "hyptimes/smallmat.hpp"

namespace hyptimes {

Vec SmoothSystem::value(const Vec& x) const {
  if (!eval) throw InputError("system has no evaluation function");
  if (x.size() != dimension) throw InputError("system evaluation: dimension mismatch");
  return eval(x);
}

Mat SmoothSystem::jacobian(const Vec& x) const {
  if (x.size() != dimension) throw InputError("system jacobian: dimension mismatch");
  if (jacobian_fn) return jacobian_fn(x);
  const double h = kFdJacobianStep;
  Mat j(dimension, dimension);
  Vec xp = x, xm = x;
  for (int c = 0; c < dimension; ++c) {
    xp[c] = x[c] + h;
    xm[c] = x[c] - h;
    j.col(c) = (value(xp) - value(xm)) / (2.0 * h);
    xp[c] = x[c];
    xm[c] = x[c];
  }
  return j;
}

SmoothSystem SmoothSystem::inverted() const {
  if (kind != SystemKind::kMap) {
    throw InputError("inverted(): only maps carry a declared inverse");
  }
  if (!inverse_eval) {
    throw InputError("inverted(): map '" + name + "' has no declared inverse");
  }
  SmoothSystem inv = *this;
  inv.name = name + "_inverse";
  inv.eval = inverse_eval;
  inv.inverse_eval = eval;
  inv.jacobian_fn = nullptr;  // fall back to finite differences of the inverse
  inv.jacobian_bound.reset();
  return inv;
}

namespace {

// One classical Runge-Kutta step of the state and, when z is non-null, the
// fundamental matrix, using the same tableau for both.
void rk4_step(const SmoothSystem& sys, double h, Vec& x, Mat* z) {
  const Vec k1 = sys.value(x);
  const Vec x2 = x + (0.5 * h) * k1;
  const Vec k2 = sys.value(x2);
  const Vec x3 = x + (0.5 * h) * k2;
  const Vec k3 = sys.value(x3);
  const Vec x4 = x + h * k3;
  const Vec k4 = sys.value(x4);
  if (z != nullptr) {
    const Mat m1 = sys.jacobian(x) * (*z);
    const Mat m2 = sys.jacobian(x2) * ((*z) + (0.5 * h) * m1);
    const Mat m3 = sys.jacobian(x3) * ((*z) + (0.5 * h) * m2);
    const Mat m4 = sys.jacobian(x4) * ((*z) + h * m3);
    *z += (h / 6.0) * (m1 + 2.0 * m2 + 2.0 * m3 + m4);
  }
  x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void check_blowup(const Vec& x, double t, double guard) {
  const double n = x.norm();
  if (!(n <= guard)) throw BlowUpError(t, n);
}

}  // namespace

TrajectorySegment integrate(const SmoothSystem& system, const Vec& x0, double T,
                            const IntegrateOptions& opts) {
  if (system.kind != SystemKind::kVectorField) {
    throw InputError("integrate() expects a vector field; use iterate() for maps");
  }
  if (!(opts.dt > 0.0)) throw InputError("integrate(): dt must be positive");
  if (!(T >= 0.0)) throw InputError("integrate(): horizon must be non-negative");
  if (opts.record_stride == 0) throw InputError("integrate(): record_stride must be >= 1");

  TrajectorySegment seg;
  seg.kind = SystemKind::kVectorField;
  seg.t0 = 0.0;
  seg.dt = opts.dt;
  seg.record_stride = opts.record_stride;

  const std::size_t full_steps =
      static_cast<std::size_t>(std::floor(T / opts.dt + 1e-9));
  const double remainder = T - static_cast<double>(full_steps) * opts.dt;
  const bool has_tail = remainder > 1e-12 * std::max(1.0, T);

  Vec x = wrap_point(system.topology, x0);
  Mat z;
  Mat* zp = nullptr;
  if (opts.with_fundamental) {
    z = Mat::Identity(system.dimension, system.dimension);
    zp = &z;
  }
  check_blowup(x, 0.0, opts.blowup_norm);
  seg.times.push_back(0.0);
  seg.states.push_back(x);
  if (zp != nullptr) seg.fundamentals.push_back(z);

  for (std::size_t s = 1; s <= full_steps; ++s) {
    rk4_step(system, opts.dt, x, zp);
    x = wrap_point(system.topology, x);
    const double t = static_cast<double>(s) * opts.dt;
    check_blowup(x, t, opts.blowup_norm);
    if (s % opts.record_stride == 0 || (s == full_steps && !has_tail)) {
      seg.times.push_back(s == full_steps && !has_tail ? T : t);
      seg.states.push_back(x);
      if (zp != nullptr) seg.fundamentals.push_back(z);
    }
  }
  if (has_tail) {
    rk4_step(system, remainder, x, zp);
    x = wrap_point(system.topology, x);
    check_blowup(x, T, opts.blowup_norm);
    seg.times.push_back(T);
    seg.states.push_back(x);
    if (zp != nullptr) seg.fundamentals.push_back(z);
  } else if (full_steps == 0 && seg.times.size() == 1 && T > 0.0) {
    // T smaller than one step and below the tail threshold: nothing to do.
  }
  return seg;
}

TrajectorySegment iterate(const SmoothSystem& system, const Vec& x0, std::size_t n,
                          bool with_fundamental) {
  if (system.kind != SystemKind::kMap) {
    throw InputError("iterate() expects a map; use integrate() for vector fields");
  }
  TrajectorySegment seg;
  seg.kind = SystemKind::kMap;
  seg.t0 = 0.0;
  seg.dt = 1.0;
  seg.record_stride = 1;
  seg.times.reserve(n + 1);
  seg.states.reserve(n + 1);

  Vec x = wrap_point(system.topology, x0);
  Mat z;
  if (with_fundamental) {
    z = Mat::Identity(system.dimension, system.dimension);
    seg.fundamentals.reserve(n + 1);
  }
  check_blowup(x, 0.0, 1e12);
  seg.times.push_back(0.0);
  seg.states.push_back(x);
  if (with_fundamental) seg.fundamentals.push_back(z);
  for (std::size_t k = 1; k <= n; ++k) {
    if (with_fundamental) z = system.jacobian(x) * z;
    x = wrap_point(system.topology, system.value(x));
    check_blowup(x, static_cast<double>(k), 1e12);
    seg.times.push_back(static_cast<double>(k));
    seg.states.push_back(x);
    if (with_fundamental) seg.fundamentals.push_back(z);
  }
  return seg;
}

std::pair<Vec, Mat> advance(const SmoothSystem& system, const Vec& x0, double T,
                            double dt, bool with_fundamental, double blowup_norm) {
  if (system.kind != SystemKind::kVectorField) {
    throw InputError("advance() expects a vector field");
  }
  if (!(dt > 0.0)) throw InputError("advance(): dt must be positive");
  const std::size_t full_steps = static_cast<std::size_t>(std::floor(T / dt + 1e-9));
  const double remainder = T - static_cast<double>(full_steps) * dt;
  const bool has_tail = remainder > 1e-12 * std::max(1.0, T);
  Vec x = wrap_point(system.topology, x0);
  Mat z = Mat::Identity(system.dimension, system.dimension);
  Mat* zp = with_fundamental ? &z : nullptr;
  for (std::size_t s = 1; s <= full_steps; ++s) {
    rk4_step(system, dt, x, zp);
    x = wrap_point(system.topology, x);
    check_blowup(x, static_cast<double>(s) * dt, blowup_norm);
  }
  if (has_tail) {
    rk4_step(system, remainder, x, zp);
    x = wrap_point(system.topology, x);
    check_blowup(x, T, blowup_norm);
  }
  return {std::move(x), std::move(z)};
}

double cocycle_residual(const SmoothSystem& system, const TrajectorySegment& seg,
                        std::size_t k, std::size_t j) {
  if (!seg.has_fundamentals()) {
    throw InputError("cocycle_residual: segment has no fundamental matrices");
  }
  if (k + j >= seg.size()) throw InputError("cocycle_residual: index out of range");
  const Mat& z_kj = seg.fundamentals[k + j];
  const Mat& z_k = seg.fundamentals[k];
  Mat w;
  if (seg.kind == SystemKind::kMap) {
    Vec x = seg.states[k];
    w = Mat::Identity(system.dimension, system.dimension);
    for (std::size_t s = 0; s < j; ++s) {
      w = system.jacobian(x) * w;
      x = wrap_point(system.topology, system.value(x));
    }
  } else {
    const double duration = seg.times[k + j] - seg.times[k];
    w = advance(system, seg.states[k], duration, seg.dt).second;
  }
  const double denom = operator_norm(z_kj);
  if (denom <= 0.0) throw NumericError("cocycle_residual: degenerate fundamental");
  return operator_norm(z_kj - w * z_k) / denom;
}

SmoothSystem time_reversed(const SmoothSystem& system) {
  if (system.kind != SystemKind::kVectorField)
    throw InputError("time reversal is defined for flows only");
  SmoothSystem rev = system;
  auto fwd_eval = system.eval;
  rev.eval = [fwd_eval](const Vec& x) { return Vec(-fwd_eval(x)); };
  if (system.jacobian_fn) {
    auto fwd_jac = system.jacobian_fn;
    rev.jacobian_fn = [fwd_jac](const Vec& x) { return Mat(-fwd_jac(x)); };
  }
  rev.inverse_eval = nullptr;
  rev.name = system.name + "_reversed";
  return rev;
}

SmoothSystem flow_time_map(const SmoothSystem& system, double map_time, double dt) {
  if (system.kind != SystemKind::kVectorField)
    throw InputError("flow_time_map expects a flow");
  if (!(map_time > 0.0) || !(dt > 0.0))
    throw InputError("flow_time_map needs positive map_time and dt");
  SmoothSystem map = system;
  map.kind = SystemKind::kMap;
  SmoothSystem flow_copy = system;
  map.eval = [flow_copy, map_time, dt](const Vec& x) {
    return advance(flow_copy, x, map_time, dt, false).first;
  };
  map.jacobian_fn = [flow_copy, map_time, dt](const Vec& x) {
    return advance(flow_copy, x, map_time, dt, true).second;
  };
  SmoothSystem rev = time_reversed(system);
  map.inverse_eval = [rev, map_time, dt](const Vec& x) {
    return advance(rev, x, map_time, dt, false).first;
  };
  map.name = system.name + "_time_map";
  map.params["map_time"] = map_time;
  map.params["map_dt"] = dt;
  return map;
}

}  // namespace hyptimes
