#include "hyptimes/lpf.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "hyptimes/errors.hpp"
#include "hyptimes/geometry.hpp"
#include "hyptimes/smallmat.hpp"

namespace hyptimes {

namespace {

Vec field_direction(const SmoothSystem& system, const Vec& x, std::size_t sample) {
  Vec g = system.value(x);
  const double n = g.norm();
  if (!(n >= kMinFieldNorm)) throw SingularityProximityError(sample, n);
  return g / n;
}

// Integral of uniformly spaced samples f_0..f_k. Composite Simpson when the
// interval count is even, Simpson + 3/8 tail when odd.
double integrate_samples(const std::vector<double>& f, double h) {
  const std::size_t k = f.size() - 1;
  if (k == 0) return 0.0;
  if (k == 1) return 0.5 * h * (f[0] + f[1]);
  std::size_t simpson_end = k;  // last index covered by plain Simpson
  double total = 0.0;
  if (k % 2 == 1) {
    simpson_end = k - 3;
    total += 3.0 * h / 8.0 *
             (f[k - 3] + 3.0 * f[k - 2] + 3.0 * f[k - 1] + f[k]);
  }
  for (std::size_t i = 0; i + 2 <= simpson_end; i += 2)
    total += h / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
  return total;
}

double uniform_spacing(const std::vector<double>& times) {
  if (times.size() < 2) throw InputError("need at least two samples");
  const double h = times[1] - times[0];
  for (std::size_t i = 1; i + 1 < times.size(); ++i) {
    const double step = times[i + 1] - times[i];
    if (std::abs(step - h) > 1e-9 * std::max(1.0, std::abs(h)))
      throw InputError("sample grid is not uniform");
  }
  return h;
}

Mat normal_restriction(const SmoothSystem& system, const Vec& x, Vec* dir_out) {
  Vec g = system.value(x);
  const double n = g.norm();
  if (!(n >= kMinFieldNorm)) throw SingularityProximityError(0, n);
  if (dir_out) *dir_out = g / n;
  Mat q = normal_frame(g).basis;
  Mat j = system.jacobian(x);
  Mat s = q.transpose() * j * q;
  return 0.5 * (s + s.transpose());
}

}  // namespace

LpfCocycle lpf_cocycle(const SmoothSystem& system, const TrajectorySegment& seg,
                       const NormalFrame* initial_frame) {
  if (system.kind != SystemKind::kVectorField)
    throw InputError("normal cocycle is defined for flows only");
  if (system.dimension < 2)
    throw InputError("normal cocycle needs dimension >= 2");
  if (seg.size() == 0) throw InputError("empty trajectory segment");

  LpfCocycle out;
  const std::size_t n = seg.size();
  out.times = seg.times;
  out.directions.reserve(n);
  out.frames.reserve(n);
  out.mats.reserve(n);
  out.log_norms.reserve(n);
  out.log_conorms.reserve(n);

  Vec dir0 = field_direction(system, seg.states[0], 0);
  NormalFrame frame0;
  if (initial_frame) {
    frame0 = *initial_frame;
    frame0.base_direction = dir0;
  } else {
    frame0 = normal_frame(dir0);
  }
  out.directions.push_back(dir0);
  out.frames.push_back(frame0.basis);

  NormalFrame current = frame0;
  for (std::size_t k = 1; k < n; ++k) {
    Vec dir = field_direction(system, seg.states[k], k);
    bool reset = false;
    current = transport_frame(current, dir, &reset);
    if (reset) out.frame_resets.push_back(k);
    out.directions.push_back(dir);
    out.frames.push_back(current.basis);
  }

  // Chain per-interval factors instead of projecting one long fundamental.
  // The flow direction is invariant under the variational flow, so inserting
  // the normal projection at every sample reproduces the end-to-end operator
  // exactly, while the running log scale keeps the norms accurate at horizons
  // where the raw fundamental product would drown in roundoff or leave the
  // representable range.
  const Eigen::Index nd = static_cast<Eigen::Index>(system.dimension) - 1;
  Mat acc = Mat::Identity(nd, nd);
  double log_scale = 0.0;
  out.mats.push_back(acc);
  out.log_norms.push_back(0.0);
  out.log_conorms.push_back(0.0);
  for (std::size_t k = 1; k < n; ++k) {
    const double span = seg.times[k] - seg.times[k - 1];
    Mat transfer = advance(system, seg.states[k - 1], span, seg.dt).second;
    acc = out.frames[k].transpose() * transfer * out.frames[k - 1] * acc;
    const double mag = acc.norm();
    if (!(mag > 0.0) || !std::isfinite(mag))
      throw NumericError("normal cocycle factor collapsed");
    acc /= mag;
    log_scale += std::log(mag);
    Vec sv = jacobi_singular_values(acc);
    out.log_norms.push_back(log_scale + std::log(sv(0)));
    out.log_conorms.push_back(log_scale + std::log(sv(sv.size() - 1)));
    out.mats.push_back(std::exp(log_scale) * acc);
  }
  return out;
}

double generator_D(const SmoothSystem& system, const Vec& x, const Vec& v) {
  Vec g = system.value(x);
  const double n = g.norm();
  if (!(n >= kMinFieldNorm)) throw SingularityProximityError(0, n);
  Mat o = orthogonal_projection(g);
  Vec vn = o * v;
  const double vn_norm = vn.norm();
  if (vn_norm < 1e-10 * std::max(1.0, v.norm()))
    throw InputError("direction has no component normal to the field");
  vn /= vn_norm;
  Mat j = system.jacobian(x);
  return vn.dot(o * (j * vn));
}

double generator_D_sup(const SmoothSystem& system, const Vec& x) {
  return max_symmetric_eigenvalue(normal_restriction(system, x, nullptr));
}

double generator_D_inf(const SmoothSystem& system, const Vec& x) {
  return min_symmetric_eigenvalue(normal_restriction(system, x, nullptr));
}

double generator_DG(const SmoothSystem& system, const Vec& x, const Vec& v) {
  const double n = v.norm();
  if (!(n > 0.0)) throw InputError("zero direction");
  Vec u = v / n;
  return u.dot(system.jacobian(x) * u);
}

double generator_DG_sup(const SmoothSystem& system, const Vec& x) {
  Mat j = system.jacobian(x);
  return max_symmetric_eigenvalue(0.5 * (j + j.transpose()));
}

double generator_DG_inf(const SmoothSystem& system, const Vec& x) {
  Mat j = system.jacobian(x);
  return min_symmetric_eigenvalue(0.5 * (j + j.transpose()));
}

std::pair<double, double> generator_D_one_sided(const SmoothSystem& system,
                                                const Vec& x, const Vec& v,
                                                double h, double dt) {
  if (!(h > 0.0) || !(dt > 0.0)) throw InputError("h and dt must be positive");

  IntegrateOptions opts;
  opts.dt = dt;

  // Forward quotient: ln||P^h u|| / h for the unit normal component u of v.
  TrajectorySegment fwd = integrate(system, x, h, opts);
  LpfCocycle cf = lpf_cocycle(system, fwd);
  Vec uf = cf.frames.front().transpose() * v;
  const double uf_norm = uf.norm();
  if (uf_norm < 1e-10 * std::max(1.0, v.norm()))
    throw InputError("direction has no component normal to the field");
  uf /= uf_norm;
  const double forward = std::log((cf.mats.back() * uf).norm()) / h;

  // Backward quotient: flow to phi_{-h}(x), run the cocycle forward to x,
  // and pull v back through it.
  SmoothSystem rev = time_reversed(system);
  auto [y, ignored] = advance(rev, x, h, dt);
  (void)ignored;
  TrajectorySegment back = integrate(system, y, h, opts);
  LpfCocycle cb = lpf_cocycle(system, back);
  Vec ub = cb.frames.back().transpose() * v;
  const double ub_norm = ub.norm();
  if (ub_norm < 1e-10 * std::max(1.0, v.norm()))
    throw InputError("direction has no component normal to the field");
  ub /= ub_norm;
  Vec pulled = cb.mats.back().colPivHouseholderQr().solve(ub);
  const double backward = -std::log(pulled.norm()) / h;
  return {backward, forward};
}

double additivity_residual(const SmoothSystem& system, const TrajectorySegment& seg,
                           const LpfCocycle& cocycle, const Vec& v0, std::size_t k) {
  if (k >= cocycle.size()) throw InputError("sample index out of range");
  if (seg.size() != cocycle.size())
    throw InputError("segment and cocycle sample counts differ");

  Vec u0 = cocycle.frames.front().transpose() * v0;
  const double u0_norm = u0.norm();
  if (u0_norm < 1e-10 * std::max(1.0, v0.norm()))
    throw InputError("direction has no component normal to the field");
  u0 /= u0_norm;

  std::vector<double> rates;
  rates.reserve(k + 1);
  for (std::size_t s = 0; s <= k; ++s) {
    Vec w = cocycle.mats[s] * u0;
    const double w_norm = w.norm();
    if (!(w_norm > 0.0)) throw NumericError("cocycle image collapsed");
    Vec ambient = cocycle.frames[s] * (w / w_norm);
    rates.push_back(generator_D(system, seg.states[s], ambient));
  }

  std::vector<double> times(cocycle.times.begin(), cocycle.times.begin() + k + 1);
  double integral = 0.0;
  if (k >= 1) integral = integrate_samples(rates, uniform_spacing(times));
  const double direct = std::log((cocycle.mats[k] * u0).norm());
  return std::abs(direct - integral);
}

namespace {

SectionalExponents windowed_quotients(const LpfCocycle& cocycle, double t_begin,
                                      double t_end, bool inverse) {
  if (!(t_begin >= 1.0 - 1e-12))
    throw InputError("exponent window must start at time >= 1");
  if (!(t_end > t_begin)) throw InputError("empty exponent window");

  SectionalExponents out;
  out.window_begin = t_begin;
  out.window_end = t_end;
  for (std::size_t k = 0; k < cocycle.size(); ++k) {
    const double t = cocycle.times[k];
    if (t < t_begin - 1e-12 || t > t_end + 1e-12) continue;
    const double v = inverse ? -cocycle.log_conorms[k] / t
                             : cocycle.log_norms[k] / t;
    out.times.push_back(t);
    out.values.push_back(v);
  }
  if (out.values.empty())
    throw InputError("no cocycle samples inside the exponent window");
  out.liminf_estimate = *std::min_element(out.values.begin(), out.values.end());
  out.limsup_estimate = *std::max_element(out.values.begin(), out.values.end());
  out.caveat =
      "finite-horizon estimate over the stated window; the asymptotic "
      "exponents require the infinite-time limit";
  return out;
}

}  // namespace

SectionalExponents sectional_exponents(const LpfCocycle& cocycle, double t_begin,
                                       double t_end) {
  return windowed_quotients(cocycle, t_begin, t_end, false);
}

SectionalExponents inverse_sectional_exponents(const LpfCocycle& cocycle,
                                               double t_begin, double t_end) {
  return windowed_quotients(cocycle, t_begin, t_end, true);
}

}  // namespace hyptimes
