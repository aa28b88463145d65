#include "hyptimes/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "hyptimes/errors.hpp"

namespace hyptimes {

namespace {
constexpr double kMinDirectionNorm = 1e-300;
constexpr double kTransportPivotTol = 1e-8;
}  // namespace

ChartTopology ChartTopology::euclidean(int dim) {
  ChartTopology t;
  t.periodic.assign(static_cast<std::size_t>(dim), 0);
  t.periods.assign(static_cast<std::size_t>(dim), 0.0);
  return t;
}

ChartTopology ChartTopology::torus(const std::vector<double>& periods) {
  ChartTopology t;
  t.periodic.assign(periods.size(), 1);
  t.periods = periods;
  for (double p : periods) {
    if (!(p > 0.0)) throw InputError("torus periods must be positive");
  }
  return t;
}

bool ChartTopology::any_periodic() const {
  return std::any_of(periodic.begin(), periodic.end(),
                     [](std::uint8_t f) { return f != 0; });
}

Vec wrap_point(const ChartTopology& topo, const Vec& x) {
  if (x.size() != topo.dim()) throw InputError("wrap_point: dimension mismatch");
  Vec y = x;
  for (int i = 0; i < topo.dim(); ++i) {
    if (!topo.periodic[static_cast<std::size_t>(i)]) continue;
    const double p = topo.periods[static_cast<std::size_t>(i)];
    y[i] = x[i] - p * std::floor(x[i] / p);
    if (y[i] >= p) y[i] -= p;  // guard the x == p rounding case
    if (y[i] < 0.0) y[i] += p;
  }
  return y;
}

Vec displacement(const ChartTopology& topo, const Vec& a, const Vec& b) {
  if (a.size() != topo.dim() || b.size() != topo.dim()) {
    throw InputError("displacement: dimension mismatch");
  }
  Vec d = a - b;
  for (int i = 0; i < topo.dim(); ++i) {
    if (!topo.periodic[static_cast<std::size_t>(i)]) continue;
    const double p = topo.periods[static_cast<std::size_t>(i)];
    d[i] -= p * std::round(d[i] / p);
  }
  return d;
}

double chart_distance(const ChartTopology& topo, const Vec& a, const Vec& b) {
  return displacement(topo, a, b).norm();
}

double chart_diameter(const ChartTopology& topo, const Vec& lo, const Vec& hi) {
  if (lo.size() != topo.dim() || hi.size() != topo.dim()) {
    throw InputError("chart_diameter: dimension mismatch");
  }
  double sq = 0.0;
  for (int i = 0; i < topo.dim(); ++i) {
    double span = std::abs(hi[i] - lo[i]);
    if (topo.periodic[static_cast<std::size_t>(i)]) {
      span = std::min(span, 0.5 * topo.periods[static_cast<std::size_t>(i)]);
    }
    sq += span * span;
  }
  return std::sqrt(sq);
}

Mat orthogonal_projection(const Vec& v) {
  const double n2 = v.squaredNorm();
  if (!(n2 > kMinDirectionNorm * kMinDirectionNorm)) {
    throw InputError("orthogonal_projection: direction magnitude too small");
  }
  const Eigen::Index d = v.size();
  return Mat::Identity(d, d) - (v * v.transpose()) / n2;
}

NormalFrame normal_frame(const Vec& direction) {
  const double n = direction.norm();
  if (!(n > kMinDirectionNorm)) {
    throw InputError("normal_frame: direction magnitude too small");
  }
  const Eigen::Index d = direction.size();
  if (d < 1) throw InputError("normal_frame: empty direction");
  NormalFrame f;
  f.base_direction = direction / n;
  if (d == 1) {
    f.basis = Mat::Zero(1, 0);
    return f;
  }
  // Householder reflector H = I - 2 w w^T/|w|^2 with w = v_hat + s e_1 maps
  // v_hat to -s e_1; its columns 2..d are an orthonormal basis of v_hat^perp.
  const double s = (f.base_direction[0] >= 0.0) ? 1.0 : -1.0;
  Vec w = f.base_direction;
  w[0] += s;
  const double w2 = w.squaredNorm();
  Mat h = Mat::Identity(d, d) - (2.0 / w2) * (w * w.transpose());
  f.basis = h.rightCols(d - 1);
  return f;
}

NormalFrame transport_frame(const NormalFrame& previous, const Vec& new_direction,
                            bool* frame_reset) {
  const double n = new_direction.norm();
  if (!(n > kMinDirectionNorm)) {
    throw InputError("transport_frame: direction magnitude too small");
  }
  if (frame_reset != nullptr) *frame_reset = false;
  const Eigen::Index d = new_direction.size();
  if (previous.basis.rows() != d) {
    throw InputError("transport_frame: dimension mismatch");
  }
  const Vec dir = new_direction / n;
  const auto reset = [&]() {
    if (frame_reset != nullptr) *frame_reset = true;
    return normal_frame(new_direction);
  };
  if (d == 1) return reset();
  if (previous.base_direction.dot(dir) <= 0.0) {
    // Turned by at least a right angle within one step: the column
    // correspondence is no longer trustworthy.
    return reset();
  }
  Mat cols = previous.basis;
  // Project onto the new normal hyperplane, then Gram-Schmidt in order.
  for (Eigen::Index j = 0; j < cols.cols(); ++j) {
    cols.col(j) -= dir * dir.dot(cols.col(j));
    for (Eigen::Index i = 0; i < j; ++i) {
      cols.col(j) -= cols.col(i) * cols.col(i).dot(cols.col(j));
    }
    const double pivot = cols.col(j).norm();
    if (pivot < kTransportPivotTol) return reset();
    cols.col(j) /= pivot;
  }
  NormalFrame f;
  f.base_direction = dir;
  f.basis = std::move(cols);
  return f;
}

}  // namespace hyptimes
