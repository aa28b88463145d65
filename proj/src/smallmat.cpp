#include "hyptimes/smallmat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hyptimes/errors.hpp"

namespace hyptimes {

Vec jacobi_singular_values(const Mat& a) {
  if (a.rows() == 0 || a.cols() == 0) return Vec::Zero(0);
  // Work on U = A and rotate column pairs until all columns are mutually
  // orthogonal; the singular values are then the column norms.
  Mat u = a;
  const Eigen::Index n = u.cols();
  const double eps = std::numeric_limits<double>::epsilon();
  bool rotated = true;
  for (int sweep = 0; sweep < 60 && rotated; ++sweep) {
    rotated = false;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double alpha = u.col(p).squaredNorm();
        const double beta = u.col(q).squaredNorm();
        const double gamma = u.col(p).dot(u.col(q));
        if (std::abs(gamma) <= eps * std::sqrt(alpha * beta) || gamma == 0.0) {
          continue;
        }
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Eigen::Index r = 0; r < u.rows(); ++r) {
          const double up = u(r, p);
          const double uq = u(r, q);
          u(r, p) = c * up - s * uq;
          u(r, q) = s * up + c * uq;
        }
      }
    }
  }
  Vec sv(n);
  for (Eigen::Index j = 0; j < n; ++j) sv[j] = u.col(j).norm();
  std::sort(sv.data(), sv.data() + n, std::greater<double>());
  return sv;
}

double operator_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  const Vec sv = jacobi_singular_values(a);
  return sv[0];
}

double conorm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  const Vec sv = jacobi_singular_values(a);
  return sv[sv.size() - 1];
}

double log_operator_norm(const Mat& a) {
  const double s = operator_norm(a);
  if (s <= 0.0) {
    throw NumericError("operator norm is zero; log undefined");
  }
  return std::log(s);
}

double log_conorm(const Mat& a) {
  const double s = conorm(a);
  if (s <= 0.0) {
    throw NumericError("conorm is zero; log undefined");
  }
  return std::log(s);
}

double max_symmetric_eigenvalue(const Mat& a) {
  const Mat sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double min_symmetric_eigenvalue(const Mat& a) {
  const Mat sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace hyptimes
