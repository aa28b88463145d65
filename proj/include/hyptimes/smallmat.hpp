#pragma once

#include <Eigen/Dense>

namespace hyptimes {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Singular values of a small dense matrix by one-sided Jacobi rotations.
// Returned in descending order. Intended for the d <= 6 matrices this
// library works with; accuracy is near machine precision, which keeps
// operator-norm checks free of iterative-solver tolerances.
Vec jacobi_singular_values(const Mat& a);

// Largest singular value (spectral operator norm).
double operator_norm(const Mat& a);

// Smallest singular value. operator_norm(inverse) == 1 / conorm for
// invertible matrices.
double conorm(const Mat& a);

// log of operator norm / conorm, guarded against zero singular values.
double log_operator_norm(const Mat& a);
double log_conorm(const Mat& a);

// Largest eigenvalue of the symmetric part (A + A^T)/2.
double max_symmetric_eigenvalue(const Mat& a);

// Smallest eigenvalue of the symmetric part.
double min_symmetric_eigenvalue(const Mat& a);

}  // namespace hyptimes
