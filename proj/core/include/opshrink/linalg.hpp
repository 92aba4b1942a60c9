#pragma once

#include <Eigen/Core>

namespace opshrink {

/// A matrix held as left * right^T with k = left.cols() = right.cols().
/// Estimates and planted signals are stored this way so that loss
/// evaluation never touches a dense p x n product.
struct LowRankMatrix {
    Eigen::MatrixXd left;   // rows x k
    Eigen::MatrixXd right;  // cols x k

    Eigen::Index rows() const { return left.rows(); }
    Eigen::Index cols() const { return right.rows(); }
    Eigen::Index rank_bound() const { return left.cols(); }

    Eigen::MatrixXd dense() const;

    static LowRankMatrix zero(Eigen::Index rows, Eigen::Index cols);
};

/// a - b, stacked factors. Throws UsageError on shape mismatch.
LowRankMatrix difference(const LowRankMatrix& a, const LowRankMatrix& b);

/// Largest singular value of a dense matrix (singular values only, BDCSVD).
double operator_norm(const Eigen::MatrixXd& m);

/// Largest singular value of left * right^T via thin QR of both factors
/// and an SVD of the k x k core.
double operator_norm(const LowRankMatrix& m);

double frobenius_norm(const LowRankMatrix& m);

/// Orthonormal basis of the column span (Householder QR), with column signs
/// fixed so that diag(R) >= 0. Applied to a Gaussian matrix this yields a
/// Haar-distributed frame.
Eigen::MatrixXd orthonormalize_columns(const Eigen::MatrixXd& m);

} // namespace opshrink
