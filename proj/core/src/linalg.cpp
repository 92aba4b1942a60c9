#include "opshrink/linalg.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include "opshrink/errors.hpp"

namespace opshrink {

namespace {

// R factor of a thin QR, min(rows, k) x k; satisfies m^T m = R^T R.
Eigen::MatrixXd thin_r_factor(const Eigen::MatrixXd& m) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    const Eigen::Index k = std::min(m.rows(), m.cols());
    return qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
}

} // namespace

Eigen::MatrixXd LowRankMatrix::dense() const { return left * right.transpose(); }

LowRankMatrix LowRankMatrix::zero(Eigen::Index rows, Eigen::Index cols) {
    return LowRankMatrix{Eigen::MatrixXd::Zero(rows, 0), Eigen::MatrixXd::Zero(cols, 0)};
}

LowRankMatrix difference(const LowRankMatrix& a, const LowRankMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw UsageError("low-rank difference: shape mismatch");
    }
    LowRankMatrix out;
    out.left.resize(a.rows(), a.rank_bound() + b.rank_bound());
    out.right.resize(a.cols(), a.rank_bound() + b.rank_bound());
    out.left << a.left, -b.left;
    out.right << a.right, b.right;
    return out;
}

double operator_norm(const Eigen::MatrixXd& m) {
    if (m.size() == 0) {
        return 0.0;
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()(0);
}

double operator_norm(const LowRankMatrix& m) {
    if (m.rank_bound() == 0 || m.rows() == 0 || m.cols() == 0) {
        return 0.0;
    }
    // left = Ql Rl, right = Qr Rr  =>  left right^T = Ql (Rl Rr^T) Qr^T.
    const Eigen::MatrixXd core = thin_r_factor(m.left) * thin_r_factor(m.right).transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(core);
    return svd.singularValues()(0);
}

double frobenius_norm(const LowRankMatrix& m) {
    if (m.rank_bound() == 0) {
        return 0.0;
    }
    return (thin_r_factor(m.left) * thin_r_factor(m.right).transpose()).norm();
}

Eigen::MatrixXd orthonormalize_columns(const Eigen::MatrixXd& m) {
    if (m.cols() > m.rows()) {
        throw UsageError("orthonormalize_columns: more columns than rows");
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
        if (qr.matrixQR()(k, k) < 0.0) {
            q.col(k) = -q.col(k);
        }
    }
    return q;
}

} // namespace opshrink
