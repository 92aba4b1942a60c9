#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "opshrink/linalg.hpp"
#include "opshrink/shrinker.hpp"

namespace opshrink {

/// Observed (or estimated) p x n matrix, rows = features, columns = samples.
///
/// noise_scale is the per-entry noise standard deviation times sqrt(n). In
/// the reference model Y = X + G with G_ij ~ N(0, 1/n) it equals 1. Columns
/// are stored as the model states them (already divided by sqrt(n)); the
/// sqrt(n) only enters when a column is read as a single observation.
struct DataMatrix {
    Eigen::MatrixXd values;
    double noise_scale = 1.0;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
};

/// Throws DomainError on empty shape, non-finite entries or noise_scale <= 0.
void validate(const DataMatrix& y);

struct SVDFactors {
    Eigen::MatrixXd left;              // p x m
    Eigen::VectorXd singular_values;   // m, nonincreasing
    Eigen::MatrixXd right;             // n x m
};

/// Thin SVD, m = min(p, n). Ties in sigma keep their original order.
SVDFactors thin_svd(const DataMatrix& y);
SVDFactors thin_svd(const Eigen::MatrixXd& y);

/// Number of leading singular values with sigma / noise_scale above
/// (1 + sqrt(p/n)) * (1 + tolerance).
int detect_rank(std::span<const double> singular_values, Eigen::Index p, Eigen::Index n,
                double noise_scale, double tolerance);
int detect_rank(const Eigen::VectorXd& singular_values, Eigen::Index p, Eigen::Index n,
                double noise_scale, double tolerance);

struct ComponentEstimate {
    double sigma_observed = 0.0;  // matrix units
    double t_hat = 0.0;           // matrix units
    double c_hat = 0.0;
    double c_tilde_hat = 0.0;
    double q_applied = 0.0;       // matrix units
};

struct DenoiseReport {
    int detected_rank = 0;
    std::vector<ComponentEstimate> per_component;
    double predicted_loss = 0.0;  // asymptotic operator-norm loss at the plug-in estimates
    ShrinkerKind shrinker = Optimal{};
    double gamma_used = 0.0;
};

struct DenoiseOptions {
    double tolerance = 0.02;
    /// Caps the retained rank, e.g. when the planted rank is known.
    std::optional<int> max_rank;
};

struct ShrinkResult {
    LowRankMatrix estimate;
    DenoiseReport report;
};

/// Shrinkage on precomputed factors of a rows x cols matrix. Lets callers
/// reuse one SVD for several rules.
ShrinkResult shrink(const SVDFactors& svd, Eigen::Index rows, Eigen::Index cols, double noise_scale,
                    const ShrinkerKind& kind, const DenoiseOptions& options = {});

struct DenoiseResult {
    DataMatrix estimate;
    DenoiseReport report;
};

/// X_hat = sum_{k <= r_hat} q_k u_hat_k v_hat_k^T with q_k picked by kind.
DenoiseResult denoise(const DataMatrix& y, const ShrinkerKind& kind, const DenoiseOptions& options = {});

/// Population principal components and their strengths (std. deviation of a
/// column along u_k, in matrix units before the 1/sqrt(n) column scaling).
struct GroundTruthFactors {
    Eigen::MatrixXd components;  // p x r, orthonormal
    std::vector<double> strengths;
};

void validate(const GroundTruthFactors& truth);

/// Best linear predictor of each column given the true components:
/// X_j = sum_k t_k^2 / (t_k^2 + nu^2) <Y_j, u_k> u_k with nu = noise_scale.
DataMatrix blp_predict(const DataMatrix& y, const GroundTruthFactors& truth);

/// Same predictor in factored form (rank r).
LowRankMatrix blp_predict_factored(const DataMatrix& y, const GroundTruthFactors& truth);

/// Linear predictor with coefficients q_k / sigma_k on Y's own top singular
/// directions. Coincides with the shrinkage estimator with values q.
DataMatrix empirical_linear_predictor(const DataMatrix& y, std::span<const double> q);

/// Linear predictor with coefficients q_k / sigma_k (sigma_k from Y) applied
/// to caller-supplied directions, e.g. the population u_k.
DataMatrix empirical_linear_predictor(const DataMatrix& y, std::span<const double> q,
                                      const Eigen::MatrixXd& directions);

/// ||A - B||_op. Throws UsageError on shape mismatch.
double operator_norm_error(const DataMatrix& a, const DataMatrix& b);

} // namespace opshrink
