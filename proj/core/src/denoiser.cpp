#include "opshrink/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/SVD>

#include "opshrink/errors.hpp"

namespace opshrink {

namespace {

void check_tolerance(double tolerance) {
    if (!std::isfinite(tolerance) || tolerance < 0.0) {
        throw DomainError("detection tolerance must be finite and >= 0, got " + std::to_string(tolerance));
    }
}

void check_noise_scale(double noise_scale) {
    if (!std::isfinite(noise_scale) || noise_scale <= 0.0) {
        throw DomainError("noise_scale must be finite and > 0, got " + std::to_string(noise_scale));
    }
}

Eigen::VectorXd top_singular_values(const Eigen::MatrixXd& y) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(y);
    return svd.singularValues();
}

} // namespace

void validate(const DataMatrix& y) {
    if (y.rows() < 1 || y.cols() < 1) {
        throw DomainError("data matrix must have at least one row and one column");
    }
    if (!y.values.allFinite()) {
        throw DomainError("data matrix has non-finite entries");
    }
    check_noise_scale(y.noise_scale);
}

SVDFactors thin_svd(const Eigen::MatrixXd& y) {
    if (y.rows() < 1 || y.cols() < 1) {
        throw DomainError("thin_svd: empty matrix");
    }
    if (!y.allFinite()) {
        throw DomainError("thin_svd: non-finite entries");
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(y, Eigen::ComputeThinU | Eigen::ComputeThinV);
    SVDFactors out{svd.matrixU(), svd.singularValues(), svd.matrixV()};

    const Eigen::Index m = out.singular_values.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return out.singular_values(a) > out.singular_values(b);
    });
    if (!std::is_sorted(order.begin(), order.end())) {
        SVDFactors sorted{Eigen::MatrixXd(out.left.rows(), m), Eigen::VectorXd(m),
                          Eigen::MatrixXd(out.right.rows(), m)};
        for (Eigen::Index k = 0; k < m; ++k) {
            const Eigen::Index src = order[static_cast<std::size_t>(k)];
            sorted.left.col(k) = out.left.col(src);
            sorted.singular_values(k) = out.singular_values(src);
            sorted.right.col(k) = out.right.col(src);
        }
        out = std::move(sorted);
    }
    return out;
}

SVDFactors thin_svd(const DataMatrix& y) {
    validate(y);
    return thin_svd(y.values);
}

int detect_rank(std::span<const double> singular_values, Eigen::Index p, Eigen::Index n,
                double noise_scale, double tolerance) {
    if (p < 1 || n < 1) {
        throw DomainError("detect_rank: p and n must be >= 1");
    }
    check_noise_scale(noise_scale);
    check_tolerance(tolerance);
    const AspectRatio gamma(static_cast<double>(p) / static_cast<double>(n));
    const double threshold = gamma.bulk_edge() * (1.0 + tolerance);
    int rank = 0;
    for (const double sigma : singular_values) {
        if (!(sigma / noise_scale > threshold)) {
            break;
        }
        ++rank;
    }
    return rank;
}

int detect_rank(const Eigen::VectorXd& singular_values, Eigen::Index p, Eigen::Index n,
                double noise_scale, double tolerance) {
    return detect_rank(std::span<const double>(singular_values.data(), static_cast<std::size_t>(singular_values.size())),
                       p, n, noise_scale, tolerance);
}

ShrinkResult shrink(const SVDFactors& svd, Eigen::Index rows, Eigen::Index cols, double noise_scale,
                    const ShrinkerKind& kind, const DenoiseOptions& options) {
    check_noise_scale(noise_scale);
    const AspectRatio gamma(static_cast<double>(rows) / static_cast<double>(cols));

    int rank = detect_rank(svd.singular_values, rows, cols, noise_scale, options.tolerance);
    if (options.max_rank) {
        if (*options.max_rank < 0) {
            throw UsageError("max_rank must be >= 0");
        }
        rank = std::min(rank, *options.max_rank);
    }

    const auto* custom = std::get_if<Custom>(&kind);
    if (custom != nullptr) {
        if (custom->q.size() != static_cast<std::size_t>(rank)) {
            throw UsageError("custom shrinker has " + std::to_string(custom->q.size()) +
                             " values but " + std::to_string(rank) + " components were retained");
        }
        for (const double q : custom->q) {
            if (!std::isfinite(q) || q < 0.0) {
                throw UsageError("custom shrinker values must be finite and >= 0");
            }
        }
    }

    ShrinkResult result;
    DenoiseReport& report = result.report;
    report.detected_rank = rank;
    report.shrinker = kind;
    report.gamma_used = gamma.value();
    report.per_component.reserve(static_cast<std::size_t>(rank));

    Eigen::VectorXd q(rank);
    for (int k = 0; k < rank; ++k) {
        const double sigma = svd.singular_values(k);
        const double sigma_units = sigma / noise_scale;
        const ComponentAsymptotics comp = component_from_sigma(sigma_units, gamma);

        double q_k = 0.0;
        if (std::holds_alternative<Optimal>(kind)) {
            q_k = optimal_q_from_sigma(sigma_units, gamma) * noise_scale;
        } else if (std::holds_alternative<OracleTruth>(kind)) {
            q_k = comp.t * noise_scale;
        } else if (custom != nullptr) {
            q_k = custom->q[static_cast<std::size_t>(k)];
        } else {
            q_k = sigma;
        }
        q(k) = q_k;

        const double loss = std::sqrt(block_loss(q_k / noise_scale, BlockParams::from_component(comp))) * noise_scale;
        report.predicted_loss = std::max(report.predicted_loss, loss);
        report.per_component.push_back(
            ComponentEstimate{sigma, comp.t * noise_scale, comp.c, comp.c_tilde, q_k});
    }

    result.estimate.left = svd.left.leftCols(rank) * q.asDiagonal();
    result.estimate.right = svd.right.leftCols(rank);
    return result;
}

DenoiseResult denoise(const DataMatrix& y, const ShrinkerKind& kind, const DenoiseOptions& options) {
    validate(y);
    check_tolerance(options.tolerance);
    const SVDFactors svd = thin_svd(y.values);
    ShrinkResult shrunk = shrink(svd, y.rows(), y.cols(), y.noise_scale, kind, options);
    return DenoiseResult{DataMatrix{shrunk.estimate.dense(), y.noise_scale}, std::move(shrunk.report)};
}

void validate(const GroundTruthFactors& truth) {
    const auto r = static_cast<std::size_t>(truth.components.cols());
    if (truth.strengths.size() != r) {
        throw UsageError("ground truth: " + std::to_string(r) + " components but " +
                         std::to_string(truth.strengths.size()) + " strengths");
    }
    for (std::size_t k = 0; k < r; ++k) {
        const double t = truth.strengths[k];
        if (!std::isfinite(t) || t <= 0.0) {
            throw DomainError("ground truth strengths must be finite and > 0");
        }
        if (k > 0 && !(t < truth.strengths[k - 1])) {
            throw DomainError("ground truth strengths must be strictly decreasing");
        }
    }
    if (r > 0) {
        const auto k = static_cast<Eigen::Index>(r);
        const Eigen::MatrixXd gram = truth.components.transpose() * truth.components;
        if ((gram - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff() > 1e-10) {
            throw DomainError("ground truth components must be orthonormal");
        }
    }
}

LowRankMatrix blp_predict_factored(const DataMatrix& y, const GroundTruthFactors& truth) {
    validate(y);
    validate(truth);
    if (truth.components.rows() != y.rows()) {
        throw UsageError("blp_predict: components have " + std::to_string(truth.components.rows()) +
                         " rows, data has " + std::to_string(y.rows()));
    }
    const double nu2 = y.noise_scale * y.noise_scale;
    Eigen::VectorXd weights(truth.components.cols());
    for (Eigen::Index k = 0; k < weights.size(); ++k) {
        const double t2 = truth.strengths[static_cast<std::size_t>(k)] * truth.strengths[static_cast<std::size_t>(k)];
        weights(k) = t2 / (t2 + nu2);
    }
    // The per-column sqrt(n) factors cancel: the predictor is linear in Y_j.
    return LowRankMatrix{truth.components * weights.asDiagonal(), y.values.transpose() * truth.components};
}

DataMatrix blp_predict(const DataMatrix& y, const GroundTruthFactors& truth) {
    return DataMatrix{blp_predict_factored(y, truth).dense(), y.noise_scale};
}

namespace {

DataMatrix linear_predictor(const DataMatrix& y, std::span<const double> q, const Eigen::MatrixXd& directions,
                            const Eigen::VectorXd& sigma) {
    const auto r = static_cast<Eigen::Index>(q.size());
    if (r > sigma.size()) {
        throw UsageError("empirical_linear_predictor: more q values than singular values");
    }
    Eigen::VectorXd coeff(r);
    for (Eigen::Index k = 0; k < r; ++k) {
        if (!(sigma(k) > 0.0)) {
            throw DomainError("empirical_linear_predictor: zero singular value among retained components");
        }
        coeff(k) = q[static_cast<std::size_t>(k)] / sigma(k);
    }
    const Eigen::MatrixXd projections = directions.transpose() * y.values;  // r x n
    return DataMatrix{directions * coeff.asDiagonal() * projections, y.noise_scale};
}

} // namespace

DataMatrix empirical_linear_predictor(const DataMatrix& y, std::span<const double> q) {
    validate(y);
    const SVDFactors svd = thin_svd(y.values);
    if (q.size() > static_cast<std::size_t>(svd.singular_values.size())) {
        throw UsageError("empirical_linear_predictor: more q values than singular values");
    }
    return linear_predictor(y, q, svd.left.leftCols(static_cast<Eigen::Index>(q.size())), svd.singular_values);
}

DataMatrix empirical_linear_predictor(const DataMatrix& y, std::span<const double> q,
                                      const Eigen::MatrixXd& directions) {
    validate(y);
    if (directions.rows() != y.rows() || directions.cols() != static_cast<Eigen::Index>(q.size())) {
        throw UsageError("empirical_linear_predictor: directions must be p x len(q)");
    }
    return linear_predictor(y, q, directions, top_singular_values(y.values));
}

double operator_norm_error(const DataMatrix& a, const DataMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw UsageError("operator_norm_error: shapes differ");
    }
    return operator_norm(Eigen::MatrixXd(a.values - b.values));
}

} // namespace opshrink
