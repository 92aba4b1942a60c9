#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "opshrink/denoiser.hpp"
#include "opshrink/errors.hpp"
#include "opshrink/experiments.hpp"
#include "opshrink/random.hpp"
#include "opshrink/spiked_model.hpp"

using namespace opshrink;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index p, Eigen::Index n, std::uint64_t seed) {
    Rng rng(seed);
    return rng.normal_matrix(p, n);
}

SpikedSample rank_one(Eigen::Index p, Eigen::Index n, double t, std::uint64_t seed) {
    SpikedModelConfig cfg;
    cfg.p = p;
    cfg.n = n;
    cfg.strengths = {t};
    cfg.seed = seed;
    return generate_spiked(cfg);
}

} // namespace

TEST(ThinSvd, DiagonalAndRankOne) {
    Eigen::MatrixXd d(2, 2);
    d << 3, 0, 0, 1;
    const SVDFactors f = thin_svd(DataMatrix{d});
    EXPECT_NEAR(f.singular_values(0), 3.0, 1e-14);
    EXPECT_NEAR(f.singular_values(1), 1.0, 1e-14);

    Eigen::VectorXd u = Eigen::VectorXd::LinSpaced(6, 1.0, 6.0).normalized();
    Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(4, -2.0, 1.0).normalized();
    const SVDFactors r1 = thin_svd(DataMatrix{5.0 * u * v.transpose()});
    ASSERT_EQ(r1.singular_values.size(), 4);
    EXPECT_NEAR(r1.singular_values(0), 5.0, 1e-12);
    for (Eigen::Index k = 1; k < 4; ++k) {
        EXPECT_NEAR(r1.singular_values(k), 0.0, 1e-12);
    }
}

TEST(ThinSvd, ReconstructsAndIsOrthonormal) {
    for (const auto& [p, n] : {std::pair<Eigen::Index, Eigen::Index>{20, 50}, {50, 20}, {33, 33}}) {
        const Eigen::MatrixXd y = random_matrix(p, n, 42 + p);
        const SVDFactors f = thin_svd(y);
        const Eigen::Index m = std::min(p, n);
        ASSERT_EQ(f.left.cols(), m);
        ASSERT_EQ(f.right.cols(), m);
        const Eigen::MatrixXd rebuilt = f.left * f.singular_values.asDiagonal() * f.right.transpose();
        EXPECT_LT(operator_norm(Eigen::MatrixXd(rebuilt - y)) / operator_norm(y), 1e-8);
        EXPECT_TRUE((f.left.transpose() * f.left).isApprox(Eigen::MatrixXd::Identity(m, m), 1e-8));
        EXPECT_TRUE((f.right.transpose() * f.right).isApprox(Eigen::MatrixXd::Identity(m, m), 1e-8));
        for (Eigen::Index k = 1; k < m; ++k) {
            EXPECT_GE(f.singular_values(k - 1), f.singular_values(k));
        }
    }
}

TEST(ThinSvd, RejectsNonFinite) {
    Eigen::MatrixXd y = Eigen::MatrixXd::Ones(3, 3);
    y(1, 1) = std::nan("");
    EXPECT_THROW(thin_svd(DataMatrix{y}), DomainError);
}

TEST(DetectRank, Threshold) {
    const std::vector<double> sv{3.0, 1.9, 1.0};
    EXPECT_EQ(detect_rank(sv, 10, 10, 1.0, 0.0), 1);
    const std::vector<double> scaled{6.0, 3.8, 2.0};
    EXPECT_EQ(detect_rank(scaled, 10, 10, 2.0, 0.0), 1);
    const std::vector<double> edge{2.03, 1.0};
    EXPECT_EQ(detect_rank(edge, 10, 10, 1.0, 0.0), 1);
    EXPECT_EQ(detect_rank(edge, 10, 10, 1.0, 0.02), 0);
    EXPECT_THROW(detect_rank(sv, 10, 10, 1.0, -0.1), DomainError);
    EXPECT_THROW(detect_rank(sv, 10, 10, 0.0, 0.0), DomainError);
}

TEST(DetectRank, PureNoiseRarelyProducesFalseSpikes) {
    int zero = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        SpikedModelConfig cfg;
        cfg.p = 200;
        cfg.n = 200;
        cfg.seed = substream_seed(1234, seed);
        const SpikedSample s = generate_spiked(cfg);
        const SVDFactors f = thin_svd(s.observed);
        zero += detect_rank(f.singular_values, 200, 200, 1.0, 0.02) == 0 ? 1 : 0;
    }
    EXPECT_GE(zero, 45);
}

TEST(Denoise, AllBelowEdgeGivesZero) {
    const Eigen::MatrixXd y = 0.01 * random_matrix(30, 40, 1);
    const DenoiseResult r = denoise(DataMatrix{y}, Optimal{});
    EXPECT_EQ(r.report.detected_rank, 0);
    EXPECT_TRUE(r.report.per_component.empty());
    EXPECT_EQ(r.estimate.values.norm(), 0.0);
    EXPECT_EQ(r.report.predicted_loss, 0.0);
}

TEST(Denoise, CustomLengthMustMatchRetainedRank) {
    const SpikedSample s = rank_one(100, 100, 3.0, 5);
    EXPECT_THROW(denoise(s.observed, Custom{{1.0, 2.0}}), UsageError);
    EXPECT_THROW(denoise(s.observed, Custom{{-1.0}}), UsageError);
    const DenoiseResult ok = denoise(s.observed, Custom{{2.0}});
    EXPECT_DOUBLE_EQ(ok.report.per_component[0].q_applied, 2.0);
}

TEST(Denoise, RankOneLossNearAsymptoticValue) {
    double total = 0.0;
    constexpr int seeds = 50;
    for (int seed = 0; seed < seeds; ++seed) {
        const SpikedSample s = rank_one(400, 400, 2.0, substream_seed(77, seed));
        const DenoiseResult r = denoise(s.observed, Optimal{});
        total += operator_norm_error(r.estimate, s.signal);
    }
    EXPECT_NEAR(total / seeds, 1.0, 0.15);
}

TEST(Denoise, OptimalBeatsOracleTruthOffSquare) {
    int wins = 0;
    constexpr int seeds = 40;
    for (int seed = 0; seed < seeds; ++seed) {
        const SpikedSample s = rank_one(100, 400, 1.5, substream_seed(88, seed));
        const double opt = operator_norm_error(denoise(s.observed, Optimal{}).estimate, s.signal);
        const double gd = operator_norm_error(denoise(s.observed, OracleTruth{}).estimate, s.signal);
        wins += opt < gd ? 1 : 0;
    }
    EXPECT_GE(wins, 34);
}

TEST(Denoise, ReportFields) {
    const SpikedSample s = rank_one(200, 400, 2.0, 3);
    const DenoiseResult r = denoise(s.observed, Optimal{});
    ASSERT_EQ(r.report.detected_rank, 1);
    ASSERT_EQ(r.report.per_component.size(), 1u);
    const auto& c = r.report.per_component[0];
    EXPECT_DOUBLE_EQ(r.report.gamma_used, 0.5);
    EXPECT_NEAR(c.t_hat, 2.0, 0.2);
    EXPECT_GT(c.c_hat, c.c_tilde_hat);
    EXPECT_LE(c.q_applied, c.sigma_observed);
    EXPECT_GT(r.report.predicted_loss, 0.0);
    EXPECT_EQ(shrinker_name(r.report.shrinker), "optimal");
}

TEST(DenoiseProperties, ShrinkageNeverAmplifies) {
    for (int seed = 0; seed < 10; ++seed) {
        SpikedModelConfig cfg;
        cfg.p = 60;
        cfg.n = 150;
        cfg.strengths = {4.0, 2.0, 1.2};
        cfg.seed = seed;
        const DenoiseResult r = denoise(generate_spiked(cfg).observed, Optimal{});
        for (const auto& c : r.report.per_component) {
            EXPECT_GE(c.q_applied, 0.0);
            EXPECT_LE(c.q_applied, c.sigma_observed);
        }
    }
}

TEST(DenoiseProperties, SquareMatricesMakeOptimalAndOracleTruthIdentical) {
    for (int seed = 0; seed < 5; ++seed) {
        SpikedModelConfig cfg;
        cfg.p = 80;
        cfg.n = 80;
        cfg.strengths = {3.0, 1.7};
        cfg.seed = seed;
        const SpikedSample s = generate_spiked(cfg);
        const DenoiseResult opt = denoise(s.observed, Optimal{});
        const DenoiseResult gd = denoise(s.observed, OracleTruth{});
        EXPECT_LE((opt.estimate.values - gd.estimate.values).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(DenoiseProperties, ScaleEquivariance) {
    const SpikedSample s = rank_one(60, 120, 2.5, 9);
    for (const double scale : {0.5, 3.0, 1e3}) {
        const DataMatrix scaled{scale * s.observed.values, scale};
        for (const ShrinkerKind& kind : {ShrinkerKind{Optimal{}}, ShrinkerKind{OracleTruth{}}, ShrinkerKind{HardThreshold{}}}) {
            const DenoiseResult base = denoise(s.observed, kind);
            const DenoiseResult big = denoise(scaled, kind);
            EXPECT_EQ(base.report.detected_rank, big.report.detected_rank);
            EXPECT_LE((big.estimate.values - scale * base.estimate.values).norm(), 1e-8 * scale);
        }
    }
}

TEST(DenoiseProperties, OrthogonalInvariance) {
    const SpikedSample s = rank_one(50, 90, 2.2, 4);
    Rng rng(55);
    const Eigen::MatrixXd rotation = orthonormalize_columns(rng.normal_matrix(50, 50));
    const double base = operator_norm_error(denoise(s.observed, Optimal{}).estimate, s.signal);
    const DataMatrix rotated_y{rotation * s.observed.values};
    const DataMatrix rotated_x{rotation * s.signal.values};
    const double rotated = operator_norm_error(denoise(rotated_y, Optimal{}).estimate, rotated_x);
    EXPECT_NEAR(base, rotated, 1e-8);
}

TEST(DenoiseProperties, NoShrinkAndHardThresholdKeepSigma) {
    const SpikedSample s = rank_one(60, 120, 3.0, 2);
    const DenoiseResult none = denoise(s.observed, NoShrink{});
    const DenoiseResult hard = denoise(s.observed, HardThreshold{});
    ASSERT_EQ(none.report.detected_rank, 1);
    EXPECT_DOUBLE_EQ(none.report.per_component[0].q_applied, none.report.per_component[0].sigma_observed);
    EXPECT_EQ((none.estimate.values - hard.estimate.values).norm(), 0.0);
}

TEST(Denoise, MaxRankCapsRetainedComponents) {
    SpikedModelConfig cfg;
    cfg.p = 80;
    cfg.n = 160;
    cfg.strengths = {4.0, 3.0};
    const SpikedSample s = generate_spiked(cfg);
    EXPECT_EQ(denoise(s.observed, Optimal{}).report.detected_rank, 2);
    EXPECT_EQ(denoise(s.observed, Optimal{}, DenoiseOptions{0.02, 1}).report.detected_rank, 1);
}

TEST(Blp, CoefficientIsWienerGain) {
    // One coordinate, t = 1: coefficient exactly 1/2.
    Eigen::MatrixXd y(3, 2);
    y << 2, 4, 0, 1, 0, 0;
    GroundTruthFactors truth{Eigen::MatrixXd::Identity(3, 1), {1.0}};
    const DataMatrix out = blp_predict(DataMatrix{y}, truth);
    EXPECT_DOUBLE_EQ(out.values(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(out.values(0, 1), 2.0);
    EXPECT_EQ(out.values.row(1).norm(), 0.0);

    GroundTruthFactors strong{Eigen::MatrixXd::Identity(3, 1), {1e8}};
    EXPECT_NEAR(blp_predict(DataMatrix{y}, strong).values(0, 1), 4.0, 1e-12);
}

TEST(Blp, ColumnMseMatchesWienerValue) {
    SpikedModelConfig cfg;
    cfg.p = 100;
    cfg.n = 20000;
    cfg.strengths = {1.1};
    cfg.signal_model = SignalModel::IidColumns;
    cfg.seed = 17;
    const SpikedSample s = generate_spiked(cfg);
    const DataMatrix blp = blp_predict(s.observed, s.truth);
    // Columns are stored divided by sqrt(n); the squared Frobenius norm is the
    // average per-column MSE in unscaled units.
    const double mse = (blp.values - s.signal.values).squaredNorm();
    EXPECT_NEAR(mse, 1.21 / 2.21, 0.02);
}

TEST(Blp, DimensionMismatch) {
    GroundTruthFactors truth{Eigen::MatrixXd::Identity(4, 1), {1.0}};
    EXPECT_THROW(blp_predict(DataMatrix{Eigen::MatrixXd::Ones(3, 5)}, truth), UsageError);
    GroundTruthFactors bad{Eigen::MatrixXd::Identity(3, 2), {1.0, 2.0}};
    EXPECT_THROW(blp_predict(DataMatrix{Eigen::MatrixXd::Ones(3, 5)}, bad), DomainError);
}

TEST(LinearPredictor, SampleDirectionsReproduceTruncatedSvd) {
    const Eigen::MatrixXd y = random_matrix(12, 30, 8);
    const SVDFactors f = thin_svd(y);
    const std::vector<double> q{f.singular_values(0), f.singular_values(1), f.singular_values(2)};
    const DataMatrix lp = empirical_linear_predictor(DataMatrix{y}, q);
    const Eigen::MatrixXd truncated = f.left.leftCols(3) * f.singular_values.head(3).asDiagonal() * f.right.leftCols(3).transpose();
    EXPECT_LE((lp.values - truncated).norm(), 1e-10);

    const std::vector<double> zeros(3, 0.0);
    EXPECT_EQ(empirical_linear_predictor(DataMatrix{y}, zeros).values.norm(), 0.0);
}

TEST(LinearPredictor, SampleDirectionsMatchShrinkageEstimator) {
    const SpikedSample s = rank_one(40, 120, 2.5, 12);
    const DenoiseResult r = denoise(s.observed, Optimal{});
    std::vector<double> q;
    for (const auto& c : r.report.per_component) {
        q.push_back(c.q_applied);
    }
    EXPECT_LE((empirical_linear_predictor(s.observed, q).values - r.estimate.values).norm(), 1e-10);
}

TEST(LinearPredictor, DegenerateSpectrum) {
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(4, 6);
    y(0, 0) = 1.0;
    const std::vector<double> q{1.0, 1.0};
    EXPECT_THROW(empirical_linear_predictor(DataMatrix{y}, q), DomainError);
    const std::vector<double> too_many(5, 1.0);
    EXPECT_THROW(empirical_linear_predictor(DataMatrix{y}, too_many), UsageError);
}

TEST(LinearPredictor, PopulationVersionGapShrinksWithN) {
    // X_hat^q vs the q_k / sigma_k predictor on the true u_k: the Frobenius
    // gap vanishes as n grows with p fixed.
    auto mean_gap = [](Eigen::Index n) {
        double total = 0.0;
        constexpr int reps = 20;
        for (int j = 0; j < reps; ++j) {
            SpikedModelConfig cfg;
            cfg.p = 50;
            cfg.n = n;
            cfg.strengths = {2.0};
            cfg.signal_model = SignalModel::IidColumns;
            cfg.seed = substream_seed(404, replicate_stream(static_cast<std::size_t>(n), j));
            const SpikedSample s = generate_spiked(cfg);
            const DenoiseResult r = denoise(s.observed, Optimal{}, DenoiseOptions{0.02, 1});
            std::vector<double> q;
            for (const auto& c : r.report.per_component) {
                q.push_back(c.q_applied);
            }
            const Eigen::MatrixXd dirs = s.truth.components.leftCols(static_cast<Eigen::Index>(q.size()));
            const DataMatrix lp = empirical_linear_predictor(s.observed, q, dirs);
            total += (lp.values - r.estimate.values).norm();
        }
        return total / reps;
    };
    const double small_n = mean_gap(100);
    const double large_n = mean_gap(4000);
    EXPECT_LT(large_n, 0.25 * small_n) << small_n << " -> " << large_n;
}

TEST(OperatorNormError, Basics) {
    const Eigen::MatrixXd a = random_matrix(7, 9, 1);
    EXPECT_EQ(operator_norm_error(DataMatrix{a}, DataMatrix{a}), 0.0);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 1.0;
    EXPECT_NEAR(operator_norm_error(DataMatrix{d}, DataMatrix{Eigen::MatrixXd::Zero(2, 2)}), 2.0, 1e-14);
    const Eigen::MatrixXd b = random_matrix(7, 9, 2);
    EXPECT_NEAR(operator_norm_error(DataMatrix{a}, DataMatrix{b}),
                thin_svd(Eigen::MatrixXd(a - b)).singular_values(0), 1e-10);
    EXPECT_THROW(operator_norm_error(DataMatrix{a}, DataMatrix{Eigen::MatrixXd::Zero(9, 7)}), UsageError);
}

TEST(LowRank, NormsMatchDense) {
    Rng rng(3);
    const LowRankMatrix a{rng.normal_matrix(30, 3), rng.normal_matrix(70, 3)};
    const LowRankMatrix b{rng.normal_matrix(30, 2), rng.normal_matrix(70, 2)};
    const LowRankMatrix diff = difference(a, b);
    const Eigen::MatrixXd dense = a.dense() - b.dense();
    EXPECT_NEAR(operator_norm(diff), operator_norm(dense), 1e-10 * operator_norm(dense));
    EXPECT_NEAR(frobenius_norm(diff), dense.norm(), 1e-10 * dense.norm());
    EXPECT_EQ(operator_norm(LowRankMatrix::zero(4, 5)), 0.0);
    // More factor columns than rows.
    const LowRankMatrix wide{rng.normal_matrix(2, 5), rng.normal_matrix(8, 5)};
    EXPECT_NEAR(operator_norm(wide), operator_norm(wide.dense()), 1e-10 * operator_norm(wide.dense()));
}
