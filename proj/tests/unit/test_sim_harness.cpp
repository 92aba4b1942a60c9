#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>
#include <string>

#include <Eigen/Dense>

#include "opshrink/curve_table.hpp"
#include "opshrink/denoiser.hpp"
#include "opshrink/errors.hpp"
#include "opshrink/experiments.hpp"
#include "opshrink/random.hpp"
#include "opshrink/spike_asymptotics.hpp"
#include "opshrink/spiked_model.hpp"

using namespace opshrink;
namespace fs = std::filesystem;

TEST(Rng, DeterministicAndSubstreamsDiffer) {
    Rng a(7);
    Rng b(7);
    for (int i = 0; i < 100; ++i) {
        EXPECT_EQ(a.normal(), b.normal());
    }
    std::set<std::uint64_t> seeds;
    for (std::uint64_t s = 0; s < 1000; ++s) {
        seeds.insert(substream_seed(1, s));
    }
    EXPECT_EQ(seeds.size(), 1000u);
    EXPECT_NE(substream_seed(1, 0), substream_seed(2, 0));
    EXPECT_EQ(splitmix64(0x9E3779B97F4A7C15ull), 0xE220A8397B1DCDAFull);
}

TEST(Rng, Moments) {
    Rng rng(3);
    const Eigen::MatrixXd g = rng.normal_matrix(200, 500);
    const double mean = g.mean();
    const double var = (g.array() - mean).square().mean();
    EXPECT_NEAR(mean, 0.0, 0.01);
    EXPECT_NEAR(var, 1.0, 0.01);
    const Eigen::MatrixXd r = rng.rademacher_matrix(100, 100);
    EXPECT_TRUE((r.array().abs() == 1.0).all());
    EXPECT_NEAR(r.mean(), 0.0, 0.03);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(SpikedModel, PureNoiseTopSingularValueAtBulkEdge) {
    SpikedModelConfig cfg;
    cfg.p = 250;
    cfg.n = 500;
    cfg.seed = 11;
    const SpikedSample s = generate_spiked(cfg);
    EXPECT_EQ(s.signal.values.norm(), 0.0);
    const double top = thin_svd(s.observed).singular_values(0);
    EXPECT_NEAR(top, AspectRatio(0.5).bulk_edge(), 0.1);
}

TEST(SpikedModel, SignalHasPlantedSpectrum) {
    SpikedModelConfig cfg;
    cfg.p = 40;
    cfg.n = 60;
    cfg.strengths = {3.0, 1.5};
    const SpikedSample s = generate_spiked(cfg);
    const SVDFactors f = thin_svd(s.signal);
    EXPECT_NEAR(f.singular_values(0), 3.0, 1e-10);
    EXPECT_NEAR(f.singular_values(1), 1.5, 1e-10);
    EXPECT_NEAR(f.singular_values(2), 0.0, 1e-10);
    EXPECT_NO_THROW(validate(s.truth));
    EXPECT_LE((s.signal_factors.dense() - s.signal.values).norm(), 1e-12);
    EXPECT_LE((s.observed.values - s.signal.values).norm(), 1.5 * std::sqrt(40.0));
}

TEST(SpikedModel, RademacherFactors) {
    SpikedModelConfig cfg;
    cfg.p = 30;
    cfg.n = 50;
    cfg.strengths = {2.0};
    cfg.factor_law = FactorLaw::Rademacher;
    cfg.signal_model = SignalModel::IidColumns;
    const SpikedSample s = generate_spiked(cfg);
    EXPECT_NO_THROW(validate(s.truth));
    EXPECT_EQ(parse_factor_law("rademacher"), FactorLaw::Rademacher);
    EXPECT_EQ(to_string(FactorLaw::Gaussian), "gaussian");
    EXPECT_THROW(parse_factor_law("cauchy"), ConfigError);
}

TEST(SpikedModel, SameSeedSameBits) {
    SpikedModelConfig cfg;
    cfg.p = 30;
    cfg.n = 45;
    cfg.strengths = {2.0, 1.0};
    cfg.seed = 99;
    const SpikedSample a = generate_spiked(cfg);
    const SpikedSample b = generate_spiked(cfg);
    EXPECT_EQ(a.observed.values, b.observed.values);
    cfg.seed = 100;
    EXPECT_NE(generate_spiked(cfg).observed.values, a.observed.values);
}

TEST(SpikedModel, ValidationErrors) {
    SpikedModelConfig cfg;
    cfg.p = 3;
    cfg.n = 3;
    cfg.strengths = {4, 3, 2, 1};
    EXPECT_THROW(generate_spiked(cfg), ConfigError);
    cfg.strengths = {1.0, 2.0};
    EXPECT_THROW(generate_spiked(cfg), ConfigError);
    cfg.strengths = {-1.0};
    EXPECT_THROW(generate_spiked(cfg), ConfigError);
    cfg.strengths = {};
    cfg.p = 1;
    EXPECT_THROW(generate_spiked(cfg), ConfigError);
}

TEST(SpikedModel, RankOneLargeSampleMatchesAsymptotics) {
    SpikedModelConfig cfg;
    cfg.p = 1000;
    cfg.n = 1000;
    cfg.strengths = {2.0};
    cfg.seed = 5;
    const SpikedSample s = generate_spiked(cfg);
    EXPECT_NEAR(thin_svd(s.observed).singular_values(0), 2.5, 0.05);
}

class CurveTableTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("opshrink_ct_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    fs::path dir_;
};

TEST_F(CurveTableTest, RoundTrip) {
    CurveTable t({"a", "b"});
    t.add_metadata("seed", "1");
    t.add_row({1.0, 1.0 / 3.0});
    t.add_row({-2.5e-10, 7.0});
    write_curve_table(t, dir_ / "t.csv");
    const CurveTable back = read_curve_table(dir_ / "t.csv");
    EXPECT_EQ(back.columns(), t.columns());
    EXPECT_EQ(back.rows(), t.rows());
    EXPECT_EQ(back.metadata(), t.metadata());
    EXPECT_EQ(format_curve_table(back), format_curve_table(t));
    EXPECT_EQ(t.column("b")[0], 1.0 / 3.0);
    EXPECT_THROW(t.column("c"), UsageError);
}

TEST_F(CurveTableTest, EmptyTableAndErrors) {
    CurveTable t({"x"});
    write_curve_table(t, dir_ / "e.csv");
    const CurveTable back = read_curve_table(dir_ / "e.csv");
    EXPECT_EQ(back.columns(), t.columns());
    EXPECT_TRUE(back.rows().empty());
    EXPECT_THROW(t.add_row({1.0, 2.0}), UsageError);
    EXPECT_THROW(t.add_row({std::nan("")}), DomainError);
    EXPECT_THROW(read_curve_table(dir_ / "missing.csv"), IoError);
}

TEST(Experiments, ShrinkerCurvesMatchClosedForms) {
    ExperimentConfig cfg = default_experiment(ExperimentKind::ShrinkerCurves);
    cfg.grid = {std::sqrt(3.0), 3.0};
    const CurveTable t = run_shrinker_curves(cfg);
    ASSERT_EQ(t.rows().size(), 2u);
    const auto& row = t.rows()[0];
    EXPECT_NEAR(row[1], 0.8660254, 1e-6);
    EXPECT_NEAR(row[2], 1.0, 1e-12);
    EXPECT_NEAR(row[3], 0.8660254, 1e-6);
    EXPECT_NEAR(row[4], 0.8880738, 1e-6);
    for (const auto& r : t.rows()) {
        EXPECT_LE(r[1], r[2] + 1e-12);
        EXPECT_LE(r[3], r[4] + 1e-12);
    }
    EXPECT_EQ(default_experiment(ExperimentKind::ShrinkerCurves).grid.size(), 100u);
    EXPECT_NO_THROW(run_shrinker_curves(default_experiment(ExperimentKind::ShrinkerCurves)));
}

TEST(Experiments, RatioSweepIsMonotoneAndEndsAtOne) {
    const CurveTable t = run_ratio_sweep(default_experiment(ExperimentKind::RatioSweep));
    const auto ratio = t.column("ratio");
    ASSERT_EQ(ratio.size(), 20u);
    for (std::size_t i = 1; i < ratio.size(); ++i) {
        EXPECT_GT(ratio[i], ratio[i - 1]);
    }
    EXPECT_NEAR(ratio.back(), 1.0, 1e-12);
    EXPECT_LT(ratio.front(), 1.0);

    ExperimentConfig small;
    small = default_experiment(ExperimentKind::RatioSweep);
    small.grid = {1e-6};
    small.t_offset = 0.05;
    const double tiny = run_ratio_sweep(small).column("ratio")[0];
    EXPECT_NEAR(tiny, 0.7370977, 1e-6);
}

TEST(Experiments, RatioSweepMonteCarloColumns) {
    ExperimentConfig cfg = default_experiment(ExperimentKind::RatioSweep);
    cfg.grid = {0.5};
    cfg.replicates = 4;
    cfg.base.p = 40;
    const CurveTable t = run_ratio_sweep(cfg);
    EXPECT_EQ(t.columns().size(), 9u);
    EXPECT_DOUBLE_EQ(t.column("n")[0], 80.0);
    EXPECT_GT(t.column("mc_loss_optimal")[0], 0.0);
}

TEST(Experiments, BlpConvergenceSmall) {
    ExperimentConfig cfg = default_experiment(ExperimentKind::BlpConvergence);
    cfg.replicates = 10;
    cfg.base.p = 20;
    cfg.grid = {40, 400};
    const CurveTable t = run_blp_convergence(cfg);
    ASSERT_EQ(t.rows().size(), 2u);
    const auto gap = t.column("gap_optimal_blp");
    EXPECT_LT(gap[1], gap[0]);
    for (const double f : t.column("frac_gd_worse")) {
        EXPECT_GE(f, 0.0);
        EXPECT_LE(f, 1.0);
    }
}

TEST(Experiments, ThreadCountDoesNotChangeResults) {
    ExperimentConfig cfg = default_experiment(ExperimentKind::BlpConvergence);
    cfg.replicates = 6;
    cfg.base.p = 10;
    cfg.grid = {20, 40};
    cfg.threads = 1;
    const std::string serial = format_curve_table(run_experiment(cfg));
    cfg.threads = 4;
    EXPECT_EQ(format_curve_table(run_experiment(cfg)), serial);
    EXPECT_EQ(format_curve_table(run_experiment(cfg)), serial);
}

TEST(Experiments, SeedChangesMonteCarloOutput) {
    ExperimentConfig cfg = default_experiment(ExperimentKind::BlpConvergence);
    cfg.replicates = 3;
    cfg.base.p = 10;
    cfg.grid = {20};
    const std::string a = format_curve_table(run_experiment(cfg));
    cfg.seed += 1;
    EXPECT_NE(format_curve_table(run_experiment(cfg)), a);
}

TEST(Experiments, ValidationErrors) {
    ExperimentConfig curves = default_experiment(ExperimentKind::ShrinkerCurves);
    curves.grid = {1.0};
    EXPECT_THROW(run_experiment(curves), DomainError);
    curves.grid = {};
    EXPECT_THROW(run_experiment(curves), ConfigError);
    curves.grid = {3.0, 2.5};
    EXPECT_THROW(run_experiment(curves), ConfigError);

    ExperimentConfig sweep = default_experiment(ExperimentKind::RatioSweep);
    sweep.grid = {1.5};
    EXPECT_THROW(run_experiment(sweep), DomainError);

    ExperimentConfig blp = default_experiment(ExperimentKind::BlpConvergence);
    blp.replicates = 0;
    EXPECT_THROW(run_experiment(blp), ConfigError);
    blp = default_experiment(ExperimentKind::BlpConvergence);
    blp.grid = {10};
    EXPECT_THROW(run_experiment(blp), ConfigError);
}

TEST(Experiments, RunReplicatesPropagatesErrors) {
    EXPECT_THROW(run_replicates(8, 3,
                                [](std::size_t i) -> int {
                                    if (i == 5) {
                                        throw DomainError("boom");
                                    }
                                    return static_cast<int>(i);
                                }),
                 DomainError);
    const auto v = run_replicates(5, 2, [](std::size_t i) { return static_cast<int>(i * i); });
    EXPECT_EQ(v, (std::vector<int>{0, 1, 4, 9, 16}));
}

TEST(Experiments, PaperScaleSetup) {
    const ExperimentConfig cfg = paper_scale_blp_convergence();
    EXPECT_EQ(cfg.base.p, 100);
    EXPECT_EQ(cfg.replicates, 4000);
    EXPECT_NO_THROW(validate(cfg));
}
