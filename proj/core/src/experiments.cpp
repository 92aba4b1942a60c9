#include "opshrink/experiments.hpp"

#include <cmath>
#include <string>

#include "opshrink/errors.hpp"
#include "opshrink/matrix_io.hpp"
#include "opshrink/random.hpp"
#include "opshrink/shrinker.hpp"
#include "opshrink/spike_asymptotics.hpp"

#ifndef OPSHRINK_VERSION
#define OPSHRINK_VERSION "unknown"
#endif

namespace opshrink {

namespace {

void require_increasing(const std::vector<double>& grid) {
    if (grid.empty()) {
        throw ConfigError("experiment grid is empty");
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i])) {
            throw ConfigError("experiment grid has a non-finite value");
        }
        if (i > 0 && !(grid[i] > grid[i - 1])) {
            throw ConfigError("experiment grid must be strictly increasing");
        }
    }
}

std::string join(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        out += (i ? " " : "") + format_real(values[i]);
    }
    return out;
}

double mean(const std::vector<double>& values) {
    double sum = 0.0;
    for (const double v : values) {  // index order, schedule-independent
        sum += v;
    }
    return values.empty() ? 0.0 : sum / static_cast<double>(values.size());
}

void add_common_metadata(CurveTable& table, const ExperimentConfig& cfg) {
    table.add_metadata("experiment", std::string(to_string(cfg.experiment)));
    table.add_metadata("version", OPSHRINK_VERSION);
    table.add_metadata("seed", std::to_string(cfg.seed));
    table.add_metadata("replicates", std::to_string(cfg.replicates));
    table.add_metadata("grid", format_real(cfg.grid.front()) + " .. " + format_real(cfg.grid.back()) + " (" +
                                   std::to_string(cfg.grid.size()) + " points)");
}

double operator_norm_loss(const LowRankMatrix& estimate, const LowRankMatrix& truth) {
    return operator_norm(difference(estimate, truth));
}

} // namespace

std::string_view to_string(ExperimentKind kind) {
    switch (kind) {
    case ExperimentKind::ShrinkerCurves:
        return "curves";
    case ExperimentKind::RatioSweep:
        return "ratio-sweep";
    case ExperimentKind::BlpConvergence:
        return "blp-convergence";
    }
    return "unknown";
}

ExperimentConfig default_experiment(ExperimentKind kind) {
    ExperimentConfig cfg;
    cfg.experiment = kind;
    switch (kind) {
    case ExperimentKind::ShrinkerCurves: {
        cfg.gamma = 0.5;
        const double edge = AspectRatio(cfg.gamma).bulk_edge();
        constexpr int points = 100;
        for (int i = 0; i < points; ++i) {
            cfg.grid.push_back(edge + 0.01 + (4.0 - 0.01) * i / (points - 1));
        }
        break;
    }
    case ExperimentKind::RatioSweep:
        for (int i = 1; i <= 20; ++i) {
            cfg.grid.push_back(i / 20.0);
        }
        cfg.base.p = 100;
        break;
    case ExperimentKind::BlpConvergence:
        cfg.replicates = 200;
        cfg.grid = {100, 200, 400, 800, 1600, 3200};
        cfg.base.p = 50;
        cfg.base.strengths = {1.1};
        cfg.base.signal_model = SignalModel::IidColumns;
        break;
    }
    return cfg;
}

ExperimentConfig paper_scale_blp_convergence() {
    ExperimentConfig cfg = default_experiment(ExperimentKind::BlpConvergence);
    cfg.replicates = 4000;
    cfg.base.p = 100;
    cfg.grid = {100, 200, 400, 800, 1600, 3200, 6400};
    return cfg;
}

void validate(const ExperimentConfig& cfg) {
    require_increasing(cfg.grid);
    if (cfg.replicates < 0) {
        throw ConfigError("replicates must be >= 0");
    }
    if (!std::isfinite(cfg.tolerance) || cfg.tolerance < 0.0) {
        throw ConfigError("tolerance must be finite and >= 0");
    }
    switch (cfg.experiment) {
    case ExperimentKind::ShrinkerCurves: {
        const AspectRatio gamma(cfg.gamma);
        if (!(cfg.grid.front() > gamma.bulk_edge())) {
            throw DomainError("sigma grid must lie above the bulk edge " + format_real(gamma.bulk_edge()));
        }
        break;
    }
    case ExperimentKind::RatioSweep:
        if (!(cfg.grid.front() > 0.0) || cfg.grid.back() > 1.0) {
            throw DomainError("gamma grid must lie in (0, 1]");
        }
        if (!std::isfinite(cfg.t_offset) || cfg.t_offset <= 0.0) {
            throw ConfigError("t offset must be > 0");
        }
        if (cfg.replicates > 0 && cfg.base.p < 2) {
            throw ConfigError("ratio sweep Monte Carlo needs p >= 2");
        }
        break;
    case ExperimentKind::BlpConvergence: {
        if (cfg.replicates < 1) {
            throw ConfigError("blp-convergence needs at least one replicate");
        }
        if (cfg.base.strengths.empty()) {
            throw ConfigError("blp-convergence needs at least one spike strength");
        }
        for (const double n : cfg.grid) {
            if (n != std::floor(n) || n < static_cast<double>(cfg.base.p)) {
                throw ConfigError("n grid must hold integers >= p = " + std::to_string(cfg.base.p));
            }
        }
        SpikedModelConfig probe = cfg.base;
        probe.n = static_cast<Eigen::Index>(cfg.grid.front());
        validate(probe);
        break;
    }
    }
}

std::uint64_t replicate_stream(std::size_t grid_index, std::size_t replicate) noexcept {
    return (static_cast<std::uint64_t>(grid_index) << 32) | static_cast<std::uint64_t>(replicate);
}

unsigned resolve_threads(unsigned requested) noexcept {
    if (requested > 0) {
        return requested;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

SpikeTrial simulate_spike_trial(const SpikedModelConfig& model, const DenoiseOptions& options) {
    const SpikedSample sample = generate_spiked(model);
    const SVDFactors svd = thin_svd(sample.observed);
    const Eigen::Index p = sample.observed.rows();
    const Eigen::Index n = sample.observed.cols();

    const ShrinkResult optimal = shrink(svd, p, n, 1.0, Optimal{}, options);
    const ShrinkResult oracle = shrink(svd, p, n, 1.0, OracleTruth{}, options);

    SpikeTrial trial;
    trial.top_sigma = svd.singular_values(0);
    if (sample.truth.components.cols() > 0) {
        const double inner = svd.left.col(0).dot(sample.truth.components.col(0));
        trial.left_cosine_sq = inner * inner;
    }
    trial.loss_optimal = operator_norm_loss(optimal.estimate, sample.signal_factors);
    trial.loss_oracle_truth = operator_norm_loss(oracle.estimate, sample.signal_factors);
    trial.predicted_loss = optimal.report.predicted_loss;
    trial.detected_rank = optimal.report.detected_rank;
    return trial;
}

BlpTrial simulate_blp_trial(const SpikedModelConfig& model, const DenoiseOptions& options) {
    const SpikedSample sample = generate_spiked(model);
    const SVDFactors svd = thin_svd(sample.observed);
    const Eigen::Index p = sample.observed.rows();
    const Eigen::Index n = sample.observed.cols();

    DenoiseOptions capped = options;
    capped.max_rank = static_cast<int>(model.strengths.size());
    const ShrinkResult optimal = shrink(svd, p, n, 1.0, Optimal{}, capped);
    const ShrinkResult gd = shrink(svd, p, n, 1.0, OracleTruth{}, capped);
    const LowRankMatrix blp = blp_predict_factored(sample.observed, sample.truth);

    BlpTrial trial;
    trial.err_blp = operator_norm_loss(blp, sample.signal_factors);
    trial.err_optimal = operator_norm_loss(optimal.estimate, sample.signal_factors);
    trial.err_gd = operator_norm_loss(gd.estimate, sample.signal_factors);
    trial.gap_optimal_blp = frobenius_norm(difference(optimal.estimate, blp));
    return trial;
}

CurveTable run_shrinker_curves(const ExperimentConfig& cfg) {
    validate(cfg);
    const AspectRatio gamma(cfg.gamma);
    CurveTable table({"sigma", "q_optimal", "q_gd", "loss_optimal", "loss_gd"});
    add_common_metadata(table, cfg);
    table.add_metadata("gamma", format_real(cfg.gamma));
    table.add_metadata("units", "noise units (entries of G have variance 1/n); analytic, no sampling");
    for (const double sigma : cfg.grid) {
        const ComponentAsymptotics comp = component_from_sigma(sigma, gamma);
        const BlockParams block = BlockParams::from_component(comp);
        table.add_row({sigma, optimal_q_from_sigma(sigma, gamma), comp.t, optimal_loss(block), gd_loss(block)});
    }
    return table;
}

CurveTable run_ratio_sweep(const ExperimentConfig& cfg) {
    validate(cfg);
    std::vector<std::string> columns{"gamma", "t", "rel_err_optimal", "rel_err_gd", "ratio"};
    const bool monte_carlo = cfg.replicates > 0;
    if (monte_carlo) {
        columns.insert(columns.end(), {"n", "mc_loss_optimal", "mc_loss_gd", "mc_ratio"});
    }
    CurveTable table(std::move(columns));
    add_common_metadata(table, cfg);
    table.add_metadata("t_rule", "t = gamma^(1/4) + " + format_real(cfg.t_offset));
    if (monte_carlo) {
        table.add_metadata("p", std::to_string(cfg.base.p));
        table.add_metadata("factor_law", std::string(to_string(cfg.base.factor_law)));
        table.add_metadata("tolerance", format_real(cfg.tolerance));
        table.add_metadata("loss", "operator norm of X_hat - X in stored (sqrt(n)-scaled) units, rank capped at 1");
    }

    for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
        const AspectRatio gamma(cfg.grid[i]);
        const double t = gamma.detection_threshold() + cfg.t_offset;
        const BlockParams block = BlockParams::from_component(component_from_strength(t, gamma));
        std::vector<double> row{gamma.value(), t, optimal_loss(block) / t, gd_loss(block) / t,
                                error_ratio(gamma, t)};
        if (monte_carlo) {
            const auto n = static_cast<Eigen::Index>(std::llround(static_cast<double>(cfg.base.p) / gamma.value()));
            DenoiseOptions options{cfg.tolerance, 1};
            const auto trials = run_replicates(static_cast<std::size_t>(cfg.replicates), cfg.threads, [&](std::size_t j) {
                SpikedModelConfig model = cfg.base;
                model.n = n;
                model.strengths = {t};
                model.signal_model = SignalModel::FixedSingularValues;
                model.seed = substream_seed(cfg.seed, replicate_stream(i, j));
                return simulate_spike_trial(model, options);
            });
            std::vector<double> opt;
            std::vector<double> gd;
            for (const auto& trial : trials) {
                opt.push_back(trial.loss_optimal);
                gd.push_back(trial.loss_oracle_truth);
            }
            const double mean_opt = mean(opt);
            const double mean_gd = mean(gd);
            row.insert(row.end(), {static_cast<double>(n), mean_opt, mean_gd, mean_gd > 0.0 ? mean_opt / mean_gd : 1.0});
        }
        table.add_row(std::move(row));
    }
    return table;
}

CurveTable run_blp_convergence(const ExperimentConfig& cfg) {
    validate(cfg);
    CurveTable table({"n", "err_blp", "err_optimal", "err_gd", "gap_optimal_blp", "frac_gd_worse"});
    add_common_metadata(table, cfg);
    table.add_metadata("p", std::to_string(cfg.base.p));
    table.add_metadata("strengths", join(cfg.base.strengths));
    table.add_metadata("factor_law", std::string(to_string(cfg.base.factor_law)));
    table.add_metadata("tolerance", format_real(cfg.tolerance));
    table.add_metadata("loss", "mean operator norm error of sqrt(n)-scaled matrices; gap is mean Frobenius distance");

    const DenoiseOptions options{cfg.tolerance, std::nullopt};
    for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
        const auto n = static_cast<Eigen::Index>(cfg.grid[i]);
        const auto trials = run_replicates(static_cast<std::size_t>(cfg.replicates), cfg.threads, [&](std::size_t j) {
            SpikedModelConfig model = cfg.base;
            model.n = n;
            model.signal_model = SignalModel::IidColumns;
            model.seed = substream_seed(cfg.seed, replicate_stream(i, j));
            return simulate_blp_trial(model, options);
        });
        std::vector<double> blp;
        std::vector<double> opt;
        std::vector<double> gd;
        std::vector<double> gap;
        std::vector<double> gd_worse;
        for (const auto& trial : trials) {
            blp.push_back(trial.err_blp);
            opt.push_back(trial.err_optimal);
            gd.push_back(trial.err_gd);
            gap.push_back(trial.gap_optimal_blp);
            gd_worse.push_back(trial.err_gd > trial.err_optimal ? 1.0 : 0.0);
        }
        table.add_row({static_cast<double>(n), mean(blp), mean(opt), mean(gd), mean(gap), mean(gd_worse)});
    }
    return table;
}

CurveTable run_experiment(const ExperimentConfig& cfg) {
    switch (cfg.experiment) {
    case ExperimentKind::ShrinkerCurves:
        return run_shrinker_curves(cfg);
    case ExperimentKind::RatioSweep:
        return run_ratio_sweep(cfg);
    case ExperimentKind::BlpConvergence:
        return run_blp_convergence(cfg);
    }
    throw ConfigError("unknown experiment");
}

} // namespace opshrink
