#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <string_view>
#include <thread>
#include <vector>

#include "opshrink/curve_table.hpp"
#include "opshrink/denoiser.hpp"
#include "opshrink/spiked_model.hpp"

namespace opshrink {

inline constexpr std::uint64_t kDefaultSeed = 20190923;

enum class ExperimentKind { ShrinkerCurves, RatioSweep, BlpConvergence };

std::string_view to_string(ExperimentKind kind);

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::ShrinkerCurves;
    /// Monte Carlo replicates per grid point. Optional (may be 0) for the
    /// ratio sweep, ignored by the analytic shrinker curves.
    int replicates = 0;
    /// sigma grid (curves), gamma grid (ratio sweep) or n grid (BLP).
    std::vector<double> grid;
    /// Aspect ratio of the analytic shrinker curves.
    double gamma = 0.5;
    /// Ratio sweep signal strength t = gamma^(1/4) + t_offset.
    double t_offset = 0.05;
    /// Model overrides for Monte Carlo runs: p, strengths, factor law.
    SpikedModelConfig base;
    double tolerance = 0.02;
    std::uint64_t seed = kDefaultSeed;
    /// Worker threads for replicates; 0 means hardware concurrency. Results
    /// do not depend on this value.
    unsigned threads = 0;
};

/// Desk-scale defaults for each experiment.
ExperimentConfig default_experiment(ExperimentKind kind);

/// The large BLP convergence setup used by --paper-scale (p = 100, 4000 replicates).
ExperimentConfig paper_scale_blp_convergence();

/// Throws ConfigError (grid shape, counts) or DomainError (grid values
/// outside the experiment's domain).
void validate(const ExperimentConfig& cfg);

CurveTable run_shrinker_curves(const ExperimentConfig& cfg);
CurveTable run_ratio_sweep(const ExperimentConfig& cfg);
CurveTable run_blp_convergence(const ExperimentConfig& cfg);
CurveTable run_experiment(const ExperimentConfig& cfg);

/// Substream index of replicate j at grid point i: (i << 32) | j.
std::uint64_t replicate_stream(std::size_t grid_index, std::size_t replicate) noexcept;

/// One spiked-model draw scored under the optimal and q = t_hat rules,
/// sharing a single SVD.
struct SpikeTrial {
    double top_sigma = 0.0;
    double left_cosine_sq = 0.0;   // <u_hat_1, u_1>^2
    double loss_optimal = 0.0;     // ||X_hat - X||_op
    double loss_oracle_truth = 0.0;
    double predicted_loss = 0.0;   // optimal shrinker's plug-in prediction
    int detected_rank = 0;
};

SpikeTrial simulate_spike_trial(const SpikedModelConfig& model, const DenoiseOptions& options);

struct BlpTrial {
    double err_blp = 0.0;
    double err_optimal = 0.0;
    double err_gd = 0.0;
    double gap_optimal_blp = 0.0;  // ||X_hat^{q*} - X_hat^{BLP}||_F
};

/// One draw of the iid-column model scored under BLP, optimal shrinkage and
/// q = t_hat, all with rank capped at the planted rank.
BlpTrial simulate_blp_trial(const SpikedModelConfig& model, const DenoiseOptions& options);

unsigned resolve_threads(unsigned requested) noexcept;

/// Runs fn(0), ..., fn(count - 1) on up to `threads` workers, each result
/// stored in its own slot, so the returned vector is schedule-independent.
template <class Fn>
auto run_replicates(std::size_t count, unsigned threads, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
    using Result = decltype(fn(std::size_t{}));
    std::vector<Result> results(count);
    const unsigned workers = std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(count, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            results[i] = fn(i);
        }
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        results[i] = fn(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) {
                            failure = std::current_exception();
                        }
                        next = count;
                    }
                }
            });
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return results;
}

} // namespace opshrink
