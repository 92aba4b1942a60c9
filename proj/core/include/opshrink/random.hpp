#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace opshrink {

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed of substream `stream` derived from `seed`:
///   splitmix64(seed + (stream + 1) * 0x9E3779B97F4A7C15).
/// Replicate j of an experiment always draws from substream_seed(seed, j),
/// independent of execution order.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Bit-reproducible generator: std::mt19937_64 (fully specified by the
/// standard) plus fixed transforms, so streams do not depend on the
/// standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_{seed} {}

    /// Uniform on (0, 1) from the top 53 bits.
    double uniform();

    /// Standard normal, Marsaglia polar method (values produced in pairs).
    double normal();

    /// +1 or -1 with equal probability (top bit of one draw).
    double rademacher();

    Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols);
    Eigen::MatrixXd rademacher_matrix(Eigen::Index rows, Eigen::Index cols);

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace opshrink
