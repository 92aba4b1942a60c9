#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "opshrink/denoiser.hpp"
#include "opshrink/linalg.hpp"

namespace opshrink {

enum class FactorLaw { Gaussian, Rademacher };

enum class SignalModel {
    /// X = sum_k t_k u_k v_k^T with orthonormal v (the factor draws,
    /// orthonormalized). X has singular values exactly t_k.
    FixedSingularValues,
    /// Column j of X is sum_k t_k z_jk u_k / sqrt(n) with iid factors z.
    IidColumns,
};

FactorLaw parse_factor_law(std::string_view name);
std::string_view to_string(FactorLaw law);

struct SpikedModelConfig {
    Eigen::Index p = 100;
    Eigen::Index n = 100;
    std::vector<double> strengths;  // t_1 > ... > t_r > 0
    FactorLaw factor_law = FactorLaw::Gaussian;
    SignalModel signal_model = SignalModel::FixedSingularValues;
    /// Canonical-basis u_k (and v_k for FixedSingularValues) instead of a
    /// random rotation.
    bool deterministic_signal = false;
    std::uint64_t seed = 0;
};

/// Throws ConfigError.
void validate(const SpikedModelConfig& cfg);

struct SpikedSample {
    DataMatrix signal;       // X
    DataMatrix observed;     // Y = X + G, G_ij ~ N(0, 1/n)
    GroundTruthFactors truth;
    LowRankMatrix signal_factors;  // X = left * right^T, left = U diag(t)
};

/// Draw order from Rng(cfg.seed): u (p x r normals, skipped when
/// deterministic), factors z (n x r, column-major), noise (p x n,
/// column-major). Identical configs give bit-identical samples.
SpikedSample generate_spiked(const SpikedModelConfig& cfg);

} // namespace opshrink
