#include "opshrink/spiked_model.hpp"

#include <cmath>
#include <string>

#include "opshrink/errors.hpp"
#include "opshrink/random.hpp"

namespace opshrink {

FactorLaw parse_factor_law(std::string_view name) {
    if (name == "gaussian") {
        return FactorLaw::Gaussian;
    }
    if (name == "rademacher") {
        return FactorLaw::Rademacher;
    }
    throw ConfigError("unknown factor law '" + std::string(name) + "' (expected gaussian or rademacher)");
}

std::string_view to_string(FactorLaw law) {
    return law == FactorLaw::Gaussian ? "gaussian" : "rademacher";
}

void validate(const SpikedModelConfig& cfg) {
    if (cfg.p < 2 || cfg.n < 2) {
        throw ConfigError("spiked model needs p, n >= 2");
    }
    const auto r = static_cast<Eigen::Index>(cfg.strengths.size());
    if (r > std::min(cfg.p, cfg.n)) {
        throw ConfigError("rank " + std::to_string(r) + " exceeds min(p, n) = " +
                          std::to_string(std::min(cfg.p, cfg.n)));
    }
    for (std::size_t k = 0; k < cfg.strengths.size(); ++k) {
        const double t = cfg.strengths[k];
        if (!std::isfinite(t) || t <= 0.0) {
            throw ConfigError("spike strengths must be finite and > 0");
        }
        if (k > 0 && !(t < cfg.strengths[k - 1])) {
            throw ConfigError("spike strengths must be strictly decreasing");
        }
    }
}

SpikedSample generate_spiked(const SpikedModelConfig& cfg) {
    validate(cfg);
    const Eigen::Index p = cfg.p;
    const Eigen::Index n = cfg.n;
    const auto r = static_cast<Eigen::Index>(cfg.strengths.size());
    Rng rng(cfg.seed);

    Eigen::MatrixXd u;
    if (cfg.deterministic_signal) {
        u = Eigen::MatrixXd::Identity(p, r);
    } else {
        u = orthonormalize_columns(rng.normal_matrix(p, r));
    }

    const Eigen::MatrixXd z = cfg.factor_law == FactorLaw::Gaussian ? rng.normal_matrix(n, r)
                                                                    : rng.rademacher_matrix(n, r);
    Eigen::MatrixXd right;
    if (cfg.signal_model == SignalModel::IidColumns) {
        right = z / std::sqrt(static_cast<double>(n));
    } else if (cfg.deterministic_signal) {
        right = Eigen::MatrixXd::Identity(n, r);
    } else {
        right = orthonormalize_columns(z);
    }

    const Eigen::VectorXd t = Eigen::Map<const Eigen::VectorXd>(cfg.strengths.data(), r);
    LowRankMatrix factors{u * t.asDiagonal(), right};

    const Eigen::MatrixXd noise = rng.normal_matrix(p, n) / std::sqrt(static_cast<double>(n));
    Eigen::MatrixXd x = factors.dense();
    Eigen::MatrixXd y = x + noise;

    return SpikedSample{DataMatrix{std::move(x), 1.0}, DataMatrix{std::move(y), 1.0},
                        GroundTruthFactors{u, cfg.strengths}, std::move(factors)};
}

} // namespace opshrink
