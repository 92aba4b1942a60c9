#pragma once

#include <array>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "opshrink/spike_asymptotics.hpp"

namespace opshrink {

/// Parameters of one 2x2 block of the asymptotic estimation problem. In the
/// rotated bases the signal block is diag(t, 0) and a shrunk component with
/// singular value q is
///
///     q * [ c*ct   c*st ]
///         [ s*ct   s*st ]
///
/// with s = sqrt(1 - c^2), st = sqrt(1 - ct^2). The triple need not come
/// from the spiked-model formulas; any t >= 0 and c, c_tilde in [0, 1] work.
struct BlockParams {
    double t = 0.0;
    double c = 0.0;
    double c_tilde = 0.0;

    double s() const;
    double s_tilde() const;

    static BlockParams from_component(const ComponentAsymptotics& component);
};

/// Throws DomainError if t is negative/non-finite or a cosine is outside [0, 1].
void validate(const BlockParams& block);

/// D(q) = diag(t, 0) - (shrunk component with singular value q).
Eigen::Matrix2d block_difference(double q, const BlockParams& block);

/// Singular values of a 2x2 matrix, largest first. Closed form from the
/// rotation/reflection split M = [E+F, G-H; G+H, E-F]: sigma = |hypot(E,H) +- hypot(F,G)|.
std::array<double, 2> singular_values_2x2(const Eigen::Matrix2d& m);

/// Squared operator norm of D(q), from the trace/determinant expression
/// (A + sqrt(A^2 - 4B^2)) / 2 with A = q^2 + t^2 - 2 q t c ct, B = -t q s st.
double block_loss(double q, const BlockParams& block);

/// Minimizer of block_loss over q: t * min(c, ct) / max(c, ct), or 0 when
/// both cosines vanish (any |q| <= t is optimal there).
double optimal_q(const BlockParams& block);

/// Optimal singular value straight from an observed singular value (noise
/// units). Returns 0 at or below the bulk edge.
double optimal_q_from_sigma(double sigma, AspectRatio gamma);

/// Operator-norm loss at the optimum: t * sqrt(1 - min(c^2, ct^2)).
double optimal_loss(const BlockParams& block);

/// Operator-norm loss of the q = t rule: t * sqrt(1 - c ct + |c - ct|).
double gd_loss(const BlockParams& block);

struct LossReport {
    std::vector<double> per_component_loss;
    double overall_loss = 0.0;
};

/// Per-block unsquared losses and their maximum (the operator norm of a
/// block-diagonal matrix). Throws UsageError on length mismatch.
LossReport asymptotic_loss(std::span<const BlockParams> spectrum, std::span<const double> q);

/// optimal_loss / gd_loss for a rank-one signal of strength t > gamma^(1/4).
double error_ratio(AspectRatio gamma, double t);

/// Limit of error_ratio as gamma -> 0 for fixed t > 0.
double classical_limit_ratio(double t);

struct BruteForceMinimum {
    double argmin = 0.0;
    double min_value = 0.0;  // squared top singular value of D(argmin)
};

/// Grid search over q in [0, q_max] on the explicit 2x2 D(q), refined by
/// golden-section inside the winning grid cell. Independent of block_loss.
/// Requires q_max >= t and grid_points >= 1000.
BruteForceMinimum brute_force_optimal_q(const BlockParams& block, double q_max, int grid_points);

// Singular value rules.
struct Optimal {};
struct OracleTruth {};   // q = t_hat, plug-in estimate of the population value
struct NoShrink {};      // q = sigma on retained components
struct HardThreshold {}; // q = sigma above the edge, 0 below
struct Custom {
    std::vector<double> q;  // one per retained component, in noise-scaled matrix units
};

using ShrinkerKind = std::variant<Optimal, OracleTruth, NoShrink, HardThreshold, Custom>;

std::string_view shrinker_name(const ShrinkerKind& kind);

} // namespace opshrink
