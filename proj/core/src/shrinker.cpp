#include "opshrink/shrinker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "opshrink/errors.hpp"

namespace opshrink {

namespace {

constexpr double kRadicandDust = 1e-12;

void check_cosine(double value, const char* name) {
    if (!std::isfinite(value) || value < 0.0 || value > 1.0) {
        throw DomainError(std::string(name) + " must lie in [0, 1], got " + std::to_string(value));
    }
}

double top_squared_singular_value(double q, const BlockParams& block) {
    const double top = singular_values_2x2(block_difference(q, block))[0];
    return top * top;
}

} // namespace

double BlockParams::s() const { return std::sqrt(std::max(0.0, 1.0 - c * c)); }

double BlockParams::s_tilde() const { return std::sqrt(std::max(0.0, 1.0 - c_tilde * c_tilde)); }

BlockParams BlockParams::from_component(const ComponentAsymptotics& component) {
    return BlockParams{component.t, component.c, component.c_tilde};
}

void validate(const BlockParams& block) {
    if (!std::isfinite(block.t) || block.t < 0.0) {
        throw DomainError("block strength t must be finite and >= 0, got " + std::to_string(block.t));
    }
    check_cosine(block.c, "c");
    check_cosine(block.c_tilde, "c_tilde");
}

Eigen::Matrix2d block_difference(double q, const BlockParams& block) {
    const double c = block.c;
    const double ct = block.c_tilde;
    const double s = block.s();
    const double st = block.s_tilde();
    Eigen::Matrix2d d;
    d << block.t - q * c * ct, -q * c * st,
         -q * s * ct,          -q * s * st;
    return d;
}

std::array<double, 2> singular_values_2x2(const Eigen::Matrix2d& m) {
    const double e = 0.5 * (m(0, 0) + m(1, 1));
    const double f = 0.5 * (m(0, 0) - m(1, 1));
    const double g = 0.5 * (m(1, 0) + m(0, 1));
    const double h = 0.5 * (m(1, 0) - m(0, 1));
    const double rotation = std::hypot(e, h);
    const double reflection = std::hypot(f, g);
    return {rotation + reflection, std::abs(rotation - reflection)};
}

double block_loss(double q, const BlockParams& block) {
    validate(block);
    if (!std::isfinite(q)) {
        throw DomainError("q must be finite");
    }
    const double t = block.t;
    const double a = q * q + t * t - 2.0 * q * t * block.c * block.c_tilde;
    const double b = -t * q * block.s() * block.s_tilde();
    double radicand = a * a - 4.0 * b * b;
    if (radicand < 0.0) {
        // Scale the dust tolerance with the magnitude of A^2.
        if (radicand < -kRadicandDust * std::max(1.0, a * a)) {
            throw InternalError("negative discriminant in block_loss");
        }
        radicand = 0.0;
    }
    return 0.5 * (a + std::sqrt(radicand));
}

double optimal_q(const BlockParams& block) {
    validate(block);
    const double hi = std::max(block.c, block.c_tilde);
    if (hi <= 0.0) {
        return 0.0;
    }
    const double lo = std::min(block.c, block.c_tilde);
    return block.t * lo / hi;
}

double optimal_q_from_sigma(double sigma, AspectRatio gamma) {
    if (!std::isfinite(sigma) || sigma <= 0.0) {
        throw DomainError("observed singular value must be finite and > 0, got " + std::to_string(sigma));
    }
    if (!(sigma > gamma.bulk_edge())) {
        return 0.0;
    }
    const double t = invert_sigma(sigma, gamma);
    const double t2 = t * t;
    const double g = gamma.value();
    return t * std::sqrt((t2 + std::min(1.0, g)) / (t2 + std::max(1.0, g)));
}

double optimal_loss(const BlockParams& block) {
    validate(block);
    const double lo = std::min(block.c, block.c_tilde);
    return block.t * std::sqrt(1.0 - lo * lo);
}

double gd_loss(const BlockParams& block) {
    validate(block);
    const double c = block.c;
    const double ct = block.c_tilde;
    return block.t * std::sqrt(1.0 - c * ct + std::abs(c - ct));
}

LossReport asymptotic_loss(std::span<const BlockParams> spectrum, std::span<const double> q) {
    if (spectrum.size() != q.size()) {
        throw UsageError("asymptotic_loss: " + std::to_string(spectrum.size()) + " blocks but " +
                         std::to_string(q.size()) + " q values");
    }
    LossReport report;
    report.per_component_loss.reserve(q.size());
    for (std::size_t k = 0; k < q.size(); ++k) {
        const double loss = std::sqrt(block_loss(q[k], spectrum[k]));
        report.per_component_loss.push_back(loss);
        report.overall_loss = std::max(report.overall_loss, loss);
    }
    return report;
}

double error_ratio(AspectRatio gamma, double t) {
    if (!std::isfinite(t) || !is_detectable(t, gamma)) {
        throw DomainError("error_ratio needs t > gamma^(1/4), got t = " + std::to_string(t));
    }
    const double c = cosine_left(t, gamma);
    const double ct = cosine_right(t, gamma);
    return std::sqrt((1.0 + std::min(c, ct)) / (1.0 + std::max(c, ct)));
}

double classical_limit_ratio(double t) {
    if (!std::isfinite(t) || t <= 0.0) {
        throw DomainError("classical_limit_ratio needs t > 0, got " + std::to_string(t));
    }
    const double t2 = t * t;
    return std::sqrt(0.5 * (1.0 + std::sqrt(t2 / (t2 + 1.0))));
}

BruteForceMinimum brute_force_optimal_q(const BlockParams& block, double q_max, int grid_points) {
    validate(block);
    if (!std::isfinite(q_max) || q_max < block.t) {
        throw UsageError("brute_force_optimal_q: q_max must be >= t");
    }
    if (grid_points < 1000) {
        throw UsageError("brute_force_optimal_q: need at least 1000 grid points");
    }

    const double step = q_max / static_cast<double>(grid_points - 1);
    int best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid_points; ++i) {
        const double value = top_squared_singular_value(step * i, block);
        if (value < best_value) {
            best_value = value;
            best = i;
        }
    }

    BruteForceMinimum result{step * best, best_value};
    if (step == 0.0) {
        return result;
    }

    // Golden-section restricted to the cell around the winning grid point.
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = step * std::max(0, best - 1);
    double hi = step * std::min(grid_points - 1, best + 1);
    double x1 = hi - phi * (hi - lo);
    double x2 = lo + phi * (hi - lo);
    double f1 = top_squared_singular_value(x1, block);
    double f2 = top_squared_singular_value(x2, block);
    for (int iter = 0; iter < 200 && hi - lo > 1e-14 * std::max(1.0, q_max); ++iter) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = top_squared_singular_value(x1, block);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = top_squared_singular_value(x2, block);
        }
    }
    const double x = 0.5 * (lo + hi);
    const double fx = top_squared_singular_value(x, block);
    if (fx < result.min_value) {
        result = {x, fx};
    }
    return result;
}

std::string_view shrinker_name(const ShrinkerKind& kind) {
    struct Visitor {
        std::string_view operator()(const Optimal&) const { return "optimal"; }
        std::string_view operator()(const OracleTruth&) const { return "oracle-t"; }
        std::string_view operator()(const NoShrink&) const { return "none"; }
        std::string_view operator()(const HardThreshold&) const { return "hard"; }
        std::string_view operator()(const Custom&) const { return "custom"; }
    };
    return std::visit(Visitor{}, kind);
}

} // namespace opshrink
