#include "opshrink/spike_asymptotics.hpp"

#include <cmath>
#include <string>

#include "opshrink/errors.hpp"

namespace opshrink {

namespace {

// Inner radicand of the inversion may come out slightly negative from
// rounding right at the edge; anything beyond this is a real error.
constexpr double kRadicandDust = 1e-12;

void check_strength(double t) {
    if (!std::isfinite(t) || t < 0.0) {
        throw DomainError("spike strength must be finite and >= 0, got " + std::to_string(t));
    }
}

double cosine_squared(double t, AspectRatio gamma, double denominator_term) {
    check_strength(t);
    if (!is_detectable(t, gamma)) {
        return 0.0;
    }
    const double g = gamma.value();
    const double t2 = t * t;
    const double numerator = 1.0 - g / (t2 * t2);
    return numerator / (1.0 + denominator_term);
}

} // namespace

AspectRatio::AspectRatio(double gamma) : gamma_{gamma} {
    if (!std::isfinite(gamma) || gamma <= 0.0) {
        throw DomainError("aspect ratio gamma must be finite and > 0, got " + std::to_string(gamma));
    }
}

double AspectRatio::bulk_edge() const noexcept { return 1.0 + std::sqrt(gamma_); }

double AspectRatio::detection_threshold() const noexcept { return std::sqrt(std::sqrt(gamma_)); }

bool is_detectable(double t, AspectRatio gamma) { return t > gamma.detection_threshold(); }

double forward_sigma(double t, AspectRatio gamma) {
    check_strength(t);
    if (!is_detectable(t, gamma)) {
        return gamma.bulk_edge();
    }
    const double t2 = t * t;
    return std::sqrt((t2 + 1.0) * (1.0 + gamma.value() / t2));
}

double invert_sigma(double sigma, AspectRatio gamma) {
    if (!std::isfinite(sigma)) {
        throw DomainError("observed singular value must be finite");
    }
    const double edge = gamma.bulk_edge();
    if (!(sigma > edge)) {
        throw BelowBulkEdgeError("sigma = " + std::to_string(sigma) +
                                 " is not above the bulk edge " + std::to_string(edge));
    }
    const double g = gamma.value();
    const double root_g = std::sqrt(g);
    const double shifted = sigma * sigma - 1.0 - g;
    // (shifted - 2 sqrt(g)) (shifted + 2 sqrt(g)) avoids cancellation near the edge.
    const double below = sigma * sigma - edge * edge;
    double radicand = below * (shifted + 2.0 * root_g);
    if (radicand < 0.0) {
        if (radicand < -kRadicandDust) {
            throw InternalError("negative radicand in invert_sigma");
        }
        radicand = 0.0;
    }
    return std::sqrt((shifted + std::sqrt(radicand)) / 2.0);
}

double cosine_left(double t, AspectRatio gamma) {
    const double t2 = t * t;
    return std::sqrt(cosine_squared(t, gamma, t2 > 0.0 ? gamma.value() / t2 : 0.0));
}

double cosine_right(double t, AspectRatio gamma) {
    const double t2 = t * t;
    return std::sqrt(cosine_squared(t, gamma, t2 > 0.0 ? 1.0 / t2 : 0.0));
}

ComponentAsymptotics component_from_strength(double t, AspectRatio gamma) {
    ComponentAsymptotics out;
    out.t = t;
    out.sigma = forward_sigma(t, gamma);
    out.detectable = is_detectable(t, gamma);
    out.c = cosine_left(t, gamma);
    out.c_tilde = cosine_right(t, gamma);
    out.s = std::sqrt(1.0 - out.c * out.c);
    out.s_tilde = std::sqrt(1.0 - out.c_tilde * out.c_tilde);
    return out;
}

ComponentAsymptotics component_from_sigma(double sigma, AspectRatio gamma) {
    if (!std::isfinite(sigma) || sigma <= 0.0) {
        throw DomainError("observed singular value must be finite and > 0, got " + std::to_string(sigma));
    }
    if (!(sigma > gamma.bulk_edge())) {
        ComponentAsymptotics out;
        out.sigma = gamma.bulk_edge();
        return out;
    }
    ComponentAsymptotics out = component_from_strength(invert_sigma(sigma, gamma), gamma);
    if (out.detectable) {
        // Keep the observed value rather than the re-derived forward image.
        out.sigma = sigma;
    }
    return out;
}

} // namespace opshrink
