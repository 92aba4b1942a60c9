#pragma once

// Closed-form spiked-model limits: population spike strength t, limiting
// observed singular value sigma, and the limiting cosines between observed
// and population singular vectors, for aspect ratio gamma = lim p/n.
//
// Units are "noise units": the noise matrix has iid N(0, 1/n) entries, so
// pure noise has its largest singular value at the bulk edge 1 + sqrt(gamma).

namespace opshrink {

class AspectRatio {
public:
    /// Throws DomainError unless gamma is finite and > 0.
    explicit AspectRatio(double gamma);

    double value() const noexcept { return gamma_; }

    /// 1 + sqrt(gamma): top of the noise spectrum.
    double bulk_edge() const noexcept;

    /// gamma^(1/4): spikes at or below this strength are invisible.
    double detection_threshold() const noexcept;

private:
    double gamma_;
};

/// Per-spike limiting quantities. Undetectable components carry t = 0,
/// c = c_tilde = 0 and sigma at the bulk edge.
struct ComponentAsymptotics {
    double t = 0.0;
    double sigma = 0.0;
    double c = 0.0;
    double c_tilde = 0.0;
    double s = 1.0;
    double s_tilde = 1.0;
    bool detectable = false;
};

/// t > gamma^(1/4). Equality counts as undetectable.
bool is_detectable(double t, AspectRatio gamma);

/// Limiting observed singular value for a spike of strength t >= 0.
double forward_sigma(double t, AspectRatio gamma);

/// Inverse of forward_sigma on the detectable branch. Throws
/// BelowBulkEdgeError when sigma <= 1 + sqrt(gamma).
double invert_sigma(double sigma, AspectRatio gamma);

/// Limiting |<u_hat, u>|, nonnegative root; 0 when undetectable.
double cosine_left(double t, AspectRatio gamma);

/// Limiting |<v_hat, v>|, nonnegative root; 0 when undetectable.
double cosine_right(double t, AspectRatio gamma);

ComponentAsymptotics component_from_strength(double t, AspectRatio gamma);
ComponentAsymptotics component_from_sigma(double sigma, AspectRatio gamma);

} // namespace opshrink
