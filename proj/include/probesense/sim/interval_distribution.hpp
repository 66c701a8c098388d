#pragma once

#include <optional>
#include <string>

#include "probesense/sim/rng.hpp"

namespace probesense::sim {

/// Distribution of the gap between two probe events, in seconds.
///
/// Fitted to the four published statistics of a probe behavior: minimum,
/// maximum, optional mode, and the event rate (mean gap = 3600 / rate).
///
/// With a mode the density is a mixture of triangular(min, mode, max) and a
/// uniform wing covering [min, mode] or [mode, max], whichever side the mean
/// has to move to. The weight is solved in closed form; the density peak stays
/// at the mode and the support stays [min, max]. When the triangular mean
/// already matches, the wing weight is 0.
///
/// Without a mode the maximum-entropy density on [min, max] with the target
/// mean is used: a truncated exponential.
class IntervalDistribution {
public:
    enum class Shape { TriangularWithWing, TruncatedExponential };

    static IntervalDistribution fit(double min_s, std::optional<double> mode_s, double max_s,
                                    double target_mean_s);

    double sample(SimRng& rng) const;
    /// Analytic mean of the fitted density.
    double mean() const;
    /// True when the target mean was reachable; otherwise the closest
    /// achievable mean is used.
    bool exact() const { return exact_; }

    Shape shape() const { return shape_; }
    double min() const { return min_; }
    double max() const { return max_; }
    std::optional<double> mode() const { return mode_; }
    /// Weight of the uniform wing (TriangularWithWing only).
    double wing_weight() const { return wing_weight_; }
    /// Exponential rate in 1/s (TruncatedExponential only; 0 means uniform).
    double rate() const { return rate_; }

private:
    Shape shape_ = Shape::TriangularWithWing;
    double min_ = 0, max_ = 0;
    std::optional<double> mode_;
    double wing_lo_ = 0, wing_hi_ = 0, wing_weight_ = 0;
    double rate_ = 0;
    bool exact_ = true;
};

double triangular_sample(double u, double lo, double mode, double hi);
double truncated_exponential_mean(double lo, double hi, double rate);

}  // namespace probesense::sim
