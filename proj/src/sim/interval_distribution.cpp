#include "probesense/sim/interval_distribution.hpp"

#include <algorithm>
#include <cmath>

#include "probesense/core/errors.hpp"

namespace probesense::sim {

namespace {

// Mean of the truncated exponential on [0, 1] with rate x, i.e. density
// proportional to exp(x * y).
double unit_truncexp_mean(double x) {
    if (std::abs(x) < 1e-6) return 0.5 + x / 12.0;
    return 1.0 / (-std::expm1(-x)) - 1.0 / x;
}

// Largest |rate * width| used; keeps expm1() finite.
constexpr double kMaxExponent = 700.0;

}  // namespace

double triangular_sample(double u, double lo, double mode, double hi) {
    if (hi <= lo) return lo;
    const double split = (mode - lo) / (hi - lo);
    if (u < split) return lo + std::sqrt(u * (hi - lo) * (mode - lo));
    return hi - std::sqrt((1.0 - u) * (hi - lo) * (hi - mode));
}

double truncated_exponential_mean(double lo, double hi, double rate) {
    return lo + (hi - lo) * unit_truncexp_mean(rate * (hi - lo));
}

IntervalDistribution IntervalDistribution::fit(double min_s, std::optional<double> mode_s, double max_s,
                                               double target_mean_s) {
    if (!(min_s >= 0) || !(max_s >= min_s)) throw ValidationError("interval", "need 0 <= min <= max");
    if (mode_s && (*mode_s < min_s || *mode_s > max_s)) {
        throw ValidationError("interval_mode", "need min <= mode <= max");
    }
    if (!(target_mean_s > 0)) throw ValidationError("events_per_hour", "must be positive");

    IntervalDistribution d;
    d.min_ = min_s;
    d.max_ = max_s;
    d.mode_ = mode_s;

    if (mode_s) {
        d.shape_ = Shape::TriangularWithWing;
        const double tri_mean = (min_s + *mode_s + max_s) / 3.0;
        if (target_mean_s < tri_mean) {
            d.wing_lo_ = min_s;
            d.wing_hi_ = *mode_s;
        } else {
            d.wing_lo_ = *mode_s;
            d.wing_hi_ = max_s;
        }
        const double wing_mean = (d.wing_lo_ + d.wing_hi_) / 2.0;
        if (std::abs(tri_mean - wing_mean) < 1e-12) {
            d.wing_weight_ = 0;
            d.exact_ = std::abs(tri_mean - target_mean_s) < 1e-9;
        } else {
            double w = (tri_mean - target_mean_s) / (tri_mean - wing_mean);
            d.exact_ = w <= 1.0 + 1e-12;
            d.wing_weight_ = std::clamp(w, 0.0, 1.0);
        }
        return d;
    }

    d.shape_ = Shape::TruncatedExponential;
    const double width = max_s - min_s;
    if (width <= 0) {
        d.exact_ = std::abs(target_mean_s - min_s) < 1e-9;
        return d;
    }
    const double frac = (target_mean_s - min_s) / width;
    const double lo_frac = unit_truncexp_mean(-kMaxExponent);
    const double hi_frac = unit_truncexp_mean(kMaxExponent);
    if (frac <= lo_frac || frac >= hi_frac) {
        d.exact_ = false;
        d.rate_ = (frac <= lo_frac ? -kMaxExponent : kMaxExponent) / width;
        return d;
    }
    double lo = -kMaxExponent, hi = kMaxExponent;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (unit_truncexp_mean(mid) < frac) lo = mid; else hi = mid;
    }
    d.rate_ = 0.5 * (lo + hi) / width;
    return d;
}

double IntervalDistribution::sample(SimRng& rng) const {
    if (shape_ == Shape::TriangularWithWing) {
        const double pick = rng.uniform01();
        const double u = rng.uniform01();
        if (pick < wing_weight_) return wing_lo_ + (wing_hi_ - wing_lo_) * u;
        return triangular_sample(u, min_, *mode_, max_);
    }
    const double u = rng.uniform01();
    const double width = max_ - min_;
    const double x = rate_ * width;
    if (width <= 0) return min_;
    if (std::abs(x) < 1e-9) return min_ + width * u;
    return min_ + width * std::log1p(u * std::expm1(x)) / x;
}

double IntervalDistribution::mean() const {
    if (shape_ == Shape::TriangularWithWing) {
        const double tri = (min_ + *mode_ + max_) / 3.0;
        const double wing = (wing_lo_ + wing_hi_) / 2.0;
        return (1.0 - wing_weight_) * tri + wing_weight_ * wing;
    }
    if (max_ <= min_) return min_;
    return truncated_exponential_mean(min_, max_, rate_);
}

}  // namespace probesense::sim
