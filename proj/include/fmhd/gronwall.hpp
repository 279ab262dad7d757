#pragma once

// Generalised Gronwall bound: if u(t) <= alpha + int_a^t beta(s) g(u(s)) ds with
// g positive and nondecreasing, then u(t) <= G^{-1}(int_a^t beta), where
// G(sigma) = int_alpha^sigma ds / g(s), as long as the integral of beta stays
// inside the range of G.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fmhd/grid.hpp"

namespace fmhd {

/// g(s) = s^p (p >= 1), or a tabulated nondecreasing function interpolated
/// linearly between nodes and held constant past the last node.
class GrowthFunction {
public:
    static GrowthFunction power(double p) {
        if (!(p >= 1.0) || !std::isfinite(p)) throw Error("g: power must be >= 1");
        GrowthFunction g;
        g.power_ = p;
        return g;
    }

    static GrowthFunction tabulated(std::vector<double> s, std::vector<double> values) {
        if (s.size() < 2 || s.size() != values.size()) throw Error("g: table needs >= 2 matching nodes");
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (!std::isfinite(s[i]) || !std::isfinite(values[i])) throw Error("g: table has non-finite entries");
            if (!(values[i] > 0.0)) throw Error("g: table values must be positive");
            if (i > 0 && !(s[i] > s[i - 1])) throw Error("g: table nodes must be strictly increasing");
            if (i > 0 && values[i] < values[i - 1]) throw Error("g: table values must be nondecreasing");
        }
        GrowthFunction g;
        g.nodes_ = std::move(s);
        g.values_ = std::move(values);
        return g;
    }

    bool is_power() const noexcept { return nodes_.empty(); }
    double exponent() const noexcept { return power_; }

    double operator()(double s) const {
        if (is_power()) return std::pow(s, power_);
        if (s <= nodes_.front()) return values_.front();
        if (s >= nodes_.back()) return values_.back();
        const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), s);
        const std::size_t i = static_cast<std::size_t>(it - nodes_.begin());
        const double w = (s - nodes_[i - 1]) / (nodes_[i] - nodes_[i - 1]);
        return values_[i - 1] + w * (values_[i] - values_[i - 1]);
    }

    /// g must be defined and positive on [alpha, inf).
    void check_domain(double alpha) const {
        if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error("gronwall: alpha must be positive");
        if (!is_power() && alpha < nodes_.front()) throw Error("gronwall: alpha lies below the g table");
    }

    /// G(sigma) = int_alpha^sigma ds / g(s) for sigma >= alpha.
    double G(double alpha, double sigma) const {
        if (sigma <= alpha) return 0.0;
        if (is_power()) return integrate(alpha, sigma);
        // Split at the table nodes so each piece is smooth.
        double sum = 0.0, lo = alpha;
        for (double node : nodes_) {
            if (node <= lo) continue;
            if (node >= sigma) break;
            sum += integrate(lo, node);
            lo = node;
        }
        if (sigma > nodes_.back() && lo < nodes_.back()) {
            sum += integrate(lo, nodes_.back());
            lo = nodes_.back();
        }
        if (lo >= nodes_.back()) return sum + (sigma - lo) / values_.back();
        return sum + integrate(lo, sigma);
    }

    /// sup of G, infinite when 1/g is not integrable at infinity.
    double G_infinity(double alpha) const {
        if (!is_power() || power_ <= 1.0) return std::numeric_limits<double>::infinity();
        return integrate(alpha, std::numeric_limits<double>::infinity());
    }

private:
    double integrate(double a, double b) const {
        using boost::math::quadrature::gauss_kronrod;
        auto f = [this](double s) { return 1.0 / (*this)(s); };
        double error = 0.0;
        const double value = gauss_kronrod<double, 61>::integrate(f, a, b, 20, relative_tolerance, &error);
        if (!std::isfinite(value)) throw Error("gronwall: quadrature failed");
        return value;
    }

    static constexpr double relative_tolerance = 1e-8;

    double power_ = 1.0;
    std::vector<double> nodes_;
    std::vector<double> values_;
};

struct BetaSample {
    double t = 0.0;
    double beta = 0.0;
};

/// int_{t_0}^t beta by the trapezoid rule on the samples.
inline double beta_integral(const std::vector<BetaSample>& samples, double t) {
    if (samples.empty()) throw Error("gronwall: no beta samples");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i].t) || !std::isfinite(samples[i].beta))
            throw Error("gronwall: non-finite beta sample");
        if (samples[i].beta < 0.0) throw Error("gronwall: beta must be nonnegative");
        if (i > 0 && !(samples[i].t > samples[i - 1].t)) throw Error("gronwall: beta samples must be t-sorted");
    }
    if (t < samples.front().t || t > samples.back().t) throw Error("gronwall: t_query outside the sample range");
    double sum = 0.0;
    for (std::size_t i = 1; i < samples.size(); ++i) {
        const auto& a = samples[i - 1];
        const auto& b = samples[i];
        if (t <= a.t) break;
        const double hi = std::min(t, b.t);
        const double beta_hi = a.beta + (b.beta - a.beta) * (hi - a.t) / (b.t - a.t);
        sum += 0.5 * (a.beta + beta_hi) * (hi - a.t);
    }
    return sum;
}

struct GronwallBound {
    /// Empty when the integral of beta has left the range of G ("out-of-domain").
    std::optional<double> value;
    double beta_integral = 0.0;
    double G_infinity = 0.0;

    bool in_domain() const noexcept { return value.has_value(); }
};

/// Smallest sigma >= alpha with G(sigma) = target, by bisection.
inline double invert_G(const GrowthFunction& g, double alpha, double target) {
    if (target <= 0.0) return alpha;
    double lo = alpha, hi = 2.0 * alpha;
    while (g.G(alpha, hi) < target) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi)) throw Error("gronwall: bound exceeds the double range");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g.G(alpha, mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline GronwallBound gronwall_bound(double alpha, const std::vector<BetaSample>& beta, const GrowthFunction& g,
                                    double t_query) {
    g.check_domain(alpha);
    GronwallBound r;
    r.beta_integral = beta_integral(beta, t_query);
    r.G_infinity = g.G_infinity(alpha);
    if (r.beta_integral >= r.G_infinity) return r;
    r.value = invert_G(g, alpha, r.beta_integral);
    return r;
}

/// First time at which the integral of beta reaches G(inf), i.e. where the
/// bound stops being finite; empty if that does not happen within the samples.
inline std::optional<double> gronwall_breakdown_time(double alpha, const std::vector<BetaSample>& beta,
                                                     const GrowthFunction& g) {
    g.check_domain(alpha);
    const double limit = g.G_infinity(alpha);
    if (!std::isfinite(limit)) return std::nullopt;
    beta_integral(beta, beta.front().t);  // validates the samples
    double sum = 0.0;
    for (std::size_t i = 1; i < beta.size(); ++i) {
        const auto& a = beta[i - 1];
        const auto& b = beta[i];
        const double h = b.t - a.t;
        const double piece = 0.5 * (a.beta + b.beta) * h;
        if (sum + piece >= limit) {
            // Integral over [a.t, a.t + x] is a.beta x + slope x^2 / 2.
            const double need = limit - sum;
            const double slope = (b.beta - a.beta) / h;
            double x;
            if (std::abs(slope) * h < 1e-14 * std::max(a.beta, 1e-300)) {
                x = need / a.beta;
            } else {
                const double disc = a.beta * a.beta + 2.0 * slope * need;
                x = 2.0 * need / (a.beta + std::sqrt(std::max(disc, 0.0)));
            }
            return a.t + std::min(x, h);
        }
        sum += piece;
    }
    return std::nullopt;
}

/// Constant beta on [t0, t1], as used by the command line.
inline std::vector<BetaSample> constant_beta(double c, double t0, double t1) {
    return {{t0, c}, {t1, c}};
}

}  // namespace fmhd
