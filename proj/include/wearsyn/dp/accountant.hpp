#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "wearsyn/core/errors.hpp"

namespace wearsyn::dp {

// Renyi-divergence accountant for the Poisson-subsampled Gaussian mechanism,
// minimized over a fixed order grid and converted to (epsilon, delta).

inline constexpr const char* kAccountantId = "rdp-grid-v1";

inline std::vector<double> default_orders() {
    std::vector<double> orders = {1.25, 1.5, 1.75};
    for (double a = 2.0; a <= 64.0; a += 0.5) orders.push_back(a);
    for (double a = 65.0; a <= 512.0; a += 1.0) orders.push_back(a);
    return orders;
}

namespace detail {

inline double log_add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    double hi = std::max(a, b), lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}

inline double log_sub(double a, double b) {
    // log(exp(a) - exp(b)), requires a >= b
    if (b == -std::numeric_limits<double>::infinity()) return a;
    if (a == b) return -std::numeric_limits<double>::infinity();
    return a + std::log1p(-std::exp(b - a));
}

inline double log_erfc(double x) {
    if (x < 4.0) return std::log(std::erfc(x));
    // asymptotic expansion, erfc(x) ~ exp(-x^2)/(x sqrt(pi)) (1 - 1/(2x^2) + 3/(4x^4))
    double r = 1.0 - 0.5 / (x * x) + 0.75 / (x * x * x * x);
    return -x * x - std::log(x) - 0.5 * std::log(M_PI) + std::log(r);
}

inline double log_binom(double n, double k) {
    return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1);
}

// log E[(P(x)/Q(x))^alpha] for integer alpha under Poisson subsampling.
inline double log_a_int(double q, double sigma, int alpha) {
    double log_a = -std::numeric_limits<double>::infinity();
    for (int k = 0; k <= alpha; ++k) {
        double term = log_binom(alpha, k) + k * std::log(q) +
                      (alpha - k) * std::log1p(-q) +
                      (k * (k - 1.0)) / (2.0 * sigma * sigma);
        log_a = log_add(log_a, term);
    }
    return log_a;
}

// Fractional-order variant via the converging two-part series. Generalized
// binomial coefficients are tracked as (sign, log magnitude) incrementally.
inline double log_a_frac(double q, double sigma, double alpha) {
    const double inf = std::numeric_limits<double>::infinity();
    double log_a0 = -inf, log_a1 = -inf;
    const double z0 = sigma * sigma * std::log(1.0 / q - 1.0) + 0.5;
    double log_coef = 0.0;  // |binom(alpha, 0)| = 1
    int coef_sign = 1;
    for (int i = 0; i < 1000000; ++i) {
        double j = alpha - i;
        double log_t0 = log_coef + i * std::log(q) + j * std::log1p(-q);
        double log_t1 = log_coef + j * std::log(q) + i * std::log1p(-q);
        double log_e0 = std::log(0.5) + log_erfc((i - z0) / (std::sqrt(2.0) * sigma));
        double log_e1 = std::log(0.5) + log_erfc((z0 - j) / (std::sqrt(2.0) * sigma));
        double log_s0 = log_t0 + (i * i - i) / (2.0 * sigma * sigma) + log_e0;
        double log_s1 = log_t1 + (j * j - j) / (2.0 * sigma * sigma) + log_e1;
        if (coef_sign > 0) {
            log_a0 = log_add(log_a0, log_s0);
            log_a1 = log_add(log_a1, log_s1);
        } else {
            log_a0 = log_sub(log_a0, log_s0);
            log_a1 = log_sub(log_a1, log_s1);
        }
        if (std::max(log_s0, log_s1) < -30.0) break;
        // binom(alpha, i+1) = binom(alpha, i) * (alpha - i) / (i + 1)
        double factor = (alpha - i) / (i + 1.0);
        if (factor < 0) coef_sign = -coef_sign;
        log_coef += std::log(std::fabs(factor));
    }
    return log_add(log_a0, log_a1);
}

inline double rdp_single_order(double q, double sigma, double alpha) {
    if (q == 0.0) return 0.0;
    if (q == 1.0) return alpha / (2.0 * sigma * sigma);
    double log_a;
    if (std::floor(alpha) == alpha)
        log_a = log_a_int(q, sigma, static_cast<int>(alpha));
    else
        log_a = log_a_frac(q, sigma, alpha);
    return log_a / (alpha - 1.0);
}

}  // namespace detail

// RDP epsilon at each order after `steps` compositions.
inline std::vector<double> compute_rdp(double q, double sigma, long steps,
                                       const std::vector<double>& orders) {
    std::vector<double> rdp(orders.size());
    for (std::size_t i = 0; i < orders.size(); ++i)
        rdp[i] = static_cast<double>(steps) * detail::rdp_single_order(q, sigma, orders[i]);
    return rdp;
}

// Standard RDP -> (epsilon, delta) conversion, minimized over orders.
inline double rdp_to_epsilon(const std::vector<double>& rdp,
                             const std::vector<double>& orders, double delta) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < orders.size(); ++i) {
        double a = orders[i];
        if (a <= 1.0) continue;
        double eps = rdp[i] + std::log(1.0 / delta) / (a - 1.0);
        best = std::min(best, eps);
    }
    return best;
}

inline double epsilon_for(double sigma, double q, long steps, double delta,
                          const std::vector<double>& orders = default_orders()) {
    if (sigma <= 0.0) throw ConfigError("epsilon_for: sigma must be positive");
    if (q <= 0.0 || q > 1.0) throw ConfigError("epsilon_for: q must lie in (0,1]");
    if (delta <= 0.0 || delta >= 1.0) throw ConfigError("epsilon_for: delta must lie in (0,1)");
    if (steps < 0) throw ConfigError("epsilon_for: negative step count");
    if (steps == 0) return 0.0;
    return rdp_to_epsilon(compute_rdp(q, sigma, steps, orders), orders, delta);
}

// Minimal sigma (1e-3 relative) with epsilon_for(sigma, ...) <= epsilon_target.
inline double calibrate_sigma(double epsilon_target, double delta, double q, long steps,
                              const std::vector<double>& orders = default_orders()) {
    if (epsilon_target <= 0.0) throw ConfigError("calibrate_sigma: target must be positive");
    double lo = 1e-2, hi = 1e4;
    if (epsilon_for(hi, q, steps, delta, orders) > epsilon_target)
        throw PrivacyError("calibrate_sigma: target unreachable within sigma <= 1e4");
    if (epsilon_for(lo, q, steps, delta, orders) <= epsilon_target) return lo;
    while (hi / lo > 1.0 + 1e-3) {
        double mid = std::sqrt(lo * hi);
        if (epsilon_for(mid, q, steps, delta, orders) <= epsilon_target)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

struct Geometry {
    double q = 0.0;
    long steps = 0;
};

// Sampling rate and step count from the training shape. With sliding
// duplication the unique points are each seen twice, so effective epochs double.
inline Geometry geometry_for(long n_unique, long batch, long epochs, bool sliding_duplication) {
    if (batch < 1 || n_unique < batch)
        throw ConfigError("geometry_for: need n_unique >= batch >= 1");
    long eff_epochs = sliding_duplication ? 2 * epochs : epochs;
    long steps_per_epoch = (n_unique + batch - 1) / batch;
    return {static_cast<double>(batch) / static_cast<double>(n_unique),
            eff_epochs * steps_per_epoch};
}

struct PrivacySpec {
    double epsilon_target = 0.0;
    double delta = 1e-3;
    double clip_norm = 1.0;
    double sigma = 0.0;  // 0 means not yet calibrated
    double sample_rate = 0.0;
    long steps = 0;

    bool calibrated() const { return sigma > 0.0; }

    // Re-derives epsilon from the recorded mechanism parameters.
    double validate() const {
        if (!calibrated()) throw PrivacyError("privacy spec has no calibrated sigma");
        double eps = epsilon_for(sigma, sample_rate, steps, delta);
        if (eps > epsilon_target * (1.0 + 1e-9))
            throw PrivacyError("privacy certificate invalid: recomputed epsilon exceeds target");
        return eps;
    }
};

inline PrivacySpec calibrate_spec(double epsilon_target, double delta, double clip_norm,
                                  long n_unique, long batch, long epochs,
                                  bool sliding_duplication) {
    if (delta > 1.0 / static_cast<double>(n_unique))
        throw PrivacyError("delta must satisfy delta <= 1/n_unique");
    Geometry g = geometry_for(n_unique, batch, epochs, sliding_duplication);
    PrivacySpec spec;
    spec.epsilon_target = epsilon_target;
    spec.delta = delta;
    spec.clip_norm = clip_norm;
    spec.sample_rate = g.q;
    spec.steps = g.steps;
    spec.sigma = calibrate_sigma(epsilon_target, delta, g.q, g.steps);
    return spec;
}

}  // namespace wearsyn::dp
