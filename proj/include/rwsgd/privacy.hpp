// privacy.hpp — noise mechanisms for the Lipschitz constants and the
// (epsilon, delta) accountant of the Gamma mechanism.
//
// The Gamma mechanism releases R(L) ~ Gamma(shape L/theta, scale theta),
// which has mean L and variance L*theta. For two constants L > L' the
// privacy loss log(p_L(z) / p_L'(z)) is monotone in z, so both tail
// probabilities reduce to regularised incomplete gamma functions.
#pragma once
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rwsgd/errors.hpp"
#include "rwsgd/rng.hpp"
#include "rwsgd/special.hpp"

namespace rwsgd {

enum class Mechanism { Gamma, TruncatedGamma, Laplace };

inline std::string_view to_string(Mechanism m) {
    switch (m) {
        case Mechanism::Gamma: return "gamma";
        case Mechanism::TruncatedGamma: return "truncated-gamma";
        case Mechanism::Laplace: return "laplace";
    }
    return "?";
}

inline Mechanism parse_mechanism(std::string_view s) {
    if (s == "gamma") return Mechanism::Gamma;
    if (s == "truncated-gamma") return Mechanism::TruncatedGamma;
    if (s == "laplace") return Mechanism::Laplace;
    throw ConfigError("unknown mechanism '" + std::string(s) +
                      "' (expected gamma, truncated-gamma or laplace)");
}

struct PrivacySpec {
    double theta = 1.0;
    double l_min = 1e-3;
    double l_max = 1e12;
    double epsilon = 0.0;
    double delta = 1.0;
    Mechanism mechanism = Mechanism::Gamma;

    void validate() const {
        detail::require(theta > 0.0 && std::isfinite(theta), "privacy.theta must be positive");
        detail::require(l_min > 0.0, "privacy.l_min must be positive");
        detail::require(l_max > l_min, "privacy.l_max must exceed privacy.l_min");
        detail::require(epsilon >= 0.0, "privacy.epsilon must be nonnegative");
        detail::require(delta >= 0.0 && delta <= 1.0, "privacy.delta must lie in [0, 1]");
    }
};

// Gamma(shape, 1) by Marsaglia-Tsang squeeze/accept; shapes below one are
// boosted through Gamma(shape+1) * U^(1/shape).
inline double sample_standard_gamma(double shape, Rng& rng) {
    if (shape < 1.0) {
        const double g = sample_standard_gamma(shape + 1.0, rng);
        const double log_u = std::log(rng.uniform_open());
        const double out = g * std::exp(log_u / shape);
        return std::max(out, std::numeric_limits<double>::min());
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform_open();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

inline double gamma_mechanism(double l, double theta, Rng& rng) {
    detail::require(l > 0.0, "gamma_mechanism: L must be positive");
    detail::require(theta > 0.0, "gamma_mechanism: theta must be positive");
    return theta * sample_standard_gamma(l / theta, rng);
}

inline double truncated_gamma_mechanism(double l, double theta, double l_min, double l_max,
                                        Rng& rng) {
    detail::require(l_min > 0.0 && l_min < l_max, "truncation bounds must satisfy 0 < l_min < l_max");
    return std::clamp(gamma_mechanism(l, theta, rng), l_min, l_max);
}

// L + Laplace(0, b) with b = sqrt(variance/2), clamped below at `floor`.
inline double laplace_mechanism(double l, double variance, double floor, Rng& rng) {
    detail::require(variance > 0.0, "laplace_mechanism: variance must be positive");
    const double b = std::sqrt(variance / 2.0);
    const double u = rng.uniform_open() - 0.5;  // (-1/2, 1/2)
    const double noise = -b * std::copysign(1.0, u) * std::log1p(-2.0 * std::abs(u));
    return std::max(l + noise, floor);
}

// log p_{R(l)}(z) - log p_{R(l_prime)}(z) for the Gamma mechanism.
inline double gamma_privacy_loss(double z, double l, double l_prime, double theta) {
    return log_gamma(l_prime / theta) - log_gamma(l / theta) +
           ((l - l_prime) / theta) * std::log(z / theta);
}

struct DeltaBound {
    double branch_upper;  // Z ~ R(sup L), loss of sup L against inf L
    double branch_lower;  // Z ~ R(inf L), loss of inf L against sup L
    double delta;         // max of the two, clamped to [0, 1]
};

inline DeltaBound delta_bound_branches(double epsilon, double theta, double sup_l, double inf_l) {
    detail::require(epsilon >= 0.0, "delta_bound: epsilon must be nonnegative");
    detail::require(theta > 0.0, "delta_bound: theta must be positive");
    if (!(inf_l > 0.0) || !(sup_l > inf_l))
        throw ConfigError("degenerate sensitivity range: sup L = " + std::to_string(sup_l) +
                          ", inf L = " + std::to_string(inf_l) + " (need sup L > inf L > 0)");
    const double a = sup_l / theta;
    const double b = inf_l / theta;
    const double expo = theta / (sup_l - inf_l);
    const double log_ratio = log_gamma(a) - log_gamma(b);
    // Thresholds on Z/theta, kept in log form: for large theta they leave
    // the double range long before the tail probabilities settle.
    const double log_t_upper = (epsilon + log_ratio) * expo;
    const double log_t_lower = (-epsilon + log_ratio) * expo;
    DeltaBound out{};
    out.branch_upper = regularized_gamma_q_log(a, log_t_upper);  // 1 - IG(a, t)/Gamma(a)
    out.branch_lower = regularized_gamma_p_log(b, log_t_lower);  // IG(b, t)/Gamma(b)
    out.delta = std::clamp(std::max(out.branch_upper, out.branch_lower), 0.0, 1.0);
    return out;
}

inline double delta_bound(double epsilon, double theta, double sup_l, double inf_l) {
    return delta_bound_branches(epsilon, theta, sup_l, inf_l).delta;
}

// Limit of delta_bound as theta -> infinity; neither branch need vanish.
// With r = sup/inf the lower branch tends to exp(-(epsilon + ln r)/(r - 1))
// and, while epsilon < ln r, the upper one to 1 - exp(r(epsilon - ln r)/(r - 1)).
// Targets below this floor are unreachable for large theta.
inline double delta_floor(double epsilon, double sup_l, double inf_l) {
    const double r = sup_l / inf_l;
    const double lr = std::log(r);
    const double lower = std::exp(-(epsilon + lr) / (r - 1.0));
    const double upper = epsilon < lr ? -std::expm1(r * (epsilon - lr) / (r - 1.0)) : 0.0;
    return std::max(lower, upper);
}

// Smallest theta (least noise) with delta_bound(epsilon, theta) <= target,
// to relative precision `rel_tol`. delta_bound falls with theta towards
// delta_floor, so above the floor the feasible thetas form a ray
// [theta*, inf); std::nullopt when no theta up to theta_max qualifies.
inline std::optional<double> solve_theta(double epsilon, double target_delta, double sup_l,
                                         double inf_l, double rel_tol = 1e-6,
                                         double theta_max = 1e8) {
    detail::require(target_delta > 0.0 && target_delta <= 1.0,
                    "solve_theta: target delta must lie in (0, 1]");
    auto feasible = [&](double th) { return delta_bound(epsilon, th, sup_l, inf_l) <= target_delta; };
    double hi = std::max(1e-6, inf_l * 1e-3);
    while (!feasible(hi)) {
        hi *= 2.0;
        if (hi > theta_max) return std::nullopt;
    }
    double lo = hi / 2.0;
    while (lo > 1e-12 && feasible(lo)) {
        hi = lo;
        lo /= 2.0;
    }
    if (lo <= 1e-12) return hi;
    while ((hi - lo) > rel_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? hi : lo) = mid;
    }
    return hi;
}

// Noisy constants, drawn once per run and then frozen.
class NoisyLipschitz {
public:
    NoisyLipschitz() = default;
    explicit NoisyLipschitz(std::vector<double> values) : values_(std::move(values)) {
        for (double v : values_)
            if (!(v > 0.0) || !std::isfinite(v))
                throw NumericalError("privatised constant is not strictly positive");
    }

    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_.at(i); }

    // pi_{w,R}(i) = R(L_i) / sum_j R(L_j)
    std::vector<double> stationary() const {
        double s = 0.0;
        for (double v : values_) s += v;
        std::vector<double> out(values_);
        for (double& v : out) v /= s;
        return out;
    }

private:
    std::vector<double> values_;
};

// One independent draw per node. The Laplace baseline matches the Gamma
// variance per node (L_i * theta) and is floored at 1e-3 * min L.
inline NoisyLipschitz privatize_all(std::span<const double> lipschitz, const PrivacySpec& spec,
                                    Rng& rng) {
    spec.validate();
    detail::require(!lipschitz.empty(), "privatize_all: no constants");
    std::vector<double> out;
    out.reserve(lipschitz.size());
    const double floor = 1e-3 * *std::min_element(lipschitz.begin(), lipschitz.end());
    for (double l : lipschitz) {
        switch (spec.mechanism) {
            case Mechanism::Gamma: out.push_back(gamma_mechanism(l, spec.theta, rng)); break;
            case Mechanism::TruncatedGamma:
                out.push_back(truncated_gamma_mechanism(l, spec.theta, spec.l_min, spec.l_max, rng));
                break;
            case Mechanism::Laplace:
                out.push_back(laplace_mechanism(l, l * spec.theta, floor, rng));
                break;
        }
    }
    return NoisyLipschitz(std::move(out));
}

}  // namespace rwsgd
