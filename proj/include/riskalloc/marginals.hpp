#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <variant>
#include <vector>

#include "riskalloc/errors.hpp"
#include "riskalloc/rng.hpp"
#include "riskalloc/rootfind.hpp"
#include "riskalloc/special.hpp"

namespace riskalloc {

/// Univariate loss distributions. All have positive support; parameters are
/// validated at construction.
struct Exponential {
    double rate;
    explicit Exponential(double rate_) : rate(rate_) {
        if (!(rate > 0.0)) throw DomainError("Exponential: rate must be positive");
    }
};

/// Lomax parametrization: survival (1 + x/scale)^(-shape).
struct ParetoLomax {
    double shape;
    double scale;
    ParetoLomax(double shape_, double scale_) : shape(shape_), scale(scale_) {
        if (!(shape > 0.0)) throw DomainError("ParetoLomax: shape must be positive");
        if (!(scale > 0.0)) throw DomainError("ParetoLomax: scale must be positive");
    }
};

struct LogNormal {
    double mu;
    double sigma;
    LogNormal(double mu_, double sigma_) : mu(mu_), sigma(sigma_) {
        if (!(sigma > 0.0)) throw DomainError("LogNormal: sigma must be positive");
        if (!std::isfinite(mu)) throw DomainError("LogNormal: mu must be finite");
    }
};

/// Rate parametrization: density b^a x^(a-1) e^(-bx) / Gamma(a).
struct GammaDist {
    double shape;
    double rate;
    GammaDist(double shape_, double rate_) : shape(shape_), rate(rate_) {
        if (!(shape > 0.0)) throw DomainError("GammaDist: shape must be positive");
        if (!(rate > 0.0)) throw DomainError("GammaDist: rate must be positive");
    }
};

using Marginal = std::variant<Exponential, ParetoLomax, LogNormal, GammaDist>;

inline double cdf(const Marginal& m, double x);

/// P(X > x). Values below the support return 1.
inline double survival(const Marginal& m, double x) {
    if (x <= 0.0) return 1.0;
    return std::visit(
        [x](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                return std::exp(-d.rate * x);
            } else if constexpr (std::is_same_v<T, ParetoLomax>) {
                return std::exp(-d.shape * std::log1p(x / d.scale));
            } else if constexpr (std::is_same_v<T, LogNormal>) {
                return 1.0 - normal_cdf((std::log(x) - d.mu) / d.sigma);
            } else {
                return 1.0 - regularized_gamma_p(d.shape, d.rate * x);
            }
        },
        m);
}

inline double cdf(const Marginal& m, double x) {
    if (x <= 0.0) return 0.0;
    return std::visit(
        [x, &m](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                return -std::expm1(-d.rate * x);
            } else if constexpr (std::is_same_v<T, ParetoLomax>) {
                return -std::expm1(-d.shape * std::log1p(x / d.scale));
            } else if constexpr (std::is_same_v<T, LogNormal>) {
                return normal_cdf((std::log(x) - d.mu) / d.sigma);
            } else {
                return regularized_gamma_p(d.shape, d.rate * x);
            }
        },
        m);
}

inline double density(const Marginal& m, double x) {
    if (x < 0.0) return 0.0;
    return std::visit(
        [x](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                return d.rate * std::exp(-d.rate * x);
            } else if constexpr (std::is_same_v<T, ParetoLomax>) {
                return d.shape / d.scale * std::exp(-(d.shape + 1.0) * std::log1p(x / d.scale));
            } else if constexpr (std::is_same_v<T, LogNormal>) {
                if (x == 0.0) return 0.0;
                const double z = (std::log(x) - d.mu) / d.sigma;
                return std::exp(-0.5 * z * z) / (x * d.sigma * std::sqrt(2.0 * M_PI));
            } else {
                if (x == 0.0) return d.shape < 1.0 ? std::numeric_limits<double>::infinity()
                                                   : (d.shape == 1.0 ? d.rate : 0.0);
                return std::exp(d.shape * std::log(d.rate) + (d.shape - 1.0) * std::log(x) -
                                d.rate * x - std::lgamma(d.shape));
            }
        },
        m);
}

/// Inverse CDF on (0,1). The gamma quantile has no closed form and is found
/// by bracketed bisection on the CDF to absolute tolerance 1e-12.
inline double quantile(const Marginal& m, double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile: p must lie in (0,1)");
    return std::visit(
        [p](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                return -std::log1p(-p) / d.rate;
            } else if constexpr (std::is_same_v<T, ParetoLomax>) {
                return d.scale * std::expm1(-std::log1p(-p) / d.shape);
            } else if constexpr (std::is_same_v<T, LogNormal>) {
                return std::exp(d.mu + d.sigma * normal_quantile(p));
            } else {
                double hi = (d.shape + 10.0 * std::sqrt(d.shape) + 10.0) / d.rate;
                while (regularized_gamma_p(d.shape, d.rate * hi) < p) hi *= 2.0;
                return bisect([&](double x) { return regularized_gamma_p(d.shape, d.rate * x) - p; },
                              0.0, hi, 1e-12);
            }
        },
        m);
}

/// Mean; infinite for ParetoLomax with shape <= 1.
inline double mean(const Marginal& m) {
    return std::visit(
        [](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                return 1.0 / d.rate;
            } else if constexpr (std::is_same_v<T, ParetoLomax>) {
                if (d.shape <= 1.0) return std::numeric_limits<double>::infinity();
                return d.scale / (d.shape - 1.0);
            } else if constexpr (std::is_same_v<T, LogNormal>) {
                return std::exp(d.mu + 0.5 * d.sigma * d.sigma);
            } else {
                return d.shape / d.rate;
            }
        },
        m);
}

/// Inverse-CDF sampling; consumes exactly one uniform per draw.
inline double sample(const Marginal& m, Stream& stream) {
    return quantile(m, stream.uniform_open());
}

// ---------------------------------------------------------------------------
// Generalized Erlang: sum of independent exponentials with distinct rates.
// ---------------------------------------------------------------------------

inline void require_distinct_rates(std::span<const double> rates) {
    for (std::size_t i = 0; i < rates.size(); ++i) {
        if (!(rates[i] > 0.0)) throw DomainError("rates must be positive");
        for (std::size_t j = i + 1; j < rates.size(); ++j) {
            if (std::fabs(rates[i] - rates[j]) <= 1e-9 * std::max(rates[i], rates[j]))
                throw DistinctRatesRequired("rates must be pairwise distinct");
        }
    }
}

/// A_l = prod_{j != l} beta_j / (beta_j - beta_l).
inline std::vector<double> erlang_coefficients(std::span<const double> rates) {
    require_distinct_rates(rates);
    std::vector<double> coeff(rates.size(), 1.0);
    for (std::size_t l = 0; l < rates.size(); ++l)
        for (std::size_t j = 0; j < rates.size(); ++j)
            if (j != l) coeff[l] *= rates[j] / (rates[j] - rates[l]);
    return coeff;
}

/// Survival sum A_l e^(-beta_l x); clamped into [0,1] against rounding.
inline double erlang_survival(std::span<const double> rates, double x) {
    if (x < 0.0) throw DomainError("erlang_survival: x must be nonnegative");
    const auto coeff = erlang_coefficients(rates);
    double s = 0.0;
    for (std::size_t l = 0; l < rates.size(); ++l) s += coeff[l] * std::exp(-rates[l] * x);
    return std::clamp(s, 0.0, 1.0);
}

// CDF of the generalized Erlang. The alternating sum cancels catastrophically
// for small x, where the Taylor series starting at the x^d term takes over.
inline double erlang_cdf(std::span<const double> rates, double x) {
    if (x < 0.0) throw DomainError("erlang_cdf: x must be nonnegative");
    const auto coeff = erlang_coefficients(rates);
    double s = 0.0;
    for (std::size_t l = 0; l < rates.size(); ++l) s += coeff[l] * std::exp(-rates[l] * x);
    const double direct = 1.0 - s;
    if (direct >= 1e-6) return std::min(direct, 1.0);

    const std::size_t d = rates.size();
    // F(x) = -sum_{k>=d} (-x)^k M_k / k!, with M_k = sum_l A_l beta_l^k
    // (moments M_1..M_{d-1} vanish identically).
    double series = 0.0;
    double fact = 1.0;  // running k!
    for (std::size_t k = 2; k <= d; ++k) fact *= static_cast<double>(k);
    double xk = std::pow(x, static_cast<double>(d));
    double sign = (d % 2 == 0) ? -1.0 : 1.0;  // -(-1)^k
    for (std::size_t k = d; k <= d + 2; ++k) {
        double mk = 0.0;
        for (std::size_t l = 0; l < rates.size(); ++l)
            mk += coeff[l] * std::pow(rates[l], static_cast<double>(k));
        series += sign * xk * mk / fact;
        xk *= x;
        fact *= static_cast<double>(k + 1);
        sign = -sign;
    }
    return std::max(series, 0.0);
}

}  // namespace riskalloc
