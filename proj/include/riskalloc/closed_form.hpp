#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "riskalloc/errors.hpp"
#include "riskalloc/indicators.hpp"
#include "riskalloc/joint_models.hpp"
#include "riskalloc/marginals.hpp"
#include "riskalloc/rootfind.hpp"

namespace riskalloc {

/// A vector equation on the open simplex whose root is the optimal
/// allocation. residual() is the equation system evaluated literally
/// (branch-1 condition minus branch-j condition). log_residual() is the same
/// equalization written as differences of log condition quantities; it has
/// the same roots but stays well-scaled when the conditions decay like
/// exp(-u beta), which is what the solver wants at large capital.
struct ResidualSystem {
    int dim = 0;
    std::string name;
    std::function<std::vector<double>(std::span<const double>)> residual;
    std::function<std::vector<double>(std::span<const double>)> log_residual;
    std::vector<double> hint;  // optional interior starting aid (asymptotic point)
};

inline bool equal_rates(std::span<const double> rates, double rel = 1e-9) {
    for (std::size_t i = 1; i < rates.size(); ++i)
        if (std::fabs(rates[i] - rates[0]) > rel * std::max(rates[i], rates[0])) return false;
    return true;
}

namespace detail {

// log of sum A_l e^{-beta_l x} with the dominant (smallest-rate) term
// factored out; the leading coefficient is positive so the log exists.
inline double log_erlang_survival(std::span<const double> rates,
                                  std::span<const double> coeff, double x) {
    std::size_t lead = 0;
    for (std::size_t l = 1; l < rates.size(); ++l)
        if (rates[l] < rates[lead]) lead = l;
    double s = 0.0;
    for (std::size_t l = 0; l < rates.size(); ++l)
        s += coeff[l] * std::exp(-(rates[l] - rates[lead]) * x);
    if (!(s > 0.0)) return -std::numeric_limits<double>::infinity();
    return -rates[lead] * x + std::log(s);
}

inline double log_or_neg_inf(double v) {
    return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Independent exponentials
// ---------------------------------------------------------------------------

/// Asymptotic I-optimal fractions (1/beta_i) / sum_j (1/beta_j).
inline std::vector<double> asymptotic_exponential_I(std::span<const double> rates) {
    double denom = 0.0;
    for (double b : rates) {
        if (!(b > 0.0)) throw DomainError("asymptotic_exponential_I: rates must be positive");
        denom += 1.0 / b;
    }
    std::vector<double> out(rates.size());
    for (std::size_t i = 0; i < rates.size(); ++i) out[i] = (1.0 / rates[i]) / denom;
    return out;
}

/// Asymptotic J-optimal fractions: everything to the uniquely smallest rate.
inline std::vector<double> asymptotic_exponential_J(std::span<const double> rates) {
    std::size_t arg = 0;
    for (std::size_t i = 0; i < rates.size(); ++i) {
        if (!(rates[i] > 0.0)) throw DomainError("asymptotic_exponential_J: rates must be positive");
        if (rates[i] < rates[arg]) arg = i;
    }
    for (std::size_t i = 0; i < rates.size(); ++i)
        if (i != arg && std::fabs(rates[i] - rates[arg]) <= 1e-9 * rates[i])
            throw TiedRiskiestBranch("asymptotic_exponential_J: smallest rate is tied");
    std::vector<double> out(rates.size(), 0.0);
    out[arg] = 1.0;
    return out;
}

/// Optimality system for I: exp_joint_lower_prob equalized across branches.
inline ResidualSystem eizo_system(std::vector<double> rates, double u) {
    if (!(u > 0.0)) throw DomainError("eizo_system: u must be positive");
    auto coeff = erlang_coefficients(rates);  // throws DistinctRatesRequired
    const int d = static_cast<int>(rates.size());
    ResidualSystem sys;
    sys.dim = d;
    sys.name = "exponential_I";
    sys.hint = asymptotic_exponential_I(rates);
    sys.residual = [rates, u](std::span<const double> alpha) {
        std::vector<double> r(rates.size() - 1);
        const double q0 = exp_joint_lower_prob(rates, 0, alpha[0] * u, u);
        for (std::size_t j = 1; j < rates.size(); ++j)
            r[j - 1] = q0 - exp_joint_lower_prob(rates, j, alpha[j] * u, u);
        return r;
    };
    sys.log_residual = [rates, u](std::span<const double> alpha) {
        auto lnq = [&](std::size_t i) {
            return -rates[i] * alpha[i] * u +
                   detail::log_or_neg_inf(erlang_cdf(rates, (1.0 - alpha[i]) * u));
        };
        std::vector<double> r(rates.size() - 1);
        const double q0 = lnq(0);
        for (std::size_t j = 1; j < rates.size(); ++j) r[j - 1] = q0 - lnq(j);
        return r;
    };
    return sys;
}

/// Optimality system for J: exp_joint_upper_prob equalized across branches.
inline ResidualSystem eizv_system(std::vector<double> rates, double u) {
    if (!(u > 0.0)) throw DomainError("eizv_system: u must be positive");
    auto coeff = erlang_coefficients(rates);
    ResidualSystem sys;
    sys.dim = static_cast<int>(rates.size());
    sys.name = "exponential_J";
    sys.residual = [rates, u](std::span<const double> alpha) {
        std::vector<double> r(rates.size() - 1);
        const double q0 = exp_joint_upper_prob(rates, 0, alpha[0] * u, u);
        for (std::size_t j = 1; j < rates.size(); ++j)
            r[j - 1] = q0 - exp_joint_upper_prob(rates, j, alpha[j] * u, u);
        return r;
    };
    sys.log_residual = [rates, coeff, u](std::span<const double> alpha) {
        auto lnq = [&](std::size_t i) {
            return -rates[i] * alpha[i] * u +
                   detail::log_erlang_survival(rates, coeff, (1.0 - alpha[i]) * u);
        };
        std::vector<double> r(rates.size() - 1);
        const double q0 = lnq(0);
        for (std::size_t j = 1; j < rates.size(); ++j) r[j - 1] = q0 - lnq(j);
        return r;
    };
    return sys;
}

// ---------------------------------------------------------------------------
// Independent Pareto (asymptotic regime)
// ---------------------------------------------------------------------------

/// u-free asymptotic I system: (alpha_i/b_i)^{-a} - (1/b_i)^{-a} equalized.
inline ResidualSystem pareto_asymptotic_I_system(double shape, std::vector<double> scales) {
    if (!(shape > 0.0)) throw DomainError("pareto_asymptotic_I_system: shape must be positive");
    for (double b : scales)
        if (!(b > 0.0)) throw DomainError("pareto_asymptotic_I_system: scales must be positive");
    if (scales.size() < 2) throw DomainError("pareto_asymptotic_I_system: need d >= 2");
    ResidualSystem sys;
    sys.dim = static_cast<int>(scales.size());
    sys.name = "pareto_asymptotic_I";
    auto value = [shape, scales](std::span<const double> alpha, std::size_t i) {
        // b_i^a (alpha_i^{-a} - 1), positive on the open simplex
        return std::pow(scales[i], shape) * std::expm1(-shape * std::log(alpha[i]));
    };
    sys.residual = [value, scales](std::span<const double> alpha) {
        std::vector<double> r(scales.size() - 1);
        const double v0 = value(alpha, 0);
        for (std::size_t j = 1; j < scales.size(); ++j) r[j - 1] = v0 - value(alpha, j);
        return r;
    };
    sys.log_residual = [shape, scales](std::span<const double> alpha) {
        auto lnv = [&](std::size_t i) {
            return shape * std::log(scales[i]) +
                   detail::log_or_neg_inf(std::expm1(-shape * std::log(alpha[i])));
        };
        std::vector<double> r(scales.size() - 1);
        const double v0 = lnv(0);
        for (std::size_t j = 1; j < scales.size(); ++j) r[j - 1] = v0 - lnv(j);
        return r;
    };
    return sys;
}

/// Asymptotic J-optimal fractions: everything to the uniquely largest scale.
inline std::vector<double> pareto_asymptotic_J(std::span<const double> scales) {
    std::size_t arg = 0;
    for (std::size_t i = 0; i < scales.size(); ++i) {
        if (!(scales[i] > 0.0)) throw DomainError("pareto_asymptotic_J: scales must be positive");
        if (scales[i] > scales[arg]) arg = i;
    }
    for (std::size_t i = 0; i < scales.size(); ++i)
        if (i != arg && std::fabs(scales[i] - scales[arg]) <= 1e-9 * scales[arg])
            throw TiedRiskiestBranch("pareto_asymptotic_J: largest scale is tied");
    std::vector<double> out(scales.size(), 0.0);
    out[arg] = 1.0;
    return out;
}

// ---------------------------------------------------------------------------
// Correlated Pareto mixture
// ---------------------------------------------------------------------------

namespace detail {

// log of P(X_i > u_i, S >= u) = sum_l A_l s(alpha_i beta_i + (1-alpha_i) beta_l)
// with the smallest argument factored out.
inline double mixture_log_upper(const CorrelatedParetoMixture& m,
                                std::span<const double> coeff, double alpha_i, std::size_t i,
                                double u) {
    const std::size_t d = m.rates.size();
    std::vector<double> args(d);
    double lead_arg = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < d; ++l) {
        args[l] = alpha_i * m.rates[i] + (1.0 - alpha_i) * m.rates[l];
        lead_arg = std::min(lead_arg, args[l]);
    }
    const double log_lead_base = std::log(m.mix_rate + lead_arg * u);
    double s = 0.0;
    for (std::size_t l = 0; l < d; ++l)
        s += coeff[l] * std::exp(-m.mix_shape * (std::log(m.mix_rate + args[l] * u) - log_lead_base));
    return -m.mix_shape * std::log1p(lead_arg * u / m.mix_rate) + log_or_neg_inf(s);
}

inline double mixture_log_lower(const CorrelatedParetoMixture& m,
                                std::span<const double> coeff, double alpha_i, std::size_t i,
                                double u) {
    const double lead_arg = m.rates[i] * alpha_i;
    const double log_lead_base = std::log(m.mix_rate + lead_arg * u);
    double bracket = 1.0;
    for (std::size_t l = 0; l < m.rates.size(); ++l) {
        const double mix_arg = alpha_i * m.rates[i] + (1.0 - alpha_i) * m.rates[l];
        bracket -= coeff[l] *
                   std::exp(-m.mix_shape * (std::log(m.mix_rate + mix_arg * u) - log_lead_base));
    }
    return -m.mix_shape * std::log1p(lead_arg * u / m.mix_rate) + log_or_neg_inf(bracket);
}

// Asymptotic variants: s is replaced by x -> x^{-a}; arguments are scale-free.
inline double mixture_asym_log_lower(const CorrelatedParetoMixture& m,
                                     std::span<const double> coeff, double alpha_i,
                                     std::size_t i) {
    const double log_lead = std::log(m.rates[i] * alpha_i);
    double bracket = 1.0;
    for (std::size_t l = 0; l < m.rates.size(); ++l) {
        const double mix_arg = alpha_i * m.rates[i] + (1.0 - alpha_i) * m.rates[l];
        bracket -= coeff[l] * std::exp(-m.mix_shape * (std::log(mix_arg) - log_lead));
    }
    return -m.mix_shape * log_lead + log_or_neg_inf(bracket);
}

inline double mixture_asym_log_upper(const CorrelatedParetoMixture& m,
                                     std::span<const double> coeff, double alpha_i,
                                     std::size_t i) {
    const std::size_t d = m.rates.size();
    std::vector<double> args(d);
    double lead_arg = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < d; ++l) {
        args[l] = alpha_i * m.rates[i] + (1.0 - alpha_i) * m.rates[l];
        lead_arg = std::min(lead_arg, args[l]);
    }
    const double log_lead = std::log(lead_arg);
    double s = 0.0;
    for (std::size_t l = 0; l < d; ++l)
        s += coeff[l] * std::exp(-m.mix_shape * (std::log(args[l]) - log_lead));
    return -m.mix_shape * log_lead + log_or_neg_inf(s);
}

template <class Lower, class LogLower>
ResidualSystem make_equalization_system(int d, std::string name, Lower&& lower,
                                        LogLower&& log_lower, std::vector<double> hint = {}) {
    ResidualSystem sys;
    sys.dim = d;
    sys.name = std::move(name);
    sys.hint = std::move(hint);
    sys.residual = [lower, d](std::span<const double> alpha) {
        std::vector<double> r(static_cast<std::size_t>(d) - 1);
        const double q0 = lower(alpha[0], 0);
        for (int j = 1; j < d; ++j)
            r[static_cast<std::size_t>(j) - 1] =
                q0 - lower(alpha[static_cast<std::size_t>(j)], static_cast<std::size_t>(j));
        return r;
    };
    sys.log_residual = [log_lower, d](std::span<const double> alpha) {
        std::vector<double> r(static_cast<std::size_t>(d) - 1);
        const double q0 = log_lower(alpha[0], 0);
        for (int j = 1; j < d; ++j)
            r[static_cast<std::size_t>(j) - 1] =
                q0 - log_lower(alpha[static_cast<std::size_t>(j)], static_cast<std::size_t>(j));
        return r;
    };
    return sys;
}

}  // namespace detail

/// I system for the mixture model; equalizes mixture_joint_lower_prob.
inline ResidualSystem mixture_I_system(const CorrelatedParetoMixture& model, double u) {
    if (!(u > 0.0)) throw DomainError("mixture_I_system: u must be positive");
    auto coeff = erlang_coefficients(model.rates);
    const int d = static_cast<int>(model.rates.size());
    return detail::make_equalization_system(
        d, "mixture_I",
        [model, u](double a, std::size_t i) { return mixture_joint_lower_prob(model, i, a * u, u); },
        [model, coeff, u](double a, std::size_t i) {
            return detail::mixture_log_lower(model, coeff, a, i, u);
        },
        asymptotic_exponential_I(model.rates));
}

/// J system for the mixture model; the lower probability is replaced by
/// sum_l A_l s(alpha_i beta_i + (1-alpha_i) beta_l).
inline ResidualSystem mixture_J_system(const CorrelatedParetoMixture& model, double u) {
    if (!(u > 0.0)) throw DomainError("mixture_J_system: u must be positive");
    auto coeff = erlang_coefficients(model.rates);
    const int d = static_cast<int>(model.rates.size());
    auto upper = [model, coeff, u](double a, std::size_t i) {
        return std::exp(detail::mixture_log_upper(model, coeff, a, i, u));
    };
    return detail::make_equalization_system(
        d, "mixture_J", upper,
        [model, coeff, u](double a, std::size_t i) {
            return detail::mixture_log_upper(model, coeff, a, i, u);
        });
}

/// u -> infinity limit of mixture_I_system (divide by s(1) and pass to the
/// limit: s becomes x -> x^{-a}).
inline ResidualSystem mixture_asymptotic_I_system(const CorrelatedParetoMixture& model) {
    auto coeff = erlang_coefficients(model.rates);
    const int d = static_cast<int>(model.rates.size());
    auto value = [model, coeff](double a, std::size_t i) {
        return std::exp(detail::mixture_asym_log_lower(model, coeff, a, i));
    };
    return detail::make_equalization_system(
        d, "mixture_asymptotic_I", value,
        [model, coeff](double a, std::size_t i) {
            return detail::mixture_asym_log_lower(model, coeff, a, i);
        },
        asymptotic_exponential_I(model.rates));
}

/// u -> infinity limit of mixture_J_system; unlike independent Pareto, the
/// mixture J allocation stays interior.
inline ResidualSystem mixture_asymptotic_J_system(const CorrelatedParetoMixture& model) {
    auto coeff = erlang_coefficients(model.rates);
    const int d = static_cast<int>(model.rates.size());
    auto value = [model, coeff](double a, std::size_t i) {
        return std::exp(detail::mixture_asym_log_upper(model, coeff, a, i));
    };
    return detail::make_equalization_system(
        d, "mixture_asymptotic_J", value,
        [model, coeff](double a, std::size_t i) {
            return detail::mixture_asym_log_upper(model, coeff, a, i);
        });
}

// ---------------------------------------------------------------------------
// Comonotonic risks and the local indicator
// ---------------------------------------------------------------------------

/// Comonotonic optimum: F_i(u_i) equal across branches. Finds t in (0,1) with
/// sum_i quantile_i(t) = u, then u_i = quantile_i(t). I, J and I_loc coincide.
inline Allocation comonotonic_allocation(std::span<const Marginal> marginals, double u) {
    if (marginals.empty()) throw DomainError("comonotonic_allocation: need at least one marginal");
    if (!(u > 0.0)) throw DomainError("comonotonic_allocation: u must be positive");
    auto excess = [&](double t) {
        double s = 0.0;
        for (const auto& m : marginals) s += quantile(m, t);
        return s - u;
    };
    const double lo = 1e-15, hi = 1.0 - 1e-15;
    if (!(excess(lo) < 0.0) || !(excess(hi) > 0.0))
        throw DomainError("comonotonic_allocation: equal-quantile root not bracketed in (0,1)");
    const double t = brent(excess, lo, hi, 1e-15, 1e-10 * std::max(u, 1.0));
    std::vector<double> caps(marginals.size());
    double total = 0.0;
    for (std::size_t i = 0; i < marginals.size(); ++i) {
        caps[i] = quantile(marginals[i], t);
        total += caps[i];
    }
    for (double& c : caps) c *= u / total;
    return Allocation(std::move(caps));
}

/// I_loc optimum: P(X_i > u_i) equal across branches — the same equal-quantile
/// system as the comonotonic allocation.
inline Allocation iloc_allocation(std::span<const Marginal> marginals, double u) {
    return comonotonic_allocation(marginals, u);
}

// ---------------------------------------------------------------------------
// Bivariate copula models
// ---------------------------------------------------------------------------

/// FGM I-residual at fraction beta = u_1/u, built from the appendix joint
/// CDFs: F_{X2,S}((1-beta)u, u) - F_{X1,S}(beta u, u). Equals the difference
/// of the two optimality-condition probabilities, so it shares the sign
/// convention of eizo_system and vanishes exactly at the optimum. At theta=0
/// it coincides with the d=2 independent-exponential residual.
inline double fgm_residual(double beta1, double beta2, double theta, double u, double beta_frac) {
    const FgmExponential model(beta1, beta2, theta);
    if (!(u > 0.0)) throw DomainError("fgm_residual: u must be positive");
    if (!(beta_frac > 0.0 && beta_frac < 1.0))
        throw DomainError("fgm_residual: beta_frac must lie in (0,1)");
    return fgm_joint_cdf_x2_s(model, (1.0 - beta_frac) * u, u) -
           fgm_joint_cdf_x1_s(model, beta_frac * u, u);
}

/// The same residual through the hand-expanded grouped-constant route, in the
/// h(x) = exp(-beta1 u x), alpha = beta2/beta1 notation. The beta-free terms
/// are grouped on the right-hand side; the difference from fgm_residual is
/// beta-independent (zero up to rounding). Kept as an algebraic cross-check.
inline double fgm_residual_expanded(double beta1, double beta2, double theta, double u,
                                    double beta_frac) {
    const FgmExponential model(beta1, beta2, theta);
    if (!(u > 0.0)) throw DomainError("fgm_residual_expanded: u must be positive");
    if (!(beta_frac > 0.0 && beta_frac < 1.0))
        throw DomainError("fgm_residual_expanded: beta_frac must lie in (0,1)");
    const double a = beta2 / beta1;
    const double b = beta_frac;
    const double th = theta;
    auto h = [&](double x) { return std::exp(-beta1 * u * x); };
    const double lhs = h(b) - h(a - a * b) +
                       (1.0 + th) * (1.0 + a) / (a - 1.0) * h(a + b - a * b) +
                       th * (1.0 + a) / (a - 1.0) * h(2 * a + 2 * b - 2 * a * b) -
                       th * (a + 2.0) / (a - 2.0) * h(a + 2 * b - a * b) -
                       th * (2.0 * a + 1.0) / (2.0 * a - 1.0) * h(2 * a + b - 2 * a * b);
    const double rhs = (1.0 + th) / (a - 1.0) * (h(a) + a * h(1)) +
                       th / (a - 1.0) * (h(2 * a) + a * h(2)) -
                       th / (a - 2.0) * (2.0 * h(a) + a * h(2)) -
                       th / (2.0 * a - 1.0) * (h(2 * a) + 2.0 * a * h(1));
    return lhs - rhs;
}

/// Marshall-Olkin I-residual at fraction beta = u_1/u, from the piecewise
/// joint CDF branches (common-shock atom included). lambda0 = 0 reduces to
/// the d=2 independent-exponential residual.
inline double mo_residual(double lambda0, double lambda1, double lambda2, double u,
                          double beta_frac) {
    const MarshallOlkin model(lambda0, lambda1, lambda2);
    if (!(u > 0.0)) throw DomainError("mo_residual: u must be positive");
    if (!(beta_frac > 0.0 && beta_frac < 1.0))
        throw DomainError("mo_residual: beta_frac must lie in (0,1)");
    return mo_joint_cdf_x2_s(model, (1.0 - beta_frac) * u, u) -
           mo_joint_cdf_x1_s(model, beta_frac * u, u);
}

}  // namespace riskalloc
