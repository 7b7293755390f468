#pragma once

#include <cmath>
#include <span>
#include <variant>
#include <vector>

#include "riskalloc/errors.hpp"
#include "riskalloc/marginals.hpp"
#include "riskalloc/rng.hpp"

namespace riskalloc {

// ---------------------------------------------------------------------------
// Model catalog
// ---------------------------------------------------------------------------

struct IndependentExponential {
    std::vector<double> rates;
    explicit IndependentExponential(std::vector<double> rates_) : rates(std::move(rates_)) {
        if (rates.size() < 2) throw DomainError("IndependentExponential: need d >= 2");
        for (double b : rates)
            if (!(b > 0.0)) throw DomainError("IndependentExponential: rates must be positive");
    }
};

struct IndependentPareto {
    double shape;
    std::vector<double> scales;
    IndependentPareto(double shape_, std::vector<double> scales_)
        : shape(shape_), scales(std::move(scales_)) {
        if (scales.size() < 2) throw DomainError("IndependentPareto: need d >= 2");
        if (!(shape > 0.0)) throw DomainError("IndependentPareto: shape must be positive");
        for (double b : scales)
            if (!(b > 0.0)) throw DomainError("IndependentPareto: scales must be positive");
    }
};

/// Exponentials with a common Gamma(mix_shape, mix_rate) rate multiplier;
/// marginals are ParetoLomax(mix_shape, mix_rate / rate_i).
struct CorrelatedParetoMixture {
    double mix_shape;
    double mix_rate;
    std::vector<double> rates;
    CorrelatedParetoMixture(double mix_shape_, double mix_rate_, std::vector<double> rates_)
        : mix_shape(mix_shape_), mix_rate(mix_rate_), rates(std::move(rates_)) {
        if (rates.size() < 2) throw DomainError("CorrelatedParetoMixture: need d >= 2");
        if (!(mix_shape > 0.0) || !(mix_rate > 0.0))
            throw DomainError("CorrelatedParetoMixture: mixing parameters must be positive");
        require_distinct_rates(rates);
    }
};

struct Comonotonic {
    std::vector<Marginal> marginals;
    explicit Comonotonic(std::vector<Marginal> marginals_) : marginals(std::move(marginals_)) {
        if (marginals.size() < 2) throw DomainError("Comonotonic: need d >= 2");
    }
};

/// Bivariate exponential marginals coupled by an FGM copula. The closed forms
/// divide by beta2 - 2*beta1, hence the beta1 < beta2/2 requirement.
struct FgmExponential {
    double beta1;
    double beta2;
    double theta;
    FgmExponential(double beta1_, double beta2_, double theta_)
        : beta1(beta1_), beta2(beta2_), theta(theta_) {
        if (!(beta1 > 0.0) || !(beta2 > 0.0))
            throw DomainError("FgmExponential: rates must be positive");
        if (!(beta1 < beta2 / 2.0))
            throw DomainError("FgmExponential: requires beta1 < beta2/2");
        if (!(std::fabs(theta) <= 1.0))
            throw DomainError("FgmExponential: theta must lie in [-1,1]");
    }
};

/// Common-shock model X_i = min(Y_i, Y_0), Y_i ~ Exp(lambda_i). Marginal rates
/// are beta_i = lambda_i + lambda_0; the joint law has an atom on the diagonal
/// with mass lambda_0 / (lambda_0 + lambda_1 + lambda_2).
struct MarshallOlkin {
    double lambda0;
    double lambda1;
    double lambda2;
    bool symmetric;  // lambda1 == lambda2 exactly

    MarshallOlkin(double lambda0_, double lambda1_, double lambda2_)
        : lambda0(lambda0_), lambda1(lambda1_), lambda2(lambda2_),
          symmetric(lambda1_ == lambda2_) {
        if (!(lambda0 >= 0.0)) throw DomainError("MarshallOlkin: lambda0 must be nonnegative");
        if (!(lambda1 > 0.0) || !(lambda2 > 0.0))
            throw DomainError("MarshallOlkin: lambda1, lambda2 must be positive");
        constexpr double eps = 1e-8;
        const double scale = lambda0 + lambda1 + lambda2;
        // Closed forms divide by beta1 - lambda2 and lambda1 - beta2.
        if (std::fabs(lambda0 + lambda1 - lambda2) <= eps * scale ||
            std::fabs(lambda1 - lambda2 - lambda0) <= eps * scale)
            throw SingularParameters("MarshallOlkin: |lambda1 - lambda2| too close to lambda0");
        if (!symmetric && std::fabs(lambda1 - lambda2) <= eps * scale)
            throw DomainError("MarshallOlkin: lambda1 and lambda2 must differ or be exactly equal");
    }

    double marginal_rate_1() const { return lambda1 + lambda0; }
    double marginal_rate_2() const { return lambda2 + lambda0; }
    double shock_sum() const { return lambda0 + lambda1 + lambda2; }
};

using JointModel = std::variant<IndependentExponential, IndependentPareto,
                                CorrelatedParetoMixture, Comonotonic, FgmExponential,
                                MarshallOlkin>;

inline int dimension(const JointModel& model) {
    return std::visit(
        [](const auto& m) -> int {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, IndependentExponential>) return static_cast<int>(m.rates.size());
            else if constexpr (std::is_same_v<T, IndependentPareto>) return static_cast<int>(m.scales.size());
            else if constexpr (std::is_same_v<T, CorrelatedParetoMixture>) return static_cast<int>(m.rates.size());
            else if constexpr (std::is_same_v<T, Comonotonic>) return static_cast<int>(m.marginals.size());
            else return 2;
        },
        model);
}

/// Analytic marginal of coordinate i.
inline Marginal marginal(const JointModel& model, std::size_t i) {
    return std::visit(
        [i](const auto& m) -> Marginal {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, IndependentExponential>) {
                return Exponential(m.rates.at(i));
            } else if constexpr (std::is_same_v<T, IndependentPareto>) {
                return ParetoLomax(m.shape, m.scales.at(i));
            } else if constexpr (std::is_same_v<T, CorrelatedParetoMixture>) {
                return ParetoLomax(m.mix_shape, m.mix_rate / m.rates.at(i));
            } else if constexpr (std::is_same_v<T, Comonotonic>) {
                return m.marginals.at(i);
            } else if constexpr (std::is_same_v<T, FgmExponential>) {
                if (i > 1) throw DomainError("marginal: index out of range");
                return Exponential(i == 0 ? m.beta1 : m.beta2);
            } else {
                if (i > 1) throw DomainError("marginal: index out of range");
                return Exponential(i == 0 ? m.marginal_rate_1() : m.marginal_rate_2());
            }
        },
        model);
}

inline bool has_finite_means(const JointModel& model) {
    const int d = dimension(model);
    for (int i = 0; i < d; ++i)
        if (!std::isfinite(mean(marginal(model, static_cast<std::size_t>(i))))) return false;
    return true;
}

// Informational dependence summaries; no algorithm consumes them.
inline double pearson_correlation(const FgmExponential& m) { return m.theta / 4.0; }
inline double pearson_correlation(const MarshallOlkin& m) { return m.lambda0 / m.shock_sum(); }

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

inline double draw_exponential(double rate, Stream& stream) {
    return -std::log1p(-stream.uniform_open()) / rate;
}

/// Marsaglia-Tsang; shapes below one are boosted via Gamma(a+1) * U^(1/a).
inline double draw_gamma(double shape, double rate, Stream& stream) {
    double boost = 1.0;
    if (shape < 1.0) {
        boost = std::pow(stream.uniform_open(), 1.0 / shape);
        shape += 1.0;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal_quantile(stream.uniform_open());
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = stream.uniform_open();
        if (u < 1.0 - 0.0331 * x * x * x * x) return boost * d * v / rate;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return boost * d * v / rate;
    }
}

/// Draws one loss vector. Deterministic given the stream state; the draw
/// order per model is part of the reproducibility contract.
inline void sample_vector(const JointModel& model, Stream& stream, std::span<double> out) {
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, IndependentExponential>) {
                for (std::size_t i = 0; i < m.rates.size(); ++i)
                    out[i] = draw_exponential(m.rates[i], stream);
            } else if constexpr (std::is_same_v<T, IndependentPareto>) {
                for (std::size_t i = 0; i < m.scales.size(); ++i)
                    out[i] = m.scales[i] * std::expm1(-std::log1p(-stream.uniform_open()) / m.shape);
            } else if constexpr (std::is_same_v<T, CorrelatedParetoMixture>) {
                const double theta = draw_gamma(m.mix_shape, m.mix_rate, stream);
                for (std::size_t i = 0; i < m.rates.size(); ++i)
                    out[i] = draw_exponential(m.rates[i] * theta, stream);
            } else if constexpr (std::is_same_v<T, Comonotonic>) {
                const double t = stream.uniform_open();
                for (std::size_t i = 0; i < m.marginals.size(); ++i)
                    out[i] = quantile(m.marginals[i], t);
            } else if constexpr (std::is_same_v<T, FgmExponential>) {
                // Conditional-distribution method: the conditional CDF of the
                // second copula coordinate is a quadratic, inverted exactly.
                const double v1 = stream.uniform_open();
                const double w = stream.uniform_open();
                const double a = m.theta * (1.0 - 2.0 * v1);
                const double disc = (1.0 + a) * (1.0 + a) - 4.0 * a * w;
                const double v2 = 2.0 * w / ((1.0 + a) + std::sqrt(disc));
                out[0] = -std::log1p(-v1) / m.beta1;
                out[1] = -std::log1p(-v2) / m.beta2;
            } else {
                const double y0 = m.lambda0 > 0.0
                                      ? draw_exponential(m.lambda0, stream)
                                      : std::numeric_limits<double>::infinity();
                const double y1 = draw_exponential(m.lambda1, stream);
                const double y2 = draw_exponential(m.lambda2, stream);
                out[0] = std::min(y1, y0);
                out[1] = std::min(y2, y0);
            }
        },
        model);
}

// ---------------------------------------------------------------------------
// Exact joint quantities
// ---------------------------------------------------------------------------

/// P(X_i > u_i, S <= u) for independent exponentials. By memorylessness this
/// equals exp(-beta_i u_i) * F_Erlang(u - u_i) with the full d-rate Erlang,
/// which is the cancellation-free form of the alternating h-sum
/// h(beta_i a_i) - sum_l A_l h(beta_l) h(a_i (beta_i - beta_l)).
inline double exp_joint_lower_prob(std::span<const double> rates, std::size_t i, double u_i,
                                   double u) {
    if (i >= rates.size()) throw DomainError("exp_joint_lower_prob: index out of range");
    if (!(u_i >= 0.0) || !(u_i <= u)) throw DomainError("exp_joint_lower_prob: need 0 <= u_i <= u");
    return std::exp(-rates[i] * u_i) * erlang_cdf(rates, u - u_i);
}

/// P(X_i > u_i, S >= u); complement of the lower probability within the
/// marginal survival.
inline double exp_joint_upper_prob(std::span<const double> rates, std::size_t i, double u_i,
                                   double u) {
    if (i >= rates.size()) throw DomainError("exp_joint_upper_prob: index out of range");
    if (!(u_i >= 0.0) || !(u_i <= u)) throw DomainError("exp_joint_upper_prob: need 0 <= u_i <= u");
    return std::exp(-rates[i] * u_i) * erlang_survival(rates, u - u_i);
}

namespace detail {

// F(x1,s,a,b) = int_0^x1 int_x^s ab e^{-(a-b)x} e^{-bt} dt dx. All exponents
// are <= 0 for 0 <= x1 <= s, so the four-term combinations cannot overflow.
inline double fgm_F_term(double x1, double s, double a, double b) {
    return 1.0 - std::exp(-a * x1) +
           a / (b - a) * (std::exp(-b * s) - std::exp(-b * s + (b - a) * x1));
}

inline double fgm_cdf_one_side(double x1, double s, double a, double b, double theta) {
    return (1.0 + theta) * fgm_F_term(x1, s, a, b) + theta * fgm_F_term(x1, s, 2 * a, 2 * b) -
           theta * fgm_F_term(x1, s, 2 * a, b) - theta * fgm_F_term(x1, s, a, 2 * b);
}

// Piecewise F_{X1,S} for the common-shock model, first coordinate having own
// rate l1. The two branches meet at s = 2 x1.
inline double mo_cdf_one_side(double x1, double s, double l0, double l1, double l2) {
    const double b1 = l1 + l0;
    const double b2 = l2 + l0;
    const double ls = l0 + l1 + l2;
    const double diag = l0 > 0.0 ? l0 / ls * -std::expm1(-ls * std::min(x1, 0.5 * s)) : 0.0;
    if (s >= 2.0 * x1) {
        return 2.0 * b1 * l2 / ((b1 - l2) * (b1 + l2)) * -std::expm1(-(b1 + l2) * x1) -
               l2 / (b1 - l2) * -std::expm1(-b1 * x1) -
               b1 / (b1 - l2) * (std::exp(-b1 * x1) - std::exp(-(b1 + l2) * x1)) +
               l1 / (l1 + b2) * -std::expm1(-(l1 + b2) * x1) -
               l1 / (l1 - b2) * std::exp(-b2 * s) +
               l1 / (l1 - b2) * std::exp(-(l1 - b2) * x1 - b2 * s) + diag;
    }
    return 2.0 * b1 * l2 / ((b1 - l2) * (b1 + l2)) * -std::expm1(-(b1 + l2) * 0.5 * s) -
           l2 / (b1 - l2) * -std::expm1(-b1 * x1) -
           b1 / (b1 - l2) * (std::exp(-b1 * x1) - std::exp(-(b1 - l2) * x1 - l2 * s)) +
           l1 / (l1 - b2) * -std::expm1(-b2 * s) -
           2.0 * l1 * b2 / ((l1 - b2) * (l1 + b2)) * -std::expm1(-(l1 + b2) * 0.5 * s) + diag;
}

}  // namespace detail

/// F_{X1,S}(x1, s) for the FGM model: the four-term combination
/// (1+theta) F(b1,b2) + theta F(2b1,2b2) - theta F(2b1,b2) - theta F(b1,2b2).
/// At theta = 0 this reduces term-by-term to the independence formula.
inline double fgm_joint_cdf_x1_s(const FgmExponential& m, double x1, double s) {
    if (!(x1 >= 0.0) || !(x1 <= s)) throw DomainError("fgm_joint_cdf_x1_s: need 0 <= x1 <= s");
    return detail::fgm_cdf_one_side(x1, s, m.beta1, m.beta2, m.theta);
}

/// F_{X2,S}(x2, s); same combination with the marginal roles swapped.
inline double fgm_joint_cdf_x2_s(const FgmExponential& m, double x2, double s) {
    if (!(x2 >= 0.0) || !(x2 <= s)) throw DomainError("fgm_joint_cdf_x2_s: need 0 <= x2 <= s");
    return detail::fgm_cdf_one_side(x2, s, m.beta2, m.beta1, m.theta);
}

/// F_{X1,S}(x1, s) for the Marshall-Olkin model, including the diagonal-atom
/// contribution lambda0/lambda_s (1 - e^{-lambda_s min(x1, s/2)}).
inline double mo_joint_cdf_x1_s(const MarshallOlkin& m, double x1, double s) {
    if (!(x1 >= 0.0) || !(x1 <= s)) throw DomainError("mo_joint_cdf_x1_s: need 0 <= x1 <= s");
    return detail::mo_cdf_one_side(x1, s, m.lambda0, m.lambda1, m.lambda2);
}

inline double mo_joint_cdf_x2_s(const MarshallOlkin& m, double x2, double s) {
    if (!(x2 >= 0.0) || !(x2 <= s)) throw DomainError("mo_joint_cdf_x2_s: need 0 <= x2 <= s");
    return detail::mo_cdf_one_side(x2, s, m.lambda0, m.lambda2, m.lambda1);
}

/// P(X_i > u_i, S <= u) for the Gamma-mixed exponentials:
/// s(beta_i a_i) - sum_l A_l s(a_i beta_i + (1-a_i) beta_l), s(x) = (1+xu/b)^{-a},
/// evaluated in ratio form so that large mixing shapes stay finite.
inline double mixture_joint_lower_prob(const CorrelatedParetoMixture& m, std::size_t i,
                                       double u_i, double u) {
    if (i >= m.rates.size()) throw DomainError("mixture_joint_lower_prob: index out of range");
    if (!(u_i >= 0.0) || !(u_i <= u)) throw DomainError("mixture_joint_lower_prob: need 0 <= u_i <= u");
    const auto coeff = erlang_coefficients(m.rates);
    const double alpha_i = u > 0.0 ? u_i / u : 0.0;
    const double lead_arg = m.rates[i] * alpha_i;
    const double log_lead_base = std::log(m.mix_rate + lead_arg * u);
    double bracket = 1.0;
    for (std::size_t l = 0; l < m.rates.size(); ++l) {
        const double mix_arg = alpha_i * m.rates[i] + (1.0 - alpha_i) * m.rates[l];
        bracket -= coeff[l] *
                   std::exp(-m.mix_shape * (std::log(m.mix_rate + mix_arg * u) - log_lead_base));
    }
    const double lead = std::exp(-m.mix_shape * std::log1p(lead_arg * u / m.mix_rate));
    return std::clamp(lead * bracket, 0.0, 1.0);
}

}  // namespace riskalloc
