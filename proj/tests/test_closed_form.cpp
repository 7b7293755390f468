#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "riskalloc/closed_form.hpp"
#include "riskalloc/indicators.hpp"
#include "riskalloc/rootfind.hpp"
#include "riskalloc/solvers.hpp"

using namespace riskalloc;

namespace {

std::vector<double> bivariate(double a1) { return {a1, 1.0 - a1}; }

// Monte Carlo cross-check: the residual is the difference of the two
// optimality-condition probabilities.
void check_residual_is_condition_gap(const JointModel& model, const ResidualSystem& sys,
                                     ConditionSide side, double u,
                                     const std::vector<double>& alpha, std::uint64_t n,
                                     std::uint64_t seed) {
    std::vector<double> caps(alpha.size());
    for (std::size_t i = 0; i < alpha.size(); ++i) caps[i] = alpha[i] * u;
    const Allocation alloc(caps);
    const auto p0 = estimate_condition(model, 0, alloc, side, n, seed);
    const auto res = sys.residual(alpha);
    for (std::size_t j = 1; j < alpha.size(); ++j) {
        const auto pj = estimate_condition(model, j, alloc, side, n, seed);
        const double se = std::hypot(p0.std_error, pj.std_error);
        INFO(sys.name << " j=" << j);
        CHECK(std::fabs(res[j - 1] - (p0.value - pj.value)) <= 4.0 * se);
    }
}

}  // namespace

TEST_CASE("asymptotic exponential allocations") {
    const std::vector<double> r1 = {0.05, 0.25};
    const auto a1 = asymptotic_exponential_I(r1);
    CHECK_THAT(a1[0], Catch::Matchers::WithinAbs(5.0 / 6.0, 1e-15));
    CHECK_THAT(a1[1], Catch::Matchers::WithinAbs(1.0 / 6.0, 1e-15));

    const std::vector<double> r2 = {0.5, 1.0, 2.0};
    const auto a2 = asymptotic_exponential_I(r2);
    CHECK_THAT(a2[0], Catch::Matchers::WithinAbs(4.0 / 7.0, 1e-15));
    CHECK_THAT(a2[1], Catch::Matchers::WithinAbs(2.0 / 7.0, 1e-15));
    CHECK_THAT(a2[2], Catch::Matchers::WithinAbs(1.0 / 7.0, 1e-15));

    const std::vector<double> req = {2.0, 2.0, 2.0};
    const auto aeq = asymptotic_exponential_I(req);
    for (double a : aeq) CHECK_THAT(a, Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-15));

    CHECK(asymptotic_exponential_J(r1) == std::vector<double>{1.0, 0.0});
    const std::vector<double> rperm = {2.0, 1.0, 0.5};
    CHECK(asymptotic_exponential_J(rperm) == std::vector<double>{0.0, 0.0, 1.0});
    const std::vector<double> tied = {1.0, 1.0};
    CHECK_THROWS_AS(asymptotic_exponential_J(tied), TiedRiskiestBranch);
}

TEST_CASE("eizo system") {
    const std::vector<double> rates = {1.0, 2.0};
    auto sys = eizo_system(rates, 10.0);

    SECTION("root zeroes the residual") {
        const auto root = solve_simplex(sys);
        CHECK(std::fabs(sys.residual(root)[0]) < 1e-10);
        CHECK_THAT(root[0], Catch::Matchers::WithinAbs(0.6643873520536243, 1e-8));
    }

    SECTION("asymptotic point is nearly stationary at large u") {
        auto far = eizo_system(rates, 100.0);
        const auto res = far.residual(bivariate(2.0 / 3.0));
        CHECK(std::fabs(res[0]) < 1e-3);
    }

    SECTION("residual equals exp_joint_lower_prob differences") {
        for (double a1 = 0.1; a1 < 1.0; a1 += 0.1) {
            const auto r = sys.residual(bivariate(a1));
            const double direct = exp_joint_lower_prob(rates, 0, a1 * 10.0, 10.0) -
                                  exp_joint_lower_prob(rates, 1, (1.0 - a1) * 10.0, 10.0);
            CHECK(r[0] == direct);
        }
    }

    SECTION("equal rates are rejected") {
        CHECK_THROWS_AS(eizo_system({1.0, 1.0}, 10.0), DistinctRatesRequired);
    }

    SECTION("monte carlo stationarity gap at a probe point") {
        check_residual_is_condition_gap(IndependentExponential(rates), sys,
                                        ConditionSide::lower, 10.0, bivariate(0.6), 400000, 21);
    }
}

TEST_CASE("eizv system") {
    const std::vector<double> rates = {0.5, 1.0, 2.0};

    SECTION("monotone approach to the degenerate limit") {
        const auto a100 = solve_simplex(eizv_system(rates, 100.0));
        const auto a500 = solve_simplex(eizv_system(rates, 500.0));
        CHECK(a500[0] > a100[0]);
    }

    SECTION("equal rates are rejected") {
        CHECK_THROWS_AS(eizv_system({1.0, 1.0, 1.0}, 10.0), DistinctRatesRequired);
    }

    SECTION("monte carlo stationarity gap at a probe point") {
        const std::vector<double> r2 = {1.0, 2.0};
        auto sys = eizv_system(r2, 3.0);
        check_residual_is_condition_gap(IndependentExponential(r2), sys, ConditionSide::upper,
                                        3.0, bivariate(0.55), 400000, 22);
    }
}

TEST_CASE("pareto asymptotic I system") {
    auto sys = pareto_asymptotic_I_system(2.0, {1.0, 2.0});

    SECTION("root against an independent bisection oracle") {
        const auto root = solve_simplex(sys);
        const double oracle = bisect(
            [](double a1) {
                return 1.0 / (a1 * a1) - 4.0 / ((1.0 - a1) * (1.0 - a1)) - (1.0 - 4.0);
            },
            1e-9, 1.0 - 1e-9, 1e-12);
        CHECK_THAT(root[0], Catch::Matchers::WithinAbs(oracle, 1e-9));
        CHECK_THAT(root[0], Catch::Matchers::WithinAbs(0.3731802866302704, 1e-6));
        // riskier branch (larger scale) gets more capital
        CHECK(root[1] > root[0]);
    }

    SECTION("equal scales solve at uniform") {
        auto even = pareto_asymptotic_I_system(2.0, {3.0, 3.0, 3.0});
        const std::vector<double> uniform = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
        for (double r : even.residual(uniform)) CHECK_THAT(r, Catch::Matchers::WithinAbs(0.0, 1e-12));
    }
}

TEST_CASE("pareto asymptotic J allocation") {
    const std::vector<double> b1 = {3.0, 1.0};
    CHECK(pareto_asymptotic_J(b1) == std::vector<double>{1.0, 0.0});
    const std::vector<double> b2 = {1.0, 3.0};
    CHECK(pareto_asymptotic_J(b2) == std::vector<double>{0.0, 1.0});
    const std::vector<double> tied = {2.0, 2.0};
    CHECK_THROWS_AS(pareto_asymptotic_J(tied), TiedRiskiestBranch);
}

TEST_CASE("mixture systems") {
    const CorrelatedParetoMixture model(3.0, 1.0, {1.0, 2.0});

    SECTION("I residual equals mixture_joint_lower_prob differences") {
        auto sys = mixture_I_system(model, 5.0);
        for (double a1 = 0.1; a1 < 1.0; a1 += 0.1) {
            const auto r = sys.residual(bivariate(a1));
            const double direct = mixture_joint_lower_prob(model, 0, a1 * 5.0, 5.0) -
                                  mixture_joint_lower_prob(model, 1, (1.0 - a1) * 5.0, 5.0);
            CHECK(r[0] == direct);
        }
    }

    SECTION("finite-u residual over s(1) converges to the asymptotic residual") {
        auto asym = mixture_asymptotic_I_system(model);
        const std::vector<double> probe = bivariate(0.45);
        const double target = asym.residual(probe)[0];
        double prev_gap = std::numeric_limits<double>::infinity();
        for (double u : {1e2, 1e4}) {
            auto sys = mixture_I_system(model, u);
            const double s1 = std::pow(1.0 + u / model.mix_rate, -model.mix_shape);
            const double gap = std::fabs(sys.residual(probe)[0] / s1 - target);
            CHECK(gap < prev_gap);
            prev_gap = gap;
        }
        CHECK(prev_gap < 1e-3 * std::fabs(target));
    }

    SECTION("monte carlo stationarity gaps at a probe point") {
        auto sysI = mixture_I_system(model, 5.0);
        check_residual_is_condition_gap(JointModel(model), sysI, ConditionSide::lower, 5.0,
                                        bivariate(0.55), 400000, 23);
        auto sysJ = mixture_J_system(model, 5.0);
        check_residual_is_condition_gap(JointModel(model), sysJ, ConditionSide::upper, 5.0,
                                        bivariate(0.55), 400000, 24);
    }

    SECTION("permutation equivariance of roots") {
        const CorrelatedParetoMixture swapped(3.0, 1.0, {2.0, 1.0});
        const auto a = solve_simplex(mixture_I_system(model, 5.0));
        const auto b = solve_simplex(mixture_I_system(swapped, 5.0));
        CHECK_THAT(a[0], Catch::Matchers::WithinAbs(b[1], 1e-9));
        CHECK_THAT(a[1], Catch::Matchers::WithinAbs(b[0], 1e-9));
    }

    SECTION("asymptotic J root for d = 3 converges") {
        const CorrelatedParetoMixture m3(3.0, 1.0, {0.5, 1.0, 2.0});
        const auto root = solve_simplex(mixture_asymptotic_J_system(m3));
        const auto res = mixture_asymptotic_J_system(m3).log_residual(root);
        for (double r : res) CHECK(std::fabs(r) <= 1e-10);
        // interior, unlike the independent-Pareto degenerate limit
        for (double a : root) CHECK(a > 0.01);
    }
}

TEST_CASE("comonotonic allocation closed forms") {
    SECTION("exponential") {
        const std::vector<Marginal> ms = {Exponential(0.05), Exponential(0.25)};
        const auto alloc = comonotonic_allocation(ms, 50.0);
        CHECK_THAT(alloc.capitals[0], Catch::Matchers::WithinAbs(125.0 / 3.0, 1e-9));
        CHECK_THAT(alloc.capitals[1], Catch::Matchers::WithinAbs(25.0 / 3.0, 1e-9));
    }
    SECTION("log-normal") {
        const std::vector<Marginal> ms = {LogNormal(0.0, 0.5), LogNormal(std::log(2.0), 0.5)};
        const auto alloc = comonotonic_allocation(ms, 3.0);
        CHECK_THAT(alloc.capitals[0], Catch::Matchers::WithinAbs(1.0, 1e-9));
        CHECK_THAT(alloc.capitals[1], Catch::Matchers::WithinAbs(2.0, 1e-9));
    }
    SECTION("pareto with common shape") {
        const std::vector<Marginal> ms = {ParetoLomax(2.0, 1.0), ParetoLomax(2.0, 3.0)};
        const auto alloc = comonotonic_allocation(ms, 8.0);
        CHECK_THAT(alloc.capitals[0], Catch::Matchers::WithinAbs(2.0, 1e-9));
        CHECK_THAT(alloc.capitals[1], Catch::Matchers::WithinAbs(6.0, 1e-9));
    }
    SECTION("equalized cdf levels") {
        const std::vector<Marginal> ms = {Exponential(0.1), GammaDist(2.0, 0.5),
                                          ParetoLomax(2.5, 4.0)};
        const auto alloc = comonotonic_allocation(ms, 30.0);
        CHECK_THAT(alloc.total, Catch::Matchers::WithinAbs(30.0, 1e-9 * 30.0));
        const double level = cdf(ms[0], alloc.capitals[0]);
        for (std::size_t i = 1; i < ms.size(); ++i)
            CHECK_THAT(cdf(ms[i], alloc.capitals[i]), Catch::Matchers::WithinAbs(level, 1e-9));
    }
}

TEST_CASE("iloc allocation") {
    SECTION("identical to the comonotonic allocation") {
        const std::vector<Marginal> ms = {Exponential(0.05), GammaDist(2.0, 0.3),
                                          LogNormal(1.0, 0.6)};
        const auto a = iloc_allocation(ms, 40.0);
        const auto b = comonotonic_allocation(ms, 40.0);
        for (std::size_t i = 0; i < ms.size(); ++i)
            CHECK_THAT(a.capitals[i], Catch::Matchers::WithinAbs(b.capitals[i], 1e-12));
    }
    SECTION("independent pareto with common shape splits by scale") {
        const std::vector<Marginal> ms = {ParetoLomax(2.0, 1.0), ParetoLomax(2.0, 2.0),
                                          ParetoLomax(2.0, 5.0)};
        const auto a = iloc_allocation(ms, 16.0);
        CHECK_THAT(a.capitals[0], Catch::Matchers::WithinAbs(2.0, 1e-8));
        CHECK_THAT(a.capitals[1], Catch::Matchers::WithinAbs(4.0, 1e-8));
        CHECK_THAT(a.capitals[2], Catch::Matchers::WithinAbs(10.0, 1e-8));
    }
    SECTION("independent exponentials split by inverse rate") {
        const std::vector<Marginal> ms = {Exponential(0.5), Exponential(1.0), Exponential(2.0)};
        const auto a = iloc_allocation(ms, 7.0);
        CHECK_THAT(a.capitals[0], Catch::Matchers::WithinAbs(4.0, 1e-8));
        CHECK_THAT(a.capitals[1], Catch::Matchers::WithinAbs(2.0, 1e-8));
        CHECK_THAT(a.capitals[2], Catch::Matchers::WithinAbs(1.0, 1e-8));
    }
}

TEST_CASE("fgm residual") {
    SECTION("theta = 0 equals the bivariate exponential residual") {
        const std::vector<double> rates = {0.05, 0.25};
        auto sys = eizo_system(rates, 50.0);
        for (int k = 1; k <= 99; ++k) {
            const double b = k / 100.0;
            CHECK_THAT(fgm_residual(0.05, 0.25, 0.0, 50.0, b),
                       Catch::Matchers::WithinAbs(sys.residual(bivariate(b))[0], 1e-9));
        }
    }

    SECTION("solved root zeroes the residual") {
        const FgmExponential model(0.05, 0.25, 0.5);
        const double root = fgm_optimal_fraction(model, 50.0);
        CHECK(std::fabs(fgm_residual(0.05, 0.25, 0.5, 50.0, root)) < 1e-10);
    }

    SECTION("grouped-constant expansion differs by a beta-independent constant") {
        for (double theta : {-1.0, -0.3, 0.0, 0.5, 1.0}) {
            const double ref = fgm_residual(0.05, 0.25, theta, 50.0, 0.5) -
                               fgm_residual_expanded(0.05, 0.25, theta, 50.0, 0.5);
            for (int k = 1; k <= 99; ++k) {
                const double b = k / 100.0;
                const double diff = fgm_residual(0.05, 0.25, theta, 50.0, b) -
                                    fgm_residual_expanded(0.05, 0.25, theta, 50.0, b);
                CHECK_THAT(diff, Catch::Matchers::WithinAbs(ref, 1e-9));
            }
        }
    }

    SECTION("stationarity of the root against simulation") {
        const FgmExponential model(0.05, 0.25, 0.8);
        const double root = fgm_optimal_fraction(model, 50.0);
        std::vector<double> alpha = bivariate(root);
        check_residual_is_condition_gap(
            JointModel(model),
            ResidualSystem{2, "fgm",
                           [&](std::span<const double> a) {
                               return std::vector<double>{
                                   fgm_residual(0.05, 0.25, 0.8, 50.0, a[0])};
                           },
                           nullptr,
                           {}},
            ConditionSide::lower, 50.0, alpha, 1000000, 25);
    }

    SECTION("invalid parameters") {
        CHECK_THROWS_AS(fgm_residual(0.2, 0.25, 0.5, 50.0, 0.5), DomainError);
        CHECK_THROWS_AS(fgm_residual(0.05, 0.25, 0.5, 50.0, 1.5), DomainError);
    }
}

TEST_CASE("marshall-olkin residual") {
    SECTION("lambda0 = 0 equals the bivariate exponential residual") {
        const std::vector<double> rates = {0.05, 0.25};
        auto sys = eizo_system(rates, 50.0);
        for (int k = 1; k <= 99; ++k) {
            const double b = k / 100.0;
            CHECK_THAT(mo_residual(0.0, 0.05, 0.25, 50.0, b),
                       Catch::Matchers::WithinAbs(sys.residual(bivariate(b))[0], 1e-9));
        }
    }

    SECTION("symmetric marginals give the even split") {
        const MarshallOlkin sym(0.1, 0.2, 0.2);
        CHECK(mo_optimal_fraction(sym, 50.0) == 0.5);
        // and the residual indeed vanishes there
        CHECK_THAT(mo_residual(0.1, 0.2, 0.2, 50.0, 0.5), Catch::Matchers::WithinAbs(0.0, 1e-12));
    }

    SECTION("root ordering follows the riskier branch under both orderings") {
        const double hi = mo_optimal_fraction(MarshallOlkin(0.02, 0.05, 0.25), 50.0);
        CHECK(hi > 0.5);  // branch 1 riskier (smaller own rate)
        const double lo = mo_optimal_fraction(MarshallOlkin(0.02, 0.25, 0.05), 50.0);
        CHECK_THAT(lo, Catch::Matchers::WithinAbs(1.0 - hi, 1e-9));
    }

    SECTION("stationarity of the root against simulation") {
        const MarshallOlkin model(0.02, 0.05, 0.25);
        const double root = mo_optimal_fraction(model, 50.0);
        check_residual_is_condition_gap(
            JointModel(model),
            ResidualSystem{2, "mo",
                           [&](std::span<const double> a) {
                               return std::vector<double>{
                                   mo_residual(0.02, 0.05, 0.25, 50.0, a[0])};
                           },
                           nullptr,
                           {}},
            ConditionSide::lower, 50.0, bivariate(root), 1000000, 26);
    }
}

TEST_CASE("scale homogeneity of exponential roots") {
    const std::vector<double> rates = {0.5, 1.0, 2.0};
    std::vector<double> scaled = rates;
    for (double& r : scaled) r /= 10.0;
    const auto a = solve_simplex(eizo_system(rates, 20.0));
    const auto b = solve_simplex(eizo_system(scaled, 200.0));
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK_THAT(a[i], Catch::Matchers::WithinAbs(b[i], 1e-9));
}

TEST_CASE("monotonicity at roots: riskier branch gets more capital") {
    const std::vector<double> rates = {0.5, 1.0, 2.0};
    const auto a = solve_simplex(eizo_system(rates, 30.0));
    CHECK(a[0] >= a[1]);
    CHECK(a[1] >= a[2]);
    const auto p = solve_simplex(pareto_asymptotic_I_system(2.0, {1.0, 2.0, 4.0}));
    CHECK(p[2] >= p[1]);
    CHECK(p[1] >= p[0]);
}
