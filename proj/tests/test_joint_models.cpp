#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "riskalloc/joint_models.hpp"
#include "riskalloc/rng.hpp"

using namespace riskalloc;

namespace {

// Bernoulli agreement of an empirical event frequency with an exact value.
void check_within_se(double phat, double p, std::uint64_t n, double k = 4.0) {
    const double se = std::sqrt(std::max(p * (1.0 - p), 1e-12) / static_cast<double>(n));
    INFO("phat=" << phat << " p=" << p << " se=" << se);
    CHECK(std::fabs(phat - p) <= k * se);
}

template <class Event>
double frequency(const JointModel& model, std::uint64_t n, std::uint64_t seed, Event&& event) {
    Stream stream(seed, 0);
    std::vector<double> x(static_cast<std::size_t>(dimension(model)));
    double count = 0.0;
    for (std::uint64_t k = 0; k < n; ++k) {
        sample_vector(model, stream, x);
        if (event(x)) count += 1.0;
    }
    return count / static_cast<double>(n);
}

}  // namespace

TEST_CASE("model validation") {
    CHECK_THROWS_AS(IndependentExponential({1.0}), DomainError);
    CHECK_THROWS_AS(IndependentExponential({1.0, -2.0}), DomainError);
    CHECK_THROWS_AS(CorrelatedParetoMixture(3.0, 1.0, {1.0, 1.0}), DistinctRatesRequired);
    CHECK_THROWS_AS(FgmExponential(0.2, 0.25, 0.5), DomainError);   // beta1 >= beta2/2
    CHECK_THROWS_AS(FgmExponential(0.05, 0.25, 1.5), DomainError);  // |theta| > 1
    CHECK_NOTHROW(FgmExponential(0.05, 0.25, -1.0));
    // lambda0 equals |lambda1 - lambda2|: singular denominators
    CHECK_THROWS_AS(MarshallOlkin(0.2, 0.05, 0.25), SingularParameters);
    CHECK_THROWS_AS(MarshallOlkin(0.0, 0.1, 0.1 + 1e-12), SingularParameters);
    CHECK_THROWS_AS(MarshallOlkin(0.05, 0.1, 0.1 + 1e-12), DomainError);  // near-tie
    CHECK_NOTHROW(MarshallOlkin(0.1, 0.2, 0.2));  // exact symmetry is allowed
    CHECK(MarshallOlkin(0.1, 0.2, 0.2).symmetric);
    CHECK_FALSE(MarshallOlkin(0.1, 0.05, 0.1).symmetric);
}

TEST_CASE("informational correlations") {
    CHECK(pearson_correlation(FgmExponential(0.05, 0.25, 0.8)) == 0.2);
    CHECK_THAT(pearson_correlation(MarshallOlkin(0.1, 0.05, 0.1)),
               Catch::Matchers::WithinAbs(0.4, 1e-15));
}

TEST_CASE("comonotonic sampling with identical marginals gives equal coordinates") {
    const JointModel model = Comonotonic({Exponential(0.7), Exponential(0.7)});
    Stream stream(5, 0);
    std::vector<double> x(2);
    for (int k = 0; k < 1000; ++k) {
        sample_vector(model, stream, x);
        CHECK(x[0] == x[1]);
    }
}

TEST_CASE("marshall-olkin tie frequency equals the diagonal atom") {
    const double l0 = 1.0, l1 = 0.05, l2 = 0.1;
    const JointModel model = MarshallOlkin(l0, l1, l2);
    const std::uint64_t n = 1000000;
    const double phat =
        frequency(model, n, 99, [](std::span<const double> x) { return x[0] == x[1]; });
    check_within_se(phat, l0 / (l0 + l1 + l2), n);
}

TEST_CASE("each marginal of sample_vector matches the analytic marginal") {
    const std::vector<JointModel> models = {
        IndependentExponential({0.5, 1.0, 2.0}),
        IndependentPareto(2.0, {1.0, 2.0}),
        CorrelatedParetoMixture(3.0, 1.0, {1.0, 2.0}),
        Comonotonic({Exponential(0.05), ParetoLomax(2.0, 3.0)}),
        FgmExponential(0.05, 0.25, 0.5),
        MarshallOlkin(0.1, 0.05, 0.1),
    };
    const std::uint64_t n = 1000000;
    for (const auto& model : models) {
        const int d = dimension(model);
        Stream stream(4242, 0);
        std::vector<double> x(static_cast<std::size_t>(d));
        std::vector<std::vector<double>> draws(static_cast<std::size_t>(d),
                                               std::vector<double>(n));
        for (std::uint64_t k = 0; k < n; ++k) {
            sample_vector(model, stream, x);
            for (int i = 0; i < d; ++i) draws[static_cast<std::size_t>(i)][k] = x[static_cast<std::size_t>(i)];
        }
        for (int i = 0; i < d; ++i) {
            const Marginal mi = marginal(model, static_cast<std::size_t>(i));
            for (int g = 1; g <= 10; ++g) {
                const double xq = quantile(mi, g / 11.0);
                const double p = survival(mi, xq);
                double count = 0.0;
                for (double v : draws[static_cast<std::size_t>(i)]) count += (v > xq) ? 1.0 : 0.0;
                check_within_se(count / static_cast<double>(n), p, n);
            }
        }
    }
}

TEST_CASE("exp_joint_lower_prob closed form") {
    const std::vector<double> rates = {1.0, 2.0};
    // u_i = 0 reduces to P(S <= u)
    CHECK_THAT(exp_joint_lower_prob(rates, 0, 0.0, 3.0),
               Catch::Matchers::WithinAbs(1.0 - erlang_survival(rates, 3.0), 1e-14));
    // u_i = u forces an empty event for positive risks
    CHECK(exp_joint_lower_prob(rates, 0, 3.0, 3.0) <= 1e-12);

    // literal alternating h-sum from the optimality system
    const double u = 3.0, ui = 1.0;
    const auto coeff = erlang_coefficients(rates);
    const double ai = ui / u;
    double literal = std::exp(-u * rates[0] * ai);
    for (std::size_t l = 0; l < rates.size(); ++l)
        literal -= coeff[l] * std::exp(-u * (rates[l] + ai * (rates[0] - rates[l])));
    CHECK_THAT(exp_joint_lower_prob(rates, 0, ui, u), Catch::Matchers::WithinAbs(literal, 1e-12));

    // simulation oracle
    const JointModel model = IndependentExponential(rates);
    const std::uint64_t n = 2000000;
    const double phat = frequency(model, n, 7, [&](std::span<const double> x) {
        return x[0] > ui && x[0] + x[1] <= u;
    });
    check_within_se(phat, exp_joint_lower_prob(rates, 0, ui, u), n);

    // lower + upper partition the marginal survival
    CHECK_THAT(exp_joint_lower_prob(rates, 0, ui, u) + exp_joint_upper_prob(rates, 0, ui, u),
               Catch::Matchers::WithinAbs(std::exp(-rates[0] * ui), 1e-12));

    CHECK_THROWS_AS(exp_joint_lower_prob(std::vector<double>{1.0, 1.0}, 0, 1.0, 3.0),
                    DistinctRatesRequired);
    CHECK_THROWS_AS(exp_joint_lower_prob(rates, 0, 4.0, 3.0), DomainError);
}

TEST_CASE("fgm joint cdf") {
    const FgmExponential model(0.05, 0.25, 0.5);

    SECTION("theta = 0 equals the independence term exactly") {
        const FgmExponential indep(0.05, 0.25, 0.0);
        for (double x1 : {5.0, 20.0, 40.0}) {
            for (double s : {45.0, 60.0, 90.0}) {
                const double combined = fgm_joint_cdf_x1_s(indep, x1, s);
                const double independence = detail::fgm_F_term(x1, s, 0.05, 0.25);
                CHECK(combined == independence);
            }
        }
    }

    SECTION("limits") {
        CHECK_THAT(fgm_joint_cdf_x1_s(model, 1e7, 1e9), Catch::Matchers::WithinAbs(1.0, 1e-9));
        CHECK(fgm_joint_cdf_x1_s(model, 0.0, 10.0) == 0.0);
        CHECK_THROWS_AS(fgm_joint_cdf_x1_s(model, 10.0, 5.0), DomainError);
    }

    SECTION("monotone in both arguments") {
        double prev = 0.0;
        for (double x1 = 2.0; x1 <= 40.0; x1 += 2.0) {
            const double v = fgm_joint_cdf_x1_s(model, x1, 50.0);
            CHECK(v >= prev);
            prev = v;
        }
        prev = 0.0;
        for (double s = 20.0; s <= 200.0; s += 5.0) {
            const double v = fgm_joint_cdf_x1_s(model, 20.0, s);
            CHECK(v >= prev);
            prev = v;
        }
    }

    SECTION("simulation oracle at x1=20, s=50") {
        const std::uint64_t n = 2000000;
        const double exact = fgm_joint_cdf_x1_s(model, 20.0, 50.0);
        const double phat = frequency(JointModel(model), n, 11, [](std::span<const double> x) {
            return x[0] <= 20.0 && x[0] + x[1] <= 50.0;
        });
        check_within_se(phat, exact, n);
    }
}

TEST_CASE("marshall-olkin joint cdf") {
    const MarshallOlkin model(0.1, 0.05, 0.1);

    SECTION("branches agree at the interface s = 2 x1") {
        for (double x1 : {1.0, 5.0, 10.0, 25.0}) {
            const double below = detail::mo_cdf_one_side(x1, 2.0 * x1 - 1e-9, 0.1, 0.05, 0.1);
            const double above = detail::mo_cdf_one_side(x1, 2.0 * x1 + 1e-9, 0.1, 0.05, 0.1);
            CHECK_THAT(below, Catch::Matchers::WithinAbs(above, 1e-9));
        }
    }

    SECTION("x1 = 0 gives zero mass") {
        CHECK_THAT(mo_joint_cdf_x1_s(model, 0.0, 10.0), Catch::Matchers::WithinAbs(0.0, 1e-14));
    }

    SECTION("simulation oracle, both branches") {
        const std::uint64_t n = 2000000;
        for (auto [x1, s] : {std::pair{10.0, 25.0}, std::pair{10.0, 15.0}}) {
            const double exact = mo_joint_cdf_x1_s(model, x1, s);
            const double phat =
                frequency(JointModel(model), n, 13, [x1 = x1, s = s](std::span<const double> x) {
                    return x[0] <= x1 && x[0] + x[1] <= s;
                });
            check_within_se(phat, exact, n);
        }
    }

    SECTION("lambda0 = 0 matches independent exponential simulation") {
        const MarshallOlkin indep(0.0, 0.05, 0.25);
        const std::uint64_t n = 1000000;
        const double exact = mo_joint_cdf_x1_s(indep, 20.0, 50.0);
        const JointModel ie = IndependentExponential({0.05, 0.25});
        const double phat = frequency(ie, n, 17, [](std::span<const double> x) {
            return x[0] <= 20.0 && x[0] + x[1] <= 50.0;
        });
        check_within_se(phat, exact, n);
    }

    SECTION("monotone in x1 and s") {
        double prev = 0.0;
        for (double x1 = 1.0; x1 <= 24.0; x1 += 1.0) {
            const double v = mo_joint_cdf_x1_s(model, x1, 25.0);
            CHECK(v >= prev);
            prev = v;
        }
        prev = 0.0;
        for (double s = 10.0; s <= 100.0; s += 2.5) {
            const double v = mo_joint_cdf_x1_s(model, 10.0, s);
            CHECK(v >= prev);
            prev = v;
        }
    }
}

TEST_CASE("mixture joint lower probability") {
    const CorrelatedParetoMixture model(3.0, 1.0, {1.0, 2.0});

    SECTION("u_i = 0 gives P(S <= u), checked against simulation") {
        const std::uint64_t n = 2000000;
        const double exact = mixture_joint_lower_prob(model, 0, 0.0, 5.0);
        const double phat = frequency(JointModel(model), n, 19, [](std::span<const double> x) {
            return x[0] + x[1] <= 5.0;
        });
        check_within_se(phat, exact, n);
    }

    SECTION("interior probe against simulation") {
        const std::uint64_t n = 2000000;
        const double exact = mixture_joint_lower_prob(model, 0, 2.0, 5.0);
        const double phat = frequency(JointModel(model), n, 23, [](std::span<const double> x) {
            return x[0] > 2.0 && x[0] + x[1] <= 5.0;
        });
        check_within_se(phat, exact, n);
    }

    SECTION("gamma concentration recovers independent exponentials") {
        // Gamma(a,a) concentrates at 1 as a grows; mixture -> independence.
        const CorrelatedParetoMixture conc(1e4, 1e4, {1.0, 2.0});
        const std::vector<double> rates = {1.0, 2.0};
        for (double ui : {0.5, 1.0, 2.0}) {
            CHECK_THAT(mixture_joint_lower_prob(conc, 0, ui, 3.0),
                       Catch::Matchers::WithinAbs(exp_joint_lower_prob(rates, 0, ui, 3.0), 1e-2));
        }
    }

    SECTION("preconditions") {
        CHECK_THROWS_AS(mixture_joint_lower_prob(model, 0, 4.0, 3.0), DomainError);
        CHECK_THROWS_AS(mixture_joint_lower_prob(model, 5, 1.0, 3.0), DomainError);
    }
}

TEST_CASE("joint lower probabilities are monotone in the probabilistic direction") {
    const std::vector<double> rates = {1.0, 2.0};
    const CorrelatedParetoMixture mix(3.0, 1.0, {1.0, 2.0});
    // decreasing in u_i at fixed u
    double prev_exp = 1.0, prev_mix = 1.0;
    for (double ui = 0.0; ui <= 3.0; ui += 0.25) {
        const double pe = exp_joint_lower_prob(rates, 0, ui, 3.0);
        const double pm = mixture_joint_lower_prob(mix, 0, ui, 3.0);
        CHECK(pe <= prev_exp);
        CHECK(pm <= prev_mix);
        prev_exp = pe;
        prev_mix = pm;
    }
    // increasing in u at fixed u_i
    prev_exp = 0.0;
    prev_mix = 0.0;
    for (double u = 1.0; u <= 12.0; u += 0.5) {
        const double pe = exp_joint_lower_prob(rates, 0, 1.0, u);
        const double pm = mixture_joint_lower_prob(mix, 0, 1.0, u);
        CHECK(pe >= prev_exp);
        CHECK(pm >= prev_mix);
        prev_exp = pe;
        prev_mix = pm;
    }
}
