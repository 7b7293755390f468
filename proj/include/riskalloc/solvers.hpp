#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "riskalloc/closed_form.hpp"
#include "riskalloc/errors.hpp"
#include "riskalloc/indicators.hpp"
#include "riskalloc/rootfind.hpp"

namespace riskalloc {

struct SolverConfig {
    double abs_tol = 1e-10;
    int max_iter = 200;
    double newton_damping = 1.0;  // initial step factor; halved on residual increase
};

/// Kiefer-Wolfowitz entropic mirror descent schedule. step c/n on the mirror
/// update, smoothing width c' n^{-1/4} on the finite differences. A
/// nonpositive width_c means "use 0.1 * u".
struct MirrorSchedule {
    double step_c = 1.0;
    double width_c = 0.0;
    std::uint64_t batch = 10000;
    int iterations = 2000;
};

inline void check_solver_config(const SolverConfig& config) {
    if (!(config.abs_tol > 0.0)) throw DomainError("SolverConfig: abs_tol must be positive");
    if (config.max_iter < 1) throw DomainError("SolverConfig: max_iter must be >= 1");
    if (!(config.newton_damping > 0.0) || config.newton_damping > 1.0)
        throw DomainError("SolverConfig: newton_damping must lie in (0,1]");
}

/// Brent on a bracketing interval. Succeeds once |f| <= abs_tol or the
/// bracket width falls below abs_tol.
inline double solve_bracketed(const std::function<double(double)>& f, double lo, double hi,
                              const SolverConfig& config = {}) {
    check_solver_config(config);
    return brent(f, lo, hi, config.abs_tol, config.abs_tol, std::max(config.max_iter, 60));
}

namespace detail {

inline constexpr double kInteriorClamp = 1e-12;

inline std::vector<double> project_interior(std::vector<double> alpha) {
    double s = 0.0;
    for (double& a : alpha) {
        a = std::clamp(a, kInteriorClamp, 1.0 - kInteriorClamp);
        s += a;
    }
    for (double& a : alpha) a /= s;
    return alpha;
}

// Gaussian elimination with partial pivoting; systems here are (d-1)x(d-1)
// with small d.
inline bool solve_linear(std::vector<std::vector<double>>& a, std::vector<double>& b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        if (std::fabs(a[piv][col]) < 1e-300) return false;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t c = i + 1; c < n; ++c) b[i] -= a[i][c] * b[c];
        b[i] /= a[i][i];
    }
    return true;
}

inline double inf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

}  // namespace detail

/// Finds the simplex fractions where the system's residual vanishes.
/// Bivariate systems are solved by bracketed root finding on the scalarized
/// residual; higher dimensions use a damped Newton iteration with a central-
/// difference Jacobian from the uniform point, falling back to a bisection
/// along the uniform-to-hint segment. Convergence is measured on the
/// equalization (log) form when the system provides one, which makes the
/// result invariant under positive rescaling of the optimality quantities.
inline std::vector<double> solve_simplex(const ResidualSystem& system,
                                         const SolverConfig& config = {}) {
    check_solver_config(config);
    if (system.dim < 2) throw DomainError("solve_simplex: system dimension must be >= 2");
    const std::size_t d = static_cast<std::size_t>(system.dim);

    // Raw-residual systems are normalized by the start-point magnitude so the
    // tolerance is scale-free there too.
    double norm_scale = 1.0;
    std::function<std::vector<double>(std::span<const double>)> fn;
    if (system.log_residual) {
        fn = system.log_residual;
    } else {
        if (!system.residual) throw DomainError("solve_simplex: system has no residual");
        const std::vector<double> start(d, 1.0 / static_cast<double>(d));
        const double s0 = detail::inf_norm(system.residual(start));
        norm_scale = s0 > 0.0 ? 1.0 / s0 : 1.0;
        fn = [res = system.residual, norm_scale](std::span<const double> a) {
            auto r = res(a);
            for (double& x : r) x *= norm_scale;
            return r;
        };
    }

    if (d == 2) {
        auto scalar = [&](double a1) { return fn(std::vector<double>{a1, 1.0 - a1})[0]; };
        const double root = brent(scalar, detail::kInteriorClamp, 1.0 - detail::kInteriorClamp,
                                  4.0 * std::numeric_limits<double>::epsilon(), config.abs_tol,
                                  std::max(config.max_iter, 100));
        return {root, 1.0 - root};
    }

    auto expand = [d](std::span<const double> free) {
        std::vector<double> alpha(d);
        double s = 0.0;
        for (std::size_t k = 0; k + 1 < d; ++k) {
            alpha[k + 1] = free[k];
            s += free[k];
        }
        alpha[0] = 1.0 - s;
        return detail::project_interior(std::move(alpha));
    };

    std::vector<double> free_vars(d - 1, 1.0 / static_cast<double>(d));
    std::vector<double> alpha = expand(free_vars);
    std::vector<double> F = fn(alpha);
    double norm = detail::inf_norm(F);

    for (int iter = 0; iter < config.max_iter; ++iter) {
        if (norm <= config.abs_tol) return alpha;

        // central-difference Jacobian, step 1e-6 on the free coordinates
        const double h = 1e-6;
        std::vector<std::vector<double>> jac(d - 1, std::vector<double>(d - 1));
        for (std::size_t k = 0; k < d - 1; ++k) {
            auto fp = free_vars, fm = free_vars;
            fp[k] += h;
            fm[k] -= h;
            const auto rp = fn(expand(fp));
            const auto rm = fn(expand(fm));
            for (std::size_t r = 0; r < d - 1; ++r) jac[r][k] = (rp[r] - rm[r]) / (2.0 * h);
        }
        std::vector<double> step(F.size());
        for (std::size_t r = 0; r < F.size(); ++r) step[r] = -F[r];
        if (!detail::solve_linear(jac, step)) break;

        double t = config.newton_damping;
        bool improved = false;
        for (int halving = 0; halving < 60; ++halving) {
            auto trial = free_vars;
            for (std::size_t k = 0; k < d - 1; ++k) trial[k] += t * step[k];
            const auto trial_alpha = expand(trial);
            const auto trial_F = fn(trial_alpha);
            const double trial_norm = detail::inf_norm(trial_F);
            if (std::isfinite(trial_norm) && trial_norm < norm) {
                free_vars = trial;
                alpha = trial_alpha;
                F = trial_F;
                norm = trial_norm;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if (!improved) break;
    }
    if (norm <= config.abs_tol) return alpha;

    // Bisection fallback on the segment between the uniform point and the
    // system's hint (asymptotic formula point), scalarized on the first
    // residual component.
    if (!system.hint.empty()) {
        const std::vector<double> uniform(d, 1.0 / static_cast<double>(d));
        auto at = [&](double s) {
            std::vector<double> p(d);
            for (std::size_t k = 0; k < d; ++k)
                p[k] = (1.0 - s) * uniform[k] + s * system.hint[k];
            return detail::project_interior(std::move(p));
        };
        auto g = [&](double s) { return fn(at(s))[0]; };
        try {
            const double s_root = bisect(g, 0.0, 1.0, 1e-14);
            const auto candidate = at(s_root);
            const auto res = fn(candidate);
            if (detail::inf_norm(res) <= config.abs_tol) return candidate;
        } catch (const BracketError&) {
            // fall through to the convergence error
        }
    }
    throw ConvergenceError("solve_simplex: max_iter exceeded (system " + system.name + ")",
                           alpha, norm);
}

// ---------------------------------------------------------------------------
// Stochastic mirror descent (Kiefer-Wolfowitz)
// ---------------------------------------------------------------------------

/// Minimizes the Monte Carlo indicator over the simplex with multiplicative-
/// weights updates and two-point finite-difference gradients under common
/// random numbers. Returns the Polyak average of the last half of the
/// iterates. Deterministic for a fixed seed.
inline Allocation mirror_descent_minimize(const JointModel& model, double u, IndicatorKind kind,
                                          const Penalty& penalty, const MirrorSchedule& schedule,
                                          std::uint64_t seed) {
    if (!(u > 0.0)) throw DomainError("mirror_descent_minimize: u must be positive");
    if (kind == IndicatorKind::I_loc)
        throw DomainError("mirror_descent_minimize: I_loc has a closed-form optimum; use iloc_allocation");
    if (!(schedule.step_c > 0.0) || schedule.batch < 1 || schedule.iterations < 1)
        throw DomainError("MirrorSchedule: step_c, batch and iterations must be positive");
    detail::check_finite_means(model);
    const std::size_t d = static_cast<std::size_t>(dimension(model));
    const double width_c = schedule.width_c > 0.0 ? schedule.width_c : 0.1 * u;
    const std::uint64_t chunks_per_batch = (schedule.batch + kChunkSamples - 1) / kChunkSamples;

    std::vector<double> alpha(d, 1.0 / static_cast<double>(d));
    std::vector<double> average(d, 0.0);
    std::uint64_t averaged = 0;
    const int half = schedule.iterations / 2;

    std::vector<double> batch;
    std::vector<double> grad(d), delta(d);
    double grad_scale = 0.0;

    for (int n = 1; n <= schedule.iterations; ++n) {
        fill_samples(model, schedule.batch, seed,
                     static_cast<std::uint64_t>(n - 1) * chunks_per_batch, batch);
        const double width = width_c * std::pow(static_cast<double>(n), -0.25);

        std::vector<double> caps(d);
        for (std::size_t i = 0; i < d; ++i) caps[i] = alpha[i] * u;
        for (std::size_t i = 0; i < d; ++i) delta[i] = std::min(width, caps[i]);

        // One pass over the shared batch accumulates all 2d perturbed
        // evaluations; only coordinate i's ruin term moves with +-delta_i.
        std::fill(grad.begin(), grad.end(), 0.0);
        const std::size_t nb = static_cast<std::size_t>(schedule.batch);
        for (std::size_t k = 0; k < nb; ++k) {
            const double* x = batch.data() + k * d;
            double s = 0.0;
            for (std::size_t i = 0; i < d; ++i) s += x[i];
            const bool in_event = (kind == IndicatorKind::I) ? (s <= u) : (s >= u);
            if (!in_event) continue;
            for (std::size_t i = 0; i < d; ++i) {
                const double up = caps[i] + delta[i];
                const double dn = caps[i] - delta[i];
                double diff;
                if (penalty.is_absolute) {
                    diff = (x[i] > up ? x[i] - up : 0.0) - (x[i] > dn ? x[i] - dn : 0.0);
                } else {
                    diff = (x[i] > up ? penalty.g(up - x[i]) : 0.0) -
                           (x[i] > dn ? penalty.g(dn - x[i]) : 0.0);
                }
                grad[i] += diff;
            }
        }
        for (std::size_t i = 0; i < d; ++i)
            grad[i] /= static_cast<double>(schedule.batch) * 2.0 * std::max(delta[i], 1e-300);

        if (n == 1) {
            grad_scale = detail::inf_norm(grad);
            if (!(grad_scale > 0.0)) grad_scale = 1.0;
        }
        const double step = schedule.step_c / (static_cast<double>(n) * grad_scale);
        for (std::size_t i = 0; i < d; ++i) alpha[i] *= std::exp(-step * grad[i]);
        alpha = detail::project_interior(std::move(alpha));

        if (n > half) {
            for (std::size_t i = 0; i < d; ++i) average[i] += alpha[i];
            ++averaged;
        }
    }
    for (double& a : average) a /= static_cast<double>(averaged);
    average = detail::project_interior(std::move(average));
    return Allocation::from_fractions(average, u);
}

// ---------------------------------------------------------------------------
// Parameter sweeps
// ---------------------------------------------------------------------------

struct SweepRow {
    double parameter = 0.0;
    double root = std::numeric_limits<double>::quiet_NaN();
    double residual_norm = std::numeric_limits<double>::quiet_NaN();
    std::string status = "ok";
};

/// One bracketed solve per grid point, rows in grid order. Per-point failures
/// (invalid parameters, no bracket, no convergence) land in the row's status
/// and do not abort the sweep.
inline std::vector<SweepRow> sweep(
    const std::function<std::function<double(double)>(double)>& family,
    std::span<const double> grid, double lo, double hi, const SolverConfig& config = {}) {
    std::vector<SweepRow> rows;
    rows.reserve(grid.size());
    for (double p : grid) {
        SweepRow row;
        row.parameter = p;
        try {
            auto f = family(p);
            row.root = solve_bracketed(f, lo, hi, config);
            row.residual_norm = std::fabs(f(row.root));
        } catch (const Error& e) {
            row.status = std::string("error: ") + e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Model-level conveniences
// ---------------------------------------------------------------------------

/// Optimal fractions for independent exponentials. Equal rates bypass the
/// equation system and return the exact uniform split; I_loc is the exact
/// inverse-rate split.
inline std::vector<double> exponential_optimal_fractions(std::span<const double> rates, double u,
                                                         IndicatorKind kind,
                                                         const SolverConfig& config = {}) {
    if (kind == IndicatorKind::I_loc) return asymptotic_exponential_I(rates);
    if (equal_rates(rates))
        return std::vector<double>(rates.size(), 1.0 / static_cast<double>(rates.size()));
    std::vector<double> r(rates.begin(), rates.end());
    return solve_simplex(kind == IndicatorKind::I ? eizo_system(std::move(r), u)
                                                  : eizv_system(std::move(r), u),
                         config);
}

inline double fgm_optimal_fraction(const FgmExponential& model, double u,
                                   const SolverConfig& config = {}) {
    auto f = [&](double b) { return fgm_residual(model.beta1, model.beta2, model.theta, u, b); };
    return solve_bracketed(f, detail::kInteriorClamp, 1.0 - detail::kInteriorClamp, config);
}

/// Exchangeable marginals make beta = 1/2 optimal; otherwise solve the
/// piecewise-CDF residual.
inline double mo_optimal_fraction(const MarshallOlkin& model, double u,
                                  const SolverConfig& config = {}) {
    if (model.symmetric) return 0.5;
    auto f = [&](double b) {
        return mo_residual(model.lambda0, model.lambda1, model.lambda2, u, b);
    };
    return solve_bracketed(f, detail::kInteriorClamp, 1.0 - detail::kInteriorClamp, config);
}

}  // namespace riskalloc
