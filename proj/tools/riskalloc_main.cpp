// Command-line driver: solve / estimate / sweep / validate workflows over a
// JSON run configuration. CSV output is byte-stable across reruns for a
// fixed config and seed. Exit codes: 0 success, 1 config error, 2 solver
// error, 3 validation failure.

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "riskalloc/riskalloc.hpp"

using json = nlohmann::json;
using namespace riskalloc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitSolver = 2;
constexpr int kExitValidation = 3;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string sanitize_status(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

struct Tolerances {
    double stderr_multiplier = 4.0;
    double degeneracy_abs = 1e-9;
    double identity_abs = 0.0;
};

struct RunConfig {
    json model_spec;
    double u = 0.0;
    IndicatorKind indicator = IndicatorKind::I;
    std::string method = "closed_form";
    bool asymptotic = false;
    std::uint64_t samples = 1000000;
    std::uint64_t seed = 1;
    MirrorSchedule schedule;
    std::optional<std::vector<double>> allocation;
    std::string sweep_parameter;
    std::vector<double> sweep_grid;
    std::string output;
    Tolerances tolerances;
};

double require_number(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number())
        throw ConfigError(std::string("config: missing numeric field '") + key + "'");
    return j[key].get<double>();
}

std::vector<double> require_array(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_array())
        throw ConfigError(std::string("config: missing array field '") + key + "'");
    std::vector<double> out;
    for (const auto& v : j[key]) {
        if (!v.is_number()) throw ConfigError(std::string("config: non-numeric entry in '") + key + "'");
        out.push_back(v.get<double>());
    }
    return out;
}

Marginal parse_marginal(const json& j) {
    const std::string kind = j.value("kind", "");
    if (kind == "exponential") return Exponential(require_number(j, "rate"));
    if (kind == "pareto_lomax") return ParetoLomax(require_number(j, "shape"), require_number(j, "scale"));
    if (kind == "lognormal") return LogNormal(require_number(j, "mu"), require_number(j, "sigma"));
    if (kind == "gamma") return GammaDist(require_number(j, "shape"), require_number(j, "rate"));
    throw ConfigError("config: unknown marginal kind '" + kind + "'");
}

JointModel parse_model(const json& j) {
    if (!j.is_object()) throw ConfigError("config: 'model' must be an object");
    const std::string kind = j.value("kind", "");
    try {
        if (kind == "independent_exponential")
            return IndependentExponential(require_array(j, "rates"));
        if (kind == "independent_pareto")
            return IndependentPareto(require_number(j, "shape"), require_array(j, "scales"));
        if (kind == "correlated_pareto_mixture")
            return CorrelatedParetoMixture(require_number(j, "mix_shape"),
                                           require_number(j, "mix_rate"), require_array(j, "rates"));
        if (kind == "comonotonic") {
            if (!j.contains("marginals") || !j["marginals"].is_array())
                throw ConfigError("config: comonotonic model needs a 'marginals' array");
            std::vector<Marginal> ms;
            for (const auto& m : j["marginals"]) ms.push_back(parse_marginal(m));
            return Comonotonic(std::move(ms));
        }
        if (kind == "fgm_exponential")
            return FgmExponential(require_number(j, "beta1"), require_number(j, "beta2"),
                                  require_number(j, "theta"));
        if (kind == "marshall_olkin")
            return MarshallOlkin(require_number(j, "lambda0"), require_number(j, "lambda1"),
                                 require_number(j, "lambda2"));
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("config: invalid model parameters: ") + e.what());
    }
    throw ConfigError("config: unknown model kind '" + kind + "'");
}

IndicatorKind parse_indicator(const std::string& s) {
    if (s == "I") return IndicatorKind::I;
    if (s == "J") return IndicatorKind::J;
    if (s == "I_loc") return IndicatorKind::I_loc;
    throw ConfigError("config: indicator must be one of I, J, I_loc");
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: JSON parse failure: ") + e.what());
    }
    RunConfig cfg;
    if (!j.contains("model")) throw ConfigError("config: missing 'model'");
    cfg.model_spec = j["model"];
    parse_model(cfg.model_spec);  // validate eagerly
    cfg.u = j.value("u", 0.0);
    cfg.indicator = parse_indicator(j.value("indicator", "I"));
    cfg.method = j.value("method", "closed_form");
    if (cfg.method != "closed_form" && cfg.method != "monte_carlo" && cfg.method != "both")
        throw ConfigError("config: method must be closed_form, monte_carlo or both");
    cfg.asymptotic = j.value("asymptotic", false);
    cfg.samples = j.value("samples", std::uint64_t{1000000});
    cfg.seed = j.value("seed", std::uint64_t{1});
    cfg.schedule.batch = j.value("batch", std::uint64_t{10000});
    cfg.schedule.iterations = j.value("iterations", 2000);
    cfg.schedule.step_c = j.value("step_c", 1.0);
    cfg.schedule.width_c = j.value("width_c", 0.0);
    if (j.contains("allocation")) cfg.allocation = require_array(j, "allocation");
    if (j.contains("sweep")) {
        cfg.sweep_parameter = j["sweep"].value("parameter", "");
        cfg.sweep_grid = require_array(j["sweep"], "grid");
    }
    cfg.output = j.value("output", "");
    if (j.contains("tolerances")) {
        const auto& t = j["tolerances"];
        cfg.tolerances.stderr_multiplier = t.value("stderr_multiplier", 4.0);
        cfg.tolerances.degeneracy_abs = t.value("degeneracy_abs", 1e-9);
        cfg.tolerances.identity_abs = t.value("identity_abs", 0.0);
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

struct SolveResult {
    std::vector<double> fractions;
    double residual_norm = 0.0;
};

SolveResult solve_closed_form(const RunConfig& cfg) {
    const JointModel model = parse_model(cfg.model_spec);
    const SolverConfig scfg;
    SolveResult out;

    auto from_system = [&](const ResidualSystem& sys) {
        out.fractions = solve_simplex(sys, scfg);
        double norm = 0.0;
        for (double r : sys.residual(out.fractions)) norm = std::max(norm, std::fabs(r));
        out.residual_norm = norm;
    };

    if (const auto* m = std::get_if<IndependentExponential>(&model)) {
        if (cfg.asymptotic) {
            out.fractions = cfg.indicator == IndicatorKind::J
                                ? asymptotic_exponential_J(m->rates)
                                : asymptotic_exponential_I(m->rates);
        } else if (cfg.indicator == IndicatorKind::I_loc || equal_rates(m->rates)) {
            out.fractions = exponential_optimal_fractions(m->rates, cfg.u, cfg.indicator, scfg);
        } else {
            from_system(cfg.indicator == IndicatorKind::I ? eizo_system(m->rates, cfg.u)
                                                          : eizv_system(m->rates, cfg.u));
        }
        return out;
    }
    if (const auto* m = std::get_if<IndependentPareto>(&model)) {
        if (cfg.indicator == IndicatorKind::I_loc) {
            std::vector<Marginal> ms;
            for (double b : m->scales) ms.emplace_back(ParetoLomax(m->shape, b));
            const auto alloc = iloc_allocation(ms, cfg.u);
            for (std::size_t i = 0; i < alloc.dim(); ++i)
                out.fractions.push_back(alloc.fraction(i));
            return out;
        }
        if (!cfg.asymptotic)
            throw ConfigError("config: independent_pareto closed forms are asymptotic only");
        if (cfg.indicator == IndicatorKind::J) {
            out.fractions = pareto_asymptotic_J(m->scales);
        } else {
            from_system(pareto_asymptotic_I_system(m->shape, m->scales));
        }
        return out;
    }
    if (const auto* m = std::get_if<CorrelatedParetoMixture>(&model)) {
        if (cfg.indicator == IndicatorKind::I_loc) {
            std::vector<Marginal> ms;
            for (double b : m->rates) ms.emplace_back(ParetoLomax(m->mix_shape, m->mix_rate / b));
            const auto alloc = iloc_allocation(ms, cfg.u);
            for (std::size_t i = 0; i < alloc.dim(); ++i)
                out.fractions.push_back(alloc.fraction(i));
            return out;
        }
        if (cfg.asymptotic)
            from_system(cfg.indicator == IndicatorKind::I ? mixture_asymptotic_I_system(*m)
                                                          : mixture_asymptotic_J_system(*m));
        else
            from_system(cfg.indicator == IndicatorKind::I ? mixture_I_system(*m, cfg.u)
                                                          : mixture_J_system(*m, cfg.u));
        return out;
    }
    if (const auto* m = std::get_if<Comonotonic>(&model)) {
        if (cfg.asymptotic) throw ConfigError("config: comonotonic allocation has no asymptotic variant");
        const auto alloc = comonotonic_allocation(m->marginals, cfg.u);
        double level0 = cdf(m->marginals[0], alloc.capitals[0]);
        double norm = 0.0;
        for (std::size_t i = 0; i < alloc.dim(); ++i) {
            out.fractions.push_back(alloc.fraction(i));
            norm = std::max(norm, std::fabs(cdf(m->marginals[i], alloc.capitals[i]) - level0));
        }
        out.residual_norm = norm;
        return out;
    }
    if (const auto* m = std::get_if<FgmExponential>(&model)) {
        if (cfg.indicator != IndicatorKind::I)
            throw ConfigError("config: fgm_exponential closed form covers indicator I only");
        const double b = fgm_optimal_fraction(*m, cfg.u, scfg);
        out.fractions = {b, 1.0 - b};
        out.residual_norm = std::fabs(fgm_residual(m->beta1, m->beta2, m->theta, cfg.u, b));
        return out;
    }
    const auto& m = std::get<MarshallOlkin>(model);
    if (cfg.indicator != IndicatorKind::I)
        throw ConfigError("config: marshall_olkin closed form covers indicator I only");
    const double b = mo_optimal_fraction(m, cfg.u, scfg);
    out.fractions = {b, 1.0 - b};
    out.residual_norm =
        m.symmetric ? 0.0 : std::fabs(mo_residual(m.lambda0, m.lambda1, m.lambda2, cfg.u, b));
    return out;
}

// Pairwise gap of the Monte Carlo optimality-condition probabilities; the
// stationarity certificate for an allocation.
std::pair<double, double> stationarity_gap(const JointModel& model, const Allocation& alloc,
                                           IndicatorKind kind, std::uint64_t n,
                                           std::uint64_t seed) {
    const ConditionSide side =
        kind == IndicatorKind::J ? ConditionSide::upper : ConditionSide::lower;
    const int d = dimension(model);
    double gap = 0.0, se = 0.0;
    const auto p0 = estimate_condition(model, 0, alloc, side, n, seed);
    for (int j = 1; j < d; ++j) {
        const auto pj = estimate_condition(model, static_cast<std::size_t>(j), alloc, side, n, seed);
        if (std::fabs(pj.value - p0.value) > gap) {
            gap = std::fabs(pj.value - p0.value);
            se = std::hypot(p0.std_error, pj.std_error);
        }
    }
    return {gap, se};
}

void write_allocation_csv(const std::string& path, const std::vector<double>& fractions,
                          double u) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file '" + path + "'");
    out << "branch,capital,fraction\n";
    for (std::size_t i = 0; i < fractions.size(); ++i)
        out << (i + 1) << ',' << format_double(fractions[i] * u) << ','
            << format_double(fractions[i]) << '\n';
}

int cmd_solve(const RunConfig& cfg) {
    if (!(cfg.u > 0.0)) throw ConfigError("config: solve requires u > 0");
    const JointModel model = parse_model(cfg.model_spec);

    std::optional<SolveResult> closed;
    std::optional<Allocation> mc;
    if (cfg.method == "closed_form" || cfg.method == "both") closed = solve_closed_form(cfg);
    if (cfg.method == "monte_carlo" || cfg.method == "both") {
        if (cfg.indicator == IndicatorKind::I_loc)
            throw ConfigError("config: monte_carlo method covers indicators I and J");
        mc = mirror_descent_minimize(model, cfg.u, cfg.indicator, Penalty::absolute(),
                                     cfg.schedule, cfg.seed);
    }

    std::vector<double> mc_fractions;
    if (mc)
        for (std::size_t i = 0; i < mc->dim(); ++i) mc_fractions.push_back(mc->fraction(i));
    const std::vector<double> report = closed ? closed->fractions : mc_fractions;
    std::printf("method: %s\n", cfg.method.c_str());
    for (std::size_t i = 0; i < report.size(); ++i)
        std::printf("branch %zu: u_i = %.12g  alpha_i = %.12g\n", i + 1, report[i] * cfg.u,
                    report[i]);
    if (closed) std::printf("residual_norm: %.6g\n", closed->residual_norm);
    if (mc) {
        const auto [gap, se] = stationarity_gap(model, *mc, cfg.indicator, cfg.samples, cfg.seed + 1);
        std::printf("mc_stationarity_gap: %.6g (se %.6g)\n", gap, se);
    }
    if (closed && mc) {
        double gap = 0.0;
        for (std::size_t i = 0; i < closed->fractions.size(); ++i)
            gap = std::max(gap, std::fabs(closed->fractions[i] * cfg.u - mc->capitals[i]));
        std::printf("oracle_gap_capital: %.6g\n", gap);
    }
    if (!cfg.output.empty()) write_allocation_csv(cfg.output, report, cfg.u);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// estimate
// ---------------------------------------------------------------------------

int cmd_estimate(const RunConfig& cfg) {
    if (!cfg.allocation) throw ConfigError("config: estimate requires an 'allocation' array");
    const JointModel model = parse_model(cfg.model_spec);
    const Allocation alloc(*cfg.allocation);
    const Penalty penalty = Penalty::absolute();
    IndicatorEstimate est;
    switch (cfg.indicator) {
        case IndicatorKind::I: est = estimate_I(model, alloc, penalty, cfg.samples, cfg.seed); break;
        case IndicatorKind::J: est = estimate_J(model, alloc, penalty, cfg.samples, cfg.seed); break;
        case IndicatorKind::I_loc:
            est = estimate_I_loc(model, alloc, penalty, cfg.samples, cfg.seed);
            break;
    }
    std::printf("value: %.12g\nstd_error: %.12g\nn: %" PRIu64 "\nseed: %" PRIu64 "\n", est.value,
                est.std_error, est.n, est.seed);
    if (!cfg.output.empty()) {
        std::ofstream out(cfg.output, std::ios::binary);
        if (!out) throw ConfigError("cannot open output file '" + cfg.output + "'");
        out << "value,std_error,n,seed\n"
            << format_double(est.value) << ',' << format_double(est.std_error) << ',' << est.n
            << ',' << est.seed << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

int cmd_sweep(const RunConfig& cfg) {
    if (cfg.sweep_parameter.empty() || cfg.sweep_grid.empty())
        throw ConfigError("config: sweep requires 'sweep.parameter' and a nonempty 'sweep.grid'");
    if (cfg.output.empty()) throw ConfigError("config: sweep requires an output path");
    if (!(cfg.u > 0.0)) throw ConfigError("config: sweep requires u > 0");

    const std::string kind = cfg.model_spec.value("kind", "");
    const std::string& par = cfg.sweep_parameter;
    std::function<std::function<double(double)>(double)> family;

    if (kind == "fgm_exponential") {
        if (par != "theta" && par != "beta1" && par != "beta2" && par != "u")
            throw ConfigError("config: fgm_exponential sweeps theta, beta1, beta2 or u");
        family = [cfg, par](double p) {
            json spec = cfg.model_spec;
            double u = cfg.u;
            if (par == "u") u = p; else spec[par] = p;
            FgmExponential m(require_number(spec, "beta1"), require_number(spec, "beta2"),
                             require_number(spec, "theta"));
            return [m, u](double b) { return fgm_residual(m.beta1, m.beta2, m.theta, u, b); };
        };
    } else if (kind == "marshall_olkin") {
        if (par != "lambda0" && par != "lambda1" && par != "lambda2" && par != "u")
            throw ConfigError("config: marshall_olkin sweeps lambda0, lambda1, lambda2 or u");
        family = [cfg, par](double p) -> std::function<double(double)> {
            json spec = cfg.model_spec;
            double u = cfg.u;
            if (par == "u") u = p; else spec[par] = p;
            MarshallOlkin m(require_number(spec, "lambda0"), require_number(spec, "lambda1"),
                            require_number(spec, "lambda2"));
            if (m.symmetric) return [](double b) { return b - 0.5; };
            return [m, u](double b) { return mo_residual(m.lambda0, m.lambda1, m.lambda2, u, b); };
        };
    } else if (kind == "independent_exponential") {
        if (par != "u") throw ConfigError("config: independent_exponential sweeps u only");
        const auto rates = require_array(cfg.model_spec, "rates");
        if (rates.size() != 2)
            throw ConfigError("config: sweep over u needs a bivariate exponential model");
        family = [rates, ind = cfg.indicator](double p) -> std::function<double(double)> {
            auto sys = ind == IndicatorKind::J ? eizv_system(rates, p) : eizo_system(rates, p);
            return [sys](double b) {
                const std::vector<double> alpha = {b, 1.0 - b};
                return sys.log_residual(alpha)[0];
            };
        };
    } else {
        throw ConfigError("config: sweep supports fgm_exponential, marshall_olkin and "
                          "independent_exponential models");
    }

    const auto rows = sweep(family, cfg.sweep_grid, 1e-12, 1.0 - 1e-12, SolverConfig{});
    std::ofstream out(cfg.output, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file '" + cfg.output + "'");
    out << "parameter,beta_frac,residual_norm,status\n";
    for (const auto& row : rows)
        out << format_double(row.parameter) << ',' << format_double(row.root) << ','
            << format_double(row.residual_norm) << ',' << sanitize_status(row.status) << '\n';
    std::printf("sweep: %zu rows -> %s\n", rows.size(), cfg.output.c_str());
    return kExitOk;
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

int cmd_validate(const RunConfig& cfg) {
    const JointModel model = parse_model(cfg.model_spec);
    const double u = cfg.u > 0.0 ? cfg.u : 50.0;
    bool all_ok = true;
    auto report = [&](const char* name, bool ok, double value, double threshold) {
        std::printf("%s %s: value=%.6g threshold=%.6g\n", ok ? "[ok]  " : "[FAIL]", name, value,
                    threshold);
        all_ok = all_ok && ok;
    };

    // 1. closed-form root vs Monte Carlo stationarity
    {
        RunConfig closed_cfg = cfg;
        closed_cfg.u = u;
        closed_cfg.indicator = IndicatorKind::I;
        closed_cfg.asymptotic = false;
        const auto res = solve_closed_form(closed_cfg);
        const auto alloc = Allocation::from_fractions(res.fractions, u);
        const auto [gap, se] = stationarity_gap(model, alloc, IndicatorKind::I, cfg.samples,
                                                cfg.seed);
        const double threshold = cfg.tolerances.stderr_multiplier * se;
        report("closed_form_vs_mc_stationarity", gap <= threshold, gap, threshold);
    }

    // 2. per-sample identities on a shared stream
    {
        const int d = dimension(model);
        std::vector<double> caps(static_cast<std::size_t>(d), u / d);
        const Allocation alloc(caps);
        double max_additive = 0.0, max_partition = 0.0;
        for_each_sample(model, cfg.samples, cfg.seed, [&](std::span<const double> x) {
            double s = 0.0;
            for (double xi : x) s += xi;
            double cost = 0.0;
            for (int i = 0; i < d; ++i) {
                const double c = alloc.capitals[static_cast<std::size_t>(i)];
                if (x[static_cast<std::size_t>(i)] > c) cost += x[static_cast<std::size_t>(i)] - c;
            }
            const double vi = s <= u ? cost : 0.0;
            const double vj = s >= u ? cost : 0.0;
            max_additive = std::max(max_additive, std::fabs(vi + vj - cost));
            const bool exceed = x[0] > alloc.capitals[0];
            const double low = (exceed && s <= u) ? 1.0 : 0.0;
            const double up = (exceed && s >= u) ? 1.0 : 0.0;
            max_partition = std::max(max_partition, std::fabs(low + up - (exceed ? 1.0 : 0.0)));
        });
        report("identity_I_plus_J_equals_I_loc", max_additive <= cfg.tolerances.identity_abs,
               max_additive, cfg.tolerances.identity_abs);
        report("identity_condition_partition", max_partition <= cfg.tolerances.identity_abs,
               max_partition, cfg.tolerances.identity_abs);
    }

    // 3. copula degeneracy to independence on a 99-point grid
    {
        const std::vector<double> rates = {0.05, 0.25};
        auto sys = eizo_system(rates, u);
        double max_fgm = 0.0, max_mo = 0.0;
        for (int k = 1; k <= 99; ++k) {
            const double b = k / 100.0;
            const std::vector<double> alpha = {b, 1.0 - b};
            const double ref = sys.residual(alpha)[0];
            max_fgm = std::max(max_fgm, std::fabs(fgm_residual(0.05, 0.25, 0.0, u, b) - ref));
            max_mo = std::max(max_mo, std::fabs(mo_residual(0.0, 0.05, 0.25, u, b) - ref));
        }
        report("fgm_theta0_degeneracy", max_fgm <= cfg.tolerances.degeneracy_abs, max_fgm,
               cfg.tolerances.degeneracy_abs);
        report("mo_lambda0_degeneracy", max_mo <= cfg.tolerances.degeneracy_abs, max_mo,
               cfg.tolerances.degeneracy_abs);
    }

    std::printf("validate: %s\n", all_ok ? "pass" : "fail");
    return all_ok ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal capital allocation by multivariate risk-indicator minimization"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    std::int64_t seed_override = -1;
    std::int64_t samples_override = -1;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--out", out_override, "output path (overrides config)");
        sub->add_option("--seed", seed_override, "seed (overrides config)");
        sub->add_option("--samples", samples_override, "sample count (overrides config)");
    };

    auto* solve_cmd = app.add_subcommand("solve", "solve for the optimal allocation");
    auto* estimate_cmd = app.add_subcommand("estimate", "Monte Carlo indicator estimate");
    auto* sweep_cmd = app.add_subcommand("sweep", "solve over a parameter grid, write CSV");
    auto* validate_cmd = app.add_subcommand("validate", "run the cross-model invariant suite");
    for (auto* sub : {solve_cmd, estimate_cmd, sweep_cmd, validate_cmd}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    RunConfig cfg;
    try {
        cfg = load_config(config_path);
        if (!out_override.empty()) cfg.output = out_override;
        if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
        if (samples_override >= 0) cfg.samples = static_cast<std::uint64_t>(samples_override);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }

    try {
        if (solve_cmd->parsed()) return cmd_solve(cfg);
        if (estimate_cmd->parsed()) return cmd_estimate(cfg);
        if (sweep_cmd->parsed()) return cmd_sweep(cfg);
        return cmd_validate(cfg);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const Error& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return kExitSolver;
    }
}
