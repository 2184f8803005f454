#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "experiment_config.hpp"
#include "hawkes_ruin/acceptance.hpp"
#include "hawkes_ruin/asymptotics.hpp"
#include "hawkes_ruin/errors.hpp"
#include "hawkes_ruin/lundberg.hpp"
#include "hawkes_ruin/measure_change.hpp"
#include "hawkes_ruin/risk.hpp"
#include "hawkes_ruin/stationary.hpp"

#ifndef HAWKES_RUIN_VERSION
#define HAWKES_RUIN_VERSION "unknown"
#endif

namespace {

using namespace hawkes_ruin;
using cli::json;

constexpr int kExitValidation = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitAcceptance = 3;

struct Flags {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> n;
    std::optional<unsigned> workers;
    std::string method = "is";
    std::string mode = "cramer";
};

struct Context {
    cli::ExperimentConfig cfg;
    RunOptions opts;
    std::size_t n;
};

Context make_context(const Flags& f) {
    if (f.config.empty()) throw std::invalid_argument("--config is required for this command");
    Context ctx{cli::load_config(f.config), {}, 0};
    if (f.seed) ctx.cfg.run.seed = *f.seed;
    if (f.n) ctx.cfg.run.n = *f.n;
    if (f.workers) ctx.cfg.run.workers = *f.workers;
    if (ctx.cfg.run.n < 1) throw std::invalid_argument("n must be >= 1");
    if (ctx.cfg.run.workers < 1) throw std::invalid_argument("workers must be >= 1");
    ctx.opts = ctx.cfg.options();
    ctx.n = ctx.cfg.run.n;
    return ctx;
}

json provenance(const Context& ctx) {
    return {{"seed", ctx.opts.seed}, {"n", ctx.n}, {"version", HAWKES_RUIN_VERSION}};
}

std::string csv_provenance(const Context& ctx) {
    std::ostringstream os;
    os << "# seed=" << ctx.opts.seed << " n=" << ctx.n << " version=" << HAWKES_RUIN_VERSION << '\n';
    return os.str();
}

// Adds the premium ceiling to a missing-root failure when it is available in closed form.
[[noreturn]] void rethrow_with_ceiling(const RiskModel& model, const NoPositiveRoot& e) {
    if (const auto rates = exp_exp_rates(model)) {
        const double ceiling = premium_ceiling_exp(model.hawkes().baseline, model.hawkes().decay, rates->first,
                                                   rates->second);
        std::ostringstream os;
        os << e.what() << "; premium ceiling c < " << ceiling << " violated (c = " << model.premium() << ")";
        throw NumericError(os.str());
    }
    throw e;
}

LundbergSolution solve(const RiskModel& model) {
    try {
        return adjustment_coefficient(model);
    } catch (const NoPositiveRoot& e) {
        rethrow_with_ceiling(model, e);
    }
}

std::string cmd_simulate(const Context& ctx) {
    const RiskModel model = cli::risk_model(ctx.cfg);
    const double horizon = ctx.cfg.run.horizon;
    const auto outcomes = replicate_collect<RuinOutcome>(
        ctx.n, ctx.opts, [&](Philox4x32& rng, std::size_t) { return simulate_surplus(model, horizon, rng); });
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    os << csv_provenance(ctx);
    write_outcomes_csv(os, outcomes);
    return os.str();
}

std::string cmd_ruin(const Context& ctx, const std::string& method) {
    const RiskModel model = cli::risk_model(ctx.cfg);
    json out = provenance(ctx);
    out["method"] = method;
    out["u"] = model.capital();
    out["lambda0"] = model.initial_intensity();
    if (method == "is") {
        const auto sol = solve(model);
        const auto est = is_ruin_estimate(model, sol, ctx.n, ctx.opts, ctx.cfg.run.time_cap);
        out["psi_hat"] = est.psi.value;
        out["stderr"] = est.psi.std_error;
        out["capped_fraction"] = est.capped_fraction;
        out["capped_flag"] = est.capped_flag();
        out["time_cap"] = est.time_cap;
        out["bound_violations"] = est.bound_violations;
        out["R"] = est.R;
        out["alpha_R"] = est.alpha_R;
    } else {
        const auto est = crude_ruin_mc(model, ctx.cfg.run.horizon, ctx.n, ctx.opts);
        out["psi_hat"] = est.value;
        out["stderr"] = est.std_error;
        out["horizon"] = ctx.cfg.run.horizon;
    }
    return out.dump(2) + "\n";
}

std::string cmd_lundberg(const Context& ctx) {
    const RiskModel model = cli::risk_model(ctx.cfg);
    const auto sol = solve(model);
    json out{{"R", sol.R},
             {"alpha_R", sol.alpha_at_R},
             {"r_max", std::isfinite(sol.r_max) ? json(sol.r_max) : json("inf")},
             {"net_profit_margin", net_profit_margin(model)},
             {"version", HAWKES_RUIN_VERSION}};
    if (sol.R < sol.r_max) out["theta_prime_R"] = sol.theta_derivative(sol.R, std::min(1e-6, 0.5 * (sol.r_max - sol.R)));
    if (const auto rates = exp_exp_rates(model)) {
        const auto cf = closed_form_R_exp(model.hawkes().baseline, model.hawkes().decay, rates->first, rates->second,
                                          model.premium());
        out["closed_form"] = {{"R", cf.R}, {"r3", cf.r3}, {"r_max", cf.r_max}, {"premium_ceiling", cf.ceiling}};
    }
    return out.dump(2) + "\n";
}

std::string cmd_asymptotics(const Context& ctx, const std::string& mode) {
    const RiskModel model = cli::risk_model(ctx.cfg);
    const auto& grid = ctx.cfg.run.u_grid;
    AsymptoticsReport rep;
    if (mode == "cramer") {
        rep = cramer_curve(model, solve(model), grid, ctx.n, ctx.opts, ctx.cfg.run.time_cap);
    } else {
        rep = heavy_tail_curve(model, grid, ctx.cfg.run.horizon, ctx.n, ctx.opts);
    }
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    os << csv_provenance(ctx);
    if (!rep.warning.empty()) os << "# warning: " << rep.warning << '\n';
    os << "u,psi_hat,stderr,scaled,target\n";
    for (std::size_t k = 0; k < rep.grid.size(); ++k) {
        os << rep.grid[k] << ',' << rep.psi_hat[k].value << ',' << rep.psi_hat[k].std_error << ',' << rep.scaled[k]
           << ',' << rep.target << '\n';
    }
    return os.str();
}

std::string cmd_stationary(const Context& ctx) {
    const HawkesParams p = cli::hawkes_params(ctx.cfg);
    const auto& s = ctx.cfg.stationary;
    Context local = ctx;
    local.n = s.n;
    const auto check = ks_stationary_check(p, ctx.cfg.model.lambda0.value_or(p.baseline), s.burn_in, s.n, s.thin,
                                           ctx.opts);
    json out = provenance(local);
    out["ks"] = check.ks;
    out["mean"] = check.mean;
    out["var"] = check.var;
    out["mean_se"] = check.mean_se;
    out["var_se"] = check.var_se;
    out["targets"] = {{"mean", check.target_mean}, {"var", check.target_var}};
    out["burn_in"] = s.burn_in;
    out["thin"] = s.thin;
    out["autocorrelation_at_thin"] = stationary_autocorrelation(p, s.thin);
    return out.dump(2) + "\n";
}

std::string cmd_recurrence(const Context& ctx) {
    const HawkesParams p = cli::hawkes_params(ctx.cfg);
    Context local = ctx;
    local.n = ctx.cfg.recurrence.n;
    const auto rec = sample_recurrence_times(p, ctx.cfg.recurrence.level, local.n, ctx.opts);
    const auto rate = empirical_crossing_rate(rec.durations);
    const double q = 0.5 * rate.value;
    const auto mgf_hat = empirical_mgf(rec.durations, q);
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    os << csv_provenance(local);
    os << "# level=" << ctx.cfg.recurrence.level << " crossing_rate=" << rate.value << " stderr=" << rate.std_error
       << '\n';
    os << "# heuristic light-tail diagnostic (not a proof): E[exp(q S1)] at q=" << q << " is " << mgf_hat.value
       << " stderr=" << mgf_hat.std_error << '\n';
    os << "index,duration\n";
    for (std::size_t i = 0; i < rec.durations.size(); ++i) os << i << ',' << rec.durations[i] << '\n';
    return os.str();
}

void emit(const Flags& f, const std::string& text) {
    if (f.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(f.out);
    if (!out) throw std::invalid_argument("cannot open output file '" + f.out + "'");
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ruin probabilities of risk processes with Hawkes claim arrivals"};
    app.require_subcommand(1);
    app.fallthrough();
    Flags f;
    app.add_option("--config", f.config, "Experiment configuration (JSON)");
    app.add_option("--out", f.out, "Write output here instead of stdout");
    app.add_option("--seed", f.seed, "Override run.seed");
    app.add_option("--n", f.n, "Override run.n");
    app.add_option("--workers", f.workers, "Override run.workers");
    app.add_option("--method", f.method, "Ruin estimator")->check(CLI::IsMember({"is", "crude"}));
    app.add_option("--mode", f.mode, "Asymptotic regime")->check(CLI::IsMember({"cramer", "heavy"}));
    app.set_version_flag("--version", HAWKES_RUIN_VERSION);

    auto* simulate = app.add_subcommand("simulate", "Simulate surplus paths; CSV of ruin outcomes");
    auto* ruin = app.add_subcommand("ruin", "Estimate psi(u, lambda0); JSON");
    auto* lundberg = app.add_subcommand("lundberg", "Solve for the adjustment coefficient; JSON");
    auto* asymptotics = app.add_subcommand("asymptotics", "Scaled ruin curve over run.u_grid; CSV");
    auto* stationary = app.add_subcommand("stationary", "KS check of the stationary intensity law; JSON");
    auto* recurrence = app.add_subcommand("recurrence", "Return times of the intensity to a level; CSV");
    auto* verify = app.add_subcommand("verify", "Run the acceptance suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (verify->parsed()) {
            RunOptions opts;
            if (f.seed) opts.seed = *f.seed;
            if (f.workers) opts.workers = *f.workers;
            std::ostringstream log;
            const auto results = acceptance::run_acceptance(opts, &std::cout);
            bool all = true;
            for (const auto& r : results) {
                all = all && r.pass;
                log << r.line() << '\n';
            }
            if (!f.out.empty()) emit(f, log.str());
            return all ? EXIT_SUCCESS : kExitAcceptance;
        }
        const Context ctx = make_context(f);
        std::string text;
        if (simulate->parsed()) text = cmd_simulate(ctx);
        else if (ruin->parsed()) text = cmd_ruin(ctx, f.method);
        else if (lundberg->parsed()) text = cmd_lundberg(ctx);
        else if (asymptotics->parsed()) text = cmd_asymptotics(ctx, f.mode);
        else if (stationary->parsed()) text = cmd_stationary(ctx);
        else if (recurrence->parsed()) text = cmd_recurrence(ctx);
        emit(f, text);
        return EXIT_SUCCESS;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::domain_error& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    }
}
