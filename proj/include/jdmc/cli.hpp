#pragma once

#include "jdmc/assumptions.hpp"
#include "jdmc/config.hpp"
#include "jdmc/harness.hpp"
#include "jdmc/report.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace jdmc::cli {

enum ExitCode : int { kOk = 0, kConfigFailure = 2, kNumericalFailure = 3, kIoFailure = 4 };

inline std::string euler_label(int p) { return "euler[p=" + std::to_string(p) + "]"; }

/// Executes a validated config and returns the table it produced (already
/// written to cfg.out unless the command is check-model).
inline ResultTable execute(const RunConfig& cfg, std::ostream& log) {
    for (const auto& note : cfg.notes) log << "note: " << note << '\n';

    const ModelSpec model = cfg.build_model();
    const Payoff payoff = cfg.build_payoff();
    Experiment e{model, payoff, cfg.start_state(model.d), cfg.params, cfg.trials, cfg.seed,
                 cfg.workers};

    ResultTable table;
    auto row = [&](const std::string& estimator, const EstimateStats& s) {
        return ResultRow::from_stats(estimator, model.name, payoff.name, s, cfg.seed,
                                     cfg.reference_value);
    };

    if (cfg.command == "check-model") {
        const AssumptionReport r = check_assumptions(model, static_cast<int>(std::min<std::int64_t>(
                                                                cfg.trials, 1'000'000)));
        std::ofstream f(cfg.out);
        if (!f) throw IoError("cannot open '" + cfg.out + "' for writing");
        f << "check,value,pass\n"
          << "intensity_range," << format_real(r.intensity_min) << ':' << format_real(r.intensity_max)
          << ',' << r.intensity_ok << '\n'
          << "ellipticity_range," << format_real(r.eigen_min) << ':' << format_real(r.eigen_max)
          << ',' << r.ellipticity_ok << '\n'
          << "jump_sup," << format_real(r.jump_sup) << ',' << r.jump_ok << '\n'
          << "covariance_mismatch," << format_real(r.covariance_mismatch) << ',' << r.covariance_ok
          << '\n'
          << "derivative_error," << format_real(r.derivative_error) << ',' << r.derivatives_ok
          << '\n';
        if (!f) throw IoError("write to '" + cfg.out + "' failed");
        log << "model " << model.name << ": " << (r.all_ok() ? "all checks pass" : "some checks fail")
            << '\n';
        return table;
    }

    if (cfg.command == "estimate" || cfg.command == "compare") {
        table.rows.push_back(row("parametrix", run_batch(parametrix_trial(e), e.trials, e.seed, e.workers)));
        if (cfg.command == "compare") {
            for (const auto& [m, p] : cfg.euler_pairs)
                table.rows.push_back(row(euler_label(p), run_batch(euler_trial(e, p), m, e.seed, e.workers)));
        }
    } else if (cfg.command == "sweep") {
        const SweepParam param = cfg.sweep_param == "gamma"     ? SweepParam::gamma
                                 : cfg.sweep_param == "epsilon" ? SweepParam::epsilon
                                                                : SweepParam::sigma_a;
        const SweepResult s = sweep(param, cfg.sweep_values, e, cfg.sweep_repeats);
        table.parameter = s.parameter;
        for (std::size_t i = 0; i < s.grid.size(); ++i) {
            ResultRow r = row("parametrix", s.stats[i]);
            r.parameter_value = s.grid[i];
            table.rows.push_back(r);
        }
    } else if (cfg.command == "reference") {
        const Reference ref = compute_reference(model, payoff, e.x0, cfg.params.horizon,
                                                cfg.reference_trials, cfg.reference_steps, cfg.seed,
                                                cfg.workers);
        table.rows.push_back(row("reference[p=" + std::to_string(cfg.reference_steps) + "]", ref.stats));
    } else {
        throw ConfigError("unknown command '" + cfg.command + "'");
    }

    emit_results(table, cfg.out);
    log << to_report(table);
    return table;
}

/// Full command-line entry point; returns the process exit code.
inline int main_entry(int argc, const char* const* argv, std::ostream& log = std::cout,
                      std::ostream& err = std::cerr) {
    CLI::App app{"Unbiased Monte Carlo for state-dependent jump-diffusions"};
    app.require_subcommand(1);
    app.fallthrough();

    std::optional<std::string> config_file;
    app.add_option("-c,--config", config_file, "INI run configuration");

    Overrides overrides;
    struct Flag {
        const char* name;
        const char* key;
        const char* help;
    };
    const Flag flags[] = {
        {"--model", "model.id", "trig | affine | custom"},
        {"--payoff", "payoff.id", "indicator | call"},
        {"--strike", "payoff.strike", "strike k"},
        {"--x0", "model.x0", "start state, comma separated"},
        {"--horizon", "estimator.horizon", "horizon T"},
        {"--trials", "run.trials", "number of trials M"},
        {"--sigma-a", "estimator.sigma_a", "auxiliary noise scale"},
        {"--gamma", "estimator.gamma", "Beta tail exponent"},
        {"--epsilon", "estimator.epsilon", "grid support extension"},
        {"--euler-steps", "euler.steps", "Euler steps p (single pair with M = --trials)"},
        {"--seed", "run.seed", "root seed"},
        {"--workers", "run.workers", "worker threads"},
        {"--out", "run.out", "output CSV path"},
        {"--reference", "reference.value", "known reference value for the error column"},
    };
    std::vector<std::optional<std::string>> values(std::size(flags));
    for (std::size_t i = 0; i < std::size(flags); ++i)
        app.add_option(flags[i].name, values[i], flags[i].help);

    std::string command;
    for (const char* name : {"estimate", "compare", "sweep", "reference", "check-model"}) {
        app.add_subcommand(name)->callback([&command, name] { command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, log, err);
        return kOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e, log, err);
        return kConfigFailure;
    }
    for (std::size_t i = 0; i < std::size(flags); ++i)
        if (values[i]) overrides.emplace_back(flags[i].key, *values[i]);

    try {
        RunConfig cfg = parse_config(config_file, overrides);
        cfg.command = command;
        execute(cfg, log);
        return kOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigFailure;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << '\n';
        return kIoFailure;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kNumericalFailure;
    }
}

}  // namespace jdmc::cli
