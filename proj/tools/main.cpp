#include <exception>
#include <iostream>

#include "CLI11.hpp"

#include "beliefsim/commands.hpp"
#include "beliefsim/errors.hpp"

namespace {

void add_common(CLI::App* cmd, beliefsim::CliOptions& opt) {
    cmd->add_option("config", opt.config_path, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
}

void add_run_options(CLI::App* cmd, beliefsim::CliOptions& opt) {
    cmd->add_option("-o,--out", opt.output_dir,
                    "output directory (falls back to the config, then $BELIEFSIM_OUTPUT_DIR)");
    cmd->add_option("-j,--threads", opt.threads, "worker threads (default: from config)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--window", opt.window, "trailing fraction for rate fits (default 0.5)")
        ->check(CLI::Range(1e-9, 1.0));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"memoryless belief dynamics on directed networks"};
    app.require_subcommand(1);

    beliefsim::CliOptions opt;

    CLI::App* inspect = app.add_subcommand("inspect", "network and signal-model diagnostics");
    add_common(inspect, opt);
    inspect->callback([&] { beliefsim::cmd_inspect(opt); });

    CLI::App* rates = app.add_subcommand("rates", "closed-form learning-rate predictions");
    add_common(rates, opt);
    rates->callback([&] { beliefsim::cmd_rates(opt); });

    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo runs with CSV trajectories");
    add_common(simulate, opt);
    add_run_options(simulate, opt);
    simulate->callback([&] { beliefsim::cmd_simulate(opt); });

    CLI::App* coeffs = app.add_subcommand("coeffs", "schedule mixing-coefficient diagnostics");
    add_common(coeffs, opt);
    coeffs->callback([&] { beliefsim::cmd_coeffs(opt); });

    CLI::App* compare = app.add_subcommand("compare", "predicted vs simulated learning rates");
    add_common(compare, opt);
    add_run_options(compare, opt);
    compare->callback([&] { beliefsim::cmd_compare(opt); });

    try {
        CLI11_PARSE(app, argc, argv);
    } catch (const beliefsim::validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const beliefsim::numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
