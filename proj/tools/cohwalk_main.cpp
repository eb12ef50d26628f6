// Command-line front end: simulates discrete-time quantum walks, evaluates
// the coherence and non-classicality quantifiers, and emits CSV tables and
// SVG charts. See README.md for the config schema.

#include <CLI11.hpp>

#include "cohwalk/cli.hpp"
#include "cohwalk/version.hpp"

namespace {

void add_common(CLI::App* cmd, cohwalk::cli::Options& opt) {
    cmd->add_option("config", opt.config_path, "experiment config file (JSON)")
        ->required();
    cmd->add_option("-o,--output", opt.output_dir,
                    "output directory (overrides config and COHWALK_OUTPUT_DIR)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"discrete-time quantum walk statistics: coherence and "
                 "non-classicality quantifiers"};
    app.set_version_flag("--version", cohwalk::version);
    app.require_subcommand(1);

    cohwalk::cli::Options opt;
    int steps_flag = -1;

    auto* simulate = app.add_subcommand("simulate", "one-time distribution P(x, c, n)");
    add_common(simulate, opt);
    simulate->add_option("--steps", steps_flag, "evolve this many steps instead of N");
    simulate->add_flag("--dense", opt.dense, "emit the full parity-allowed grid");

    auto* quantify = app.add_subcommand("quantify", "K and both C forms, identity-checked");
    add_common(quantify, opt);
    quantify->add_flag("--sweep", opt.sweep,
                       "evaluate the reference angles {0,7,11,23,34,47} deg for both "
                       "pure initial coins");

    auto* table1 = app.add_subcommand("table1",
                                      "theory and randomizing K over the reference grid "
                                      "(N=20, M=10)");
    add_common(table1, opt);

    auto* visualize = app.add_subcommand("visualize",
                                         "direct vs composed distribution tables and their "
                                         "difference (M = N/2)");
    add_common(visualize, opt);
    visualize->add_flag("--dense", opt.dense, "emit the full parity-allowed grid");

    auto* montecarlo = app.add_subcommand("montecarlo",
                                          "error bars of K and C under parameter uncertainty");
    add_common(montecarlo, opt);

    auto* lindblad = app.add_subcommand("lindblad-check",
                                        "generalized K = C check for a Lindblad generator");
    add_common(lindblad, opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cohwalk::cli::exit_config;
    }

    if (simulate->parsed() && steps_flag >= 0) opt.steps = steps_flag;
    const std::string command = app.get_subcommands().front()->get_name();
    return cohwalk::cli::run(command, opt);
}
