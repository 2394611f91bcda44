#include "prmcc/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

namespace {

void add_common(CLI::App& cmd, prmcc::cli::RunOptions& opt, bool with_out)
{
    cmd.add_option("--config", opt.config_path, "experiment config (JSON) or run manifest")->required();
    if (with_out) {
        cmd.add_option("--out", opt.out_dir, "output directory")->default_val(".");
    }
    cmd.add_option("--workers", opt.workers, "worker threads (default: config value, else 1)");
    cmd.add_option_function<std::uint64_t>(
        "--seed-override", [&opt](const std::uint64_t& s) { opt.seed_override = s; }, "replace the config seed");
    cmd.add_flag("--theory-overlay", opt.theory_overlay, "include closed-form predictions");
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Proportionate recursive maximum-correntropy filtering experiments"};
    app.set_version_flag("--version", prmcc::kVersion);
    app.require_subcommand(1);

    prmcc::cli::RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "run a Monte-Carlo experiment");
    add_common(*run_cmd, run, true);

    prmcc::cli::RunOptions theory;
    auto* theory_cmd = app.add_subcommand("theory", "print closed-form predictions as JSON");
    add_common(*theory_cmd, theory, false);

    prmcc::cli::SweepOptions sweep;
    std::string grid;
    auto* sweep_cmd = app.add_subcommand("sweep", "sweep theta or lambda");
    add_common(*sweep_cmd, sweep.run, true);
    sweep_cmd->add_option("--parameter", sweep.parameter, "theta or lambda (default: config sweep.parameter)")
        ->check(CLI::IsMember({"theta", "lambda"}));
    sweep_cmd->add_option("--grid", grid, "comma list, or start:step:stop");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : prmcc::cli::kConfigError;
    }

    if (*run_cmd) {
        return prmcc::cli::cmd_run(run);
    }
    if (*theory_cmd) {
        return prmcc::cli::cmd_theory(theory);
    }
    return prmcc::cli::with_exit_codes(std::cerr, [&] {
        if (!grid.empty()) {
            sweep.grid = prmcc::cli::parse_grid(grid);
        }
        return prmcc::cli::cmd_sweep(sweep);
    });
}
