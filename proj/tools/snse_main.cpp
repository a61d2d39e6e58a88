#include <cstdio>
#include <exception>

#include "CLI11.hpp"

#include "snse/driver.hpp"
#include "snse/errors.hpp"
#include "snse/io.hpp"

namespace {

void add_common(CLI::App* cmd, snse::CmdOptions& opt) {
    cmd->add_option("-c,--config", opt.config_path, "JSON run configuration");
    cmd->add_option("-o,--out", opt.out_dir, "output directory (overrides the config)");
    cmd->add_option("--mode", opt.mode, "norm mode")->check(CLI::IsMember({"l3", "h12"}));
    cmd->add_option("--seeds", opt.seeds, "ensemble base seed");
    cmd->add_option("--paths", opt.paths, "number of Monte Carlo paths");
    cmd->add_option("--workers", opt.workers, "worker threads (default: SNSE_WORKERS or 1)");
}

int dispatch(int argc, char** argv) {
    CLI::App app{"stochastic Navier-Stokes cascade toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", snse::version_string());

    snse::CmdOptions opt;
    CLI::App* dec =
        app.add_subcommand("decompose", "split an initial datum into bulk + dyadic levels");
    add_common(dec, opt);
    dec->add_option("--input", opt.input_field, "read the datum from a field file");
    CLI::App* sim = app.add_subcommand("simulate", "run the cascade (or direct) ensemble");
    add_common(sim, opt);
    sim->add_flag("--dense-output", opt.dense_output, "record path 0 densely (direct runs)");
    CLI::App* ver = app.add_subcommand("verify", "Monte Carlo verification suite");
    add_common(ver, opt);
    CLI::App* rep =
        app.add_subcommand("report", "summarize and check an existing output directory");
    add_common(rep, opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    if (dec->parsed()) return snse::cmd_decompose(opt);
    if (sim->parsed()) return snse::cmd_simulate(opt);
    if (ver->parsed()) return snse::cmd_verify(opt);
    return snse::cmd_report(opt);
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const snse::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const snse::InfeasibleError& e) {
        std::fprintf(stderr, "infeasible: %s (best achievable %.6g, try n_per_axis >= %d)\n",
                     e.what(), e.best_achievable, e.suggested_n_per_axis);
        return 2;
    } catch (const snse::NumericalError& e) {
        if (e.t >= 0.0)
            std::fprintf(stderr, "numerical failure at t = %.6g: %s\n", e.t, e.what());
        else
            std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
