#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "commands.hpp"
#include "ptrap/error.hpp"

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kNumeric = 3, kInstability = 4 };

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Paul trap field, Mathieu and trajectory pipeline"};
    app.set_version_flag("--version", std::string(PTRAP_VERSION));
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir = ".";
    int threads = 0;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory (created if missing)");
    app.add_option("--threads", threads, "worker threads, 0 = runtime default")->check(CLI::NonNegativeNumber);
    app.add_option("--set", overrides, "override a config field: dotted.path=value (repeatable)");

    ptrap::cli::Context ctx;
    std::string grid_path;
    auto* solve = app.add_subcommand("solve-field", "solve the Laplace problem and fit the multipole coefficients");
    auto* fit = app.add_subcommand("fit", "fit multipole coefficients to an existing grid dump");
    fit->add_option("--grid", grid_path, "PTGRID01 dump")->required()->check(CLI::ExistingFile);
    auto* aq = app.add_subcommand("aq", "Mathieu a, q, beta and secular frequency per axis");
    auto* sim = app.add_subcommand("simulate", "integrate a trajectory and extract secular frequencies");
    auto* trace = app.add_subcommand("trace", "equi-frequency lines in (V_rf, U_dc)");
    auto* sweep = app.add_subcommand("sweep", "axial frequency versus filament height");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kConfig;
    }

    try {
        ctx.config = config_path.empty() ? ptrap::parse_run_config("", overrides)
                                         : ptrap::load_run_config(config_path, overrides);
        ctx.out_dir = out_dir;
        ctx.grid_path = grid_path;
        ctx.threads = threads;
#ifdef _OPENMP
        if (threads > 0) omp_set_num_threads(threads);
#endif
        if (solve->parsed()) {
            ctx.command = "solve-field";
            ptrap::cli::solve_field(ctx, std::cout);
        } else if (fit->parsed()) {
            ctx.command = "fit";
            ptrap::cli::fit(ctx, std::cout);
        } else if (aq->parsed()) {
            ctx.command = "aq";
            ptrap::cli::aq(ctx, std::cout);
        } else if (sim->parsed()) {
            ctx.command = "simulate";
            ptrap::cli::simulate(ctx, std::cout);
        } else if (trace->parsed()) {
            ctx.command = "trace";
            ptrap::cli::trace(ctx, std::cout);
        } else if (sweep->parsed()) {
            ctx.command = "sweep";
            ptrap::cli::sweep(ctx, std::cout);
        }
    } catch (const ptrap::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const ptrap::PreconditionError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kConfig;
    } catch (const ptrap::InstabilityError& e) {
        std::cerr << "unstable: " << e.what() << "\n";
        return kInstability;
    } catch (const ptrap::SolverNotConvergedError& e) {
        std::cerr << "numeric failure: " << e.what() << " (residual " << e.residual() << " after "
                  << e.iterations() << " iterations)\n";
        return kNumeric;
    } catch (const ptrap::Error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumeric;
    }
    return kOk;
}
