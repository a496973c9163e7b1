#include <CLI11.hpp>

#include "edo/commands.hpp"
#include "edo/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Evolutionary dataset optimisation: evolve populations of datasets for which a "
                 "target algorithm scores well on a chosen fitness metric."};
    app.set_version_flag("--version", edo::kEngineVersion);
    app.require_subcommand(1);

    edo::RunCommand run_cmd;
    std::string run_root, run_seed;
    auto* run = app.add_subcommand("run", "Run an experiment from a config file");
    run->add_option("--config", run_cmd.config_path, "Experiment config file (JSON)")
        ->required();
    run->add_option("--root", run_root, "Archive root (overrides config and EDO_ROOT)");
    run->add_option("--seed", run_seed, "Seed override");
    run->add_option("--workers", run_cmd.workers,
                    "Fitness evaluation threads (default: cores; 1 forces serial)");
    run->add_flag("--dry-run", run_cmd.dry_run, "Validate and print the resolved config only");

    edo::SummariseCommand sum_cmd;
    std::string sum_root;
    auto* summarise = app.add_subcommand("summarise", "Per-epoch fitness/shape progression table");
    summarise->add_option("--root", sum_root, "Archive root (default: EDO_ROOT or ./out)");
    summarise->add_option("--out", sum_cmd.out_csv, "Output CSV path")->required();
    summarise->add_option("--interval", sum_cmd.interval, "Keep every j-th epoch (default 1)");

    edo::RepresentativesCommand rep_cmd;
    std::string rep_root;
    auto* representatives =
        app.add_subcommand("representatives", "Export best/median/worst individuals of an epoch");
    representatives->add_option("--root", rep_root, "Archive root (default: EDO_ROOT or ./out)");
    representatives->add_option("--epoch", rep_cmd.epoch, "Epoch to export")->required();
    representatives->add_option("--out", rep_cmd.out_dir, "Output directory")->required();

    edo::CoverageCommand cov_cmd;
    std::string cov_root;
    auto* coverage = app.add_subcommand("coverage", "All points of all individuals as (epoch, x, y)");
    coverage->add_option("--root", cov_root, "Archive root (default: EDO_ROOT or ./out)");
    coverage->add_option("--out", cov_cmd.out_csv, "Output CSV path")->required();
    coverage->add_option("--interval", cov_cmd.interval, "Epoch sampling interval (default 50)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : edo::kExitConfigError;
    }

    auto optional_path = [](const std::string& s) {
        return s.empty() ? std::optional<std::filesystem::path>{} : std::optional(std::filesystem::path(s));
    };

    if (run->parsed()) {
        run_cmd.root = optional_path(run_root);
        if (!run_seed.empty()) run_cmd.seed = std::stoull(run_seed);
        return edo::cmd_run(run_cmd);
    }
    if (summarise->parsed()) {
        sum_cmd.root = edo::resolve_root(optional_path(sum_root));
        return edo::cmd_summarise(sum_cmd);
    }
    if (representatives->parsed()) {
        rep_cmd.root = edo::resolve_root(optional_path(rep_root));
        return edo::cmd_representatives(rep_cmd);
    }
    if (coverage->parsed()) {
        cov_cmd.root = edo::resolve_root(optional_path(cov_root));
        return edo::cmd_coverage(cov_cmd);
    }
    return edo::kExitConfigError;
}
