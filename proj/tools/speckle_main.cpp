// speckle: ensemble laboratory for the weakly forced Ito-Schrodinger
// equation and its Ornstein-Uhlenbeck limit statistics.

#include <CLI11.hpp>

#include <cstdio>
#include <string>

#include "speckle/experiment.hpp"
#include "speckle/verify.hpp"

using namespace speckle;

namespace {

ExperimentConfig load_config(const std::string& path, long seed_override,
                             int workers_override) {
    Config raw = Config::parse_file(path);
    ExperimentConfig cfg = ExperimentConfig::from(raw);
    if (seed_override >= 0) cfg.seed = std::uint64_t(seed_override);
    if (workers_override > 0) cfg.workers = workers_override;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"speckle: split-step ensembles, kinetic references and "
                 "limit-law verification for weak random forcing"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "runs/default";
    long seed_override = -1;
    int workers_override = 0;
    app.add_option("--config", config_path, "key=value configuration file")->required();
    app.add_option("--out", out_dir, "run directory for CSV/JSON outputs");
    app.add_option("--seed", seed_override, "override the base seed");
    app.add_option("--workers", workers_override,
                   "worker threads (default: SPECKLE_WORKERS or hardware)");

    auto* simulate = app.add_subcommand(
        "simulate", "run the epsilon ladder and write probe CSVs");
    auto* kinetic = app.add_subcommand(
        "kinetic", "compute kinetic solutions and reference tables");
    auto* ou = app.add_subcommand("ou-sample", "sample the limiting OU field");
    auto* verify = app.add_subcommand(
        "verify", "run the acceptance checks against the run directory");
    auto* report =
        app.add_subcommand("report", "emit tidy plot-data CSVs (QQ, ladder, heat)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const ExperimentConfig cfg =
            load_config(config_path, seed_override, workers_override);
        if (simulate->parsed()) {
            cmd_simulate(cfg, out_dir);
        } else if (kinetic->parsed()) {
            cmd_kinetic(cfg, out_dir);
        } else if (ou->parsed()) {
            cmd_ou_sample(cfg, out_dir);
        } else if (verify->parsed()) {
            const int rc = cmd_verify(cfg, out_dir);
            if (rc != 0) std::fprintf(stderr, "verify: one or more criteria failed\n");
            return rc;
        } else if (report->parsed()) {
            cmd_report(cfg, out_dir);
        }
        return 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
