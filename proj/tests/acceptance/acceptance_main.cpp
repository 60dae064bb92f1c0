// Desk-scale acceptance suite: runs the full pipeline at the default
// configuration (simulate -> kinetic -> ou-sample -> verify) and prints one
// PASS/FAIL line per criterion.  Exits nonzero if any asserted check fails.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>

#include "speckle/csv.hpp"
#include "speckle/experiment.hpp"
#include "speckle/verify.hpp"

using namespace speckle;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

int main(int argc, char** argv) {
    std::string out_dir = "acceptance_run";
    bool reuse = false;
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--out") && i + 1 < argc) out_dir = argv[++i];
        if (!std::strcmp(argv[i], "--reuse")) reuse = true;
    }

    ExperimentConfig cfg = ExperimentConfig::from(Config::parse_string(default_config_text()));
    RunPaths paths{out_dir};

    try {
        const auto t0 = std::chrono::steady_clock::now();
        if (!(reuse && std::filesystem::exists(paths.manifest_json("simulate")))) {
            std::fprintf(stderr, "[acceptance] simulate: %zu rungs ...\n",
                         cfg.eps_ladder.size());
            cmd_simulate(cfg, out_dir);
            std::fprintf(stderr, "[acceptance] simulate done (%.1f s)\n",
                         seconds_since(t0));
        }
        const auto t1 = std::chrono::steady_clock::now();
        if (!(reuse && std::filesystem::exists(paths.manifest_json("kinetic")))) {
            std::fprintf(stderr, "[acceptance] kinetic references ...\n");
            cmd_kinetic(cfg, out_dir);
            std::fprintf(stderr, "[acceptance] kinetic done (%.1f s)\n",
                         seconds_since(t1));
        }
        const auto t2 = std::chrono::steady_clock::now();
        if (!(reuse && std::filesystem::exists(paths.manifest_json("ou-sample")))) {
            std::fprintf(stderr, "[acceptance] ou-sample ...\n");
            cmd_ou_sample(cfg, out_dir);
            std::fprintf(stderr, "[acceptance] ou-sample done (%.1f s)\n",
                         seconds_since(t2));
        }

        const auto report = run_verify(cfg, paths);
        int idx = 0;
        for (const auto& c : report.criteria) {
            ++idx;
            std::printf("[%s] %2d. %s\n", c.pass ? "PASS" : "FAIL", idx, c.name.c_str());
            for (const auto& r : c.reports)
                std::printf("        %-38s stat=%-12.5g thr=%-10.5g %s\n",
                            r.name.c_str(), r.statistic, r.threshold,
                            r.pass ? "ok" : "FAIL");
        }
        std::printf("%s\n", report.all_pass ? "ALL CRITERIA PASSED"
                                            : "ACCEPTANCE FAILURES PRESENT");
        std::fprintf(stderr, "[acceptance] total %.1f s; report at %s\n",
                     seconds_since(t0), paths.report_json().c_str());
        return report.all_pass ? 0 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "acceptance aborted: %s\n", e.what());
        return 2;
    }
}
