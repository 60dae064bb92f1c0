#pragma once

#include <string>
#include <vector>

#include "speckle/experiment.hpp"
#include "speckle/stats.hpp"

namespace speckle {

/// One acceptance criterion: aggregated pass flag plus its sub-reports.
struct Criterion {
    std::string name;
    bool pass = false;
    std::vector<TestReport> reports;
};

struct VerifyReport {
    std::vector<Criterion> criteria;
    bool all_pass = false;
};

/// Run the full acceptance suite against the CSV outputs in the run
/// directory; writes report.json and ladder.csv there as a side effect.
VerifyReport run_verify(const ExperimentConfig& cfg, const RunPaths& paths);

std::string verify_report_json(const ExperimentConfig& cfg, const VerifyReport& report);

} // namespace speckle
