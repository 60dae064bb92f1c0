#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "speckle/config.hpp"
#include "speckle/kinetic.hpp"
#include "speckle/ou.hpp"
#include "speckle/solver.hpp"
#include "speckle/stats.hpp"

namespace speckle {

inline constexpr const char* kVersion = "0.1.0";

int default_workers(int requested);
void parallel_for(long count, int workers, const std::function<void(long)>& body);

/// Everything needed to run one ladder rung.
struct RungSetup {
    double eps = 1.0;
    GridSpec grid;
    CorrelationModel model;
    GaussianBump bump;
    ProbeSpec probe;
    long replicas = 0;
    std::uint64_t rung_seed = 0;
};

RungSetup make_rung(const ExperimentConfig& cfg, std::size_t rung_index);
CorrelationModel model_from(const ExperimentConfig& cfg);
GaussianBump bump_from(const ExperimentConfig& cfg);
/// Probe momentum k_j = (xi_mode + m_j) dk along axis 0.
std::vector<double> probe_momentum(const ExperimentConfig& cfg, long m);

struct TrajectoryDiagnostics {
    long replica = 0;
    double max_norm_drift = 0;
    double q_final = 0;
    double q_bound = 0;
    int violations = 0;
};

struct RungData {
    Ensemble ensemble;
    std::vector<TrajectoryDiagnostics> diagnostics;
};

/// Run all replicas of one rung on a bounded worker pool; results are
/// assembled in replica order regardless of scheduling.
RungData run_rung(const RungSetup& setup, int workers);

// Output layout inside the run directory ------------------------------------
struct RunPaths {
    std::string dir;
    std::string probe_csv(double eps) const;
    std::string diagnostics_csv(double eps) const;
    std::string kinetic_csv() const { return dir + "/kinetic.csv"; }
    std::string refs_csv() const { return dir + "/kinetic_refs.csv"; }
    std::string ou_csv() const { return dir + "/ou.csv"; }
    std::string report_json() const { return dir + "/report.json"; }
    std::string ladder_csv() const { return dir + "/ladder.csv"; }
    std::string manifest_json(const std::string& command) const {
        return dir + "/manifest_" + command + ".json";
    }
    std::string qq_normal_csv() const { return dir + "/qq_normal.csv"; }
    std::string qq_exponential_csv() const { return dir + "/qq_exponential.csv"; }
    std::string cov_heat_csv() const { return dir + "/cov_heat.csv"; }
};

void write_manifest(const RunPaths& paths, const std::string& command,
                    const ExperimentConfig& cfg,
                    const std::vector<std::uint64_t>& seeds,
                    const std::vector<std::string>& files, double wall_seconds,
                    const std::vector<std::pair<std::string, double>>& extra = {});

/// Check every file recorded in the manifest against its stored checksum.
void check_manifest_files(const RunPaths& paths, const std::string& command);

// Subcommands ----------------------------------------------------------------
void cmd_simulate(const ExperimentConfig& cfg, const std::string& out_dir);
void cmd_kinetic(const ExperimentConfig& cfg, const std::string& out_dir);
void cmd_ou_sample(const ExperimentConfig& cfg, const std::string& out_dir);
int cmd_verify(const ExperimentConfig& cfg, const std::string& out_dir);
void cmd_report(const ExperimentConfig& cfg, const std::string& out_dir);

// Reference bundle produced by cmd_kinetic and consumed by cmd_verify --------
struct KineticRefs {
    // wtilde by the grid solver: [time index][probe offset index]
    std::vector<std::vector<double>> wtilde_grid, wtilde_grid_err;
    // limit fhat(T, dm) at the finest rung's realized offsets (OU identity)
    std::map<long, ComplexWithError> fhat_limit_by_dm;
    // probe-pair second-moment references per rung, keyed by (m_j, m_k)
    std::vector<std::map<std::pair<long, long>, ComplexWithError>> fhat_pair_by_rung;
    // time-quadrature covariance at the finest rung's realized offsets
    std::map<long, ComplexWithError> covq_by_dm;
    // series reference for E[Q(T)] (eps independent)
    double q_ref = 0, q_ref_err = 0;
    // sigma^2(T, k_j) per probe offset
    std::vector<double> sigma2_final;
};

KineticRefs load_refs(const ExperimentConfig& cfg, const RunPaths& paths);

} // namespace speckle
