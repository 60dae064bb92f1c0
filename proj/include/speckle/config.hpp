#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "speckle/errors.hpp"

namespace speckle {

/// Flat key=value configuration.  '#' starts a comment; keys are dotted
/// lowercase; the raw text is kept verbatim for the run manifest.
class Config {
  public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text);

    bool has(const std::string& key) const;
    const std::string& get(const std::string& key) const; // ConfigError if missing
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;
    long get_long(const std::string& key) const;
    long get_long_or(const std::string& key, long fallback) const;
    std::vector<double> get_double_list(const std::string& key) const;
    std::vector<long> get_long_list(const std::string& key) const;

    void set(const std::string& key, const std::string& value);
    const std::string& text() const { return text_; }
    const std::map<std::string, std::string>& items() const { return values_; }

  private:
    std::map<std::string, std::string> values_;
    std::string text_;
};

/// Typed experiment configuration shared by every CLI subcommand.
struct ExperimentConfig {
    int dimension = 1;
    // correlation model
    std::string corr_family = "gaussian";
    double corr_amplitude = 1.0;
    double corr_length = 1.0;
    // lattice
    double grid_L = 40.0;
    int grid_N = 512;
    double grid_T = 1.0;
    double grid_dt = 0.0; // 0: auto per rung from the Nyquist phase cap
    // ladder
    std::vector<double> eps_ladder{0.5, 0.35, 0.25, 0.18};
    std::vector<long> replicas{2000, 4000, 3000, 3000};
    std::uint64_t seed = 20250810;
    int workers = 0; // 0: SPECKLE_WORKERS env or hardware concurrency
    // initial data
    double init_amplitude = 1.0;
    double init_width = 1.0;
    double init_center = 0.0;
    // probes
    long probe_xi_mode = 11;
    std::vector<long> probe_eta_modes{-2, -1, 0, 1, 2};
    std::vector<double> probe_times{0.25, 0.5, 0.75, 1.0};
    // kinetic solvers
    std::string kinetic_method = "all";
    int kinetic_max_order = 16;
    long kinetic_samples = 200000;
    int kinetic_grid_N = 512;
    double kinetic_dt = 0.005;
    long kinetic_mc_samples = 200000;
    // series evaluator used for covariance references and OU forcing
    long series_samples = 20000;
    // OU sampler
    long ou_replicas = 4000;
    double ou_dt = 0.01;
    double ou_psd_tol = 0.05;

    std::string raw_text;

    static ExperimentConfig from(const Config& config);
    void validate() const;
};

/// The d = 1 desk-scale defaults as a config file body.
std::string default_config_text();

} // namespace speckle
