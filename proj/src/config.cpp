#include "speckle/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace speckle {

namespace {
std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}
} // namespace

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
}

Config Config::parse_string(const std::string& text) {
    Config c;
    c.text_ = text;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        c.values_[key] = value;
    }
    return c;
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

const std::string& Config::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("config: missing key '" + key + "'");
    return it->second;
}

std::string Config::get_or(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const {
    const std::string& v = get(key);
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError("config: key '" + key + "' is not a number: " + v);
    return x;
}

double Config::get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long Config::get_long(const std::string& key) const {
    const double x = get_double(key);
    const long r = long(x);
    if (double(r) != x)
        throw ConfigError("config: key '" + key + "' is not an integer");
    return r;
}

long Config::get_long_or(const std::string& key, long fallback) const {
    return has(key) ? get_long(key) : fallback;
}

std::vector<double> Config::get_double_list(const std::string& key) const {
    const std::string& v = get(key);
    std::vector<double> out;
    std::istringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        char* end = nullptr;
        const double x = std::strtod(item.c_str(), &end);
        if (end == item.c_str())
            throw ConfigError("config: key '" + key + "' has a bad list entry: " + item);
        out.push_back(x);
    }
    if (out.empty()) throw ConfigError("config: key '" + key + "' is an empty list");
    return out;
}

std::vector<long> Config::get_long_list(const std::string& key) const {
    std::vector<long> out;
    for (double x : get_double_list(key)) {
        const long r = long(x);
        if (double(r) != x)
            throw ConfigError("config: key '" + key + "' has a non-integer entry");
        out.push_back(r);
    }
    return out;
}

void Config::set(const std::string& key, const std::string& value) {
    values_[key] = value;
    text_ += key + "=" + value + "\n";
}

ExperimentConfig ExperimentConfig::from(const Config& c) {
    ExperimentConfig e;
    e.dimension = int(c.get_long_or("dimension", 1));
    e.corr_family = c.get_or("corr.family", "gaussian");
    e.corr_amplitude = c.get_double_or("corr.amplitude", 1.0);
    e.corr_length = c.get_double_or("corr.length", 1.0);
    e.grid_L = c.get_double_or("grid.L", 40.0);
    e.grid_N = int(c.get_long_or("grid.N", 512));
    e.grid_T = c.get_double_or("grid.T", 1.0);
    e.grid_dt = c.get_double_or("grid.dt", 0.0);
    if (c.has("eps")) e.eps_ladder = c.get_double_list("eps");
    if (c.has("replicas")) e.replicas = c.get_long_list("replicas");
    e.seed = std::uint64_t(c.get_long_or("seed", 20250810));
    e.workers = int(c.get_long_or("workers", 0));
    e.init_amplitude = c.get_double_or("init.amplitude", 1.0);
    e.init_width = c.get_double_or("init.width", 1.0);
    e.init_center = c.get_double_or("init.center", 0.0);
    e.probe_xi_mode = c.get_long_or("probe.xi_mode", 11);
    if (c.has("probe.eta_modes")) e.probe_eta_modes = c.get_long_list("probe.eta_modes");
    if (c.has("probe.times")) e.probe_times = c.get_double_list("probe.times");
    e.kinetic_method = c.get_or("kinetic.method", "all");
    e.kinetic_max_order = int(c.get_long_or("kinetic.max_order", 16));
    e.kinetic_samples = c.get_long_or("kinetic.samples", 200000);
    e.kinetic_mc_samples = c.get_long_or("kinetic.mc_samples", e.kinetic_samples);
    e.kinetic_grid_N = int(c.get_long_or("kinetic.grid_N", 512));
    e.kinetic_dt = c.get_double_or("kinetic.dt", 0.005);
    e.series_samples = c.get_long_or("series.samples", 20000);
    e.ou_replicas = c.get_long_or("ou.replicas", 4000);
    e.ou_dt = c.get_double_or("ou.dt", 0.01);
    e.ou_psd_tol = c.get_double_or("ou.psd_tol", 0.05);
    e.raw_text = c.text();
    e.validate();
    return e;
}

std::string default_config_text() {
    return "dimension=1\n"
           "corr.family=gaussian\n"
           "corr.amplitude=1.0\n"
           "corr.length=1.0\n"
           "grid.L=40\n"
           "grid.N=512\n"
           "grid.T=1.0\n"
           "grid.dt=0\n"
           "eps=0.5,0.35,0.25,0.18\n"
           "replicas=2000,4000,3000,3000\n"
           "seed=20250810\n"
           "init.amplitude=1.0\n"
           "init.width=1.0\n"
           "init.center=0.0\n"
           "probe.xi_mode=11\n"
           "probe.eta_modes=-2,-1,0,1,2\n"
           "probe.times=0.25,0.5,0.75,1.0\n"
           "kinetic.method=all\n"
           "kinetic.max_order=16\n"
           "kinetic.samples=200000\n"
           "kinetic.grid_N=512\n"
           "kinetic.dt=0.005\n"
           "series.samples=20000\n"
           "ou.replicas=4000\n"
           "ou.dt=0.01\n"
           "ou.psd_tol=0.05\n";
}

void ExperimentConfig::validate() const {
    if (eps_ladder.empty()) throw ConfigError("config: eps ladder is empty");
    for (double eps : eps_ladder)
        if (eps <= 0 || eps > 1) throw ConfigError("config: eps must lie in (0,1]");
    if (replicas.size() != eps_ladder.size() && replicas.size() != 1)
        throw ConfigError("config: replicas must match the eps ladder (or be one value)");
    for (long r : replicas)
        if (r < 1) throw ConfigError("config: replicas must be positive");
    if (kinetic_method != "all" && kinetic_method != "mc" &&
        kinetic_method != "series" && kinetic_method != "grid")
        throw ConfigError("config: kinetic.method must be one of all|mc|series|grid");
    if (probe_times.empty()) throw ConfigError("config: probe.times is empty");
}

} // namespace speckle
