#include "speckle/csv.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "speckle/errors.hpp"

namespace speckle {

std::string format_double(double v) {
    char buf[40];
    // shortest representation that round-trips
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        double back = 0;
        std::sscanf(buf, "%lf", &back);
        if (back == v) return buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_probe_csv(const std::string& path, const Ensemble& e) {
    std::string out;
    out.reserve(64 * std::size_t(e.replicas) * e.n_times() * e.n_etas() + 64);
    out += "replica,t,eta_index,re_X,im_X,Q,re_scriptQ,im_scriptQ\n";
    for (long r = 0; r < e.replicas; ++r)
        for (std::size_t ti = 0; ti < e.n_times(); ++ti)
            for (std::size_t j = 0; j < e.n_etas(); ++j) {
                const auto x = e.at(r, ti, j);
                const auto sq = e.sq_at(r, ti);
                out += std::to_string(r);
                out += ',';
                out += format_double(e.times[ti]);
                out += ',';
                out += std::to_string(j);
                out += ',';
                out += format_double(x.real());
                out += ',';
                out += format_double(x.imag());
                out += ',';
                out += format_double(e.q_at(r, ti));
                out += ',';
                out += format_double(sq.real());
                out += ',';
                out += format_double(sq.imag());
                out += '\n';
            }
    write_file_atomic(path, out);
}

Ensemble read_probe_csv(const std::string& path, double eps,
                        const std::vector<double>& etas,
                        const std::vector<int>& eta_modes) {
    std::ifstream in(path);
    if (!in) throw IoError("csv: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw IoError("csv: empty file " + path);

    Ensemble e;
    e.eps = eps;
    e.etas = etas;
    e.eta_modes = eta_modes;
    const std::size_t J = etas.size();

    std::vector<double> times;
    long row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        long replica, eta_index;
        double t, re, im, q, sre, sim;
        if (std::sscanf(line.c_str(), "%ld,%lf,%ld,%lf,%lf,%lf,%lf,%lf", &replica, &t,
                        &eta_index, &re, &im, &q, &sre, &sim) != 8)
            throw IoError("csv: malformed row in " + path);
        if (replica == 0 && eta_index == 0) times.push_back(t);
        if (e.times.empty() && replica > 0) e.times = times;
        e.X.emplace_back(re, im);
        if (std::size_t(eta_index) == 0) {
            e.Q.push_back(q);
            e.scriptQ.emplace_back(sre, sim);
        }
        ++row;
    }
    if (e.times.empty()) e.times = times; // single-replica file
    if (e.times.empty() || J == 0) throw IoError("csv: no rows in " + path);
    e.replicas = long(e.X.size() / (e.times.size() * J));
    if (e.X.size() != std::size_t(e.replicas) * e.times.size() * J)
        throw IoError("csv: ragged probe file " + path);
    return e;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path staging = target.string() + ".staging";
    {
        std::ofstream out(staging, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + staging.string() + "'");
        out.write(content.data(), std::streamsize(content.size()));
        if (!out) throw IoError("short write to '" + staging.string() + "'");
    }
    fs::rename(staging, target);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string sha256_file(const std::string& path) {
    return sha256_hex(read_file(path));
}

} // namespace speckle
