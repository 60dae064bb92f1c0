#pragma once

#include <string>
#include <vector>

#include "speckle/stats.hpp"

namespace speckle {

/// Shortest round-trip decimal form of a double ("%.17g" fallback).
std::string format_double(double v);

/// Probe CSV schema shared by the solver and the OU sampler:
///   replica,t,eta_index,re_X,im_X,Q,re_scriptQ,im_scriptQ
void write_probe_csv(const std::string& path, const Ensemble& ensemble);
Ensemble read_probe_csv(const std::string& path, double eps,
                        const std::vector<double>& etas,
                        const std::vector<int>& eta_modes);

/// Write text to path atomically (staging file + rename).
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

} // namespace speckle
