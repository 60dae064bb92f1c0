#include "speckle/compensator.hpp"

#include <algorithm>
#include <cmath>

#include "speckle/errors.hpp"

namespace speckle {

void ProbeSpec::validate(const GridSpec& grid) const {
    if (int(xi_modes.size()) != grid.dimension)
        throw ProbeError("probe: xi_modes must have one entry per dimension");
    if (eta_modes.empty()) throw ProbeError("probe: eta_modes must be nonempty");
    if (times.empty()) throw ProbeError("probe: times must be nonempty");
    const int half = grid.modes_per_dim / 2;
    for (int c : xi_modes)
        if (c < -half || c >= half) throw ProbeError("probe: xi mode outside lattice");
    for (int m : eta_modes) {
        const int shifted = xi_modes[0] + m;
        if (shifted < -half || shifted >= half)
            throw ProbeError("probe: eta offset leaves the lattice");
    }
    double prev = -1.0;
    for (double t : times) {
        if (t < 0 || t > grid.horizon + 1e-12)
            throw ProbeError("probe: time outside [0, horizon]");
        if (t <= prev) throw ProbeError("probe: times must be strictly increasing");
        const double r = t / grid.dt;
        if (std::abs(r - std::round(r)) > 1e-6)
            throw ProbeError("probe: times must be multiples of dt");
        prev = t;
    }
}

std::vector<double> ProbeSpec::xi(const GridSpec& grid) const {
    std::vector<double> v(grid.dimension);
    for (int a = 0; a < grid.dimension; ++a) v[a] = xi_modes[a] * grid.dk();
    return v;
}

double ProbeSpec::eta_realized(const GridSpec& grid, int j) const {
    return eta_modes[std::size_t(j)] * grid.dk() / (grid.epsilon * grid.epsilon);
}

std::size_t ProbeSpec::mode_index(const GridSpec& grid, int j) const {
    int idx[3];
    for (int a = 0; a < grid.dimension; ++a)
        idx[a] = grid.index_of_mode(xi_modes[a]);
    idx[0] = grid.index_of_mode(xi_modes[0] + eta_modes[std::size_t(j)]);
    return grid.flatten(idx);
}

std::size_t ProbeSpec::xi_index(const GridSpec& grid) const {
    int idx[3];
    for (int a = 0; a < grid.dimension; ++a)
        idx[a] = grid.index_of_mode(xi_modes[a]);
    return grid.flatten(idx);
}

std::vector<std::complex<double>> compensate(const WaveField& field,
                                             const ProbeSpec& probe,
                                             const GridSpec& grid) {
    probe.validate(grid);
    const double t = field.time;
    const double eps2 = grid.epsilon * grid.epsilon;
    std::vector<std::complex<double>> out(probe.eta_modes.size());
    for (std::size_t j = 0; j < probe.eta_modes.size(); ++j) {
        const std::size_t f = probe.mode_index(grid, int(j));
        const double ksq = grid.mode_sq(f);
        const double phase = 0.5 * t * ksq / eps2;
        out[j] = field.amps[f] * std::polar(1.0, phase);
    }
    return out;
}

} // namespace speckle
