#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "speckle/field.hpp"
#include "speckle/grid.hpp"

namespace speckle {

/// Probe layout for the compensated wave field.  The base frequency xi is a
/// lattice mode and the offsets are integer mode shifts m_j along axis 0, so
/// that eta_j = m_j dk / eps^2 and xi + eps^2 eta_j is again a lattice mode.
struct ProbeSpec {
    std::vector<int> xi_modes;  // d integer mode coordinates
    std::vector<int> eta_modes; // offsets m_j along axis 0
    std::vector<double> times;  // sorted, multiples of dt, within [0, horizon]

    void validate(const GridSpec& grid) const;
    std::vector<double> xi(const GridSpec& grid) const;
    /// Realized offset frequency eta_j (axis 0 component; other components 0).
    double eta_realized(const GridSpec& grid, int j) const;
    /// Flat lattice index of xi + m_j dk e_0.
    std::size_t mode_index(const GridSpec& grid, int j) const;
    std::size_t xi_index(const GridSpec& grid) const;
};

/// X_xi^eps(t, eta_j) for one trajectory at the probe times.
struct CompensatedSample {
    double eps = 1.0;
    std::uint64_t base_seed = 0;
    std::uint64_t replica = 0;
    std::vector<double> times;
    std::vector<int> eta_modes;
    std::vector<std::complex<double>> values; // [time][eta], row major

    std::complex<double> at(std::size_t ti, std::size_t j) const {
        return values[ti * eta_modes.size() + j];
    }
};

/// Compensated values phi_hat(t, xi + m_j dk) * exp(i t |xi + m_j dk|^2 / (2 eps^2))
/// for every probe offset, evaluated at the field's current time.
std::vector<std::complex<double>> compensate(const WaveField& field,
                                             const ProbeSpec& probe,
                                             const GridSpec& grid);

} // namespace speckle
