#pragma once

#include <cstddef>
#include <vector>

#include "speckle/errors.hpp"

namespace speckle {

/// Periodic box [0,L)^d with N modes per dimension in FFT order.
/// Mode integer coordinates run over {-N/2, ..., N/2-1}; the flat index of
/// coordinate m is (m mod N), matching the layout FFTW uses.
struct GridSpec {
    int dimension = 1;
    double box_length = 40.0;
    int modes_per_dim = 512;
    double dt = 1e-3;
    double epsilon = 1.0; // dispersion scale: free flight is |k|^2/(2 eps^2)
    double horizon = 1.0;

    void validate() const;

    double dk() const;
    double dx() const { return box_length / modes_per_dim; }
    std::size_t total_modes() const;
    long steps() const; // horizon / dt, validated to be integral

    /// Mode value along one axis for flat index j in [0,N).
    double mode_component(int j) const;
    /// Flat index of the axis coordinate m in {-N/2,...,N/2-1}.
    int index_of_mode(int m) const;

    void unflatten(std::size_t flat, int* idx) const;      // idx in [0,N)^d
    std::size_t flatten(const int* idx) const;
    /// Index of the mode at coordinates (idx + shift) with periodic wrap.
    std::size_t shifted_index(std::size_t flat, const int* shift) const;
    /// Mode vector (length d) for a flat index.
    std::vector<double> mode_vector(std::size_t flat) const;
    double mode_sq(std::size_t flat) const;

    /// Largest dt with |k_max|^2 dt / (4 eps^2) <= pi/4 at the lattice
    /// Nyquist mode, rounded down so horizon/dt is a multiple of round_to.
    static double auto_dt(int modes_per_dim, double box_length, double eps,
                          double horizon, int round_to = 20);
};

} // namespace speckle
