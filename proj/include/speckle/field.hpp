#pragma once

#include <complex>
#include <span>
#include <variant>
#include <vector>

#include "speckle/grid.hpp"

namespace speckle {

/// Fourier-space gaussian bump phi0_hat(xi) = a exp(-|xi - c|^2 / (2 w^2)).
struct GaussianBump {
    double amplitude = 1.0;
    double width = 1.0;
    std::vector<double> center; // empty means origin

    double value(std::span<const double> xi) const;
    /// |phi0_hat(xi)|^2, the kinetic initial condition.
    double intensity(std::span<const double> xi) const;
    /// \int |phi0_hat|^2 dxi in closed form.
    double intensity_mass(int dimension) const;
};

struct TabulatedInitial {
    std::vector<std::complex<double>> values; // FFT order, size N^d
};

using InitialData = std::variant<GaussianBump, TabulatedInitial>;

/// Fourier coefficients phi_hat(t, k) on the mode lattice, FFT order.
struct WaveField {
    std::vector<std::complex<double>> amps;
    double time = 0.0;
};

WaveField init_field(const GridSpec& grid, const InitialData& initial);

/// Discrete L2 norm of the wave function:
/// sqrt( (2 pi)^{-d} dk^d sum_k |phi_hat(k)|^2 ), which matches the physical
/// space norm by Parseval.
double l2_norm(const GridSpec& grid, const WaveField& field);

} // namespace speckle
