#pragma once

#include <span>
#include <string>
#include <vector>

#include "speckle/errors.hpp"
#include "speckle/grid.hpp"

namespace speckle {

enum class CorrFamily { gaussian };

CorrFamily corr_family_from_string(const std::string& name);
std::string to_string(CorrFamily family);

/// Spatial covariance R of the white-in-time potential, with its spectral
/// density Rhat >= 0.  Gaussian family: R(x) = A exp(-|x|^2 / (2 l^2)),
/// Rhat(p) = A (2 pi l^2)^{d/2} exp(-l^2 |p|^2 / 2).
struct CorrelationModel {
    int dimension = 1;
    double amplitude = 1.0;   // A = R(0)
    double corr_length = 1.0; // l
    CorrFamily family = CorrFamily::gaussian;

    void validate() const;
    double R0() const { return amplitude; }
    /// Rhat(0); also equals the L1 norm of R for this nonnegative family.
    double rhat_max() const;
};

double eval_R(const CorrelationModel& model, std::span<const double> x);
double eval_Rhat(const CorrelationModel& model, std::span<const double> p);

struct QuadratureSpec {
    double radius_stddevs = 8.0; // half-width of the cube in units of 1/l
    int points_per_dim = 513;
    double tail_tol = 1e-9; // relative tail mass allowed outside the cube
};

struct DiffusionMatrix {
    int dimension = 1;
    std::vector<double> entries; // d x d, row major
    double tail_estimate = 0;    // relative mass left outside the quadrature cube

    double at(int i, int j) const { return entries[std::size_t(i) * dimension + j]; }
    double min_eigenvalue() const;
    double trace() const;
};

/// D = (2 pi)^{-d} \int Rhat(p) p (x) p dp by tensor trapezoid quadrature.
DiffusionMatrix diffusion_matrix(const CorrelationModel& model,
                                 const QuadratureSpec& quad = {});

/// Per-mode variance weights for spectral synthesis of the noise field:
/// w_k = Rhat(k) dk^d / (2 pi)^d, so that sum_k w_k -> R(0) as the box grows.
struct ModeWeights {
    std::vector<double> weights; // FFT order, size N^d
    double discrete_R0 = 0;      // sum of weights
    bool aliasing_warning = false;
    double nyquist_fraction = 0; // Rhat(k_nyq) / Rhat(0)
};

ModeWeights mode_weights(const CorrelationModel& model, const GridSpec& grid,
                         double aliasing_fraction = 1e-6);

} // namespace speckle
