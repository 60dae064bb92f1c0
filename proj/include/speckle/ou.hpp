#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "speckle/kinetic.hpp"
#include "speckle/stats.hpp"

namespace speckle {

/// Parameters of the limiting time-inhomogeneous OU field at a fixed base
/// frequency xi.  Offsets eta_j are along axis 0.
struct OUParams {
    std::vector<double> xi;
    std::vector<double> etas;
    std::vector<double> times; // output times, multiples of dt
    double horizon = 1.0;
    double dt = 0.01;
    double psd_tol = 0.05; // allowed negative-eigenvalue defect, relative
    double R0 = 1.0;
    std::complex<double> phi0{1.0, 0.0};

    void validate() const;
};

struct OUSampleResult {
    Ensemble ensemble;     // same raw layout as solver ensembles; Q fields zero
    double max_psd_defect; // worst clipped eigenvalue, relative to the largest
};

/// Euler sampling of dX = -1/2 R0 X dt + B(dt, eta): per step a joint
/// circular complex Gaussian increment over the offsets with covariance
/// dt * [Uhat(s, eta_j - eta_k, xi)], left endpoint, eigenvalue-clipped PSD.
OUSampleResult sample_ou_paths(const OUParams& params, CovarianceEvaluator& cov,
                               long replicas, std::uint64_t seed);

std::complex<double> analytic_mean(const OUParams& params, double t);

struct CovPair {
    std::complex<double> quadrature;    // int_0^t e^{-R0 (t-s)} Uhat(s, d_eta) ds
    std::complex<double> fhat_identity; // fhat(t, d_eta) - |phi0|^2 e^{-R0 t}
    double quadrature_err = 0;
    double fhat_err = 0;
};

CovPair analytic_cov(const OUParams& params, CovarianceEvaluator& cov, double t,
                     int j, int k);

} // namespace speckle
