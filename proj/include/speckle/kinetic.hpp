#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "speckle/correlation.hpp"
#include "speckle/field.hpp"

namespace speckle {

struct SeriesConfig {
    int max_order = 16;
    long samples = 20000; // per order
    double tail_tol = 1e-6;
    std::uint64_t seed = 0x6b696e65ULL;
};

/// Certified relative tail of the collision series beyond max_order:
/// e^{-r0t} sum_{n > N} (r0t)^n / n!  (a Poisson tail, always in [0,1]).
double series_tail_bound(double r0t, int max_order);

struct ValueWithError {
    double value = 0;
    double stderror = 0;
    double tail_bound = 0;
};

struct ComplexWithError {
    std::complex<double> value{0, 0};
    double stderror = 0;
    double tail_bound = 0;
};

/// w_tilde(t, xi) by simulating the momentum jump process: exponential
/// holding times with rate R(0), jump displacement drawn from the
/// Rhat-normalized density.
ValueWithError solve_wtilde_mc(const CorrelationModel& model, const GaussianBump& bump,
                               double t, std::span<const double> xi, long samples,
                               std::uint64_t seed);

/// Truncated Duhamel series for f_hat(t, eta, xi); ordered-simplex Monte
/// Carlo per order with the certified factorial tail bound.
ComplexWithError fhat_series(const CorrelationModel& model, const GaussianBump& bump,
                             double t, std::span<const double> eta,
                             std::span<const double> xi, const SeriesConfig& cfg);

/// Series value of w_tilde(t, xi) = f_hat(t, 0, xi); shares the sampler and
/// seed policy with fhat_series, so the eta = 0 reduction is exact.
ValueWithError solve_wtilde_series(const CorrelationModel& model,
                                   const GaussianBump& bump, double t,
                                   std::span<const double> xi, const SeriesConfig& cfg);

/// Second-moment series for a probe pair at lattice modes ka, kb:
/// E[psi_hat(t, ka) psi_hat*(t, kb)] e^{-R0 t}, with the phase factors taken
/// at the realized offset difference eta.  Reduces to fhat_series when
/// ka == kb.  This is the covariance identity evaluated at the realized
/// probe geometry rather than at the epsilon -> 0 limit.
ComplexWithError fhat_pair_series(const CorrelationModel& model,
                                  const GaussianBump& bump, double t,
                                  std::span<const double> eta,
                                  std::span<const double> ka,
                                  std::span<const double> kb,
                                  const SeriesConfig& cfg);

/// Uhat(s, eta, xi): convolution of fhat against the phase-twisted kernel,
/// evaluated by the same simplex sampler with one extra momentum.
ComplexWithError uhat(const CorrelationModel& model, const GaussianBump& bump,
                      double s, std::span<const double> eta,
                      std::span<const double> xi, const SeriesConfig& cfg);

/// Truncated series for the scattered-position density U(t, x, xi).
ValueWithError u_density_series(const CorrelationModel& model, const GaussianBump& bump,
                                double t, std::span<const double> x,
                                std::span<const double> xi, const SeriesConfig& cfg,
                                double t_floor = 0.0);

/// sigma^2(t, xi) = (w_tilde - |phi0_hat|^2 e^{-R(0)t}) / 2 given a w_tilde
/// value from any solver; werr is that solver's error estimate.
double sigma_sq(const CorrelationModel& model, const GaussianBump& bump, double t,
                std::span<const double> xi, double wtilde, double werr = 0.0);

/// Spectral grid integrator for the space-homogeneous kinetic equation
///   d/dt w = gain(w) - R0 w,   gain = (2 pi)^{-d} (Rhat * w),
/// with the gain convolution evaluated by FFT on the periodic dual lattice.
/// The exponential (Heun) mode is positivity preserving and conserves mass
/// exactly in the discrete balance; forward Euler requires dt R0 <= 1.
class GridKineticSolver {
  public:
    enum class Mode { exponential, forward_euler };

    GridKineticSolver(const CorrelationModel& model, const GaussianBump& bump,
                      int modes_per_dim, double box_length, double dt,
                      Mode mode = Mode::exponential);
    ~GridKineticSolver();
    GridKineticSolver(GridKineticSolver&&) noexcept;

    void advance_to(double t);
    double time() const { return time_; }
    double mass() const; // dk^d sum w
    double value_at(std::span<const double> xi) const; // nearest-mode lookup
    const std::vector<double>& data() const { return w_; }

  private:
    void advance_step();
    void gain(const std::vector<double>& in, std::vector<double>& out) const;

    GridSpec grid_;
    CorrelationModel model_;
    Mode mode_;
    double time_ = 0;
    double rate_ = 0; // discrete loss rate (sum of kernel weights)
    std::vector<double> w_;
    std::vector<std::complex<double>> kernel_hat_; // DFT of the gain kernel
    mutable std::vector<double> g1_, g2_, w1_;
    std::unique_ptr<class Fft> fft_;
};

struct GridSolution {
    std::vector<double> times;
    std::vector<std::vector<double>> values; // [time][xi]
    std::vector<std::vector<double>> errors; // Richardson estimates
    double mass_drift = 0;                   // relative over the run
};

GridSolution solve_wtilde_grid(const CorrelationModel& model, const GaussianBump& bump,
                               std::span<const double> times,
                               const std::vector<std::vector<double>>& xi_set,
                               int modes_per_dim, double box_length, double dt,
                               GridKineticSolver::Mode mode =
                                   GridKineticSolver::Mode::exponential);

/// Caching front end over the series evaluators; offsets eta are along
/// axis 0.  Seeds are derived from (cfg.seed, arguments), so values are
/// reproducible regardless of evaluation order.
class CovarianceEvaluator {
  public:
    CovarianceEvaluator(const CorrelationModel& model, const GaussianBump& bump,
                        const SeriesConfig& cfg);

    ComplexWithError fhat(double t, double eta0, std::span<const double> xi);
    ComplexWithError uhat(double s, double eta0, std::span<const double> xi);
    ValueWithError wtilde(double t, std::span<const double> xi);
    double sigma2(double t, std::span<const double> xi);

    const CorrelationModel& model() const { return model_; }
    const GaussianBump& bump() const { return bump_; }

  private:
    CorrelationModel model_;
    GaussianBump bump_;
    SeriesConfig cfg_;
    std::map<std::string, ComplexWithError> cache_;
};

} // namespace speckle
