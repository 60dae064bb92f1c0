#include "speckle/ou.hpp"

#include <Eigen/Dense>

#include <cmath>

#include "speckle/errors.hpp"
#include "speckle/rng.hpp"

namespace speckle {

void OUParams::validate() const {
    if (xi.empty()) throw ConfigError("ou: xi must be set");
    if (etas.empty()) throw ConfigError("ou: etas must be nonempty");
    if (dt <= 0 || horizon <= 0) throw ConfigError("ou: dt and horizon must be positive");
    const double steps = horizon / dt;
    if (std::abs(steps - std::round(steps)) > 1e-9)
        throw ConfigError("ou: horizon must be an integer multiple of dt");
    for (double t : times) {
        const double r = t / dt;
        if (t < 0 || t > horizon + 1e-12 || std::abs(r - std::round(r)) > 1e-6)
            throw ConfigError("ou: probe times must be multiples of dt within [0,horizon]");
    }
    if (R0 < 0) throw ConfigError("ou: R0 must be >= 0");
}

OUSampleResult sample_ou_paths(const OUParams& params, CovarianceEvaluator& cov,
                               long replicas, std::uint64_t seed) {
    params.validate();
    const std::size_t J = params.etas.size();
    const long nsteps = std::lround(params.horizon / params.dt);

    // Per-step increment factor: C(s) = dt [Uhat(s, eta_j - eta_k)] = F F^H.
    // Hermitian by construction (conjugate fill from the delta >= 0 wing);
    // eigenvalue clipping absorbs the series sampler noise.
    double max_defect = 0;
    std::vector<Eigen::MatrixXcd> factors;
    factors.reserve(std::size_t(nsteps));
    for (long i = 0; i < nsteps; ++i) {
        const double s = i * params.dt;
        Eigen::MatrixXcd c(J, J);
        for (std::size_t j = 0; j < J; ++j)
            for (std::size_t k = 0; k < J; ++k) {
                const double delta = params.etas[j] - params.etas[k];
                if (delta < 0) continue;
                const auto u = cov.uhat(s, delta, params.xi);
                c(long(j), long(k)) = u.value * params.dt;
                if (j != k) c(long(k), long(j)) = std::conj(u.value) * params.dt;
            }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(c);
        if (eig.info() != Eigen::Success)
            throw CovarianceError("sample_ou_paths: eigendecomposition failed");
        Eigen::VectorXd lam = eig.eigenvalues();
        const double scale = std::max(lam.maxCoeff(), 1e-300);
        for (long j = 0; j < lam.size(); ++j) {
            if (lam(j) < 0) {
                max_defect = std::max(max_defect, -lam(j) / scale);
                lam(j) = 0;
            }
        }
        if (max_defect > params.psd_tol)
            throw CovarianceError("sample_ou_paths: PSD defect " +
                                  std::to_string(max_defect) + " above tolerance");
        factors.push_back(eig.eigenvectors() *
                          lam.cwiseSqrt().asDiagonal());
    }

    std::vector<long> probe_steps(params.times.size());
    for (std::size_t i = 0; i < params.times.size(); ++i)
        probe_steps[i] = std::lround(params.times[i] / params.dt);

    OUSampleResult out;
    out.max_psd_defect = max_defect;
    Ensemble& ens = out.ensemble;
    ens.eps = 0; // limit object, no rung attached
    ens.times = params.times;
    ens.etas = params.etas;
    ens.replicas = replicas;
    ens.X.resize(std::size_t(replicas) * params.times.size() * J);
    ens.Q.assign(std::size_t(replicas) * params.times.size(), 0.0);
    ens.scriptQ.assign(std::size_t(replicas) * params.times.size(), {0.0, 0.0});

    const double damp = 1.0 - 0.5 * params.R0 * params.dt; // Euler drift factor
    Eigen::VectorXcd x(J), w(J);
    for (long r = 0; r < replicas; ++r) {
        Rng rng = Rng::substream(seed, std::uint64_t(r), 0x6f75ULL);
        for (std::size_t j = 0; j < J; ++j) x(long(j)) = params.phi0;
        std::size_t next = 0;
        auto record = [&](long stepidx) {
            while (next < probe_steps.size() && probe_steps[next] == stepidx) {
                for (std::size_t j = 0; j < J; ++j)
                    ens.X[(std::size_t(r) * params.times.size() + next) * J + j] =
                        x(long(j));
                ++next;
            }
        };
        for (long i = 0; i < nsteps; ++i) {
            record(i);
            for (std::size_t j = 0; j < J; ++j) w(long(j)) = rng.cnormal();
            x = damp * x + factors[std::size_t(i)] * w;
        }
        record(nsteps);
    }
    return out;
}

std::complex<double> analytic_mean(const OUParams& params, double t) {
    return params.phi0 * std::exp(-0.5 * params.R0 * t);
}

CovPair analytic_cov(const OUParams& params, CovarianceEvaluator& cov, double t, int j,
                     int k) {
    params.validate();
    const double delta = params.etas[std::size_t(j)] - params.etas[std::size_t(k)];
    const long nsteps = std::lround(t / params.dt);
    if (nsteps == 0) { // empty integral
        CovPair out;
        const auto f = (delta >= 0) ? cov.fhat(t, delta, params.xi)
                                    : cov.fhat(t, -delta, params.xi);
        const std::complex<double> fval = (delta >= 0) ? f.value : std::conj(f.value);
        out.fhat_identity = fval - std::norm(params.phi0) * std::exp(-params.R0 * t);
        out.fhat_err = f.stderror + f.tail_bound;
        return out;
    }

    // Trapezoid in s over the sampler's own grid; conjugate wing reused.
    std::complex<double> acc{0, 0};
    double var = 0;
    for (long i = 0; i <= nsteps; ++i) {
        const double s = i * params.dt;
        const auto u = (delta >= 0) ? cov.uhat(s, delta, params.xi)
                                    : cov.uhat(s, -delta, params.xi);
        const std::complex<double> uval =
            (delta >= 0) ? u.value : std::conj(u.value);
        const double wgt = (i == 0 || i == nsteps) ? 0.5 : 1.0;
        const double kernel = std::exp(-params.R0 * (t - s));
        acc += wgt * kernel * uval * params.dt;
        var += wgt * wgt * kernel * kernel * (u.stderror * u.stderror + u.tail_bound * u.tail_bound) *
               params.dt * params.dt;
    }

    const auto f = (delta >= 0) ? cov.fhat(t, delta, params.xi)
                                : cov.fhat(t, -delta, params.xi);
    const std::complex<double> fval = (delta >= 0) ? f.value : std::conj(f.value);
    CovPair out;
    out.quadrature = acc;
    // trapezoid curvature error on top of the series noise
    out.quadrature_err = std::sqrt(var) +
                         params.dt * params.dt * (1.0 + params.R0) * std::abs(acc);
    out.fhat_identity =
        fval - std::norm(params.phi0) * std::exp(-params.R0 * t);
    out.fhat_err = f.stderror + f.tail_bound;
    return out;
}

} // namespace speckle
