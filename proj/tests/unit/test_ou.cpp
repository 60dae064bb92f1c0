#include <doctest.h>

#include <cmath>
#include <complex>

#include "speckle/ou.hpp"

using namespace speckle;

namespace {

OUParams base_params(double R0 = 1.0) {
    OUParams p;
    p.xi = {0.0};
    p.etas = {-3.0, 0.0, 3.0};
    p.times = {0.5, 1.0};
    p.horizon = 1.0;
    p.dt = 0.01;
    p.R0 = R0;
    p.phi0 = {1.0, 0.0};
    return p;
}

CorrelationModel unit_model(double A = 1.0) {
    CorrelationModel m;
    m.amplitude = A;
    return m;
}

SeriesConfig fast_series() {
    SeriesConfig cfg;
    cfg.samples = 6000;
    return cfg;
}

} // namespace

TEST_CASE("zero forcing: deterministic decay, constant when R0 = 0") {
    GaussianBump bump;
    {
        auto params = base_params(1.0);
        CovarianceEvaluator cov(unit_model(0.0), bump, fast_series());
        const auto res = sample_ou_paths(params, cov, 50, 3);
        for (long r = 0; r < 50; ++r)
            for (std::size_t ti = 0; ti < 2; ++ti)
                for (std::size_t j = 0; j < 3; ++j) {
                    // deterministic Euler decay of the pinned discretization
                    const long n = std::lround(params.times[ti] / params.dt);
                    const double want = std::pow(1.0 - 0.5 * params.dt, double(n));
                    CHECK(std::abs(res.ensemble.at(r, ti, j) - want) < 1e-12);
                    // and the analytic mean within the first-order drift budget
                    CHECK(std::abs(res.ensemble.at(r, ti, j) -
                                   std::exp(-0.5 * params.times[ti])) < 2e-3);
                }
    }
    {
        auto params = base_params(0.0);
        CovarianceEvaluator cov(unit_model(0.0), bump, fast_series());
        const auto res = sample_ou_paths(params, cov, 20, 3);
        for (long r = 0; r < 20; ++r)
            CHECK(res.ensemble.at(r, 1, 1) == std::complex<double>(1.0, 0.0));
    }
}

TEST_CASE("analytic mean decays at rate R0/2 and matches the sampler") {
    const auto params = base_params();
    CHECK(analytic_mean(params, 0.0) == params.phi0);
    CHECK(std::abs(analytic_mean(params, std::log(4.0)) - 0.5 * params.phi0) < 1e-15);

    GaussianBump bump;
    CovarianceEvaluator cov(unit_model(), bump, fast_series());
    const long M = 3000;
    const auto res = sample_ou_paths(params, cov, M, 11);
    for (std::size_t ti = 0; ti < params.times.size(); ++ti) {
        const auto want = analytic_mean(params, params.times[ti]);
        for (std::size_t j = 0; j < params.etas.size(); ++j) {
            std::complex<double> mean{0, 0};
            double var = 0;
            for (long r = 0; r < M; ++r) mean += res.ensemble.at(r, ti, j);
            mean /= double(M);
            for (long r = 0; r < M; ++r)
                var += std::norm(res.ensemble.at(r, ti, j) - mean);
            var /= double(M);
            const double se = std::sqrt(var / M);
            CHECK(std::abs(mean - want) < 3.5 * se + 0.01); // Euler drift bias budget
        }
    }
}

TEST_CASE("sampled pseudo-covariance vanishes") {
    const auto params = base_params();
    GaussianBump bump;
    CovarianceEvaluator cov(unit_model(), bump, fast_series());
    const long M = 3000;
    const auto res = sample_ou_paths(params, cov, M, 13);
    for (std::size_t j = 0; j < 3; ++j) {
        std::complex<double> mean{0, 0};
        for (long r = 0; r < M; ++r) mean += res.ensemble.at(r, 1, j);
        mean /= double(M);
        std::complex<double> pseudo{0, 0};
        double var = 0;
        for (long r = 0; r < M; ++r) {
            const auto x = res.ensemble.at(r, 1, j) - mean;
            pseudo += x * x;
            var += std::norm(x * x);
        }
        pseudo /= double(M);
        var = var / M - std::norm(pseudo);
        CHECK(std::abs(pseudo) < 3 * std::sqrt(var / M) + 1e-6);
    }
}

TEST_CASE("analytic covariance: empty integral at t = 0 and Hermitian symmetry") {
    auto params = base_params();
    GaussianBump bump;
    CovarianceEvaluator cov(unit_model(), bump, fast_series());
    const auto c00 = analytic_cov(params, cov, 0.0, 0, 1);
    CHECK(std::abs(c00.quadrature) < 1e-12);

    const auto cjk = analytic_cov(params, cov, 1.0, 0, 2);
    const auto ckj = analytic_cov(params, cov, 1.0, 2, 0);
    CHECK(std::abs(cjk.quadrature - std::conj(ckj.quadrature)) < 1e-12);
}

TEST_CASE("quadrature route agrees with the fhat identity") {
    auto params = base_params();
    GaussianBump bump;
    SeriesConfig cfg;
    cfg.samples = 20000;
    CovarianceEvaluator cov(unit_model(), bump, cfg);
    for (int j : {0, 1}) {
        const auto pair = analytic_cov(params, cov, 1.0, j, 1);
        const double tol = 3 * (pair.quadrature_err + pair.fhat_err) + 2e-3;
        CHECK(std::abs(pair.quadrature - pair.fhat_identity) < tol);
    }
}

TEST_CASE("diagonal covariance equals twice the fluctuation variance") {
    auto params = base_params();
    GaussianBump bump;
    SeriesConfig cfg;
    cfg.samples = 20000;
    CovarianceEvaluator cov(unit_model(), bump, cfg);
    const auto pair = analytic_cov(params, cov, 1.0, 1, 1);
    const double sigma2 = cov.sigma2(1.0, params.xi);
    CHECK(std::abs(pair.fhat_identity.real() - 2 * sigma2) < 1e-12);
    CHECK(std::abs(pair.quadrature.real() - 2 * sigma2) <
          3 * pair.quadrature_err + 5e-3);
    CHECK(std::abs(pair.quadrature.imag()) < 1e-6);
}

TEST_CASE("sampler covariance matches the analytic value") {
    auto params = base_params();
    GaussianBump bump;
    SeriesConfig cfg;
    cfg.samples = 10000;
    CovarianceEvaluator cov(unit_model(), bump, cfg);
    const long M = 4000;
    const auto res = sample_ou_paths(params, cov, M, 17);

    const std::size_t ti = 1; // t = 1
    for (int j : {0, 1}) {
        std::complex<double> mj{0, 0}, mk{0, 0};
        for (long r = 0; r < M; ++r) {
            mj += res.ensemble.at(r, ti, std::size_t(j));
            mk += res.ensemble.at(r, ti, 1);
        }
        mj /= double(M);
        mk /= double(M);
        std::complex<double> emp{0, 0};
        double var = 0;
        for (long r = 0; r < M; ++r) {
            const auto p = (res.ensemble.at(r, ti, std::size_t(j)) - mj) *
                           std::conj(res.ensemble.at(r, ti, 1) - mk);
            emp += p;
            var += std::norm(p);
        }
        emp /= double(M);
        var = var / M - std::norm(emp);
        const auto want = analytic_cov(params, cov, 1.0, j, 1);
        const double se = std::sqrt(var / M) + want.quadrature_err;
        CHECK(std::abs(emp - want.quadrature) < 3.5 * se + 0.01);
    }
    CHECK(res.max_psd_defect <= params.psd_tol);
}

TEST_CASE("parameter validation") {
    auto params = base_params();
    params.dt = 0.013; // horizon not a multiple
    CHECK_THROWS_AS(params.validate(), ConfigError);
    params = base_params();
    params.times = {0.51234};
    CHECK_THROWS_AS(params.validate(), ConfigError);
    params = base_params();
    params.etas.clear();
    CHECK_THROWS_AS(params.validate(), ConfigError);
}
