#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "speckle/kinetic.hpp"
#include "speckle/solver.hpp"
#include "speckle/stats.hpp"

using namespace speckle;

namespace {

GridSpec small_grid(double eps = 0.5, int n = 128, double T = 0.2, double L = 40.0) {
    GridSpec grid;
    grid.dimension = 1;
    grid.box_length = L;
    grid.modes_per_dim = n;
    grid.epsilon = eps;
    grid.horizon = T;
    grid.dt = GridSpec::auto_dt(n, L, eps, T);
    return grid;
}

CorrelationModel unit_model(double A = 1.0) {
    CorrelationModel m;
    m.amplitude = A;
    return m;
}

ProbeSpec default_probe(const GridSpec& grid) {
    ProbeSpec probe;
    probe.xi_modes = {0};
    probe.eta_modes = {-1, 0, 1};
    probe.times = {0.5 * grid.horizon, grid.horizon};
    return probe;
}

} // namespace

TEST_CASE("free evolution is exact: phases only, amplitudes frozen") {
    const auto grid = small_grid(0.5, 128, 0.2);
    const auto model = unit_model(0.0); // A = 0: no noise
    SplitStepSolver solver(grid, model);
    WaveField field = init_field(grid, GaussianBump{});
    const auto initial = field.amps;
    NoiseStream stream = NoiseStream::make(11, 0);
    const long nsteps = grid.steps();
    for (long i = 0; i < nsteps; ++i) solver.step(field, stream);

    const double t = grid.horizon;
    double worst = 0;
    for (std::size_t f = 0; f < field.amps.size(); ++f) {
        const double ksq = grid.mode_sq(f);
        const auto expected =
            initial[f] * std::polar(1.0, -ksq * t / (2 * grid.epsilon * grid.epsilon));
        worst = std::max(worst, std::abs(field.amps[f] - expected));
        CHECK(std::abs(field.amps[f]) == doctest::Approx(std::abs(initial[f])).epsilon(1e-13));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("noise increments vanish for the zero-amplitude model") {
    const auto grid = small_grid();
    SplitStepSolver solver(grid, unit_model(0.0));
    NoiseStream stream = NoiseStream::make(1, 0);
    for (double v : solver.sample_noise_increment(stream)) CHECK(v == 0.0);
}

TEST_CASE("noise increment variance and covariance match dt R") {
    GridSpec grid = small_grid(1.0, 64, 0.1, 16.0);
    grid.dt = 0.05;
    const auto model = unit_model(1.0);
    SplitStepSolver solver(grid, model);
    NoiseStream stream = NoiseStream::make(21, 0);

    const int lag = 4; // x0 - y0 = 4 dx = 1.0
    const long M = 20000;
    double s_var = 0, s_cov = 0;
    for (long i = 0; i < M; ++i) {
        const auto db = solver.sample_noise_increment(stream);
        s_var += db[3] * db[3];
        s_cov += db[3] * db[3 + lag];
    }
    s_var /= M;
    s_cov /= M;
    const double dx = grid.dx();
    const double x0[] = {0.0}, xlag[] = {lag * dx};
    const double want_var = grid.dt * eval_R(model, x0);
    const double want_cov = grid.dt * eval_R(model, xlag);
    // 3 SE with Var(db^2) ~ 2 (dt R)^2 for the Gaussian field
    const double se = 3.0 * std::sqrt(2.0) * want_var / std::sqrt(double(M));
    CHECK(std::abs(s_var - want_var) < se);
    CHECK(std::abs(s_cov - want_cov) < se);
}

TEST_CASE("one step on a single mode matches the split-factor oracle") {
    GridSpec grid = small_grid(0.7, 32, 0.1, 16.0);
    grid.dt = 0.01;
    const auto model = unit_model(1.0);
    SplitStepSolver solver(grid, model);

    const int mode = 5;
    TabulatedInitial single;
    single.values.assign(32, {0.0, 0.0});
    single.values[mode] = {1.0, 0.0};
    WaveField field = init_field(grid, single);

    // Freeze the increment by replaying the stream the step will consume.
    NoiseStream preview = NoiseStream::make(77, 3);
    const auto db = solver.sample_noise_increment(preview);
    NoiseStream stream = NoiseStream::make(77, 3);
    solver.step(field, stream);

    const double eps2 = grid.epsilon * grid.epsilon;
    const double k0 = grid.mode_component(mode);
    const int n = grid.modes_per_dim;
    for (int j : {0, 3, 5, 8, 31}) {
        const double k = grid.mode_component(j);
        std::complex<double> acc{0.0, 0.0};
        for (int m = 0; m < n; ++m) {
            const double x = m * grid.dx();
            acc += std::polar(1.0, -db[std::size_t(m)]) *
                   std::polar(1.0, (k0 - k) * x);
        }
        const auto expected = std::polar(1.0, -(k0 * k0 + k * k) * grid.dt / (4 * eps2)) *
                              acc / double(n);
        CHECK(std::abs(field.amps[std::size_t(j)] - expected) < 1e-12);
    }
}

TEST_CASE("every noisy step conserves the discrete L2 norm") {
    const auto grid = small_grid(0.5, 128, 0.1);
    SplitStepSolver solver(grid, unit_model(1.0));
    WaveField field = init_field(grid, GaussianBump{});
    NoiseStream stream = NoiseStream::make(5, 1);
    const double norm0 = l2_norm(grid, field);
    for (long i = 0; i < grid.steps(); ++i) {
        const double before = l2_norm(grid, field);
        solver.step(field, stream);
        const double after = l2_norm(grid, field);
        CHECK(std::abs(after - before) <= 1e-12 * before);
    }
    CHECK(std::abs(l2_norm(grid, field) - norm0) <= 1e-10 * norm0);
}

TEST_CASE("zero-noise trajectories have vanishing quadratic variations") {
    const auto grid = small_grid(0.5, 64, 0.2, 16.0);
    SplitStepSolver solver(grid, unit_model(0.0));
    NoiseStream stream = NoiseStream::make(9, 0);
    const auto probe = default_probe(grid);
    const auto res = solver.run_trajectory(GaussianBump{}, stream, probe);
    for (const auto& s : res.qv) {
        CHECK(s.Q == 0.0);
        CHECK(std::abs(s.scriptQ) == 0.0);
    }
}

TEST_CASE("Q is nondecreasing and obeys the pathwise bound") {
    const auto grid = small_grid(0.4, 128, 0.3);
    SplitStepSolver solver(grid, unit_model(1.0));
    const auto probe = default_probe(grid);
    for (std::uint64_t r = 0; r < 5; ++r) {
        NoiseStream stream = NoiseStream::make(31, r);
        const auto res = solver.run_trajectory(GaussianBump{}, stream, probe);
        CHECK(res.q_bound_violations == 0);
        double prev = 0;
        for (const auto& s : res.qv) {
            CHECK(s.Q >= prev);
            prev = s.Q;
        }
        CHECK(res.qv.back().Q <= res.q_bound);
    }
}

TEST_CASE("identical seeds reproduce identical samples, different replicas differ") {
    const auto grid = small_grid(0.5, 64, 0.1, 16.0);
    SplitStepSolver solver(grid, unit_model(1.0));
    const auto probe = default_probe(grid);

    NoiseStream s1 = NoiseStream::make(123, 4);
    NoiseStream s2 = NoiseStream::make(123, 4);
    NoiseStream s3 = NoiseStream::make(123, 5);
    const auto r1 = solver.run_trajectory(GaussianBump{}, s1, probe);
    const auto r2 = solver.run_trajectory(GaussianBump{}, s2, probe);
    const auto r3 = solver.run_trajectory(GaussianBump{}, s3, probe);
    REQUIRE(r1.sample.values.size() == r2.sample.values.size());
    bool identical = true, distinct = false;
    for (std::size_t i = 0; i < r1.sample.values.size(); ++i) {
        identical &= (r1.sample.values[i] == r2.sample.values[i]);
        distinct |= (r1.sample.values[i] != r3.sample.values[i]);
    }
    CHECK(identical);
    CHECK(distinct);
}

TEST_CASE("ensemble second moment matches the kinetic solution (Ito isometry)") {
    const auto grid = small_grid(0.5, 128, 0.5);
    const auto model = unit_model(1.0);
    SplitStepSolver solver(grid, model);
    ProbeSpec probe;
    probe.xi_modes = {0};
    probe.eta_modes = {0};
    probe.times = {grid.horizon};

    const long M = 1500;
    double mean = 0, var = 0;
    for (long r = 0; r < M; ++r) {
        NoiseStream stream = NoiseStream::make(2024, std::uint64_t(r));
        const auto res = solver.run_trajectory(GaussianBump{}, stream, probe);
        const double v = std::norm(res.sample.values[0]); // |X|^2 = |psi|^2 e^{-R0 t}
        mean += v;
        var += v * v;
    }
    mean /= M;
    var = var / M - mean * mean;

    const auto gsol = solve_wtilde_grid(model, GaussianBump{}, std::vector<double>{0.5},
                                        {{0.0}}, 256, 40.0, 0.005);
    const double want = gsol.values[0][0];
    const double se = std::sqrt(var / M + gsol.errors[0][0] * gsol.errors[0][0]);
    CHECK(std::abs(mean - want) < 3 * se);
}

TEST_CASE("weak and strong scaling configurations agree in law (mean intensity)") {
    // strength-eps noise to time t/eps^2 with unit dispersion vs strength-1
    // noise with 1/eps^2 dispersion to time t, compared at one (t, xi).
    const double eps = 0.5, t = 0.25;
    const long M = 800;

    auto run_mean = [&](double dispersion_eps, double amplitude, double horizon,
                        std::uint64_t seed, double* se_out) {
        GridSpec grid = small_grid(dispersion_eps, 128, horizon);
        const auto model = unit_model(amplitude);
        SplitStepSolver solver(grid, model);
        ProbeSpec probe;
        probe.xi_modes = {0};
        probe.eta_modes = {0};
        probe.times = {horizon};
        double mean = 0, var = 0;
        for (long r = 0; r < M; ++r) {
            NoiseStream stream = NoiseStream::make(seed, std::uint64_t(r));
            const auto res = solver.run_trajectory(GaussianBump{}, stream, probe);
            const double v = std::norm(res.sample.values[0]);
            mean += v;
            var += v * v;
        }
        mean /= M;
        *se_out = std::sqrt((var / M - mean * mean) / M);
        return mean;
    };

    double se_a = 0, se_b = 0;
    const double mean_a = run_mean(1.0, eps * eps, t / (eps * eps), 501, &se_a);
    const double mean_b = run_mean(eps, 1.0, t, 502, &se_b);
    CHECK(std::abs(mean_a - mean_b) < 3 * std::hypot(se_a, se_b));
}

TEST_CASE("exploratory control: strong coupling (eps = 1) reported, not asserted") {
    // Outside the weak-forcing regime the limit law need not hold yet; the
    // suite only reports the statistic here.
    const auto grid = small_grid(1.0, 128, 0.5);
    const auto model = unit_model(1.0);
    SplitStepSolver solver(grid, model);
    ProbeSpec probe;
    probe.xi_modes = {11};
    probe.eta_modes = {-1, 0, 1};
    probe.times = {grid.horizon};

    Ensemble ens;
    ens.eps = 1.0;
    ens.times = probe.times;
    ens.etas = {-1 * grid.dk(), 0.0, grid.dk()};
    ens.eta_modes = {-1, 0, 1};
    ens.replicas = 1200;
    for (long r = 0; r < ens.replicas; ++r) {
        NoiseStream stream = NoiseStream::make(888, std::uint64_t(r));
        const auto res = solver.run_trajectory(GaussianBump{}, stream, probe);
        ens.X.insert(ens.X.end(), res.sample.values.begin(), res.sample.values.end());
        ens.Q.push_back(res.qv.back().Q);
        ens.scriptQ.push_back(res.qv.back().scriptQ);
    }
    std::vector<double> sigma2(3, 0.0);
    for (int j = 0; j < 3; ++j) {
        long double m2 = 0;
        std::complex<long double> m1{0, 0};
        for (long r = 0; r < ens.replicas; ++r) {
            m1 += ens.at(r, 0, std::size_t(j));
            m2 += std::norm(ens.at(r, 0, std::size_t(j)));
        }
        const auto mean = std::complex<double>(double(m1.real() / ens.replicas),
                                               double(m1.imag() / ens.replicas));
        sigma2[std::size_t(j)] =
            0.5 * std::max(1e-6, double(m2 / ens.replicas) - std::norm(mean));
    }
    const auto rep = gaussianity_test(ens, 0, sigma2, 0.01);
    MESSAGE("strong-coupling gaussianity statistic ", rep.statistic,
            " (pass=", rep.pass, ", not asserted)");
    CHECK(rep.statistic > 0.0); // ran and produced a finite report
}

TEST_CASE("grid validation enforces the documented invariants") {
    GridSpec grid;
    grid.modes_per_dim = 5;
    CHECK_THROWS_AS(grid.validate(), ConfigError);
    grid.modes_per_dim = 64;
    grid.dt = 0.013; // horizon not an integer multiple
    CHECK_THROWS_AS(grid.validate(), ConfigError);
    grid.dt = 0.01;
    grid.epsilon = 1.5;
    CHECK_THROWS_AS(grid.validate(), ConfigError);
}

TEST_CASE("auto dt respects the Nyquist phase cap") {
    const double dt = GridSpec::auto_dt(512, 40.0, 0.18, 1.0);
    const double kmax = 256 * 2 * std::numbers::pi / 40.0;
    CHECK(kmax * kmax * dt / (4 * 0.18 * 0.18) <= std::numbers::pi / 4 + 1e-12);
    const double steps = 1.0 / dt;
    CHECK(std::abs(steps - std::round(steps)) < 1e-9);
    CHECK(std::lround(steps) % 20 == 0);
}
