#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "speckle/correlation.hpp"

using namespace speckle;

namespace {

CorrelationModel make_model(int d, double A, double l) {
    CorrelationModel m;
    m.dimension = d;
    m.amplitude = A;
    m.corr_length = l;
    return m;
}

// trapezoid quadrature oracle on [-radius, radius]
double trapz(double radius, int n, const std::function<double(double)>& f) {
    const double h = 2 * radius / (n - 1);
    double s = 0.5 * (f(-radius) + f(radius));
    for (int i = 1; i < n - 1; ++i) s += f(-radius + i * h);
    return s * h;
}

} // namespace

TEST_CASE("R at the origin equals the amplitude") {
    const auto m = make_model(1, 1.0, 1.0);
    const double x0[] = {0.0};
    CHECK(eval_R(m, x0) == 1.0);
}

TEST_CASE("R is even") {
    const auto m = make_model(1, 1.0, 1.0);
    const double xp[] = {0.7}, xm[] = {-0.7};
    CHECK(eval_R(m, xp) == eval_R(m, xm));
}

TEST_CASE("R matches direct arithmetic in d=2") {
    const auto m = make_model(2, 2.0, 0.5);
    const double x[] = {0.5, 0.0};
    CHECK(eval_R(m, x) == doctest::Approx(2.0 * std::exp(-0.25 / (2 * 0.25))).epsilon(1e-14));
}

TEST_CASE("Rhat(0) matches the quadrature of R") {
    const auto m = make_model(1, 1.0, 1.0);
    const double p0[] = {0.0};
    const double oracle = trapz(10.0, 20001, [&](double x) {
        const double v[] = {x};
        return eval_R(m, v);
    });
    CHECK(eval_Rhat(m, p0) == doctest::Approx(oracle).epsilon(1e-10));
    CHECK(eval_Rhat(m, p0) == doctest::Approx(std::sqrt(2 * std::numbers::pi)).epsilon(1e-12));
}

TEST_CASE("Rhat is even and nonnegative") {
    const auto m = make_model(1, 1.7, 0.8);
    for (double p = 0; p < 12; p += 0.37) {
        const double pp[] = {p}, pm[] = {-p};
        CHECK(eval_Rhat(m, pp) == eval_Rhat(m, pm));
        CHECK(eval_Rhat(m, pp) >= 0.0);
    }
}

TEST_CASE("Fourier inversion recovers R(0)") {
    const auto m = make_model(1, 1.0, 1.0);
    const double inv = trapz(12.0, 40001, [&](double p) {
                           const double v[] = {p};
                           return eval_Rhat(m, v);
                       }) /
                       (2 * std::numbers::pi);
    CHECK(inv == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("diffusion matrix in d=1 equals the quadrature oracle") {
    const auto m = make_model(1, 1.0, 1.0);
    const auto D = diffusion_matrix(m);
    const double oracle = trapz(10.0, 40001, [&](double p) {
                              const double v[] = {p};
                              return eval_Rhat(m, v) * p * p;
                          }) /
                          (2 * std::numbers::pi);
    CHECK(D.at(0, 0) == doctest::Approx(oracle).epsilon(1e-8));
    CHECK(D.at(0, 0) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("diffusion matrix is isotropic and PSD in d=2") {
    const auto m = make_model(2, 1.3, 0.9);
    QuadratureSpec quad;
    quad.points_per_dim = 201;
    const auto D = diffusion_matrix(m, quad);
    CHECK(std::abs(D.at(0, 1)) < 1e-12 * D.trace());
    CHECK(std::abs(D.at(0, 0) - D.at(1, 1)) < 1e-10 * D.trace());
    CHECK(D.min_eigenvalue() >= -1e-12 * D.trace());
}

TEST_CASE("diffusion matrix is linear in the amplitude") {
    const auto m1 = make_model(1, 1.0, 1.0);
    const auto m2 = make_model(1, 2.0, 1.0);
    CHECK(diffusion_matrix(m2).at(0, 0) ==
          doctest::Approx(2 * diffusion_matrix(m1).at(0, 0)).epsilon(1e-13));
}

TEST_CASE("diffusion quadrature rejects an undersized domain") {
    const auto m = make_model(1, 1.0, 1.0);
    QuadratureSpec quad;
    quad.radius_stddevs = 2.0;
    quad.tail_tol = 1e-9;
    CHECK_THROWS_AS(diffusion_matrix(m, quad), TruncationError);
}

TEST_CASE("mode weights vanish for the zero model and are even") {
    GridSpec grid;
    grid.modes_per_dim = 64;
    grid.box_length = 20.0;
    const auto zero = mode_weights(make_model(1, 0.0, 1.0), grid);
    for (double w : zero.weights) CHECK(w == 0.0);

    const auto mw = mode_weights(make_model(1, 1.0, 1.0), grid);
    for (int j = 1; j < 32; ++j)
        CHECK(mw.weights[std::size_t(j)] ==
              mw.weights[std::size_t(64 - j)]); // w(k) == w(-k)
}

TEST_CASE("summed mode weights reproduce R(0) on the default grid") {
    GridSpec grid; // L = 40, N = 512
    const auto m = make_model(1, 1.0, 1.0);
    const auto mw = mode_weights(m, grid);
    const double x0[] = {0.0};
    CHECK(mw.discrete_R0 == doctest::Approx(eval_R(m, x0)).epsilon(0.01));
    CHECK_FALSE(mw.aliasing_warning);
}

TEST_CASE("Parseval defect shrinks as the box grows") {
    const auto m = make_model(1, 1.0, 1.0);
    double prev = 1.0;
    for (double L : {4.0, 6.0, 8.0}) {
        GridSpec grid;
        grid.box_length = L;
        grid.modes_per_dim = 256;
        const auto mw = mode_weights(m, grid);
        const double defect = std::abs(mw.discrete_R0 - 1.0);
        CHECK(defect < prev);
        prev = defect;
    }
}

TEST_CASE("aliasing warning fires when Rhat survives at the Nyquist mode") {
    GridSpec grid;
    grid.modes_per_dim = 16;
    grid.box_length = 40.0; // Nyquist at 0.63 for a unit-width kernel
    const auto mw = mode_weights(make_model(1, 1.0, 1.0), grid);
    CHECK(mw.aliasing_warning);
    CHECK(mw.nyquist_fraction > 1e-6);
}

TEST_CASE("model validation rejects bad parameters") {
    CHECK_THROWS_AS(make_model(1, -1.0, 1.0).validate(), ConfigError);
    CHECK_THROWS_AS(make_model(1, 1.0, 0.0).validate(), ConfigError);
    CHECK_THROWS_AS(corr_family_from_string("cauchy"), ConfigError);
}
