#include <doctest.h>

#include <cmath>
#include <numbers>

#include "speckle/field.hpp"

using namespace speckle;

TEST_CASE("gaussian bump peaks at one for unit parameters") {
    GridSpec grid;
    grid.modes_per_dim = 64;
    grid.box_length = 20.0;
    const auto field = init_field(grid, GaussianBump{});
    CHECK(field.amps[0] == std::complex<double>(1.0, 0.0)); // k = 0 slot
    CHECK(field.time == 0.0);
}

TEST_CASE("discrete norm matches the continuum quadrature of |phi0_hat|^2") {
    GridSpec grid; // L = 40, N = 512
    const auto field = init_field(grid, GaussianBump{});
    // \int e^{-k^2} dk / (2 pi) = sqrt(pi) / (2 pi)
    const double oracle = std::sqrt(std::sqrt(std::numbers::pi) / (2 * std::numbers::pi));
    CHECK(l2_norm(grid, field) == doctest::Approx(oracle).epsilon(0.005));
}

TEST_CASE("tabulated zero field has zero norm") {
    GridSpec grid;
    grid.modes_per_dim = 16;
    TabulatedInitial zeros;
    zeros.values.assign(16, {0.0, 0.0});
    const auto field = init_field(grid, zeros);
    CHECK(l2_norm(grid, field) == 0.0);
}

TEST_CASE("norm is homogeneous of degree one") {
    GridSpec grid;
    grid.modes_per_dim = 64;
    grid.box_length = 20.0;
    auto field = init_field(grid, GaussianBump{});
    const double base = l2_norm(grid, field);
    for (auto& a : field.amps) a *= std::complex<double>(0.0, -2.5);
    CHECK(l2_norm(grid, field) == doctest::Approx(2.5 * base).epsilon(1e-13));
}

TEST_CASE("bump spilling past the Nyquist mode is rejected") {
    GridSpec grid;
    grid.modes_per_dim = 16;
    grid.box_length = 40.0; // k_max = 0.63, far inside the unit-width bump
    CHECK_THROWS_AS(init_field(grid, GaussianBump{}), ConfigError);

    GaussianBump off_center;
    off_center.center = {39.0};
    GridSpec wide;
    CHECK_THROWS_AS(init_field(wide, off_center), ConfigError);
}

TEST_CASE("tabulated data must match the lattice size") {
    GridSpec grid;
    grid.modes_per_dim = 16;
    TabulatedInitial bad;
    bad.values.assign(15, {0.0, 0.0});
    CHECK_THROWS_AS(init_field(grid, bad), ConfigError);
}
