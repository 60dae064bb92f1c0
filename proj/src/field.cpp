#include "speckle/field.hpp"

#include <cmath>
#include <numbers>

#include "speckle/errors.hpp"

namespace speckle {

double GaussianBump::value(std::span<const double> xi) const {
    double r2 = 0;
    for (std::size_t a = 0; a < xi.size(); ++a) {
        const double c = a < center.size() ? center[a] : 0.0;
        const double d = xi[a] - c;
        r2 += d * d;
    }
    return amplitude * std::exp(-r2 / (2.0 * width * width));
}

double GaussianBump::intensity(std::span<const double> xi) const {
    const double v = value(xi);
    return v * v;
}

double GaussianBump::intensity_mass(int dimension) const {
    // \int a^2 exp(-|x|^2/w^2) dx = a^2 (pi w^2)^{d/2}
    return amplitude * amplitude *
           std::pow(std::numbers::pi * width * width, 0.5 * dimension);
}

WaveField init_field(const GridSpec& grid, const InitialData& initial) {
    grid.validate();
    WaveField field;
    field.time = 0.0;
    const std::size_t n = grid.total_modes();

    if (const auto* bump = std::get_if<GaussianBump>(&initial)) {
        if (bump->amplitude < 0 || bump->width <= 0)
            throw ConfigError("init: bump amplitude must be >= 0 and width > 0");
        // Nyquist check: the bump must have decayed at the lattice edge.
        const double kmax = 0.5 * grid.modes_per_dim * grid.dk();
        double edge = 0;
        for (int a = 0; a < grid.dimension; ++a) {
            const double c = a < int(bump->center.size()) ? bump->center[a] : 0.0;
            edge = std::max(edge, std::abs(std::abs(c) - kmax));
        }
        if (bump->amplitude > 0 &&
            std::exp(-edge * edge / (2 * bump->width * bump->width)) > 1e-6)
            throw ConfigError("init: bump support exceeds the lattice Nyquist range");

        field.amps.resize(n);
        std::vector<double> k(grid.dimension);
        for (std::size_t f = 0; f < n; ++f) {
            int idx[3];
            grid.unflatten(f, idx);
            for (int a = 0; a < grid.dimension; ++a)
                k[a] = grid.mode_component(idx[a]);
            field.amps[f] = bump->value(k);
        }
        return field;
    }

    const auto& tab = std::get<TabulatedInitial>(initial);
    if (tab.values.size() != n)
        throw ConfigError("init: tabulated initial data has wrong size");
    field.amps = tab.values;
    return field;
}

double l2_norm(const GridSpec& grid, const WaveField& field) {
    double s = 0;
    for (const auto& a : field.amps) s += std::norm(a);
    const double cell = std::pow(grid.dk(), grid.dimension) *
                        std::pow(2.0 * std::numbers::pi, -grid.dimension);
    return std::sqrt(s * cell);
}

} // namespace speckle
