#include "speckle/grid.hpp"

#include <cmath>
#include <numbers>

namespace speckle {

void GridSpec::validate() const {
    if (dimension < 1 || dimension > 3)
        throw ConfigError("grid: dimension must be 1, 2 or 3");
    if (modes_per_dim < 4 || modes_per_dim % 2 != 0)
        throw ConfigError("grid: modes_per_dim must be even and >= 4");
    if (box_length <= 0) throw ConfigError("grid: box_length must be positive");
    if (dt <= 0) throw ConfigError("grid: dt must be positive");
    if (epsilon <= 0 || epsilon > 1)
        throw ConfigError("grid: epsilon must lie in (0,1]");
    if (horizon <= 0) throw ConfigError("grid: horizon must be positive");
    const double ratio = horizon / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio + 1e-12)
        throw ConfigError("grid: horizon must be an integer multiple of dt");
}

double GridSpec::dk() const { return 2.0 * std::numbers::pi / box_length; }

std::size_t GridSpec::total_modes() const {
    std::size_t n = 1;
    for (int a = 0; a < dimension; ++a) n *= std::size_t(modes_per_dim);
    return n;
}

long GridSpec::steps() const { return std::lround(horizon / dt); }

double GridSpec::mode_component(int j) const {
    const int half = modes_per_dim / 2;
    const int m = (j < half) ? j : j - modes_per_dim;
    return m * dk();
}

int GridSpec::index_of_mode(int m) const {
    const int n = modes_per_dim;
    return ((m % n) + n) % n;
}

void GridSpec::unflatten(std::size_t flat, int* idx) const {
    for (int a = dimension - 1; a >= 0; --a) {
        idx[a] = int(flat % modes_per_dim);
        flat /= modes_per_dim;
    }
}

std::size_t GridSpec::flatten(const int* idx) const {
    std::size_t flat = 0;
    for (int a = 0; a < dimension; ++a)
        flat = flat * modes_per_dim + std::size_t(idx[a]);
    return flat;
}

std::size_t GridSpec::shifted_index(std::size_t flat, const int* shift) const {
    int idx[3];
    unflatten(flat, idx);
    for (int a = 0; a < dimension; ++a) {
        int v = (idx[a] + shift[a]) % modes_per_dim;
        if (v < 0) v += modes_per_dim;
        idx[a] = v;
    }
    return flatten(idx);
}

std::vector<double> GridSpec::mode_vector(std::size_t flat) const {
    int idx[3];
    unflatten(flat, idx);
    std::vector<double> k(dimension);
    for (int a = 0; a < dimension; ++a) k[a] = mode_component(idx[a]);
    return k;
}

double GridSpec::mode_sq(std::size_t flat) const {
    int idx[3];
    unflatten(flat, idx);
    double s = 0;
    for (int a = 0; a < dimension; ++a) {
        const double k = mode_component(idx[a]);
        s += k * k;
    }
    return s;
}

double GridSpec::auto_dt(int modes_per_dim, double box_length, double eps,
                         double horizon, int round_to) {
    const double dkv = 2.0 * std::numbers::pi / box_length;
    const double kmax = 0.5 * modes_per_dim * dkv;
    const double dt_max = std::numbers::pi * eps * eps / (kmax * kmax);
    long steps = long(std::ceil(horizon / dt_max));
    steps = ((steps + round_to - 1) / round_to) * round_to;
    return horizon / double(steps);
}

} // namespace speckle
