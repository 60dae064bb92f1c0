#include "speckle/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace speckle {

CorrFamily corr_family_from_string(const std::string& name) {
    if (name == "gaussian") return CorrFamily::gaussian;
    throw ConfigError("corr.family: unknown family '" + name + "'");
}

std::string to_string(CorrFamily) { return "gaussian"; }

void CorrelationModel::validate() const {
    if (dimension < 1 || dimension > 3)
        throw ConfigError("corr: dimension must be 1, 2 or 3");
    if (amplitude < 0) throw ConfigError("corr.amplitude must be >= 0");
    if (corr_length <= 0) throw ConfigError("corr.length must be > 0");
}

double CorrelationModel::rhat_max() const {
    const double two_pi_l2 = 2.0 * std::numbers::pi * corr_length * corr_length;
    return amplitude * std::pow(two_pi_l2, 0.5 * dimension);
}

double eval_R(const CorrelationModel& model, std::span<const double> x) {
    double r2 = 0;
    for (double v : x) r2 += v * v;
    const double l2 = model.corr_length * model.corr_length;
    return model.amplitude * std::exp(-r2 / (2.0 * l2));
}

double eval_Rhat(const CorrelationModel& model, std::span<const double> p) {
    double p2 = 0;
    for (double v : p) p2 += v * v;
    const double l2 = model.corr_length * model.corr_length;
    return model.rhat_max() * std::exp(-0.5 * l2 * p2);
}

double DiffusionMatrix::trace() const {
    double t = 0;
    for (int i = 0; i < dimension; ++i) t += at(i, i);
    return t;
}

double DiffusionMatrix::min_eigenvalue() const {
    // Dimensions here are at most 3; closed forms for d <= 2, bisection on
    // the characteristic polynomial would be overkill since v1 models are
    // isotropic (D is diagonal).  Use the symmetric 2x2/1x1 formulas and
    // fall back to the smallest diagonal minus off-diagonal mass otherwise.
    if (dimension == 1) return at(0, 0);
    if (dimension == 2) {
        const double a = at(0, 0), b = at(0, 1), c = at(1, 1);
        const double m = 0.5 * (a + c);
        const double r = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
        return m - r;
    }
    double worst = at(0, 0);
    for (int i = 0; i < dimension; ++i) {
        double row = at(i, i);
        for (int j = 0; j < dimension; ++j)
            if (j != i) row -= std::abs(at(i, j));
        worst = std::min(worst, row);
    }
    return worst; // Gershgorin lower bound
}

DiffusionMatrix diffusion_matrix(const CorrelationModel& model,
                                 const QuadratureSpec& quad) {
    model.validate();
    const int d = model.dimension;
    const double l = model.corr_length;
    const double radius = quad.radius_stddevs / l;
    const int n = quad.points_per_dim;
    if (n < 3) throw ConfigError("quadrature: points_per_dim must be >= 3");
    const double h = 2.0 * radius / (n - 1);

    // Relative tail mass of the p^2-weighted integrand outside the cube.
    // For the gaussian family each axis integral is a Gamma(3/2) tail.
    const double a = quad.radius_stddevs; // cube half width in stddev units
    const double axis_tail =
        std::erfc(a / std::numbers::sqrt2) +
        std::sqrt(2.0 / std::numbers::pi) * a * std::exp(-0.5 * a * a);
    const double tail = d * axis_tail;
    if (tail > quad.tail_tol)
        throw TruncationError("diffusion_matrix: tail mass " + std::to_string(tail) +
                              " exceeds tolerance");

    DiffusionMatrix out;
    out.dimension = d;
    out.entries.assign(std::size_t(d) * d, 0.0);
    out.tail_estimate = tail;

    std::vector<double> p(d, 0.0);
    std::vector<int> idx(d, 0);
    const double cell = std::pow(h, d);
    const double norm = std::pow(2.0 * std::numbers::pi, -d);
    while (true) {
        double wt = 1.0;
        for (int a2 = 0; a2 < d; ++a2) {
            p[a2] = -radius + h * idx[a2];
            if (idx[a2] == 0 || idx[a2] == n - 1) wt *= 0.5; // trapezoid ends
        }
        const double f = eval_Rhat(model, p) * cell * norm * wt;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                out.entries[std::size_t(i) * d + j] += f * p[i] * p[j];
        int a3 = d - 1;
        while (a3 >= 0 && ++idx[a3] == n) idx[a3--] = 0;
        if (a3 < 0) break;
    }
    // Symmetrize away the last bits of rounding asymmetry.
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            const double s = 0.5 * (out.at(i, j) + out.at(j, i));
            out.entries[std::size_t(i) * d + j] = s;
            out.entries[std::size_t(j) * d + i] = s;
        }
    return out;
}

ModeWeights mode_weights(const CorrelationModel& model, const GridSpec& grid,
                         double aliasing_fraction) {
    model.validate();
    grid.validate();
    if (model.dimension != grid.dimension)
        throw ConfigError("mode_weights: model and grid dimension differ");

    const int d = grid.dimension;
    const std::size_t n = grid.total_modes();
    const double cell = std::pow(grid.dk(), d);
    const double norm = cell * std::pow(2.0 * std::numbers::pi, -d);

    ModeWeights out;
    out.weights.assign(n, 0.0);
    std::vector<double> k(d);
    for (std::size_t f = 0; f < n; ++f) {
        int idx[3];
        grid.unflatten(f, idx);
        for (int a = 0; a < d; ++a) k[a] = grid.mode_component(idx[a]);
        out.weights[f] = eval_Rhat(model, k) * norm;
        out.discrete_R0 += out.weights[f];
    }
    const double rhat0 = model.rhat_max();
    if (rhat0 > 0) {
        std::vector<double> nyq(d, 0.0);
        nyq[0] = -0.5 * grid.modes_per_dim * grid.dk();
        out.nyquist_fraction = eval_Rhat(model, nyq) / rhat0;
        out.aliasing_warning = out.nyquist_fraction > aliasing_fraction;
    }
    return out;
}

} // namespace speckle
