#include "speckle/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "speckle/errors.hpp"

namespace speckle {

namespace {

// Unitary noise phase applied in place: a[m] *= exp(-i x[m]).  Noise
// increments are O(sqrt(dt)), so cos/sin come from degree-8/9 polynomials
// valid to ~3e-17 for |x| <= 0.1 (branch-free main loop); the rare large
// arguments are patched with libm in a second pass.
void apply_unit_phase(std::complex<double>* a, const double* x, std::size_t n) {
    auto* raw = reinterpret_cast<double*>(a); // interleaved re, im
    bool any_big = false;
    for (std::size_t m = 0; m < n; ++m) {
        const double v = x[m];
        const double x2 = v * v;
        const double c =
            1.0 + x2 * (-0.5 + x2 * (1.0 / 24.0 +
                                     x2 * (-1.0 / 720.0 + x2 * (1.0 / 40320.0))));
        const double s =
            v * (1.0 + x2 * (-1.0 / 6.0 +
                             x2 * (1.0 / 120.0 +
                                   x2 * (-1.0 / 5040.0 + x2 * (1.0 / 362880.0)))));
        const double re = raw[2 * m], im = raw[2 * m + 1];
        raw[2 * m] = re * c + im * s;     // multiply by (c - i s)
        raw[2 * m + 1] = im * c - re * s;
        any_big |= (x2 > 0.01);
    }
    if (any_big) [[unlikely]] {
        for (std::size_t m = 0; m < n; ++m) {
            if (x[m] * x[m] > 0.01) {
                // undo the polynomial factor and apply the exact one
                const double v = x[m];
                const double x2 = v * v;
                const double c =
                    1.0 + x2 * (-0.5 + x2 * (1.0 / 24.0 + x2 * (-1.0 / 720.0 +
                                                                x2 * (1.0 / 40320.0))));
                const double s =
                    v * (1.0 + x2 * (-1.0 / 6.0 +
                                     x2 * (1.0 / 120.0 + x2 * (-1.0 / 5040.0 +
                                                               x2 * (1.0 / 362880.0)))));
                const double inv = 1.0 / (c * c + s * s);
                double re = raw[2 * m], im = raw[2 * m + 1];
                // divide by (c - i s), then multiply by the libm phase
                const double ur = (re * c - im * s) * inv;
                const double ui = (im * c + re * s) * inv;
                const double ce = std::cos(v), se = std::sin(v);
                raw[2 * m] = ur * ce + ui * se;
                raw[2 * m + 1] = ui * ce - ur * se;
            }
        }
    }
}

// dst[f] = a[f] * b[f] with plain arithmetic (no Annex G fixup calls)
inline void cmul_arrays(std::complex<double>* dst, const std::complex<double>* a,
                        const std::complex<double>* b, std::size_t n) {
    auto* d = reinterpret_cast<double*>(dst);
    const auto* pa = reinterpret_cast<const double*>(a);
    const auto* pb = reinterpret_cast<const double*>(b);
    for (std::size_t f = 0; f < n; ++f) {
        const double ar = pa[2 * f], ai = pa[2 * f + 1];
        const double br = pb[2 * f], bi = pb[2 * f + 1];
        d[2 * f] = ar * br - ai * bi;
        d[2 * f + 1] = ar * bi + ai * br;
    }
}

} // namespace

SplitStepSolver::SplitStepSolver(const GridSpec& grid, const CorrelationModel& model)
    : grid_(grid), model_(model), weights_(mode_weights(model, grid)),
      fft_(grid.dimension, grid.modes_per_dim) {
    grid_.validate();
    model_.validate();

    const std::size_t n = grid_.total_modes();
    const double invn = 1.0 / double(n);
    halfkick_.resize(n);
    halfkick_scaled_.resize(n);
    const double eps2 = grid_.epsilon * grid_.epsilon;
    for (std::size_t f = 0; f < n; ++f) {
        const double phase = -grid_.mode_sq(f) * grid_.dt / (4.0 * eps2);
        halfkick_[f] = std::polar(1.0, phase);
        halfkick_scaled_[f] = halfkick_[f] * invn;
    }

    fftbuf_ = aligned_buffer(n);
    noise_work_ = aligned_buffer(n);
    noise_x_.assign(n, 0.0);

    // Effective noise modes: drop weights below 1e-14 of the maximum; the
    // covariance of the synthesized field is unchanged to rounding and the
    // per-step draw count collapses to the support of Rhat.
    double wmax = 0;
    for (double w : weights_.weights) wmax = std::max(wmax, w);
    const double cutoff = wmax * 1e-14;
    int idx[3], neg[3];
    for (std::size_t f = 0; f < n; ++f) {
        const double w = weights_.weights[f];
        if (w <= cutoff) continue;
        grid_.unflatten(f, idx);
        for (int a = 0; a < grid_.dimension; ++a)
            neg[a] = (grid_.modes_per_dim - idx[a]) % grid_.modes_per_dim;
        const std::size_t g = grid_.flatten(neg);
        if (g < f) continue; // handled from the partner
        noise_modes_.push_back({f, g, std::sqrt(grid_.dt * w), f == g});
    }
}

void SplitStepSolver::prepare_probe(const ProbeSpec& probe) {
    probe.validate(grid_);
    qv_terms_.clear();
    const std::size_t xi_idx = probe.xi_index(grid_);
    xi_sq_ = grid_.mode_sq(xi_idx);

    double wmax = 0;
    for (double w : weights_.weights) wmax = std::max(wmax, w);
    const double cutoff = wmax * 1e-14;
    const std::size_t n = grid_.total_modes();
    int pidx[3], shift[3];
    for (std::size_t f = 0; f < n; ++f) {
        const double w = weights_.weights[f];
        if (w <= cutoff) continue;
        grid_.unflatten(f, pidx);
        // p in mode coordinates; indices of xi -+ p with periodic wrap
        for (int a = 0; a < grid_.dimension; ++a) shift[a] = -pidx[a];
        const std::size_t minus = grid_.shifted_index(xi_idx, shift);
        for (int a = 0; a < grid_.dimension; ++a) shift[a] = pidx[a];
        const std::size_t plus = grid_.shifted_index(xi_idx, shift);
        qv_terms_.push_back({minus, plus, w});
    }
    probe_ready_ = true;
}

void SplitStepSolver::synthesize_noise(NoiseStream& stream) {
    const std::size_t n = grid_.total_modes();
    std::fill(noise_work_.get(), noise_work_.get() + n, std::complex<double>{0, 0});
    for (const auto& m : noise_modes_) {
        if (m.self) {
            noise_work_[m.lo] = {m.amp * stream.rng.normal(), 0.0};
        } else {
            const std::complex<double> z = m.amp * stream.rng.cnormal();
            noise_work_[m.lo] = z;
            noise_work_[m.hi] = std::conj(z);
        }
    }
    // Hermitian coefficients, so the backward transform is real to rounding.
    fft_.backward(noise_work_.get());
    for (std::size_t i = 0; i < n; ++i) noise_x_[i] = noise_work_[i].real();
}

std::vector<double> SplitStepSolver::sample_noise_increment(NoiseStream& stream) {
    synthesize_noise(stream);
    return noise_x_;
}

void SplitStepSolver::accumulate_qv(const WaveField& field, MartingaleTracker& tracker) {
    const double s = field.time;
    const double growth = std::exp(model_.R0() * s);
    double q = 0;
    double sq_re = 0, sq_im = 0;
    for (const auto& term : qv_terms_) {
        const std::complex<double>& am = field.amps[term.minus];
        const std::complex<double>& ap = field.amps[term.plus];
        const double mr = am.real(), mi = am.imag();
        q += term.w * (mr * mr + mi * mi);
        sq_re += term.w * (mr * ap.real() - mi * ap.imag());
        sq_im += term.w * (mr * ap.imag() + mi * ap.real());
    }
    const std::complex<double> sq{sq_re, sq_im};
    tracker.Q += grid_.dt * growth * q;
    // The free phases of psi(xi-p) psi(xi+p) and the e^{-is|p|^2/eps^2}
    // factor collapse to a single p-independent phase e^{is|xi|^2/eps^2}.
    const double eps2 = grid_.epsilon * grid_.epsilon;
    const std::complex<double> phase = std::polar(1.0, s * xi_sq_ / eps2);
    tracker.scriptQ -= grid_.dt * growth * phase * sq;
}

void SplitStepSolver::step(WaveField& field, NoiseStream& stream,
                           MartingaleTracker* tracker) {
    if (field.amps.size() != grid_.total_modes())
        throw ConfigError("step: field size does not match grid");
    if (tracker) {
        if (!probe_ready_) throw ProbeError("step: probe not prepared for QV tracking");
        accumulate_qv(field, *tracker);
    }

    const std::size_t n = field.amps.size();
    auto* a = fftbuf_.get();
    cmul_arrays(a, field.amps.data(), halfkick_.data(), n);

    fft_.backward(a); // now L^d phi(x); scale folded into the second kick

    synthesize_noise(stream);
    apply_unit_phase(a, noise_x_.data(), n); // exp(-i dB(x))

    fft_.forward(a);
    cmul_arrays(field.amps.data(), a, halfkick_scaled_.data(), n);

    field.time += grid_.dt;
}

TrajectoryResult SplitStepSolver::run_trajectory(const InitialData& initial,
                                                 NoiseStream& stream,
                                                 const ProbeSpec& probe,
                                                 bool check_norm_every_step) {
    probe.validate(grid_);
    prepare_probe(probe);

    WaveField field = init_field(grid_, initial);
    const double norm0 = l2_norm(grid_, field);

    TrajectoryResult res;
    res.sample.eps = grid_.epsilon;
    res.sample.base_seed = stream.base_seed;
    res.sample.replica = stream.replica_id;
    res.sample.times = probe.times;
    res.sample.eta_modes = probe.eta_modes;
    res.sample.values.reserve(probe.times.size() * probe.eta_modes.size());
    res.q_bound = q_pathwise_bound(model_, norm0, grid_.horizon);

    const long nsteps = grid_.steps();
    std::vector<long> probe_steps(probe.times.size());
    for (std::size_t i = 0; i < probe.times.size(); ++i)
        probe_steps[i] = std::lround(probe.times[i] / grid_.dt);

    MartingaleTracker tracker;
    std::size_t next_probe = 0;
    const double r0 = model_.R0();
    const double bound_scale =
        (r0 > 0) ? model_.rhat_max() * norm0 * norm0 / r0 * (1 + 1e-8) : 0.0;

    auto record = [&]() {
        const auto vals = compensate(field, probe, grid_);
        res.sample.values.insert(res.sample.values.end(), vals.begin(), vals.end());
        res.qv.push_back({field.time, tracker.Q, tracker.scriptQ});
    };

    for (long j = 0; j < nsteps; ++j) {
        if (next_probe < probe_steps.size() && probe_steps[next_probe] == j) {
            record();
            ++next_probe;
        }
        step(field, stream, &tracker);
        if (r0 > 0 &&
            tracker.Q > bound_scale * (std::exp(r0 * field.time) - 1.0))
            ++res.q_bound_violations;
        if (check_norm_every_step && norm0 > 0) {
            const double nn = l2_norm(grid_, field);
            res.max_norm_drift =
                std::max(res.max_norm_drift, std::abs(nn - norm0) / norm0);
        }
    }
    if (next_probe < probe_steps.size() && probe_steps[next_probe] == nsteps)
        record();

    if (!check_norm_every_step && norm0 > 0) {
        const double nn = l2_norm(grid_, field);
        res.max_norm_drift = std::abs(nn - norm0) / norm0;
    }
    return res;
}

void step(WaveField& field, const GridSpec& grid, const CorrelationModel& model,
          NoiseStream& stream) {
    SplitStepSolver solver(grid, model);
    solver.step(field, stream);
}

std::vector<double> sample_noise_increment(NoiseStream& stream, const GridSpec& grid,
                                           const CorrelationModel& model) {
    SplitStepSolver solver(grid, model);
    return solver.sample_noise_increment(stream);
}

TrajectoryResult run_trajectory(const GridSpec& grid, const CorrelationModel& model,
                                const InitialData& initial, NoiseStream& stream,
                                const ProbeSpec& probe) {
    SplitStepSolver solver(grid, model);
    return solver.run_trajectory(initial, stream, probe);
}

double q_pathwise_bound(const CorrelationModel& model, double norm0, double horizon) {
    const double r0 = model.R0();
    if (r0 <= 0) return 0.0;
    return model.rhat_max() * norm0 * norm0 * (std::exp(r0 * horizon) - 1.0) / r0 *
           (1 + 1e-8);
}

} // namespace speckle
