#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "speckle/compensator.hpp"
#include "speckle/correlation.hpp"
#include "speckle/fft.hpp"
#include "speckle/field.hpp"
#include "speckle/grid.hpp"
#include "speckle/rng.hpp"

namespace speckle {

/// Reproducible per-replica noise stream: (base_seed, replica_id) determines
/// the whole trajectory bit-for-bit.
struct NoiseStream {
    std::uint64_t base_seed = 0;
    std::uint64_t replica_id = 0;
    Rng rng;

    static NoiseStream make(std::uint64_t base_seed, std::uint64_t replica_id) {
        return NoiseStream{base_seed, replica_id,
                           Rng::substream(base_seed, replica_id, 0x7261'6a65'6374ULL)};
    }
};

/// Running quadratic variations <M,M*> and <M,M> of the compensated-field
/// martingale at the probe frequency.
struct MartingaleTracker {
    double Q = 0.0;
    std::complex<double> scriptQ{0.0, 0.0};
};

struct QvSnapshot {
    double t = 0.0;
    double Q = 0.0;
    std::complex<double> scriptQ{0.0, 0.0};
};

struct TrajectoryResult {
    CompensatedSample sample;
    std::vector<QvSnapshot> qv; // one entry per probe time
    double max_norm_drift = 0.0;
    double q_bound = 0.0; // pathwise bound on Q at the horizon
    int q_bound_violations = 0;
};

/// Strang split-step spectral integrator for the scaled Ito-Schrodinger
/// equation on the periodic lattice.  Each step is
///   half free flight -> unitary noise phase exp(-i dB(x)) -> half free flight,
/// so the discrete L2 norm is conserved to rounding and the Stratonovich
/// product (hence the Ito correction) is realized exactly.
class SplitStepSolver {
  public:
    SplitStepSolver(const GridSpec& grid, const CorrelationModel& model);

    const GridSpec& grid() const { return grid_; }
    const ModeWeights& weights() const { return weights_; }

    /// Advance one step of grid.dt.  If a tracker is given, the quadratic
    /// variation integrands are accumulated at the pre-step field
    /// (left-point rule); prepare_probe must have been called.
    void step(WaveField& field, NoiseStream& stream,
              MartingaleTracker* tracker = nullptr);

    /// One realization of the Gaussian increment dB on the physical lattice.
    std::vector<double> sample_noise_increment(NoiseStream& stream);

    /// Configure the quadratic-variation probe frequency.
    void prepare_probe(const ProbeSpec& probe);

    TrajectoryResult run_trajectory(const InitialData& initial,
                                    NoiseStream& stream, const ProbeSpec& probe,
                                    bool check_norm_every_step = false);

  private:
    void synthesize_noise(NoiseStream& stream); // fills noise_x_
    void accumulate_qv(const WaveField& field, MartingaleTracker& tracker);

    GridSpec grid_;
    CorrelationModel model_;
    ModeWeights weights_;
    Fft fft_;

    std::vector<std::complex<double>> halfkick_;        // exp(-i|k|^2 dt/(4 eps^2))
    std::vector<std::complex<double>> halfkick_scaled_; // halfkick / N^d
    AlignedBuffer fftbuf_;     // field transform workspace
    AlignedBuffer noise_work_; // spectral noise draw -> physical increment
    std::vector<double> noise_x_;

    struct NoiseMode {
        std::size_t lo, hi; // hi carries the conjugate coefficient
        double amp;         // sqrt(dt * weight)
        bool self;
    };
    std::vector<NoiseMode> noise_modes_;

    struct QvTerm {
        std::size_t minus, plus; // lattice indices of xi-p and xi+p
        double w;                // Rhat(p) dk^d / (2 pi)^d
    };
    std::vector<QvTerm> qv_terms_;
    double xi_sq_ = 0.0;
    bool probe_ready_ = false;
};

/// Convenience single-step entry matching the operation-level interface;
/// builds a solver internally, so prefer SplitStepSolver in loops.
void step(WaveField& field, const GridSpec& grid, const CorrelationModel& model,
          NoiseStream& stream);

std::vector<double> sample_noise_increment(NoiseStream& stream,
                                           const GridSpec& grid,
                                           const CorrelationModel& model);

TrajectoryResult run_trajectory(const GridSpec& grid,
                                const CorrelationModel& model,
                                const InitialData& initial, NoiseStream& stream,
                                const ProbeSpec& probe);

/// Discrete counterpart of the pathwise quadratic-variation bound
/// Q(T) <= Rhat(0) * ||phi0||^2 * (e^{R(0)T} - 1) / R(0).
double q_pathwise_bound(const CorrelationModel& model, double norm0,
                        double horizon);

} // namespace speckle
