#include "speckle/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <vector>

namespace speckle {

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
} // namespace

void FftwFreeDeleter::operator()(std::complex<double>* p) const {
    fftw_free(reinterpret_cast<fftw_complex*>(p));
}

AlignedBuffer aligned_buffer(std::size_t n) {
    auto* p = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(n));
    for (std::size_t i = 0; i < n; ++i) p[i] = {0.0, 0.0};
    return AlignedBuffer(p);
}

Fft::Fft(int dimension, int modes_per_dim) {
    std::vector<int> dims(std::size_t(dimension), modes_per_dim);
    size_ = 1;
    for (int v : dims) size_ *= std::size_t(v);

    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_complex* buf = fftw_alloc_complex(size_);
    // FFTW_ESTIMATE keeps the plan choice deterministic across runs; the
    // new-array execute below requires fftw_malloc-aligned arrays.
    fwd_ = fftw_plan_dft(dimension, dims.data(), buf, buf, FFTW_FORWARD,
                         FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft(dimension, dims.data(), buf, buf, FFTW_BACKWARD,
                         FFTW_ESTIMATE);
    fftw_free(buf);
}

Fft::~Fft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (fwd_) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    if (bwd_) fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

void Fft::forward(std::complex<double>* data) const {
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(static_cast<fftw_plan>(fwd_), p, p);
}

void Fft::backward(std::complex<double>* data) const {
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(static_cast<fftw_plan>(bwd_), p, p);
}

} // namespace speckle
