#pragma once

#include <complex>
#include <cstddef>
#include <memory>

namespace speckle {

struct FftwFreeDeleter {
    void operator()(std::complex<double>* p) const;
};

/// Buffer from fftw_malloc; satisfies the SIMD alignment FFTW plans for.
using AlignedBuffer = std::unique_ptr<std::complex<double>[], FftwFreeDeleter>;
AlignedBuffer aligned_buffer(std::size_t n);

/// Thin RAII wrapper over FFTW c2c plans for a d-dimensional cube.  Plan
/// creation is serialized internally (FFTW planning is not thread safe);
/// execution through the new-array interface is, provided the arrays come
/// from aligned_buffer.
class Fft {
  public:
    Fft(int dimension, int modes_per_dim);
    ~Fft();
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    void forward(std::complex<double>* data) const;  // e^{-ikx} sign
    void backward(std::complex<double>* data) const; // unnormalized inverse

    std::size_t size() const { return size_; }

  private:
    void* fwd_ = nullptr;
    void* bwd_ = nullptr;
    std::size_t size_ = 0;
};

} // namespace speckle
