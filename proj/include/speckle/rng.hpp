#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <cmath>

namespace speckle {

inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// xoshiro256++ with splitmix64 seeding and a polar-method normal generator.
/// Pure integer state, so streams are reproducible bit-for-bit across
/// platforms and independent of the standard library's distributions.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& w : state_) w = splitmix64(x);
    }

    /// Decorrelated substream for (base_seed, stream_id, salt).
    static Rng substream(std::uint64_t base_seed, std::uint64_t stream_id,
                         std::uint64_t salt = 0) {
        std::uint64_t x = base_seed;
        std::uint64_t a = splitmix64(x);
        x ^= 0x632be59bd9b4e019ULL + stream_id;
        std::uint64_t b = splitmix64(x);
        x ^= 0x9e6c63d0876a9a47ULL + salt;
        std::uint64_t c = splitmix64(x);
        return Rng(a ^ (b * 0x2545f4914f6cdd1dULL) ^ (c << 1));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform in [0,1) with 53 random mantissa bits.
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in (0,1], safe as a log argument.
    double uniform_pos() { return double((next_u64() >> 11) + 1) * 0x1.0p-53; }

    /// Standard normal via the Marsaglia polar method (no trig calls).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    /// Circular complex normal with E|z|^2 = 1.
    std::complex<double> cnormal() {
        const double a = normal();
        const double b = normal();
        return {a * M_SQRT1_2, b * M_SQRT1_2};
    }

    double exponential(double mean) { return -mean * std::log(uniform_pos()); }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::array<std::uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace speckle
