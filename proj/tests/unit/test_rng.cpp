#include <doctest.h>

#include <cmath>

#include "speckle/rng.hpp"

using namespace speckle;

TEST_CASE("rng streams are reproducible and replica-separated") {
    Rng a = Rng::substream(123, 7);
    Rng b = Rng::substream(123, 7);
    Rng c = Rng::substream(123, 8);
    bool all_equal = true, any_equal_c = false;
    for (int i = 0; i < 1000; ++i) {
        const auto x = a.next_u64();
        all_equal &= (x == b.next_u64());
        any_equal_c |= (x == c.next_u64());
    }
    CHECK(all_equal);
    CHECK_FALSE(any_equal_c);
}

TEST_CASE("uniform lies in [0,1) and uniform_pos in (0,1]") {
    Rng rng(5);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const double v = rng.uniform_pos();
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("normal moments match N(0,1)") {
    Rng rng(99);
    const long n = 200000;
    double s1 = 0, s2 = 0, s4 = 0;
    for (long i = 0; i < n; ++i) {
        const double x = rng.normal();
        s1 += x;
        s2 += x * x;
        s4 += x * x * x * x;
    }
    s1 /= n;
    s2 /= n;
    s4 /= n;
    CHECK(std::abs(s1) < 3.0 / std::sqrt(double(n)));           // SE(mean) = 1/sqrt(n)
    CHECK(std::abs(s2 - 1.0) < 3.0 * std::sqrt(2.0 / double(n)));
    CHECK(std::abs(s4 - 3.0) < 3.0 * std::sqrt(96.0 / double(n)));
}

TEST_CASE("cnormal is circular with unit second absolute moment") {
    Rng rng(17);
    const long n = 100000;
    double abs2 = 0;
    std::complex<double> pseudo{0, 0};
    for (long i = 0; i < n; ++i) {
        const auto z = rng.cnormal();
        abs2 += std::norm(z);
        pseudo += z * z;
    }
    abs2 /= n;
    pseudo /= double(n);
    CHECK(std::abs(abs2 - 1.0) < 3.0 * std::sqrt(1.0 / double(n)));
    CHECK(std::abs(pseudo) < 3.0 / std::sqrt(double(n)));
}

TEST_CASE("exponential holding times have the requested mean") {
    Rng rng(3);
    const long n = 100000;
    double s = 0;
    for (long i = 0; i < n; ++i) s += rng.exponential(0.5);
    s /= n;
    CHECK(std::abs(s - 0.5) < 3.0 * 0.5 / std::sqrt(double(n)));
}
