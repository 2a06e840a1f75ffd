#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hawkes/periodogram.hpp"
#include "test_support.hpp"

using namespace hawkes;
using Catch::Approx;

namespace {

std::vector<double> random_integer_series(std::size_t n, std::uint64_t seed) {
    auto rng = make_engine(seed);
    std::vector<double> x(n);
    for (auto& v : x) v = static_cast<double>(poisson(rng, 3.0));
    return x;
}

}  // namespace

TEST_CASE("constant series concentrates at frequency zero", "[periodogram]") {
    std::vector<double> x(32, 4.0);
    auto p = compute_periodogram(x, false);
    CHECK(p.ordinates[0] == Approx(32.0 * 16.0 / two_pi).epsilon(1e-12));
    for (std::size_t j = 1; j < p.n; ++j) CHECK(p.ordinates[j] == Approx(0.0).margin(1e-12));
}

TEST_CASE("two-point closed form", "[periodogram]") {
    auto p = compute_periodogram(std::vector<double>{1.0, 0.0}, false);
    CHECK(p.ordinates[1] == Approx(1.0 / (4.0 * pi)).epsilon(1e-14));
    CHECK(p.frequency(1) == Approx(pi).epsilon(1e-15));
}

TEST_CASE("parseval identity on random integer series", "[periodogram]") {
    for (std::size_t n : {17u, 64u, 1000u}) {
        for (std::uint64_t s = 0; s < 30; ++s) {
            auto x = random_integer_series(n, 100 * n + s);
            auto p = compute_periodogram(x, false);
            double lhs = 0.0;
            for (double o : p.ordinates) lhs += o;
            lhs *= two_pi / static_cast<double>(n);
            double rhs = 0.0;
            for (double v : x) rhs += v * v;
            rhs /= static_cast<double>(n);
            CAPTURE(n, s);
            CHECK(lhs == Approx(rhs).epsilon(1e-10));
        }
    }
}

TEST_CASE("fft matches the quadratic-time transform", "[periodogram]") {
    for (std::size_t n : {5u, 17u, 64u, 129u, 256u}) {
        auto x = random_integer_series(n, 7 * n + 1);
        auto fast = compute_periodogram(x, false);
        auto slow = testsupport::naive_periodogram(x);
        for (std::size_t j = 0; j < n; ++j) {
            CAPTURE(n, j);
            CHECK(fast.ordinates[j] == Approx(slow[j]).epsilon(1e-9).margin(1e-12));
        }
    }
}

TEST_CASE("adding a constant shifts only the zero ordinate", "[periodogram]") {
    auto x = random_integer_series(100, 5);
    auto base = compute_periodogram(x, false);
    auto shifted_x = x;
    for (auto& v : shifted_x) v += 7.5;
    auto shifted = compute_periodogram(shifted_x, false);
    for (std::size_t j = 1; j < 100; ++j)
        CHECK(shifted.ordinates[j] == Approx(base.ordinates[j]).epsilon(1e-9).margin(1e-12));
    CHECK(shifted.ordinates[0] != Approx(base.ordinates[0]).epsilon(1e-3));
}

TEST_CASE("mean removal zeroes the dc ordinate and nothing else", "[periodogram]") {
    auto x = random_integer_series(64, 9);
    auto raw = compute_periodogram(x, false);
    auto centered = compute_periodogram(x, true);
    CHECK(centered.mean_removed);
    CHECK(centered.ordinates[0] == Approx(0.0).margin(1e-16));
    for (std::size_t j = 1; j < 64; ++j)
        CHECK(centered.ordinates[j] == Approx(raw.ordinates[j]).epsilon(1e-9).margin(1e-12));
}

TEST_CASE("hermitian symmetry of ordinates", "[periodogram]") {
    auto x = random_integer_series(101, 11);
    auto p = compute_periodogram(x, false);
    for (std::size_t j = 1; j < 101; ++j)
        CHECK(p.ordinates[j] == Approx(p.ordinates[101 - j]).epsilon(1e-12));
}

TEST_CASE("periodogram input validation and series overload", "[periodogram]") {
    CHECK_THROWS_AS(compute_periodogram(std::vector<double>{1.0}, false), std::invalid_argument);
    BinCountSeries s{{3, 1, 4, 1, 5, 9, 2, 6}, 1.0, 0.0, 0};
    auto p = compute_periodogram(s, false);
    CHECK(p.n == 8);
    auto q = compute_periodogram(std::vector<double>{3, 1, 4, 1, 5, 9, 2, 6}, false);
    for (std::size_t j = 0; j < 8; ++j) CHECK(p.ordinates[j] == q.ordinates[j]);
}
