#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>

#include "hawkes/optimize.hpp"

using namespace hawkes;
using Catch::Approx;

TEST_CASE("coordinate transforms round-trip and guard domains", "[optimize]") {
    CHECK(from_unconstrained(to_unconstrained(3.7, Transform::Log), Transform::Log) == Approx(3.7));
    CHECK(from_unconstrained(to_unconstrained(0.42, Transform::Logit), Transform::Logit) ==
          Approx(0.42).epsilon(1e-14));
    CHECK(to_unconstrained(-5.0, Transform::Identity) == -5.0);
    CHECK(from_unconstrained(0.0, Transform::Logit) == Approx(0.5));
    CHECK_THROWS_AS(to_unconstrained(0.0, Transform::Log), std::invalid_argument);
    CHECK_THROWS_AS(to_unconstrained(-1.0, Transform::Log), std::invalid_argument);
    CHECK_THROWS_AS(to_unconstrained(1.0, Transform::Logit), std::invalid_argument);
    CHECK_THROWS_AS(to_unconstrained(0.0, Transform::Logit), std::invalid_argument);
}

TEST_CASE("quadratic bowl is solved to tolerance", "[optimize]") {
    auto f = [](const std::vector<double>& x) {
        return (x[0] - 3.0) * (x[0] - 3.0) + (x[1] + 2.0) * (x[1] + 2.0);
    };
    auto r = minimize(f, {0.0, 0.0}, {Transform::Identity, Transform::Identity});
    CHECK(r.converged);
    CHECK(r.x[0] == Approx(3.0).margin(1e-6));
    CHECK(r.x[1] == Approx(-2.0).margin(1e-6));
    CHECK(r.fval == Approx(0.0).margin(1e-10));
    CHECK(r.grad_norm < 1e-5);
}

TEST_CASE("rosenbrock valley converges with a monotone trace", "[optimize]") {
    auto f = [](const std::vector<double>& x) {
        double a = 1.0 - x[0];
        double b = x[1] - x[0] * x[0];
        return a * a + 100.0 * b * b;
    };
    auto r = minimize(f, {-1.2, 1.0}, {Transform::Identity, Transform::Identity});
    CHECK(r.x[0] == Approx(1.0).margin(2e-4));
    CHECK(r.x[1] == Approx(1.0).margin(4e-4));
    REQUIRE(!r.trace.empty());
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] <= r.trace[i - 1] + 1e-12);
}

TEST_CASE("box transforms keep iterates feasible", "[optimize]") {
    // minimum of (log t)^2 over t > 0 sits at t = 1
    auto f = [](const std::vector<double>& x) {
        REQUIRE(x[0] > 0.0);
        double l = std::log(x[0]);
        return l * l;
    };
    auto r = minimize(f, {7.0}, {Transform::Log});
    CHECK(r.converged);
    CHECK(r.x[0] == Approx(1.0).margin(1e-5));

    auto g = [](const std::vector<double>& x) {
        REQUIRE(x[0] > 0.0);
        REQUIRE(x[0] < 1.0);
        return (x[0] - 0.25) * (x[0] - 0.25);
    };
    auto s = minimize(g, {0.9}, {Transform::Logit});
    CHECK(s.x[0] == Approx(0.25).margin(1e-5));
}

TEST_CASE("objective exceptions act as a soft barrier", "[optimize]") {
    auto f = [](const std::vector<double>& x) {
        if (x[0] < 0.0) throw std::invalid_argument("outside the domain");
        return (x[0] - 1.0) * (x[0] - 1.0);
    };
    auto r = minimize(f, {3.0}, {Transform::Identity});
    CHECK(r.x[0] == Approx(1.0).margin(1e-5));
}

TEST_CASE("multistart keeps the lowest objective", "[optimize]") {
    // tilted double well: local minimum near +1, global near -1
    auto f = [](const std::vector<double>& x) {
        double w = x[0] * x[0] - 1.0;
        return w * w + 0.1 * x[0];
    };
    auto left = minimize(f, {-2.0}, {Transform::Identity});
    auto right = minimize(f, {2.0}, {Transform::Identity});
    auto both = minimize_multistart(f, {{2.0}, {-2.0}}, {Transform::Identity});
    CHECK(both.fval <= std::min(left.fval, right.fval) + 1e-15);
    CHECK(both.x[0] == Approx(-1.0).margin(0.1));  // global basin
    // a start that throws everywhere is skipped, not fatal
    int calls = 0;
    auto guarded = [&](const std::vector<double>& x) -> double {
        ++calls;
        if (x[0] > 5.0) throw std::invalid_argument("out of range");
        return (x[0] - 1.0) * (x[0] - 1.0);
    };
    auto r = minimize_multistart(guarded, {{10.0}, {0.0}}, {Transform::Identity});
    CHECK(r.x[0] == Approx(1.0).margin(1e-5));
    CHECK(calls > 0);
}

TEST_CASE("minimize rejects malformed inputs", "[optimize]") {
    auto f = [](const std::vector<double>& x) { return x[0] * x[0]; };
    CHECK_THROWS_AS(minimize(f, {}, {}), std::invalid_argument);
    CHECK_THROWS_AS(minimize(f, {1.0}, {Transform::Identity, Transform::Log}),
                    std::invalid_argument);
    auto bad = [](const std::vector<double>&) -> double {
        throw std::runtime_error("never finite");
    };
    CHECK_THROWS_AS(minimize(bad, {1.0}, {Transform::Identity}), std::invalid_argument);
    CHECK_THROWS_AS(minimize_multistart(bad, {{1.0}, {2.0}}, {Transform::Identity}),
                    std::invalid_argument);
}
