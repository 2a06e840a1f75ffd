#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "hawkes/simulation.hpp"
#include "test_support.hpp"

using namespace hawkes;
using Catch::Approx;

TEST_CASE("model validation", "[simulation]") {
    CHECK_NOTHROW(validate(HawkesModel{1.0, 0.5, Exponential{1.0}}));
    CHECK_THROWS_AS(validate(HawkesModel{1.0, 1.0, Exponential{1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(validate(HawkesModel{1.0, -0.1, Exponential{1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(validate(HawkesModel{0.0, 0.5, Exponential{1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(validate(HawkesModel{1.0, 0.5, Exponential{-1.0}}), std::invalid_argument);
    PiecewiseConstantIntensity pw{{1.0, 2.0}, {0.5, 2.0, 0.0}};
    CHECK_NOTHROW(validate(HawkesModel{pw, 0.5, Exponential{1.0}}));
    PiecewiseConstantIntensity bad{{1.0}, {0.5}};
    CHECK_THROWS_AS(validate(HawkesModel{bad, 0.5, Exponential{1.0}}), std::invalid_argument);
}

TEST_CASE("mean intensity", "[simulation]") {
    CHECK(mean_intensity(HawkesModel{1.0, 0.5, Exponential{1.0}}) == 2.0);
    CHECK(mean_intensity(HawkesModel{0.040, 0.72, Gaussian{9.8, 5.9}}) ==
          Approx(0.1428571428571).epsilon(1e-10));
    CHECK(mean_intensity(HawkesModel{1.0, 0.0, Exponential{1.0}}) == 1.0);
    PiecewiseConstantIntensity pw{{1.0}, {0.5, 2.0}};
    CHECK_THROWS_AS(mean_intensity(HawkesModel{pw, 0.5, Exponential{1.0}}), std::invalid_argument);
}

TEST_CASE("piecewise intensity lookup", "[simulation]") {
    PiecewiseConstantIntensity pw{{0.0, 10.0}, {0.3, 1.5, 0.2}};
    CHECK(pw(-5.0) == 0.3);
    CHECK(pw(0.0) == 1.5);  // value applies on [knot, next)
    CHECK(pw(9.99) == 1.5);
    CHECK(pw(10.0) == 0.2);
    CHECK(pw.bound() == 1.5);
}

TEST_CASE("simulate is reproducible and respects the window", "[simulation]") {
    HawkesModel model{1.0, 0.5, Exponential{1.0}};
    auto a = simulate(model, 200.0, 100.0, 42);
    auto b = simulate(model, 200.0, 100.0, 42);
    auto c = simulate(model, 200.0, 100.0, 43);
    CHECK(a.times == b.times);
    CHECK(a.times != c.times);
    CHECK(a.seed == 42);
    CHECK(a.window_end == 200.0);
    REQUIRE(!a.times.empty());
    CHECK(std::is_sorted(a.times.begin(), a.times.end()));
    CHECK(a.times.front() >= 0.0);
    CHECK(a.times.back() <= 200.0);
    for (std::size_t i = 1; i < a.times.size(); ++i) CHECK(a.times[i] > a.times[i - 1]);
}

TEST_CASE("near-zero branching reduces to a Poisson process", "[simulation]") {
    HawkesModel model{1.0, 1e-12, Exponential{1.0}};
    std::vector<double> counts;
    for (std::uint64_t s = 0; s < 60; ++s)
        counts.push_back(static_cast<double>(simulate(model, 500.0, 0.0, 1000 + s).times.size()));
    auto mv = testsupport::mean_var(counts);
    CHECK(std::abs(mv.mean - 500.0) < 3.0 * mv.se);
    // Poisson: variance should be close to the mean
    CHECK(mv.variance > 250.0);
    CHECK(mv.variance < 1000.0);
}

TEST_CASE("mean event count matches m*T", "[simulation]") {
    HawkesModel model{1.0, 0.5, Exponential{1.0}};
    std::vector<double> counts;
    for (std::uint64_t s = 0; s < 100; ++s)
        counts.push_back(static_cast<double>(simulate(model, 1000.0, 100.0, 7000 + s).times.size()));
    auto mv = testsupport::mean_var(counts);
    CHECK(std::abs(mv.mean - 2000.0) < 3.0 * mv.se);
}

TEST_CASE("non-causal kernels receive symmetric burn-in", "[simulation]") {
    HawkesModel model{0.5, 0.6, Gaussian{-3.0, 4.0}};  // offspring often precede parents
    std::vector<double> counts;
    for (std::uint64_t s = 0; s < 80; ++s)
        counts.push_back(static_cast<double>(simulate(model, 400.0, 100.0, 300 + s).times.size()));
    auto mv = testsupport::mean_var(counts);
    // stationary rate m = 0.5/0.4 = 1.25
    CHECK(std::abs(mv.mean - 500.0) < 3.0 * mv.se);
}

TEST_CASE("time-varying immigration thinning", "[simulation]") {
    // eta(t) = 2 on [0, 250), 0.5 on [250, 500); no offspring to isolate thinning
    PiecewiseConstantIntensity pw{{0.0, 250.0}, {2.0, 2.0, 0.5}};
    HawkesModel model{pw, 1e-15, Exponential{1.0}};
    double first = 0.0, second = 0.0;
    const int reps = 60;
    for (std::uint64_t s = 0; s < reps; ++s) {
        auto r = simulate(model, 500.0, 0.0, 900 + s);
        for (double t : r.times) (t < 250.0 ? first : second) += 1.0;
    }
    CHECK(std::abs(first / reps - 500.0) < 3.0 * std::sqrt(500.0 / reps));
    CHECK(std::abs(second / reps - 125.0) < 3.0 * std::sqrt(125.0 / reps));
}

TEST_CASE("bin count conventions", "[simulation]") {
    PointRealization r{{0.5, 1.5, 1.6}, 2.0, 0};
    auto s = bin_counts(r, 1.0);
    REQUIRE(s.counts == std::vector<std::int64_t>{1, 2});
    CHECK(s.discarded == 0);

    PointRealization boundary{{1.0}, 2.0, 0};
    auto sb = bin_counts(boundary, 1.0);
    CHECK(sb.counts == std::vector<std::int64_t>{1, 0});  // (0,1] owns its right edge

    PointRealization all{{0.2, 0.9, 1.7}, 2.0, 0};
    auto one = bin_counts(all, 2.0);
    CHECK(one.counts == std::vector<std::int64_t>{3});

    // events after the last full bin are discarded and counted
    PointRealization tail{{0.5, 2.4}, 2.5, 0};
    auto st = bin_counts(tail, 1.0);
    CHECK(st.counts == std::vector<std::int64_t>{1, 0});
    CHECK(st.discarded == 1);

    CHECK_THROWS_AS(bin_counts(r, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(bin_counts(r, 5.0), std::invalid_argument);
}

TEST_CASE("binning is translation consistent", "[simulation]") {
    HawkesModel model{1.0, 0.5, Exponential{1.0}};
    auto r = simulate(model, 100.0, 50.0, 77);
    auto base = bin_counts(r, 1.0);
    PointRealization shifted = r;
    const double c = 13.25;
    for (double& t : shifted.times) t += c;
    shifted.window_end += c;
    auto moved = bin_counts(shifted, 1.0, c);
    CHECK(base.counts == moved.counts);
    CHECK(base.discarded == moved.discarded);
}

TEST_CASE("thinning a realization scales bin means by p", "[simulation]") {
    HawkesModel model{2.0, 0.3, Exponential{1.0}};
    const double p = 0.4;
    double kept_total = 0.0, full_total = 0.0;
    for (std::uint64_t s = 0; s < 40; ++s) {
        auto r = simulate(model, 500.0, 100.0, 4000 + s);
        auto rng = make_engine(derive_seed(999, s));
        PointRealization thinned{{}, r.window_end, r.seed};
        for (double t : r.times)
            if (uniform01(rng) < p) thinned.times.push_back(t);
        full_total += static_cast<double>(bin_counts(r, 1.0).total());
        kept_total += static_cast<double>(bin_counts(thinned, 1.0).total());
    }
    CHECK(kept_total / full_total == Approx(p).margin(0.02));
}

TEST_CASE("same-bin probability", "[simulation]") {
    double p = same_bin_probability(1.0, 2.0);
    CHECK(std::round(p * 100.0) / 100.0 == 0.57);
    CHECK(same_bin_probability(1.0, 1e-9) == Approx(0.0).margin(1e-8));
    CHECK(same_bin_probability(1.0, 1e9) == Approx(1.0).margin(1e-8));
    CHECK(same_bin_probability(2.0, 0.5) == Approx(same_bin_probability(0.5, 2.0)).epsilon(1e-12));

    // Monte Carlo cross-check: parent uniform in a bin, offspring at exp offset
    auto rng = make_engine(5);
    const int n = 200000;
    int same = 0;
    const double beta = 1.0, delta = 2.0;
    for (int i = 0; i < n; ++i) {
        double parent = uniform(rng, 0.0, delta);
        double child = parent + sample_offset(Exponential{beta}, rng);
        same += child <= delta;
    }
    double mc = static_cast<double>(same) / n;
    CHECK(std::abs(mc - p) < 3.0 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("galton-watson closed forms", "[simulation]") {
    auto m2 = gw_moments(0.5, 2, 2);
    CHECK(m2.mean == Approx(0.25).epsilon(1e-14));
    auto c12 = gw_moments(0.5, 1, 2);
    CHECK(c12.covariance == Approx(0.25).epsilon(1e-14));
    auto m0 = gw_moments(0.5, 0, 0);
    CHECK(m0.mean == 1.0);
    CHECK(m0.variance == 0.0);
    CHECK(gw_moments(0.3, 1, 1).variance == Approx(0.3 * 0.7 / 0.7).epsilon(1e-14));
    CHECK_THROWS_AS(gw_moments(0.5, 2, 1), std::invalid_argument);
    CHECK_THROWS_AS(gw_moments(1.0, 1, 1), std::invalid_argument);
}

TEST_CASE("simulated generations match galton-watson moments", "[simulation]") {
    // desk-scale version of the cluster oracle; the acceptance suite runs the
    // full 1e5-cluster sweep over mu in {0.3, 0.5, 0.8}
    const std::size_t reps = 20000;
    const double mu = 0.5;
    auto rng = make_engine(31337);
    std::vector<double> z1(reps), z2(reps), total(reps);
    for (std::size_t i = 0; i < reps; ++i) {
        auto cl = simulate_cluster(Exponential{1.0}, mu, rng);
        z1[i] = cl.generation_sizes.size() > 1 ? static_cast<double>(cl.generation_sizes[1]) : 0.0;
        z2[i] = cl.generation_sizes.size() > 2 ? static_cast<double>(cl.generation_sizes[2]) : 0.0;
        total[i] = 1.0 + static_cast<double>(cl.offsets.size());
    }
    auto mv1 = testsupport::mean_var(z1);
    auto mv2 = testsupport::mean_var(z2);
    auto mvt = testsupport::mean_var(total);
    auto g1 = gw_moments(mu, 1, 1);
    auto g2 = gw_moments(mu, 2, 2);
    CHECK(std::abs(mv1.mean - g1.mean) < 3.0 * mv1.se);
    CHECK(std::abs(mv2.mean - g2.mean) < 3.0 * mv2.se);
    CHECK(std::abs(mv1.variance - g1.variance) < 0.05 * g1.variance + 0.01);
    CHECK(std::abs(mvt.mean - 1.0 / (1.0 - mu)) < 3.0 * mvt.se);

    // empirical covariance of (Z_1, Z_2)
    double cov = 0.0;
    for (std::size_t i = 0; i < reps; ++i) cov += (z1[i] - mv1.mean) * (z2[i] - mv2.mean);
    cov /= static_cast<double>(reps - 1);
    auto g12 = gw_moments(mu, 1, 2);
    CHECK(cov == Approx(g12.covariance).margin(0.05 * g12.covariance + 0.01));
}
