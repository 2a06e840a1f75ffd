#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "hawkes/model.hpp"
#include "hawkes/rng.hpp"

namespace hawkes {

struct PointRealization {
    std::vector<double> times;  // strictly increasing, all within [0, window_end]
    double window_end;
    std::uint64_t seed;
};

struct BinCountSeries {
    std::vector<std::int64_t> counts;  // counts[k] = #{t in (origin + k*delta, origin + (k+1)*delta]}
    double delta;
    double origin;
    std::int64_t discarded;  // events outside (origin, origin + n*delta]

    std::size_t size() const { return counts.size(); }
    std::int64_t total() const {
        std::int64_t s = 0;
        for (auto c : counts) s += c;
        return s;
    }
};

namespace detail {

inline double immigration_rate_bound(const HawkesModel& model) {
    if (const double* c = std::get_if<double>(&model.eta)) return *c;
    return std::get<PiecewiseConstantIntensity>(model.eta).bound();
}

// Poisson immigrants on [lo, hi]; time-varying rates by thinning against the
// declared bound.
inline std::vector<double> draw_immigrants(const HawkesModel& model, double lo, double hi,
                                           RandomEngine& rng) {
    double bound = immigration_rate_bound(model);
    std::vector<double> times;
    std::int64_t n = poisson(rng, bound * (hi - lo));
    times.reserve(static_cast<std::size_t>(n));
    const auto* pw = std::get_if<PiecewiseConstantIntensity>(&model.eta);
    for (std::int64_t i = 0; i < n; ++i) {
        double t = uniform(rng, lo, hi);
        if (pw && uniform01(rng) * bound > (*pw)(t)) continue;
        times.push_back(t);
    }
    return times;
}

// Restores strict increase after sorting; exact duplicates (probability zero,
// but representable in floating point) are nudged by one ulp.
inline void enforce_simple(std::vector<double>& times, double window_end) {
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (times[i] <= times[i - 1]) {
            double up = std::nextafter(times[i - 1], std::numeric_limits<double>::infinity());
            if (up <= window_end) {
                times[i] = up;
            } else {
                times[i] = times[i - 1];
                times[i - 1] = std::nextafter(times[i - 1], -std::numeric_limits<double>::infinity());
            }
        }
    }
}

}  // namespace detail

// Exact cluster-representation sampler. Immigrants arrive as a Poisson
// process on [-burnin, T] ([-burnin, T + burnin] for non-causal kernels, whose
// descendants can precede their ancestors); every point spawns Poisson(mu)
// children at kernel-distributed offsets, breadth-first until extinction.
// Causal kernels allow pruning any point past T: its subtree cannot re-enter
// the window. Returned points are those in [0, T], sorted.
inline PointRealization simulate(const HawkesModel& model, double T, double burnin,
                                 std::uint64_t seed) {
    validate(model);
    require(T > 0.0, "simulate: T must be > 0");
    require(burnin >= 0.0, "simulate: burnin must be >= 0");

    RandomEngine rng = make_engine(seed);
    bool causal = is_causal(model.kernel);
    double hi = causal ? T : T + burnin;
    std::vector<double> frontier = detail::draw_immigrants(model, -burnin, hi, rng);

    std::vector<double> retained;
    std::vector<double> next;
    while (!frontier.empty()) {
        for (double t : frontier)
            if (t >= 0.0 && t <= T) retained.push_back(t);
        next.clear();
        for (double t : frontier) {
            std::int64_t children = poisson(rng, model.mu);
            for (std::int64_t c = 0; c < children; ++c) {
                double child = t + sample_offset(model.kernel, rng);
                if (causal && child > T) continue;
                next.push_back(child);
            }
        }
        frontier.swap(next);
    }

    std::sort(retained.begin(), retained.end());
    detail::enforce_simple(retained, T);
    return {std::move(retained), T, seed};
}

// One immigrant's offspring tree, for generation-size statistics. offsets are
// relative to the immigrant (generation 0, offset 0, not included);
// generation_sizes[g] = #points in generation g, starting at 1.
struct Cluster {
    std::vector<double> offsets;
    std::vector<std::int64_t> generation_sizes;
};

inline Cluster simulate_cluster(const ReproductionKernel& kernel, double mu, RandomEngine& rng,
                                std::size_t max_generations = 100000) {
    validate(kernel);
    require(mu >= 0.0 && mu < 1.0, "simulate_cluster: mu must lie in [0, 1)");
    Cluster cluster;
    cluster.generation_sizes.push_back(1);
    std::vector<double> frontier{0.0};
    std::vector<double> next;
    while (!frontier.empty()) {
        if (cluster.generation_sizes.size() > max_generations)
            throw NumericalError("simulate_cluster: generation cap exceeded");
        next.clear();
        for (double t : frontier) {
            std::int64_t children = poisson(rng, mu);
            for (std::int64_t c = 0; c < children; ++c)
                next.push_back(t + sample_offset(kernel, rng));
        }
        if (next.empty()) break;
        cluster.generation_sizes.push_back(static_cast<std::int64_t>(next.size()));
        cluster.offsets.insert(cluster.offsets.end(), next.begin(), next.end());
        frontier.swap(next);
    }
    return cluster;
}

// Counts over the half-open bins (origin + k*delta, origin + (k+1)*delta],
// k = 0..n-1 with n = floor((window_end - origin)/delta); events outside are
// tallied as discarded.
inline BinCountSeries bin_counts(const PointRealization& realization, double delta,
                                 double origin = 0.0) {
    require(delta > 0.0, "bin_counts: delta must be > 0");
    auto n = static_cast<std::int64_t>(std::floor((realization.window_end - origin) / delta));
    require(n >= 1, "bin_counts: window shorter than one bin");
    BinCountSeries series{std::vector<std::int64_t>(static_cast<std::size_t>(n), 0), delta, origin, 0};
    for (double t : realization.times) {
        auto k = static_cast<std::int64_t>(std::ceil((t - origin) / delta)) - 1;
        if (k < 0 || k >= n) {
            ++series.discarded;
        } else {
            ++series.counts[static_cast<std::size_t>(k)];
        }
    }
    return series;
}

// P(an offspring falls in its exponential(beta) parent's bin of width delta):
// 1 - (1 - e^{-beta*delta})/(beta*delta).
inline double same_bin_probability(double beta, double delta) {
    require(beta > 0.0 && delta > 0.0, "same_bin_probability: beta and delta must be > 0");
    double x = beta * delta;
    if (x < 1e-8) return 0.5 * x;
    return 1.0 - (-std::expm1(-x)) / x;
}

// Closed-form moments of the embedded Galton-Watson generation sizes Z_k with
// Poisson(mu) offspring: E[Z_k] = mu^k, Var(Z_k) = mu^k (1 - mu^k)/(1 - mu),
// Cov(Z_k, Z_l) = mu^l (1 - mu^k)/(1 - mu) for k <= l.
struct GwMoments {
    double mean;        // E[Z_k]
    double variance;    // Var(Z_k)
    double covariance;  // Cov(Z_k, Z_l)
};

inline GwMoments gw_moments(double mu, std::int64_t k, std::int64_t l) {
    require(mu > 0.0 && mu < 1.0, "gw_moments: mu must lie in (0, 1)");
    require(0 <= k && k <= l, "gw_moments: need 0 <= k <= l");
    double mk = std::pow(mu, static_cast<double>(k));
    double ml = std::pow(mu, static_cast<double>(l));
    double mean = mk;
    double variance = k == 0 ? 0.0 : mk * (1.0 - mk) / (1.0 - mu);
    double covariance = k == 0 ? 0.0 : ml * (1.0 - mk) / (1.0 - mu);
    return {mean, variance, covariance};
}

}  // namespace hawkes
