#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hawkes/kernels.hpp"
#include "hawkes/linalg.hpp"
#include "hawkes/model.hpp"
#include "hawkes/optimize.hpp"
#include "hawkes/periodogram.hpp"
#include "hawkes/simulation.hpp"
#include "hawkes/spectral.hpp"

namespace hawkes {

// Which coordinates of a model are estimated. The kernel member doubles as
// the family tag, the source of fixed values (power-law scale a unless
// fit_powerlaw_scale), and the fallback starting point.
struct FitSpec {
    ReproductionKernel kernel;
    bool fit_powerlaw_scale = false;
};

inline std::vector<std::string> parameter_names(const FitSpec& spec) {
    std::vector<std::string> names{"eta", "mu"};
    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                names.push_back("beta");
            } else if constexpr (std::is_same_v<T, PowerLaw>) {
                names.push_back("gamma");
                if (spec.fit_powerlaw_scale) names.push_back("a");
            } else {
                names.push_back("nu");
                names.push_back("sigma");
            }
        },
        spec.kernel);
    return names;
}

inline std::size_t parameter_count(const FitSpec& spec) { return parameter_names(spec).size(); }

inline std::vector<Transform> parameter_transforms(const FitSpec& spec) {
    std::vector<Transform> t{Transform::Log, Transform::Logit};
    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                t.push_back(Transform::Log);
            } else if constexpr (std::is_same_v<T, PowerLaw>) {
                t.push_back(Transform::Log);
                if (spec.fit_powerlaw_scale) t.push_back(Transform::Log);
            } else {
                t.push_back(Transform::Identity);  // nu may be negative
                t.push_back(Transform::Log);
            }
        },
        spec.kernel);
    return t;
}

inline std::vector<double> pack_parameters(const HawkesModel& model, const FitSpec& spec) {
    require(model.kernel.index() == spec.kernel.index(),
            "pack_parameters: model kernel family differs from the fit family");
    std::vector<double> theta{constant_eta(model), model.mu};
    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                theta.push_back(k.beta);
            } else if constexpr (std::is_same_v<T, PowerLaw>) {
                theta.push_back(k.gamma);
                if (spec.fit_powerlaw_scale) theta.push_back(k.a);
            } else {
                theta.push_back(k.nu);
                theta.push_back(k.sigma);
            }
        },
        model.kernel);
    return theta;
}

inline HawkesModel unpack_parameters(const std::vector<double>& theta, const FitSpec& spec) {
    require(theta.size() == parameter_count(spec), "unpack_parameters: wrong parameter count");
    ReproductionKernel k = spec.kernel;
    if (const auto* e = std::get_if<Exponential>(&k)) {
        (void)e;
        k = Exponential{theta[2]};
    } else if (const auto* p = std::get_if<PowerLaw>(&k)) {
        k = PowerLaw{theta[2], spec.fit_powerlaw_scale ? theta[3] : p->a};
    } else {
        k = Gaussian{theta[2], theta[3]};
    }
    HawkesModel m{theta[0], theta[1], k};
    validate(m);
    return m;
}

// Discretized log-spectral likelihood. The j=0 ordinate is excluded: with
// mean removal it is identically zero and carries no information. Conjugate
// symmetry lets the sum run over the half grid with weight two.
inline double whittle_objective(const Periodogram& pgram, const HawkesModel& model, double delta,
                                const SpectralConfig& cfg = {}, TransformCache* cache = nullptr) {
    const std::size_t n = pgram.n;
    require(n >= 2, "whittle_objective: need at least 2 bins");
    FoldedDensity f(model, delta, cfg, cache);
    const std::size_t half = n / 2;
    double acc = 0.0;
    for (std::size_t j = 1; j <= half; ++j) {
        const double fd = f(two_pi * static_cast<double>(j) / static_cast<double>(n));
        if (!(fd > 0.0) || !std::isfinite(fd))
            throw NumericalError("whittle_objective: model density not positive at a Fourier frequency");
        const double weight = (2 * j == n) ? 1.0 : 2.0;
        acc += weight * (std::log(fd) + pgram.ordinates[j] / fd);
    }
    return acc / (2.0 * static_cast<double>(n));
}

inline double whittle_objective(const std::vector<double>& theta, const FitSpec& spec,
                                const Periodogram& pgram, double delta,
                                const SpectralConfig& cfg = {}, TransformCache* cache = nullptr) {
    return whittle_objective(pgram, unpack_parameters(theta, spec), delta, cfg, cache);
}

// Asymptotic information matrix: (1/4pi) Int_{-pi}^{pi} of the outer product
// of log-density gradients, halved to [0, pi] by evenness. Gradients are
// central differences in the constrained coordinates; panels refine toward 0
// where the density varies fastest.
inline detail::Matrix fisher_information(const HawkesModel& model, const FitSpec& spec,
                                         double delta, const SpectralConfig& cfg = {}) {
    const auto theta = pack_parameters(model, spec);
    const auto transforms = parameter_transforms(spec);
    const std::size_t p = theta.size();
    TransformCache cache;

    std::vector<double> h(p);
    for (std::size_t k = 0; k < p; ++k) {
        double step = 1e-5 * std::max(std::fabs(theta[k]), 1e-3);
        if (transforms[k] == Transform::Log) step = std::min(step, theta[k] / 2.0);
        if (transforms[k] == Transform::Logit)
            step = std::min({step, theta[k] / 2.0, (1.0 - theta[k]) / 2.0});
        require(step > 0.0, "fisher_information: parameter too close to its boundary");
        h[k] = step;
    }

    std::vector<FoldedDensity> plus;
    std::vector<FoldedDensity> minus;
    plus.reserve(p);
    minus.reserve(p);
    for (std::size_t k = 0; k < p; ++k) {
        auto tp = theta;
        tp[k] += h[k];
        plus.emplace_back(unpack_parameters(tp, spec), delta, cfg, &cache);
        auto tm = theta;
        tm[k] -= h[k];
        minus.emplace_back(unpack_parameters(tm, spec), delta, cfg, &cache);
    }
    auto dlog = [&](std::size_t k, double w) {
        return (std::log(plus[k](w)) - std::log(minus[k](w))) / (2.0 * h[k]);
    };

    std::vector<double> edges{0.0};
    for (int e = 10; e >= 1; --e) edges.push_back(pi / std::pow(2.0, e));
    edges.push_back(pi);

    detail::Matrix gamma(p, std::vector<double>(p, 0.0));
    for (std::size_t k = 0; k < p; ++k) {
        for (std::size_t l = k; l < p; ++l) {
            const double val = integrate_gauss_panels(
                [&](double w) { return dlog(k, w) * dlog(l, w); }, edges, 32);
            gamma[k][l] = gamma[l][k] = val / two_pi;
        }
    }
    return gamma;
}

struct WhittleOptions {
    // The fold cap turns optimizer probes of kernels far wider than the bin
    // (where binned data stop identifying the bandwidth and the aliasing fold
    // grows without bound) into cheap penalty throws instead of multi-second
    // summations. Sane fits need well under a hundred terms.
    SpectralConfig spectral{.max_aliasing_terms = 600};
    MinimizeOptions optimize{};
    std::vector<double> init;  // constrained coordinates; empty = data-driven default
    bool multistart = true;    // deterministic restart grid when the first start fails
    bool compute_uncertainty = true;
    double fisher_condition_limit = 1e10;
};

// Point estimate plus uncertainty report, shared by the spectral and the
// likelihood fitters.
struct FitReport {
    std::string method;
    HawkesModel model{1.0, 0.0, Exponential{1.0}};
    std::vector<std::string> parameter_names;
    std::vector<double> estimate;
    std::vector<double> standard_errors;   // empty when covariance is unavailable
    detail::Matrix fisher;                 // whittle: spectral information; mle: observed information
    detail::Matrix covariance;
    double fisher_condition = std::numeric_limits<double>::quiet_NaN();
    bool c4_omitted = false;  // whittle covariance drops the fourth-cumulant term
    double objective = std::numeric_limits<double>::infinity();
    bool converged = false;
    int iterations = 0;
    double grad_norm = std::numeric_limits<double>::quiet_NaN();
    std::size_t n = 0;      // bins (whittle) or events (mle)
    double delta = 0.0;     // 0 marks a continuous-time fit
    std::vector<double> trace;
    std::string message;
};

namespace detail {

inline double series_mean(const BinCountSeries& series) {
    return static_cast<double>(series.total()) / static_cast<double>(series.size());
}

inline double lag1_autocorrelation(const BinCountSeries& series) {
    const std::size_t n = series.size();
    const double mean = series_mean(series);
    double c0 = 0.0;
    double c1 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double d = static_cast<double>(series.counts[k]) - mean;
        c0 += d * d;
        if (k + 1 < n) c1 += d * (static_cast<double>(series.counts[k + 1]) - mean);
    }
    if (!(c0 > 0.0)) return 0.0;
    return c1 / c0;
}

// eta and mu start at moment-matched defaults; rate-like kernel scales start
// at the series' autocorrelation decay time. Shape parameters keep the
// values carried by the spec kernel.
inline std::vector<double> default_whittle_init(const BinCountSeries& series, const FitSpec& spec) {
    const double mu0 = 0.5;
    const double mean = std::max(series_mean(series), 1e-12);
    const double eta0 = mean / series.delta * (1.0 - mu0);
    const double rho = std::min(std::max(lag1_autocorrelation(series), 0.05), 0.95);
    const double decay_time = -series.delta / std::log(rho);

    std::vector<double> theta{eta0, mu0};
    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                theta.push_back(1.0 / decay_time);
            } else if constexpr (std::is_same_v<T, PowerLaw>) {
                theta.push_back(k.gamma);
                if (spec.fit_powerlaw_scale) theta.push_back(k.a);
            } else {
                theta.push_back(decay_time);
                theta.push_back(std::max(decay_time / 2.0, series.delta / 10.0));
            }
        },
        spec.kernel);
    return theta;
}

// Restart grid: sweep the branching ratio and the kernel scale around the
// first start, re-matching eta to the sample mean at each mu.
inline std::vector<std::vector<double>> whittle_start_grid(const BinCountSeries& series,
                                                           const FitSpec& spec,
                                                           const std::vector<double>& first) {
    const double mean = std::max(series_mean(series), 1e-12);
    std::vector<std::vector<double>> starts;
    for (double mu : {0.2, 0.5, 0.8}) {
        for (double scale : {0.3, 1.0, 3.0}) {
            auto theta = first;
            theta[0] = mean / series.delta * (1.0 - mu);
            theta[1] = mu;
            std::visit(
                [&](const auto& k) {
                    using T = std::decay_t<decltype(k)>;
                    if constexpr (std::is_same_v<T, Exponential>) {
                        theta[2] = first[2] * scale;
                    } else if constexpr (std::is_same_v<T, PowerLaw>) {
                        theta[2] = std::max(first[2] * std::sqrt(scale), 0.05);
                        if (spec.fit_powerlaw_scale) theta[3] = first[3] * scale;
                    } else {
                        theta[2] = first[2] * scale;
                        theta[3] = first[3] * scale;
                    }
                },
                spec.kernel);
            if (theta != first) starts.push_back(std::move(theta));
        }
    }
    return starts;
}

}  // namespace detail

// Minimize the Whittle objective over the family in spec. Needs n >= 32 bins
// (practical floor for the spectral approximation) and a non-degenerate
// series. Non-convergence is reported through the flag, not an exception.
inline FitReport whittle_fit(const BinCountSeries& series, const FitSpec& spec,
                             const WhittleOptions& opts = {}) {
    const std::size_t n = series.size();
    require(n >= 32, "whittle_fit: need at least 32 bins");
    require(series.total() > 0, "whittle_fit: series is identically zero");
    validate(spec.kernel);

    const Periodogram pgram = compute_periodogram(series, true);
    const auto transforms = parameter_transforms(spec);
    TransformCache cache;
    const ObjectiveFn objective = [&](const std::vector<double>& theta) {
        return whittle_objective(pgram, unpack_parameters(theta, spec), series.delta,
                                 opts.spectral, &cache);
    };

    std::vector<double> first =
        opts.init.empty() ? detail::default_whittle_init(series, spec) : opts.init;
    require(first.size() == transforms.size(), "whittle_fit: init has the wrong length");

    OptimizeResult best = minimize(objective, first, transforms, opts.optimize);
    if (!best.converged && opts.multistart) {
        int iterations = best.iterations;
        for (const auto& start : detail::whittle_start_grid(series, spec, first)) {
            OptimizeResult r;
            try {
                r = minimize(objective, start, transforms, opts.optimize);
            } catch (const std::exception&) {
                continue;
            }
            iterations += r.iterations;
            if (r.fval < best.fval) best = std::move(r);
        }
        best.iterations = iterations;
    }

    FitReport rep;
    rep.method = "whittle";
    rep.model = unpack_parameters(best.x, spec);
    rep.parameter_names = parameter_names(spec);
    rep.estimate = best.x;
    rep.objective = best.fval;
    rep.converged = best.converged;
    rep.iterations = best.iterations;
    rep.grad_norm = best.grad_norm;
    rep.n = n;
    rep.delta = series.delta;
    rep.trace = std::move(best.trace);
    rep.c4_omitted = true;

    if (!opts.compute_uncertainty) return rep;
    try {
        rep.fisher = fisher_information(rep.model, spec, series.delta, opts.spectral);
        rep.fisher_condition = detail::normalized_condition(rep.fisher);
        if (!(rep.fisher_condition < opts.fisher_condition_limit)) {
            rep.converged = false;
            rep.message = "information matrix ill-conditioned: a parameter is weakly identified";
        }
        rep.covariance = detail::matrix_inverse(rep.fisher);
        for (auto& row : rep.covariance)
            for (double& v : row) v /= static_cast<double>(n);
        rep.standard_errors.resize(rep.estimate.size());
        for (std::size_t k = 0; k < rep.estimate.size(); ++k)
            rep.standard_errors[k] = std::sqrt(std::max(rep.covariance[k][k], 0.0));
    } catch (const std::exception& e) {
        rep.converged = false;
        if (rep.message.empty()) rep.message = std::string("uncertainty unavailable: ") + e.what();
    }
    return rep;
}

}  // namespace hawkes
