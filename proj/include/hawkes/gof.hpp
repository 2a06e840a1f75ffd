#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "hawkes/common.hpp"
#include "hawkes/periodogram.hpp"
#include "hawkes/rng.hpp"
#include "hawkes/simulation.hpp"
#include "hawkes/spectral.hpp"
#include "hawkes/whittle.hpp"

namespace hawkes {

inline double epanechnikov(double x) {
    if (std::fabs(x) > pi) return 0.0;
    const double r = x / pi;
    return 1.5 * (1.0 - r * r);
}

// Closed forms for the Epanechnikov kernel above:
//   mu_h = h^{-1/2} Int K^2 = (12 pi / 5) h^{-1/2}
//   tau^2 = (1/pi) Int (K*K)^2 = 2672 pi^2 / 385
struct GofConstants {
    double mu_h;
    double tau;
};

inline GofConstants gof_constants(double h) {
    require(h > 0.0 && h <= 1.0, "gof: bandwidth must lie in (0, 1]");
    return {(12.0 * pi / 5.0) / std::sqrt(h), pi * std::sqrt(2672.0 / 385.0)};
}

namespace detail {

// Kernel smoother over the symmetric Fourier grid j = -m..m, m = (n-1)/2,
// with I(w_{-j}) = I(w_j). The j = 0 term is omitted from both the weighted
// and the unweighted sum: the raw dc ordinate concentrates n*mean^2/(2 pi)
// and would swamp the statistic, and the symmetric omission keeps
// q == s exactly whenever the ratios are identically one.
class RatioSmoother {
  public:
    RatioSmoother(const Periodogram& pgram, const std::function<double(double)>& fitted, double h)
        : n_(static_cast<double>(pgram.n)),
          h_(h),
          m_(static_cast<long>((pgram.n - 1) / 2)),
          ratio_(static_cast<std::size_t>(m_) + 1, 1.0) {
        require(h > 0.0 && h <= 1.0, "gof: bandwidth must lie in (0, 1]");
        require(n_ * h >= 5.0, "gof: fewer than 5 Fourier frequencies per bandwidth");
        for (long j = 1; j <= m_; ++j) {
            const double fj = fitted(two_pi * static_cast<double>(j) / n_);
            if (!(fj > 0.0) || !std::isfinite(fj))
                throw NumericalError("gof: fitted density not positive at a Fourier frequency");
            ratio_[static_cast<std::size_t>(j)] =
                pgram.ordinates[static_cast<std::size_t>(j)] / fj;
        }
    }

    double q(double w) const { return sum(w, Mode::weighted); }
    double s(double w) const { return sum(w, Mode::plain); }
    // one-pass (q - s): exact zero when every ratio equals one
    double centered(double w) const { return sum(w, Mode::centered); }
    long m() const { return m_; }

  private:
    enum class Mode { plain, weighted, centered };

    double sum(double w, Mode mode) const {
        const double step = two_pi / n_;
        long jlo = static_cast<long>(std::ceil((w - pi * h_) / step));
        long jhi = static_cast<long>(std::floor((w + pi * h_) / step));
        jlo = std::max(jlo, -m_);
        jhi = std::min(jhi, m_);
        double acc = 0.0;
        for (long j = jlo; j <= jhi; ++j) {
            if (j == 0) continue;
            const double k = epanechnikov((w - static_cast<double>(j) * step) / h_);
            const double r = ratio_[static_cast<std::size_t>(std::labs(j))];
            switch (mode) {
                case Mode::plain: acc += k; break;
                case Mode::weighted: acc += k * r; break;
                case Mode::centered: acc += k * (r - 1.0); break;
            }
        }
        return acc / (n_ * h_);
    }

    double n_;
    double h_;
    long m_;
    std::vector<double> ratio_;
};

// Trapezoid nodes on [0, pi]: the Fourier grid plus endpoints, gaps
// subdivided so the spacing never exceeds h/20.
inline std::vector<double> gof_quadrature_nodes(std::size_t n, double h) {
    std::vector<double> base{0.0};
    const double step = two_pi / static_cast<double>(n);
    const long m = static_cast<long>((n - 1) / 2);
    for (long j = 1; j <= m; ++j) base.push_back(step * static_cast<double>(j));
    if (base.back() < pi) base.push_back(pi);
    const double target = h / 20.0;
    std::vector<double> nodes;
    nodes.reserve(base.size() * 2);
    for (std::size_t i = 0; i + 1 < base.size(); ++i) {
        nodes.push_back(base[i]);
        const double gap = base[i + 1] - base[i];
        const int pieces = static_cast<int>(std::ceil(gap / target));
        for (int k = 1; k < pieces; ++k)
            nodes.push_back(base[i] + gap * static_cast<double>(k) / static_cast<double>(pieces));
    }
    nodes.push_back(base.back());
    return nodes;
}

}  // namespace detail

// q(w): kernel-weighted average of periodogram/model ratios.
inline double smoothed_ratio(const Periodogram& pgram, const std::function<double(double)>& fitted,
                             double h, double w) {
    return detail::RatioSmoother(pgram, fitted, h).q(w);
}

// S = n h^{1/2} Int_{-pi}^{pi} (q - s)^2 dw, halved to [0, pi] by evenness.
inline double gof_statistic_value(const Periodogram& pgram,
                                  const std::function<double(double)>& fitted, double h) {
    detail::RatioSmoother sm(pgram, fitted, h);
    const auto nodes = detail::gof_quadrature_nodes(pgram.n, h);
    double integral = 0.0;
    double prev_w = nodes.front();
    double c = sm.centered(prev_w);
    double prev_g = c * c;
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        c = sm.centered(nodes[i]);
        const double g = c * c;
        integral += 0.5 * (g + prev_g) * (nodes[i] - prev_w);
        prev_w = nodes[i];
        prev_g = g;
    }
    return static_cast<double>(pgram.n) * std::sqrt(h) * 2.0 * integral;
}

// Q^2 over the Fourier frequencies in [0, pi]; pointwise chi^2_1 reference.
inline std::vector<std::pair<double, double>> q2_diagnostic(
    const Periodogram& pgram, const std::function<double(double)>& fitted, double h) {
    detail::RatioSmoother sm(pgram, fitted, h);
    const double norm = 6.0 / 5.0;  // (1/2pi) Int K^2
    std::vector<std::pair<double, double>> curve;
    curve.reserve(static_cast<std::size_t>(sm.m()) + 1);
    for (long j = 0; j <= sm.m(); ++j) {
        const double w = two_pi * static_cast<double>(j) / static_cast<double>(pgram.n);
        const double c = sm.centered(w);
        curve.emplace_back(w, static_cast<double>(pgram.n) * h * c * c / norm);
    }
    return curve;
}

struct GofReport {
    double statistic = 0.0;  // S_{n,h}
    double mu_h = 0.0;
    double tau = 0.0;
    double asymptotic_pvalue = 1.0;
    double bandwidth = 0.0;
    std::size_t n = 0;
    std::vector<std::pair<double, double>> q2_curve;
    double chi2_95 = 3.841458820694124;
    int bootstrap_replicates = 0;
    double bootstrap_pvalue = std::numeric_limits<double>::quiet_NaN();
    int bootstrap_failures = 0;
    bool bootstrap_valid = false;
};

inline GofReport gof_statistic(const Periodogram& pgram,
                               const std::function<double(double)>& fitted, double h) {
    GofReport rep;
    rep.bandwidth = h;
    rep.n = pgram.n;
    const auto c = gof_constants(h);
    rep.mu_h = c.mu_h;
    rep.tau = c.tau;
    rep.statistic = gof_statistic_value(pgram, fitted, h);
    const double z = (rep.statistic - rep.mu_h) / rep.tau;
    rep.asymptotic_pvalue = 0.5 * std::erfc(z / std::sqrt(2.0));  // upper tail
    rep.q2_curve = q2_diagnostic(pgram, fitted, h);
    return rep;
}

struct GofBootstrapOptions {
    int replicates = 1000;
    std::uint64_t seed = 0;
    double max_failure_fraction = 0.2;
    WhittleOptions fit{};
    // Replicate refits warm-start at the observed estimate, so they run at looser
    // tolerances than the headline fit.  The coarser tail bound also caps the cost
    // of the aliasing fold when a replicate drifts toward a wide-kernel plateau,
    // where the fold length grows with the kernel bandwidth.
    MinimizeOptions refit{.max_iterations = 150,
                          .simplex_max_iterations = 400,
                          .gradient_tolerance = 3e-6,
                          .simplex_tolerance = 1e-7};
    SpectralConfig refit_spectral{.tail_tolerance = 1e-6, .max_aliasing_terms = 600};
    int threads = 0;
};

// Frequency-domain bootstrap under the fitted null: replicate ordinates are
// f(w_j) times i.i.d. standard exponentials, mirrored across conjugate pairs;
// each replicate is refitted from the observed estimate before recomputing S.
inline void gof_bootstrap(GofReport& rep, const Periodogram& pgram, const FitReport& fitted,
                          const FitSpec& spec, const GofBootstrapOptions& opts = {}) {
    require(opts.replicates >= 100, "gof_bootstrap: needs at least 100 replicates");
    require(fitted.delta > 0.0, "gof_bootstrap: fit must come from a binned series");
    const std::size_t n = pgram.n;
    const double delta = fitted.delta;
    const double h = rep.bandwidth;

    std::vector<double> f_null(n, 0.0);
    {
        TransformCache cache;
        FoldedDensity f0(fitted.model, delta, opts.fit.spectral, &cache);
        for (std::size_t j = 1; j <= n / 2; ++j) {
            f_null[j] = f0(two_pi * static_cast<double>(j) / static_cast<double>(n));
            f_null[n - j] = f_null[j];
        }
    }

    const auto transforms = parameter_transforms(spec);
    const int B = opts.replicates;
    std::vector<double> stats(static_cast<std::size_t>(B),
                              std::numeric_limits<double>::quiet_NaN());
    std::vector<unsigned char> failed(static_cast<std::size_t>(B), 0);

    parallel_for(
        static_cast<std::size_t>(B),
        [&](std::size_t b) {
            auto rng = make_engine(derive_seed(opts.seed, b));
            Periodogram star{n, std::vector<double>(n, 0.0), true};
            for (std::size_t j = 1; j <= n / 2; ++j) {
                star.ordinates[j] = f_null[j] * exponential(rng, 1.0);
                star.ordinates[n - j] = star.ordinates[j];
            }
            try {
                TransformCache cache;
                const ObjectiveFn obj = [&](const std::vector<double>& theta) {
                    return whittle_objective(star, unpack_parameters(theta, spec), delta,
                                             opts.refit_spectral, &cache);
                };
                OptimizeResult r = minimize(obj, fitted.estimate, transforms, opts.refit);
                if (!r.converged) {
                    failed[b] = 1;
                    return;
                }
                FoldedDensity fb(unpack_parameters(r.x, spec), delta, opts.refit_spectral, &cache);
                stats[b] = gof_statistic_value(star, [&](double w) { return fb(w); }, h);
            } catch (const std::exception&) {
                failed[b] = 1;
            }
        },
        opts.threads);

    int failures = 0;
    int exceed = 0;
    int ok = 0;
    for (int b = 0; b < B; ++b) {
        if (failed[static_cast<std::size_t>(b)]) {
            ++failures;
            continue;
        }
        ++ok;
        if (stats[static_cast<std::size_t>(b)] >= rep.statistic) ++exceed;
    }
    rep.bootstrap_replicates = B;
    rep.bootstrap_failures = failures;
    rep.bootstrap_valid =
        static_cast<double>(failures) <= opts.max_failure_fraction * static_cast<double>(B);
    rep.bootstrap_pvalue = rep.bootstrap_valid
                               ? static_cast<double>(1 + exceed) / static_cast<double>(ok + 1)
                               : std::numeric_limits<double>::quiet_NaN();
}

struct GofOptions {
    double bandwidth = 0.10;
    int bootstrap_replicates = 0;  // 0 = asymptotic only
    std::uint64_t seed = 0;
    double max_failure_fraction = 0.2;
    WhittleOptions fit{};
    int threads = 0;
};

// Test the fitted model against the observed series at one bandwidth.
inline GofReport gof_test(const BinCountSeries& series, const FitReport& fitted,
                          const FitSpec& spec, const GofOptions& opts = {}) {
    const Periodogram pgram = compute_periodogram(series, true);
    TransformCache cache;
    FoldedDensity f(fitted.model, series.delta, opts.fit.spectral, &cache);
    GofReport rep = gof_statistic(pgram, [&](double w) { return f(w); }, opts.bandwidth);
    if (opts.bootstrap_replicates > 0) {
        GofBootstrapOptions bo;
        bo.replicates = opts.bootstrap_replicates;
        bo.seed = opts.seed;
        bo.max_failure_fraction = opts.max_failure_fraction;
        bo.fit = opts.fit;
        bo.threads = opts.threads;
        gof_bootstrap(rep, pgram, fitted, spec, bo);
    }
    return rep;
}

}  // namespace hawkes
