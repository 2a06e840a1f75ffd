#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "hawkes/kernels.hpp"
#include "hawkes/model.hpp"
#include "hawkes/quadrature.hpp"

namespace hawkes {

struct SpectralConfig {
    int aliasing_terms = 0;        // 0 = derive from the tail bound below
    double tail_tolerance = 1e-8;  // absolute bound on the truncated aliasing mass
    int max_aliasing_terms = 2000000;
};

// Bartlett spectral density of the point process itself:
// gamma(w) = (m/2pi) |1 - mu h~(w)|^{-2}.
inline double bartlett_density(const HawkesModel& model, double w) {
    double m = mean_intensity(model);
    std::complex<double> h = model.mu * fourier_transform(model.kernel, w);
    return m / (two_pi * std::norm(1.0 - h));
}

// Spectral density of the bin-count sequence before aliasing, in the raw
// convention paired with r_d(u) = (1/2pi) int f_d e^{iwu}:
// f_c(w) = m Delta sinc^2(w/2) |1 - mu h~(w/Delta)|^{-2}.
inline double binned_spectral_continuous(const HawkesModel& model, double delta, double w) {
    require(delta > 0.0, "binned_spectral_continuous: delta must be > 0");
    double m = mean_intensity(model);
    double s = sinc(0.5 * w);
    std::complex<double> h = model.mu * fourier_transform(model.kernel, w / delta);
    return m * delta * s * s / std::norm(1.0 - h);
}

namespace detail {

// sum_{|k|>K} of sinc^2((w+2k pi)/2) * g((w+2k pi)/Delta) is bounded using
// sinc^2(x/2) <= 4/x^2 and |g(x)| <= (2 mu c2 + mu^2 c1^2)/((1-mu)^2 x^2):
// each tail term is O((2k-1)^{-4}), so the remainder past K is at most
// (m Delta/2pi) * 8 Cg Delta^2 / ((1-mu)^2 pi^4) * (2K-1)^{-3}/6.
inline int choose_aliasing_terms(const HawkesModel& model, double delta,
                                 const SpectralConfig& cfg) {
    if (cfg.aliasing_terms > 0) return cfg.aliasing_terms;
    require(cfg.tail_tolerance > 0.0, "SpectralConfig: tail_tolerance must be > 0");
    double mu = model.mu;
    if (mu == 0.0) return 1;  // fold is exact: g vanishes identically
    TailEnvelope env = tail_envelope(model.kernel);
    double cg = 2.0 * mu * env.c2 + mu * mu * env.c1 * env.c1;
    double m_delta = mean_intensity(model) * delta;
    double one_minus = (1.0 - mu) * (1.0 - mu);
    double pi4 = pi * pi * pi * pi;
    double rhs = m_delta / two_pi * 8.0 * cg * delta * delta / (one_minus * pi4 * 6.0 * cfg.tail_tolerance);
    double k = std::ceil(0.5 * (std::cbrt(std::max(rhs, 0.0)) + 1.0));
    if (k > static_cast<double>(cfg.max_aliasing_terms))
        throw std::invalid_argument(
            "SpectralConfig: tail_tolerance unreachable within max_aliasing_terms");
    return std::max(static_cast<int>(k), 1);
}

}  // namespace detail

// Aliased spectral density of the bin counts on [-pi, pi], in the estimator
// convention f = f_d/(2pi) so that E[I_n(w)] -> f(w):
//   f(w) = (m Delta/2pi) [1 + sum_{|k|<=K} sinc^2((w+2kpi)/2) g((w+2kpi)/Delta)],
//   g(x) = |1 - mu h~(x)|^{-2} - 1.
// The constant 1 absorbs the full Fejer-kernel fold sum_k sinc^2(.) = 1, so
// truncation error lives only in g's tail (choose_aliasing_terms above) and
// the mu = 0 case is exact.
class FoldedDensity {
  public:
    FoldedDensity(const HawkesModel& model, double delta, SpectralConfig cfg = {},
                  TransformCache* cache = nullptr)
        : mu_(model.mu),
          delta_(delta),
          m_delta_(mean_intensity(model) * delta),
          terms_(detail::choose_aliasing_terms(model, delta, cfg)),
          transform_(model.kernel, (2.0 * terms_ + 1.0) * pi / delta, cache) {
        require(delta > 0.0, "FoldedDensity: delta must be > 0");
    }

    // 2pi-periodic and even; w is reduced to [-pi, pi] first.
    double operator()(double w) const {
        double wr = std::remainder(w, two_pi);
        double sum = 1.0;
        if (mu_ != 0.0) {
            for (int k = -terms_; k <= terms_; ++k) {
                double x = wr + two_pi * k;
                double s = sinc(0.5 * x);
                if (s == 0.0) continue;
                std::complex<double> h = mu_ * transform_(x / delta_);
                // g = (2 Re h - |h|^2)/|1-h|^2, the cancellation-free form of
                // |1-h|^{-2} - 1.
                double g = (2.0 * h.real() - std::norm(h)) / std::norm(1.0 - h);
                sum += s * s * g;
            }
        }
        return m_delta_ / two_pi * sum;
    }

    int aliasing_terms() const { return terms_; }
    double delta() const { return delta_; }

  private:
    double mu_;
    double delta_;
    double m_delta_;
    int terms_;
    KernelTransform transform_;
};

inline double binned_spectral_density(const HawkesModel& model, double delta, double w,
                                      const SpectralConfig& cfg = {}) {
    return FoldedDensity(model, delta, cfg)(w);
}

// r(u) = int_{-pi}^{pi} f(w) cos(wu) dw (the sin part vanishes by evenness,
// so no imaginary residue arises). Composite Gauss-Legendre with dyadically
// refined panels toward w = 0, where the density peaks as mu -> 1; the rule
// is validated internally by comparing two node counts.
inline double theoretical_autocovariance(const HawkesModel& model, double delta, std::int64_t lag,
                                         const SpectralConfig& cfg = {}) {
    FoldedDensity f(model, delta, cfg);
    std::vector<double> edges{0.0};
    for (int j = 10; j >= 1; --j) edges.push_back(pi / std::ldexp(1.0, j));
    edges.push_back(pi);
    auto integrand = [&](double w) { return f(w) * std::cos(w * static_cast<double>(lag)); };
    double coarse = integrate_gauss_panels(integrand, edges, 20);
    double fine = integrate_gauss_panels(integrand, edges, 32);
    if (std::abs(fine - coarse) > 1e-8 * std::max(1.0, std::abs(fine)))
        throw NumericalError("theoretical_autocovariance: quadrature did not converge");
    return 2.0 * fine;
}

}  // namespace hawkes
