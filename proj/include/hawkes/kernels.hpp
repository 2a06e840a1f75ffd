#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "hawkes/common.hpp"
#include "hawkes/quadrature.hpp"
#include "hawkes/rng.hpp"

namespace hawkes {

// Reproduction kernels h*: probability densities of offspring time offsets.
// Fourier convention throughout: h~(w) = integral h*(t) e^{-iwt} dt.

struct Exponential {
    double beta;  // rate > 0; h*(t) = beta e^{-beta t}, t >= 0
};

struct PowerLaw {
    double gamma;  // shape > 0
    double a;      // scale > 0; h*(t) = gamma a^gamma (a+t)^{-gamma-1}, t >= 0
};

struct Gaussian {
    double nu;     // location
    double sigma;  // scale > 0; non-causal, supported on all of R
};

using ReproductionKernel = std::variant<Exponential, PowerLaw, Gaussian>;

inline void validate(const ReproductionKernel& k) {
    std::visit(
        [](const auto& kk) {
            using T = std::decay_t<decltype(kk)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                require(kk.beta > 0.0 && std::isfinite(kk.beta), "Exponential: beta must be > 0");
            } else if constexpr (std::is_same_v<T, PowerLaw>) {
                require(kk.gamma > 0.0 && std::isfinite(kk.gamma), "PowerLaw: gamma must be > 0");
                require(kk.a > 0.0 && std::isfinite(kk.a), "PowerLaw: a must be > 0");
            } else {
                require(std::isfinite(kk.nu), "Gaussian: nu must be finite");
                require(kk.sigma > 0.0 && std::isfinite(kk.sigma), "Gaussian: sigma must be > 0");
            }
        },
        k);
}

inline bool is_causal(const ReproductionKernel& k) {
    return !std::holds_alternative<Gaussian>(k);
}

inline double density(const ReproductionKernel& k, double t) {
    return std::visit(
        [t](const auto& kk) -> double {
            using T = std::decay_t<decltype(kk)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                return t < 0.0 ? 0.0 : kk.beta * std::exp(-kk.beta * t);
            } else if constexpr (std::is_same_v<T, PowerLaw>) {
                if (t < 0.0) return 0.0;
                return (kk.gamma / kk.a) * std::pow(kk.a / (kk.a + t), kk.gamma + 1.0);
            } else {
                double z = (t - kk.nu) / kk.sigma;
                return std::exp(-0.5 * z * z) / (kk.sigma * std::sqrt(two_pi));
            }
        },
        k);
}

inline double cdf(const ReproductionKernel& k, double t) {
    return std::visit(
        [t](const auto& kk) -> double {
            using T = std::decay_t<decltype(kk)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                return t < 0.0 ? 0.0 : -std::expm1(-kk.beta * t);
            } else if constexpr (std::is_same_v<T, PowerLaw>) {
                return t < 0.0 ? 0.0 : 1.0 - std::pow(kk.a / (kk.a + t), kk.gamma);
            } else {
                double z = (t - kk.nu) / (kk.sigma * std::sqrt(2.0));
                return 0.5 * std::erfc(-z);
            }
        },
        k);
}

// nu_p = integral |t|^p h*(t) dt; +inf for PowerLaw when p >= gamma.
inline double moment(const ReproductionKernel& k, double p) {
    require(p > 0.0, "moment: order must be > 0");
    return std::visit(
        [p](const auto& kk) -> double {
            using T = std::decay_t<decltype(kk)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                return std::tgamma(p + 1.0) / std::pow(kk.beta, p);
            } else if constexpr (std::is_same_v<T, PowerLaw>) {
                if (p >= kk.gamma) return std::numeric_limits<double>::infinity();
                return std::pow(kk.a, p) * std::tgamma(p + 1.0) * std::tgamma(kk.gamma - p) /
                       std::tgamma(kk.gamma);
            } else {
                // No elementary closed form for fractional absolute moments off
                // center; quadrature at the transform tolerance.
                double nu = kk.nu, sigma = kk.sigma;
                auto halfline = [&](double sign) {
                    return integrate_qagiu(
                               [=](double t) {
                                   double z = (sign * t - nu) / sigma;
                                   return std::pow(t, p) * std::exp(-0.5 * z * z) /
                                          (sigma * std::sqrt(two_pi));
                               },
                               0.0, 1e-10, 1e-10)
                        .value;
                };
                return halfline(1.0) + halfline(-1.0);
            }
        },
        k);
}

// Inverse-CDF draws for the causal kernels, location-scale normal otherwise.
inline double sample_offset(const ReproductionKernel& k, RandomEngine& rng) {
    return std::visit(
        [&rng](const auto& kk) -> double {
            using T = std::decay_t<decltype(kk)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                return -std::log(uniform01(rng)) / kk.beta;
            } else if constexpr (std::is_same_v<T, PowerLaw>) {
                // CDF 1 - (a/(a+t))^gamma inverted; expm1 keeps precision near u = 0.
                double u = uniform01(rng);
                return kk.a * std::expm1(-std::log1p(-u) / kk.gamma);
            } else {
                return kk.nu + kk.sigma * standard_normal(rng);
            }
        },
        k);
}

namespace detail {

// Power-law transform for x = a*w > 0, via the contour rotated onto the
// negative imaginary axis:
//   F = -i gamma int_0^inf (1 - iv)^{-gamma-1} e^{-xv} dv,
// whose integrand is non-oscillatory. Splitting (1 - iv) in polar form:
//   Re F =  gamma int (1+v^2)^{-(gamma+1)/2} sin((gamma+1) atan v) e^{-xv} dv
//   Im F = -gamma int (1+v^2)^{-(gamma+1)/2} cos((gamma+1) atan v) e^{-xv} dv.
inline std::complex<double> powerlaw_ft_scaled(double gamma, double x) {
    if (x == 0.0) return {1.0, 0.0};
    auto envelope = [gamma](double v) {
        return std::pow(1.0 + v * v, -0.5 * (gamma + 1.0));
    };
    double re = gamma * integrate_qagiu(
                            [&](double v) {
                                return envelope(v) * std::sin((gamma + 1.0) * std::atan(v)) *
                                       std::exp(-x * v);
                            },
                            0.0)
                            .value;
    double im = -gamma * integrate_qagiu(
                             [&](double v) {
                                 return envelope(v) * std::cos((gamma + 1.0) * std::atan(v)) *
                                        std::exp(-x * v);
                             },
                             0.0)
                             .value;
    return {re, im};
}

}  // namespace detail

inline std::complex<double> fourier_transform(const ReproductionKernel& k, double w) {
    return std::visit(
        [w](const auto& kk) -> std::complex<double> {
            using T = std::decay_t<decltype(kk)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                return kk.beta / std::complex<double>(kk.beta, w);
            } else if constexpr (std::is_same_v<T, PowerLaw>) {
                auto f = detail::powerlaw_ft_scaled(kk.gamma, kk.a * std::abs(w));
                return w < 0.0 ? std::conj(f) : f;
            } else {
                double mag = std::exp(-0.5 * kk.sigma * kk.sigma * w * w);
                return std::polar(mag, -kk.nu * w);
            }
        },
        k);
}

// Envelope constants for the aliasing tail bound: |h~(w)| <= c1/|w| and
// |Re h~(w)| <= c2/w^2 for all w != 0.
struct TailEnvelope {
    double c1;
    double c2;
};

inline TailEnvelope tail_envelope(const ReproductionKernel& k) {
    return std::visit(
        [](const auto& kk) -> TailEnvelope {
            using T = std::decay_t<decltype(kk)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                return {kk.beta, kk.beta * kk.beta};
            } else if constexpr (std::is_same_v<T, PowerLaw>) {
                // Integration by parts once resp. twice: c1 = 2 h*(0),
                // c2 = 2 |h*'(0)| for a monotone convex density.
                return {2.0 * kk.gamma / kk.a, 2.0 * kk.gamma * (kk.gamma + 1.0) / (kk.a * kk.a)};
            } else {
                // sup |w| e^{-s^2 w^2/2} and sup w^2 e^{-s^2 w^2/2}.
                double s = kk.sigma;
                return {std::exp(-0.5) / s, 2.0 / (std::exp(1.0) * s * s)};
            }
        },
        k);
}

// ---------------------------------------------------------------------------
// Chebyshev surrogate of the power-law transform for bulk evaluation.
//
// F depends on (gamma, a, w) only through gamma and x = a*w, so a table in x
// serves every scale. On an octave [2^j, 2^{j+1}] the transform is analytic
// (its only branch point is x = 0, one octave away in relative terms), so
// Chebyshev coefficients decay geometrically with ratio 3 + 2*sqrt(2) and a
// fixed node count reaches full double precision on every octave.

class PowerLawFtTable {
  public:
    static constexpr int nodes = 24;
    static constexpr int floor_exponent = -12;  // x below 2^-12 -> direct quadrature

    PowerLawFtTable(double gamma, double x_max) : gamma_(gamma) {
        require(gamma > 0.0, "PowerLawFtTable: gamma must be > 0");
        require(x_max > 0.0, "PowerLawFtTable: x_max must be > 0");
        int top = floor_exponent;
        while (std::ldexp(1.0, top + 1) < x_max) ++top;
        segments_.reserve(static_cast<std::size_t>(top - floor_exponent + 1));
        for (int j = floor_exponent; j <= top; ++j) segments_.push_back(build_segment(j));
        top_exponent_ = top;
    }

    double gamma() const { return gamma_; }
    double coverage() const { return std::ldexp(1.0, top_exponent_ + 1); }

    // F(gamma; x) for x >= 0; falls back to quadrature outside table coverage.
    std::complex<double> eval_scaled(double x) const {
        if (x == 0.0) return {1.0, 0.0};
        int j = static_cast<int>(std::floor(std::log2(x)));
        if (j < floor_exponent || j > top_exponent_) return detail::powerlaw_ft_scaled(gamma_, x);
        const Segment& s = segments_[static_cast<std::size_t>(j - floor_exponent)];
        double lo = std::ldexp(1.0, j);
        double u = 2.0 * (x - lo) / lo - 1.0;  // map [2^j, 2^{j+1}] -> [-1, 1]
        return {clenshaw(s.re, u), clenshaw(s.im, u)};
    }

  private:
    struct Segment {
        std::array<double, nodes> re;
        std::array<double, nodes> im;
    };

    Segment build_segment(int j) const {
        double lo = std::ldexp(1.0, j);
        double mid = 1.5 * lo, half = 0.5 * lo;
        std::array<std::complex<double>, nodes> values;
        for (int i = 0; i < nodes; ++i) {
            double u = std::cos(pi * (i + 0.5) / nodes);
            values[static_cast<std::size_t>(i)] = detail::powerlaw_ft_scaled(gamma_, mid + half * u);
        }
        Segment s{};
        for (int c = 0; c < nodes; ++c) {
            std::complex<double> acc = 0.0;
            for (int i = 0; i < nodes; ++i)
                acc += values[static_cast<std::size_t>(i)] * std::cos(c * pi * (i + 0.5) / nodes);
            s.re[static_cast<std::size_t>(c)] = 2.0 / nodes * acc.real();
            s.im[static_cast<std::size_t>(c)] = 2.0 / nodes * acc.imag();
        }
        return s;
    }

    static double clenshaw(const std::array<double, nodes>& c, double u) {
        double b1 = 0.0, b2 = 0.0;
        for (int k = nodes - 1; k >= 1; --k) {
            double b0 = 2.0 * u * b1 - b2 + c[static_cast<std::size_t>(k)];
            b2 = b1;
            b1 = b0;
        }
        return u * b1 - b2 + 0.5 * c[0];
    }

    double gamma_;
    int top_exponent_;
    std::vector<Segment> segments_;
};

// Most-recently-used store of transform tables keyed by gamma. Central
// difference sweeps re-visit the same gamma for every non-shape parameter,
// so a shallow cache removes nearly all rebuilds. Not thread-safe: owned by
// one fit context at a time.
class TransformCache {
  public:
    std::shared_ptr<const PowerLawFtTable> get(double gamma, double x_max) {
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            if (entries_[i]->gamma() == gamma && entries_[i]->coverage() >= x_max) {
                auto hit = entries_[i];
                entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(i));
                entries_.insert(entries_.begin(), hit);
                return hit;
            }
        }
        auto table = std::make_shared<const PowerLawFtTable>(gamma, x_max);
        entries_.insert(entries_.begin(), table);
        if (entries_.size() > capacity) entries_.pop_back();
        return table;
    }

  private:
    static constexpr std::size_t capacity = 8;
    std::vector<std::shared_ptr<const PowerLawFtTable>> entries_;
};

// Callable h~(w) specialized per kernel family: closed forms where they
// exist, table-backed quadrature for the power law. x_max_hint bounds the
// frequency range |w| <= x_max_hint/a the table must cover.
class KernelTransform {
  public:
    explicit KernelTransform(const ReproductionKernel& k, double max_abs_w = 0.0,
                             TransformCache* cache = nullptr)
        : kernel_(k) {
        if (const auto* pl = std::get_if<PowerLaw>(&k)) {
            double x_max = pl->a * std::max(max_abs_w, 1.0);
            table_ = cache ? cache->get(pl->gamma, x_max)
                           : std::make_shared<const PowerLawFtTable>(pl->gamma, x_max);
        }
    }

    std::complex<double> operator()(double w) const {
        if (table_) {
            const auto& pl = std::get<PowerLaw>(kernel_);
            auto f = table_->eval_scaled(pl.a * std::abs(w));
            return w < 0.0 ? std::conj(f) : f;
        }
        return fourier_transform(kernel_, w);
    }

  private:
    ReproductionKernel kernel_;
    std::shared_ptr<const PowerLawFtTable> table_;
};

// ---------------------------------------------------------------------------
// CLI kernel specification strings:
//   exp:beta=1.0 | powerlaw:gamma=2.5,a=1.5 | gauss:nu=9.8,sigma=5.9

inline ReproductionKernel parse_kernel_spec(const std::string& spec) {
    auto colon = spec.find(':');
    std::string family = spec.substr(0, colon);
    std::map<std::string, double> kv;
    if (colon != std::string::npos) {
        std::stringstream rest(spec.substr(colon + 1));
        std::string item;
        while (std::getline(rest, item, ',')) {
            auto eq = item.find('=');
            require(eq != std::string::npos, "kernel spec: expected key=value, got '" + item + "'");
            try {
                kv[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
            } catch (const std::exception&) {
                throw std::invalid_argument("kernel spec: bad numeric value in '" + item + "'");
            }
        }
    }
    auto take = [&](const std::string& key) {
        auto it = kv.find(key);
        require(it != kv.end(), "kernel spec: missing parameter '" + key + "'");
        double v = it->second;
        kv.erase(it);
        return v;
    };
    ReproductionKernel k;
    if (family == "exp" || family == "exponential") {
        k = Exponential{take("beta")};
    } else if (family == "powerlaw") {
        double g = take("gamma");
        k = PowerLaw{g, take("a")};
    } else if (family == "gauss" || family == "gaussian") {
        double nu = take("nu");
        k = Gaussian{nu, take("sigma")};
    } else {
        throw std::invalid_argument("kernel spec: unknown family '" + family + "'");
    }
    if (!kv.empty())
        throw std::invalid_argument("kernel spec: unused parameter '" + kv.begin()->first + "'");
    validate(k);
    return k;
}

inline std::string kernel_spec_string(const ReproductionKernel& k) {
    char buf[96];
    std::visit(
        [&](const auto& kk) {
            using T = std::decay_t<decltype(kk)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                std::snprintf(buf, sizeof buf, "exp:beta=%.17g", kk.beta);
            } else if constexpr (std::is_same_v<T, PowerLaw>) {
                std::snprintf(buf, sizeof buf, "powerlaw:gamma=%.17g,a=%.17g", kk.gamma, kk.a);
            } else {
                std::snprintf(buf, sizeof buf, "gauss:nu=%.17g,sigma=%.17g", kk.nu, kk.sigma);
            }
        },
        k);
    return buf;
}

}  // namespace hawkes
