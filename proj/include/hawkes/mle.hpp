#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "hawkes/model.hpp"
#include "hawkes/optimize.hpp"
#include "hawkes/simulation.hpp"
#include "hawkes/whittle.hpp"

namespace hawkes {

struct LikelihoodValue {
    double loglik;
    std::vector<double> intensities;  // lambda(t_i) at each event, always >= eta
};

// Continuous-time log-likelihood with the convention that no event lies
// outside [0, T]: burn-in points must be dropped before calling. The
// exponential kernel admits the O(p) recursion
//   A_1 = 0,  A_i = e^{-beta (t_i - t_{i-1})} (1 + A_{i-1}),
// with lambda(t_i) = eta + mu beta A_i.
inline LikelihoodValue exp_loglik(const PointRealization& realization, double eta, double mu,
                                  double beta) {
    require(eta > 0.0 && mu >= 0.0 && mu < 1.0 && beta > 0.0,
            "exp_loglik: parameters outside the box");
    const double T = realization.window_end;
    const auto& t = realization.times;
    LikelihoodValue out{-eta * T, {}};
    out.intensities.reserve(t.size());
    double a = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (i > 0) a = std::exp(-beta * (t[i] - t[i - 1])) * (1.0 + a);
        const double lam = eta + mu * beta * a;
        out.intensities.push_back(lam);
        out.loglik += std::log(lam);
        out.loglik -= mu * (1.0 - std::exp(-beta * (T - t[i])));
    }
    if (!std::isfinite(out.loglik)) throw NumericalError("exp_loglik: non-finite log-likelihood");
    return out;
}

// Generic O(p^2) likelihood for the power-law kernel; the compensator uses
// the closed-form kernel mass 1 - (a/(a+x))^gamma on [0, x].
inline LikelihoodValue powerlaw_loglik(const PointRealization& realization, double eta, double mu,
                                       const PowerLaw& k) {
    require(eta > 0.0 && mu >= 0.0 && mu < 1.0, "powerlaw_loglik: parameters outside the box");
    validate(ReproductionKernel{k});
    const double T = realization.window_end;
    const auto& t = realization.times;
    LikelihoodValue out{-eta * T, {}};
    out.intensities.reserve(t.size());
    const double c = k.gamma * std::pow(k.a, k.gamma);
    for (std::size_t i = 0; i < t.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < i; ++j) s += std::pow(k.a + t[i] - t[j], -k.gamma - 1.0);
        const double lam = eta + mu * c * s;
        out.intensities.push_back(lam);
        out.loglik += std::log(lam);
        out.loglik -= mu * (1.0 - std::pow(k.a / (k.a + (T - t[i])), k.gamma));
    }
    if (!std::isfinite(out.loglik))
        throw NumericalError("powerlaw_loglik: non-finite log-likelihood");
    return out;
}

inline LikelihoodValue model_loglik(const PointRealization& realization, const HawkesModel& m) {
    const double eta = constant_eta(m);
    if (const auto* e = std::get_if<Exponential>(&m.kernel))
        return exp_loglik(realization, eta, m.mu, e->beta);
    if (const auto* p = std::get_if<PowerLaw>(&m.kernel))
        return powerlaw_loglik(realization, eta, m.mu, *p);
    throw std::invalid_argument("model_loglik: the gaussian kernel has no causal likelihood");
}

struct MleOptions {
    MinimizeOptions optimize{};
    std::vector<double> init;  // constrained coordinates; empty = data-driven default
    bool multistart = true;
    bool compute_uncertainty = true;
    double fisher_condition_limit = 1e10;
};

namespace detail {

inline std::vector<double> default_mle_init(const PointRealization& realization,
                                            const FitSpec& spec) {
    const double rate =
        static_cast<double>(realization.times.size()) / std::max(realization.window_end, 1e-12);
    const double mu0 = 0.5;
    std::vector<double> theta{std::max(rate, 1e-8) * (1.0 - mu0), mu0};
    if (const auto* p = std::get_if<PowerLaw>(&spec.kernel)) {
        theta.push_back(p->gamma);
    } else {
        theta.push_back(std::max(rate, 1e-3));
    }
    return theta;
}

inline std::vector<std::vector<double>> mle_start_grid(const PointRealization& realization,
                                                       const std::vector<double>& first) {
    const double rate =
        static_cast<double>(realization.times.size()) / std::max(realization.window_end, 1e-12);
    std::vector<std::vector<double>> starts;
    for (double mu : {0.2, 0.5, 0.8}) {
        for (double scale : {0.3, 1.0, 3.0}) {
            auto theta = first;
            theta[0] = std::max(rate, 1e-8) * (1.0 - mu);
            theta[1] = mu;
            theta[2] = first[2] * scale;
            if (theta != first) starts.push_back(std::move(theta));
        }
    }
    return starts;
}

// Observed information: numeric Hessian of the negative log-likelihood at
// the estimate, symmetric by construction.
inline Matrix observed_information(const ObjectiveFn& negloglik, const std::vector<double>& theta,
                                   const std::vector<Transform>& transforms) {
    const std::size_t p = theta.size();
    std::vector<double> h(p);
    for (std::size_t k = 0; k < p; ++k) {
        double step = 1e-4 * std::max(std::fabs(theta[k]), 1e-2);
        if (transforms[k] == Transform::Log) step = std::min(step, theta[k] / 2.0);
        if (transforms[k] == Transform::Logit)
            step = std::min({step, theta[k] / 2.0, (1.0 - theta[k]) / 2.0});
        require(step > 0.0, "observed_information: parameter too close to its boundary");
        h[k] = step;
    }
    auto at = [&](std::vector<double> t) { return negloglik(t); };
    const double f0 = at(theta);
    Matrix hess(p, std::vector<double>(p, 0.0));
    for (std::size_t k = 0; k < p; ++k) {
        auto tp = theta;
        tp[k] += h[k];
        auto tm = theta;
        tm[k] -= h[k];
        hess[k][k] = (at(tp) - 2.0 * f0 + at(tm)) / (h[k] * h[k]);
        for (std::size_t l = k + 1; l < p; ++l) {
            auto tpp = theta, tpm = theta, tmp = theta, tmm = theta;
            tpp[k] += h[k];
            tpp[l] += h[l];
            tpm[k] += h[k];
            tpm[l] -= h[l];
            tmp[k] -= h[k];
            tmp[l] += h[l];
            tmm[k] -= h[k];
            tmm[l] -= h[l];
            hess[k][l] = hess[l][k] =
                (at(tpp) - at(tpm) - at(tmp) + at(tmm)) / (4.0 * h[k] * h[l]);
        }
    }
    return hess;
}

}  // namespace detail

// Maximum likelihood on the fully observed realization, with the same
// constraint transforms and reporting shape as whittle_fit. The power-law
// scale a stays fixed at its spec value.
inline FitReport mle_fit(const PointRealization& realization, const FitSpec& spec,
                         const MleOptions& opts = {}) {
    require(!realization.times.empty(), "mle_fit: realization has no events");
    require(realization.window_end > 0.0, "mle_fit: empty observation window");
    require(!spec.fit_powerlaw_scale, "mle_fit: the power-law scale stays fixed");
    require(!std::holds_alternative<Gaussian>(spec.kernel),
            "mle_fit: family must be exponential or power-law");
    validate(spec.kernel);

    const double events = static_cast<double>(realization.times.size());
    const auto transforms = parameter_transforms(spec);
    // normalized so the optimizer sees an O(1) objective regardless of p
    const ObjectiveFn objective = [&](const std::vector<double>& theta) {
        return -model_loglik(realization, unpack_parameters(theta, spec)).loglik / events;
    };

    std::vector<double> first =
        opts.init.empty() ? detail::default_mle_init(realization, spec) : opts.init;
    require(first.size() == transforms.size(), "mle_fit: init has the wrong length");

    OptimizeResult best = minimize(objective, first, transforms, opts.optimize);
    if (!best.converged && opts.multistart) {
        int iterations = best.iterations;
        for (const auto& start : detail::mle_start_grid(realization, first)) {
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
    rep.method = "mle";
    rep.model = unpack_parameters(best.x, spec);
    rep.parameter_names = parameter_names(spec);
    rep.estimate = best.x;
    rep.objective = best.fval;  // negative mean log-likelihood per event
    rep.converged = best.converged;
    rep.iterations = best.iterations;
    rep.grad_norm = best.grad_norm;
    rep.n = realization.times.size();
    rep.delta = 0.0;  // continuous-time fit
    rep.trace = std::move(best.trace);
    rep.c4_omitted = false;

    if (!opts.compute_uncertainty) return rep;
    try {
        const ObjectiveFn negloglik = [&](const std::vector<double>& theta) {
            return -model_loglik(realization, unpack_parameters(theta, spec)).loglik;
        };
        rep.fisher = detail::observed_information(negloglik, rep.estimate, transforms);
        rep.fisher_condition = detail::normalized_condition(rep.fisher);
        if (!(rep.fisher_condition < opts.fisher_condition_limit)) {
            rep.converged = false;
            rep.message = "information matrix ill-conditioned: a parameter is weakly identified";
        }
        rep.covariance = detail::matrix_inverse(rep.fisher);
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
