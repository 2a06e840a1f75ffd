#pragma once

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "hawkes/common.hpp"
#include "hawkes/quadrature.hpp"

namespace hawkes {

// Box constraints are enforced by coordinate transforms so the minimizers
// only ever see an unconstrained problem.
enum class Transform { Identity, Log, Logit };

inline double to_unconstrained(double v, Transform t) {
    switch (t) {
        case Transform::Identity:
            return v;
        case Transform::Log:
            require(v > 0.0, "log transform needs a positive value");
            return std::log(v);
        case Transform::Logit:
            require(v > 0.0 && v < 1.0, "logit transform needs a value in (0,1)");
            return std::log(v / (1.0 - v));
    }
    return v;
}

inline double from_unconstrained(double u, Transform t) {
    switch (t) {
        case Transform::Identity:
            return u;
        case Transform::Log:
            return std::exp(u);
        case Transform::Logit:
            return 1.0 / (1.0 + std::exp(-u));
    }
    return u;
}

using ObjectiveFn = std::function<double(const std::vector<double>&)>;

struct MinimizeOptions {
    // Budgets sized against certified fits, which finish in well under 100
    // quasi-Newton iterations; surfaces still grinding past these caps are
    // degenerate and get reported as not converged rather than polished.
    int max_iterations = 150;          // quasi-Newton phase
    int simplex_max_iterations = 600;  // fallback phase
    double gradient_tolerance = 1e-7;
    double simplex_tolerance = 1e-7;
    double initial_step = 0.25;        // in unconstrained coordinates
    double gradient_step = 1e-6;       // relative central-difference step
};

struct OptimizeResult {
    std::vector<double> x;  // constrained coordinates
    double fval = std::numeric_limits<double>::infinity();
    int iterations = 0;
    double grad_norm = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
    std::vector<double> trace;  // objective after each accepted step
};

namespace detail {

// Exceptions and non-finite values must not cross the C callback boundary;
// they become a large finite penalty the line search can still order.
constexpr double optimize_penalty = 1e300;

struct GslObjective {
    const ObjectiveFn* f;
    const std::vector<Transform>* transforms;
    double gradient_step;
    mutable std::vector<double> scratch;

    double value(const gsl_vector* u) const {
        auto& x = scratch;
        x.resize(transforms->size());
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] = from_unconstrained(gsl_vector_get(u, i), (*transforms)[i]);
        double v;
        try {
            v = (*f)(x);
        } catch (const std::exception&) {
            return optimize_penalty;
        }
        return std::isfinite(v) ? v : optimize_penalty;
    }

    void gradient(const gsl_vector* u, gsl_vector* g) const {
        const std::size_t n = u->size;
        std::vector<double> w(n);
        for (std::size_t i = 0; i < n; ++i) w[i] = gsl_vector_get(u, i);
        gsl_vector_view wv = gsl_vector_view_array(w.data(), n);
        for (std::size_t i = 0; i < n; ++i) {
            const double ui = w[i];
            const double h = gradient_step * std::max(1.0, std::fabs(ui));
            w[i] = ui + h;
            const double fp = value(&wv.vector);
            w[i] = ui - h;
            const double fm = value(&wv.vector);
            w[i] = ui;
            gsl_vector_set(g, i, (fp - fm) / (2.0 * h));
        }
    }
};

inline double gsl_objective_f(const gsl_vector* u, void* p) {
    return static_cast<const GslObjective*>(p)->value(u);
}

inline void gsl_objective_df(const gsl_vector* u, void* p, gsl_vector* g) {
    static_cast<const GslObjective*>(p)->gradient(u, g);
}

inline void gsl_objective_fdf(const gsl_vector* u, void* p, double* fv, gsl_vector* g) {
    const auto* obj = static_cast<const GslObjective*>(p);
    *fv = obj->value(u);
    obj->gradient(u, g);
}

// One BFGS run from u; u is replaced by the final iterate. Returns true when
// the gradient test certified convergence.
inline bool run_bfgs(const GslObjective& obj, std::vector<double>& u, OptimizeResult& out,
                     const MinimizeOptions& opts) {
    const std::size_t n = u.size();
    gsl_multimin_function_fdf F;
    F.n = n;
    F.f = &gsl_objective_f;
    F.df = &gsl_objective_df;
    F.fdf = &gsl_objective_fdf;
    F.params = const_cast<GslObjective*>(&obj);
    gsl_multimin_fdfminimizer* s =
        gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, n);
    gsl_vector_view uv = gsl_vector_view_array(u.data(), n);
    gsl_multimin_fdfminimizer_set(s, &F, &uv.vector, opts.initial_step, 0.1);
    bool converged = false;
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        if (gsl_multimin_fdfminimizer_iterate(s) != GSL_SUCCESS) break;
        ++out.iterations;
        out.trace.push_back(s->f);
        if (gsl_multimin_test_gradient(s->gradient, opts.gradient_tolerance) == GSL_SUCCESS) {
            converged = true;
            break;
        }
    }
    if (s->f <= out.fval) {
        out.fval = s->f;
        for (std::size_t i = 0; i < n; ++i) u[i] = gsl_vector_get(s->x, i);
    } else {
        converged = false;  // a stale iterate cannot certify anything
    }
    gsl_multimin_fdfminimizer_free(s);
    return converged;
}

// Nelder-Mead fallback, same in/out convention as run_bfgs.
inline bool run_simplex(const GslObjective& obj, std::vector<double>& u, OptimizeResult& out,
                        const MinimizeOptions& opts) {
    const std::size_t n = u.size();
    gsl_multimin_function F;
    F.n = n;
    F.f = &gsl_objective_f;
    F.params = const_cast<GslObjective*>(&obj);
    gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
    gsl_vector_view uv = gsl_vector_view_array(u.data(), n);
    gsl_vector* step = gsl_vector_alloc(n);
    gsl_vector_set_all(step, opts.initial_step);
    gsl_multimin_fminimizer_set(s, &F, &uv.vector, step);
    bool converged = false;
    for (int iter = 0; iter < opts.simplex_max_iterations; ++iter) {
        if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
        ++out.iterations;
        if (s->fval <= (out.trace.empty() ? optimize_penalty : out.trace.back()))
            out.trace.push_back(s->fval);
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), opts.simplex_tolerance) ==
            GSL_SUCCESS) {
            converged = true;
            break;
        }
    }
    if (s->fval <= out.fval) {
        out.fval = s->fval;
        for (std::size_t i = 0; i < n; ++i) u[i] = gsl_vector_get(s->x, i);
    } else {
        converged = false;
    }
    gsl_vector_free(step);
    gsl_multimin_fminimizer_free(s);
    return converged;
}

}  // namespace detail

// Minimize f over box-constrained coordinates. Quasi-Newton with numerical
// central-difference gradients first; if the gradient test cannot certify the
// stop, a Nelder-Mead pass from the best point acts as fallback certificate.
inline OptimizeResult minimize(const ObjectiveFn& f, const std::vector<double>& x0,
                               const std::vector<Transform>& transforms,
                               const MinimizeOptions& opts = {}) {
    require(!x0.empty(), "minimize: empty start point");
    require(x0.size() == transforms.size(), "minimize: one transform per coordinate");
    disable_gsl_abort();

    detail::GslObjective obj{&f, &transforms, opts.gradient_step, {}};
    std::vector<double> u(x0.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = to_unconstrained(x0[i], transforms[i]);

    OptimizeResult out;
    {
        gsl_vector_view uv = gsl_vector_view_array(u.data(), u.size());
        const double f0 = obj.value(&uv.vector);
        require(f0 < detail::optimize_penalty, "minimize: objective not finite at the start point");
        out.fval = f0;
        out.trace.push_back(f0);
    }

    bool converged = detail::run_bfgs(obj, u, out, opts);
    if (!converged) converged = detail::run_simplex(obj, u, out, opts);
    out.converged = converged;

    {
        gsl_vector_view uv = gsl_vector_view_array(u.data(), u.size());
        gsl_vector* g = gsl_vector_alloc(u.size());
        obj.gradient(&uv.vector, g);
        double ss = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) ss += gsl_vector_get(g, i) * gsl_vector_get(g, i);
        out.grad_norm = std::sqrt(ss);
        gsl_vector_free(g);
    }

    out.x.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out.x[i] = from_unconstrained(u[i], transforms[i]);
    return out;
}

// Lowest final objective wins; exact ties keep the earliest start. Starts
// whose objective is not finite are skipped.
inline OptimizeResult minimize_multistart(const ObjectiveFn& f,
                                          const std::vector<std::vector<double>>& starts,
                                          const std::vector<Transform>& transforms,
                                          const MinimizeOptions& opts = {}) {
    require(!starts.empty(), "minimize_multistart: no start points");
    OptimizeResult best;
    bool have = false;
    int total_iterations = 0;
    for (const auto& s : starts) {
        OptimizeResult r;
        try {
            r = minimize(f, s, transforms, opts);
        } catch (const std::exception&) {
            continue;
        }
        total_iterations += r.iterations;
        if (!have || r.fval < best.fval) {
            best = std::move(r);
            have = true;
        }
    }
    require(have, "minimize_multistart: every start point failed");
    best.iterations = total_iterations;
    return best;
}

}  // namespace hawkes
