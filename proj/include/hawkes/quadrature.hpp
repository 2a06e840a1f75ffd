#pragma once

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <functional>
#include <memory>
#include <mutex>
#include <string>

#include "hawkes/common.hpp"

namespace hawkes {

// GSL's default error handler aborts the process; all call sites here check
// status codes instead.
inline void disable_gsl_abort() {
    static std::once_flag flag;
    std::call_once(flag, [] { gsl_set_error_handler_off(); });
}

namespace detail {

using ScalarFn = std::function<double(double)>;

inline double gsl_trampoline(double x, void* p) {
    return (*static_cast<const ScalarFn*>(p))(x);
}

struct WorkspaceDeleter {
    void operator()(gsl_integration_workspace* w) const { gsl_integration_workspace_free(w); }
};
using Workspace = std::unique_ptr<gsl_integration_workspace, WorkspaceDeleter>;

inline Workspace make_workspace(std::size_t limit) {
    return Workspace(gsl_integration_workspace_alloc(limit));
}

}  // namespace detail

struct QuadratureResult {
    double value;
    double abserr;
};

// Adaptive Gauss-Kronrod on [a, b].
inline QuadratureResult integrate_qag(const detail::ScalarFn& f, double a, double b,
                                      double epsabs = 1e-10, double epsrel = 1e-10,
                                      int key = GSL_INTEG_GAUSS41, std::size_t limit = 400) {
    disable_gsl_abort();
    auto ws = detail::make_workspace(limit);
    gsl_function gf{&detail::gsl_trampoline, const_cast<detail::ScalarFn*>(&f)};
    double value = 0.0, abserr = 0.0;
    int status = gsl_integration_qag(&gf, a, b, epsabs, epsrel, limit, key, ws.get(), &value, &abserr);
    if (status != GSL_SUCCESS && status != GSL_EROUND)
        throw NumericalError("integrate_qag failed: " + std::string(gsl_strerror(status)));
    return {value, abserr};
}

// Adaptive integration on [a, +inf).
inline QuadratureResult integrate_qagiu(const detail::ScalarFn& f, double a,
                                        double epsabs = 1e-11, double epsrel = 1e-11,
                                        std::size_t limit = 400) {
    disable_gsl_abort();
    auto ws = detail::make_workspace(limit);
    gsl_function gf{&detail::gsl_trampoline, const_cast<detail::ScalarFn*>(&f)};
    double value = 0.0, abserr = 0.0;
    int status = gsl_integration_qagiu(&gf, a, epsabs, epsrel, limit, ws.get(), &value, &abserr);
    if (status != GSL_SUCCESS && status != GSL_EROUND)
        throw NumericalError("integrate_qagiu failed: " + std::string(gsl_strerror(status)));
    return {value, abserr};
}

// Fixed-order Gauss-Legendre over an explicit panel decomposition; exact for
// smooth integrands once panels resolve the integrand's scale of variation.
inline double integrate_gauss_panels(const detail::ScalarFn& f, const std::vector<double>& edges,
                                     std::size_t nodes_per_panel = 20) {
    disable_gsl_abort();
    gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(nodes_per_panel);
    if (!table) throw NumericalError("glfixed table allocation failed");
    double total = 0.0;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        for (std::size_t i = 0; i < nodes_per_panel; ++i) {
            double x = 0.0, w = 0.0;
            gsl_integration_glfixed_point(edges[p], edges[p + 1], i, &x, &w, table);
            total += w * f(x);
        }
    }
    gsl_integration_glfixed_table_free(table);
    return total;
}

}  // namespace hawkes
