#pragma once

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <memory>
#include <string>

#include "lanemden/errors.hpp"

namespace lanemden {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    int status = 0;
};

namespace detail {

inline void quiet_gsl() {
    static const bool once = [] {
        gsl_set_error_handler_off();
        return true;
    }();
    (void)once;
}

struct WorkspaceDeleter {
    void operator()(gsl_integration_workspace* w) const { gsl_integration_workspace_free(w); }
};

inline gsl_integration_workspace* thread_workspace() {
    constexpr std::size_t limit = 2000;
    thread_local std::unique_ptr<gsl_integration_workspace, WorkspaceDeleter> ws(
        gsl_integration_workspace_alloc(limit));
    return ws.get();
}

// Nesting depth shared by every integrand type.
inline int& quad_depth() {
    thread_local int depth = 0;
    return depth;
}

}  // namespace detail

// Adaptive 21-point Gauss-Kronrod (GSL QAG) on [a, b] with relative tolerance.
// Reentrant: nested calls get their own workspace.
template <class F>
QuadResult adaptive_integrate(F&& f, double a, double b, double rel_tol, double abs_tol = 0.0) {
    QuadResult q;
    if (!(b > a)) return q;
    detail::quiet_gsl();
    using Fn = std::remove_reference_t<F>;
    gsl_function g;
    g.function = [](double x, void* p) { return (*static_cast<Fn*>(p))(x); };
    g.params = const_cast<void*>(static_cast<const void*>(&f));
    int& depth = detail::quad_depth();
    std::unique_ptr<gsl_integration_workspace, detail::WorkspaceDeleter> own;
    gsl_integration_workspace* ws;
    if (depth == 0) {
        ws = detail::thread_workspace();
    } else {
        own.reset(gsl_integration_workspace_alloc(2000));
        ws = own.get();
    }
    ++depth;
    q.status = gsl_integration_qag(&g, a, b, abs_tol, rel_tol, 2000, GSL_INTEG_GAUSS21, ws, &q.value, &q.error);
    --depth;
    return q;
}

inline void check_converged(const QuadResult& q, double rel_tol, const char* what) {
    const bool ok = std::isfinite(q.value) &&
                    (q.status == GSL_SUCCESS || q.error <= 1e3 * rel_tol * std::fabs(q.value) + 1e-300);
    if (!ok)
        fail(ErrorKind::QuadratureNonConvergence, std::string(what) + " did not converge: estimate " +
                                                      std::to_string(q.value) + ", achieved error " +
                                                      std::to_string(q.error));
}

// Fixed 10-point Gauss-Legendre on [a, b].
template <class F>
double gauss_legendre(F&& f, double a, double b) {
    return boost::math::quadrature::gauss<double, 10>::integrate(f, a, b);
}

}  // namespace lanemden
