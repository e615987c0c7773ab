#pragma once

// Closed-form and brute-force references. Nothing here calls into the
// solver, so the solver can be checked against these independently.

#include "fdabs/params.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace fdabs::oracle {

enum class Method { closed_form, quadrature, dense_ode };

struct OracleResult {
    std::string name;
    std::vector<double> value;
    Method method;
};

std::string to_string(Method method);

/// Exact solution of u' = -u^q, u(0) = u0.
double flat_ode_exact(double t, double u0, const Params& params);

/// Self-similar source solution of u_t = Laplace(u^m):
///   U(t,r) = t^-alpha (C + B0 r^2 t^(-2/(Nm-N+2)))^(1/(m-1)),  alpha = N/(Nm-N+2).
double barenblatt_fde_exact(double t, double r, double C, const Params& params);

/// Sampled oracle values with their provenance.
OracleResult barenblatt_fde_profile(double t, const std::vector<double>& r, double C, const Params& params);

class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Maps of the tail [1, inf) onto a bounded interval; [0, 1] is always
/// integrated in r directly.
enum class MapKind {
    rational,  ///< r = 1/x, x in (0, 1]
    tangent,   ///< r = cot(theta), theta in (0, pi/4]
};

/// Integrand (1 + r)^power * r^weight on [0, inf).
struct PowerIntegrand {
    double power;
    double weight;
};

struct QuadratureResult {
    double value;
    double error_estimate;
    int intervals;
};

/// Adaptive 7/15-point Gauss-Kronrod on the two pieces with global
/// bisection of the worst subinterval until the summed error estimate is
/// below `tol`. Throws QuadratureError when the integrand is not integrable
/// at infinity or the subdivision budget is exhausted.
QuadratureResult integrate_power(MapKind map, PowerIntegrand integrand, double tol, int max_intervals = 20000);

/// Value-only convenience wrapper.
double quadrature(MapKind map, PowerIntegrand integrand, double tol);

}  // namespace fdabs::oracle
