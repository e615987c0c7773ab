#pragma once

// Self-similar variables for the critical case q = m + 2/N:
//
//   s = log(T + t),
//   y = r / ((T+t)^(1/(N(q-1))) log(T+t)^((1-m)/(2(q-1)))),
//   v = ((T+t) log(T+t))^(1/(q-1)) u,
//
// and finite-difference evaluation of the rescaled operators on radial
// profiles sampled at arbitrary increasing nodes.

#include "fdabs/field.hpp"
#include "fdabs/params.hpp"

#include <span>
#include <vector>

namespace fdabs {

struct RescaledProfile {
    double s;
    double T;
    std::vector<double> y;
    std::vector<double> values;
    /// Grid the profile was sampled from; kept so the map can be inverted.
    GridPtr source_grid;
};

/// Amplitude and length factors of the change of variables at T + t.
struct SelfSimilarScales {
    double s;
    double amplitude;  ///< ((T+t) log(T+t))^(1/(q-1))
    double length;     ///< (T+t)^(1/(N(q-1))) log(T+t)^((1-m)/(2(q-1)))
};

/// Throws ParameterError unless T + t > 1 and params is critical.
SelfSimilarScales selfsimilar_scales(double t, double T, const Params& params);

/// Requires T >= 1 and T + snap.t > 1.
RescaledProfile to_selfsimilar(const Snapshot& snap, double T, const Params& params);
Snapshot from_selfsimilar(const RescaledProfile& profile, const Params& params);

/// Laplace(v^m) + (N v + y v') / (N(q-1)), the s-independent part.
std::vector<double> autonomous_residual(std::span<const double> values, std::span<const double> y,
                                        const Params& params);

/// Autonomous part plus the three explicit 1/s terms
///   (v + (1-m)/2 y v') / ((q-1) s) - v^q / s.
std::vector<double> nonautonomous_residual(std::span<const double> values, std::span<const double> y, double s,
                                           const Params& params);

/// The 1/s terms alone, evaluated with the same discrete derivative; the
/// difference of the two residuals equals this vector exactly.
std::vector<double> explicit_s_terms(std::span<const double> values, std::span<const double> y, double s,
                                     const Params& params);

/// Discrete radial derivatives used by the residuals, exposed for tests.
struct RadialDerivatives {
    std::vector<double> first;      ///< f'(y_i), zero at y = 0
    std::vector<double> laplacian;  ///< f'' + (N-1)/y f'
};

/// Three-point stencils in the interior with the even reflection
/// f(-y_0) = f(y_0) at the first node and a four-point one-sided stencil
/// at the last node. Needs at least 5 increasing nonnegative nodes.
RadialDerivatives radial_derivatives(std::span<const double> f, std::span<const double> y, int N);

}  // namespace fdabs
