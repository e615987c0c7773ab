#pragma once

// Explicit profiles and bounds for u_t = Laplace(u^m) - u^q.

#include "fdabs/params.hpp"

namespace fdabs {

enum class ProfileKind { barenblatt, subsolution, supersolution };

struct ProfileSpec {
    ProfileKind kind;
    double A;
    double s;  ///< rescaled time; ignored for barenblatt
};

/// sigma_A(r) = (A + B0 r^2)^(1/(m-1)).
double sigma(double A, double r, const Params& params);

/// Barenblatt-based subsolution of the rescaled equation.
/// For m >= (N-1)/N it is sigma_A itself; otherwise sigma_A (1 - gamma/s),
/// which requires s > gamma. Only defined in the critical case.
double subsolution_w(double A, double s, double r, const Params& params);

/// sigma_A(r) (1 + (A + B0 r^2)^delta / s).
double supersolution_z(double A, double s, double r, const Params& params);

/// Analytic s-derivatives of the two comparison profiles.
double subsolution_w_ds(double A, double s, double r, const Params& params);
double supersolution_z_ds(double A, double s, double r, const Params& params);

/// Dispatch on ProfileSpec.
double evaluate(const ProfileSpec& spec, double r, const Params& params);

/// Prefactor of the universal lower bound u(t,x) >= ell_u(t) (1+|x|)^(-2/(1-m)).
double ell_u(double t, double u_center, double sup_u0, const Params& params);

/// Space-independent upper bound (|u0|_inf^(1-q) + (q-1) t)^(-1/(q-1)).
/// Extends continuously to sup_u0 at t = 0.
double flat_decay_bound(double t, double sup_u0, const Params& params);

/// Mass-selection constant of the asymptotic Barenblatt profile, critical case
/// only. Each improper integral is computed to absolute accuracy `quad_tol`.
double compute_A_star(const Params& params, double quad_tol = 1e-13);

struct PositivityTransform {
    double lambda;  ///< e^(-a t)
    double s;       ///< (e^((1-m) a t) - 1) / ((1-m) a)
};

/// Time change mapping a fast-diffusion solution sigma(s, x) onto the
/// subsolution lambda(t) sigma(s(t), x), with a = sup_u0^(q-1).
PositivityTransform positivity_transform(double t, double sup_u0, const Params& params);

}  // namespace fdabs
