#pragma once

// Numerical checks of the a priori bounds and comparison profiles. Every
// check produces a BoundReport whose `passed` flag is worst_margin >= -tol.
// Spatial checks run on the inner half of the computational domain, where
// truncation at R_max has the least influence.

#include "fdabs/field.hpp"
#include "fdabs/params.hpp"
#include "fdabs/rescaler.hpp"

#include <json.hpp>

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdabs {

struct BoundReport {
    std::string check_name;
    std::vector<double> times;
    double worst_margin = 0.0;
    double worst_location = 0.0;  ///< r for physical checks, y for rescaled ones
    double tol = 0.0;
    bool passed = false;
    std::string notes;
};

/// Sets `passed` from the margin and tolerance.
BoundReport finalize(BoundReport report);

/// A check could not be evaluated (e.g. vanishing cells where positivity is
/// expected). The message carries the diagnostic.
class CheckAborted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// factor * |margin_h - margin_h2|, the default tolerance from an h vs h/2 pair.
double refinement_tolerance(double margin_h, double margin_h2, double factor = 5.0);

/// Number of leading cells with center <= R_max / 2.
std::size_t inner_half_count(const RadialGrid& grid);

// Physical-variable checks -------------------------------------------------

/// |d/dr u^((m-1)/2)| <= sqrt((3-m-2q)_+ B0) |u0|^((q-1)/2) + sqrt(B0/t).
/// Margin is right side minus left side (absolute), worst over t > 0 snapshots.
BoundReport check_gradient_estimate(std::span<const Snapshot> snaps, double sup_u0, const Params& params,
                                    double tol);

/// Margin flat_decay_bound(t) - sup u(t).
BoundReport check_upper_bound(std::span<const Snapshot> snaps, double sup_u0, const Params& params, double tol);

/// Relative margin (u - bound)/bound for bound = ell_u(t) (1+r)^(-2/(1-m)),
/// with u(t,0) taken from the first cell.
BoundReport check_lower_bound(std::span<const Snapshot> snaps, double sup_u0, const Params& params, double tol);

/// Minus the least-squares slope of log u against log r on [r_lo, r_hi].
double fit_tail_exponent(const Snapshot& snap, double r_lo, double r_hi);

struct EnvelopeResult {
    std::optional<double> tau;
    double kappa = 0.0;
    bool kappa_at_least_inverse_eps = false;
    BoundReport report;
};

/// First scheduled time at which f = u^(m-1) - eps r^2 has its maximum inside
/// the window: f must be nonincreasing over the outer fifth of the inner-half
/// window. kappa is that maximum. The margin is the smallest relative
/// decrease of f across the outer fifth.
EnvelopeResult check_quadratic_envelope(std::span<const Snapshot> snaps, double eps, const Params& params,
                                        double tol = 1e-12);

/// Relative margin (u - lambda sigma_fde) / (lambda sigma_fde) where sigma_fde
/// solves the pure fast-diffusion problem from the same data and is sampled
/// at the transformed times s(t).
BoundReport check_positivity_transform(std::span<const Snapshot> u_snaps, std::span<const Snapshot> fde_snaps,
                                       double sup_u0, const Params& params, double tol);

/// Times at which the fast-diffusion companion run must be sampled.
std::vector<double> positivity_schedule(std::span<const double> times, double sup_u0, const Params& params);

/// Relative change of the inner-half solution when R_max is doubled
/// (same cell sizes near the origin). A failed report means tail-sensitive
/// checks on the base run are unreliable.
BoundReport boundary_monitor(std::span<const Snapshot> base, std::span<const Snapshot> doubled, double tol);

// Rescaled-variable checks -------------------------------------------------

enum class ResidualKind { sub, super };

struct ResidualSignResult {
    std::vector<double> admissible;  ///< sorted ascending
    std::optional<double> threshold; ///< min admissible (sub) or max admissible (super)
    bool monotone = true;            ///< admissible set is an up-set (sub) or down-set (super) of the grid
    BoundReport report;
};

/// Nodes on [0, y_max] whose spacing grows smoothly from y_max/(10(n-1))
/// at the origin to about 1.9 y_max/(n-1) at the edge.
std::vector<double> residual_nodes(double y_max, int n_nodes);

/// Evaluates (d_s p - L p) / sigma_A for p = w_A (sub) or z_A (super) on
/// residual_nodes(y_max, n_nodes), dropping the outer tenth of the nodes. A is admissible when the residual is <= tol (sub) or >= -tol
/// (super) at every (s, y).
ResidualSignResult check_residual_sign(ResidualKind kind, std::span<const double> A_grid,
                                       std::span<const double> s_grid, double y_max, const Params& params,
                                       double tol, int n_nodes = 1001);

/// Largest normalized residual margin of one profile, exposed for tests:
/// min over nodes of -(residual) for sub and +(residual) for super.
double residual_margin(ResidualKind kind, double A, double s, std::span<const double> y, const Params& params,
                       double* location = nullptr);

/// A above which the sufficient condition of the m < (N-1)/N subsolution
/// argument holds: A^((q-1)/(m-1)) <= min{2^((m+q-2)/(1-m))/(4(q-1)), gamma/2^(m+2)}.
double sufficient_sub_threshold(const Params& params);

/// Lower: (v - c w_A1) / (c w_A1) with c = (1 - gT/s)(1 - gT e^-s).
/// Upper: (z_A2 - v) / z_A2. Both relative, on the inner window.
BoundReport check_sandwich(std::span<const RescaledProfile> series, double A1, double A2, double gamma_T,
                           const Params& params, double tol);

struct SandwichWitness {
    double A1 = 0.0;
    double A2 = 0.0;
    double gamma_T = 0.0;
    BoundReport report;
};

/// Tightest witness: smallest passing A1 from `sub_set`, largest passing A2
/// from `super_set`, smallest passing gamma_T from `gamma_grid`. Returns the
/// best failing combination when nothing passes.
SandwichWitness search_sandwich(std::span<const RescaledProfile> series, std::span<const double> sub_set,
                                std::span<const double> super_set, std::span<const double> gamma_grid,
                                const Params& params, double tol);

/// v(s, first node)^(m-1).
double estimate_A(const RescaledProfile& profile, const Params& params);

struct ConvergenceMetric {
    double sup_abs;   ///< sup_y |v - sigma_{A*}| on the inner window
    double relative;  ///< sup_abs / sigma_{A*}(0)
    double location;
};

ConvergenceMetric convergence_metric(const RescaledProfile& profile, double A_star, const Params& params);

// Serialization --------------------------------------------------------------

/// "name worst_margin tol PASS|FAIL" with shortest round-trip numbers.
std::string to_record(const BoundReport& report);
nlohmann::json to_json(const BoundReport& report);

}  // namespace fdabs
