#pragma once

// Backward-Euler finite-volume integrator for the radial problem
//
//   u_t = r^(1-N) (r^(N-1) (u^m)_r)_r - u^q,   0 < r < R_max,
//
// with zero flux at r = 0 and either w = u^m = 0 or zero flux at R_max.
// The nonlinear system is solved for w = u^m by Newton's method. Since
// w -> w^(1/m) and w -> w^(q/m) are convex and the flux matrix is an
// M-matrix, Newton iterates starting from the previous state stay above the
// discrete solution after the first step, hence nonnegative.

#include "fdabs/field.hpp"
#include "fdabs/params.hpp"

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace fdabs {

/// dirichlet_data imposes u(t, R_max) = SolverConfig::boundary_data(t), e.g.
/// the trace of an exact solution on the truncated domain.
enum class BoundaryCondition { dirichlet_zero, zero_flux, dirichlet_data };
enum class AbsorptionMode { split_exact, coupled_implicit };

struct SolverConfig {
    Params params;
    BoundaryCondition bc = BoundaryCondition::zero_flux;
    double dt_init = 1e-4;
    double dt_max = 1e-1;
    double newton_tol = 1e-14;
    int newton_max_iter = 50;
    AbsorptionMode absorption_mode = AbsorptionMode::split_exact;
    /// Lower clamp applied after each step (0 keeps the exact scheme).
    double floor = 0.0;
    /// Turns the -u^q term off (pure fast diffusion).
    bool absorption = true;
    /// Boundary value of u at R_max for BoundaryCondition::dirichlet_data.
    std::function<double(double)> boundary_data{};

    // Step-size control.
    double dt_growth = 1.2;
    double dt_cut = 0.5;
    /// Grow dt only when Newton needed at most this many iterations.
    int easy_iterations = 5;
    /// If > 0, dt is also capped by dt_rel_max * t (useful on log-spaced schedules).
    double dt_rel_max = 0.0;
    double dt_min = 1e-14;

    /// Throws ParameterError on inconsistent settings.
    void validate() const;
};

/// Newton did not reach newton_tol within newton_max_iter iterations.
class NewtonDivergence : public std::runtime_error {
public:
    NewtonDivergence(const std::string& what, int iterations, double residual)
        : std::runtime_error(what), iterations(iterations), residual(residual) {}
    int iterations;
    double residual;
};

/// Unrecoverable failure inside `solve`, tagged with the time reached.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double t) : std::runtime_error(what), time(t) {}
    double time;
};

struct StepInfo {
    int newton_iterations = 0;
    double residual = 0.0;
    int clipped = 0;  ///< roundoff-level negatives set to zero
};

/// One backward-Euler step of size dt from time t.
Field step(const Field& field, double t, double dt, const SolverConfig& config, StepInfo* info = nullptr);

struct SolveStats {
    int accepted_steps = 0;
    int rejected_steps = 0;
    int newton_iterations = 0;
    int clipped = 0;
    double dt_smallest = 0.0;
    double dt_largest = 0.0;
};

/// Integrates from t = 0 and returns one snapshot per entry of `schedule`
/// (an entry equal to 0 yields the initial state).
std::vector<Snapshot> solve(const SolverConfig& config, const Field& u0, std::span<const double> schedule,
                            SolveStats* stats = nullptr);

std::vector<Snapshot> solve(const SolverConfig& config, const GridPtr& grid, const InitialProfile& u0,
                            std::span<const double> schedule, SolveStats* stats = nullptr);

/// n log-spaced times from t_first to t_last inclusive.
std::vector<double> log_schedule(double t_first, double t_last, int n);

std::string to_string(BoundaryCondition bc);
std::string to_string(AbsorptionMode mode);

}  // namespace fdabs
