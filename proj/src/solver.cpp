#include "fdabs/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fdabs {

std::string to_string(BoundaryCondition bc) {
    switch (bc) {
        case BoundaryCondition::dirichlet_zero: return "dirichlet_zero";
        case BoundaryCondition::zero_flux: return "zero_flux";
        case BoundaryCondition::dirichlet_data: return "dirichlet_data";
    }
    return "unknown";
}

std::string to_string(AbsorptionMode mode) {
    return mode == AbsorptionMode::split_exact ? "split_exact" : "coupled_implicit";
}

void SolverConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ParameterError("solver config: " + msg); };
    if (!(dt_init > 0.0) || !(dt_max > 0.0)) fail("dt_init and dt_max must be positive");
    if (dt_init > dt_max) fail("dt_init must not exceed dt_max");
    if (!(newton_tol > 0.0)) fail("newton_tol must be positive");
    if (newton_max_iter < 1) fail("newton_max_iter must be >= 1");
    if (!(floor >= 0.0)) fail("floor must be >= 0");
    if (!(dt_growth >= 1.0)) fail("dt_growth must be >= 1");
    if (!(dt_cut > 0.0 && dt_cut < 1.0)) fail("dt_cut must lie in (0, 1)");
    if (!(dt_rel_max >= 0.0)) fail("dt_rel_max must be >= 0");
    if (!(dt_min > 0.0)) fail("dt_min must be positive");
    if (bc == BoundaryCondition::dirichlet_data && !boundary_data) fail("dirichlet_data needs boundary_data");
}

namespace {

// Thomas algorithm for a diagonally dominant tridiagonal system; `lower[0]`
// and `upper[n-1]` are ignored. Overwrites rhs with the solution.
void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag, std::span<const double> upper,
                       std::span<double> rhs, std::vector<double>& scratch) {
    const std::size_t n = diag.size();
    scratch.resize(n);
    double beta = diag[0];
    rhs[0] /= beta;
    for (std::size_t i = 1; i < n; ++i) {
        scratch[i] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * scratch[i];
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= scratch[i + 1] * rhs[i + 1];
}

double positive_pow(double x, double p) { return x > 0.0 ? std::pow(x, p) : 0.0; }

}  // namespace

Field step(const Field& field, double t, double dt, const SolverConfig& config, StepInfo* info) {
    if (!(dt > 0.0)) throw ParameterError("step needs dt > 0");
    const RadialGrid& grid = *field.grid;
    const std::size_t n = grid.n_cells();
    const double m = config.params.m();
    const double q = config.params.q();
    const double inv_m = 1.0 / m;
    const bool coupled = config.absorption && config.absorption_mode == AbsorptionMode::coupled_implicit;

    const auto centers = grid.centers();
    const auto volumes = grid.volumes();
    const auto areas = grid.face_areas();

    // Transmissibilities at interior faces 1..n-1; face 0 is the symmetry axis.
    std::vector<double> trans(n + 1, 0.0);
    for (std::size_t i = 1; i < n; ++i) trans[i] = areas[i] / (centers[i] - centers[i - 1]);
    if (config.bc != BoundaryCondition::zero_flux) trans[n] = areas[n] / (grid.R_max() - centers[n - 1]);
    // The boundary value is taken at the new time level.
    double w_boundary = 0.0;
    if (config.bc == BoundaryCondition::dirichlet_data) {
        const double ub = config.boundary_data(t + dt);
        if (!(ub >= 0.0) || !std::isfinite(ub)) throw ParameterError("boundary data must be finite and >= 0");
        w_boundary = positive_pow(ub, m);
    }

    std::vector<double> ratio(n);
    for (std::size_t i = 0; i < n; ++i) ratio[i] = dt / volumes[i];

    const std::vector<double>& u_old = field.values;
    const double sup_old = *std::max_element(u_old.begin(), u_old.end());
    const double threshold = config.newton_tol * std::max(sup_old, std::numeric_limits<double>::min());

    constexpr double eps = std::numeric_limits<double>::epsilon();
    const double negative_limit =
        -10.0 * eps * std::max(positive_pow(sup_old, m), 1.0);
    int clipped = 0;

    std::vector<double> w(n), u(n), res(n), lower(n), diag(n), upper(n), scratch;
    for (std::size_t i = 0; i < n; ++i) w[i] = positive_pow(u_old[i], m);

    auto flux_div = [&](std::size_t i) {
        const double right = i + 1 < n ? trans[i + 1] * (w[i + 1] - w[i]) : trans[n] * (w_boundary - w[i]);
        const double left = i > 0 ? trans[i] * (w[i] - w[i - 1]) : 0.0;
        return right - left;
    };

    int iter = 0;
    double residual = 0.0;
    double previous_residual = std::numeric_limits<double>::infinity();
    std::vector<double> w_prev;
    int halvings = 0;
    for (;; ++iter) {
        residual = 0.0;
        // Cells whose residual is at the rounding level of its own terms
        // cannot improve further; they count as converged.
        bool converged = true;
        for (std::size_t i = 0; i < n; ++i) {
            u[i] = positive_pow(w[i], inv_m);
            const double left = i > 0 ? trans[i] * (w[i] + w[i - 1]) : 0.0;
            const double right = i + 1 < n ? trans[i + 1] * (w[i + 1] + w[i]) : trans[n] * (w_boundary + w[i]);
            double r = (u[i] - u_old[i]) - ratio[i] * flux_div(i);
            double scale = u[i] + u_old[i] + ratio[i] * (left + right);
            if (coupled) {
                const double a = dt * positive_pow(u[i], q);
                r += a;
                scale += a;
            }
            res[i] = r;
            residual = std::max(residual, std::abs(r));
            if (std::abs(r) > std::max(threshold, 16.0 * eps * scale)) converged = false;
        }
        if (!std::isfinite(residual)) {
            throw NewtonDivergence("non-finite Newton residual", iter, residual);
        }
        if (converged) break;
        // Damping fallback: halve the last update while the residual grows.
        if (residual > previous_residual && halvings < 4 && !w_prev.empty()) {
            ++halvings;
            for (std::size_t i = 0; i < n; ++i) w[i] = w_prev[i] + 0.5 * (w[i] - w_prev[i]);
            continue;
        }
        halvings = 0;
        previous_residual = residual;
        if (iter >= config.newton_max_iter) {
            std::ostringstream os;
            os << "Newton did not converge at t=" << t << " dt=" << dt << " (residual " << residual << ")";
            throw NewtonDivergence(os.str(), iter, residual);
        }
        for (std::size_t i = 0; i < n; ++i) {
            double d = inv_m * positive_pow(w[i], inv_m - 1.0) + ratio[i] * (trans[i] + trans[i + 1]);
            if (coupled) d += dt * q * inv_m * positive_pow(w[i], q * inv_m - 1.0);
            diag[i] = d;
            lower[i] = -ratio[i] * trans[i];
            upper[i] = i + 1 < n ? -ratio[i] * trans[i + 1] : 0.0;
            res[i] = -res[i];
        }
        solve_tridiagonal(lower, diag, upper, res, scratch);
        w_prev = w;
        // Iterates stay above the discrete solution; anything negative is rounding.
        for (std::size_t i = 0; i < n; ++i) {
            w[i] += res[i];
            if (w[i] < 0.0) {
                if (w[i] < negative_limit) {
                    std::ostringstream os;
                    os << "negative Newton iterate w=" << w[i] << " in cell " << i << " at t=" << t;
                    throw std::logic_error(os.str());
                }
                w[i] = 0.0;
                ++clipped;
            }
        }
    }

    Field out{field.grid, std::move(u)};

    if (config.absorption && config.absorption_mode == AbsorptionMode::split_exact) {
        const double qm1 = q - 1.0;
        for (double& v : out.values) {
            if (v > 0.0) v *= std::pow(1.0 + qm1 * dt * std::pow(v, qm1), -1.0 / qm1);
        }
    }
    if (config.floor > 0.0) {
        for (double& v : out.values) {
            if (v < config.floor) {
                v = config.floor;
                ++clipped;
            }
        }
    }
    if (info) *info = StepInfo{iter, residual, clipped};
    return out;
}

std::vector<Snapshot> solve(const SolverConfig& config, const Field& u0, std::span<const double> schedule,
                            SolveStats* stats) {
    config.validate();
    u0.validate();
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        if (!(schedule[i] >= 0.0) || (i > 0 && !(schedule[i] > schedule[i - 1]))) {
            throw ParameterError("output schedule must be nonnegative and strictly increasing");
        }
    }

    SolveStats local;
    local.dt_smallest = std::numeric_limits<double>::infinity();
    std::vector<Snapshot> out;
    out.reserve(schedule.size());

    Field state = u0;
    double t = 0.0;
    double dt = config.dt_init;
    for (double target : schedule) {
        while (t < target) {
            double cap = std::min(dt, config.dt_max);
            if (config.dt_rel_max > 0.0) cap = std::min(cap, std::max(config.dt_rel_max * t, config.dt_init));
            const double remaining = target - t;
            const double pieces = std::max(1.0, std::ceil(remaining / cap * (1.0 - 1e-12)));
            const double dt_try = remaining / pieces;
            StepInfo info;
            try {
                state = step(state, t, dt_try, config, &info);
            } catch (const NewtonDivergence& e) {
                ++local.rejected_steps;
                dt = dt_try * config.dt_cut;
                if (dt < config.dt_min) {
                    throw SolverError(std::string("time step underflow after Newton failure: ") + e.what(), t);
                }
                continue;
            }
            t = pieces == 1.0 ? target : t + dt_try;
            ++local.accepted_steps;
            local.newton_iterations += info.newton_iterations;
            local.clipped += info.clipped;
            local.dt_smallest = std::min(local.dt_smallest, dt_try);
            local.dt_largest = std::max(local.dt_largest, dt_try);
            if (info.newton_iterations <= config.easy_iterations) {
                dt = std::min(std::max(dt, dt_try) * config.dt_growth, config.dt_max);
            }
        }
        out.push_back(make_snapshot(target, state));
    }
    if (local.accepted_steps == 0) local.dt_smallest = 0.0;
    if (stats) *stats = local;
    return out;
}

std::vector<Snapshot> solve(const SolverConfig& config, const GridPtr& grid, const InitialProfile& u0,
                            std::span<const double> schedule, SolveStats* stats) {
    return solve(config, init_field(grid, u0, config.params), schedule, stats);
}

std::vector<double> log_schedule(double t_first, double t_last, int n) {
    if (!(t_first > 0.0) || !(t_last > t_first) || n < 2) {
        throw ParameterError("log schedule needs 0 < t_first < t_last and n >= 2");
    }
    std::vector<double> out(static_cast<std::size_t>(n));
    const double a = std::log(t_first);
    const double b = std::log(t_last);
    for (int i = 0; i < n; ++i) out[i] = std::exp(a + (b - a) * i / (n - 1));
    out.front() = t_first;
    out.back() = t_last;
    return out;
}

}  // namespace fdabs
