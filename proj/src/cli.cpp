#include "fdabs/cli.hpp"

#include "fdabs/io.hpp"
#include "fdabs/oracle.hpp"
#include "fdabs/profiles.hpp"
#include "fdabs/rescaler.hpp"
#include "fdabs/solver.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace fdabs::cli {

namespace fs = std::filesystem;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

std::ofstream open_output(const fs::path& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write '" + path.string() + "'");
    return os;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

std::string join(std::span<const double> values, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += sep;
        out += format_double(values[i]);
    }
    return out;
}

std::vector<double> times_of(std::span<const Snapshot> snaps) {
    std::vector<double> t;
    for (const Snapshot& s : snaps) t.push_back(s.t);
    return t;
}

/// One integration of the configured problem on one grid.
struct RunData {
    Params params;
    GridPtr grid;
    SolverConfig solver;
    std::vector<Snapshot> snaps;
    double sup_u0 = 0.0;
};

class Runner {
public:
    Runner(const RunConfig& cfg, std::ostream& log) : cfg_(cfg), params_(cfg.params()), log_(log) {}

    VerifyOutcome verify();
    void solve_only();

private:
    // Problem setup ---------------------------------------------------------
    SolverConfig solver_for(const GridPtr& grid, bool refined) const {
        SolverConfig s = cfg_.solver;
        s.params = params_;
        if (refined) {
            s.dt_init *= 0.5;
            s.dt_max *= 0.5;
            s.dt_rel_max *= 0.5;
        }
        if (s.bc == BoundaryCondition::dirichlet_data) {
            const double A = std::get<initial::Barenblatt>(*cfg_.initial).A;
            const double R = grid->R_max();
            const Params p = params_;
            s.boundary_data = [A, R, p](double t) { return oracle::barenblatt_fde_exact(t + 1.0, R, A, p); };
        }
        return s;
    }

    RunData integrate(GridPtr grid, bool refined) const {
        RunData rd{params_, grid, solver_for(grid, refined), {}, 0.0};
        const Field u0 = init_field(grid, *cfg_.initial, params_);
        rd.sup_u0 = observables(u0).sup;
        SolveStats stats;
        rd.snaps = solve(rd.solver, u0, cfg_.schedule, &stats);
        log_ << "solve: n_cells=" << grid->n_cells() << " R_max=" << format_double(grid->R_max())
             << " steps=" << stats.accepted_steps << " rejected=" << stats.rejected_steps << "\n";
        return rd;
    }

    RunData& base() {
        if (!base_) base_ = integrate(build_grid(cfg_.N, cfg_.grid.R_max, cfg_.grid.n_cells, cfg_.grid.stretch), false);
        return *base_;
    }

    /// Twice the cells with the square root of the stretch: every width
    /// roughly halves. Time steps halve as well.
    RunData& refined() {
        if (!refined_) {
            refined_ = integrate(
                build_grid(cfg_.N, cfg_.grid.R_max, 2 * cfg_.grid.n_cells, std::sqrt(cfg_.grid.stretch)), true);
        }
        return *refined_;
    }

    /// R_max doubled while keeping the cells near the origin.
    RunData& doubled() {
        if (!doubled_) {
            const double s = cfg_.grid.stretch;
            int n = 2 * cfg_.grid.n_cells;
            if (s > 1.0) {
                const double target = 2.0 * (std::pow(s, cfg_.grid.n_cells) - 1.0) + 1.0;
                n = static_cast<int>(std::lround(std::log(target) / std::log(s)));
            }
            doubled_ = integrate(build_grid(cfg_.N, 2.0 * cfg_.grid.R_max, n, s), false);
        }
        return *doubled_;
    }

    std::vector<Snapshot> select(const RunData& rd, std::span<const double> times, const std::string& check,
                                 bool positive_only = false) const {
        std::vector<Snapshot> out;
        if (times.empty()) {
            for (const Snapshot& s : rd.snaps) {
                if (!positive_only || s.t > 0.0) out.push_back(s);
            }
        } else {
            for (double t : times) {
                const auto it = std::find_if(rd.snaps.begin(), rd.snaps.end(), [t](const Snapshot& s) {
                    return std::abs(s.t - t) <= 1e-12 * std::max(1.0, std::abs(t));
                });
                if (it == rd.snaps.end()) {
                    throw ConfigError("check " + check + ": time " + format_double(t) + " is not in [schedule] times");
                }
                out.push_back(*it);
            }
        }
        if (out.empty()) throw ConfigError("check " + check + ": no snapshots selected");
        return out;
    }

    // Checks -----------------------------------------------------------------
    void constants_check(const CheckEntry& e, const checks::Constants& c) {
        const Constants k = derive_constants(params_);
        double worst = 0.0;
        std::string where = "no expected values given";
        bool compared = false;
        auto cmp = [&](const std::optional<double>& expected, double actual, const char* label) {
            if (!expected) return;
            const double d = std::abs(actual - *expected);
            if (!compared || d > worst) {
                worst = d;
                where = std::string("largest deviation in ") + label + "=" + format_double(actual);
            }
            compared = true;
        };
        cmp(c.B0, k.B0, "B0");
        cmp(c.q_star, k.q_star, "q_star");
        cmp(c.k, k.k, "k");
        cmp(c.delta, k.delta, "delta");
        add(finalize(BoundReport{e.name, {}, -worst, 0.0, c.tol, false, where}));
        if (c.A_star) {
            const double a = compute_A_star(params_);
            add(finalize(BoundReport{e.name + "_A_star", {}, -std::abs(a - *c.A_star), 0.0, c.A_star_tol, false,
                                     "A_star=" + format_double(a)}));
        }
    }

    void flat_ode_check(const CheckEntry& e, const checks::FlatOde& f) {
        const auto* constant = std::get_if<initial::Constant>(&*cfg_.initial);
        if (!constant) throw ConfigError("check " + e.name + " needs [initial] kind = constant");
        const RunData& rd = base();
        double worst = 0.0, where = 0.0;
        for (const Snapshot& s : rd.snaps) {
            const double exact = oracle::flat_ode_exact(s.t, constant->height, params_);
            for (double v : s.field.values) {
                const double err = std::abs(v - exact) / exact;
                if (err > worst) {
                    worst = err;
                    where = s.t;
                }
            }
        }
        BoundReport rep{e.name, times_of(rd.snaps), -worst, 0.0, f.tol, false,
                        "max relative error over cells; worst at t=" + format_double(where)};
        add(finalize(rep));
    }

    double oracle_error(const RunData& rd, std::span<const double> times, const std::string& check) const {
        const double A = std::get<initial::Barenblatt>(*cfg_.initial).A;
        double worst = 0.0;
        for (const Snapshot& s : select(rd, times, check, true)) {
            const std::size_t count = inner_half_count(*rd.grid);
            const auto r = rd.grid->centers();
            const auto vol = rd.grid->volumes();
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < count; ++i) {
                const double exact = oracle::barenblatt_fde_exact(s.t + 1.0, r[i], A, params_);
                num += vol[i] * std::abs(s.field.values[i] - exact);
                den += vol[i] * exact;
            }
            worst = std::max(worst, num / den);
        }
        return worst;
    }

    void barenblatt_check(const CheckEntry& e, const checks::BarenblattOracle& b) {
        if (!std::holds_alternative<initial::Barenblatt>(*cfg_.initial) || cfg_.solver.absorption) {
            throw ConfigError("check " + e.name + " needs kind = barenblatt and absorption = false");
        }
        const double err = oracle_error(base(), b.times, e.name);
        add(finalize(BoundReport{e.name, times_of(select(base(), b.times, e.name, true)), -err, 0.0, b.tol, false,
                                 "inner half-domain relative L1 error " + format_double(err)}));
        if (b.min_ratio) {
            const double err2 = oracle_error(refined(), b.times, e.name);
            const double ratio = err2 > 0.0 ? err / err2 : inf;
            add(finalize(BoundReport{e.name + "_ratio", {}, ratio - *b.min_ratio, 0.0, 0.0, false,
                                     "error ratio " + format_double(ratio) + " under (h, dt) -> (h/2, dt/2); error(h/2)=" +
                                         format_double(err2)}));
        }
    }

    void stationarity_check(const CheckEntry& e, const checks::Stationarity& st) {
        double worst_order = inf;
        double worst_A = 0.0;
        std::ostringstream notes;
        notes << "orders";
        for (double A : st.A) {
            if (!(A > 0.0)) throw ConfigError("check " + e.name + ": A must be positive");
            std::vector<double> errors;
            for (int k = 0; k < st.levels; ++k) {
                const double h = st.h / std::ldexp(1.0, k);
                std::vector<double> y, v;
                for (double x = 0.5 * h; x <= st.y_max + 1e-12; x += h) {
                    y.push_back(x);
                    v.push_back(sigma(A, x, params_));
                }
                const auto res = autonomous_residual(v, y, params_);
                double worst = 0.0;
                for (std::size_t i = 0; i < y.size() && y[i] <= st.window; ++i) worst = std::max(worst, std::abs(res[i]));
                errors.push_back(worst);
            }
            notes << " A=" << format_double(A) << ":";
            for (std::size_t k = 1; k < errors.size(); ++k) {
                const double order = std::log2(errors[k - 1] / errors[k]);
                notes << (k > 1 ? "," : "") << std::setprecision(4) << order;
                if (!(order >= worst_order)) {
                    worst_order = order;
                    worst_A = A;
                }
            }
        }
        add(finalize(BoundReport{e.name, {}, worst_order - st.min_order, worst_A, 0.0, false,
                                 notes.str() + "; location is the worst A"}));
    }

    BoundReport evaluate_bound(const std::string& type, const checks::Bound& b, RunData& rd, const std::string& name) {
        if (type == "gradient") {
            return check_gradient_estimate(select(rd, b.times, name, true), rd.sup_u0, params_, 0.0);
        }
        if (type == "upper_bound") return check_upper_bound(select(rd, b.times, name), rd.sup_u0, params_, 0.0);
        if (type == "lower_bound") {
            return check_lower_bound(select(rd, b.times, name, true), rd.sup_u0, params_, 0.0);
        }
        if (type == "envelope") {
            return check_quadratic_envelope(select(rd, b.times, name, true), b.eps, params_, 0.0).report;
        }
        // positivity_transform: companion pure fast-diffusion run at s(t).
        const auto snaps = select(rd, b.times, name, true);
        std::vector<double> times;
        for (const Snapshot& s : snaps) times.push_back(s.t);
        SolverConfig fde = rd.solver;
        fde.absorption = false;
        const auto fde_times = positivity_schedule(times, rd.sup_u0, params_);
        const auto fde_snaps = solve(fde, init_field(rd.grid, *cfg_.initial, params_), fde_times);
        return check_positivity_transform(snaps, fde_snaps, rd.sup_u0, params_, 0.0);
    }

    void bound_check(const CheckEntry& e, const checks::Bound& b) {
        BoundReport rep = evaluate_bound(e.type, b, base(), e.name);
        if (b.tol) {
            rep.tol = *b.tol;
        } else if (cfg_.default_tol) {
            rep.tol = *cfg_.default_tol;
        } else {
            const BoundReport fine = evaluate_bound(e.type, b, refined(), e.name);
            rep.tol = refinement_tolerance(rep.worst_margin, fine.worst_margin, cfg_.refine_factor);
            rep.notes += "; tol = " + format_double(cfg_.refine_factor) + " x |margin(h) - margin(h/2)|, margin(h/2)=" +
                         format_double(fine.worst_margin);
        }
        rep.check_name = e.name;
        add(finalize(rep));
    }

    void tail_check(const CheckEntry& e, const checks::TailFit& f) {
        const std::vector<double> t{f.time};
        const Snapshot snap = select(base(), t, e.name).front();
        const double hi = f.r_hi.value_or(0.5 * cfg_.grid.R_max);
        const double target = f.target.value_or(2.0 / (1.0 - params_.m()));
        const double p = fit_tail_exponent(snap, f.r_lo, hi);
        const double rel = std::abs(p - target) / target;
        add(finalize(BoundReport{e.name, {f.time}, f.rel_tol - rel, f.r_lo, 0.0, false,
                                 "exponent " + format_double(p) + " vs " + format_double(target) + " on [" +
                                     format_double(f.r_lo) + ", " + format_double(hi) + "]; margin = rel_tol - relative deviation"}));
    }

    void monitor_check(const CheckEntry& e, const checks::BoundaryMonitor& b) {
        BoundReport rep = boundary_monitor(select(base(), b.times, e.name), select(doubled(), b.times, e.name), b.tol);
        rep.check_name = e.name;
        monitor_failed_ = monitor_failed_ || !rep.passed;
        add(rep);
    }

    ResidualSignResult residual_search(ResidualKind kind, std::span<const double> A, std::span<const double> s,
                                       double y_max, const Params& p, double tol, int nodes,
                                       const std::string& name) const {
        try {
            return check_residual_sign(kind, A, s, y_max, p, tol, nodes);
        } catch (const ParameterError& ex) {
            throw ConfigError("check " + name + ": " + ex.what());
        }
    }

    void write_admissible(const std::string& name, std::span<const double> A, const ResidualSignResult& res) const {
        std::ofstream os = open_output(cfg_.out_dir / ("residual_" + name + ".csv"));
        os << "A,admissible\n";
        for (double a : A) {
            const bool ok = std::find(res.admissible.begin(), res.admissible.end(), a) != res.admissible.end();
            os << format_double(a) << "," << (ok ? 1 : 0) << "\n";
        }
    }

    void residual_check(const CheckEntry& e, const checks::ResidualSign& r) {
        Params p = params_;
        if (r.N || r.m) {
            try {
                p = Params::critical_case(r.N.value_or(cfg_.N), r.m.value_or(cfg_.m));
            } catch (const ParameterError& ex) {
                throw ConfigError("check " + e.name + ": " + ex.what());
            }
        }
        const ResidualKind kind = r.kind == "sub" ? ResidualKind::sub : ResidualKind::super;
        const auto res = residual_search(kind, r.A, r.s, r.y_max, p, r.tol, r.nodes, e.name);
        BoundReport rep = res.report;
        rep.check_name = e.name;
        rep.notes += "; " + p.describe() + "; admissible count " + std::to_string(res.admissible.size()) +
                     (res.monotone ? "" : "; admissible set not monotone");
        add(rep);
        write_admissible(e.name, r.A, res);
        if (r.max_threshold) {
            const bool sufficient = *r.max_threshold == "sufficient";
            const double bound = sufficient ? sufficient_sub_threshold(p) : parse_double(*r.max_threshold);
            const double margin = res.threshold ? bound - *res.threshold : -inf;
            add(finalize(BoundReport{e.name + "_threshold", {}, margin, res.threshold.value_or(0.0), 0.0, false,
                                     "threshold " + (res.threshold ? format_double(*res.threshold) : "none") +
                                         " vs " + (sufficient ? "sufficient bound " : "bound ") + format_double(bound)}));
        }
        if (r.require_unit_interval) {
            double margin = -1.0, where = 0.0;
            for (double a : res.admissible) {
                const double inside = std::min(a, 1.0 - a);
                if (inside > margin) {
                    margin = inside;
                    where = a;
                }
            }
            add(finalize(BoundReport{e.name + "_unit_interval", {}, margin, where, 0.0, false,
                                     "admissible values inside (0, 1): margin is the distance to the nearest end"}));
        }
    }

    void sandwich_check(const CheckEntry& e, const checks::Sandwich& w) {
        if (!params_.critical()) throw ConfigError("check " + e.name + " needs critical q");
        const RunData& rd = base();
        std::vector<RescaledProfile> series;
        std::vector<double> times;
        for (const Snapshot& s : rd.snaps) {
            if (w.T + s.t > 1.0 && w.T >= 1.0) {
                series.push_back(to_selfsimilar(s, w.T, params_));
                times.push_back(s.t);
            }
        }
        if (series.size() < 3) throw ConfigError("check " + e.name + ": needs >= 3 snapshots with T + t > 1");
        const double s0 = derive_constants(params_).s0;
        if (std::log(w.T) < s0) {
            throw ConfigError("check " + e.name + ": T = " + format_double(w.T) + " is below e^s0 = " +
                              format_double(std::exp(s0)));
        }
        const auto sub = residual_search(ResidualKind::sub, w.A, w.sub_s, w.sub_y_max, params_, w.residual_tol, 1001,
                                         e.name);
        const auto sup = residual_search(ResidualKind::super, w.A, w.super_s, w.super_y_max, params_,
                                         w.residual_tol, 1001, e.name);
        const SandwichWitness wit = search_sandwich(series, sub.admissible, sup.admissible, w.gamma, params_, w.tol);
        BoundReport rep = wit.report;
        rep.check_name = e.name;
        add(rep);

        const double A_star = compute_A_star(params_);
        std::vector<double> A_est, metric;
        {
            std::ofstream os = open_output(cfg_.out_dir / "rescaled.csv");
            os << "t,s,A_estimate,metric_sup_abs,metric_relative,metric_location\n";
            for (std::size_t k = 0; k < series.size(); ++k) {
                const auto cm = convergence_metric(series[k], A_star, params_);
                A_est.push_back(estimate_A(series[k], params_));
                metric.push_back(cm.sup_abs);
                os << format_double(times[k]) << "," << format_double(series[k].s) << "," << format_double(A_est.back())
                   << "," << format_double(cm.sup_abs) << "," << format_double(cm.relative) << ","
                   << format_double(cm.location) << "\n";
            }
        }
        if (cfg_.write_snapshots) {
            ensure_dir(cfg_.out_dir / "profiles");
            for (std::size_t k = 0; k < series.size(); ++k) {
                std::ostringstream name;
                name << "profile_" << std::setw(4) << std::setfill('0') << k << ".dat";
                std::ofstream os = open_output(cfg_.out_dir / "profiles" / name.str());
                write_profile(os, series[k]);
            }
        }
        if (!w.trend) return;

        // Distance to A* over the trend window must shrink at every step.
        double step_margin = inf, step_at = 0.0;
        int window = 0;
        for (std::size_t k = 0; k + 1 < series.size(); ++k) {
            if (times[k] < w.trend_from) continue;
            ++window;
            const double gain = (std::abs(A_est[k] - A_star) - std::abs(A_est[k + 1] - A_star)) / A_star;
            if (gain < step_margin) {
                step_margin = gain;
                step_at = series[k + 1].s;
            }
        }
        if (window == 0) step_margin = -inf;
        add(finalize(BoundReport{e.name + "_A_trend", {}, step_margin, step_at, 0.0, false,
                                 "smallest decrease of |A(s) - A*| / A* between consecutive points from t=" +
                                     format_double(w.trend_from) + "; A*=" + format_double(A_star)}));

        const std::size_t first = series.size() >= static_cast<std::size_t>(w.metric_points)
                                      ? series.size() - static_cast<std::size_t>(w.metric_points)
                                      : 0;
        double metric_margin = inf, metric_at = 0.0;
        for (std::size_t k = first; k + 1 < series.size(); ++k) {
            const double gain = (metric[k] - metric[k + 1]) / metric[k];
            if (gain < metric_margin) {
                metric_margin = gain;
                metric_at = series[k + 1].s;
            }
        }
        add(finalize(BoundReport{e.name + "_metric_trend", {}, metric_margin, metric_at, 0.0, false,
                                 "smallest relative decrease of the convergence metric over the last " +
                                     std::to_string(w.metric_points) + " points"}));

        const double final_rel = std::abs(A_est.back() - A_star) / A_star;
        add(finalize(BoundReport{e.name + "_A_final", {}, w.max_rel_error - final_rel, series.back().s, 0.0, false,
                                 "A(s_final)=" + format_double(A_est.back()) + ", relative distance " +
                                     format_double(final_rel) + " to A*"}));
    }

    void comparison_check(const CheckEntry& e, const checks::Comparison& c) {
        const GridPtr grid = build_grid(cfg_.N, cfg_.grid.R_max, cfg_.grid.n_cells, cfg_.grid.stretch);
        const SolverConfig sc = solver_for(grid, false);
        if (sc.bc == BoundaryCondition::dirichlet_data) throw ConfigError("check " + e.name + " needs a homogeneous bc");
        std::mt19937_64 rng(c.seed);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        constexpr int knots = 9;
        double worst = inf, where = 0.0;
        int worst_pair = -1;
        for (int pair = 0; pair < c.pairs; ++pair) {
            initial::Table lo, hi;
            for (int j = 0; j < knots; ++j) {
                const double r = cfg_.grid.R_max * j / (knots - 1);
                double a = uni(rng) < 0.3 ? 0.0 : 2.0 * uni(rng);
                const double gap = uni(rng) < 0.3 ? 0.0 : uni(rng);
                if (j == 0 && a == 0.0) a = 1.0;
                lo.r.push_back(r);
                hi.r.push_back(r);
                lo.u.push_back(a);
                hi.u.push_back(a + gap);
            }
            const auto s_lo = solve(sc, grid, lo, cfg_.schedule);
            const auto s_hi = solve(sc, grid, hi, cfg_.schedule);
            const auto centers = grid->centers();
            for (std::size_t k = 0; k < s_lo.size(); ++k) {
                for (std::size_t i = 0; i < centers.size(); ++i) {
                    const double d = s_hi[k].field.values[i] - s_lo[k].field.values[i];
                    if (d < worst) {
                        worst = d;
                        where = centers[i];
                        worst_pair = pair;
                    }
                }
            }
        }
        add(finalize(BoundReport{e.name, cfg_.schedule, worst, where, c.tol, false,
                                 std::to_string(c.pairs) + " random ordered pairs, seed " + std::to_string(c.seed) +
                                     "; margin is min(u_hi - u_lo), worst in pair " + std::to_string(worst_pair)}));
    }

    void add(BoundReport rep) {
        static const std::set<std::string> tail_sensitive{"tail_fit", "lower_bound", "envelope", "sandwich"};
        if (monitor_failed_ && tail_sensitive.count(current_type_)) rep.notes += "; unreliable: boundary monitor failed";
        log_ << to_record(rep) << "  # " << rep.notes << "\n";
        reports_.push_back(std::move(rep));
    }

    void write_observables() {
        const RunData& rd = base();
        if (cfg_.format == ReportFormat::json) {
            nlohmann::json rows = nlohmann::json::array();
            for (const Snapshot& s : rd.snaps) {
                rows.push_back({{"t", s.t}, {"mass", s.mass}, {"sup", s.sup}, {"center_value", s.center_value}});
            }
            open_output(cfg_.out_dir / "observables.json") << rows.dump(2) << "\n";
        }
        std::ofstream os = open_output(cfg_.out_dir / "observables.csv");
        os << "t,mass,sup,center_value\n";
        for (const Snapshot& s : rd.snaps) {
            os << format_double(s.t) << "," << format_double(s.mass) << "," << format_double(s.sup) << ","
               << format_double(s.center_value) << "\n";
        }
    }

    void write_snapshots() {
        const RunData& rd = base();
        ensure_dir(cfg_.out_dir / "snapshots");
        const Header extra{{"m", format_double(params_.m())}, {"q", format_double(params_.q())}};
        for (std::size_t k = 0; k < rd.snaps.size(); ++k) {
            std::ostringstream name;
            name << "snap_" << std::setw(4) << std::setfill('0') << k << ".dat";
            write_snapshot(cfg_.out_dir / "snapshots" / name.str(), rd.snaps[k], extra);
        }
    }

    void write_reports() const {
        std::ofstream csv = open_output(cfg_.out_dir / "report.csv");
        csv << "check,passed,worst_margin,tol,worst_location,times,notes\n";
        nlohmann::json list = nlohmann::json::array();
        for (const BoundReport& r : reports_) {
            csv << csv_field(r.check_name) << "," << (r.passed ? "true" : "false") << "," << format_double(r.worst_margin)
                << "," << format_double(r.tol) << "," << format_double(r.worst_location) << ","
                << csv_field(join(r.times, ";")) << "," << csv_field(r.notes) << "\n";
            list.push_back(to_json(r));
        }
        const bool ok = std::all_of(reports_.begin(), reports_.end(), [](const BoundReport& r) { return r.passed; });
        nlohmann::json doc{{"all_passed", ok}, {"params", params_.describe()}, {"reports", list}};
        open_output(cfg_.out_dir / "report.json") << doc.dump(2) << "\n";
    }

    const RunConfig& cfg_;
    Params params_;
    std::ostream& log_;
    std::optional<RunData> base_, refined_, doubled_;
    std::vector<BoundReport> reports_;
    bool monitor_failed_ = false;
    std::string current_type_;
};

VerifyOutcome Runner::verify() {
    ensure_dir(cfg_.out_dir);
    // The monitor goes first so tail-sensitive reports can be annotated.
    std::vector<const CheckEntry*> order;
    for (const auto& e : cfg_.checks) {
        if (e.type == "boundary_monitor") order.push_back(&e);
    }
    for (const auto& e : cfg_.checks) {
        if (e.type != "boundary_monitor") order.push_back(&e);
    }
    for (const CheckEntry* e : order) {
        current_type_ = e->type;
        std::visit(
            [&](const auto& spec) {
                using S = std::decay_t<decltype(spec)>;
                if constexpr (std::is_same_v<S, checks::Constants>) constants_check(*e, spec);
                else if constexpr (std::is_same_v<S, checks::FlatOde>) flat_ode_check(*e, spec);
                else if constexpr (std::is_same_v<S, checks::BarenblattOracle>) barenblatt_check(*e, spec);
                else if constexpr (std::is_same_v<S, checks::Stationarity>) stationarity_check(*e, spec);
                else if constexpr (std::is_same_v<S, checks::Bound>) bound_check(*e, spec);
                else if constexpr (std::is_same_v<S, checks::TailFit>) tail_check(*e, spec);
                else if constexpr (std::is_same_v<S, checks::BoundaryMonitor>) monitor_check(*e, spec);
                else if constexpr (std::is_same_v<S, checks::ResidualSign>) residual_check(*e, spec);
                else if constexpr (std::is_same_v<S, checks::Sandwich>) sandwich_check(*e, spec);
                else comparison_check(*e, spec);
            },
            e->spec);
    }
    if (base_) {
        write_observables();
        if (cfg_.write_snapshots) write_snapshots();
    }
    write_reports();
    return VerifyOutcome{reports_};
}

void Runner::solve_only() {
    ensure_dir(cfg_.out_dir);
    if (!cfg_.initial || cfg_.schedule.empty()) throw ConfigError("solve needs [initial] and [schedule] sections");
    write_observables();
    write_snapshots();
}

template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const ParameterError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const FormatError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const CheckAborted& e) {
        err << "check aborted: " << e.what() << "\n";
        return exit_check_failed;
    } catch (const SolverError& e) {
        err << "solver failure at t=" << format_double(e.time) << ": " << e.what() << "\n";
        return exit_solver;
    } catch (const std::exception& e) {
        err << "run failure: " << e.what() << "\n";
        return exit_solver;
    }
}

RunConfig load_with(const fs::path& path, const Overrides& overrides) {
    RunConfig cfg = load_config(path);
    apply(overrides, cfg);
    return cfg;
}

}  // namespace

std::string csv_field(const std::string& value) {
    if (value.find_first_of(",\"\n\r") == std::string::npos) return value;
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

void apply(const Overrides& overrides, RunConfig& config) {
    if (overrides.out_dir) config.out_dir = *overrides.out_dir;
    if (overrides.tol) {
        if (!(*overrides.tol > 0.0)) throw ConfigError("--tol must be positive");
        config.default_tol = *overrides.tol;
    }
    if (overrides.format) config.format = *overrides.format;
}

bool VerifyOutcome::all_passed() const {
    return std::all_of(reports.begin(), reports.end(), [](const BoundReport& r) { return r.passed; });
}

VerifyOutcome run_verify(const RunConfig& config, std::ostream& log) {
    Runner runner(config, log);
    return runner.verify();
}

void run_solve(const RunConfig& config, std::ostream& log) {
    Runner runner(config, log);
    runner.solve_only();
}

int cmd_solve(const fs::path& config_path, const Overrides& overrides, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig cfg = load_with(config_path, overrides);
        run_solve(cfg, out);
        out << "wrote " << (cfg.out_dir / "observables.csv").string() << "\n";
        return int{exit_ok};
    });
}

int cmd_verify(const fs::path& config_path, const Overrides& overrides, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig cfg = load_with(config_path, overrides);
        if (cfg.checks.empty()) throw ConfigError("verify needs a non-empty [checks] names list");
        const VerifyOutcome outcome = run_verify(cfg, out);
        const bool ok = outcome.all_passed();
        out << (ok ? "all checks passed" : "some checks failed") << " (" << (cfg.out_dir / "report.csv").string()
            << ")\n";
        return int{ok ? exit_ok : exit_check_failed};
    });
}

int cmd_astar(int N, double m, std::optional<double> tol, ReportFormat format, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Params p = Params::critical_case(N, m);
        const double quad_tol = tol.value_or(1e-13);
        if (!(quad_tol > 0.0)) throw ConfigError("--tol must be positive");
        const double a = compute_A_star(p, quad_tol);
        if (format == ReportFormat::json) {
            nlohmann::json j{{"N", N}, {"m", m}, {"q", p.q()}, {"A_star", a}, {"quad_tol", quad_tol}};
            out << j.dump() << "\n";
        } else {
            out << format_double(a) << "\n";
        }
        return int{exit_ok};
    });
}

std::vector<std::pair<int, double>> sweep_points(const SweepSpec& sweep) {
    std::vector<std::pair<int, double>> out;
    for (int N : sweep.N) {
        for (double m : sweep.m) {
            const std::pair<int, double> p{N, m};
            if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
        }
    }
    return out;
}

int cmd_sweep(const fs::path& config_path, const Overrides& overrides, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig base = load_with(config_path, overrides);
        if (!base.sweep) throw ConfigError("sweep needs a [sweep] section");
        if (base.checks.empty()) throw ConfigError("sweep needs a non-empty [checks] names list");
        if (overrides.threads < 1) throw ConfigError("--threads must be >= 1");
        ensure_dir(base.out_dir);
        const auto points = sweep_points(*base.sweep);

        struct Row {
            int exit_code = exit_ok;
            std::string q = "";
            std::size_t checks = 0;
            std::size_t failed = 0;
            std::string worst_check;
            double worst_margin = 0.0;
            std::string log;
        };
        std::vector<Row> rows(points.size());
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next++; i < points.size(); i = next++) {
                Row& row = rows[i];
                std::ostringstream log, errs;
                row.exit_code = guarded(errs, [&] {
                    RunConfig cfg = base;
                    cfg.set_exponents(points[i].first, points[i].second);
                    row.q = format_double(cfg.params().q());
                    std::ostringstream dir;
                    dir << "run_" << std::setw(3) << std::setfill('0') << i;
                    cfg.out_dir = base.out_dir / dir.str();
                    const VerifyOutcome outcome = run_verify(cfg, log);
                    row.checks = outcome.reports.size();
                    double worst = inf;
                    for (const BoundReport& r : outcome.reports) {
                        if (!r.passed) ++row.failed;
                        if (r.worst_margin + r.tol < worst) {
                            worst = r.worst_margin + r.tol;
                            row.worst_check = r.check_name;
                            row.worst_margin = r.worst_margin;
                        }
                    }
                    return int{outcome.all_passed() ? exit_ok : exit_check_failed};
                });
                row.log = log.str() + errs.str();
            }
        };
        std::vector<std::thread> pool;
        const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(overrides.threads), points.size());
        for (std::size_t k = 1; k < n_threads; ++k) pool.emplace_back(worker);
        worker();
        for (auto& t : pool) t.join();

        std::ofstream csv = open_output(base.out_dir / "sweep.csv");
        csv << "index,N,m,q,exit_code,checks,failed,worst_check,worst_margin\n";
        int failures = 0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            const Row& r = rows[i];
            csv << i << "," << points[i].first << "," << format_double(points[i].second) << "," << r.q << ","
                << r.exit_code << "," << r.checks << "," << r.failed << "," << csv_field(r.worst_check) << ","
                << (r.worst_check.empty() ? "" : format_double(r.worst_margin)) << "\n";
            out << "[run " << i << "] N=" << points[i].first << " m=" << format_double(points[i].second)
                << " exit=" << r.exit_code << "\n"
                << r.log;
            if (r.exit_code != exit_ok) {
                ++failures;
                err << "sweep point " << i << " (N=" << points[i].first << ", m=" << format_double(points[i].second)
                    << ") failed with exit code " << r.exit_code << "\n";
            }
        }
        out << points.size() - static_cast<std::size_t>(failures) << "/" << points.size() << " runs passed ("
            << (base.out_dir / "sweep.csv").string() << ")\n";
        return int{failures ? exit_sweep_partial : exit_ok};
    });
}

int cmd_report(const fs::path& out_dir, ReportFormat format, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const fs::path path = out_dir / "report.json";
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot read '" + path.string() + "'");
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("malformed '" + path.string() + "': " + e.what());
        }
        if (!doc.contains("reports") || !doc["reports"].is_array()) {
            throw ConfigError("'" + path.string() + "' has no reports array");
        }
        bool ok = true;
        std::size_t failed = 0;
        for (const auto& r : doc["reports"]) {
            if (!r.value("passed", false)) {
                ok = false;
                ++failed;
            }
        }
        if (format == ReportFormat::json) {
            nlohmann::json summary{{"all_passed", ok},
                                   {"checks", doc["reports"].size()},
                                   {"failed", failed},
                                   {"reports", doc["reports"]}};
            out << summary.dump(2) << "\n";
        } else {
            out << "check,passed,worst_margin,tol\n";
            for (const auto& r : doc["reports"]) {
                auto num = [&](const char* key) {
                    const auto& v = r.at(key);
                    return v.is_number() ? format_double(v.get<double>()) : v.get<std::string>();
                };
                out << csv_field(r.at("check_name").get<std::string>()) << ","
                    << (r.value("passed", false) ? "true" : "false") << "," << num("worst_margin") << "," << num("tol")
                    << "\n";
            }
        }
        return int{ok ? exit_ok : exit_check_failed};
    });
}

}  // namespace fdabs::cli
