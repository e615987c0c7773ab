#include "fdabs/verifier.hpp"

#include "fdabs/io.hpp"
#include "fdabs/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fdabs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> times_of(std::span<const Snapshot> snaps) {
    std::vector<double> t;
    t.reserve(snaps.size());
    for (const auto& s : snaps) t.push_back(s.t);
    return t;
}

// Aborts when a cell in the first `count` is not strictly positive.
void require_positive_window(const Snapshot& snap, std::size_t count, const std::string& check) {
    for (std::size_t i = 0; i < count; ++i) {
        if (!(snap.field.values[i] > 0.0)) {
            std::ostringstream os;
            os << check << ": u vanishes at r=" << snap.field.grid->centers()[i] << ", t=" << snap.t
               << " inside the checked window (positivity expected for t > 0)";
            throw CheckAborted(os.str());
        }
    }
}

// Keeps the worst (smallest) margin and where it occurred.
struct Worst {
    double margin = kInf;
    double location = 0.0;
    double time = 0.0;
    void update(double value, double where, double t) {
        if (value < margin) {
            margin = value;
            location = where;
            time = t;
        }
    }
};

std::size_t inner_window(const RescaledProfile& profile) {
    if (profile.source_grid && profile.source_grid->n_cells() == profile.y.size()) {
        return inner_half_count(*profile.source_grid);
    }
    return profile.y.size() / 2;
}

}  // namespace

BoundReport finalize(BoundReport report) {
    report.passed = std::isfinite(report.worst_margin) ? report.worst_margin >= -report.tol
                                                        : report.worst_margin > 0.0;
    return report;
}

double refinement_tolerance(double margin_h, double margin_h2, double factor) {
    return factor * std::abs(margin_h - margin_h2);
}

std::size_t inner_half_count(const RadialGrid& grid) {
    const auto idx = grid.last_index_at_or_below(0.5 * grid.R_max());
    return idx < 0 ? 0 : static_cast<std::size_t>(idx + 1);
}

BoundReport check_gradient_estimate(std::span<const Snapshot> snaps, double sup_u0, const Params& params,
                                    double tol) {
    const Constants c = derive_constants(params);
    const double m = params.m();
    const double q = params.q();
    const double lead = std::sqrt(positive_part(3.0 - m - 2.0 * q) * c.B0) * std::pow(sup_u0, 0.5 * (q - 1.0));
    Worst worst;
    int checked = 0;
    for (const auto& snap : snaps) {
        if (!(snap.t > 0.0)) continue;
        const RadialGrid& grid = *snap.field.grid;
        const std::size_t count = inner_half_count(grid);
        if (count < 5) throw CheckAborted("gradient estimate: inner window has fewer than 5 cells");
        // Include one extra cell so the last window cell gets a central stencil.
        const std::size_t len = std::min(count + 1, grid.n_cells());
        require_positive_window(snap, len, "gradient estimate");
        std::vector<double> f(len);
        for (std::size_t i = 0; i < len; ++i) f[i] = std::pow(snap.field.values[i], 0.5 * (m - 1.0));
        const auto r = grid.centers().subspan(0, len);
        const RadialDerivatives d = radial_derivatives(f, r, params.N());
        const double rhs = lead + std::sqrt(c.B0 / snap.t);
        for (std::size_t i = 0; i < count; ++i) worst.update(rhs - std::abs(d.first[i]), r[i], snap.t);
        ++checked;
    }
    BoundReport rep{"gradient_estimate", times_of(snaps), worst.margin, worst.location, tol, false, ""};
    std::ostringstream os;
    os << "inner half-domain; worst at t=" << worst.time << "; " << checked << " snapshots";
    rep.notes = os.str();
    return finalize(rep);
}

BoundReport check_upper_bound(std::span<const Snapshot> snaps, double sup_u0, const Params& params, double tol) {
    Worst worst;
    for (const auto& snap : snaps) {
        if (!(snap.t > 0.0)) continue;
        const auto& v = snap.field.values;
        const auto it = std::max_element(v.begin(), v.end());
        const double where = snap.field.grid->centers()[static_cast<std::size_t>(it - v.begin())];
        worst.update(flat_decay_bound(snap.t, sup_u0, params) - *it, where, snap.t);
    }
    BoundReport rep{"upper_bound", times_of(snaps), worst.margin, worst.location, tol, false, ""};
    rep.notes = "whole domain; worst at t=" + format_double(worst.time);
    return finalize(rep);
}

BoundReport check_lower_bound(std::span<const Snapshot> snaps, double sup_u0, const Params& params, double tol) {
    const double tail = -2.0 / (1.0 - params.m());
    Worst worst;
    for (const auto& snap : snaps) {
        if (!(snap.t > 0.0)) continue;
        const RadialGrid& grid = *snap.field.grid;
        const std::size_t count = inner_half_count(grid);
        require_positive_window(snap, count, "lower bound");
        const double ell = ell_u(snap.t, snap.center_value, sup_u0, params);
        const auto r = grid.centers();
        for (std::size_t i = 0; i < count; ++i) {
            const double bound = ell * std::pow(1.0 + r[i], tail);
            worst.update((snap.field.values[i] - bound) / bound, r[i], snap.t);
        }
    }
    BoundReport rep{"lower_bound", times_of(snaps), worst.margin, worst.location, tol, false, ""};
    rep.notes = "relative to the bound; inner half-domain; u(t,0) from the first cell; worst at t=" +
                format_double(worst.time);
    return finalize(rep);
}

double fit_tail_exponent(const Snapshot& snap, double r_lo, double r_hi) {
    const RadialGrid& grid = *snap.field.grid;
    if (!(r_lo > 0.0) || !(r_hi > r_lo)) throw ParameterError("tail window needs 0 < r_lo < r_hi");
    if (r_hi > grid.R_max() || r_lo < grid.centers().front()) {
        throw ParameterError("tail window lies outside the grid");
    }
    const auto r = grid.centers();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i] < r_lo || r[i] > r_hi) continue;
        const double u = snap.field.values[i];
        if (!(u > 0.0)) throw CheckAborted("tail fit: u vanishes inside the window");
        const double x = std::log(r[i]);
        const double y = std::log(u);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) throw ParameterError("tail window contains fewer than 2 cells");
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return -slope;
}

EnvelopeResult check_quadratic_envelope(std::span<const Snapshot> snaps, double eps, const Params& params,
                                        double tol) {
    if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("envelope needs eps in (0, 1)");
    const double m = params.m();
    EnvelopeResult out;
    double best_margin = -kInf;
    double best_location = 0.0;
    for (const auto& snap : snaps) {
        if (!(snap.t > 0.0)) continue;
        const RadialGrid& grid = *snap.field.grid;
        const std::size_t count = inner_half_count(grid);
        require_positive_window(snap, count, "quadratic envelope");
        const auto r = grid.centers();
        std::vector<double> f(count);
        double scale = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            f[i] = std::pow(snap.field.values[i], m - 1.0) - eps * r[i] * r[i];
            scale = std::max(scale, std::abs(f[i]));
        }
        const std::size_t tail_start = count - std::max<std::size_t>(2, count / 5);
        double margin = kInf;
        double where = 0.0;
        for (std::size_t i = tail_start; i + 1 < count; ++i) {
            const double drop = (f[i] - f[i + 1]) / scale;
            if (drop < margin) {
                margin = drop;
                where = r[i + 1];
            }
        }
        if (margin > best_margin) {
            best_margin = margin;
            best_location = where;
        }
        if (margin >= -tol) {
            out.tau = snap.t;
            out.kappa = *std::max_element(f.begin(), f.end());
            out.kappa_at_least_inverse_eps = out.kappa >= 1.0 / eps;
            best_margin = margin;
            best_location = where;
            break;
        }
    }
    BoundReport rep{"quadratic_envelope", times_of(snaps), best_margin, best_location, tol, false, ""};
    std::ostringstream os;
    os << "eps=" << format_double(eps) << "; ";
    if (out.tau) {
        os << "tau=" << format_double(*out.tau) << " kappa=" << format_double(out.kappa)
           << (out.kappa_at_least_inverse_eps ? " (kappa >= 1/eps)" : " (kappa < 1/eps)");
    } else {
        os << "no scheduled time qualifies; extend the schedule";
    }
    rep.notes = os.str();
    out.report = finalize(rep);
    if (!out.tau) out.report.passed = false;
    return out;
}

std::vector<double> positivity_schedule(std::span<const double> times, double sup_u0, const Params& params) {
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times) out.push_back(positivity_transform(t, sup_u0, params).s);
    return out;
}

BoundReport check_positivity_transform(std::span<const Snapshot> u_snaps, std::span<const Snapshot> fde_snaps,
                                       double sup_u0, const Params& params, double tol) {
    if (u_snaps.size() != fde_snaps.size()) throw CheckAborted("positivity transform: schedule mismatch");
    Worst worst;
    for (std::size_t k = 0; k < u_snaps.size(); ++k) {
        const Snapshot& u = u_snaps[k];
        const Snapshot& v = fde_snaps[k];
        const PositivityTransform pt = positivity_transform(u.t, sup_u0, params);
        if (std::abs(v.t - pt.s) > 1e-12 * std::max(1.0, pt.s)) {
            throw CheckAborted("positivity transform: companion run not sampled at s(t) for t=" + format_double(u.t));
        }
        if (u.field.values.size() != v.field.values.size()) {
            throw CheckAborted("positivity transform: grids differ");
        }
        const std::size_t count = inner_half_count(*u.field.grid);
        const auto r = u.field.grid->centers();
        for (std::size_t i = 0; i < count; ++i) {
            const double below = pt.lambda * v.field.values[i];
            if (!(below > 0.0)) continue;
            worst.update((u.field.values[i] - below) / below, r[i], u.t);
        }
    }
    BoundReport rep{"positivity_transform", times_of(u_snaps), worst.margin, worst.location, tol, false, ""};
    rep.notes = "relative to lambda(t) sigma(s(t)); inner half-domain; worst at t=" + format_double(worst.time);
    return finalize(rep);
}

BoundReport boundary_monitor(std::span<const Snapshot> base, std::span<const Snapshot> doubled, double tol) {
    if (base.size() != doubled.size()) throw CheckAborted("boundary monitor: schedule mismatch");
    Worst worst;
    for (std::size_t k = 0; k < base.size(); ++k) {
        const RadialGrid& g = *base[k].field.grid;
        const RadialGrid& g2 = *doubled[k].field.grid;
        const auto r = g.centers();
        const auto r2 = g2.centers();
        const auto& v2 = doubled[k].field.values;
        const std::size_t count = inner_half_count(g);
        for (std::size_t i = 0; i < count; ++i) {
            // Linear interpolation of the doubled run at r[i].
            const auto it = std::lower_bound(r2.begin(), r2.end(), r[i]);
            std::size_t j = static_cast<std::size_t>(it - r2.begin());
            double other;
            if (j < r2.size() && r2[j] == r[i]) {
                other = v2[j];
            } else if (j == 0) {
                other = v2[0];
            } else {
                if (j >= r2.size()) j = r2.size() - 1;
                const double w = (r[i] - r2[j - 1]) / (r2[j] - r2[j - 1]);
                other = (1.0 - w) * v2[j - 1] + w * v2[j];
            }
            const double ref = std::max(std::abs(other), std::numeric_limits<double>::min());
            worst.update(-std::abs(base[k].field.values[i] - other) / ref, r[i], base[k].t);
        }
    }
    BoundReport rep{"boundary_monitor", times_of(base), worst.margin, worst.location, tol, false, ""};
    rep = finalize(rep);
    rep.notes = rep.passed ? "inner half-domain insensitive to doubling R_max"
                           : "R_max too small: tail-sensitive checks unreliable (worst at t=" +
                                 format_double(worst.time) + ")";
    return rep;
}

std::vector<double> residual_nodes(double y_max, int n_nodes) {
    if (!(y_max > 0.0) || n_nodes < 5) throw ParameterError("residual nodes need y_max > 0 and >= 5 nodes");
    // y = y_max (x + c x^2) / (1 + c): spacing grows 19x from the origin outwards.
    constexpr double c = 9.0;
    std::vector<double> y(static_cast<std::size_t>(n_nodes));
    for (int i = 0; i < n_nodes; ++i) {
        const double x = static_cast<double>(i) / (n_nodes - 1);
        y[static_cast<std::size_t>(i)] = y_max * (x + c * x * x) / (1.0 + c);
    }
    y.back() = y_max;
    return y;
}

double residual_margin(ResidualKind kind, double A, double s, std::span<const double> y, const Params& params,
                       double* location) {
    const std::size_t n = y.size();
    std::vector<double> p(n), ds(n), sig(n);
    for (std::size_t i = 0; i < n; ++i) {
        sig[i] = sigma(A, y[i], params);
        if (kind == ResidualKind::sub) {
            p[i] = subsolution_w(A, s, y[i], params);
            ds[i] = subsolution_w_ds(A, s, y[i], params);
        } else {
            p[i] = supersolution_z(A, s, y[i], params);
            ds[i] = supersolution_z_ds(A, s, y[i], params);
        }
    }
    const std::vector<double> Lp = nonautonomous_residual(p, y, s, params);
    const std::size_t keep = n - n / 10;
    double margin = kInf;
    for (std::size_t i = 0; i < keep; ++i) {
        const double rho = (ds[i] - Lp[i]) / sig[i];
        const double value = kind == ResidualKind::sub ? -rho : rho;
        if (value < margin) {
            margin = value;
            if (location) *location = y[i];
        }
    }
    return margin;
}

ResidualSignResult check_residual_sign(ResidualKind kind, std::span<const double> A_grid,
                                       std::span<const double> s_grid, double y_max, const Params& params,
                                       double tol, int n_nodes) {
    if (!params.critical()) throw ParameterError("residual signs are defined in the critical case");
    if (A_grid.empty() || s_grid.empty()) throw ParameterError("residual search needs nonempty A and s grids");
    if (!(y_max > 0.0) || n_nodes < 5) throw ParameterError("residual search needs y_max > 0 and >= 5 nodes");
    const Constants c = derive_constants(params);
    for (double s : s_grid) {
        if (!(s > 0.0)) throw ParameterError("s grid must be positive");
        if (kind == ResidualKind::sub && params.sub_branch_two() && s < c.s0) {
            throw ParameterError("subsolution s grid must lie in [s0, inf)");
        }
    }
    const std::vector<double> y = residual_nodes(y_max, n_nodes);

    std::vector<double> As(A_grid.begin(), A_grid.end());
    std::sort(As.begin(), As.end());
    As.erase(std::unique(As.begin(), As.end()), As.end());

    ResidualSignResult out;
    std::vector<bool> ok(As.size());
    double best_fail = -kInf;
    double best_fail_where = 0.0;
    double threshold_margin = 0.0;
    double threshold_where = 0.0;
    for (std::size_t a = 0; a < As.size(); ++a) {
        double margin = kInf;
        double where = 0.0;
        for (double s : s_grid) {
            double loc = 0.0;
            const double mg = residual_margin(kind, As[a], s, y, params, &loc);
            if (mg < margin) {
                margin = mg;
                where = loc;
            }
        }
        ok[a] = margin >= -tol;
        if (ok[a]) {
            out.admissible.push_back(As[a]);
            const bool extreme = kind == ResidualKind::sub ? out.admissible.size() == 1 : true;
            if (extreme) {
                threshold_margin = margin;
                threshold_where = where;
            }
        } else if (margin > best_fail) {
            best_fail = margin;
            best_fail_where = where;
        }
    }
    // Sub: once admissible, every larger A must be admissible. Super: the reverse.
    if (kind == ResidualKind::sub) {
        const auto first = std::find(ok.begin(), ok.end(), true);
        out.monotone = std::all_of(first, ok.end(), [](bool b) { return b; });
    } else {
        const auto first = std::find(ok.begin(), ok.end(), false);
        out.monotone = std::none_of(first, ok.end(), [](bool b) { return b; });
    }
    BoundReport rep;
    rep.check_name = kind == ResidualKind::sub ? "residual_sign_sub" : "residual_sign_super";
    rep.times.assign(s_grid.begin(), s_grid.end());
    rep.tol = tol;
    std::ostringstream os;
    if (!out.admissible.empty()) {
        out.threshold = kind == ResidualKind::sub ? out.admissible.front() : out.admissible.back();
        rep.worst_margin = threshold_margin;
        rep.worst_location = threshold_where;
        os << (kind == ResidualKind::sub ? "A_sub=" : "A_sup=") << format_double(*out.threshold) << "; "
           << out.admissible.size() << "/" << As.size() << " admissible";
    } else {
        rep.worst_margin = best_fail;
        rep.worst_location = best_fail_where;
        os << "no admissible A; smallest violation shown";
    }
    os << "; normalized by sigma_A; y in [0, " << format_double(0.9 * y_max) << "]";
    if (!out.monotone) os << "; admissible set not monotone";
    rep.notes = os.str();
    out.report = finalize(rep);
    return out;
}

double sufficient_sub_threshold(const Params& params) {
    const Constants c = derive_constants(params);
    const double m = params.m();
    const double q = params.q();
    const double bound = std::min(std::pow(2.0, (m + q - 2.0) / (1.0 - m)) / (4.0 * (q - 1.0)),
                                  c.gamma / std::pow(2.0, m + 2.0));
    return std::pow(bound, (m - 1.0) / (q - 1.0));
}

BoundReport check_sandwich(std::span<const RescaledProfile> series, double A1, double A2, double gamma_T,
                           const Params& params, double tol) {
    if (series.size() < 3) throw CheckAborted("sandwich: series needs at least 3 profiles");
    if (!(A1 > 0.0) || !(A2 > 0.0) || !(gamma_T >= 0.0)) throw ParameterError("sandwich needs A1, A2 > 0, gamma_T >= 0");
    Worst low;
    Worst high;
    std::vector<double> times;
    for (const auto& prof : series) {
        times.push_back(prof.s);
        const double c = (1.0 - gamma_T / prof.s) * (1.0 - gamma_T * std::exp(-prof.s));
        const std::size_t count = inner_window(prof);
        for (std::size_t i = 0; i < count; ++i) {
            const double y = prof.y[i];
            const double v = prof.values[i];
            const double below = c * subsolution_w(A1, prof.s, y, params);
            const double above = supersolution_z(A2, prof.s, y, params);
            low.update(below > 0.0 ? (v - below) / below : kInf, y, prof.s);
            high.update((above - v) / above, y, prof.s);
        }
    }
    const bool low_worse = low.margin <= high.margin;
    BoundReport rep{"sandwich", times, std::min(low.margin, high.margin),
                    low_worse ? low.location : high.location, tol, false, ""};
    std::ostringstream os;
    os << "A1=" << format_double(A1) << " A2=" << format_double(A2) << " gamma_T=" << format_double(gamma_T)
       << "; margin_low=" << format_double(low.margin) << " (s=" << format_double(low.time) << ")"
       << " margin_high=" << format_double(high.margin) << " (s=" << format_double(high.time) << ")"
       << "; relative margins on the inner window";
    rep.notes = os.str();
    return finalize(rep);
}

SandwichWitness search_sandwich(std::span<const RescaledProfile> series, std::span<const double> sub_set,
                                std::span<const double> super_set, std::span<const double> gamma_grid,
                                const Params& params, double tol) {
    if (sub_set.empty() || super_set.empty() || gamma_grid.empty()) {
        throw ParameterError("sandwich search needs nonempty candidate sets");
    }
    std::vector<double> subs(sub_set.begin(), sub_set.end());
    std::vector<double> sups(super_set.begin(), super_set.end());
    std::vector<double> gammas(gamma_grid.begin(), gamma_grid.end());
    std::sort(subs.begin(), subs.end());
    std::sort(sups.begin(), sups.end(), std::greater<>());
    std::sort(gammas.begin(), gammas.end());

    // The two sides are independent: the lower margin depends on (A1,
    // gamma_T) only, the upper on A2 only.
    SandwichWitness best;
    double best_low = -kInf;
    bool found_low = false;
    for (double g : gammas) {
        for (double A1 : subs) {
            double m_low = kInf;
            for (const auto& prof : series) {
                const double c = (1.0 - g / prof.s) * (1.0 - g * std::exp(-prof.s));
                const std::size_t count = inner_window(prof);
                for (std::size_t i = 0; i < count; ++i) {
                    const double below = c * subsolution_w(A1, prof.s, prof.y[i], params);
                    if (below > 0.0) m_low = std::min(m_low, (prof.values[i] - below) / below);
                }
            }
            if (m_low > best_low) {
                best_low = m_low;
                best.A1 = A1;
                best.gamma_T = g;
            }
            if (m_low >= -tol) {
                best.A1 = A1;
                best.gamma_T = g;
                found_low = true;
                break;
            }
        }
        if (found_low) break;
    }
    double best_high = -kInf;
    for (double A2 : sups) {
        double m_high = kInf;
        for (const auto& prof : series) {
            const std::size_t count = inner_window(prof);
            for (std::size_t i = 0; i < count; ++i) {
                const double above = supersolution_z(A2, prof.s, prof.y[i], params);
                m_high = std::min(m_high, (above - prof.values[i]) / above);
            }
        }
        if (m_high > best_high) {
            best_high = m_high;
            best.A2 = A2;
        }
        if (m_high >= -tol) {
            best.A2 = A2;
            break;
        }
    }
    best.report = check_sandwich(series, best.A1, best.A2, best.gamma_T, params, tol);
    best.report.notes += "; searched witness";
    return best;
}

double estimate_A(const RescaledProfile& profile, const Params& params) {
    if (profile.values.empty() || !(profile.values.front() > 0.0)) {
        throw CheckAborted("estimate_A: rescaled profile vanishes at the first node");
    }
    return std::pow(profile.values.front(), params.m() - 1.0);
}

ConvergenceMetric convergence_metric(const RescaledProfile& profile, double A_star, const Params& params) {
    const std::size_t count = inner_window(profile);
    ConvergenceMetric out{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < count; ++i) {
        const double d = std::abs(profile.values[i] - sigma(A_star, profile.y[i], params));
        if (d > out.sup_abs) {
            out.sup_abs = d;
            out.location = profile.y[i];
        }
    }
    out.relative = out.sup_abs / sigma(A_star, 0.0, params);
    return out;
}

std::string to_record(const BoundReport& report) {
    return report.check_name + " " + format_double(report.worst_margin) + " " + format_double(report.tol) + " " +
           (report.passed ? "PASS" : "FAIL");
}

nlohmann::json to_json(const BoundReport& report) {
    auto num = [](double x) -> nlohmann::json {
        if (std::isfinite(x)) return x;
        return format_double(x);
    };
    nlohmann::json times = nlohmann::json::array();
    for (double t : report.times) times.push_back(num(t));
    return nlohmann::json{{"check_name", report.check_name},   {"times", times},
                          {"worst_margin", num(report.worst_margin)}, {"worst_location", num(report.worst_location)},
                          {"tol", num(report.tol)},            {"passed", report.passed},
                          {"notes", report.notes}};
}

}  // namespace fdabs
