#include "fdabs/field.hpp"

#include "fdabs/profiles.hpp"

#include <algorithm>
#include <cmath>

namespace fdabs {

void Field::validate() const {
    if (!grid) throw ParameterError("field has no grid");
    if (values.size() != grid->n_cells()) throw ParameterError("field size does not match grid");
    for (double v : values) {
        if (!std::isfinite(v) || v < 0.0) throw ParameterError("field values must be finite and nonnegative");
    }
}

Observables observables(const Field& field) {
    const auto vol = field.grid->volumes();
    Observables o{0.0, 0.0, field.values.empty() ? 0.0 : field.values.front()};
    for (std::size_t i = 0; i < field.values.size(); ++i) {
        o.mass += vol[i] * field.values[i];
        o.sup = std::max(o.sup, field.values[i]);
    }
    return o;
}

Snapshot make_snapshot(double t, Field field) {
    const Observables o = observables(field);
    return Snapshot{t, std::move(field), o.mass, o.sup, o.center_value};
}

namespace {

struct Sampler {
    const Params& params;

    double operator()(const initial::Indicator& d, double r) const { return r < d.R0 ? d.height : 0.0; }
    double operator()(const initial::Barenblatt& d, double r) const { return sigma(d.A, r, params); }
    double operator()(const initial::PowerTail& d, double r) const {
        return std::min(d.height, d.C * std::pow(r, -d.l));
    }
    double operator()(const initial::Constant& d, double) const { return d.height; }
    double operator()(const initial::Table& d, double r) const {
        if (r <= d.r.front()) return d.u.front();
        if (r >= d.r.back()) return d.u.back();
        const auto it = std::upper_bound(d.r.begin(), d.r.end(), r);
        const std::size_t j = static_cast<std::size_t>(it - d.r.begin());
        const double w = (r - d.r[j - 1]) / (d.r[j] - d.r[j - 1]);
        return (1.0 - w) * d.u[j - 1] + w * d.u[j];
    }
};

void check_descriptor(const InitialProfile& profile) {
    struct {
        void operator()(const initial::Indicator& d) const {
            if (!(d.R0 > 0.0) || !(d.height > 0.0)) throw ParameterError("indicator needs R0 > 0 and height > 0");
        }
        void operator()(const initial::Barenblatt& d) const {
            if (!(d.A > 0.0)) throw ParameterError("Barenblatt initial data needs A > 0");
        }
        void operator()(const initial::PowerTail& d) const {
            if (!(d.height > 0.0) || !(d.C > 0.0) || !(d.l > 0.0)) {
                throw ParameterError("power tail needs height, C, l > 0");
            }
        }
        void operator()(const initial::Constant& d) const {
            if (!(d.height > 0.0)) throw ParameterError("constant initial data needs height > 0");
        }
        void operator()(const initial::Table& d) const {
            if (d.r.size() != d.u.size() || d.r.size() < 2) throw ParameterError("table needs >= 2 (r, u) pairs");
            for (std::size_t i = 1; i < d.r.size(); ++i) {
                if (!(d.r[i] > d.r[i - 1])) throw ParameterError("table radii must increase");
            }
            for (double u : d.u) {
                if (!(u >= 0.0) || !std::isfinite(u)) throw ParameterError("table values must be finite and >= 0");
            }
        }
    } visitor;
    std::visit(visitor, profile);
}

}  // namespace

Field init_field(const GridPtr& grid, const InitialProfile& profile, const Params& params) {
    check_descriptor(profile);
    Field f{grid, std::vector<double>(grid->n_cells())};
    const Sampler sampler{params};
    const auto centers = grid->centers();
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        f.values[i] = std::visit([&](const auto& d) { return sampler(d, centers[i]); }, profile);
    }
    f.validate();
    if (std::none_of(f.values.begin(), f.values.end(), [](double v) { return v > 0.0; })) {
        throw ParameterError("initial data must not vanish identically on the grid");
    }
    return f;
}

}  // namespace fdabs
