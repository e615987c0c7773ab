#pragma once

#include "fdabs/grid.hpp"
#include "fdabs/params.hpp"

#include <variant>
#include <vector>

namespace fdabs {

/// Nonnegative cell values of u on a radial grid.
struct Field {
    GridPtr grid;
    std::vector<double> values;

    /// Throws ParameterError on size mismatch, negative or non-finite entries.
    void validate() const;
};

struct Observables {
    double mass;          ///< sum of volume-weighted cell values
    double sup;           ///< max cell value
    double center_value;  ///< value in the innermost cell
};

Observables observables(const Field& field);

struct Snapshot {
    double t;
    Field field;
    double mass;
    double sup;
    double center_value;
};

Snapshot make_snapshot(double t, Field field);

namespace initial {

/// h on r < R0, zero outside.
struct Indicator {
    double R0;
    double height;
};
/// sigma_A sampled at cell centers.
struct Barenblatt {
    double A;
};
/// min(h, C r^-l).
struct PowerTail {
    double height;
    double C;
    double l;
};
/// u = h everywhere on the grid.
struct Constant {
    double height;
};
/// Piecewise-linear interpolation of (r, u) pairs, held constant beyond the ends.
struct Table {
    std::vector<double> r;
    std::vector<double> u;
};

}  // namespace initial

using InitialProfile = std::variant<initial::Indicator, initial::Barenblatt, initial::PowerTail,
                                    initial::Constant, initial::Table>;

/// Samples the initial profile at cell centers. Rejects descriptors that
/// produce an identically zero or negative field.
Field init_field(const GridPtr& grid, const InitialProfile& profile, const Params& params);

}  // namespace fdabs
