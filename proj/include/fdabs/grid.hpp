#pragma once

#include <memory>
#include <span>
#include <vector>

namespace fdabs {

/// Surface measure of the unit sphere in R^N: 2 pi^(N/2) / Gamma(N/2).
/// N = 1 gives 2 (both half-lines), so a radial N = 1 problem represents
/// even solutions on the real line.
double unit_sphere_measure(int N);

/// Cell-centred radial mesh on [0, R_max] with geometrically growing widths.
///
/// faces[0] = 0 and faces[n] = R_max; centers are cell midpoints, so the
/// first center sits at half the first width. volumes[i] is the exact
/// N-dimensional shell volume omega_N (f_{i+1}^N - f_i^N) / N.
class RadialGrid {
public:
    RadialGrid(int dimension, std::vector<double> faces, double stretch);

    int dimension() const noexcept { return dimension_; }
    std::size_t n_cells() const noexcept { return centers_.size(); }
    double R_max() const noexcept { return faces_.back(); }
    double stretch() const noexcept { return stretch_; }
    /// Width of the first cell.
    double h_min() const noexcept { return faces_[1] - faces_[0]; }

    std::span<const double> centers() const noexcept { return centers_; }
    std::span<const double> faces() const noexcept { return faces_; }
    std::span<const double> volumes() const noexcept { return volumes_; }
    /// omega_N f^(N-1) at each face (the origin face has zero flux regardless).
    std::span<const double> face_areas() const noexcept { return areas_; }

    /// Index of the last cell whose center is <= r (or -1 if none).
    std::ptrdiff_t last_index_at_or_below(double r) const noexcept;

private:
    int dimension_;
    double stretch_;
    std::vector<double> faces_;
    std::vector<double> centers_;
    std::vector<double> volumes_;
    std::vector<double> areas_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

/// Geometrically stretched grid: width_i = h0 * stretch^i summing to R_max.
/// Rejects n_cells < 8, R_max <= 0 and stretch < 1.
GridPtr build_grid(int dimension, double R_max, int n_cells, double stretch = 1.0);

/// Rebuilds a grid from cell centers (e.g. read back from a file). Faces are
/// recovered by f_{i+1} = 2 c_i - f_i, which is exact for centers produced by
/// a cell-centred grid; otherwise faces fall back to neighbour midpoints.
GridPtr grid_from_centers(int dimension, std::span<const double> centers);

}  // namespace fdabs
