#include "fdabs/grid.hpp"

#include "fdabs/params.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fdabs {

double unit_sphere_measure(int N) {
    if (N < 1) throw ParameterError("dimension must be >= 1");
    if (N == 1) return 2.0;
    if (N == 2) return 2.0 * std::numbers::pi;
    const double half = 0.5 * N;
    return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

RadialGrid::RadialGrid(int dimension, std::vector<double> faces, double stretch)
    : dimension_(dimension), stretch_(stretch), faces_(std::move(faces)) {
    if (faces_.size() < 2 || faces_.front() != 0.0) {
        throw ParameterError("radial grid needs faces starting at 0");
    }
    for (std::size_t i = 1; i < faces_.size(); ++i) {
        if (!(faces_[i] > faces_[i - 1])) throw ParameterError("radial grid faces must be strictly increasing");
    }
    const double omega = unit_sphere_measure(dimension_);
    const std::size_t n = faces_.size() - 1;
    centers_.resize(n);
    volumes_.resize(n);
    areas_.resize(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        centers_[i] = 0.5 * (faces_[i] + faces_[i + 1]);
        volumes_[i] = omega * (std::pow(faces_[i + 1], dimension_) - std::pow(faces_[i], dimension_)) / dimension_;
    }
    for (std::size_t i = 0; i <= n; ++i) {
        areas_[i] = dimension_ == 1 ? omega : omega * std::pow(faces_[i], dimension_ - 1);
    }
}

std::ptrdiff_t RadialGrid::last_index_at_or_below(double r) const noexcept {
    auto it = std::upper_bound(centers_.begin(), centers_.end(), r);
    return static_cast<std::ptrdiff_t>(it - centers_.begin()) - 1;
}

GridPtr build_grid(int dimension, double R_max, int n_cells, double stretch) {
    if (n_cells < 8) throw ParameterError("grid needs at least 8 cells, got " + std::to_string(n_cells));
    if (!(R_max > 0.0) || !std::isfinite(R_max)) throw ParameterError("R_max must be positive and finite");
    if (!(stretch >= 1.0) || !std::isfinite(stretch)) throw ParameterError("stretch must be >= 1");

    std::vector<double> faces(static_cast<std::size_t>(n_cells) + 1);
    faces[0] = 0.0;
    if (stretch == 1.0) {
        for (int i = 1; i <= n_cells; ++i) faces[i] = R_max * static_cast<double>(i) / n_cells;
    } else {
        const double h0 = R_max * (stretch - 1.0) / (std::pow(stretch, n_cells) - 1.0);
        double width = h0;
        for (int i = 1; i <= n_cells; ++i) {
            faces[i] = faces[i - 1] + width;
            width *= stretch;
        }
    }
    faces[n_cells] = R_max;
    return std::make_shared<const RadialGrid>(dimension, std::move(faces), stretch);
}

GridPtr grid_from_centers(int dimension, std::span<const double> centers) {
    if (centers.size() < 2 || !(centers[0] > 0.0)) {
        throw ParameterError("grid_from_centers needs >= 2 positive centers");
    }
    std::vector<double> faces(centers.size() + 1);
    faces[0] = 0.0;
    // Midpoint-consistent faces: f_{i+1} = 2 c_i - f_i reproduces the centers exactly
    // when they came from a cell-centred grid.
    for (std::size_t i = 0; i < centers.size(); ++i) faces[i + 1] = 2.0 * centers[i] - faces[i];
    bool ok = true;
    for (std::size_t i = 1; i < faces.size(); ++i) ok = ok && faces[i] > faces[i - 1];
    if (!ok) {
        for (std::size_t i = 1; i < centers.size(); ++i) faces[i] = 0.5 * (centers[i - 1] + centers[i]);
        faces.back() = centers.back() + (centers.back() - faces[centers.size() - 1]);
    }
    return std::make_shared<const RadialGrid>(dimension, std::move(faces), 1.0);
}

}  // namespace fdabs
