#include "fdabs/rescaler.hpp"

#include <array>
#include <cmath>

namespace fdabs {

namespace {

void require_critical(const Params& params) {
    if (!params.critical()) throw ParameterError("self-similar variables need the critical case q = m + 2/N");
}

// Fornberg's recursion for weights of derivatives 0..2 at x0 over the
// given nodes.
template <std::size_t K>
std::array<std::array<double, K>, 3> fornberg(double x0, const std::array<double, K>& x) {
    std::array<std::array<double, K>, 3> c{};
    double c1 = 1.0;
    double c4 = x[0] - x0;
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < K; ++i) {
        const std::size_t mn = std::min<std::size_t>(i, 2);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - x0;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (std::size_t k = mn; k >= 1; --k) {
                    c[k][i] = c1 * (static_cast<double>(k) * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for (std::size_t k = mn; k >= 1; --k) {
                c[k][j] = (c4 * c[k][j] - static_cast<double>(k) * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    return c;
}

void check_nodes(std::span<const double> f, std::span<const double> y) {
    if (f.size() != y.size()) throw ParameterError("values and nodes differ in length");
    if (y.size() < 5) throw ParameterError("rescaled residuals need at least 5 nodes");
    if (!(y[0] >= 0.0)) throw ParameterError("nodes must be nonnegative");
    for (std::size_t i = 1; i < y.size(); ++i) {
        if (!(y[i] > y[i - 1])) throw ParameterError("nodes must increase strictly");
    }
}

double power_m(double v, double m) { return v > 0.0 ? std::exp(m * std::log(std::max(v, 1e-300))) : 0.0; }

}  // namespace

RadialDerivatives radial_derivatives(std::span<const double> f, std::span<const double> y, int N) {
    check_nodes(f, y);
    const std::size_t n = y.size();
    RadialDerivatives d{std::vector<double>(n), std::vector<double>(n)};
    const double dim = static_cast<double>(N);

    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (i == 0 && y[0] == 0.0) {
            // Even extension: f'(0) = 0 and Laplace f(0) = N f''(0).
            const auto c = fornberg<3>(0.0, {-y[1], 0.0, y[1]});
            d.first[0] = 0.0;
            d.laplacian[0] = dim * (c[2][0] * f[1] + c[2][1] * f[0] + c[2][2] * f[1]);
            continue;
        }
        const double left_y = i == 0 ? -y[0] : y[i - 1];
        const double left_f = i == 0 ? f[0] : f[i - 1];
        const auto c = fornberg<3>(y[i], {left_y, y[i], y[i + 1]});
        const double d1 = c[1][0] * left_f + c[1][1] * f[i] + c[1][2] * f[i + 1];
        const double d2 = c[2][0] * left_f + c[2][1] * f[i] + c[2][2] * f[i + 1];
        d.first[i] = d1;
        d.laplacian[i] = d2 + (dim - 1.0) / y[i] * d1;
    }
    const std::size_t j = n - 1;
    const auto c = fornberg<4>(y[j], {y[j - 3], y[j - 2], y[j - 1], y[j]});
    double d1 = 0.0;
    double d2 = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
        d1 += c[1][k] * f[j - 3 + k];
        d2 += c[2][k] * f[j - 3 + k];
    }
    d.first[j] = d1;
    d.laplacian[j] = d2 + (dim - 1.0) / y[j] * d1;
    return d;
}

SelfSimilarScales selfsimilar_scales(double t, double T, const Params& params) {
    require_critical(params);
    const double tau = T + t;
    if (!(tau > 1.0)) throw ParameterError("self-similar variables need T + t > 1");
    const double N = params.N();
    const double m = params.m();
    const double qm1 = params.q() - 1.0;
    const double L = std::log(tau);
    return SelfSimilarScales{L, std::pow(tau * L, 1.0 / qm1),
                             std::pow(tau, 1.0 / (N * qm1)) * std::pow(L, (1.0 - m) / (2.0 * qm1))};
}

RescaledProfile to_selfsimilar(const Snapshot& snap, double T, const Params& params) {
    if (!(T >= 1.0)) throw ParameterError("time shift T must be >= 1");
    const SelfSimilarScales sc = selfsimilar_scales(snap.t, T, params);
    const auto centers = snap.field.grid->centers();
    RescaledProfile out{sc.s, T, std::vector<double>(centers.size()), std::vector<double>(centers.size()),
                        snap.field.grid};
    for (std::size_t i = 0; i < centers.size(); ++i) {
        out.y[i] = centers[i] / sc.length;
        out.values[i] = sc.amplitude * snap.field.values[i];
    }
    return out;
}

Snapshot from_selfsimilar(const RescaledProfile& profile, const Params& params) {
    if (!profile.source_grid) throw ParameterError("rescaled profile carries no source grid");
    const double t = std::exp(profile.s) - profile.T;
    const SelfSimilarScales sc = selfsimilar_scales(t, profile.T, params);
    Field f{profile.source_grid, std::vector<double>(profile.values.size())};
    for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = profile.values[i] / sc.amplitude;
    return make_snapshot(t, std::move(f));
}

std::vector<double> autonomous_residual(std::span<const double> values, std::span<const double> y,
                                        const Params& params) {
    require_critical(params);
    check_nodes(values, y);
    const double m = params.m();
    const double N = params.N();
    const double qm1 = params.q() - 1.0;
    std::vector<double> wm(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) wm[i] = power_m(values[i], m);
    const RadialDerivatives lap = radial_derivatives(wm, y, params.N());
    const RadialDerivatives dv = radial_derivatives(values, y, params.N());
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = lap.laplacian[i] + (N * values[i] + y[i] * dv.first[i]) / (N * qm1);
    }
    return out;
}

std::vector<double> explicit_s_terms(std::span<const double> values, std::span<const double> y, double s,
                                     const Params& params) {
    require_critical(params);
    check_nodes(values, y);
    if (!(s > 0.0)) throw ParameterError("rescaled time s must be positive");
    const double m = params.m();
    const double q = params.q();
    const RadialDerivatives dv = radial_derivatives(values, y, params.N());
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double v = values[i];
        const double vq = v > 0.0 ? std::pow(v, q) : 0.0;
        out[i] = (v + 0.5 * (1.0 - m) * y[i] * dv.first[i]) / ((q - 1.0) * s) - vq / s;
    }
    return out;
}

std::vector<double> nonautonomous_residual(std::span<const double> values, std::span<const double> y, double s,
                                           const Params& params) {
    std::vector<double> out = autonomous_residual(values, y, params);
    const std::vector<double> extra = explicit_s_terms(values, y, s, params);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += extra[i];
    return out;
}

}  // namespace fdabs
