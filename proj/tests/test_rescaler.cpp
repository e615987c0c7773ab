#include <doctest.h>

#include "fdabs/profiles.hpp"
#include "fdabs/rescaler.hpp"

#include <cmath>

using namespace fdabs;

namespace {

std::vector<double> uniform_nodes(double h, double y_max, bool include_origin) {
    std::vector<double> y;
    for (double x = include_origin ? 0.0 : 0.5 * h; x <= y_max + 1e-12; x += h) y.push_back(x);
    return y;
}

}  // namespace

TEST_CASE("scales at T + t = e") {
    const Params p = Params::critical_case(2, 0.5);
    const double T = 2.0;
    const SelfSimilarScales sc = selfsimilar_scales(std::exp(1.0) - T, T, p);
    CHECK(sc.s == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(sc.amplitude == doctest::Approx(std::exp(2.0)).epsilon(1e-14));
    CHECK(sc.length == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
    CHECK_THROWS_AS(selfsimilar_scales(0.0, 1.0, p), ParameterError);
    CHECK_THROWS_AS(selfsimilar_scales(1.0, 1.0, Params::with_q(2, 0.5, 2.0)), ParameterError);
}

TEST_CASE("exponents for N=2, m=1/2") {
    const Params p = Params::critical_case(2, 0.5);
    const GridPtr g = build_grid(2, 10.0, 20);
    const Snapshot snap = make_snapshot(3.0, init_field(g, initial::Barenblatt{1.0}, p));
    const double T = 4.0, tau = 7.0, L = std::log(tau);
    const RescaledProfile prof = to_selfsimilar(snap, T, p);
    for (std::size_t i = 0; i < 20; ++i) {
        CHECK(prof.values[i] == doctest::Approx(tau * L * tau * L * snap.field.values[i]).epsilon(1e-14));
        CHECK(prof.y[i] == doctest::Approx(g->centers()[i] / (tau * std::sqrt(L))).epsilon(1e-14));
    }
    CHECK(prof.s == doctest::Approx(L));
}

TEST_CASE("round trip and ordering") {
    const Params p = Params::critical_case(3, 0.6);
    const GridPtr g = build_grid(3, 10.0, 30, 1.02);
    const Snapshot lo = make_snapshot(0.5, init_field(g, initial::Barenblatt{2.0}, p));
    const Snapshot hi = make_snapshot(0.5, init_field(g, initial::Barenblatt{1.0}, p));
    const RescaledProfile a = to_selfsimilar(lo, 1.0, p);
    const RescaledProfile b = to_selfsimilar(hi, 1.0, p);
    const Snapshot back = from_selfsimilar(a, p);
    CHECK(back.t == doctest::Approx(0.5).epsilon(1e-14));
    for (std::size_t i = 0; i < 30; ++i) {
        CHECK(std::abs(back.field.values[i] / lo.field.values[i] - 1.0) < 1e-14);
        CHECK(a.values[i] <= b.values[i]);
    }
    CHECK_THROWS_AS(to_selfsimilar(lo, 0.5, p), ParameterError);
    const Snapshot zero = make_snapshot(1.0, Field{g, std::vector<double>(30, 0.0)});
    for (double v : from_selfsimilar(to_selfsimilar(zero, 2.0, p), p).field.values) CHECK(v == 0.0);
}

TEST_CASE("zero profile has zero residual and short inputs are rejected") {
    const Params p = Params::critical_case(2, 0.5);
    const auto y = uniform_nodes(0.1, 2.0, false);
    const std::vector<double> zero(y.size(), 0.0);
    for (double r : nonautonomous_residual(zero, y, 2.0, p)) CHECK(r == 0.0);
    for (double r : autonomous_residual(zero, y, p)) CHECK(r == 0.0);
    const std::vector<double> four{1, 1, 1, 1};
    CHECK_THROWS_AS(autonomous_residual(four, four, p), ParameterError);
}

TEST_CASE("radial derivatives are exact on quadratics") {
    const auto y = uniform_nodes(0.2, 3.0, true);
    std::vector<double> f(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) f[i] = 1.0 + y[i] * y[i];
    const RadialDerivatives d = radial_derivatives(f, y, 3);
    for (std::size_t i = 0; i < y.size(); ++i) {
        CHECK(d.first[i] == doctest::Approx(2 * y[i]).epsilon(1e-10));
        CHECK(d.laplacian[i] == doctest::Approx(6.0).epsilon(1e-9));
    }
}

TEST_CASE("sigma_A is stationary for L at second order") {
    for (auto [N, m] : {std::pair{2, 0.5}, std::pair{3, 0.4}, std::pair{1, 0.5}}) {
        const Params p = Params::critical_case(N, m);
        for (double A : {0.5, 1.0, 2.0}) {
            double prev = 0.0;
            for (double h : {0.1, 0.05, 0.025}) {
                const auto y = uniform_nodes(h, 10.0, false);
                std::vector<double> v(y.size());
                for (std::size_t i = 0; i < y.size(); ++i) v[i] = sigma(A, y[i], p);
                const auto res = autonomous_residual(v, y, p);
                double worst = 0.0;
                for (std::size_t i = 0; y[i] <= 5.0; ++i) worst = std::max(worst, std::abs(res[i]));
                if (prev > 0.0) {
                    CAPTURE(N);
                    CAPTURE(A);
                    CHECK(prev / worst >= 3.5);
                }
                prev = worst;
            }
        }
    }
}

TEST_CASE("non-autonomous minus autonomous residual is the explicit 1/s part") {
    const Params p = Params::critical_case(2, 0.5);
    const auto y = uniform_nodes(0.05, 8.0, false);
    std::vector<double> v(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) v[i] = supersolution_z(0.4, 3.0, y[i], p);
    const auto full = nonautonomous_residual(v, y, 3.0, p);
    const auto aut = autonomous_residual(v, y, p);
    const auto extra = explicit_s_terms(v, y, 3.0, p);
    for (std::size_t i = 0; i < y.size(); ++i) {
        CHECK(std::abs(full[i] - aut[i] - extra[i]) <= 1e-14 * std::max(1.0, std::abs(full[i])));
    }
}

TEST_CASE("at the origin L reduces to Laplace v^m + v/(q-1)") {
    const Params p = Params::critical_case(2, 0.5);
    const auto y = uniform_nodes(0.1, 2.0, true);
    std::vector<double> v(y.size()), wm(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        v[i] = sigma(1.3, y[i], p);
        wm[i] = std::pow(v[i], 0.5);
    }
    const auto res = autonomous_residual(v, y, p);
    const auto lap = radial_derivatives(wm, y, 2).laplacian;
    CHECK(res[0] == doctest::Approx(lap[0] + v[0] / 0.5).epsilon(1e-14));
}
