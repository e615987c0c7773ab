#include <doctest.h>

#include "fdabs/oracle.hpp"

#include <cmath>

using namespace fdabs;
using namespace fdabs::oracle;

TEST_CASE("flat ODE closed form") {
    const Params p = Params::critical_case(2, 0.5);
    CHECK(flat_ode_exact(2.0, 1.0, p) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(flat_ode_exact(0.0, 3.0, p) == 3.0);
    // u' = -u^q by a central difference.
    const double t = 0.7, h = 1e-5;
    const double dudt = (flat_ode_exact(t + h, 2.0, p) - flat_ode_exact(t - h, 2.0, p)) / (2 * h);
    CHECK(dudt == doctest::Approx(-std::pow(flat_ode_exact(t, 2.0, p), 1.5)).epsilon(1e-8));
}

TEST_CASE("FDE Barenblatt: center value and scaling") {
    const Params p = Params::critical_case(2, 0.5);
    CHECK(barenblatt_fde_exact(1.0, 0.0, 0.8, p) == doctest::Approx(1.0 / 0.64).epsilon(1e-15));
    // U(t, r) = t^-alpha sigma_C(r t^(-1/(Nm-N+2))) with Nm-N+2 = 1, alpha = 2.
    const double t = 3.0, r = 1.7;
    const double sig = std::pow(1.0 + 0.5 * (r / t) * (r / t), -2.0);
    CHECK(barenblatt_fde_exact(t, r, 1.0, p) == doctest::Approx(sig / (t * t)).epsilon(1e-14));
}

namespace {

// 4th-order central differences.
template <class F>
double d1(F f, double x, double h) {
    return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h);
}
template <class F>
double d2(F f, double x, double h) {
    return (-f(x - 2 * h) + 16 * f(x - h) - 30 * f(x) + 16 * f(x + h) - f(x + 2 * h)) / (12 * h * h);
}

}  // namespace

TEST_CASE("FDE Barenblatt satisfies u_t = Laplace u^m (finite-difference residual)") {
    for (auto [N, m] : {std::pair{2, 0.5}, std::pair{3, 0.6}, std::pair{1, 0.4}}) {
        const Params p = Params::critical_case(N, m);
        double worst = 0.0;
        for (double t = 0.5; t <= 2.0 + 1e-12; t += 0.25) {
            for (double r = 0.25; r <= 10.0; r += 0.25) {
                auto U = [&](double tt) { return barenblatt_fde_exact(tt, r, 1.0, p); };
                auto W = [&](double rr) { return std::pow(barenblatt_fde_exact(t, std::abs(rr), 1.0, p), m); };
                const double h = 1e-3;
                const double lap = d2(W, r, h) + (N - 1) / r * d1(W, r, h);
                const double scale = std::max(std::abs(lap), barenblatt_fde_exact(t, r, 1.0, p));
                worst = std::max(worst, std::abs(d1(U, t, h) - lap) / scale);
            }
        }
        CAPTURE(N);
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("FDE Barenblatt mass is constant in time") {
    const Params p = Params::critical_case(2, 0.5);
    // Simpson in x = log r over [-20, 12].
    auto mass = [&](double t) {
        const int n = 20000;
        const double a = -20.0, b = 12.0, h = (b - a) / n;
        double sum = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double r = std::exp(a + i * h);
            const double f = 2 * M_PI * r * r * barenblatt_fde_exact(t, r, 1.0, p);
            sum += f * (i == 0 || i == n ? 1 : (i % 2 ? 4 : 2));
        }
        return sum * h / 3;
    };
    // 2 pi * int r (1 + r^2/2)^-2 dr = 2 pi.
    CHECK(mass(1.0) == doctest::Approx(2 * M_PI).epsilon(1e-9));
    CHECK(mass(0.5) == doctest::Approx(mass(2.0)).epsilon(1e-9));
}

TEST_CASE("quadrature: closed-form integrals under both maps") {
    for (MapKind map : {MapKind::rational, MapKind::tangent}) {
        CHECK(quadrature(map, {-3.0, 0.0}, 1e-13) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(quadrature(map, {-2.0, 0.0}, 1e-13) == doctest::Approx(1.0).epsilon(1e-12));
        // int (1+r)^p r^b dr = B(b+1, -p-b-1)
        for (auto [pw, b] : {std::pair{-4.0, 0.5}, std::pair{-3.0, -0.5}, std::pair{-5.0, 1.0}, std::pair{-2.2, -0.3}}) {
            const double exact = std::beta(b + 1.0, -pw - b - 1.0);
            CAPTURE(pw);
            CAPTURE(b);
            CHECK(quadrature(map, {pw, b}, 1e-12) == doctest::Approx(exact).epsilon(1e-9));
        }
    }
}

TEST_CASE("quadrature: maps agree and tolerance halving is stable") {
    const PowerIntegrand f{-2.7, 0.25};
    const double a = quadrature(MapKind::rational, f, 1e-12);
    const double b = quadrature(MapKind::tangent, f, 1e-12);
    CHECK(std::abs(a - b) < 1e-10);
    const auto coarse = integrate_power(MapKind::rational, f, 1e-8);
    const auto fine = integrate_power(MapKind::rational, f, 0.5e-8);
    CHECK(std::abs(coarse.value - fine.value) < 2e-8);
    CHECK(fine.error_estimate <= 1e-8);
}

TEST_CASE("quadrature rejects non-integrable integrands") {
    CHECK_THROWS_AS(quadrature(MapKind::rational, {-1.0, 0.0}, 1e-10), QuadratureError);
    CHECK_THROWS_AS(quadrature(MapKind::rational, {-3.0, -1.0}, 1e-10), QuadratureError);
}

TEST_CASE("oracle results record provenance") {
    const Params p = Params::critical_case(2, 0.5);
    const OracleResult r = barenblatt_fde_profile(1.0, {0.0, 1.0}, 1.0, p);
    CHECK(r.method == Method::closed_form);
    CHECK(r.value.size() == 2);
    CHECK(to_string(Method::quadrature) == "high-resolution quadrature");
}
