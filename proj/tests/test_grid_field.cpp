#include <doctest.h>

#include "fdabs/field.hpp"
#include "fdabs/profiles.hpp"

#include <cmath>
#include <numeric>

using namespace fdabs;

TEST_CASE("N=1 uniform grid uses the two-sided measure") {
    const GridPtr g = build_grid(1, 1.0, 10);
    CHECK(unit_sphere_measure(1) == 2.0);
    for (std::size_t i = 0; i <= 10; ++i) CHECK(g->faces()[i] == doctest::Approx(0.1 * i));
    for (double v : g->volumes()) CHECK(v == doctest::Approx(0.2));
    CHECK(g->centers()[0] == doctest::Approx(0.05));
}

TEST_CASE("volumes telescope to the ball volume") {
    for (int N : {1, 2, 3, 5}) {
        for (double stretch : {1.0, 1.01}) {
            const GridPtr g = build_grid(N, 3.0, 64, stretch);
            const auto v = g->volumes();
            const double total = std::accumulate(v.begin(), v.end(), 0.0);
            CHECK(total == doctest::Approx(unit_sphere_measure(N) * std::pow(3.0, N) / N).epsilon(1e-13));
            CHECK(g->R_max() == 3.0);
        }
    }
    CHECK(unit_sphere_measure(3) == doctest::Approx(4 * M_PI));
}

TEST_CASE("stretched grid grows geometrically") {
    const GridPtr g = build_grid(2, 10.0, 20, 1.1);
    const auto f = g->faces();
    for (std::size_t i = 1; i + 1 < f.size(); ++i) {
        CHECK((f[i + 1] - f[i]) / (f[i] - f[i - 1]) == doctest::Approx(1.1));
    }
    CHECK(g->h_min() == doctest::Approx(f[1]));
}

TEST_CASE("grid arguments are validated") {
    CHECK_THROWS_AS(build_grid(2, 1.0, 7), ParameterError);
    CHECK_THROWS_AS(build_grid(2, 0.0, 10), ParameterError);
    CHECK_THROWS_AS(build_grid(2, 1.0, 10, 0.9), ParameterError);
}

TEST_CASE("grid_from_centers recovers faces") {
    const GridPtr g = build_grid(3, 5.0, 32, 1.05);
    const GridPtr h = grid_from_centers(3, g->centers());
    for (std::size_t i = 0; i < g->faces().size(); ++i) CHECK(h->faces()[i] == doctest::Approx(g->faces()[i]));
    CHECK(g->last_index_at_or_below(0.0) == -1);
    CHECK(g->last_index_at_or_below(5.0) == 31);
}

TEST_CASE("initial data descriptors") {
    const Params p = Params::critical_case(2, 0.5);
    const GridPtr g = build_grid(2, 4.0, 40);
    const Field ind = init_field(g, initial::Indicator{1.0, 1.0}, p);
    for (std::size_t i = 0; i < g->n_cells(); ++i) CHECK(ind.values[i] == (g->centers()[i] < 1.0 ? 1.0 : 0.0));

    const Field sig = init_field(g, initial::Barenblatt{1.0}, p);
    for (std::size_t i = 0; i < g->n_cells(); ++i) CHECK(sig.values[i] == sigma(1.0, g->centers()[i], p));

    const Field tail = init_field(g, initial::PowerTail{1.0, 1.0, 3.0}, p);
    for (std::size_t i = 0; i < g->n_cells(); ++i) {
        CHECK(tail.values[i] == std::min(1.0, std::pow(g->centers()[i], -3.0)));
    }
    const Field tab = init_field(g, initial::Table{{0.0, 4.0}, {2.0, 0.0}}, p);
    CHECK(tab.values[0] == doctest::Approx(2.0 - 0.5 * g->centers()[0]));

    CHECK_THROWS_AS(init_field(g, initial::Indicator{0.01, 1.0}, p), ParameterError);
    CHECK_THROWS_AS(init_field(g, initial::Table{{0.0, 1.0}, {0.0, 0.0}}, p), ParameterError);
    CHECK_THROWS_AS(init_field(g, initial::Constant{-1.0}, p), ParameterError);
}

TEST_CASE("observables") {
    const Params p = Params::critical_case(3, 0.5);
    const GridPtr g = build_grid(3, 1.0, 16);
    const Snapshot s = make_snapshot(0.0, init_field(g, initial::Constant{1.0}, p));
    CHECK(s.mass == doctest::Approx(4 * M_PI / 3));
    CHECK(s.sup == 1.0);
    const Observables z = observables(Field{g, std::vector<double>(16, 0.0)});
    CHECK(z.mass == 0.0);
    CHECK(z.sup == 0.0);
    CHECK(z.center_value == 0.0);
    const Field sig = init_field(g, initial::Barenblatt{1.0}, p);
    CHECK(observables(sig).center_value == sigma(1.0, g->centers()[0], p));
}
