#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "ruinlab/lp.hpp"
#include "ruinlab/rng.hpp"

using namespace ruinlab;

TEST_CASE("simplex solves a small bounded program") {
    // min -x - y  s.t.  x + y + s = 4  ->  optimum -4 on the facet x + y = 4.
    std::vector<Vec> A{{1.0, 1.0, 1.0}};
    Vec b{4.0};
    Vec c{-1.0, -1.0, 0.0};
    auto r = solve_lp_eq(A, b, c);
    REQUIRE(r.status == LpStatus::kOptimal);
    CHECK(r.objective == doctest::Approx(-4.0));
    CHECK(r.x[0] + r.x[1] == doctest::Approx(4.0));
}

TEST_CASE("simplex terminates on Beale's cycling example") {
    // Classic degenerate program that cycles under naive pivoting; Bland's
    // rule must reach the optimum -1/20.
    std::vector<Vec> A{
        {0.25, -60.0, -1.0 / 25.0, 9.0, 1.0, 0.0, 0.0},
        {0.5, -90.0, -1.0 / 50.0, 3.0, 0.0, 1.0, 0.0},
        {0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0},
    };
    Vec b{0.0, 0.0, 1.0};
    Vec c{-0.75, 150.0, -0.02, 6.0, 0.0, 0.0, 0.0};
    auto r = solve_lp_eq(A, b, c);
    REQUIRE(r.status == LpStatus::kOptimal);
    CHECK(r.objective == doctest::Approx(-0.05));
}

TEST_CASE("simplex reports infeasible and unbounded programs") {
    // x = -1 with x >= 0.
    auto inf = solve_lp_eq({{1.0}}, {-1.0}, {0.0});
    CHECK(inf.status == LpStatus::kInfeasible);

    // min -x  s.t.  x - y = 0: ray x = y -> unbounded.
    auto unb = solve_lp_eq({{1.0, -1.0}}, {0.0}, {-1.0, 0.0});
    CHECK(unb.status == LpStatus::kUnbounded);
}

TEST_CASE("cone membership oracle") {
    std::vector<Vec> orthant{{1.0, 0.0}, {0.0, 1.0}};
    CHECK(cone_contains(orthant, Vec{1.0, 2.0}));
    CHECK(cone_contains(orthant, Vec{0.0, 0.0}));
    CHECK_FALSE(cone_contains(orthant, Vec{-1.0, 0.5}));

    std::vector<Vec> ray{{1.0, 1.0}};
    CHECK(cone_contains(ray, Vec{2.0, 2.0}));
    CHECK_FALSE(cone_contains(ray, Vec{1.0, 2.0}));
}

TEST_CASE("random cone membership agrees with construction") {
    RngStream rng(31, 0);
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 2 + static_cast<int>(rng.uniform() * 3);  // 2..4
        const int g = d + static_cast<int>(rng.uniform() * 3);
        std::vector<Vec> gens(g, Vec(d));
        for (auto& v : gens)
            for (auto& x : v) x = rng.uniform() * 2.0 - 0.5;  // mostly positive
        // Inside point: explicit nonnegative combination.
        Vec inside(d, 0.0);
        for (const auto& v : gens) {
            const double w = rng.uniform();
            for (int i = 0; i < d; ++i) inside[i] += w * v[i];
        }
        CHECK(cone_contains(gens, inside));
        // Outside point: separate with a direction q such that q'g >= 0 for
        // all generators but q'y < 0.
        Vec q(d);
        for (auto& x : q) x = rng.uniform() - 0.5;
        Vec y(d);
        bool separates = true;
        for (const auto& v : gens) {
            double s = 0.0;
            for (int i = 0; i < d; ++i) s += q[i] * v[i];
            if (s < 0.0) separates = false;
        }
        if (separates) {
            for (int i = 0; i < d; ++i) y[i] = -q[i];
            CHECK_FALSE(cone_contains(gens, y));
        }
    }
}

TEST_CASE("halfspace supremum") {
    std::vector<Vec> box{{1.0, 0.0}, {0.0, 1.0}};
    auto r = max_linear_under_halfspaces(Vec{1.0, 1.0}, box);
    REQUIRE(r.bounded);
    CHECK(r.value == doctest::Approx(2.0));

    auto unb = max_linear_under_halfspaces(Vec{1.0}, {{-1.0}});
    CHECK_FALSE(unb.bounded);
}

TEST_CASE("minimum scale into a cone") {
    std::vector<Vec> orthant{{1.0, 0.0}, {0.0, 1.0}};
    // u*(1,1) - (3,-5) >= 0  ->  u >= 3.
    CHECK(min_scale_into_cone(orthant, Vec{1.0, 1.0}, Vec{3.0, -5.0}) == doctest::Approx(3.0));
    // Interior starting point: negative scale is the true minimum.
    CHECK(min_scale_into_cone(orthant, Vec{1.0, 1.0}, Vec{-3.0, -5.0}) == doctest::Approx(-3.0));
}
