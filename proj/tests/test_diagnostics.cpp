#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "ruinlab/claims.hpp"
#include "ruinlab/diagnostics.hpp"
#include "ruinlab/parallel.hpp"
#include "ruinlab/quadrature.hpp"
#include "ruinlab/stats.hpp"
#include "ruinlab/survival_table.hpp"

using namespace ruinlab;

TEST_CASE("survival table: construction, interpolation, clamping") {
    SurvivalTable t({0.0, 1.0, 2.0, 4.0}, {1.0, 0.5, 0.25, 0.0});
    CHECK(t.eval(-1.0) == 1.0);
    CHECK(t.eval(0.0) == 1.0);
    CHECK(t.eval(0.5) == doctest::Approx(0.75));
    CHECK(t.eval(3.0) == doctest::Approx(0.125));
    CHECK(t.eval(4.0) == 0.0);
    CHECK(t.eval(9.0) == 0.0);

    // non-monotone input is clamped down
    SurvivalTable c({0.0, 1.0, 2.0}, {0.8, 0.9, 0.1});
    CHECK(c.values()[1] == 0.8);

    CHECK_THROWS_AS(SurvivalTable({0.0, 1.0}, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(SurvivalTable({1.0, 0.5}, {1.0, 0.5}), std::invalid_argument);

    auto g = SurvivalTable::geometric_nodes(0.01, 100.0, 50);
    CHECK(g.front() == 0.0);
    CHECK(g[1] == doctest::Approx(0.01));
    CHECK(g.back() == 100.0);
    CHECK(g.size() == 51);
}

TEST_CASE("two-fold convolution of Exp(1) matches (1+t)e^-t") {
    auto nodes = SurvivalTable::geometric_nodes(1e-3, 40.0, 3000);
    SurvivalTable tab(nodes, [](double x) { return std::exp(-x); });
    for (double t : {0.5, 2.0, 5.0, 10.0, 20.0}) {
        double err = 0.0;
        const double got = tab.convolve_at(tab, t, &err);
        const double exact = (1.0 + t) * std::exp(-t);
        CHECK(got == doctest::Approx(exact).epsilon(2e-3));
        // reported refinement difference bounds the real error up to a small factor
        CHECK(std::fabs(got - exact) <= std::max(6.0 * err, 1e-9));
    }
    // full-grid convolve agrees with the pointwise sum on shared nodes
    auto conv = tab.convolve(tab);
    for (std::size_t i = 200; i < conv.nodes().size(); i += 700) {
        const double x = conv.nodes()[i];
        CHECK(conv.values()[i] == doctest::Approx((1.0 + x) * std::exp(-x)).epsilon(5e-3));
    }
}

TEST_CASE("two-fold convolution of Pareto(2) matches an adaptive-quadrature oracle") {
    auto nodes = SurvivalTable::geometric_nodes(1e-2, 4000.0, 4000);
    SurvivalTable tab(nodes, [](double x) { return x < 1.0 ? 1.0 : 1.0 / (x * x); });
    for (double t : {10.0, 100.0, 1000.0}) {
        // P(X+Y > t) = (t-1)^-2 + int_1^{t-1} (t-y)^-2 2 y^-3 dy, straight from
        // the density, evaluated by Gauss-Kronrod bisection.
        const auto q = integrate_adaptive(
            [t](double y) {
                const double a = t - y;
                return 2.0 / (a * a * y * y * y);
            },
            1.0, t - 1.0, 1e-12, 1e-10);
        const double exact = q.value + 1.0 / ((t - 1.0) * (t - 1.0));
        double err = 0.0;
        const double got = tab.convolve_at(tab, t, &err);
        CHECK(got == doctest::Approx(exact).epsilon(4e-3));
    }
}

TEST_CASE("compound geometric of Exp(1) has the closed-form exponential tail") {
    auto nodes = SurvivalTable::geometric_nodes(1e-3, 60.0, 1500);
    SurvivalTable tab(nodes, [](double x) { return std::exp(-x); });
    const double rho = 0.5;
    auto comp = compound_geometric_tail(tab, rho, 1e-10);
    for (double t : {0.5, 2.0, 5.0, 10.0}) {
        const double exact = rho * std::exp(-(1.0 - rho) * t);
        CHECK(comp.eval(t) == doctest::Approx(exact).epsilon(5e-3));
    }
    CHECK_THROWS_AS(compound_geometric_tail(tab, 1.0), std::invalid_argument);
}

TEST_CASE("convolution of a unit point mass doubles the step location") {
    auto nodes = SurvivalTable::geometric_nodes(1e-2, 8.0, 800);
    SurvivalTable tab(nodes, [](double x) { return x < 1.0 ? 1.0 : 0.0; });
    CHECK(tab.convolve_at(tab, 1.5) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(tab.convolve_at(tab, 2.5) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("numeric convolution ratio: Exp grows like 1+t, Pareto settles at 2") {
    auto enodes = SurvivalTable::geometric_nodes(1e-3, 30.0, 3000);
    SurvivalTable etab(enodes, [](double x) { return std::exp(-x); });
    auto ev = convolution_ratio_numeric(etab, {1.0, 5.0, 10.0, 20.0});
    for (std::size_t i = 0; i < ev.points.size(); ++i) {
        const double t = ev.points[i].level;
        CHECK(ev.points[i].ratio == doctest::Approx(1.0 + t).epsilon(0.01));
    }
    CHECK(ev.verdict == Verdict::kInconsistent);

    auto pnodes = SurvivalTable::geometric_nodes(1e-2, 8000.0, 4000);
    SurvivalTable ptab(pnodes, [](double x) { return x < 1.0 ? 1.0 : 1.0 / (x * x); });
    auto pv = convolution_ratio_numeric(ptab, {250.0, 500.0, 1000.0, 2000.0});
    CHECK(pv.points[2].ratio > 1.9);
    CHECK(pv.points[2].ratio < 2.1);
    CHECK(pv.verdict == Verdict::kConsistent);

    // exhausted tail: base survival 0 -> inconclusive point, not a crash
    SurvivalTable step({0.0, 0.5, 1.0, 2.0}, {1.0, 1.0, 0.0, 0.0});
    auto sv = convolution_ratio_numeric(step, {1.5});
    CHECK(sv.points[0].inconclusive);
    CHECK(sv.verdict == Verdict::kInconclusive);
}

TEST_CASE("empirical scalarized survival: dyadic aggregate matches the exact sum law") {
    auto model = dyadic_simplex_model();
    HyperplaneFamily agg{2, {{0.5, 0.5}}};
    const std::vector<double> levels{0.6, 1.3, 2.6, 5.2};
    const std::uint64_t n = 200000;
    RngStream stream(2024, 0);
    auto curve = empirical_scalarized_survival(*model, agg, levels, n, stream);
    REQUIRE(curve.values.size() == levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const double exact = dyadic_sum_survival(2.0 * levels[i]);
        CHECK(std::fabs(curve.values[i] - exact) <= 4.0 * curve.stderrs[i] + 1e-12);
    }
    // deterministic given (seed, n): a second run reproduces the counts
    auto again = empirical_scalarized_survival(*model, agg, levels, n, stream);
    CHECK(again.values == curve.values);
    // and the result is invariant to the worker count
    set_max_threads(3);
    auto threaded = empirical_scalarized_survival(*model, agg, levels, n, stream);
    set_max_threads(1);
    CHECK(threaded.values == curve.values);
}

TEST_CASE("empirical scalarized survival: degenerate point claim is a step") {
    auto model = point_model(Vec{1.0, 1.0});
    HyperplaneFamily agg{2, {{0.5, 0.5}}};
    RngStream stream(7, 0);
    auto curve = empirical_scalarized_survival(*model, agg, {0.5, 0.9, 1.0, 1.1}, 5000, stream);
    CHECK(curve.values[0] == 1.0);
    CHECK(curve.values[1] == 1.0);
    CHECK(curve.values[2] == 0.0);  // strict exceedance at the atom itself
    CHECK(curve.values[3] == 0.0);
}

TEST_CASE("convolution ratio mc: independent Pareto(1.5) pair near the limit") {
    auto model = independent_marginals_model({pareto_law(1.5, 1.0), pareto_law(1.5, 1.0)});
    HyperplaneFamily agg{2, {{0.5, 0.5}}};
    // The two-fold ratio runs ~2 + 9/u here, so the grid has to sit past the
    // overshoot region before the final-three reading can cover the limit.
    const std::vector<double> levels{40.0, 80.0, 160.0, 320.0};
    RngStream stream(99, 0);
    auto r2 = convolution_ratio_mc(*model, agg, 2, levels, 200000, stream);
    CHECK(r2.sandwich_ok);
    CHECK(r2.verdict.verdict == Verdict::kConsistent);
    const auto& first = r2.verdict.points.front();
    CHECK(first.ratio > 1.9);
    CHECK(first.ratio < 2.7);

    auto r1 = convolution_ratio_mc(*model, agg, 1, levels, 50000, stream);
    for (const auto& p : r1.verdict.points) CHECK(p.ratio == 1.0);
    CHECK(r1.verdict.verdict == Verdict::kConsistent);
}

TEST_CASE("random sum ratio: geometric Pareto sums match the mean count") {
    auto model = independent_marginals_model({pareto_law(1.5, 1.0), pareto_law(1.5, 1.0)});
    HyperplaneFamily agg{2, {{0.5, 0.5}}};
    RngStream stream(1234, 0);
    auto rv = random_sum_ratio(*model, agg, 0.5, {40.0, 80.0, 160.0, 320.0}, 200000, stream);
    CHECK(rv.target == 2.0);
    // The compound overshoot decays like ~39/u: clearly visible at the low
    // end, inside the widening CIs at the top.  Requiring "consistent" here
    // would hang the test on seed luck, so assert the robust reading.
    CHECK(rv.verdict != Verdict::kInconsistent);
    CHECK(rv.points.front().ratio > 2.2);
    CHECK(rv.points[2].hi > 2.0);
    CHECK(rv.points[3].hi > 2.0);

    auto unit = random_sum_ratio(*model, agg, 1.0, {10.0, 20.0}, 1000, stream);
    for (const auto& p : unit.points) CHECK(p.ratio == 1.0);

    // light-tailed control: exponential claims compound to a fatter exponential
    auto light = independent_marginals_model({exponential_law(1.0)});
    HyperplaneFamily line{1, {{1.0}}};
    auto lv = random_sum_ratio(*light, line, 0.5, {2.0, 3.0, 4.0, 5.0}, 200000, stream);
    CHECK(lv.verdict == Verdict::kInconsistent);
    CHECK(lv.points.back().ratio > 4.0);  // truth is e^{u/2}, far above target 2
}

TEST_CASE("long tail test: laws") {
    auto pv = long_tail_test(*pareto_law(1.5, 1.0), 1.0, {75.0, 150.0, 300.0, 600.0});
    CHECK(pv.verdict == Verdict::kConsistent);

    auto ev = long_tail_test(*exponential_law(1.0), 1.0, {2.0, 4.0, 8.0, 16.0});
    CHECK(ev.verdict == Verdict::kInconsistent);
    CHECK(ev.points.back().ratio == doctest::Approx(std::exp(-1.0)));

    // dyadic sum law: shifting by 1 exactly halves the tail at powers of two
    std::vector<double> dyadic_levels{3.0, 7.0, 15.0, 31.0};
    auto dv = long_tail_test(*dyadic_sum_law(), 1.0, dyadic_levels);
    CHECK(dv.verdict == Verdict::kInconsistent);
    CHECK(dv.points.back().ratio == doctest::Approx(0.5));
}

TEST_CASE("long tail test: estimated curve variant") {
    auto model = independent_marginals_model({pareto_law(1.5, 1.0), pareto_law(1.5, 1.0)});
    HyperplaneFamily agg{2, {{0.5, 0.5}}};
    std::vector<double> levels;
    for (double u = 10.0; u <= 320.0; u *= 1.3) levels.push_back(u);
    RngStream stream(5150, 0);
    auto curve = empirical_scalarized_survival(*model, agg, levels, 300000, stream);
    auto lt = long_tail_test(curve, 1.0);
    CHECK(lt.target == 1.0);
    CHECK(lt.verdict == Verdict::kConsistent);
}

TEST_CASE("dominated variation test") {
    auto pv = dominated_variation_test(*pareto_law(2.0, 1.0), {10.0, 40.0, 160.0});
    CHECK(pv.verdict.verdict == Verdict::kConsistent);
    CHECK(pv.inf_ratio == doctest::Approx(0.25));

    auto wv = dominated_variation_test(*weibull_law(0.5, 1.0), {25.0, 100.0, 400.0});
    CHECK(wv.verdict.verdict == Verdict::kInconsistent);

    auto mv = dominated_variation_test(*dyadic_marginal_law(), {0.7, 3.0, 11.0, 50.0});
    CHECK(mv.verdict.verdict == Verdict::kConsistent);
    CHECK(mv.inf_ratio == doctest::Approx(0.5));
}

TEST_CASE("translation test") {
    auto model = independent_marginals_model({pareto_law(1.5, 1.0), pareto_law(1.5, 1.0)});
    HyperplaneFamily agg{2, {{0.5, 0.5}}};
    RngStream stream(31337, 0);

    auto zero = translation_test(*model, agg, Vec{0.0, 0.0}, {5.0, 10.0, 20.0}, 1000, stream);
    for (const auto& p : zero.points) CHECK(p.ratio == 1.0);
    CHECK(zero.verdict == Verdict::kConsistent);

    // The shift eats 0.75 off the scalarized level, so the true ratio is
    // (1 + 0.75/u)^-1.5 -> 1; at reachable u that deviation rides the CI
    // boundary, so only the robust reading is asserted.
    auto heavy =
        translation_test(*model, agg, Vec{1.0, 0.5}, {30.0, 60.0, 120.0, 240.0}, 600000, stream);
    CHECK(heavy.verdict != Verdict::kInconsistent);
    CHECK(heavy.points.back().ratio > 0.7);
    CHECK(heavy.points.back().ratio < 1.3);

    // exponential marginals: a shift thins the tail by a constant factor
    auto light = independent_marginals_model({exponential_law(1.0), exponential_law(1.0)});
    HyperplaneFamily sum{2, {{1.0, 1.0}}};
    auto lv = translation_test(*light, sum, Vec{0.5, 0.5}, {3.0, 5.0, 7.0, 9.0}, 400000, stream);
    CHECK(lv.verdict == Verdict::kInconsistent);
}

TEST_CASE("kesten bound fit stays small for Pareto scalarizations") {
    auto model = independent_marginals_model({pareto_law(1.5, 1.0), pareto_law(1.5, 1.0)});
    HyperplaneFamily agg{2, {{0.5, 0.5}}};
    RngStream stream(8080, 0);
    auto rep = kesten_check(*model, agg, 0.5, 4, {10.0, 20.0, 40.0}, 200000, stream);
    CHECK(rep.ratio_curves.size() == 4);
    CHECK(rep.k_fit > 0.3);
    CHECK(rep.k_fit < 4.0);
    CHECK(rep.ratio_curves[0].values[0] == 1.0);  // m = 1 reuses the denominator
}

TEST_CASE("suggest_levels builds a usable geometric tail grid") {
    auto model = independent_marginals_model({pareto_law(1.5, 1.0), pareto_law(1.5, 1.0)});
    HyperplaneFamily agg{2, {{0.5, 0.5}}};
    RngStream stream(404, 0);
    auto levels = suggest_levels(*model, agg, 1000000, 6, stream);
    REQUIRE(levels.size() == 6);
    for (std::size_t i = 1; i < levels.size(); ++i) CHECK(levels[i] > levels[i - 1]);
    // top level sits where ~400 hits are expected out of 1e6: P(Y > u) ~ 4e-4
    const double p_top = 2.0 * std::pow(2.0 * levels.back(), -1.5);
    CHECK(p_top > 1e-4);
    CHECK(p_top < 16e-4);

    auto degenerate = point_model(Vec{1.0, 1.0});
    CHECK_THROWS_AS(suggest_levels(*degenerate, agg, 1000000, 6, stream),
                    std::invalid_argument);
}

TEST_CASE("verdict reader edge cases") {
    std::vector<RatioPoint> pts{{1.0, 2.0, 1.9, 2.1, false},
                                {2.0, 2.0, 1.9, 2.1, false},
                                {3.0, 2.0, 1.9, 2.1, true},
                                {4.0, 2.0, 1.9, 2.1, false}};
    CHECK(read_ratio_points(pts, 2.0) == Verdict::kConsistent);
    CHECK(read_ratio_points(pts, 3.0) == Verdict::kInconsistent);
    pts[1].hi = 3.5;  // one of the final three covers, others exclude
    CHECK(read_ratio_points(pts, 3.0) == Verdict::kInconclusive);
    CHECK(read_ratio_points({pts[0], pts[1]}, 2.0) == Verdict::kInconclusive);
    // zero-width exact points get the 1% band
    std::vector<RatioPoint> exact{{1.0, 0.995, 0.995, 0.995, false},
                                  {2.0, 0.996, 0.996, 0.996, false},
                                  {3.0, 0.997, 0.997, 0.997, false}};
    CHECK(read_ratio_points(exact, 1.0) == Verdict::kConsistent);
}
