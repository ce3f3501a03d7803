#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "ruinlab/asymptotics.hpp"
#include "ruinlab/claims.hpp"
#include "ruinlab/diagnostics.hpp"
#include "ruinlab/laws.hpp"
#include "ruinlab/quadrature.hpp"
#include "ruinlab/rng.hpp"
#include "ruinlab/ruinsets.hpp"

using namespace ruinlab;

namespace {

ModelPtr pareto2_pair() {
    return independent_marginals_model({pareto_law(2.0, 1.0), pareto_law(2.0, 1.0)});
}

HyperplaneFamily union11() { return {2, {Vec{1.0, 0.0}, Vec{0.0, 1.0}}}; }

}  // namespace

TEST_CASE("safety loading validation") {
    SafetyLoading ok{Vec{1.0, 2.0}, "analytic", {}};
    CHECK(!ok.validate().has_value());

    SafetyLoading neg{Vec{1.0, -0.5}, "analytic", {}};
    CHECK(neg.validate().has_value());

    SafetyLoading mc_ok{Vec{1.0, 2.0}, "mc", Vec{0.01, 0.02}};
    CHECK(!mc_ok.validate().has_value());

    // 1.0 +- 0.4 does not clear zero at 3 sigma
    SafetyLoading mc_weak{Vec{1.0, 2.0}, "mc", Vec{0.4, 0.02}};
    CHECK(mc_weak.validate().has_value());
    CHECK_THROWS_AS(mc_weak.validate_or_throw(), std::invalid_argument);

    SafetyLoading bad_prov{Vec{1.0}, "guessed", {}};
    CHECK(bad_prov.validate().has_value());
    SafetyLoading stray_se{Vec{1.0}, "analytic", Vec{0.1}};
    CHECK(stray_se.validate().has_value());
}

TEST_CASE("theta: deterministic claim is exact with zero spread") {
    auto model = point_model(Vec{2.0, 4.0});
    const RngStream stream(77, 1);
    // min(2/1, 4/2) = 2 for every sample
    Estimate e = theta_mc(*model, Vec{1.0, 2.0}, 1000, stream);
    CHECK(e.value == doctest::Approx(2.0));
    CHECK(e.stderr_v == doctest::Approx(0.0));
    CHECK(e.method == "mc");
}

TEST_CASE("theta: exponential pair, quadrature vs closed form vs mc") {
    auto model = independent_marginals_model({exponential_law(1.0), exponential_law(1.0)});
    // P(min(X1,X2) > v) = e^(-2v), so theta = 1/2
    Estimate q = theta_quadrature(*model, Vec{1.0, 1.0});
    CHECK(q.value == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(q.method == "quadrature");

    const RngStream stream(78, 1);
    Estimate m = theta_mc(*model, Vec{1.0, 1.0}, 400000, stream);
    CHECK(m.stderr_v > 0.0);
    CHECK(std::fabs(m.value - 0.5) < 4.0 * m.stderr_v);
}

TEST_CASE("theta: pareto pair quadrature hits the symbolic value") {
    auto model = pareto2_pair();
    // integral of min(1, v^-4): 1 + 1/3
    Estimate q = theta_quadrature(*model, Vec{1.0, 1.0});
    CHECK(q.value == doctest::Approx(4.0 / 3.0).epsilon(1e-7));

    const RngStream stream(79, 1);
    Estimate m = theta_mc(*model, Vec{1.0, 1.0}, 400000, stream);
    CHECK(std::fabs(m.value - 4.0 / 3.0) < 4.0 * m.stderr_v);
}

TEST_CASE("theta: bad inputs") {
    auto model = pareto2_pair();
    const RngStream stream(80, 1);
    CHECK_THROWS_AS(theta_mc(*model, Vec{1.0}, 100, stream), std::invalid_argument);
    CHECK_THROWS_AS(theta_mc(*model, Vec{1.0, 0.0}, 100, stream), std::invalid_argument);
    // infinite-mean marginals are rejected up front
    auto heavy = independent_marginals_model({pareto_law(0.9, 1.0), pareto_law(0.9, 1.0)});
    CHECK_THROWS_AS(theta_mc(*heavy, Vec{1.0, 1.0}, 100, stream), std::invalid_argument);
    CHECK_THROWS_AS(theta_quadrature(*heavy, Vec{1.0, 1.0}), std::invalid_argument);
    // polar model has no closed-form independent marginals
    auto polar = polar_model(AngularMeasure::uniform(2), pareto_law(3.0, 1.0));
    CHECK_THROWS_AS(theta_quadrature(*polar, Vec{1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("h curve: one-dimensional pareto matches 1/(c u)") {
    auto model = independent_marginals_model({pareto_law(2.0, 1.0)});
    HyperplaneFamily fam{1, {Vec{1.0}}};
    const Vec c{2.0};
    TailCurve q = h_curve_quadrature(*model, fam, c, {2.0, 5.0, 20.0});
    REQUIRE(q.values.size() == 3);
    CHECK(q.values[0] == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(q.values[1] == doctest::Approx(0.10).epsilon(1e-6));
    CHECK(q.values[2] == doctest::Approx(0.025).epsilon(1e-6));
    CHECK(q.method == "quadrature");
    CHECK(q.stderrs[0] == 0.0);

    const RngStream stream(81, 1);
    HCurve m = h_curve_mc(*model, fam, c, {2.0, 5.0, 20.0}, 2000000, stream);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(!m.curve.inconclusive[i]);
        CHECK(std::fabs(m.curve.values[i] - q.values[i]) < 4.0 * m.curve.stderrs[i]);
    }
}

TEST_CASE("h curve: deterministic claim gives the sojourn exactly") {
    auto model = point_model(Vec{3.0, 1.0});
    HyperplaneFamily fam{2, {Vec{1.0, 1.0}}};
    const Vec c{1.0, 1.0};
    const RngStream stream(82, 1);
    HCurve m = h_curve_mc(*model, fam, c, {1.0, 3.0}, 100, stream);
    const Vec x{3.0, 1.0};
    CHECK(m.curve.values[0] == excess_sojourn(fam, x, c, 1.0));
    CHECK(m.curve.values[0] == doctest::Approx(1.5));
    CHECK(m.curve.values[1] == doctest::Approx(0.5));
    CHECK(m.curve.stderrs[0] == 0.0);
    CHECK(!m.unstable[0]);
}

TEST_CASE("h curve: union family pareto pair, quadrature oracle and mc agreement") {
    auto model = pareto2_pair();
    const Vec c{1.0, 1.0};
    TailCurve q = h_curve_quadrature(*model, union11(), c, {5.0, 10.0, 20.0});
    // 2/u - u^-3/3 by inclusion-exclusion of the two coordinate tails
    CHECK(q.values[1] == doctest::Approx(0.2 - 1e-3 / 3.0).epsilon(1e-6));
    CHECK(q.values[0] == doctest::Approx(0.4 - 0.008 / 3.0).epsilon(1e-6));

    const RngStream stream(83, 1);
    HCurve m = h_curve_mc(*model, union11(), c, {5.0, 10.0, 20.0}, 1000000, stream);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(std::fabs(m.curve.values[i] - q.values[i]) < 4.0 * m.curve.stderrs[i]);
}

TEST_CASE("h curve: aggregate direction on exponential marginals (table path)") {
    auto model = independent_marginals_model({exponential_law(1.0), exponential_law(1.0)});
    HyperplaneFamily fam{2, {Vec{1.0, 1.0}}};
    const Vec c{1.0, 1.0};
    TailCurve q = h_curve_quadrature(*model, fam, c, {1.0, 3.0});
    // S_{X1+X2}(t) = (1+t)e^-t integrated: H(u) = e^-u (u+2)/2
    CHECK(q.values[0] == doctest::Approx(std::exp(-1.0) * 1.5).epsilon(5e-3));
    CHECK(q.values[1] == doctest::Approx(std::exp(-3.0) * 2.5).epsilon(5e-3));

    const RngStream stream(84, 1);
    HCurve m = h_curve_mc(*model, fam, c, {1.0, 3.0}, 500000, stream);
    for (std::size_t i = 0; i < 2; ++i)
        CHECK(std::fabs(m.curve.values[i] - q.values[i]) <
              4.0 * m.curve.stderrs[i] + 5e-3 * q.values[i]);
}

TEST_CASE("h curve: scale consistency is exact on shared samples") {
    auto model = pareto2_pair();
    HyperplaneFamily fam{2, {Vec{0.3, 0.7}, Vec{1.0, 0.0}}};
    HyperplaneFamily half{2, {Vec{0.15, 0.35}, Vec{0.5, 0.0}}};
    const Vec c{1.0, 2.0};
    const RngStream stream(85, 1);
    // Halving every direction and the levels describes the same region and
    // the same sojourn pathwise, so the estimates agree bit for bit.
    HCurve a = h_curve_mc(*model, fam, c, {4.0, 8.0}, 1 << 16, stream);
    HCurve b = h_curve_mc(*model, half, c, {2.0, 4.0}, 1 << 16, stream);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(a.curve.values[i] == b.curve.values[i]);
        CHECK(a.curve.stderrs[i] == b.curve.stderrs[i]);
    }
}

TEST_CASE("h curve: long-tail trend of the asymptote") {
    auto model = pareto2_pair();
    const Vec c{1.0, 1.0};
    TailCurve q =
        h_curve_quadrature(*model, union11(), c, {20.0, 25.0, 200.0, 205.0});
    const double near = q.values[3] / q.values[2];
    const double far = q.values[1] / q.values[0];
    CHECK(near > 0.95);
    CHECK(near < 1.0);
    CHECK(std::fabs(near - 1.0) < std::fabs(far - 1.0));
}

TEST_CASE("h curve: unsupported quadrature combinations throw") {
    auto model = pareto2_pair();
    const Vec c{1.0, 1.0};
    HyperplaneFamily two_slanted{2, {Vec{0.5, 0.5}, Vec{0.8, 0.2}}};
    CHECK_THROWS_AS(h_curve_quadrature(*model, two_slanted, c, {5.0}), std::invalid_argument);
    auto polar = polar_model(AngularMeasure::single_atom(Vec{0.5, 0.5}), pareto_law(2.0, 1.0));
    CHECK_THROWS_AS(h_curve_quadrature(*polar, union11(), c, {5.0}), std::invalid_argument);
}

TEST_CASE("integrated scalar survival: one-dimensional pareto") {
    auto model = independent_marginals_model({pareto_law(2.0, 1.0)});
    HyperplaneFamily fam{1, {Vec{1.0}}};
    const Vec c{1.0};
    // H(u) = 1/u, theta = E[X] = 2: survival is 1/(2u) past the scale
    TailCurve s = integrated_scalar_survival(*model, fam, c, {2.0, 8.0});
    CHECK(s.values[0] == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(s.values[1] == doctest::Approx(0.0625).epsilon(1e-6));
    CHECK(s.values[0] <= 1.0);
    CHECK(s.values[1] < s.values[0]);
}

TEST_CASE("integrated scalar table feeds the convolution ratio test") {
    auto model = independent_marginals_model({pareto_law(2.0, 1.0)});
    HyperplaneFamily fam{1, {Vec{1.0}}};
    const Vec c{1.0};
    SurvivalTable tab = integrated_scalar_table(*model, fam, c, 4000.0, 513);
    CHECK(tab.eval(0.0) == doctest::Approx(1.0));
    CHECK(tab.eval(4.0) == doctest::Approx(0.125).epsilon(2e-3));
    // the integrated pareto tail is ~1/(2u): heavy, and its two-fold
    // convolution ratio settles at 2 (slow, log-speed convergence, so the
    // deterministic band matters)
    RatioVerdict rv = convolution_ratio_numeric(tab, {250.0, 500.0, 1000.0});
    CHECK(rv.verdict == Verdict::kConsistent);
    CHECK(rv.points.back().ratio == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("mrv constant: single atom closed form and scalings") {
    MrvDescriptor mrv;
    mrv.alpha = 2.0;
    mrv.spectral = AngularMeasure::single_atom(Vec{0.5, 0.5});
    mrv.norm_law = pareto_law(2.0, 1.0);
    HyperplaneFamily fam{2, {Vec{0.5, 0.5}}};

    Estimate e = mrv_ruin_constant(mrv, fam, Vec{1.0, 1.0});
    CHECK(e.value == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(e.method == "exact");

    // doubling the drift halves the constant (v-substitution)
    Estimate e2 = mrv_ruin_constant(mrv, fam, Vec{2.0, 2.0});
    CHECK(e2.value == doctest::Approx(0.125).epsilon(1e-12));

    // monotone decreasing in every drift component
    Estimate e3 = mrv_ruin_constant(mrv, fam, Vec{1.5, 1.0});
    CHECK(e3.value < e.value);

    CHECK_THROWS_AS(mrv_ruin_constant(MrvDescriptor{1.0, mrv.spectral, nullptr}, fam,
                                      Vec{1.0, 1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(mrv_ruin_constant(MrvDescriptor{0.8, mrv.spectral, nullptr}, fam,
                                      Vec{1.0, 1.0}),
                    std::invalid_argument);
}

TEST_CASE("mrv constant: axis atoms against the union family") {
    const double alpha = 1.7;
    MrvDescriptor mrv;
    mrv.alpha = alpha;
    mrv.spectral = AngularMeasure::atom_list(
        {{Vec{1.0, 0.0}, 1.0}, {Vec{0.0, 1.0}, 1.0}});
    // each atom sees only its own half-space: 2 * 1/(alpha-1)
    Estimate e = mrv_ruin_constant(mrv, union11(), Vec{1.0, 1.0});
    CHECK(e.value == doctest::Approx(2.0 / 0.7).epsilon(1e-9));

    // mass-1 normalization scales linearly
    mrv.spectral = AngularMeasure::atom_list(
        {{Vec{1.0, 0.0}, 0.5}, {Vec{0.0, 1.0}, 0.5}});
    Estimate half = mrv_ruin_constant(mrv, union11(), Vec{1.0, 1.0});
    CHECK(half.value == doctest::Approx(1.0 / 0.7).epsilon(1e-9));

    // an atom orthogonal to every direction contributes nothing
    MrvDescriptor blind;
    blind.alpha = 2.0;
    blind.spectral = AngularMeasure::atom_list(
        {{Vec{1.0, 0.0}, 1.0}, {Vec{0.0, 1.0}, 1.0}});
    HyperplaneFamily first_only{2, {Vec{1.0, 0.0}}};
    Estimate b = mrv_ruin_constant(blind, first_only, Vec{1.0, 1.0});
    CHECK(b.value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("mrv constant: envelope switch handled exactly") {
    // directions e1, e2 with drift (10, 0.1) and atom (0.8, 0.2): the active
    // threshold switches at v = 0.3125 and the hand value is 14.4/33
    MrvDescriptor mrv;
    mrv.alpha = 2.0;
    mrv.spectral = AngularMeasure::single_atom(Vec{0.8, 0.2});
    const Vec c{10.0, 0.1};
    Estimate e = mrv_ruin_constant(mrv, union11(), c);
    CHECK(e.value == doctest::Approx(14.4 / 33.0).epsilon(1e-12));

    // independent cross-check: brute-force quadrature of the same envelope
    auto f = [&](double v) {
        const double l1 = (1.0 + 10.0 * v) / 0.8;
        const double l2 = (1.0 + 0.1 * v) / 0.2;
        const double m = std::min(l1, l2);
        return 1.0 / (m * m);
    };
    QuadResult q = integrate_decreasing_upper(f, 0.0, 0.3, 1e-10);
    CHECK(e.value == doctest::Approx(q.value).epsilon(1e-6));
}

TEST_CASE("mrv constant: mc agrees with the exact atomic value") {
    MrvDescriptor mrv;
    mrv.alpha = 2.0;
    mrv.spectral = AngularMeasure::atom_list(
        {{Vec{1.0, 0.0}, 0.3}, {Vec{0.2, 0.8}, 0.7}});
    Estimate exact = mrv_ruin_constant(mrv, union11(), Vec{1.0, 1.0});
    const RngStream stream(86, 1);
    Estimate mc = mrv_ruin_constant_mc(mrv, union11(), Vec{1.0, 1.0}, 100000, stream);
    CHECK(mc.stderr_v > 0.0);
    CHECK(std::fabs(mc.value - exact.value) < 4.0 * mc.stderr_v);
}

TEST_CASE("mrv constant: dirichlet spectral measure") {
    MrvDescriptor mrv;
    mrv.alpha = 2.0;
    mrv.spectral = AngularMeasure::uniform(2);
    const RngStream stream(87, 1);

    // aggregate direction (1/2,1/2): p.theta = 1/2 for every theta on the
    // simplex, so the integrand is constant and the mc estimate is exact
    HyperplaneFamily agg{2, {Vec{0.5, 0.5}}};
    Estimate flat = mrv_ruin_constant_mc(mrv, agg, Vec{1.0, 1.0}, 20000, stream);
    CHECK(flat.value == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(flat.stderr_v < 1e-12);

    // union family: per theta the integral is max(theta1, theta2)^2, whose
    // uniform mean is 7/12
    Estimate u = mrv_ruin_constant_mc(mrv, union11(), Vec{1.0, 1.0}, 200000, stream.child(1));
    CHECK(u.stderr_v > 0.0);
    CHECK(std::fabs(u.value - 7.0 / 12.0) < 4.0 * u.stderr_v);

    // exact path refuses densities
    CHECK_THROWS_AS(mrv_ruin_constant(mrv, agg, Vec{1.0, 1.0}), std::invalid_argument);
}
