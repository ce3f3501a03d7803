#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "ruinlab/laws.hpp"
#include "ruinlab/quadrature.hpp"
#include "ruinlab/rng.hpp"
#include "ruinlab/stats.hpp"

using namespace ruinlab;

TEST_CASE("inverse normal quantile against reference values") {
    CHECK(inv_normal_cdf(0.5) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(inv_normal_cdf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK(inv_normal_cdf(0.8413447460685429) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(inv_normal_cdf(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-9));
    // Round trip through the CDF.  For x near +6 the CDF is within 1e-9 of
    // 1.0, so rounding p itself already moves the quantile by ~2e-8; the
    // tolerance reflects what the double representation of p can support.
    for (double x : {-5.0, -1.3, -0.2, 0.7, 2.9, 6.0}) {
        const double p = 0.5 * std::erfc(-x / std::sqrt(2.0));
        const double tol = x < 3.0 ? 1e-10 : 1e-7;
        CHECK(inv_normal_cdf(p) == doctest::Approx(x).epsilon(tol));
    }
    CHECK_THROWS_AS(inv_normal_cdf(0.0), std::invalid_argument);
}

TEST_CASE("law catalogue closed forms") {
    auto par = pareto_law(2.0, 1.0);
    CHECK(par->survival(0.5) == 1.0);
    CHECK(par->survival(2.0) == doctest::Approx(0.25));
    CHECK(par->mean() == doctest::Approx(2.0));
    CHECK(par->quantile(0.75) == doctest::Approx(2.0));
    CHECK(*par->tail_exponent() == doctest::Approx(2.0));
    CHECK(std::isinf(pareto_law(0.9, 1.0)->mean()));

    auto expo = exponential_law(2.0);
    CHECK(expo->survival(1.0) == doctest::Approx(std::exp(-2.0)));
    CHECK(expo->mean() == doctest::Approx(0.5));
    CHECK(expo->quantile(1.0 - std::exp(-2.0)) == doctest::Approx(1.0));

    auto wei = weibull_law(0.5, 1.0);
    CHECK(wei->survival(4.0) == doctest::Approx(std::exp(-2.0)));
    CHECK(wei->mean() == doctest::Approx(2.0));  // Gamma(3) = 2

    auto ln = lognormal_law(0.0, 1.0);
    CHECK(ln->survival(1.0) == doctest::Approx(0.5));
    CHECK(ln->mean() == doctest::Approx(std::exp(0.5)));
    CHECK(ln->quantile(0.5) == doctest::Approx(1.0));

    auto pt = point_mass_law(3.0);
    CHECK(pt->survival(2.999) == 1.0);
    CHECK(pt->survival(3.0) == 0.0);
    RngStream pt_rng(1, 0);
    CHECK(pt->sample(pt_rng) == 3.0);

    auto sc = scaled_law(pareto_law(2.0, 1.0), 3.0);
    CHECK(sc->survival(6.0) == doctest::Approx(0.25));
    CHECK(sc->mean() == doctest::Approx(6.0));
    CHECK(sc->support_lo() == doctest::Approx(3.0));
}

TEST_CASE("sampling matches the survival curve") {
    RngStream rng(2025, 1);
    for (auto law : {pareto_law(1.5, 2.0), exponential_law(0.7), weibull_law(0.6, 1.3),
                     lognormal_law(0.2, 0.8)}) {
        const int n = 200000;
        const double probe = law->quantile(0.9);
        int hits = 0;
        for (int i = 0; i < n; ++i) hits += law->sample(rng) > probe;
        auto iv = wilson_interval(hits, n, 4.5);  // generous band, repeatable seed
        CHECK(iv.lo < 0.1);
        CHECK(iv.hi > 0.1);
    }
}

TEST_CASE("integrated tail closed forms for pareto and exponential") {
    auto it = integrated_tail(pareto_law(2.0, 1.0));
    CHECK(it->survival(0.0) == doctest::Approx(1.0));
    CHECK(it->survival(0.5) == doctest::Approx(1.0 - 0.5 / 2.0));  // linear piece
    CHECK(it->survival(1.0) == doctest::Approx(0.5));
    CHECK(it->survival(4.0) == doctest::Approx(1.0 / 8.0));  // (x)^-1 / alpha
    CHECK(*it->tail_exponent() == doctest::Approx(1.0));
    CHECK(std::isinf(it->mean()));  // alpha - 1 = 1: infinite mean excess

    // Quantile inverts survival on both pieces.
    for (double q : {0.1, 0.4, 0.6, 0.9, 0.99}) {
        const double x = it->quantile(q);
        CHECK(it->survival(x) == doctest::Approx(1.0 - q).epsilon(1e-10));
    }

    auto heavy = integrated_tail(pareto_law(3.0, 2.0));
    CHECK(heavy->mean() == doctest::Approx(2.0 * 2.0 / 2.0));  // s(a-1)/(2(a-2)) = 2

    // Memorylessness: stationary excess of an exponential is itself.
    auto ex = integrated_tail(exponential_law(3.0));
    CHECK(ex->survival(1.0) == doctest::Approx(std::exp(-3.0)));

    CHECK_THROWS_AS(integrated_tail(pareto_law(0.8, 1.0)), std::invalid_argument);
}

TEST_CASE("numeric integrated tail agrees with direct quadrature") {
    auto base = weibull_law(0.5, 1.0);
    auto it = integrated_tail(base);
    const double mu = base->mean();
    for (double x : {0.0, 0.3, 1.0, 2.5, 7.0, 20.0, 60.0}) {
        const double direct =
            integrate_decreasing_upper([&](double t) { return base->survival(t); }, x,
                                       std::max(1.0, x))
                .value /
            mu;
        CHECK(it->survival(x) == doctest::Approx(direct).epsilon(1e-7));
    }
    // Quantile round trip on the tabulated law.
    for (double q : {0.2, 0.7, 0.95, 0.999}) {
        const double x = it->quantile(q);
        CHECK(it->survival(x) == doctest::Approx(1.0 - q).epsilon(1e-6));
    }
    // Mean of the excess law: E[X^2] / (2 mu), with E[X^2] = Gamma(5) = 24.
    CHECK(it->mean() == doctest::Approx(24.0 / (2.0 * 2.0)).epsilon(1e-6));
}
