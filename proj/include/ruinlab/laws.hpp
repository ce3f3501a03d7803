#pragma once

#include <memory>
#include <optional>
#include <string>

#include "ruinlab/rng.hpp"

namespace ruinlab {

// Quantile of the standard normal distribution (rational approximation plus
// one Halley refinement against erfc; relative error near machine epsilon).
double inv_normal_cdf(double p);

// One-dimensional nonnegative claim-size law.  survival() is exact where a
// closed form exists; sampling defaults to inverse transform so that one
// uniform draw per variate keeps parallel streams aligned.
class Law1D {
public:
    virtual ~Law1D() = default;
    virtual std::string name() const = 0;
    // P(X > x); right-continuous, equals 1 for x below the support.
    virtual double survival(double x) const = 0;
    // Generalized inverse of the CDF at q in (0,1).
    virtual double quantile(double q) const = 0;
    // May be +infinity.
    virtual double mean() const = 0;
    virtual double support_lo() const { return 0.0; }
    // Algebraic tail exponent when the law is regularly varying.
    virtual std::optional<double> tail_exponent() const { return std::nullopt; }
    virtual double sample(RngStream& rng) const { return quantile(rng.uniform()); }
};

using LawPtr = std::shared_ptr<const Law1D>;

LawPtr pareto_law(double alpha, double scale = 1.0);
LawPtr exponential_law(double rate);
LawPtr weibull_law(double shape, double scale = 1.0);
LawPtr lognormal_law(double mu, double sigma);
LawPtr point_mass_law(double value);

// Law of factor * X for factor > 0.
LawPtr scaled_law(LawPtr base, double factor);

// Stationary-excess (integrated-tail) transform: survival proportional to the
// integral of the base survival.  Closed forms for Pareto and exponential
// bases; otherwise a tabulated numeric transform accurate to ~1e-8 relative.
// Requires a finite-mean base.
LawPtr integrated_tail(LawPtr base);

// Bisection fallback for laws defined through their survival function.
double quantile_by_bisection(const Law1D& law, double q, double lo, double hi_hint);

}  // namespace ruinlab
