#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ruinlab/angular.hpp"
#include "ruinlab/laws.hpp"
#include "ruinlab/rng.hpp"
#include "ruinlab/ruinsets.hpp"
#include "ruinlab/vec.hpp"

namespace ruinlab {

// Multivariate claim-size distribution on the nonnegative orthant.  Sampling
// is mandatory; every closed-form facet is optional and advertised through an
// optional<> so that estimators can pick exact paths when they exist.
class ClaimModel {
public:
    virtual ~ClaimModel() = default;
    virtual std::string name() const = 0;
    virtual int dim() const = 0;
    virtual void sample_into(RngStream& rng, std::span<double> out) const = 0;
    Vec sample(RngStream& rng) const {
        Vec x(static_cast<std::size_t>(dim()));
        sample_into(rng, x);
        return x;
    }
    // Componentwise mean; entries may be +infinity.  nullopt = unknown.
    virtual std::optional<Vec> mean_vector() const { return std::nullopt; }
    // Closed-form marginal law of coordinate j, when one exists.
    virtual LawPtr marginal(int j) const {
        (void)j;
        return nullptr;
    }
    virtual bool has_independent_marginals() const { return false; }
    // P(X_j > x_j for all j), when available in closed form.
    virtual std::optional<double> joint_survival(std::span<const double> x) const {
        (void)x;
        return std::nullopt;
    }
    // P(scale_index(X) > t) for the given family, when available exactly.
    virtual std::optional<double> scalarized_survival(const HyperplaneFamily& fam,
                                                      double t) const {
        (void)fam;
        (void)t;
        return std::nullopt;
    }
    // Regular-variation summary (tail index, spectral measure, norm law).
    virtual std::optional<MrvDescriptor> mrv() const { return std::nullopt; }
};

using ModelPtr = std::shared_ptr<const ClaimModel>;

// Independent coordinates with the given marginal laws.
ModelPtr independent_marginals_model(std::vector<LawPtr> laws);

// X = R * Theta with Theta on the L1 simplex (angular measure, normalized to
// a probability when sampling) independent of the radial law R >= 0.
ModelPtr polar_model(AngularMeasure angular, LawPtr radial);

// Dependent pair supported on dyadic simplices: X + Y = 2^N exactly with
// P(N = n) = 2^-(n+1) and uniform placement on each segment.  Marginals are
// heavy (infinite mean) with dominated-variation tails that are NOT regularly
// varying; the sum concentrates on powers of two, which kills the
// half-convolution ratio limit.
ModelPtr dyadic_simplex_model();

// Dependent pair with joint survival
//   S(x,y) = (1 + g*sin(log(1+x+y))*cos((pi/2)(x-y)/(1+x+y))) / (1+x+y),
// sampled by rejection from the density (derived in closed form below).
// The multiplicative oscillation never settles, so the scalarized tail is
// dominated-varying but not regularly varying.  g must be small enough to
// keep the density positive (g <= ~0.18; checked at construction).
ModelPtr oscillating_model(double gamma);

// Deterministic claim at a fixed nonnegative point (degenerate test model).
ModelPtr point_model(Vec value);

// Exact tail functions of the dyadic-simplex pair.
double dyadic_marginal_survival(double x);  // P(X > x)
double dyadic_sum_survival(double s);       // P(X + Y > s)
LawPtr dyadic_marginal_law();
LawPtr dyadic_sum_law();

// Closed forms for the oscillating pair.
double oscillating_joint_survival(double gamma, double x, double y);
double oscillating_density(double gamma, double x, double y);
// P(X + Y > s) by 1-D quadrature of the diagonal density (no closed form).
double oscillating_sum_survival(double gamma, double s);

}  // namespace ruinlab
