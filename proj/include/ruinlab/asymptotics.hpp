#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ruinlab/angular.hpp"
#include "ruinlab/claims.hpp"
#include "ruinlab/diagnostics.hpp"
#include "ruinlab/rng.hpp"
#include "ruinlab/ruinsets.hpp"
#include "ruinlab/survival_table.hpp"
#include "ruinlab/vec.hpp"

namespace ruinlab {

// Drift of the surplus process per expected claim.  Everything in this
// module integrates the claim law along rays x - v*c, so every component
// must be strictly positive; an MC-estimated loading must clear zero by
// 3 sigma in every coordinate or the configuration is rejected.
struct SafetyLoading {
    Vec c;
    std::string provenance = "analytic";  // "analytic" | "mc"
    Vec stderr_c;                         // per component, only for "mc"

    std::optional<std::string> validate() const;
    void validate_or_throw() const;
};

// Point value with an uncertainty scale.  stderr_v is a Monte Carlo standard
// error for method "mc" and a deterministic error bound for "quadrature" /
// "exact".  (Named _v because stderr is a stdio macro.)
struct Estimate {
    double value = 0.0;
    double stderr_v = 0.0;
    std::string method;
};

// Normalizing mass of the drift transform: the time the ray x - v*c spends
// in the nonnegative orthant, theta = E[min_j X_j / c_j].  Finite exactly
// when the claim mean is finite.
Estimate theta_mc(const ClaimModel& model, const Vec& c, std::uint64_t n,
                  const RngStream& stream);

// Same constant by quadrature of P(X >= v c) = prod_j S_j(v c_j); needs
// independent marginals with closed-form survivals.
Estimate theta_quadrature(const ClaimModel& model, const Vec& c, double rel_tol = 1e-9);

// Ruin asymptote H(u) = integral over v >= 0 of P(X in u*region + v*c),
// estimated as the mean excess sojourn over n samples in one pass across the
// level grid.  Unbiased: the sojourn set {v : x - v*c in u*region} is a
// single interval starting at 0.
struct HCurve {
    TailCurve curve;
    // Per level: the largest sample carried >10% of the sojourn sum, the
    // classic symptom of an infinite-variance summand.  The point estimate
    // stays the plain mean but the reported stderr switches to a
    // median-of-means spread (16 groups), which stays honest under heavy
    // tails.
    std::vector<bool> unstable;
};
HCurve h_curve_mc(const ClaimModel& model, const HyperplaneFamily& family, const Vec& c,
                  const std::vector<double>& levels, std::uint64_t n, const RngStream& stream);

// Deterministic H(u) for independent analytic marginals.  Supported
// families: axis-aligned directions (inclusion-exclusion over coordinate
// exceedances) or one arbitrary direction (the law of p.X is built first by
// numeric convolution of the scaled marginals).  Anything else throws
// std::invalid_argument; fall back to h_curve_mc.
TailCurve h_curve_quadrature(const ClaimModel& model, const HyperplaneFamily& family,
                             const Vec& c, const std::vector<double>& levels,
                             double rel_tol = 1e-6);

// Scalarized drift-transform curve H(u)/theta on the level grid, the tail
// whose subexponentiality drives the ruin asymptotics.  Deterministic path
// only (same support as h_curve_quadrature; theta by quadrature).  Note the
// value at u=0 is E[max_k p_k.X/(p_k.c)] / E[min_j X_j/c_j] >= 1, with
// equality only in one dimension: this curve is a bona fide survival
// function only from the level where it crosses 1.
TailCurve integrated_scalar_survival(const ClaimModel& model, const HyperplaneFamily& family,
                                     const Vec& c, const std::vector<double>& levels,
                                     double rel_tol = 1e-6);

// Same object tabulated on a geometric grid over [0, u_max] and normalized
// by H(0) instead of theta, which makes it a genuine survival function in
// any dimension (H is nonincreasing).  Ratio diagnostics are normalizer
// invariant, so this is the right feed for convolution_ratio_numeric.
SurvivalTable integrated_scalar_table(const ClaimModel& model, const HyperplaneFamily& family,
                                      const Vec& c, double u_max, std::size_t points = 289,
                                      double rel_tol = 1e-6);

// Constant kappa in the regularly-varying closed form
//   H(u) ~ kappa * u * P(|X|_1 > u),
// computed from the polar decomposition of the tail measure:
//   kappa = integral over v of int sigma(d theta) [min_k (1 + v p_k.c) /
//           (p_k.theta)]^(-alpha),
// where the min runs over directions with p_k.theta > 0 and points seeing
// no direction contribute nothing.  The v-integral has an exact piecewise
// closed form for fixed theta (the envelope of finitely many increasing
// linear thresholds), so atomic spectral measures are evaluated exactly.
// alpha <= 1 throws: the integral diverges.
Estimate mrv_ruin_constant(const MrvDescriptor& mrv, const HyperplaneFamily& family,
                           const Vec& c);

// Monte Carlo over the spectral measure (for Dirichlet or as a cross-check
// on atoms); the inner v-integral is still exact per draw, so all noise
// comes from theta.  The mean is scaled by the total spectral mass.
Estimate mrv_ruin_constant_mc(const MrvDescriptor& mrv, const HyperplaneFamily& family,
                              const Vec& c, std::uint64_t n, const RngStream& stream);

}  // namespace ruinlab
