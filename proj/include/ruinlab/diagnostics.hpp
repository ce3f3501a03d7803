#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ruinlab/claims.hpp"
#include "ruinlab/laws.hpp"
#include "ruinlab/rng.hpp"
#include "ruinlab/ruinsets.hpp"
#include "ruinlab/survival_table.hpp"
#include "ruinlab/vec.hpp"

namespace ruinlab {

// One estimated curve over an increasing positive level grid.  stderr
// entries are zero for exact (closed-form / quadrature) methods; a point is
// marked inconclusive when it rests on too few tail hits (< 20) or an
// otherwise unstable estimate.
struct TailCurve {
    std::vector<double> levels;
    std::vector<double> values;
    std::vector<double> stderrs;
    std::vector<bool> inconclusive;
    std::string method;  // "mc" | "quadrature" | "closed_form"
    std::uint64_t n_samples = 0;
};

enum class Verdict { kConsistent, kInconsistent, kInconclusive };
const char* verdict_name(Verdict v);

struct RatioPoint {
    double level = 0.0;
    double ratio = 0.0;
    double lo = 0.0;  // CI bounds; lo == hi marks an exact (non-MC) point
    double hi = 0.0;
    bool inconclusive = false;
};

// Outcome of one asymptotic-ratio diagnostic: the claimed limit, the ratio
// curve with confidence bounds, and a three-point reading at the top of the
// grid.  A verdict is evidence about the tested range, never a proof of the
// limit; "consistent" means the final three usable CIs all cover the target,
// "inconsistent" that they all exclude it, anything else is inconclusive.
struct RatioVerdict {
    double target = 0.0;
    std::vector<RatioPoint> points;
    Verdict verdict = Verdict::kInconclusive;
    std::string note;
};

// Exact-method points carry zero-width intervals, which would read
// "inconsistent" for any ratio not hitting the target to the last bit; they
// are widened to +-1% of the target before the three-point reading.
inline constexpr double kExactRatioBand = 0.01;

Verdict read_ratio_points(const std::vector<RatioPoint>& points, double target);

// P(scale_index(X) > u) on the level grid from one pass over n samples.
TailCurve empirical_scalarized_survival(const ClaimModel& model, const HyperplaneFamily& family,
                                        const std::vector<double>& levels, std::uint64_t n,
                                        const RngStream& stream);

// m-fold sum tail against the single tail, P(X1+...+Xm in uA) / P(X in uA),
// with limit m for subexponential scalarizations.  Numerator, denominator
// and the independent-sum upper bound each use their own stream.  The
// sandwich check verifies, at 3 sigma,
//   1 - (1 - FA(u))^m  <=  numerator  <=  P(Y1+...+Ym > u)
// where Y are independent scalarized copies.
struct ConvolutionRatioResult {
    RatioVerdict verdict;
    TailCurve numerator;
    TailCurve denominator;
    TailCurve lower_bound;
    TailCurve upper_bound;
    bool sandwich_ok = true;
};
ConvolutionRatioResult convolution_ratio_mc(const ClaimModel& model,
                                            const HyperplaneFamily& family, int m,
                                            const std::vector<double>& levels, std::uint64_t n,
                                            const RngStream& stream);

// Deterministic two-fold ratio curve from a tabulated tail: at each level t,
// (table tail + Stieltjes midpoint convolution)(t) divided by the tail at t,
// with the Richardson refinement difference as the interval half-width.
// Levels where the base tail vanishes are marked inconclusive.
RatioVerdict convolution_ratio_numeric(const SurvivalTable& table,
                                       const std::vector<double>& levels);

// Shift insensitivity of a one-dimensional tail: S(u + shift) / S(u) with
// target 1.  Law variant is exact; curve variant interpolates an estimated
// curve and treats its points as independent (conservative widths).
RatioVerdict long_tail_test(const Law1D& law, double shift, const std::vector<double>& levels);
RatioVerdict long_tail_test(const TailCurve& curve, double shift);

// Halving ratio S(2x)/S(x).  "Consistent" needs the final three ratios flat
// (within 10% of each other) or rising and positive; a monotone collapse by
// more than x0.7 over the final three reads "inconsistent" (tail decays too
// fast for dominated variation); anything else is inconclusive.
struct DominatedVariationResult {
    RatioVerdict verdict;  // target 0 = the excluded value; see note field
    double inf_ratio = 0.0;
};
DominatedVariationResult dominated_variation_test(const Law1D& law,
                                                  const std::vector<double>& levels);
DominatedVariationResult dominated_variation_test(const TailCurve& curve);

// Geometric random sum: P(X1+...+XN in uA) / P(X in uA) with N >= 1,
// P(N = k) = p (1-p)^(k-1); the subexponential limit is E N = 1/p.
RatioVerdict random_sum_ratio(const ClaimModel& model, const HyperplaneFamily& family,
                              double p_geom, const std::vector<double>& levels, std::uint64_t n,
                              const RngStream& stream);

// P(X - a in uA) / P(X in uA), target 1 for long-tailed scalarizations.
// A zero shift short-circuits to exact ones (numerator is the denominator).
RatioVerdict translation_test(const ClaimModel& model, const HyperplaneFamily& family,
                              const Vec& shift, const std::vector<double>& levels, std::uint64_t n,
                              const RngStream& stream);

// Fits the smallest K with (m-fold ratio at u) <= K (1+epsilon)^m over all
// m <= m_max and u in the grid; one ratio curve per m is returned.
struct KestenReport {
    double epsilon = 0.0;
    int m_max = 0;
    double k_fit = 0.0;
    int argmax_m = 0;
    double argmax_level = 0.0;
    std::vector<TailCurve> ratio_curves;  // index m-1; values are ratios, not probabilities
    std::string note;
};
KestenReport kesten_check(const ClaimModel& model, const HyperplaneFamily& family, double epsilon,
                          int m_max, const std::vector<double>& levels, std::uint64_t n,
                          const RngStream& stream);

// Geometric level grid sized from a pilot run of the scalarized variable:
// the top level is placed near the (min_top_hits / n_main) upper quantile so
// the main run keeps enough hits, the bottom at the 5% tail (or 8x the top
// probability if that is larger).  Throws when the pilot cannot resolve
// positive quantiles.
std::vector<double> suggest_levels(const ClaimModel& model, const HyperplaneFamily& family,
                                   std::uint64_t n_main, std::size_t n_levels,
                                   const RngStream& stream, std::uint64_t pilot_n = 1 << 17,
                                   std::uint64_t min_top_hits = 400);

}  // namespace ruinlab
