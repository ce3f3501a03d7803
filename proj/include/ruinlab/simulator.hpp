#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ruinlab/asymptotics.hpp"
#include "ruinlab/claims.hpp"
#include "ruinlab/rng.hpp"
#include "ruinlab/ruinsets.hpp"
#include "ruinlab/stats.hpp"
#include "ruinlab/vec.hpp"

namespace ruinlab {

// Waiting time between claims.  Deterministic spacing consumes no RNG draws,
// so swapping it in leaves the claim-size stream untouched.
struct InterarrivalSpec {
    enum class Kind { kExponential, kDeterministic, kGamma };

    Kind kind = Kind::kExponential;
    double rate = 1.0;   // exponential
    double delta = 1.0;  // deterministic
    double shape = 1.0;  // gamma, mean shape*scale
    double scale = 1.0;

    static InterarrivalSpec exponential(double rate);
    static InterarrivalSpec deterministic(double delta);
    static InterarrivalSpec gamma(double shape, double scale);

    double mean() const;
    double sample(RngStream& rng) const;
    std::optional<std::string> validate() const;
    void validate_or_throw() const;
    std::string describe() const;
};

// One renewal risk book: surplus starts at u*allocation, earns premium
// continuously, pays i.i.d. claims at renewal instants, and is ruined when
// the claim surplus enters the level-u target region of `family`.  Because
// the reserve rises componentwise between claims while the region is upward
// closed in the claim surplus, ruin can only happen at a claim instant; the
// simulator therefore checks the walk S_n = sum of (X_i - Y_i * premium)
// only at jumps, with no discretization error.
struct RiskConfig {
    ModelPtr claims;
    InterarrivalSpec interarrival;
    Vec premium;     // income per unit time, > 0 componentwise
    Vec allocation;  // initial-capital split; empty = unspecified (the walk
                     // itself never needs it, only region builders do)
    HyperplaneFamily family;

    // Horizon policy.  A path that drifts to scale material below -give_up
    // is abandoned as safe: it would have to climb give_up + u against the
    // drift to still ruin.  0 = default 50 * max_k p_k.c, resolved against
    // the loading at run time.  max_steps is a hard safety valve (0 = derived
    // from the resolved give-up); paths it stops are counted separately.
    double give_up = 0.0;
    std::uint64_t max_steps = 0;

    std::optional<std::string> validate() const;
    void validate_or_throw() const;

    // Net drift per claim, c = E[Y]*premium - E[X]: analytic when the claim
    // model advertises a finite mean vector, otherwise estimated from n
    // samples (provenance "mc" with per-component stderr).  Throws unless
    // every component clears zero (by 3 sigma in the mc case) -- with any
    // nonpositive component, ruin is certain and the asymptote meaningless.
    SafetyLoading loading(const RngStream& stream, std::uint64_t n = 1u << 20) const;

    double resolved_give_up(const SafetyLoading& loading) const;
    std::uint64_t resolved_max_steps(const SafetyLoading& loading) const;
};

// Ruin frequency at one initial-capital level.  psi_hat is a lower bound on
// the infinite-horizon probability: truncated paths (give-up or step cap)
// count as survivals, so the bias is at most truncated_paths/n_paths and in
// practice far smaller (a path at -give_up almost never recovers).
struct RuinEstimate {
    double u = 0.0;
    std::uint64_t n_paths = 0;
    std::uint64_t ruin_count = 0;
    double psi_hat = 0.0;
    Interval ci;  // Wilson, ~95%
    std::uint64_t truncated_paths = 0;  // survivals ended by give-up or cap
    std::uint64_t capped_paths = 0;     // of those, ended by the step cap
    double mean_steps = 0.0;            // over all paths (shared by the grid)
};

// One coupled pass over n_paths walks, read at every level: a path counts as
// ruined at u exactly when its running scale maximum exceeds u, so the
// estimates are monotone in u by construction, not just on average.  Paths
// derive their streams from (stream child 1, global path index); the worker
// count never changes the result.  Levels must be positive and strictly
// increasing.
std::vector<RuinEstimate> simulate_ruin_grid(const RiskConfig& config,
                                             const std::vector<double>& levels,
                                             std::uint64_t n_paths, const RngStream& stream);

RuinEstimate simulate_ruin(const RiskConfig& config, double u, std::uint64_t n_paths,
                           const RngStream& stream);

// Simulated ruin probability against the heavy-tail asymptote H at one
// level.  The ratio interval combines the binomial error of psi_hat with the
// stderr of H (zero for the quadrature path); usable rows need >= 20 ruin
// events and a positive, conclusive H.
struct AsymptoteRow {
    RuinEstimate ruin;
    double h = 0.0;
    double h_stderr = 0.0;
    bool h_inconclusive = false;
    double ratio = 0.0;
    Interval ratio_ci;
    bool usable = false;
    // |ratio - 1| did not grow from the previous usable row, with one
    // combined-stderr allowance; first row is never "improving".
    bool improving = false;
};

struct AsymptoteComparison {
    std::vector<AsymptoteRow> rows;
    std::string h_method;  // "quadrature" | "mc"
    SafetyLoading loading;
    double give_up = 0.0;
    // >= 2 improving rows among the last 3 grid steps (or every step when
    // the grid is shorter).  Evidence about the tested range only.
    bool trend_toward_one = false;
    std::string note;
};

// Runs the coupled grid simulation and evaluates H on the same levels,
// preferring the deterministic quadrature curve and falling back to
// Monte Carlo (h_samples draws) when the model/family combination has no
// quadrature path.
AsymptoteComparison ruin_vs_asymptote(const RiskConfig& config, const std::vector<double>& levels,
                                      std::uint64_t n_paths, const RngStream& stream,
                                      std::uint64_t h_samples = 4000000);

}  // namespace ruinlab
