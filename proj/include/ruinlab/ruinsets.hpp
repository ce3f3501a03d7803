#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ruinlab/vec.hpp"

namespace ruinlab {

// Target region described by finitely many halfspaces: at level u > 0 the
// region is { x : p_k . x > u for some k } with every direction p_k
// componentwise nonnegative and nonzero.  One direction list serves every
// level (dividing the directions by u and using level 1 gives the same set),
// so all operations take the level as a parameter.
struct HyperplaneFamily {
    int dim = 0;
    std::vector<Vec> directions;
};

// First structural violation as a message (nullopt when valid): positive
// dimension, at least one direction, matching lengths, finite nonnegative
// entries, no all-zero direction.
std::optional<std::string> validate(const HyperplaneFamily& fam);
void validate_or_throw(const HyperplaneFamily& fam);

// Largest u such that x still lies in the level-u region, floored at zero:
// max(0, max_k p_k . x).  Positively homogeneous of degree 1.
double scale_index(const HyperplaneFamily& fam, std::span<const double> x);

// Strict membership at level u: scale_index(x) > u.
bool membership(const HyperplaneFamily& fam, std::span<const double> x, double u);

// Entry scale of the unit-simplex ray through theta (componentwise >= 0,
// entries summing to 1): the smallest t with t*theta inside the level-1
// region boundary, i.e. 1 / scale_index(theta); +infinity when the ray never
// enters the region.
double height(const HyperplaneFamily& fam, std::span<const double> theta);

// Lebesgue measure of { v >= 0 : x - v*c in level-u region } for a drift
// vector c with all components > 0.  The sojourn set is a union of intervals
// [0, (p_k.x - u)/(p_k.c)), so the measure is the positive part of the
// largest endpoint.  This is the unbiased single-sample integrand for the
// drift transform H(u) used in asymptotics.
double excess_sojourn(const HyperplaneFamily& fam, std::span<const double> x,
                      std::span<const double> c, double u);

// Row-major rows x cols matrix with nonnegative entries.
struct LinearMap {
    int rows = 0;
    int cols = 0;
    std::vector<Vec> t;
};

// Preimage family of x -> T x: direction p becomes T'p.  Throws when an image
// direction collapses to zero or the map has a negative entry.
HyperplaneFamily pullback(const HyperplaneFamily& fam, const LinearMap& map);

// Union of regions over families with equal dimension: concatenated
// direction lists.
HyperplaneFamily union_families(const std::vector<HyperplaneFamily>& fams);

// Removes directions whose halfspace never decides membership: direction j is
// redundant iff  sup p_j.x  over  { p_i.x <= 1 for all i != j }  is bounded
// and <= 1.  (Componentwise dominance is NOT a valid shortcut on signed
// points, so only this LP test is used.)
HyperplaneFamily prune_redundant(const HyperplaneFamily& fam, double tol = 1e-9);

// Proportional-transaction-cost market: exchanging one unit of asset j yields
// 1/pi[i][j] units of asset i.  The solvency cone C is spanned by
// pi[i][j] e_i - e_j (i != j) together with the coordinate axes e_i; a
// position x can be liquidated to the nonnegative orthant iff x lies in C.
// The level-u target region relative to the allocation vector b is
// { x : u*b - x not in C }.
struct BidAskSpec {
    int dim = 0;
    std::vector<Vec> pi;  // dim x dim, pi[i][i] = 1, pi[i][j] >= 1, triangle rule
    Vec allocation;       // b: positive entries summing to 1
};

std::optional<std::string> validate(const BidAskSpec& spec);
void validate_or_throw(const BidAskSpec& spec);

// Generators of the solvency cone C (d*(d-1) exchange rays plus d axes).
std::vector<Vec> solvency_generators(const BidAskSpec& spec);

// Can position x be liquidated to the nonnegative orthant?  LP oracle.
bool solvent(const BidAskSpec& spec, std::span<const double> x);

// Level of the target region reached by x, computed directly as
// max(0, min{ u : u*b - x in C }) by LP.  Works in any dimension.
double scale_index_lp(const BidAskSpec& spec, std::span<const double> x);

// Compiles the bid-ask region into an equivalent HyperplaneFamily: extreme
// rays q of the dual cone of C, each normalized to p = q / (q.b), then
// LP-pruned and sorted for deterministic output.  Ray enumeration uses
// (d-1)-subset candidates (cross products for d = 3) and is limited to
// dim <= 3; higher dimensions must use scale_index_lp instead.
HyperplaneFamily compile_bidask(const BidAskSpec& spec);

}  // namespace ruinlab
