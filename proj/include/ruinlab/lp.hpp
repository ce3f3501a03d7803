#pragma once

#include <span>
#include <vector>

#include "ruinlab/vec.hpp"

namespace ruinlab {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpResult {
    LpStatus status = LpStatus::kInfeasible;
    double objective = 0.0;
    Vec x;  // primal solution when status == kOptimal
};

// Dense two-phase primal simplex with Bland's anti-cycling rule.
//
//   minimize c'x  subject to  A x = b,  x >= 0
//
// A is given as m rows of length n.  Sized for the small geometric programs in
// this library (tens of variables); numerical tolerance defaults to 1e-9.
LpResult solve_lp_eq(const std::vector<Vec>& A, const Vec& b, const Vec& c, double tol = 1e-9);

// Does y lie in the convex cone spanned by `generators` (nonnegative
// combinations)?  Pure feasibility LP.
bool cone_contains(const std::vector<Vec>& generators, std::span<const double> y,
                   double tol = 1e-9);

struct SupremumResult {
    bool bounded = false;
    double value = 0.0;
};

// sup objective'x  subject to  rows[k]'x <= 1 for every k, x free.
// Reports unboundedness instead of a value when the feasible cone is open in
// the objective direction.
SupremumResult max_linear_under_halfspaces(std::span<const double> objective,
                                           const std::vector<Vec>& rows, double tol = 1e-9);

// min u  subject to  u*b - x in cone(generators), u free.
// Feasible whenever the cone contains the positive orthant and b > 0; throws
// std::runtime_error otherwise.
double min_scale_into_cone(const std::vector<Vec>& generators, std::span<const double> b,
                           std::span<const double> x, double tol = 1e-9);

}  // namespace ruinlab
