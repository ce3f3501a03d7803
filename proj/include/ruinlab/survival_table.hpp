#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace ruinlab {

// Tail (survival) function of a nonnegative random variable tabulated on an
// increasing node grid.  Values are clamped monotone nonincreasing into
// [0, 1] at construction.  eval() interpolates linearly between nodes, is 1
// left of the origin and 0 beyond the last node, so grids must extend past
// any argument the caller cares about.
class SurvivalTable {
  public:
    SurvivalTable(std::vector<double> nodes, std::vector<double> values);
    SurvivalTable(std::vector<double> nodes, const std::function<double(double)>& survival);

    // 0, t0, t0*r, ..., t_max: geometric interior with an exact zero head so
    // that Stieltjes masses account for everything below t0.
    static std::vector<double> geometric_nodes(double t0, double t_max, std::size_t points);
    static std::vector<double> uniform_nodes(double t_max, std::size_t cells);

    const std::vector<double>& nodes() const { return xs_; }
    const std::vector<double>& values() const { return ys_; }
    double x_max() const { return xs_.back(); }

    double eval(double x) const;

    // Tail of the independent sum of *this and other, tabulated on this
    // grid: at node t, P(X + Y > t) = (mass of X beyond the grid) +
    // sum over cells of mass_k * other.eval(t - mid_k), the Stieltjes
    // midpoint sum.  Requires the grid to start at 0.
    SurvivalTable convolve(const SurvivalTable& other) const;

    // Same sum at a single point, with a Richardson-style error estimate
    // from a half-resolution pass (midpoint sums are second order).
    double convolve_at(const SurvivalTable& other, double t, double* abs_err = nullptr) const;

  private:
    void clamp();
    std::vector<double> xs_;
    std::vector<double> ys_;
};

// (1 - rho) * sum_{k >= 1} rho^k * (k-fold sum tail): the ladder / compound
// geometric tail with P(K = k) = (1 - rho) rho^k on k >= 0 and an empty sum
// for k = 0.  Terms stop once the unaccumulated geometric mass rho^(k+1)
// falls below tol, which bounds the (downward) truncation bias by tol.
SurvivalTable compound_geometric_tail(const SurvivalTable& base, double rho, double tol = 1e-10);

}  // namespace ruinlab
