#include "ruinlab/lp.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

namespace ruinlab {

namespace {

// Tableau with rows 0..m-1 = constraints and row m = reduced costs.
// Column layout: n structural variables, then m artificials, then the RHS.
class Simplex {
public:
    Simplex(const std::vector<Vec>& A, const Vec& b, double tol)
        : m_(A.size()), n_(A.empty() ? 0 : A[0].size()), tol_(tol) {
        tab_.assign(m_ + 1, Vec(n_ + m_ + 1, 0.0));
        basis_.resize(m_);
        for (std::size_t i = 0; i < m_; ++i) {
            if (A[i].size() != n_) throw std::invalid_argument("solve_lp_eq: ragged matrix");
            const double sign = b[i] < 0.0 ? -1.0 : 1.0;
            for (std::size_t j = 0; j < n_; ++j) tab_[i][j] = sign * A[i][j];
            tab_[i][n_ + i] = 1.0;  // artificial
            tab_[i][rhs()] = sign * b[i];
            basis_[i] = n_ + i;
        }
    }

    std::size_t rhs() const { return n_ + m_; }

    // Phase 1: minimize the sum of artificials.
    bool make_feasible() {
        Vec& z = tab_[m_];
        std::fill(z.begin(), z.end(), 0.0);
        for (std::size_t j = n_; j < n_ + m_; ++j) z[j] = 1.0;  // phase-1 costs
        for (std::size_t i = 0; i < m_; ++i)
            for (std::size_t j = 0; j < n_ + m_ + 1; ++j) z[j] -= tab_[i][j];
        iterate(n_ + m_);
        if (-tab_[m_][rhs()] > 10.0 * tol_) return false;  // infeasible
        expel_artificials();
        return true;
    }

    // Phase 2 with the real cost vector; returns false when unbounded.
    bool optimize(const Vec& c) {
        Vec& z = tab_[m_];
        std::fill(z.begin(), z.end(), 0.0);
        for (std::size_t j = 0; j < n_; ++j) z[j] = c[j];
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < n_ && c[basis_[i]] != 0.0) {
                const double f = c[basis_[i]];
                for (std::size_t j = 0; j < n_ + m_ + 1; ++j) z[j] -= f * tab_[i][j];
            }
        }
        return iterate(n_);  // artificial columns are no longer eligible
    }

    double objective() const { return -tab_[m_][rhs()]; }

    Vec solution() const {
        Vec x(n_, 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] < n_) x[basis_[i]] = tab_[i][rhs()];
        return x;
    }

private:
    // Bland's rule: entering = lowest-index negative reduced cost; leaving =
    // ratio-test winner with the lowest basic index.  Guarantees termination.
    bool iterate(std::size_t eligible_cols) {
        const std::size_t max_iters = 2000 * (m_ + n_ + 8);
        for (std::size_t it = 0; it < max_iters; ++it) {
            std::size_t enter = eligible_cols;
            for (std::size_t j = 0; j < eligible_cols; ++j) {
                if (tab_[m_][j] < -tol_) {
                    enter = j;
                    break;
                }
            }
            if (enter == eligible_cols) return true;  // optimal
            std::size_t leave = m_;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m_; ++i) {
                if (tab_[i][enter] > tol_) {
                    const double ratio = tab_[i][rhs()] / tab_[i][enter];
                    if (ratio < best_ratio - tol_ ||
                        (ratio < best_ratio + tol_ && (leave == m_ || basis_[i] < basis_[leave]))) {
                        best_ratio = ratio;
                        leave = i;
                    }
                }
            }
            if (leave == m_) return false;  // unbounded
            pivot(leave, enter);
        }
        throw std::runtime_error("simplex: iteration limit exceeded");
    }

    void pivot(std::size_t row, std::size_t col) {
        Vec& pr = tab_[row];
        const double p = pr[col];
        for (double& v : pr) v /= p;
        pr[col] = 1.0;
        for (std::size_t i = 0; i <= m_; ++i) {
            if (i == row) continue;
            const double f = tab_[i][col];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < n_ + m_ + 1; ++j) tab_[i][j] -= f * pr[j];
            tab_[i][col] = 0.0;
        }
        basis_[row] = col;
    }

    // After phase 1, pivot basic artificials onto structural columns; a row
    // with no usable column is a redundant constraint and is blanked.
    void expel_artificials() {
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < n_) continue;
            std::size_t col = n_;
            for (std::size_t j = 0; j < n_; ++j) {
                if (std::fabs(tab_[i][j]) > tol_) {
                    col = j;
                    break;
                }
            }
            if (col < n_) {
                pivot(i, col);
            } else {
                for (std::size_t j = 0; j < n_ + m_ + 1; ++j) tab_[i][j] = 0.0;
                basis_[i] = n_ + i;  // harmless: row is all zeros
            }
        }
    }

    std::size_t m_, n_;
    double tol_;
    std::vector<Vec> tab_;
    std::vector<std::size_t> basis_;
};

}  // namespace

LpResult solve_lp_eq(const std::vector<Vec>& A, const Vec& b, const Vec& c, double tol) {
    if (A.size() != b.size()) throw std::invalid_argument("solve_lp_eq: |A| != |b|");
    const std::size_t n = A.empty() ? c.size() : A[0].size();
    if (c.size() != n) throw std::invalid_argument("solve_lp_eq: |c| mismatch");
    Simplex s(A, b, tol);
    LpResult out;
    if (!s.make_feasible()) {
        out.status = LpStatus::kInfeasible;
        return out;
    }
    if (!s.optimize(c)) {
        out.status = LpStatus::kUnbounded;
        return out;
    }
    out.status = LpStatus::kOptimal;
    out.objective = s.objective();
    out.x = s.solution();
    return out;
}

bool cone_contains(const std::vector<Vec>& generators, std::span<const double> y, double tol) {
    if (generators.empty()) return max_abs(y) <= tol;
    const std::size_t d = y.size();
    std::vector<Vec> A(d, Vec(generators.size(), 0.0));
    for (std::size_t j = 0; j < generators.size(); ++j) {
        if (generators[j].size() != d) throw std::invalid_argument("cone_contains: dim mismatch");
        for (std::size_t i = 0; i < d; ++i) A[i][j] = generators[j][i];
    }
    const Vec b(y.begin(), y.end());
    const Vec c(generators.size(), 0.0);
    return solve_lp_eq(A, b, c, tol).status == LpStatus::kOptimal;
}

SupremumResult max_linear_under_halfspaces(std::span<const double> objective,
                                           const std::vector<Vec>& rows, double tol) {
    const std::size_t d = objective.size();
    const std::size_t k = rows.size();
    // Variables: x+ (d), x- (d), slack (k); rows: r'x+ - r'x- + s = 1.
    std::vector<Vec> A(k, Vec(2 * d + k, 0.0));
    Vec b(k, 1.0);
    for (std::size_t i = 0; i < k; ++i) {
        if (rows[i].size() != d)
            throw std::invalid_argument("max_linear_under_halfspaces: dim mismatch");
        for (std::size_t j = 0; j < d; ++j) {
            A[i][j] = rows[i][j];
            A[i][d + j] = -rows[i][j];
        }
        A[i][2 * d + i] = 1.0;
    }
    Vec c(2 * d + k, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        c[j] = -objective[j];
        c[d + j] = objective[j];
    }
    const LpResult r = solve_lp_eq(A, b, c, tol);
    if (r.status == LpStatus::kUnbounded) return {false, 0.0};
    if (r.status != LpStatus::kOptimal)
        throw std::runtime_error("max_linear_under_halfspaces: infeasible (x=0 should be feasible)");
    return {true, -r.objective};
}

double min_scale_into_cone(const std::vector<Vec>& generators, std::span<const double> b,
                           std::span<const double> x, double tol) {
    const std::size_t d = b.size();
    const std::size_t g = generators.size();
    // Variables: u+ , u-, lambda (g);  rows: u*b - G*lambda = x.
    std::vector<Vec> A(d, Vec(2 + g, 0.0));
    Vec rhs(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        A[i][0] = b[i];
        A[i][1] = -b[i];
        for (std::size_t j = 0; j < g; ++j) {
            if (generators[j].size() != d)
                throw std::invalid_argument("min_scale_into_cone: dim mismatch");
            A[i][2 + j] = -generators[j][i];
        }
        rhs[i] = x[i];
    }
    Vec c(2 + g, 0.0);
    c[0] = 1.0;
    c[1] = -1.0;
    const LpResult r = solve_lp_eq(A, rhs, c, tol);
    if (r.status != LpStatus::kOptimal)
        throw std::runtime_error("min_scale_into_cone: LP not optimal (invalid cone data)");
    return r.objective;
}

}  // namespace ruinlab
