#include "ruinlab/survival_table.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "ruinlab/vec.hpp"

namespace ruinlab {

void SurvivalTable::clamp() {
    require(xs_.size() >= 2, "survival table needs at least two nodes");
    require(xs_.size() == ys_.size(), "survival table node/value mismatch");
    require(xs_.front() >= 0.0, "survival table nodes must be nonnegative");
    for (std::size_t i = 1; i < xs_.size(); ++i)
        require(xs_[i] > xs_[i - 1], "survival table nodes must increase");
    double prev = 1.0;
    for (double& y : ys_) {
        require(std::isfinite(y), "survival table value not finite");
        require(y >= -1e-12 && y <= 1.0 + 1e-9, "survival table value outside [0,1]");
        y = std::min(prev, std::max(0.0, y));
        prev = y;
    }
}

SurvivalTable::SurvivalTable(std::vector<double> nodes, std::vector<double> values)
    : xs_(std::move(nodes)), ys_(std::move(values)) {
    clamp();
}

SurvivalTable::SurvivalTable(std::vector<double> nodes,
                             const std::function<double(double)>& survival)
    : xs_(std::move(nodes)) {
    ys_.resize(xs_.size());
    for (std::size_t i = 0; i < xs_.size(); ++i) ys_[i] = survival(xs_[i]);
    clamp();
}

std::vector<double> SurvivalTable::geometric_nodes(double t0, double t_max, std::size_t points) {
    require(t0 > 0.0 && t_max > t0, "geometric_nodes: need 0 < t0 < t_max");
    require(points >= 2, "geometric_nodes: need at least two interior points");
    std::vector<double> xs;
    xs.reserve(points + 1);
    xs.push_back(0.0);
    const double lr = std::log(t_max / t0) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) xs.push_back(t0 * std::exp(lr * static_cast<double>(i)));
    xs.back() = t_max;
    return xs;
}

std::vector<double> SurvivalTable::uniform_nodes(double t_max, std::size_t cells) {
    require(t_max > 0.0 && cells >= 2, "uniform_nodes: bad arguments");
    std::vector<double> xs(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i)
        xs[i] = t_max * static_cast<double>(i) / static_cast<double>(cells);
    return xs;
}

double SurvivalTable::eval(double x) const {
    if (x < xs_.front()) return 1.0;
    if (x >= xs_.back()) return x == xs_.back() ? ys_.back() : 0.0;
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - xs_.begin());
    const double w = (x - xs_[j - 1]) / (xs_[j] - xs_[j - 1]);
    return ys_[j - 1] + w * (ys_[j] - ys_[j - 1]);
}

SurvivalTable SurvivalTable::convolve(const SurvivalTable& other) const {
    require(xs_.front() == 0.0, "convolve: grid must start at 0");
    const std::size_t n = xs_.size();
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double t = xs_[j];
        double acc = ys_.back();  // X beyond the grid pushes the sum past any node
        // Walk cells from the top so t - mid increases; track the bracketing
        // node of `other` with a rolling index instead of a binary search.
        std::size_t pos = 0;
        for (std::size_t k = n - 1; k-- > 0;) {
            const double mass = ys_[k] - ys_[k + 1];
            if (mass <= 0.0) continue;
            const double arg = t - 0.5 * (xs_[k] + xs_[k + 1]);
            double tail;
            if (arg < 0.0) {
                tail = 1.0;
            } else if (arg >= other.xs_.back()) {
                tail = arg == other.xs_.back() ? other.ys_.back() : 0.0;
            } else {
                while (pos + 1 < other.xs_.size() && other.xs_[pos + 1] < arg) ++pos;
                // other.xs_[pos] <= arg < other.xs_[pos+1] once arg has entered the grid
                if (arg < other.xs_[pos]) {
                    tail = 1.0;  // arg still left of the grid head
                } else {
                    const double w =
                        (arg - other.xs_[pos]) / (other.xs_[pos + 1] - other.xs_[pos]);
                    tail = other.ys_[pos] + w * (other.ys_[pos + 1] - other.ys_[pos]);
                }
            }
            acc += mass * tail;
        }
        out[j] = std::min(1.0, acc);
    }
    return SurvivalTable(xs_, std::move(out));
}

double SurvivalTable::convolve_at(const SurvivalTable& other, double t, double* abs_err) const {
    require(xs_.front() == 0.0, "convolve_at: grid must start at 0");
    const auto sum_with_stride = [&](std::size_t stride) {
        double acc = ys_.back();
        const std::size_t n = xs_.size();
        for (std::size_t k = 0; k + 1 < n; k += stride) {
            const std::size_t k2 = std::min(k + stride, n - 1);
            const double mass = ys_[k] - ys_[k2];
            if (mass <= 0.0) continue;
            acc += mass * other.eval(t - 0.5 * (xs_[k] + xs_[k2]));
        }
        return std::min(1.0, acc);
    };
    const double fine = sum_with_stride(1);
    if (abs_err) *abs_err = std::fabs(fine - sum_with_stride(2)) / 3.0;
    return fine;
}

SurvivalTable compound_geometric_tail(const SurvivalTable& base, double rho, double tol) {
    require(rho > 0.0 && rho < 1.0, "compound_geometric_tail: rho must lie in (0,1)");
    require(tol > 0.0 && tol < 1.0, "compound_geometric_tail: bad tolerance");
    const std::size_t terms =
        static_cast<std::size_t>(std::ceil(std::log(tol) / std::log(rho)));
    std::vector<double> acc(base.nodes().size(), 0.0);
    SurvivalTable cur = base;
    double weight = (1.0 - rho) * rho;
    for (std::size_t k = 1; k <= terms; ++k) {
        const std::vector<double>& v = cur.values();
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += weight * v[i];
        weight *= rho;
        if (k < terms) cur = cur.convolve(base);
    }
    return SurvivalTable(base.nodes(), std::move(acc));
}

}  // namespace ruinlab
