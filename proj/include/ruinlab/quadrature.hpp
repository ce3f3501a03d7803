#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ruinlab {

// 7-15 Gauss-Kronrod pair.  Kronrod abscissae/weights for the positive half
// interval; the embedded 7-point Gauss rule reuses the odd-indexed nodes.
namespace gk {
inline constexpr double kNodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
inline constexpr double kWeights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double kGaussWeights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};
}  // namespace gk

struct GkEstimate {
    double value = 0.0;
    double error = 0.0;
};

template <class F>
GkEstimate gk15(F&& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double kron = 0.0, gauss = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double dx = h * gk::kNodes[i];
        const double fsum = (i == 7) ? f(c) : f(c - dx) + f(c + dx);
        kron += gk::kWeights[i] * fsum;
        if (i % 2 == 1 || i == 7) gauss += gk::kGaussWeights[i / 2] * fsum;
    }
    kron *= h;
    gauss *= h;
    // Plain |K15 - G7| difference: conservative (overestimates on smooth f),
    // which only costs a few extra bisections.
    return {kron, std::fabs(kron - gauss) + 1e-300};
}

struct QuadResult {
    double value = 0.0;
    double abs_error = 0.0;
    double tail = 0.0;  // extrapolated mass beyond the scanned cutoff
    std::size_t evals = 0;
    bool converged = true;
};

// Adaptive bisection driven by the Gauss/Kronrod error estimate.  Segments are
// kept on an explicit stack and accepted when their error fits a share of the
// global budget proportional to their length.
template <class F>
QuadResult integrate_adaptive(F&& f, double a, double b, double rel_tol = 1e-9,
                              double abs_tol = 0.0, std::size_t max_evals = 4000000) {
    QuadResult out;
    if (!(b > a)) return out;
    struct Seg {
        double a, b, value, error;
    };
    GkEstimate first = gk15(f, a, b);
    out.evals = 15;
    const double total_len = b - a;
    const double budget = std::max(abs_tol, rel_tol * std::fabs(first.value));
    const double min_len = total_len * 1e-14;
    std::vector<Seg> stack{{a, b, first.value, first.error}};
    while (!stack.empty()) {
        Seg s = stack.back();
        stack.pop_back();
        const double local_budget = budget * ((s.b - s.a) / total_len);
        if (s.error <= local_budget || (s.b - s.a) <= min_len || out.evals >= max_evals) {
            out.value += s.value;
            out.abs_error += s.error;
            if (s.error > local_budget && (s.b - s.a) <= min_len) out.converged = false;
            if (out.evals >= max_evals && s.error > local_budget) out.converged = false;
            continue;
        }
        const double mid = 0.5 * (s.a + s.b);
        GkEstimate left = gk15(f, s.a, mid);
        GkEstimate right = gk15(f, mid, s.b);
        out.evals += 30;
        stack.push_back({mid, s.b, right.value, right.error});
        stack.push_back({s.a, mid, left.value, left.error});
    }
    return out;
}

// Integral of a nonnegative, nonincreasing integrand over [a, infinity).
//
// The domain is scanned with doubling steps (initial step = `scale`) until the
// integrand falls below 1e-12 of its value at `a`; the finite part is handled
// by adaptive Gauss-Kronrod chunks.  Mass beyond the cutoff is estimated by
// fitting a power decay through the last two scan points and reported
// separately in `tail` (already added into `value`).  Plain truncation would
// visibly bias slowly decaying algebraic tails, which is exactly the regime
// this library cares about.
template <class F>
QuadResult integrate_decreasing_upper(F&& f, double a, double scale, double rel_tol = 1e-9) {
    if (!(scale > 0.0)) throw std::invalid_argument("integrate_decreasing_upper: scale must be > 0");
    QuadResult out;
    const double f0 = f(a);
    ++out.evals;
    if (!(f0 > 0.0)) return out;  // nonincreasing from zero: nothing to add
    constexpr double kCut = 1e-12;
    double prev = a;
    double prev_f = f0;
    double cur = a + scale;
    double cur_f = f(cur);
    ++out.evals;
    int doublings = 0;
    while (cur_f > kCut * f0 && doublings < 160) {
        QuadResult part = integrate_adaptive(f, prev, cur, rel_tol);
        out.value += part.value;
        out.abs_error += part.abs_error;
        out.evals += part.evals;
        out.converged = out.converged && part.converged;
        prev = cur;
        prev_f = cur_f;
        cur = a + (cur - a) * 2.0;
        cur_f = f(cur);
        ++out.evals;
        ++doublings;
    }
    QuadResult part = integrate_adaptive(f, prev, cur, rel_tol);
    out.value += part.value;
    out.abs_error += part.abs_error;
    out.evals += part.evals;
    out.converged = out.converged && part.converged;
    if (doublings >= 160) out.converged = false;
    // Power-fit tail beyond `cur`: f ~ C (v-a)^(-beta) through the last two
    // scan points, so the remainder is f(cur) * (cur-a) / (beta-1).
    if (cur_f > 0.0 && prev_f > cur_f && cur > prev) {
        const double beta =
            std::log(prev_f / cur_f) / std::log((cur - a) / (prev - a));
        if (beta > 1.001) {
            out.tail = cur_f * (cur - a) / (beta - 1.0);
            out.value += out.tail;
            out.abs_error += 0.02 * out.tail;
        } else {
            // Decay too slow to certify a finite remainder from two points.
            out.converged = false;
        }
    }
    return out;
}

}  // namespace ruinlab
