#include "ruinlab/laws.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ruinlab/format.hpp"
#include "ruinlab/quadrature.hpp"
#include "ruinlab/vec.hpp"

namespace ruinlab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kSqrt2Pi = 2.5066282746310002;
}  // namespace

double inv_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("inv_normal_cdf: p must be in (0,1)");
    // Rational approximation in three regimes (|error| < 1.2e-9) ...
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // ... then one Halley step against the exact CDF via erfc.
    const double e = 0.5 * std::erfc(-x / kSqrt2) - p;
    const double u = e * kSqrt2Pi * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

double quantile_by_bisection(const Law1D& law, double q, double lo, double hi_hint) {
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("quantile: q must be in (0,1)");
    const double target = 1.0 - q;  // survival level to cross
    double hi = std::max(hi_hint, lo + 1.0);
    int guard = 0;
    while (law.survival(hi) > target && guard++ < 2000) hi = lo + (hi - lo) * 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (law.survival(mid) > target)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-13 * std::max(1.0, std::fabs(hi))) break;
    }
    return hi;
}

namespace {

class ParetoLaw final : public Law1D {
public:
    ParetoLaw(double alpha, double scale) : alpha_(alpha), scale_(scale) {
        require(alpha > 0.0, "pareto: alpha must be > 0");
        require(scale > 0.0, "pareto: scale must be > 0");
    }
    std::string name() const override {
        return "pareto(alpha=" + format_compact(alpha_) + ", scale=" + format_compact(scale_) + ")";
    }
    double survival(double x) const override {
        return x <= scale_ ? 1.0 : std::pow(x / scale_, -alpha_);
    }
    double quantile(double q) const override { return scale_ * std::pow(1.0 - q, -1.0 / alpha_); }
    double mean() const override { return alpha_ > 1.0 ? scale_ * alpha_ / (alpha_ - 1.0) : kInf; }
    double support_lo() const override { return scale_; }
    std::optional<double> tail_exponent() const override { return alpha_; }

    double alpha_, scale_;
};

class ExponentialLaw final : public Law1D {
public:
    explicit ExponentialLaw(double rate) : rate_(rate) {
        require(rate > 0.0, "exponential: rate must be > 0");
    }
    std::string name() const override { return "exponential(rate=" + format_compact(rate_) + ")"; }
    double survival(double x) const override { return x <= 0.0 ? 1.0 : std::exp(-rate_ * x); }
    double quantile(double q) const override { return -std::log1p(-q) / rate_; }
    double mean() const override { return 1.0 / rate_; }

    double rate_;
};

class WeibullLaw final : public Law1D {
public:
    WeibullLaw(double shape, double scale) : shape_(shape), scale_(scale) {
        require(shape > 0.0, "weibull: shape must be > 0");
        require(scale > 0.0, "weibull: scale must be > 0");
    }
    std::string name() const override {
        return "weibull(shape=" + format_compact(shape_) + ", scale=" + format_compact(scale_) +
               ")";
    }
    double survival(double x) const override {
        return x <= 0.0 ? 1.0 : std::exp(-std::pow(x / scale_, shape_));
    }
    double quantile(double q) const override {
        return scale_ * std::pow(-std::log1p(-q), 1.0 / shape_);
    }
    double mean() const override { return scale_ * std::exp(std::lgamma(1.0 + 1.0 / shape_)); }

    double shape_, scale_;
};

class LognormalLaw final : public Law1D {
public:
    LognormalLaw(double mu, double sigma) : mu_(mu), sigma_(sigma) {
        require(sigma > 0.0, "lognormal: sigma must be > 0");
    }
    std::string name() const override {
        return "lognormal(mu=" + format_compact(mu_) + ", sigma=" + format_compact(sigma_) + ")";
    }
    double survival(double x) const override {
        return x <= 0.0 ? 1.0 : 0.5 * std::erfc((std::log(x) - mu_) / (sigma_ * kSqrt2));
    }
    double quantile(double q) const override { return std::exp(mu_ + sigma_ * inv_normal_cdf(q)); }
    double mean() const override { return std::exp(mu_ + 0.5 * sigma_ * sigma_); }

    double mu_, sigma_;
};

class PointMassLaw final : public Law1D {
public:
    explicit PointMassLaw(double v) : v_(v) { require(v >= 0.0, "point mass: value must be >= 0"); }
    std::string name() const override { return "point(value=" + format_compact(v_) + ")"; }
    double survival(double x) const override { return x < v_ ? 1.0 : 0.0; }
    double quantile(double) const override { return v_; }
    double mean() const override { return v_; }
    double support_lo() const override { return v_; }

    double v_;
};

class ScaledLaw final : public Law1D {
public:
    ScaledLaw(LawPtr base, double factor) : base_(std::move(base)), factor_(factor) {
        require(static_cast<bool>(base_), "scaled law: null base");
        require(factor > 0.0, "scaled law: factor must be > 0");
    }
    std::string name() const override {
        return "scaled(" + base_->name() + ", factor=" + format_compact(factor_) + ")";
    }
    double survival(double x) const override { return base_->survival(x / factor_); }
    double quantile(double q) const override { return factor_ * base_->quantile(q); }
    double mean() const override { return factor_ * base_->mean(); }
    double support_lo() const override { return factor_ * base_->support_lo(); }
    std::optional<double> tail_exponent() const override { return base_->tail_exponent(); }

    LawPtr base_;
    double factor_;
};

// Closed-form stationary excess of a Pareto base: linear survival below the
// scale, algebraic tail with exponent alpha-1 above it.
class IntegratedParetoLaw final : public Law1D {
public:
    IntegratedParetoLaw(double alpha, double scale) : alpha_(alpha), scale_(scale) {
        require(alpha > 1.0, "integrated tail: base law must have a finite mean");
    }
    std::string name() const override {
        return "integrated_tail(pareto(alpha=" + format_compact(alpha_) +
               ", scale=" + format_compact(scale_) + "))";
    }
    double survival(double x) const override {
        if (x <= 0.0) return 1.0;
        if (x < scale_) return 1.0 - x * (alpha_ - 1.0) / (scale_ * alpha_);
        return std::pow(x / scale_, 1.0 - alpha_) / alpha_;
    }
    double quantile(double q) const override {
        const double v = 1.0 - q;
        if (v >= 1.0 / alpha_) return base_mean() * q;
        return scale_ * std::pow(alpha_ * v, -1.0 / (alpha_ - 1.0));
    }
    double mean() const override {
        return alpha_ > 2.0 ? scale_ * (alpha_ - 1.0) / (2.0 * (alpha_ - 2.0)) : kInf;
    }
    std::optional<double> tail_exponent() const override { return alpha_ - 1.0; }

private:
    double base_mean() const { return scale_ * alpha_ / (alpha_ - 1.0); }
    double alpha_, scale_;
};

// Numeric stationary excess: the integral I(x) = int_x^inf survival is
// anchored on a geometric grid; between anchors one 15-point panel corrects
// the nearest anchor value, so evaluation error stays near quadrature level.
class TabulatedIntegratedLaw final : public Law1D {
public:
    explicit TabulatedIntegratedLaw(LawPtr base) : base_(std::move(base)) {
        const double mu = base_->mean();
        require(std::isfinite(mu) && mu > 0.0,
                "integrated tail: base law must have a finite positive mean");
        // Find a cutoff x_top with negligible remaining integrated mass.
        double x_top = std::max(1.0, 2.0 * base_->support_lo());
        double top_tail = 0.0;
        for (int i = 0; i < 400; ++i) {
            top_tail = integrate_decreasing_upper([&](double t) { return base_->survival(t); },
                                                  x_top, std::max(1.0, x_top))
                           .value;
            if (top_tail <= 1e-13 * mu) break;
            x_top *= 2.0;
        }
        // Geometric anchors descending from x_top; accumulate segment
        // integrals so that I(x_k) = int_{x_k}^inf survival.
        const int kAnchors = 300;
        xs_.resize(kAnchors + 1);
        is_.resize(kAnchors + 1);
        xs_[kAnchors] = x_top;
        for (int k = kAnchors - 1; k >= 1; --k) xs_[k] = xs_[k + 1] * 0.9;
        xs_[0] = 0.0;
        is_[kAnchors] = top_tail;
        for (int k = kAnchors - 1; k >= 0; --k) {
            const auto seg = integrate_adaptive([&](double t) { return base_->survival(t); },
                                                xs_[k], xs_[k + 1], 1e-11);
            is_[k] = is_[k + 1] + seg.value;
        }
        norm_ = is_[0];  // equals the base mean up to quadrature error
    }
    std::string name() const override { return "integrated_tail(" + base_->name() + ")"; }
    double survival(double x) const override {
        if (x <= 0.0) return 1.0;
        if (x >= xs_.back()) {
            // Extend with the decay fitted through the last two anchors:
            // algebraic for regularly varying bases, exponential otherwise.
            const double x1 = xs_[xs_.size() - 2], x2 = xs_.back();
            const double i1 = is_[is_.size() - 2], i2 = is_.back();
            if (!(i2 > 0.0) || !(i1 > i2)) return 0.0;
            if (base_->tail_exponent()) {
                const double beta = std::log(i1 / i2) / std::log(x2 / x1);
                return (i2 / norm_) * std::pow(x / x2, -beta);
            }
            const double tau = (x2 - x1) / std::log(i1 / i2);
            return (i2 / norm_) * std::exp(-(x - x2) / tau);
        }
        // Correct the nearest lower anchor with a single Kronrod panel.
        auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
        const std::size_t k = static_cast<std::size_t>(it - xs_.begin()) - 1;
        const double seg = x > xs_[k]
                               ? gk15([&](double t) { return base_->survival(t); }, xs_[k], x).value
                               : 0.0;
        const double v = std::max(0.0, is_[k] - seg);
        return std::min(1.0, v / norm_);
    }
    double quantile(double q) const override {
        return quantile_by_bisection(*this, q, 0.0, xs_.back() * 0.5);
    }
    double mean() const override {
        const auto m = integrate_decreasing_upper([&](double t) { return survival(t); }, 0.0,
                                                  std::max(1.0, xs_.back() / 16.0));
        return m.converged ? m.value : kInf;
    }
    std::optional<double> tail_exponent() const override {
        if (auto a = base_->tail_exponent()) return *a - 1.0;
        return std::nullopt;
    }

private:
    LawPtr base_;
    std::vector<double> xs_, is_;
    double norm_ = 1.0;
};

}  // namespace

LawPtr pareto_law(double alpha, double scale) { return std::make_shared<ParetoLaw>(alpha, scale); }
LawPtr exponential_law(double rate) { return std::make_shared<ExponentialLaw>(rate); }
LawPtr weibull_law(double shape, double scale) {
    return std::make_shared<WeibullLaw>(shape, scale);
}
LawPtr lognormal_law(double mu, double sigma) {
    return std::make_shared<LognormalLaw>(mu, sigma);
}
LawPtr point_mass_law(double value) { return std::make_shared<PointMassLaw>(value); }
LawPtr scaled_law(LawPtr base, double factor) {
    return std::make_shared<ScaledLaw>(std::move(base), factor);
}

LawPtr integrated_tail(LawPtr base) {
    require(static_cast<bool>(base), "integrated_tail: null base");
    if (auto* p = dynamic_cast<const ParetoLaw*>(base.get())) {
        require(p->alpha_ > 1.0, "integrated tail: base law must have a finite mean");
        return std::make_shared<IntegratedParetoLaw>(p->alpha_, p->scale_);
    }
    if (dynamic_cast<const ExponentialLaw*>(base.get())) {
        return base;  // the exponential is its own stationary excess
    }
    return std::make_shared<TabulatedIntegratedLaw>(std::move(base));
}

}  // namespace ruinlab
