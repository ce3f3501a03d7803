#include "ruinlab/claims.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ruinlab/format.hpp"
#include "ruinlab/quadrature.hpp"

namespace ruinlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.141592653589793;

class IndependentModel final : public ClaimModel {
public:
    explicit IndependentModel(std::vector<LawPtr> laws) : laws_(std::move(laws)) {
        require(!laws_.empty(), "independent model: at least one marginal law");
        for (const auto& l : laws_) require(static_cast<bool>(l), "independent model: null law");
    }
    std::string name() const override {
        std::ostringstream os;
        os << "independent(";
        for (std::size_t j = 0; j < laws_.size(); ++j) {
            if (j) os << ", ";
            os << laws_[j]->name();
        }
        os << ")";
        return os.str();
    }
    int dim() const override { return static_cast<int>(laws_.size()); }
    void sample_into(RngStream& rng, std::span<double> out) const override {
        for (std::size_t j = 0; j < laws_.size(); ++j) out[j] = laws_[j]->sample(rng);
    }
    std::optional<Vec> mean_vector() const override {
        Vec m(laws_.size());
        for (std::size_t j = 0; j < laws_.size(); ++j) m[j] = laws_[j]->mean();
        return m;
    }
    LawPtr marginal(int j) const override { return laws_.at(static_cast<std::size_t>(j)); }
    bool has_independent_marginals() const override { return true; }
    std::optional<double> joint_survival(std::span<const double> x) const override {
        double p = 1.0;
        for (std::size_t j = 0; j < laws_.size(); ++j) p *= laws_[j]->survival(x[j]);
        return p;
    }
    // Exact only when every direction is axis-aligned: the region is then a
    // union of per-coordinate halfspaces and independence factorizes it.
    std::optional<double> scalarized_survival(const HyperplaneFamily& fam,
                                              double t) const override {
        if (fam.dim != dim()) return std::nullopt;
        Vec weight(laws_.size(), 0.0);  // largest load per axis
        for (const Vec& p : fam.directions) {
            int axis = -1;
            for (std::size_t j = 0; j < p.size(); ++j) {
                if (p[j] > 0.0) {
                    if (axis >= 0) return std::nullopt;  // direction mixes axes
                    axis = static_cast<int>(j);
                }
            }
            if (axis < 0) return std::nullopt;
            weight[axis] = std::max(weight[axis], p[axis]);
        }
        double miss = 1.0;
        for (std::size_t j = 0; j < laws_.size(); ++j)
            if (weight[j] > 0.0) miss *= 1.0 - laws_[j]->survival(t / weight[j]);
        return 1.0 - miss;
    }
    // Equal Pareto-type tail exponents: spectral mass on the axes with
    // weights scale_j^alpha, and an asymptotically equivalent norm law.
    std::optional<MrvDescriptor> mrv() const override {
        std::optional<double> alpha;
        for (const auto& l : laws_) {
            const auto a = l->tail_exponent();
            if (!a) return std::nullopt;
            if (alpha && std::fabs(*a - *alpha) > 1e-12) return std::nullopt;
            alpha = a;
        }
        double mass = 0.0;
        std::vector<std::pair<Vec, double>> atoms;
        for (std::size_t j = 0; j < laws_.size(); ++j) {
            // Calibrate the axis weight from the far tail: w = lim x^a S(x).
            const double probe = 1e8 * std::max(1.0, laws_[j]->support_lo());
            const double w = laws_[j]->survival(probe) * std::pow(probe, *alpha);
            if (!(w > 0.0)) return std::nullopt;
            Vec theta(laws_.size(), 0.0);
            theta[j] = 1.0;
            atoms.emplace_back(std::move(theta), w);
            mass += w;
        }
        for (auto& [theta, w] : atoms) w /= mass;
        MrvDescriptor d;
        d.alpha = *alpha;
        d.spectral = AngularMeasure::atom_list(std::move(atoms));
        d.norm_law = pareto_law(*alpha, std::pow(mass, 1.0 / *alpha));
        return d;
    }

private:
    std::vector<LawPtr> laws_;
};

class PolarModel final : public ClaimModel {
public:
    PolarModel(AngularMeasure angular, LawPtr radial)
        : angular_(std::move(angular)), radial_(std::move(radial)) {
        angular_.validate_or_throw();
        require(static_cast<bool>(radial_), "polar model: null radial law");
        require(radial_->support_lo() >= 0.0, "polar model: radial law must be nonnegative");
    }
    std::string name() const override {
        std::ostringstream os;
        os << "polar(";
        if (angular_.kind == AngularMeasure::Kind::kAtoms)
            os << "atoms=" << angular_.atoms.size();
        else
            os << "dirichlet";
        os << ", radial=" << radial_->name() << ")";
        return os.str();
    }
    int dim() const override { return angular_.dim; }
    void sample_into(RngStream& rng, std::span<double> out) const override {
        const Vec theta = angular_.sample(rng);
        const double r = radial_->sample(rng);
        for (int j = 0; j < angular_.dim; ++j) out[j] = r * theta[j];
    }
    std::optional<Vec> mean_vector() const override {
        const double mr = radial_->mean();
        Vec m(static_cast<std::size_t>(angular_.dim), 0.0);
        if (angular_.kind == AngularMeasure::Kind::kAtoms) {
            const double total = angular_.total_mass();
            for (const auto& [theta, w] : angular_.atoms)
                for (int j = 0; j < angular_.dim; ++j) m[j] += (w / total) * theta[j];
        } else {
            double s = 0.0;
            for (double a : angular_.dirichlet_alpha) s += a;
            for (int j = 0; j < angular_.dim; ++j) m[j] = angular_.dirichlet_alpha[j] / s;
        }
        for (double& v : m) v *= mr;
        return m;
    }
    LawPtr marginal(int j) const override {
        // Closed form only in the single-atom case: X_j = theta_j * R.
        if (angular_.kind == AngularMeasure::Kind::kAtoms && angular_.atoms.size() == 1) {
            const double tj = angular_.atoms[0].first[static_cast<std::size_t>(j)];
            if (tj > 0.0) return scaled_law(radial_, tj);
            return point_mass_law(0.0);
        }
        return nullptr;
    }
    std::optional<double> joint_survival(std::span<const double> x) const override {
        if (angular_.kind != AngularMeasure::Kind::kAtoms) return std::nullopt;
        const double total = angular_.total_mass();
        double p = 0.0;
        for (const auto& [theta, w] : angular_.atoms) {
            double need = 0.0;  // smallest radius putting R*theta above x
            bool possible = true;
            for (std::size_t j = 0; j < theta.size(); ++j) {
                if (x[j] < 0.0) continue;  // no constraint
                if (theta[j] <= 0.0) {
                    possible = false;
                    break;
                }
                need = std::max(need, x[j] / theta[j]);
            }
            if (possible) p += (w / total) * radial_->survival(need);
        }
        return p;
    }
    // Mixture of radial tails lifted through the per-atom entry heights.
    std::optional<double> scalarized_survival(const HyperplaneFamily& fam,
                                              double t) const override {
        if (angular_.kind != AngularMeasure::Kind::kAtoms || fam.dim != angular_.dim)
            return std::nullopt;
        const double total = angular_.total_mass();
        double p = 0.0;
        for (const auto& [theta, w] : angular_.atoms) {
            const double y = scale_index(fam, theta);
            if (y > 0.0) p += (w / total) * radial_->survival(t / y);
        }
        return p;
    }
    std::optional<MrvDescriptor> mrv() const override {
        const auto alpha = radial_->tail_exponent();
        if (!alpha) return std::nullopt;
        // Theta lives on the L1 simplex, so |X|_1 = R exactly and the
        // spectral measure is the normalized angular measure itself.
        MrvDescriptor d;
        d.alpha = *alpha;
        d.spectral = angular_;
        if (d.spectral.kind == AngularMeasure::Kind::kAtoms) {
            const double total = d.spectral.total_mass();
            for (auto& [theta, w] : d.spectral.atoms) w /= total;
        }
        d.norm_law = radial_;
        return d;
    }

private:
    AngularMeasure angular_;
    LawPtr radial_;
};

// ---------------------------------------------------------------------------
// Dyadic simplex pair.

class DyadicMarginalLaw final : public Law1D {
public:
    std::string name() const override { return "dyadic_marginal"; }
    double survival(double x) const override { return dyadic_marginal_survival(x); }
    double quantile(double q) const override {
        return quantile_by_bisection(*this, q, 0.0, 2.0);
    }
    double mean() const override { return kInf; }
    double sample(RngStream& rng) const override {
        const int n = static_cast<int>(std::floor(-std::log2(rng.uniform())));
        return rng.uniform() * std::ldexp(1.0, n);
    }
};

class DyadicSumLaw final : public Law1D {
public:
    std::string name() const override { return "dyadic_sum"; }
    double survival(double s) const override { return dyadic_sum_survival(s); }
    double quantile(double q) const override {
        // Discrete law on powers of two: smallest 2^n with P(sum > 2^n-) >= ...
        const int n = static_cast<int>(std::ceil(-std::log2(1.0 - q))) - 1;
        return std::ldexp(1.0, std::max(0, n));
    }
    double mean() const override { return kInf; }
    double support_lo() const override { return 1.0; }
    double sample(RngStream& rng) const override {
        const int n = static_cast<int>(std::floor(-std::log2(rng.uniform())));
        return std::ldexp(1.0, n);
    }
};

class DyadicModel final : public ClaimModel {
public:
    std::string name() const override { return "dyadic_simplex"; }
    int dim() const override { return 2; }
    void sample_into(RngStream& rng, std::span<double> out) const override {
        const int n = static_cast<int>(std::floor(-std::log2(rng.uniform())));
        const double level = std::ldexp(1.0, n);
        const double x = rng.uniform() * level;
        out[0] = x;
        out[1] = level - x;
    }
    std::optional<Vec> mean_vector() const override { return Vec{kInf, kInf}; }
    LawPtr marginal(int) const override { return dyadic_marginal_law(); }
    // Mass on each level is uniform over the segment x + y = 2^n, so the
    // orthant probability depends on the coordinates only through their sum.
    std::optional<double> joint_survival(std::span<const double> x) const override {
        return dyadic_marginal_survival(std::max(0.0, x[0]) + std::max(0.0, x[1]));
    }
    // Conditional on the level, p.X is uniform on a segment, so each
    // halfspace cuts an end interval of the placement variable; the union is
    // two end intervals whose lengths add (capped at 1).
    std::optional<double> scalarized_survival(const HyperplaneFamily& fam,
                                              double t) const override {
        if (fam.dim != 2 || t < 0.0) return std::nullopt;
        if (t == 0.0) return 1.0;
        double total = 0.0;
        int n = 0;
        for (; n < 1100; ++n) {
            const double level = std::ldexp(1.0, n);
            const double pn = std::ldexp(1.0, -(n + 1));
            double upper = 0.0, lower = 0.0;  // measures of {u > c} and {u < d}
            bool whole = false;
            for (const Vec& p : fam.directions) {
                // p . X = level * (p0 u + p1 (1-u)) > t,  u ~ U(0,1).
                const double slope = p[0] - p[1];
                const double rhs = t / level - p[1];
                if (slope > 0.0)
                    upper = std::max(upper, std::min(1.0, std::max(0.0, 1.0 - rhs / slope)));
                else if (slope < 0.0)
                    lower = std::max(lower, std::min(1.0, std::max(0.0, rhs / slope)));
                else if (rhs < 0.0)
                    whole = true;
            }
            const double measure = whole ? 1.0 : std::min(1.0, upper + lower);
            total += pn * measure;
            if (measure >= 1.0) {
                // Every later level is also fully inside; add the geometric
                // remainder and stop.
                total += pn;  // sum_{m > n} 2^-(m+1) = 2^-(n+1)
                break;
            }
        }
        return std::min(1.0, total);
    }
};

}  // namespace

double dyadic_marginal_survival(double x) {
    if (x < 0.0) return 1.0;
    if (x < 1.0) return 1.0 - 2.0 * x / 3.0;
    const int n = std::ilogb(x);
    return std::ldexp(1.0, -(n + 1)) - (x / 3.0) * std::ldexp(1.0, -(2 * n + 1));
}

double dyadic_sum_survival(double s) {
    if (s < 1.0) return 1.0;
    const int n = std::ilogb(s);
    return std::ldexp(1.0, -(n + 1));
}

// ---------------------------------------------------------------------------
// Oscillating pair.

double oscillating_joint_survival(double gamma, double x, double y) {
    if (x < 0.0) x = 0.0;
    if (y < 0.0) y = 0.0;
    const double s = 1.0 + x + y;
    return (1.0 + gamma * std::sin(std::log(s)) * std::cos(0.5 * kPi * (x - y) / s)) / s;
}

// Mixed second derivative of the survival, simplified symbolically; verified
// against central finite differences in the tests.
double oscillating_density(double gamma, double x, double y) {
    const double s = 1.0 + x + y;
    const double L = std::log(s);
    const double rho = 0.5 * kPi * (x - y) / s;
    const double sinL = std::sin(L), cosL = std::cos(L);
    const double term1 = 2.0 * s * s;
    const double term2 = gamma * kPi * (x - y) * s * std::sin(rho) * (cosL - 2.0 * sinL);
    const double term3 =
        gamma * std::cos(rho) *
        (s * s * (sinL - 3.0 * cosL) + 0.25 * kPi * kPi * (2.0 * x + 1.0) * (2.0 * y + 1.0) * sinL);
    return (term1 + term2 + term3) / (s * s * s * s * s);
}

double oscillating_sum_survival(double gamma, double s) {
    if (s <= 0.0) return 1.0;
    // Density of the sum: integrate the joint density along x + y = t.
    auto sum_density = [gamma](double t) {
        if (t <= 0.0) return 0.0;
        return integrate_adaptive(
                   [gamma, t](double x) { return oscillating_density(gamma, x, t - x); }, 0.0, t,
                   1e-10)
            .value;
    };
    if (s <= 8.0) {
        const double below = integrate_adaptive(sum_density, 0.0, s, 1e-10).value;
        return std::max(0.0, 1.0 - below);
    }
    // Far tail: the sum density decays like ~2/t^2 (up to the oscillation),
    // monotone enough beyond moderate t for the doubling-scan integrator.
    return integrate_decreasing_upper(sum_density, s, std::max(1.0, s), 1e-9).value;
}

namespace {

class OscillatingMarginalLaw final : public Law1D {
public:
    explicit OscillatingMarginalLaw(double gamma) : gamma_(gamma) {}
    std::string name() const override {
        return "oscillating_marginal(gamma=" + format_compact(gamma_) + ")";
    }
    double survival(double x) const override { return oscillating_joint_survival(gamma_, x, 0.0); }
    double quantile(double q) const override {
        return quantile_by_bisection(*this, q, 0.0, 4.0);
    }
    double mean() const override { return kInf; }

private:
    double gamma_;
};

class OscillatingModel final : public ClaimModel {
public:
    explicit OscillatingModel(double gamma) : gamma_(gamma) {
        require(gamma >= 0.0, "oscillating model: gamma must be >= 0");
        envelope_ = 2.0 + 4.0 * gamma + 3.0 * gamma * kPi + 0.25 * kPi * kPi;
        // The density must stay positive; probe scale decades and diagonal
        // positions.  (Positivity holds for gamma up to roughly 0.18.)
        for (int i = 0; i <= 240; ++i) {
            const double s = std::pow(10.0, -3.0 + i * (9.0 - (-3.0)) / 240.0);
            for (int k = 0; k <= 40; ++k) {
                const double x = s * k / 40.0;
                const double f = oscillating_density(gamma, x, s - x);
                if (!(f > 0.0))
                    throw std::invalid_argument(
                        "oscillating model: density not positive at gamma=" +
                        format_compact(gamma) + " (reduce gamma)");
            }
        }
    }
    std::string name() const override { return "oscillating(gamma=" + format_compact(gamma_) + ")"; }
    int dim() const override { return 2; }
    void sample_into(RngStream& rng, std::span<double> out) const override {
        for (;;) {
            // Proposal: density 2/(1+x+y)^3, i.e. sum s with CDF (s/(1+s))^2
            // and uniform placement; accept with f / envelope-proposal odds.
            const double root = std::sqrt(rng.uniform());
            const double s = root / (1.0 - root);
            const double x = rng.uniform() * s;
            const double y = s - x;
            const double t = 1.0 + s;
            const double accept = oscillating_density(gamma_, x, y) * t * t * t / envelope_;
            if (rng.uniform() < accept) {
                out[0] = x;
                out[1] = y;
                return;
            }
        }
    }
    std::optional<Vec> mean_vector() const override { return Vec{kInf, kInf}; }
    LawPtr marginal(int) const override {
        return std::make_shared<OscillatingMarginalLaw>(gamma_);
    }
    std::optional<double> joint_survival(std::span<const double> x) const override {
        return oscillating_joint_survival(gamma_, x[0], x[1]);
    }
    double acceptance_rate() const { return 2.0 / envelope_; }

private:
    double gamma_;
    double envelope_;
};

class PointModel final : public ClaimModel {
public:
    explicit PointModel(Vec v) : v_(std::move(v)) {
        require(!v_.empty(), "point model: empty vector");
        require(all_nonneg(v_), "point model: claims must be nonnegative");
        require(all_finite(v_), "point model: claims must be finite");
    }
    std::string name() const override { return "point" + vec_to_string(v_); }
    int dim() const override { return static_cast<int>(v_.size()); }
    void sample_into(RngStream&, std::span<double> out) const override {
        std::copy(v_.begin(), v_.end(), out.begin());
    }
    std::optional<Vec> mean_vector() const override { return v_; }
    LawPtr marginal(int j) const override {
        return point_mass_law(v_[static_cast<std::size_t>(j)]);
    }
    std::optional<double> joint_survival(std::span<const double> x) const override {
        for (std::size_t j = 0; j < v_.size(); ++j)
            if (!(v_[j] > x[j])) return 0.0;
        return 1.0;
    }
    std::optional<double> scalarized_survival(const HyperplaneFamily& fam,
                                              double t) const override {
        return scale_index(fam, v_) > t ? 1.0 : 0.0;
    }

private:
    Vec v_;
};

}  // namespace

ModelPtr independent_marginals_model(std::vector<LawPtr> laws) {
    return std::make_shared<IndependentModel>(std::move(laws));
}
ModelPtr polar_model(AngularMeasure angular, LawPtr radial) {
    return std::make_shared<PolarModel>(std::move(angular), std::move(radial));
}
ModelPtr dyadic_simplex_model() { return std::make_shared<DyadicModel>(); }
ModelPtr oscillating_model(double gamma) { return std::make_shared<OscillatingModel>(gamma); }
ModelPtr point_model(Vec value) { return std::make_shared<PointModel>(std::move(value)); }

LawPtr dyadic_marginal_law() { return std::make_shared<DyadicMarginalLaw>(); }
LawPtr dyadic_sum_law() { return std::make_shared<DyadicSumLaw>(); }

}  // namespace ruinlab
