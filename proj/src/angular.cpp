#include "ruinlab/angular.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ruinlab {

// Marsaglia-Tsang; the alpha < 1 boosting step keeps it valid for small
// Dirichlet concentrations.
double gamma_sample(RngStream& rng, double alpha) {
    if (alpha < 1.0)
        return gamma_sample(rng, alpha + 1.0) * std::pow(rng.uniform(), 1.0 / alpha);
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / (3.0 * std::sqrt(d));
    for (;;) {
        const double x = inv_normal_cdf(rng.uniform());
        const double t = 1.0 + c * x;
        if (t <= 0.0) continue;
        const double v = t * t * t;
        const double u = rng.uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

AngularMeasure AngularMeasure::single_atom(Vec theta) {
    AngularMeasure m;
    m.kind = Kind::kAtoms;
    m.dim = static_cast<int>(theta.size());
    m.atoms.emplace_back(std::move(theta), 1.0);
    m.validate_or_throw();
    return m;
}

AngularMeasure AngularMeasure::atom_list(std::vector<std::pair<Vec, double>> atoms) {
    AngularMeasure m;
    m.kind = Kind::kAtoms;
    m.dim = atoms.empty() ? 0 : static_cast<int>(atoms[0].first.size());
    m.atoms = std::move(atoms);
    m.validate_or_throw();
    return m;
}

AngularMeasure AngularMeasure::dirichlet(Vec alpha) {
    AngularMeasure m;
    m.kind = Kind::kDirichlet;
    m.dim = static_cast<int>(alpha.size());
    m.dirichlet_alpha = std::move(alpha);
    m.validate_or_throw();
    return m;
}

AngularMeasure AngularMeasure::uniform(int dim) { return dirichlet(Vec(dim, 1.0)); }

double AngularMeasure::total_mass() const {
    if (kind == Kind::kDirichlet) return 1.0;
    double s = 0.0;
    for (const auto& [theta, w] : atoms) s += w;
    return s;
}

std::optional<std::string> AngularMeasure::validate() const {
    if (dim < 1) return "dim must be >= 1";
    if (kind == Kind::kAtoms) {
        if (atoms.empty()) return "at least one atom is required";
        for (std::size_t k = 0; k < atoms.size(); ++k) {
            const auto& [theta, w] = atoms[k];
            std::ostringstream os;
            if (static_cast<int>(theta.size()) != dim) {
                os << "atom " << k << " has wrong dimension";
                return os.str();
            }
            double s = 0.0;
            for (double v : theta) {
                if (v < -1e-15) {
                    os << "atom " << k << " leaves the simplex (negative coordinate)";
                    return os.str();
                }
                s += v;
            }
            if (std::fabs(s - 1.0) > 1e-12) {
                os << "atom " << k << " coordinates must sum to 1";
                return os.str();
            }
            if (!(w > 0.0)) {
                os << "atom " << k << " must have positive weight";
                return os.str();
            }
        }
        return std::nullopt;
    }
    if (static_cast<int>(dirichlet_alpha.size()) != dim)
        return "dirichlet parameters must have length dim";
    for (double a : dirichlet_alpha)
        if (!(a > 0.0)) return "dirichlet parameters must be > 0";
    return std::nullopt;
}

void AngularMeasure::validate_or_throw() const {
    if (auto msg = validate()) throw std::invalid_argument("angular measure: " + *msg);
}

Vec AngularMeasure::sample(RngStream& rng) const {
    if (kind == Kind::kAtoms) {
        const double total = total_mass();
        double pick = rng.uniform() * total;
        for (const auto& [theta, w] : atoms) {
            pick -= w;
            if (pick <= 0.0) return theta;
        }
        return atoms.back().first;
    }
    Vec out(dim);
    double s = 0.0;
    for (int i = 0; i < dim; ++i) {
        out[i] = gamma_sample(rng, dirichlet_alpha[i]);
        s += out[i];
    }
    for (double& v : out) v /= s;
    return out;
}

}  // namespace ruinlab
