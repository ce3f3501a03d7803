#include "ruinlab/ruinsets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ruinlab/lp.hpp"

namespace ruinlab {

std::optional<std::string> validate(const HyperplaneFamily& fam) {
    if (fam.dim < 1) return "dim must be >= 1";
    if (fam.directions.empty()) return "at least one direction is required";
    for (std::size_t k = 0; k < fam.directions.size(); ++k) {
        const Vec& p = fam.directions[k];
        std::ostringstream os;
        if (static_cast<int>(p.size()) != fam.dim) {
            os << "direction " << k << " has length " << p.size() << ", expected " << fam.dim;
            return os.str();
        }
        if (!all_finite(p)) {
            os << "direction " << k << " has a non-finite entry";
            return os.str();
        }
        if (!all_nonneg(p)) {
            os << "direction " << k << " has a negative entry";
            return os.str();
        }
        if (max_abs(p) == 0.0) {
            os << "direction " << k << " is identically zero";
            return os.str();
        }
    }
    return std::nullopt;
}

void validate_or_throw(const HyperplaneFamily& fam) {
    if (auto msg = validate(fam)) throw std::invalid_argument("hyperplane family: " + *msg);
}

double scale_index(const HyperplaneFamily& fam, std::span<const double> x) {
    if (static_cast<int>(x.size()) != fam.dim)
        throw std::invalid_argument("scale_index: point dimension mismatch");
    double best = 0.0;
    for (const Vec& p : fam.directions) best = std::max(best, dot(p, x));
    return best;
}

bool membership(const HyperplaneFamily& fam, std::span<const double> x, double u) {
    return scale_index(fam, x) > u;
}

double height(const HyperplaneFamily& fam, std::span<const double> theta) {
    if (static_cast<int>(theta.size()) != fam.dim)
        throw std::invalid_argument("height: direction dimension mismatch");
    double sum = 0.0;
    for (double t : theta) {
        if (t < -1e-12) throw std::invalid_argument("height: negative simplex coordinate");
        sum += t;
    }
    if (std::fabs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("height: simplex coordinates must sum to 1");
    const double y = scale_index(fam, theta);
    return y > 0.0 ? 1.0 / y : std::numeric_limits<double>::infinity();
}

double excess_sojourn(const HyperplaneFamily& fam, std::span<const double> x,
                      std::span<const double> c, double u) {
    if (static_cast<int>(c.size()) != fam.dim)
        throw std::invalid_argument("excess_sojourn: drift dimension mismatch");
    if (!all_positive(c))
        throw std::invalid_argument("excess_sojourn: drift must be componentwise positive");
    if (static_cast<int>(x.size()) != fam.dim)
        throw std::invalid_argument("excess_sojourn: point dimension mismatch");
    double best = 0.0;
    for (const Vec& p : fam.directions) {
        const double speed = dot(p, c);  // > 0 because p >= 0, p != 0, c > 0
        best = std::max(best, (dot(p, x) - u) / speed);
    }
    return best;
}

HyperplaneFamily pullback(const HyperplaneFamily& fam, const LinearMap& map) {
    validate_or_throw(fam);
    if (map.rows != fam.dim) throw std::invalid_argument("pullback: map rows must equal family dim");
    if (map.cols < 1 || static_cast<int>(map.t.size()) != map.rows)
        throw std::invalid_argument("pullback: malformed map");
    for (const Vec& row : map.t) {
        if (static_cast<int>(row.size()) != map.cols)
            throw std::invalid_argument("pullback: ragged map");
        if (!all_nonneg(row)) throw std::invalid_argument("pullback: map entries must be >= 0");
    }
    HyperplaneFamily out;
    out.dim = map.cols;
    for (const Vec& p : fam.directions) {
        Vec q(map.cols, 0.0);
        for (int i = 0; i < map.rows; ++i)
            for (int j = 0; j < map.cols; ++j) q[j] += p[i] * map.t[i][j];
        if (max_abs(q) == 0.0)
            throw std::invalid_argument("pullback: a direction collapsed to zero");
        out.directions.push_back(std::move(q));
    }
    return out;
}

HyperplaneFamily union_families(const std::vector<HyperplaneFamily>& fams) {
    if (fams.empty()) throw std::invalid_argument("union_families: empty input");
    HyperplaneFamily out;
    out.dim = fams[0].dim;
    for (const auto& f : fams) {
        validate_or_throw(f);
        if (f.dim != out.dim) throw std::invalid_argument("union_families: dimension mismatch");
        out.directions.insert(out.directions.end(), f.directions.begin(), f.directions.end());
    }
    return out;
}

HyperplaneFamily prune_redundant(const HyperplaneFamily& fam, double tol) {
    validate_or_throw(fam);
    std::vector<Vec> kept = fam.directions;
    for (std::size_t j = 0; j < kept.size();) {
        if (kept.size() == 1) break;  // a single direction is never redundant
        std::vector<Vec> others;
        others.reserve(kept.size() - 1);
        for (std::size_t i = 0; i < kept.size(); ++i)
            if (i != j) others.push_back(kept[i]);
        const SupremumResult sup = max_linear_under_halfspaces(kept[j], others, tol);
        if (sup.bounded && sup.value <= 1.0 + tol) {
            kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(j));
        } else {
            ++j;
        }
    }
    return HyperplaneFamily{fam.dim, std::move(kept)};
}

std::optional<std::string> validate(const BidAskSpec& spec) {
    const int d = spec.dim;
    if (d < 1) return "dim must be >= 1";
    if (static_cast<int>(spec.pi.size()) != d) return "pi must be a dim x dim matrix";
    for (int i = 0; i < d; ++i) {
        if (static_cast<int>(spec.pi[i].size()) != d) return "pi must be a dim x dim matrix";
        for (int j = 0; j < d; ++j) {
            const double v = spec.pi[i][j];
            std::ostringstream os;
            if (!std::isfinite(v)) {
                os << "pi[" << i << "][" << j << "] is not finite";
                return os.str();
            }
            if (i == j && std::fabs(v - 1.0) > 1e-12) {
                os << "pi[" << i << "][" << i << "] must equal 1";
                return os.str();
            }
            if (v < 1.0 - 1e-12) {
                os << "pi[" << i << "][" << j << "] must be >= 1";
                return os.str();
            }
        }
    }
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                if (spec.pi[i][j] > spec.pi[i][k] * spec.pi[k][j] * (1.0 + 1e-9)) {
                    std::ostringstream os;
                    os << "triangle rule violated: pi[" << i << "][" << j << "] > pi[" << i << "]["
                       << k << "]*pi[" << k << "][" << j << "]";
                    return os.str();
                }
    if (static_cast<int>(spec.allocation.size()) != d) return "allocation must have length dim";
    if (!all_positive(spec.allocation)) return "allocation entries must be > 0";
    double s = 0.0;
    for (double v : spec.allocation) s += v;
    if (std::fabs(s - 1.0) > 1e-12) return "allocation entries must sum to 1";
    return std::nullopt;
}

void validate_or_throw(const BidAskSpec& spec) {
    if (auto msg = validate(spec)) throw std::invalid_argument("bid-ask spec: " + *msg);
}

std::vector<Vec> solvency_generators(const BidAskSpec& spec) {
    const int d = spec.dim;
    std::vector<Vec> gens;
    gens.reserve(static_cast<std::size_t>(d) * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (i == j) continue;
            Vec g(d, 0.0);
            g[i] = spec.pi[i][j];
            g[j] = -1.0;
            gens.push_back(std::move(g));
        }
    for (int i = 0; i < d; ++i) {
        Vec g(d, 0.0);
        g[i] = 1.0;
        gens.push_back(std::move(g));
    }
    return gens;
}

bool solvent(const BidAskSpec& spec, std::span<const double> x) {
    validate_or_throw(spec);
    return cone_contains(solvency_generators(spec), x);
}

double scale_index_lp(const BidAskSpec& spec, std::span<const double> x) {
    validate_or_throw(spec);
    const double u = min_scale_into_cone(solvency_generators(spec), spec.allocation, x);
    return std::max(0.0, u);
}

namespace {

Vec cross3(const Vec& a, const Vec& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// Ray q is feasible for the dual cone when q.g >= 0 for every generator,
// up to a scale-aware tolerance.
bool dual_feasible(const Vec& q, const std::vector<Vec>& gens, double tol) {
    const double qn = max_abs(q);
    for (const Vec& g : gens)
        if (dot(q, g) < -tol * qn * std::max(1.0, max_abs(g))) return false;
    return true;
}

}  // namespace

HyperplaneFamily compile_bidask(const BidAskSpec& spec) {
    validate_or_throw(spec);
    const int d = spec.dim;
    if (d > 3)
        throw std::invalid_argument(
            "compile_bidask: dual-ray enumeration supports dim <= 3; use scale_index_lp");
    const std::vector<Vec> gens = solvency_generators(spec);
    constexpr double kTol = 1e-9;

    std::vector<Vec> candidates;
    if (d == 1) {
        candidates.push_back(Vec{1.0});
    } else if (d == 2) {
        for (const Vec& g : gens) {
            candidates.push_back(Vec{-g[1], g[0]});
            candidates.push_back(Vec{g[1], -g[0]});
        }
    } else {
        for (std::size_t i = 0; i < gens.size(); ++i)
            for (std::size_t j = i + 1; j < gens.size(); ++j) {
                Vec q = cross3(gens[i], gens[j]);
                if (max_abs(q) <= kTol * max_abs(gens[i]) * max_abs(gens[j])) continue;
                Vec nq(3);
                for (int k = 0; k < 3; ++k) nq[k] = -q[k];
                candidates.push_back(std::move(q));
                candidates.push_back(std::move(nq));
            }
    }

    std::vector<Vec> rays;
    for (Vec& q : candidates) {
        if (!dual_feasible(q, gens, kTol)) continue;
        // The dual cone sits inside the nonnegative orthant (C contains the
        // axes), so surviving rays are nonnegative up to rounding dust.
        for (double& v : q) v = std::max(0.0, v);
        const double level = dot(q, spec.allocation);
        if (level <= kTol * max_abs(q)) continue;
        for (double& v : q) v /= level;  // normalize to p . b = 1
        bool duplicate = false;
        for (const Vec& r : rays) {
            double diff = 0.0;
            for (int k = 0; k < d; ++k) diff = std::max(diff, std::fabs(r[k] - q[k]));
            if (diff <= 1e-8 * std::max(1.0, max_abs(r))) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) rays.push_back(std::move(q));
    }
    if (rays.empty()) throw std::runtime_error("compile_bidask: no dual rays found");

    HyperplaneFamily fam{d, std::move(rays)};
    fam = prune_redundant(fam);
    std::sort(fam.directions.begin(), fam.directions.end());
    validate_or_throw(fam);
    return fam;
}

}  // namespace ruinlab
