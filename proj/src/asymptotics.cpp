#include "ruinlab/asymptotics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ruinlab/laws.hpp"
#include "ruinlab/parallel.hpp"
#include "ruinlab/quadrature.hpp"
#include "ruinlab/stats.hpp"

namespace ruinlab {

std::optional<std::string> SafetyLoading::validate() const {
    if (c.empty()) return "safety loading: empty drift vector";
    if (!all_finite(c)) return "safety loading: non-finite drift component";
    if (!all_positive(c)) return "safety loading: drift must be > 0 in every coordinate";
    if (provenance != "analytic" && provenance != "mc")
        return "safety loading: provenance must be \"analytic\" or \"mc\"";
    if (provenance == "mc") {
        if (stderr_c.size() != c.size()) return "safety loading: stderr size mismatch";
        for (std::size_t j = 0; j < c.size(); ++j) {
            if (!(std::isfinite(stderr_c[j]) && stderr_c[j] >= 0.0))
                return "safety loading: stderr components must be finite and >= 0";
            if (!(c[j] - 3.0 * stderr_c[j] > 0.0)) {
                std::ostringstream os;
                os << "safety loading: component " << j << " (" << c[j] << " +- " << stderr_c[j]
                   << ") does not clear zero at 3 sigma";
                return os.str();
            }
        }
    } else if (!stderr_c.empty()) {
        return "safety loading: analytic loading must not carry a stderr";
    }
    return std::nullopt;
}

void SafetyLoading::validate_or_throw() const {
    if (auto msg = validate()) throw std::invalid_argument(*msg);
}

namespace {

constexpr std::uint64_t kMinHits = 20;
constexpr std::size_t kMomGroups = 16;

void check_drift(const Vec& c, int dim) {
    require(static_cast<int>(c.size()) == dim, "drift dimension does not match claim model");
    require(all_finite(c) && all_positive(c), "drift must be finite and > 0 in every coordinate");
}

void check_levels(const std::vector<double>& levels) {
    require(!levels.empty(), "level grid is empty");
    double prev = -1.0;
    for (double u : levels) {
        require(std::isfinite(u) && u >= 0.0 && u > prev,
                "levels must be nonnegative and strictly increasing");
        prev = u;
    }
}

void check_family(const ClaimModel& model, const HyperplaneFamily& fam) {
    validate_or_throw(fam);
    require(fam.dim == model.dim(), "family dimension does not match claim model");
}

void check_finite_mean(const ClaimModel& model) {
    if (auto mv = model.mean_vector())
        require(all_finite(*mv), "claim mean is not finite: the drift transform diverges");
}

std::vector<LawPtr> analytic_marginals(const ClaimModel& model, const std::string& who) {
    require(model.has_independent_marginals(), who + ": model must have independent marginals");
    std::vector<LawPtr> out(static_cast<std::size_t>(model.dim()));
    for (int j = 0; j < model.dim(); ++j) {
        out[static_cast<std::size_t>(j)] = model.marginal(j);
        require(out[static_cast<std::size_t>(j)] != nullptr,
                who + ": marginal law not available in closed form");
    }
    return out;
}

struct LevelAgg {
    MomentAccumulator acc;
    std::uint64_t positive = 0;
    void add(double v) {
        acc.add(v);
        if (v > 0.0) ++positive;
    }
    void merge(const LevelAgg& o) {
        acc.merge(o.acc);
        positive += o.positive;
    }
};

struct ScoreSummary {
    std::vector<LevelAgg> total;                   // per level
    std::vector<std::vector<double>> group_means;  // per level, kMomGroups-ish entries
};

// Means of stat(x) per level over n samples.  The stat object is copied into
// every block (scratch buffers stay private); randomness comes only from the
// per-block child stream, so results do not depend on scheduling.  Blocks are
// also folded (in index order) into at most kMomGroups groups whose means
// feed the median-of-means fallback.
template <class Stat>
ScoreSummary collect_scores(std::uint64_t n, std::size_t nlevels, const RngStream& stream,
                            const Stat& proto) {
    const std::size_t nblocks = block_count(static_cast<std::size_t>(n));
    auto blocks = run_blocks<std::vector<LevelAgg>>(nblocks, [&](std::size_t b) {
        std::size_t lo, hi;
        block_bounds(static_cast<std::size_t>(n), b, &lo, &hi);
        RngStream rng = stream.child(b);
        Stat stat = proto;
        std::vector<LevelAgg> agg(nlevels);
        std::vector<double> scores(nlevels);
        for (std::size_t i = lo; i < hi; ++i) {
            stat(rng, scores);
            for (std::size_t l = 0; l < nlevels; ++l) agg[l].add(scores[l]);
        }
        return agg;
    });
    ScoreSummary out;
    out.total.resize(nlevels);
    const std::size_t ngroups = std::min(kMomGroups, nblocks);
    std::vector<std::vector<MomentAccumulator>> gacc(
        nlevels, std::vector<MomentAccumulator>(ngroups));
    for (std::size_t b = 0; b < blocks.size(); ++b)
        for (std::size_t l = 0; l < nlevels; ++l) {
            out.total[l].merge(blocks[b][l]);
            gacc[l][b % ngroups].merge(blocks[b][l].acc);
        }
    out.group_means.assign(nlevels, {});
    for (std::size_t l = 0; l < nlevels; ++l)
        for (std::size_t g = 0; g < ngroups; ++g)
            if (gacc[l][g].n > 0) out.group_means[l].push_back(gacc[l][g].mean());
    return out;
}

// Plain stderr of the mean, widened by the median-of-means spread when the
// top sample dominates the sum.  Replacing instead of widening would be
// wrong here: at levels hit by only a handful of samples most block means
// are zero and the MAD collapses, reporting spurious certainty.
double robust_stderr(const LevelAgg& agg, const std::vector<double>& group_means,
                     bool* unstable) {
    double se = agg.acc.stderr_mean();
    const bool heavy = agg.acc.top_heavy();
    if (unstable) *unstable = heavy;
    if (heavy && group_means.size() >= 4)
        se = std::max(se, median_of_means(group_means).stderr_value);
    return se;
}

struct SojournStat {
    const ClaimModel* model = nullptr;
    const HyperplaneFamily* fam = nullptr;
    const std::vector<double>* levels = nullptr;
    std::vector<double> pc;  // p_k.c, fixed per run
    Vec x;
    std::vector<double> px;
    void operator()(RngStream& rng, std::vector<double>& out) {
        model->sample_into(rng, x);
        for (std::size_t k = 0; k < fam->directions.size(); ++k)
            px[k] = dot(fam->directions[k], x);
        for (std::size_t l = 0; l < levels->size(); ++l) {
            const double u = (*levels)[l];
            double v = 0.0;
            for (std::size_t k = 0; k < px.size(); ++k) {
                const double r = (px[k] - u) / pc[k];
                if (r > v) v = r;
            }
            out[l] = v;
        }
    }
};

struct OrthantExitStat {
    const ClaimModel* model = nullptr;
    const Vec* c = nullptr;
    Vec x;
    void operator()(RngStream& rng, std::vector<double>& out) {
        model->sample_into(rng, x);
        double m = x[0] / (*c)[0];
        for (std::size_t j = 1; j < x.size(); ++j) m = std::min(m, x[j] / (*c)[j]);
        out[0] = m;
    }
};

}  // namespace

Estimate theta_mc(const ClaimModel& model, const Vec& c, std::uint64_t n,
                  const RngStream& stream) {
    check_drift(c, model.dim());
    check_finite_mean(model);
    require(n > 0, "theta_mc: need at least one sample");
    OrthantExitStat proto;
    proto.model = &model;
    proto.c = &c;
    proto.x.resize(static_cast<std::size_t>(model.dim()));
    auto s = collect_scores(n, 1, stream, proto);
    Estimate e;
    e.value = s.total[0].acc.mean();
    e.stderr_v = robust_stderr(s.total[0], s.group_means[0], nullptr);
    e.method = "mc";
    return e;
}

Estimate theta_quadrature(const ClaimModel& model, const Vec& c, double rel_tol) {
    check_drift(c, model.dim());
    check_finite_mean(model);
    auto laws = analytic_marginals(model, "theta_quadrature");
    auto f = [&](double v) {
        double p = 1.0;
        for (std::size_t j = 0; j < laws.size(); ++j) p *= laws[j]->survival(v * c[j]);
        return p;
    };
    double scale = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < laws.size(); ++j)
        scale = std::min(scale, std::max(laws[j]->quantile(0.5), 1e-9) / c[j]);
    QuadResult q = integrate_decreasing_upper(f, 0.0, scale, rel_tol);
    if (!q.converged)
        throw std::runtime_error("theta_quadrature did not converge (infinite claim mean?)");
    return {q.value, q.abs_error, "quadrature"};
}

HCurve h_curve_mc(const ClaimModel& model, const HyperplaneFamily& family, const Vec& c,
                  const std::vector<double>& levels, std::uint64_t n, const RngStream& stream) {
    check_family(model, family);
    check_drift(c, model.dim());
    check_levels(levels);
    require(n > 0, "h_curve_mc: need at least one sample");
    SojournStat proto;
    proto.model = &model;
    proto.fam = &family;
    proto.levels = &levels;
    proto.pc.resize(family.directions.size());
    for (std::size_t k = 0; k < family.directions.size(); ++k)
        proto.pc[k] = dot(family.directions[k], c);
    proto.x.resize(static_cast<std::size_t>(model.dim()));
    proto.px.resize(family.directions.size());
    auto s = collect_scores(n, levels.size(), stream, proto);

    HCurve out;
    out.curve.levels = levels;
    out.curve.method = "mc";
    out.curve.n_samples = n;
    out.curve.values.resize(levels.size());
    out.curve.stderrs.resize(levels.size());
    out.curve.inconclusive.assign(levels.size(), false);
    out.unstable.assign(levels.size(), false);
    for (std::size_t l = 0; l < levels.size(); ++l) {
        bool heavy = false;
        out.curve.values[l] = s.total[l].acc.mean();
        out.curve.stderrs[l] = robust_stderr(s.total[l], s.group_means[l], &heavy);
        out.curve.inconclusive[l] = s.total[l].positive < kMinHits;
        out.unstable[l] = heavy;
    }
    return out;
}

namespace {

struct AxisReduction {
    bool ok = false;
    std::vector<std::size_t> axes;  // coordinates with a positive weight
    std::vector<double> weight;     // largest direction entry per listed axis
};

// A family whose directions each touch a single coordinate is a union of
// coordinate half-spaces {x_j > u/w_j}; several directions on one axis
// collapse to the largest weight.
AxisReduction axis_structure(const HyperplaneFamily& fam) {
    std::vector<double> w(static_cast<std::size_t>(fam.dim), 0.0);
    for (const Vec& p : fam.directions) {
        int nz = -1;
        for (int j = 0; j < fam.dim; ++j) {
            if (p[static_cast<std::size_t>(j)] != 0.0) {
                if (nz >= 0) return {};
                nz = j;
            }
        }
        w[static_cast<std::size_t>(nz)] =
            std::max(w[static_cast<std::size_t>(nz)], p[static_cast<std::size_t>(nz)]);
    }
    AxisReduction r;
    r.ok = true;
    for (std::size_t j = 0; j < w.size(); ++j)
        if (w[j] > 0.0) {
            r.axes.push_back(j);
            r.weight.push_back(w[j]);
        }
    return r;
}

// Tail of p.X for independent coordinates, tabulated by repeated numeric
// convolution of the scaled marginal tables.  t_max controls the truncation
// bias: mass beyond the grid is dropped by eval(), so the grid extends far
// past any level of interest and the caller adds a power-fit remainder.
SurvivalTable direction_sum_table(const std::vector<LawPtr>& laws, const Vec& p, double t_max,
                                  std::size_t points) {
    std::vector<LawPtr> parts;
    for (std::size_t j = 0; j < p.size(); ++j)
        if (p[j] > 0.0) parts.push_back(scaled_law(laws[j], p[j]));
    double t0 = std::numeric_limits<double>::infinity();
    for (const auto& part : parts) t0 = std::min(t0, part->quantile(0.25));
    t0 = std::max(t0 * 1e-3, t_max * 1e-12);
    auto nodes = SurvivalTable::geometric_nodes(t0, t_max, points);
    SurvivalTable acc(nodes, [&](double x) { return parts[0]->survival(x); });
    for (std::size_t k = 1; k < parts.size(); ++k)
        acc = acc.convolve(SurvivalTable(nodes, [&](double x) { return parts[k]->survival(x); }));
    return acc;
}

// Power-fit remainder of integral_{v*}^inf S(u + v*pc) dv when the table was
// cut at x_max: fits S ~ C x^-beta through the last two positive nodes.
// Returns 0 when the tail already underflowed; flags failure when the decay
// is too slow to certify a finite remainder.
double table_tail_remainder(const SurvivalTable& tab, double pc, bool* ok) {
    *ok = true;
    const auto& xs = tab.nodes();
    const auto& ys = tab.values();
    const double s2 = ys.back();
    if (!(s2 > 0.0)) return 0.0;
    std::size_t i = xs.size() - 1;
    while (i > 0 && !(ys[i - 1] > s2)) --i;
    if (i == 0 || !(xs[i - 1] > 0.0)) {
        *ok = false;
        return 0.0;
    }
    const double beta = std::log(ys[i - 1] / s2) / std::log(xs.back() / xs[i - 1]);
    if (!(beta > 1.001)) {
        *ok = false;
        return 0.0;
    }
    return s2 * xs.back() / ((beta - 1.0) * pc);
}

}  // namespace

TailCurve h_curve_quadrature(const ClaimModel& model, const HyperplaneFamily& family,
                             const Vec& c, const std::vector<double>& levels, double rel_tol) {
    check_family(model, family);
    check_drift(c, model.dim());
    check_levels(levels);
    check_finite_mean(model);
    auto laws = analytic_marginals(model, "h_curve_quadrature");

    TailCurve out;
    out.levels = levels;
    out.method = "quadrature";
    out.values.resize(levels.size());
    out.stderrs.assign(levels.size(), 0.0);
    out.inconclusive.assign(levels.size(), false);

    const AxisReduction ax = axis_structure(family);
    if (ax.ok) {
        require(ax.axes.size() <= 16, "h_curve_quadrature: too many axes for inclusion-exclusion");
        const std::uint32_t nmask = (1u << ax.axes.size()) - 1u;
        for (std::size_t l = 0; l < levels.size(); ++l) {
            const double u = levels[l];
            auto f = [&](double v) {
                double total = 0.0;
                for (std::uint32_t mask = 1; mask <= nmask; ++mask) {
                    double prod = 1.0;
                    for (std::size_t j = 0; j < ax.axes.size(); ++j)
                        if (mask & (1u << j))
                            prod *= laws[ax.axes[j]]->survival(u / ax.weight[j] +
                                                               v * c[ax.axes[j]]);
                    total += (std::popcount(mask) % 2 == 1) ? prod : -prod;
                }
                return total;
            };
            double scale = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < ax.axes.size(); ++j)
                scale = std::min(scale, (u / ax.weight[j] +
                                         std::max(laws[ax.axes[j]]->quantile(0.5), 1e-9)) /
                                            c[ax.axes[j]]);
            QuadResult q = integrate_decreasing_upper(f, 0.0, scale, rel_tol);
            out.values[l] = q.value;
            out.inconclusive[l] = !q.converged;
        }
        return out;
    }

    if (family.directions.size() == 1) {
        const Vec& p = family.directions[0];
        const double pc = dot(p, c);
        // Grid depth trades truncation bias (algebraic tails) against node
        // resolution; 4e3 past the top level keeps the dropped mass below
        // ~1e-3 even for a tail exponent of 2, and the power-fit remainder
        // recovers most of that.
        const double t_max = 4e3 * std::max(levels.back(), 1.0);
        SurvivalTable tab = direction_sum_table(laws, p, t_max, 1025);
        double q50 = 0.0;
        for (std::size_t j = 0; j < p.size(); ++j)
            if (p[j] > 0.0) q50 += p[j] * laws[j]->quantile(0.5);
        bool tail_ok = true;
        const double remainder0 = table_tail_remainder(tab, pc, &tail_ok);
        for (std::size_t l = 0; l < levels.size(); ++l) {
            const double u = levels[l];
            auto f = [&](double v) { return tab.eval(u + v * pc); };
            const double scale = std::max((u + q50) / pc, 1e-9);
            QuadResult q = integrate_decreasing_upper(f, 0.0, scale, rel_tol);
            out.values[l] = q.value + remainder0;
            out.inconclusive[l] = !q.converged || !tail_ok;
        }
        return out;
    }

    throw std::invalid_argument(
        "h_curve_quadrature: family must be axis-aligned or a single direction; use h_curve_mc");
}

TailCurve integrated_scalar_survival(const ClaimModel& model, const HyperplaneFamily& family,
                                     const Vec& c, const std::vector<double>& levels,
                                     double rel_tol) {
    TailCurve h = h_curve_quadrature(model, family, c, levels, rel_tol);
    const Estimate theta = theta_quadrature(model, c, std::min(rel_tol, 1e-9));
    require(theta.value > 0.0, "integrated_scalar_survival: degenerate normalizer");
    for (double& v : h.values) v /= theta.value;
    return h;
}

SurvivalTable integrated_scalar_table(const ClaimModel& model, const HyperplaneFamily& family,
                                      const Vec& c, double u_max, std::size_t points,
                                      double rel_tol) {
    require(std::isfinite(u_max) && u_max > 0.0, "integrated_scalar_table: u_max must be > 0");
    auto nodes = SurvivalTable::geometric_nodes(u_max * 1e-4, u_max, points);
    TailCurve h = h_curve_quadrature(model, family, c, nodes, rel_tol);
    require(h.values[0] > 0.0, "integrated_scalar_table: H(0) vanishes");
    std::vector<double> vals(h.values.size());
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = h.values[i] / h.values[0];
    return SurvivalTable(std::move(nodes), std::move(vals));
}

namespace {

// Exact integral over v >= 0 of  [min_k (1 + v a_k) / b_k]^(-alpha)  across
// the directions with b_k > 0.  The thresholds are increasing linear
// functions of v, so their lower envelope is piecewise linear with switches
// at pairwise crossings, and each piece has an elementary antiderivative.
double envelope_power_integral(const std::vector<double>& a, const std::vector<double>& b,
                               double alpha) {
    std::vector<double> la, lb;
    for (std::size_t k = 0; k < a.size(); ++k)
        if (b[k] > 0.0) {
            la.push_back(a[k]);
            lb.push_back(b[k]);
        }
    if (la.empty()) return 0.0;
    std::vector<double> brk{0.0};
    for (std::size_t i = 0; i < la.size(); ++i)
        for (std::size_t j = i + 1; j < la.size(); ++j) {
            const double den = la[i] * lb[j] - la[j] * lb[i];
            if (den == 0.0) continue;
            const double v = (lb[i] - lb[j]) / den;
            if (std::isfinite(v) && v > 0.0) brk.push_back(v);
        }
    std::sort(brk.begin(), brk.end());
    brk.erase(std::unique(brk.begin(), brk.end()), brk.end());
    double total = 0.0;
    for (std::size_t s = 0; s < brk.size(); ++s) {
        const double left = brk[s];
        const bool last = s + 1 == brk.size();
        const double right = last ? 0.0 : brk[s + 1];
        const double probe = last ? 2.0 * left + 1.0 : 0.5 * (left + right);
        std::size_t kb = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < la.size(); ++k) {
            const double val = (1.0 + probe * la[k]) / lb[k];
            if (val < best) {
                best = val;
                kb = k;
            }
        }
        const double aa = la[kb];
        const double bb = lb[kb];
        const double lo_pow = std::pow(1.0 + aa * left, 1.0 - alpha);
        const double hi_pow = last ? 0.0 : std::pow(1.0 + aa * right, 1.0 - alpha);
        total += std::pow(bb, alpha) * (lo_pow - hi_pow) / (aa * (alpha - 1.0));
    }
    return total;
}

void check_mrv(const MrvDescriptor& mrv, const HyperplaneFamily& family, const Vec& c) {
    validate_or_throw(family);
    check_drift(c, family.dim);
    require(std::isfinite(mrv.alpha), "mrv constant: tail exponent must be finite");
    if (!(mrv.alpha > 1.0))
        throw std::invalid_argument(
            "mrv constant: tail exponent must exceed 1 (the drift integral diverges)");
    mrv.spectral.validate_or_throw();
    require(mrv.spectral.dim == family.dim, "mrv constant: spectral dimension mismatch");
}

std::vector<double> direction_drifts(const HyperplaneFamily& family, const Vec& c) {
    std::vector<double> a(family.directions.size());
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = dot(family.directions[k], c);
    return a;
}

struct SpectralStat {
    const AngularMeasure* spectral = nullptr;
    const HyperplaneFamily* fam = nullptr;
    const std::vector<double>* a = nullptr;
    double alpha = 0.0;
    std::vector<double> b;
    void operator()(RngStream& rng, std::vector<double>& out) {
        const Vec theta = spectral->sample(rng);
        for (std::size_t k = 0; k < fam->directions.size(); ++k)
            b[k] = dot(fam->directions[k], theta);
        out[0] = envelope_power_integral(*a, b, alpha);
    }
};

}  // namespace

Estimate mrv_ruin_constant(const MrvDescriptor& mrv, const HyperplaneFamily& family,
                           const Vec& c) {
    check_mrv(mrv, family, c);
    require(mrv.spectral.kind == AngularMeasure::Kind::kAtoms,
            "mrv constant: exact path needs an atomic spectral measure; "
            "use mrv_ruin_constant_mc for densities");
    const std::vector<double> a = direction_drifts(family, c);
    std::vector<double> b(family.directions.size());
    double total = 0.0;
    for (const auto& [theta, w] : mrv.spectral.atoms) {
        for (std::size_t k = 0; k < b.size(); ++k) b[k] = dot(family.directions[k], theta);
        total += w * envelope_power_integral(a, b, mrv.alpha);
    }
    return {total, 0.0, "exact"};
}

Estimate mrv_ruin_constant_mc(const MrvDescriptor& mrv, const HyperplaneFamily& family,
                              const Vec& c, std::uint64_t n, const RngStream& stream) {
    check_mrv(mrv, family, c);
    require(n > 0, "mrv_ruin_constant_mc: need at least one sample");
    const std::vector<double> a = direction_drifts(family, c);
    SpectralStat proto;
    proto.spectral = &mrv.spectral;
    proto.fam = &family;
    proto.a = &a;
    proto.alpha = mrv.alpha;
    proto.b.resize(family.directions.size());
    auto s = collect_scores(n, 1, stream, proto);
    const double mass = mrv.spectral.total_mass();
    Estimate e;
    e.value = s.total[0].acc.mean() * mass;
    e.stderr_v = robust_stderr(s.total[0], s.group_means[0], nullptr) * mass;
    e.method = "mc";
    return e;
}

}  // namespace ruinlab
