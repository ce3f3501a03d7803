#include "ruinlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>

#include "ruinlab/format.hpp"
#include "ruinlab/parallel.hpp"
#include "ruinlab/stats.hpp"

namespace ruinlab {

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::kConsistent: return "consistent";
        case Verdict::kInconsistent: return "inconsistent";
        default: return "inconclusive";
    }
}

Verdict read_ratio_points(const std::vector<RatioPoint>& points, double target) {
    std::vector<const RatioPoint*> usable;
    for (const auto& p : points)
        if (!p.inconclusive) usable.push_back(&p);
    if (usable.size() < 3) return Verdict::kInconclusive;
    int covered = 0;
    int excluded = 0;
    for (std::size_t i = usable.size() - 3; i < usable.size(); ++i) {
        double lo = usable[i]->lo;
        double hi = usable[i]->hi;
        if (lo == hi) {
            const double band = kExactRatioBand * std::max(std::fabs(target), 1e-12);
            lo -= band;
            hi += band;
        }
        if (lo <= target && target <= hi)
            ++covered;
        else
            ++excluded;
    }
    if (covered == 3) return Verdict::kConsistent;
    if (excluded == 3) return Verdict::kInconsistent;
    return Verdict::kInconclusive;
}

namespace {

constexpr std::uint64_t kMinHits = 20;

void check_levels(const std::vector<double>& levels) {
    require(!levels.empty(), "level grid is empty");
    double prev = 0.0;
    for (double u : levels) {
        require(std::isfinite(u) && u > prev, "levels must be positive and strictly increasing");
        prev = u;
    }
}

void check_family(const ClaimModel& model, const HyperplaneFamily& fam) {
    validate_or_throw(fam);
    require(fam.dim == model.dim(), "family dimension does not match claim model");
}

// Counts of {stat > level} per level from n samples.  The statistic object
// is copied into every block so its scratch buffers are never shared; all
// randomness comes from the per-block child stream.
template <class Stat>
std::vector<std::uint64_t> count_exceedances(std::uint64_t n, const std::vector<double>& levels,
                                             const RngStream& stream, const Stat& proto) {
    const std::size_t nblocks = block_count(n);
    auto hists = run_blocks<std::vector<std::uint64_t>>(nblocks, [&](std::size_t b) {
        std::size_t lo, hi;
        block_bounds(static_cast<std::size_t>(n), b, &lo, &hi);
        RngStream rng = stream.child(b);
        Stat stat = proto;
        std::vector<std::uint64_t> h(levels.size() + 1, 0);
        for (std::size_t i = lo; i < hi; ++i) {
            const double y = stat(rng);
            const std::size_t idx = static_cast<std::size_t>(
                std::lower_bound(levels.begin(), levels.end(), y) - levels.begin());
            ++h[idx];  // y strictly exceeds exactly the levels with index < idx
        }
        return h;
    });
    std::vector<std::uint64_t> hist(levels.size() + 1, 0);
    for (const auto& h : hists)
        for (std::size_t i = 0; i < hist.size(); ++i) hist[i] += h[i];
    std::vector<std::uint64_t> hits(levels.size(), 0);
    std::uint64_t acc = 0;
    for (std::size_t i = levels.size(); i-- > 0;) {
        acc += hist[i + 1];
        hits[i] = acc;
    }
    return hits;
}

struct ScalarizedStat {
    const ClaimModel* model;
    const HyperplaneFamily* fam;
    Vec buf;
    double operator()(RngStream& rng) {
        model->sample_into(rng, buf);
        return scale_index(*fam, buf);
    }
};

struct VectorSumStat {
    const ClaimModel* model;
    const HyperplaneFamily* fam;
    int m;
    Vec buf, acc;
    double operator()(RngStream& rng) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (int j = 0; j < m; ++j) {
            model->sample_into(rng, buf);
            for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += buf[i];
        }
        return scale_index(*fam, acc);
    }
};

struct ScalarSumStat {
    const ClaimModel* model;
    const HyperplaneFamily* fam;
    int m;
    Vec buf;
    double operator()(RngStream& rng) {
        double s = 0.0;
        for (int j = 0; j < m; ++j) {
            model->sample_into(rng, buf);
            s += scale_index(*fam, buf);
        }
        return s;
    }
};

struct GeometricSumStat {
    const ClaimModel* model;
    const HyperplaneFamily* fam;
    double p;
    Vec buf, acc;
    double operator()(RngStream& rng) {
        std::uint64_t terms = 1;
        if (p < 1.0)
            terms += static_cast<std::uint64_t>(std::log(rng.uniform()) / std::log(1.0 - p));
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::uint64_t j = 0; j < terms; ++j) {
            model->sample_into(rng, buf);
            for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += buf[i];
        }
        return scale_index(*fam, acc);
    }
};

struct ShiftedStat {
    const ClaimModel* model;
    const HyperplaneFamily* fam;
    Vec shift;
    Vec buf;
    double operator()(RngStream& rng) {
        model->sample_into(rng, buf);
        for (std::size_t i = 0; i < buf.size(); ++i) buf[i] -= shift[i];
        return scale_index(*fam, buf);
    }
};

TailCurve curve_from_hits(const std::vector<double>& levels,
                          const std::vector<std::uint64_t>& hits, std::uint64_t n) {
    TailCurve c;
    c.levels = levels;
    c.method = "mc";
    c.n_samples = n;
    c.values.reserve(levels.size());
    c.stderrs.reserve(levels.size());
    c.inconclusive.reserve(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) {
        c.values.push_back(static_cast<double>(hits[i]) / static_cast<double>(n));
        c.stderrs.push_back(binomial_stderr(hits[i], n));
        c.inconclusive.push_back(hits[i] < kMinHits);
    }
    return c;
}

std::vector<RatioPoint> ratio_points_from_curves(const TailCurve& num, const TailCurve& den) {
    std::vector<RatioPoint> pts(num.levels.size());
    for (std::size_t i = 0; i < num.levels.size(); ++i) {
        RatioPoint& p = pts[i];
        p.level = num.levels[i];
        p.inconclusive = num.inconclusive[i] || den.inconclusive[i] || den.values[i] <= 0.0;
        if (den.values[i] > 0.0) {
            p.ratio = num.values[i] / den.values[i];
            const Interval iv =
                ratio_interval(num.values[i], num.stderrs[i], den.values[i], den.stderrs[i]);
            p.lo = iv.lo;
            p.hi = iv.hi;
        }
    }
    return pts;
}

std::vector<RatioPoint> exact_unit_points(const std::vector<double>& levels) {
    std::vector<RatioPoint> pts(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) pts[i] = {levels[i], 1.0, 1.0, 1.0, false};
    return pts;
}

struct CurvePoint {
    double value = 0.0;
    double se = 0.0;
    bool ok = false;
    bool inconclusive = true;
};

// Linear (log-linear where positive) interpolation of an estimated curve.
CurvePoint curve_interp(const TailCurve& c, double x) {
    if (c.levels.empty() || x < c.levels.front() || x > c.levels.back()) return {};
    const auto it = std::lower_bound(c.levels.begin(), c.levels.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - c.levels.begin());
    if (c.levels[j] == x) return {c.values[j], c.stderrs[j], true, c.inconclusive[j]};
    const double x0 = c.levels[j - 1], x1 = c.levels[j];
    const double v0 = c.values[j - 1], v1 = c.values[j];
    const double w = (x - x0) / (x1 - x0);
    double v;
    if (v0 > 0.0 && v1 > 0.0)
        v = std::exp((1.0 - w) * std::log(v0) + w * std::log(v1));
    else
        v = (1.0 - w) * v0 + w * v1;
    const double se = (1.0 - w) * c.stderrs[j - 1] + w * c.stderrs[j];
    return {v, se, true, c.inconclusive[j - 1] || c.inconclusive[j]};
}

RatioVerdict verdict_from_points(std::vector<RatioPoint> pts, double target, std::string note) {
    RatioVerdict rv;
    rv.target = target;
    rv.points = std::move(pts);
    rv.verdict = read_ratio_points(rv.points, target);
    rv.note = std::move(note);
    return rv;
}

}  // namespace

TailCurve empirical_scalarized_survival(const ClaimModel& model, const HyperplaneFamily& family,
                                        const std::vector<double>& levels, std::uint64_t n,
                                        const RngStream& stream) {
    check_levels(levels);
    check_family(model, family);
    require(n > 0, "need a positive sample size");
    ScalarizedStat stat{&model, &family, Vec(static_cast<std::size_t>(model.dim()))};
    return curve_from_hits(levels, count_exceedances(n, levels, stream.child(1), stat), n);
}

ConvolutionRatioResult convolution_ratio_mc(const ClaimModel& model,
                                            const HyperplaneFamily& family, int m,
                                            const std::vector<double>& levels, std::uint64_t n,
                                            const RngStream& stream) {
    check_levels(levels);
    check_family(model, family);
    require(m >= 1, "need at least one summand");
    require(n > 0, "need a positive sample size");
    const std::size_t d = static_cast<std::size_t>(model.dim());

    ConvolutionRatioResult out;
    ScalarizedStat single{&model, &family, Vec(d)};
    const auto den_hits = count_exceedances(n, levels, stream.child(1), single);
    out.denominator = curve_from_hits(levels, den_hits, n);

    if (m == 1) {
        // The m = 1 statistic is the single tail itself; reuse it so the
        // ratio is exactly one instead of two independent reads of the same
        // number.
        out.numerator = out.denominator;
        out.upper_bound = out.denominator;
    } else {
        VectorSumStat vsum{&model, &family, m, Vec(d), Vec(d)};
        out.numerator = curve_from_hits(levels, count_exceedances(n, levels, stream.child(2), vsum), n);
        ScalarSumStat ssum{&model, &family, m, Vec(d)};
        out.upper_bound =
            curve_from_hits(levels, count_exceedances(n, levels, stream.child(3), ssum), n);
    }

    out.lower_bound = out.denominator;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const double p = out.denominator.values[i];
        out.lower_bound.values[i] = 1.0 - std::pow(1.0 - p, m);
        out.lower_bound.stderrs[i] =
            m * std::pow(1.0 - p, m - 1) * out.denominator.stderrs[i];
    }

    std::ostringstream note;
    note << "m-fold tail against single tail; independent streams; limit " << m
         << " under subexponential scalarization.";
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (out.numerator.inconclusive[i] || out.denominator.inconclusive[i]) continue;
        const double est = out.numerator.values[i];
        const double lo3 = out.lower_bound.values[i] -
                           3.0 * std::hypot(out.numerator.stderrs[i], out.lower_bound.stderrs[i]);
        const double hi3 = out.upper_bound.values[i] +
                           3.0 * std::hypot(out.numerator.stderrs[i], out.upper_bound.stderrs[i]);
        if (est < lo3 || est > hi3) {
            out.sandwich_ok = false;
            note << " sandwich violated at level " << format_compact(levels[i]) << ".";
        }
    }
    out.verdict =
        verdict_from_points(ratio_points_from_curves(out.numerator, out.denominator),
                            static_cast<double>(m), note.str());
    return out;
}

RatioVerdict convolution_ratio_numeric(const SurvivalTable& table,
                                       const std::vector<double>& levels) {
    check_levels(levels);
    std::vector<RatioPoint> pts(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) {
        RatioPoint& p = pts[i];
        p.level = levels[i];
        const double base = table.eval(levels[i]);
        if (base <= 0.0) {
            p.inconclusive = true;  // tail exhausted: ratio undefined here
            continue;
        }
        double err = 0.0;
        const double conv = table.convolve_at(table, levels[i], &err);
        const double band = kExactRatioBand * 2.0;  // deterministic-method band around the target
        p.ratio = conv / base;
        p.lo = std::max(0.0, std::max(0.0, conv - err) / base - band);
        p.hi = (conv + err) / base + band;
        p.inconclusive = err >= conv;
    }
    return verdict_from_points(std::move(pts), 2.0,
                               "two-fold Stieltjes midpoint convolution; interval width is the "
                               "grid-refinement (Richardson) difference plus the 1% "
                               "deterministic-method band.");
}

RatioVerdict long_tail_test(const Law1D& law, double shift, const std::vector<double>& levels) {
    check_levels(levels);
    require(shift >= 0.0 && std::isfinite(shift), "shift must be a finite nonnegative real");
    std::vector<RatioPoint> pts(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) {
        RatioPoint& p = pts[i];
        p.level = levels[i];
        const double base = law.survival(levels[i]);
        if (base <= 0.0) {
            p.inconclusive = true;
            continue;
        }
        p.ratio = p.lo = p.hi = law.survival(levels[i] + shift) / base;
    }
    return verdict_from_points(std::move(pts), 1.0,
                               "exact shifted-tail ratio of " + law.name() + " at shift " +
                                   format_compact(shift) + ".");
}

RatioVerdict long_tail_test(const TailCurve& curve, double shift) {
    require(shift >= 0.0 && std::isfinite(shift), "shift must be a finite nonnegative real");
    std::vector<RatioPoint> pts;
    for (std::size_t i = 0; i < curve.levels.size(); ++i) {
        const CurvePoint shifted = curve_interp(curve, curve.levels[i] + shift);
        if (!shifted.ok) break;  // past the top of the curve
        RatioPoint p;
        p.level = curve.levels[i];
        const double base = curve.values[i];
        p.inconclusive = curve.inconclusive[i] || shifted.inconclusive || base <= 0.0;
        if (base > 0.0 && shifted.value > 0.0) {
            p.ratio = shifted.value / base;
            const Interval iv = ratio_interval(shifted.value, shifted.se, base, curve.stderrs[i]);
            p.lo = iv.lo;
            p.hi = iv.hi;
        }
        pts.push_back(p);
    }
    return verdict_from_points(std::move(pts), 1.0,
                               "shifted-tail ratio interpolated from an estimated curve; "
                               "points share samples, widths treat them as independent.");
}

namespace {

DominatedVariationResult dominated_from_points(std::vector<RatioPoint> pts) {
    DominatedVariationResult out;
    out.inf_ratio = 1e308;
    std::vector<const RatioPoint*> usable;
    for (const auto& p : pts)
        if (!p.inconclusive) usable.push_back(&p);
    for (const auto* p : usable) out.inf_ratio = std::min(out.inf_ratio, p->ratio);
    if (usable.empty()) out.inf_ratio = 0.0;

    Verdict v = Verdict::kInconclusive;
    if (usable.size() >= 3) {
        const double r1 = usable[usable.size() - 3]->ratio;
        const double r2 = usable[usable.size() - 2]->ratio;
        const double r3 = usable[usable.size() - 1]->ratio;
        const double lo = std::min({r1, r2, r3});
        const double hi = std::max({r1, r2, r3});
        if (lo > 0.0 && lo >= 0.9 * hi)
            v = Verdict::kConsistent;  // flat tail ratio over the final decade
        else if (lo > 0.0 && r3 >= r1)
            v = Verdict::kConsistent;  // rising: certainly not collapsing
        else if (r3 < r2 && r2 < r1 && r3 <= 0.7 * r1)
            v = Verdict::kInconsistent;  // monotone collapse of the halving ratio
    }
    RatioVerdict rv;
    rv.target = 0.0;
    rv.points = std::move(pts);
    rv.verdict = v;
    rv.note =
        "halving ratio S(2x)/S(x); consistent = bounded away from 0 over the tested range "
        "(flat within 10% or rising), inconsistent = monotone collapse by more than x0.7.";
    out.verdict = std::move(rv);
    return out;
}

}  // namespace

DominatedVariationResult dominated_variation_test(const Law1D& law,
                                                  const std::vector<double>& levels) {
    check_levels(levels);
    std::vector<RatioPoint> pts(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) {
        RatioPoint& p = pts[i];
        p.level = levels[i];
        const double base = law.survival(levels[i]);
        if (base <= 0.0) {
            p.inconclusive = true;
            continue;
        }
        p.ratio = p.lo = p.hi = law.survival(2.0 * levels[i]) / base;
    }
    return dominated_from_points(std::move(pts));
}

DominatedVariationResult dominated_variation_test(const TailCurve& curve) {
    std::vector<RatioPoint> pts;
    for (std::size_t i = 0; i < curve.levels.size(); ++i) {
        const CurvePoint doubled = curve_interp(curve, 2.0 * curve.levels[i]);
        if (!doubled.ok) break;
        RatioPoint p;
        p.level = curve.levels[i];
        const double base = curve.values[i];
        p.inconclusive = curve.inconclusive[i] || doubled.inconclusive || base <= 0.0;
        if (base > 0.0 && doubled.value > 0.0) {
            p.ratio = doubled.value / base;
            const Interval iv = ratio_interval(doubled.value, doubled.se, base, curve.stderrs[i]);
            p.lo = iv.lo;
            p.hi = iv.hi;
        }
        pts.push_back(p);
    }
    return dominated_from_points(std::move(pts));
}

RatioVerdict random_sum_ratio(const ClaimModel& model, const HyperplaneFamily& family,
                              double p_geom, const std::vector<double>& levels, std::uint64_t n,
                              const RngStream& stream) {
    check_levels(levels);
    check_family(model, family);
    require(p_geom > 0.0 && p_geom <= 1.0, "geometric parameter must lie in (0, 1]");
    require(n > 0, "need a positive sample size");
    if (p_geom == 1.0)
        return verdict_from_points(exact_unit_points(levels), 1.0,
                                   "one-term random sum: numerator is the denominator.");
    const std::size_t d = static_cast<std::size_t>(model.dim());
    ScalarizedStat single{&model, &family, Vec(d)};
    const auto den = curve_from_hits(levels, count_exceedances(n, levels, stream.child(1), single), n);
    GeometricSumStat gsum{&model, &family, p_geom, Vec(d), Vec(d)};
    const auto num = curve_from_hits(levels, count_exceedances(n, levels, stream.child(2), gsum), n);
    return verdict_from_points(ratio_points_from_curves(num, den), 1.0 / p_geom,
                               "geometric random sum tail over single tail; limit is the mean "
                               "term count under subexponential scalarization.");
}

RatioVerdict translation_test(const ClaimModel& model, const HyperplaneFamily& family,
                              const Vec& shift, const std::vector<double>& levels, std::uint64_t n,
                              const RngStream& stream) {
    check_levels(levels);
    check_family(model, family);
    require(static_cast<int>(shift.size()) == model.dim(), "shift dimension mismatch");
    require(all_finite(shift), "shift must be finite");
    require(n > 0, "need a positive sample size");
    bool zero = true;
    for (double a : shift) zero = zero && a == 0.0;
    if (zero)
        return verdict_from_points(exact_unit_points(levels), 1.0,
                                   "zero shift: numerator is the denominator.");
    const std::size_t d = static_cast<std::size_t>(model.dim());
    ScalarizedStat single{&model, &family, Vec(d)};
    const auto den = curve_from_hits(levels, count_exceedances(n, levels, stream.child(1), single), n);
    ShiftedStat shifted{&model, &family, shift, Vec(d)};
    const auto num = curve_from_hits(levels, count_exceedances(n, levels, stream.child(2), shifted), n);
    return verdict_from_points(ratio_points_from_curves(num, den), 1.0,
                               "shifted-set tail over plain tail; limit 1 when the scalarized "
                               "law is long-tailed.");
}

KestenReport kesten_check(const ClaimModel& model, const HyperplaneFamily& family, double epsilon,
                          int m_max, const std::vector<double>& levels, std::uint64_t n,
                          const RngStream& stream) {
    check_levels(levels);
    check_family(model, family);
    require(epsilon > 0.0 && std::isfinite(epsilon), "epsilon must be positive");
    require(m_max >= 1, "need at least one fold");
    require(n > 0, "need a positive sample size");
    const std::size_t d = static_cast<std::size_t>(model.dim());

    KestenReport rep;
    rep.epsilon = epsilon;
    rep.m_max = m_max;

    ScalarizedStat single{&model, &family, Vec(d)};
    const auto den = curve_from_hits(levels, count_exceedances(n, levels, stream.child(1), single), n);

    for (int m = 1; m <= m_max; ++m) {
        TailCurve num;
        if (m == 1) {
            num = den;
        } else {
            VectorSumStat vsum{&model, &family, m, Vec(d), Vec(d)};
            num = curve_from_hits(
                levels, count_exceedances(n, levels, stream.child(static_cast<std::uint64_t>(m)), vsum),
                n);
        }
        TailCurve ratios;
        ratios.levels = levels;
        ratios.method = "mc";
        ratios.n_samples = n;
        const double growth = std::pow(1.0 + epsilon, m);
        for (std::size_t i = 0; i < levels.size(); ++i) {
            const bool bad = num.inconclusive[i] || den.inconclusive[i] || den.values[i] <= 0.0;
            const double r = bad ? 0.0 : num.values[i] / den.values[i];
            double se = 0.0;
            if (!bad && num.values[i] > 0.0)
                se = r * std::hypot(num.stderrs[i] / num.values[i], den.stderrs[i] / den.values[i]);
            ratios.values.push_back(r);
            ratios.stderrs.push_back(se);
            ratios.inconclusive.push_back(bad);
            if (!bad && r / growth > rep.k_fit) {
                rep.k_fit = r / growth;
                rep.argmax_m = m;
                rep.argmax_level = levels[i];
            }
        }
        rep.ratio_curves.push_back(std::move(ratios));
    }
    std::ostringstream note;
    note << "smallest K with m-fold ratio <= K(1+eps)^m over tested (m,u); point estimates, "
         << "binding at m=" << rep.argmax_m << ", u=" << format_compact(rep.argmax_level) << ".";
    rep.note = note.str();
    return rep;
}

std::vector<double> suggest_levels(const ClaimModel& model, const HyperplaneFamily& family,
                                   std::uint64_t n_main, std::size_t n_levels,
                                   const RngStream& stream, std::uint64_t pilot_n,
                                   std::uint64_t min_top_hits) {
    check_family(model, family);
    require(n_main > 0 && pilot_n >= 1000, "suggest_levels: sample sizes too small");
    require(n_levels >= 3, "suggest_levels: need at least three levels");
    const double p_top =
        static_cast<double>(std::max<std::uint64_t>(min_top_hits, kMinHits)) /
        static_cast<double>(n_main);
    require(p_top < 0.25, "suggest_levels: main run too small for a tail grid");
    const double p_bot = std::min(0.25, std::max(0.05, 8.0 * p_top));

    std::vector<double> ys(pilot_n);
    RngStream rng = stream.child(0xa11);
    Vec buf(static_cast<std::size_t>(model.dim()));
    for (auto& y : ys) {
        model.sample_into(rng, buf);
        y = scale_index(family, buf);
    }
    std::sort(ys.begin(), ys.end());
    const auto quantile = [&](double tail_prob) {
        const double pos = (1.0 - tail_prob) * static_cast<double>(pilot_n - 1);
        return ys[static_cast<std::size_t>(pos)];
    };
    const double top = quantile(p_top);
    const double bot = quantile(p_bot);
    require(bot > 0.0 && top > bot * (1.0 + 1e-9),
            "suggest_levels: scalarized tail too degenerate for an automatic grid");
    std::vector<double> levels(n_levels);
    const double lr = std::log(top / bot) / static_cast<double>(n_levels - 1);
    for (std::size_t i = 0; i < n_levels; ++i)
        levels[i] = bot * std::exp(lr * static_cast<double>(i));
    levels.back() = top;
    return levels;
}

}  // namespace ruinlab
