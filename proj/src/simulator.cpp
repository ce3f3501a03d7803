#include "ruinlab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ruinlab/angular.hpp"
#include "ruinlab/parallel.hpp"

namespace ruinlab {

InterarrivalSpec InterarrivalSpec::exponential(double rate) {
    InterarrivalSpec s;
    s.kind = Kind::kExponential;
    s.rate = rate;
    s.validate_or_throw();
    return s;
}

InterarrivalSpec InterarrivalSpec::deterministic(double delta) {
    InterarrivalSpec s;
    s.kind = Kind::kDeterministic;
    s.delta = delta;
    s.validate_or_throw();
    return s;
}

InterarrivalSpec InterarrivalSpec::gamma(double shape, double scale) {
    InterarrivalSpec s;
    s.kind = Kind::kGamma;
    s.shape = shape;
    s.scale = scale;
    s.validate_or_throw();
    return s;
}

double InterarrivalSpec::mean() const {
    switch (kind) {
        case Kind::kExponential: return 1.0 / rate;
        case Kind::kDeterministic: return delta;
        case Kind::kGamma: return shape * scale;
    }
    return 0.0;
}

double InterarrivalSpec::sample(RngStream& rng) const {
    switch (kind) {
        case Kind::kExponential: return rng.exponential(rate);
        case Kind::kDeterministic: return delta;
        case Kind::kGamma: return gamma_sample(rng, shape) * scale;
    }
    return 0.0;
}

std::optional<std::string> InterarrivalSpec::validate() const {
    switch (kind) {
        case Kind::kExponential:
            if (!(rate > 0.0) || !std::isfinite(rate))
                return "interarrival rate must be positive and finite";
            break;
        case Kind::kDeterministic:
            if (!(delta > 0.0) || !std::isfinite(delta))
                return "interarrival spacing must be positive and finite";
            break;
        case Kind::kGamma:
            if (!(shape > 0.0) || !std::isfinite(shape) || !(scale > 0.0) ||
                !std::isfinite(scale))
                return "gamma interarrival needs positive finite shape and scale";
            break;
    }
    return std::nullopt;
}

void InterarrivalSpec::validate_or_throw() const {
    if (auto msg = validate()) throw std::invalid_argument(*msg);
}

std::string InterarrivalSpec::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::kExponential: os << "exponential(rate=" << rate << ")"; break;
        case Kind::kDeterministic: os << "deterministic(delta=" << delta << ")"; break;
        case Kind::kGamma: os << "gamma(shape=" << shape << ", scale=" << scale << ")"; break;
    }
    return os.str();
}

std::optional<std::string> RiskConfig::validate() const {
    if (!claims) return "claim model missing";
    if (auto msg = interarrival.validate()) return *msg;
    if (auto msg = ruinlab::validate(family)) return *msg;
    const int d = claims->dim();
    if (family.dim != d) return "ruin family dimension does not match the claim model";
    if (static_cast<int>(premium.size()) != d)
        return "premium dimension does not match the claim model";
    if (!all_finite(premium) || !all_positive(premium))
        return "premium must be strictly positive and finite";
    if (!allocation.empty()) {
        if (static_cast<int>(allocation.size()) != d)
            return "allocation dimension does not match the claim model";
        if (!all_finite(allocation) || !all_positive(allocation))
            return "allocation must be strictly positive";
        const double s = std::accumulate(allocation.begin(), allocation.end(), 0.0);
        if (std::fabs(s - 1.0) > 1e-9) return "allocation must sum to 1";
    }
    if (!(give_up >= 0.0) || !std::isfinite(give_up)) return "give_up must be finite and >= 0";
    return std::nullopt;
}

void RiskConfig::validate_or_throw() const {
    if (auto msg = validate()) throw std::invalid_argument(*msg);
}

SafetyLoading RiskConfig::loading(const RngStream& stream, std::uint64_t n) const {
    validate_or_throw();
    const double ey = interarrival.mean();
    const int d = claims->dim();
    SafetyLoading out;
    out.c.resize(static_cast<std::size_t>(d));
    if (auto mean = claims->mean_vector()) {
        if (!all_finite(*mean))
            throw std::invalid_argument(
                "claim mean has an infinite component; the net drift cannot be positive");
        for (int j = 0; j < d; ++j)
            out.c[static_cast<std::size_t>(j)] =
                ey * premium[static_cast<std::size_t>(j)] - (*mean)[static_cast<std::size_t>(j)];
        out.provenance = "analytic";
    } else {
        require(n > 0, "loading: zero samples");
        const std::size_t nblocks = block_count(n);
        auto parts = run_blocks<std::vector<MomentAccumulator>>(nblocks, [&](std::size_t b) {
            std::size_t lo, hi;
            block_bounds(n, b, &lo, &hi);
            RngStream rng = stream.child(b);
            std::vector<MomentAccumulator> acc(static_cast<std::size_t>(d));
            Vec x(static_cast<std::size_t>(d));
            for (std::size_t i = lo; i < hi; ++i) {
                claims->sample_into(rng, x);
                for (int j = 0; j < d; ++j) acc[static_cast<std::size_t>(j)].add(x[static_cast<std::size_t>(j)]);
            }
            return acc;
        });
        std::vector<MomentAccumulator> acc(static_cast<std::size_t>(d));
        for (const auto& part : parts)
            for (int j = 0; j < d; ++j) acc[static_cast<std::size_t>(j)].merge(part[static_cast<std::size_t>(j)]);
        out.stderr_c.resize(static_cast<std::size_t>(d));
        for (int j = 0; j < d; ++j) {
            const auto& a = acc[static_cast<std::size_t>(j)];
            out.c[static_cast<std::size_t>(j)] = ey * premium[static_cast<std::size_t>(j)] - a.mean();
            out.stderr_c[static_cast<std::size_t>(j)] = a.stderr_mean();
        }
        out.provenance = "mc";
    }
    out.validate_or_throw();
    return out;
}

double RiskConfig::resolved_give_up(const SafetyLoading& loading) const {
    if (give_up > 0.0) return give_up;
    double worst = 0.0;
    for (const auto& p : family.directions) worst = std::max(worst, dot(p, loading.c));
    return 50.0 * worst;
}

std::uint64_t RiskConfig::resolved_max_steps(const SafetyLoading& loading) const {
    if (max_steps > 0) return max_steps;
    const double g = resolved_give_up(loading);
    double slowest = std::numeric_limits<double>::infinity();
    for (const auto& p : family.directions) slowest = std::min(slowest, dot(p, loading.c));
    // ~100x the expected give-up time: a pure safety valve, and paths it
    // stops are reported separately.
    const double cap = 100.0 * (g / slowest + 100.0);
    return static_cast<std::uint64_t>(std::min(cap, 1e15));
}

namespace {

void check_levels(const std::vector<double>& levels) {
    require(!levels.empty(), "empty level grid");
    double prev = 0.0;
    for (double u : levels) {
        require(std::isfinite(u) && u > prev, "levels must be positive and strictly increasing");
        prev = u;
    }
}

// Per-block path tally.  Paths are histogrammed by the lower_bound bin of
// their running scale maximum, so every level's (strict) exceedance count is
// a suffix sum and the whole grid shares one coupled ensemble.
struct GridTally {
    std::vector<std::uint64_t> hist;
    std::vector<std::uint64_t> capped;  // subset stopped by the step cap
    double steps = 0.0;

    GridTally() = default;
    explicit GridTally(std::size_t nbins) : hist(nbins, 0), capped(nbins, 0) {}
    void merge(const GridTally& o) {
        if (hist.empty()) {
            *this = o;
            return;
        }
        for (std::size_t i = 0; i < hist.size(); ++i) {
            hist[i] += o.hist[i];
            capped[i] += o.capped[i];
        }
        steps += o.steps;
    }
};

std::vector<RuinEstimate> grid_impl(const RiskConfig& config, const SafetyLoading& loading,
                                    const std::vector<double>& levels, std::uint64_t n_paths,
                                    const RngStream& paths) {
    const double g = config.resolved_give_up(loading);
    const std::uint64_t cap = config.resolved_max_steps(loading);
    const int d = config.claims->dim();
    const auto& dirs = config.family.directions;
    const auto& premium = config.premium;
    const double top = levels.back();
    const std::size_t nbins = levels.size() + 1;
    const std::size_t nblocks = block_count(n_paths);

    auto tallies = run_blocks<GridTally>(nblocks, [&](std::size_t b) {
        std::size_t lo, hi;
        block_bounds(n_paths, b, &lo, &hi);
        GridTally t(nbins);
        Vec s(static_cast<std::size_t>(d)), x(static_cast<std::size_t>(d));
        for (std::size_t i = lo; i < hi; ++i) {
            RngStream rng = paths.child(i);
            std::fill(s.begin(), s.end(), 0.0);
            double runmax = 0.0;
            std::uint64_t nsteps = 0;
            bool hit_cap = false;
            for (;;) {
                if (nsteps >= cap) {
                    hit_cap = true;
                    break;
                }
                ++nsteps;
                const double y = config.interarrival.sample(rng);
                config.claims->sample_into(rng, x);
                for (int j = 0; j < d; ++j) {
                    const auto jj = static_cast<std::size_t>(j);
                    s[jj] += x[jj] - y * premium[jj];
                }
                // Unfloored scale of the claim surplus: drives both the ruin
                // record (positive part) and the give-up test.
                double m = -std::numeric_limits<double>::infinity();
                for (const auto& p : dirs) {
                    double acc = 0.0;
                    for (int j = 0; j < d; ++j)
                        acc += p[static_cast<std::size_t>(j)] * s[static_cast<std::size_t>(j)];
                    if (acc > m) m = acc;
                }
                if (m > runmax) runmax = m;
                if (runmax > top) break;  // ruined at every level of the grid
                if (m <= -g) break;       // recovery from here is hopeless
            }
            const std::size_t bin = static_cast<std::size_t>(
                std::lower_bound(levels.begin(), levels.end(), runmax) - levels.begin());
            ++t.hist[bin];
            if (hit_cap) ++t.capped[bin];
            t.steps += static_cast<double>(nsteps);
        }
        return t;
    });

    GridTally total(nbins);
    for (const auto& t : tallies) total.merge(t);
    const std::uint64_t capped_total =
        std::accumulate(total.capped.begin(), total.capped.end(), std::uint64_t{0});

    std::vector<RuinEstimate> out(levels.size());
    std::uint64_t ruined = 0;
    std::uint64_t capped_ruined = 0;
    for (std::size_t i = levels.size(); i-- > 0;) {
        ruined += total.hist[i + 1];
        capped_ruined += total.capped[i + 1];
        RuinEstimate& r = out[i];
        r.u = levels[i];
        r.n_paths = n_paths;
        r.ruin_count = ruined;
        r.psi_hat = static_cast<double>(ruined) / static_cast<double>(n_paths);
        r.ci = wilson_interval(ruined, n_paths);
        r.truncated_paths = n_paths - ruined;
        r.capped_paths = capped_total - capped_ruined;
        r.mean_steps = total.steps / static_cast<double>(n_paths);
    }
    return out;
}

double ratio_se(const AsymptoteRow& r) {
    if (!(r.ratio > 0.0)) return 0.0;
    const double se_psi = binomial_stderr(r.ruin.ruin_count, r.ruin.n_paths);
    const double a = r.ruin.psi_hat > 0.0 ? se_psi / r.ruin.psi_hat : 0.0;
    const double b = r.h > 0.0 ? r.h_stderr / r.h : 0.0;
    return r.ratio * std::sqrt(a * a + b * b);
}

}  // namespace

std::vector<RuinEstimate> simulate_ruin_grid(const RiskConfig& config,
                                             const std::vector<double>& levels,
                                             std::uint64_t n_paths, const RngStream& stream) {
    config.validate_or_throw();
    check_levels(levels);
    require(n_paths > 0, "zero paths");
    const SafetyLoading l = config.loading(stream.child(2));
    return grid_impl(config, l, levels, n_paths, stream.child(1));
}

RuinEstimate simulate_ruin(const RiskConfig& config, double u, std::uint64_t n_paths,
                           const RngStream& stream) {
    return simulate_ruin_grid(config, {u}, n_paths, stream).front();
}

AsymptoteComparison ruin_vs_asymptote(const RiskConfig& config, const std::vector<double>& levels,
                                      std::uint64_t n_paths, const RngStream& stream,
                                      std::uint64_t h_samples) {
    config.validate_or_throw();
    check_levels(levels);
    require(n_paths > 0, "zero paths");

    AsymptoteComparison out;
    out.loading = config.loading(stream.child(2));
    out.give_up = config.resolved_give_up(out.loading);
    auto sims = grid_impl(config, out.loading, levels, n_paths, stream.child(1));

    TailCurve h;
    try {
        h = h_curve_quadrature(*config.claims, config.family, out.loading.c, levels);
        out.h_method = "quadrature";
    } catch (const std::invalid_argument&) {
        HCurve hc = h_curve_mc(*config.claims, config.family, out.loading.c, levels, h_samples,
                               stream.child(3));
        h = std::move(hc.curve);
        out.h_method = "mc";
        out.note = "no quadrature route for this model/family; H estimated by Monte Carlo";
    }

    out.rows.resize(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) {
        AsymptoteRow& row = out.rows[i];
        row.ruin = sims[i];
        row.h = h.values[i];
        row.h_stderr = h.stderrs[i];
        row.h_inconclusive = h.inconclusive[i];
        if (row.h > 0.0) {
            const double se_psi = binomial_stderr(row.ruin.ruin_count, n_paths);
            row.ratio = row.ruin.psi_hat / row.h;
            row.ratio_ci = ratio_interval(row.ruin.psi_hat, se_psi, row.h, row.h_stderr);
        }
        row.usable = row.ruin.ruin_count >= 20 && row.h > 0.0 && !row.h_inconclusive;
    }
    std::size_t unusable = 0;
    for (const auto& row : out.rows)
        if (!row.usable) ++unusable;
    if (unusable > 0) {
        if (!out.note.empty()) out.note += "; ";
        out.note += std::to_string(unusable) + " row(s) below the 20-event floor or without H";
    }

    for (std::size_t i = 1; i < out.rows.size(); ++i) {
        AsymptoteRow& cur = out.rows[i];
        const AsymptoteRow& prev = out.rows[i - 1];
        if (!cur.usable || !prev.usable) continue;
        const double d_cur = std::fabs(cur.ratio - 1.0);
        const double d_prev = std::fabs(prev.ratio - 1.0);
        cur.improving = d_cur <= d_prev + std::hypot(ratio_se(cur), ratio_se(prev));
    }
    int pairs = 0;
    int good = 0;
    const std::size_t nrows = out.rows.size();
    for (std::size_t i = nrows > 3 ? nrows - 3 : 1; i < nrows; ++i) {
        if (!(out.rows[i].usable && out.rows[i - 1].usable)) continue;
        ++pairs;
        if (out.rows[i].improving) ++good;
    }
    out.trend_toward_one = pairs >= 2 ? good >= 2 : (pairs == 1 && good == 1);
    return out;
}

}  // namespace ruinlab
