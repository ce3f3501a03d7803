#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ruinlab/asymptotics.hpp"
#include "ruinlab/claims.hpp"
#include "ruinlab/descriptors.hpp"
#include "ruinlab/parallel.hpp"
#include "ruinlab/report.hpp"
#include "ruinlab/ruinsets.hpp"
#include "ruinlab/simulator.hpp"

namespace {

using namespace ruinlab;

nlohmann::json load_json(const std::string& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

void print_plan(const Experiment& exp, const std::string& config_path, std::uint64_t hash,
                const std::string& out_dir) {
    std::printf("config: %s (hash %s)\n", config_path.c_str(), hex64(hash).c_str());
    std::printf("seed: %" PRIu64 "\n", exp.seed);
    std::printf("experiment: %s\n", exp.kind.c_str());
    std::vector<std::string> artifacts;
    if (exp.geometry) {
        const auto& s = *exp.geometry;
        std::printf("family: %zu direction(s) in dimension %d\n", s.family.directions.size(),
                    s.family.dim);
        std::printf("probe points: %zu, levels: %zu\n", s.points.size(), s.levels.size());
        artifacts = {"geometry.json"};
    } else if (exp.diagnose) {
        const auto& s = *exp.diagnose;
        std::printf("test: %s\n", s.test.c_str());
        std::printf("claims: %s\n", s.claims->name().c_str());
        std::printf("family: %zu direction(s), levels: %zu, n: %" PRIu64 "\n",
                    s.family.directions.size(), s.levels.size(), s.n);
        artifacts = {"diagnostics.csv", "verdict.json"};
    } else if (exp.hcurve) {
        const auto& s = *exp.hcurve;
        std::printf("claims: %s\n", s.claims->name().c_str());
        std::printf("drift: %s, method: %s, levels: %zu, n: %" PRIu64 "\n",
                    vec_to_string(s.drift).c_str(), s.method.c_str(), s.levels.size(), s.n);
        artifacts = {"hcurve.csv"};
        if (auto mrv = s.claims->mrv(); mrv && mrv->alpha > 1.0)
            artifacts.push_back("constants.json");
    } else {
        const RiskConfig& risk = exp.ruin ? exp.ruin->risk : exp.compare->risk;
        const auto levels = exp.ruin ? exp.ruin->levels.size() : exp.compare->levels.size();
        const auto n_paths = exp.ruin ? exp.ruin->n_paths : exp.compare->n_paths;
        std::printf("claims: %s\n", risk.claims->name().c_str());
        std::printf("interarrival: %s, premium: %s\n", risk.interarrival.describe().c_str(),
                    vec_to_string(risk.premium).c_str());
        std::printf("family: %zu direction(s), levels: %zu, n_paths: %" PRIu64 "\n",
                    risk.family.directions.size(), levels, n_paths);
        if (risk.give_up > 0.0)
            std::printf("give_up: %g\n", risk.give_up);
        else
            std::printf("give_up: default (50x the drift scale, resolved at run time)\n");
        artifacts = exp.ruin ? std::vector<std::string>{"ruin.csv"}
                             : std::vector<std::string>{"ruin.csv", "verdict.json", "ratio.svg"};
    }
    artifacts.push_back("meta.json");
    std::string joined;
    for (const auto& a : artifacts) {
        if (!joined.empty()) joined += ", ";
        joined += a;
    }
    std::printf("output dir: %s\n", out_dir.c_str());
    std::printf("planned artifacts: %s\n", joined.c_str());
    std::printf("dry run: no sampling performed\n");
}

int run_command(const std::string& config_path, std::string out_dir, int threads, bool dry) {
    Experiment exp = load_experiment(config_path);
    const std::string bytes = read_file(config_path);
    const std::uint64_t hash = fnv1a64(bytes);
    if (out_dir.empty()) out_dir = exp.output.empty() ? "out" : exp.output;
    if (threads > 0) set_max_threads(threads);
    if (dry) {
        print_plan(exp, config_path, hash, out_dir);
        return 0;
    }
    RunArtifacts arts = run_experiment(exp, out_dir, hash);
    for (const auto& name : arts.files)
        std::printf("wrote %s\n", (std::filesystem::path(out_dir) / name).string().c_str());
    std::printf("%s\n", arts.summary.c_str());
    return 0;
}

int inspect_command(const std::string& path) {
    nlohmann::json j = load_json(path);
    const nlohmann::json* node = j.is_object() && j.contains("family") ? &j["family"] : &j;
    HyperplaneFamily fam = parse_family(*node, "family");
    std::printf("dimension: %d\n", fam.dim);
    std::printf("region at level u: { x : p.x > u for some direction p }\n");
    std::printf("directions (%zu):\n", fam.directions.size());
    for (const auto& p : fam.directions) std::printf("  %s\n", vec_to_string(p).c_str());
    std::printf("sample points at level 1:\n");
    std::vector<Vec> probes;
    for (int jx = 0; jx < fam.dim; ++jx) {
        Vec e(static_cast<std::size_t>(fam.dim), 0.0);
        e[static_cast<std::size_t>(jx)] = 1.0;
        probes.push_back(std::move(e));
    }
    probes.emplace_back(static_cast<std::size_t>(fam.dim), 1.0);
    probes.emplace_back(static_cast<std::size_t>(fam.dim), 2.0);
    for (const auto& x : probes) {
        const double si = scale_index(fam, x);
        std::printf("  x = %-18s scale index %-12g member: %s\n", vec_to_string(x).c_str(), si,
                    membership(fam, x, 1.0) ? "yes" : "no");
    }
    return 0;
}

bool check(bool ok, const char* what, int* failures) {
    if (ok) {
        std::printf("ok: %s\n", what);
    } else {
        std::printf("FAIL: %s\n", what);
        ++*failures;
    }
    return ok;
}

int selftest_command() {
    int failures = 0;

    {  // geometry invariants on randomized families
        RngStream rng(2718);
        bool homogeneous = true, member_consistent = true, height_inverse = true,
             union_max = true;
        for (int it = 0; it < 2000; ++it) {
            const int d = 1 + static_cast<int>(rng.uniform() * 3.0);
            const int k = 1 + static_cast<int>(rng.uniform() * 3.0);
            HyperplaneFamily fam;
            fam.dim = d;
            for (int i = 0; i < k; ++i) {
                Vec p(static_cast<std::size_t>(d), 0.0);
                for (auto& v : p) v = rng.uniform();
                p[static_cast<std::size_t>(rng.uniform() * d)] += 0.1;
                fam.directions.push_back(std::move(p));
            }
            Vec x(static_cast<std::size_t>(d));
            for (auto& v : x) v = 4.0 * rng.uniform() - 2.0;
            const double lam = 0.1 + 3.9 * rng.uniform();
            const double sx = scale_index(fam, x);
            Vec lx = x;
            for (auto& v : lx) v *= lam;
            if (std::fabs(scale_index(fam, lx) - lam * sx) > 1e-9 * (1.0 + lam * sx))
                homogeneous = false;
            const double u = 0.05 + rng.uniform();
            if (membership(fam, x, u) != (sx > u)) member_consistent = false;
            Vec theta(static_cast<std::size_t>(d), 0.0);
            double tot = 0.0;
            for (auto& v : theta) {
                v = 0.01 + rng.uniform();
                tot += v;
            }
            for (auto& v : theta) v /= tot;
            const double h = height(fam, theta);
            const double st = scale_index(fam, theta);
            if (st > 0.0 && std::isfinite(h) && std::fabs(h * st - 1.0) > 1e-9)
                height_inverse = false;
            HyperplaneFamily half1{d, {fam.directions.front()}};
            HyperplaneFamily uni = union_families({half1, fam});
            if (std::fabs(scale_index(uni, x) - std::max(scale_index(half1, x), sx)) > 1e-12)
                union_max = false;
        }
        check(homogeneous, "scale index is positively homogeneous", &failures);
        check(member_consistent, "membership agrees with the scale index", &failures);
        check(height_inverse, "entry height is the inverse scale on the simplex", &failures);
        check(union_max, "union of families takes the pointwise max scale", &failures);
    }

    {  // dependent-pair pins: closed forms and the sampler
        const double pins[3][2] = {{1.0, 1.0 / 3.0}, {2.0, 1.0 / 6.0}, {8.0, 1.0 / 24.0}};
        bool closed = true;
        for (const auto& pin : pins)
            if (std::fabs(dyadic_marginal_survival(pin[0]) - pin[1]) > 1e-14) closed = false;
        check(closed, "dyadic marginal survival pins 1/3, 1/6, 1/24", &failures);
        bool halves = true;
        for (int n = 1; n <= 10; ++n) {
            const double s = std::ldexp(1.0, n);
            const double r = dyadic_sum_survival(s) / dyadic_sum_survival(s - 1.0);
            if (std::fabs(r - 0.5) > 1e-12) halves = false;
        }
        check(halves, "dyadic sum tail halves across powers of two", &failures);
        auto model = dyadic_simplex_model();
        RngStream rng(31415);
        const int n = 200000;
        int hits = 0;
        Vec x(2);
        for (int i = 0; i < n; ++i) {
            model->sample_into(rng, x);
            if (x[0] > 1.0) ++hits;
        }
        const double p = 1.0 / 3.0;
        const double se = std::sqrt(p * (1.0 - p) / n);
        check(std::fabs(static_cast<double>(hits) / n - p) < 5.0 * se,
              "dyadic sampler matches P(X>1)=1/3 within 5 sigma", &failures);
    }

    {  // classical ruin oracle at reduced n
        RiskConfig cfg;
        cfg.claims = independent_marginals_model({exponential_law(1.0)});
        cfg.interarrival = InterarrivalSpec::exponential(1.0);
        cfg.premium = {1.25};
        cfg.family = HyperplaneFamily{1, {{1.0}}};
        cfg.give_up = 60.0;
        RngStream stream(61803);
        auto grid = simulate_ruin_grid(cfg, {1e-9, 10.0}, 10000, stream);
        const double psi0 = 0.8, psi10 = 0.8 * std::exp(-2.0);
        const double se0 = std::sqrt(psi0 * (1.0 - psi0) / 10000.0);
        const double se10 = std::sqrt(psi10 * (1.0 - psi10) / 10000.0);
        check(std::fabs(grid[0].psi_hat - psi0) < 5.0 * se0,
              "light-tail ruin probability at 0+ within 5 sigma of 0.8", &failures);
        check(std::fabs(grid[1].psi_hat - psi10) < 5.0 * se10,
              "light-tail ruin probability at 10 within 5 sigma of 0.8 e^-2", &failures);
    }

    {  // one-dimensional asymptote closed form
        auto model = independent_marginals_model({pareto_law(2.0, 1.0)});
        HyperplaneFamily fam{1, {{1.0}}};
        auto curve = h_curve_quadrature(*model, fam, {2.0}, {4.0});
        check(std::fabs(curve.values[0] - 0.125) < 1e-6 * 0.125,
              "1-D asymptote matches u^(1-alpha)/(c(alpha-1))", &failures);
    }

    if (failures > 0) {
        std::printf("selftest FAILED (%d failing check(s))\n", failures);
        return 1;
    }
    std::printf("selftest passed\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ruin-set geometry, heavy-tail diagnostics, and ruin-probability experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int threads = 0;
    bool dry_run = false;
    auto* run = app.add_subcommand("run", "execute an experiment config");
    run->add_option("config", config_path, "JSON experiment file")->required();
    run->add_option("--out", out_dir, "output directory (default: config 'output' or 'out')");
    run->add_option("--threads", threads, "cap on worker threads (default: all cores)");
    run->add_flag("--dry-run", dry_run, "validate and print the plan without sampling");

    app.add_subcommand("selftest", "fast built-in correctness checks");

    std::string descriptor_path;
    auto* inspect = app.add_subcommand("inspect", "print the region of a family descriptor");
    inspect->add_option("descriptor", descriptor_path, "JSON family descriptor file")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return run_command(config_path, out_dir, threads, dry_run);
        if (inspect->parsed()) return inspect_command(descriptor_path);
        return selftest_command();
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime error: %s\n", e.what());
        return 3;
    }
}
