#include "ruinlab/descriptors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <utility>

namespace ruinlab {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
    throw ConfigError(where + ": " + msg);
}

// Re-throws std::invalid_argument from domain constructors with the JSON
// path attached.
template <class Fn>
auto located(const std::string& where, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const std::invalid_argument& e) {
        fail(where, e.what());
    }
}

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail(where, "expected an object");
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) {
                known = true;
                break;
            }
        if (!known) fail(where, "unknown field '" + item.key() + "'");
    }
}

const json& get(const json& j, const std::string& where, const char* key) {
    if (!j.is_object()) fail(where, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(where, std::string("missing field '") + key + "'");
    return *it;
}

const json* find(const json& j, const char* key) {
    if (!j.is_object()) return nullptr;
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

std::string get_string(const json& j, const std::string& where, const char* key) {
    const json& v = get(j, where, key);
    if (!v.is_string()) fail(where + "." + key, "expected a string");
    return v.get<std::string>();
}

double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) fail(where, "expected a number");
    return v.get<double>();
}

double get_number(const json& j, const std::string& where, const char* key) {
    return as_number(get(j, where, key), where + "." + key);
}

double opt_number(const json& j, const std::string& where, const char* key, double fallback) {
    const json* v = find(j, key);
    return v ? as_number(*v, where + "." + key) : fallback;
}

std::uint64_t as_count(const json& v, const std::string& where) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    fail(where, "expected a nonnegative integer");
}

std::uint64_t opt_count(const json& j, const std::string& where, const char* key,
                        std::uint64_t fallback) {
    const json* v = find(j, key);
    return v ? as_count(*v, where + "." + key) : fallback;
}

Vec as_vec(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) fail(where, "expected a nonempty array of numbers");
    Vec out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(as_number(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

Vec get_vec(const json& j, const std::string& where, const char* key) {
    return as_vec(get(j, where, key), where + "." + key);
}

std::vector<double> parse_levels(const json& j, const std::string& where) {
    Vec levels = get_vec(j, where, "levels");
    double prev = 0.0;
    for (double u : levels) {
        if (!std::isfinite(u) || u <= prev)
            fail(where + ".levels", "levels must be positive and strictly increasing");
        prev = u;
    }
    return levels;
}

}  // namespace

LawPtr parse_law(const json& j, const std::string& where) {
    const std::string kind = get_string(j, where, "law");
    if (kind == "pareto") {
        check_keys(j, where, {"law", "alpha", "scale"});
        const double alpha = get_number(j, where, "alpha");
        const double scale = opt_number(j, where, "scale", 1.0);
        return located(where, [&] { return pareto_law(alpha, scale); });
    }
    if (kind == "exponential") {
        check_keys(j, where, {"law", "rate"});
        const double rate = get_number(j, where, "rate");
        return located(where, [&] { return exponential_law(rate); });
    }
    if (kind == "weibull") {
        check_keys(j, where, {"law", "shape", "scale"});
        const double shape = get_number(j, where, "shape");
        const double scale = opt_number(j, where, "scale", 1.0);
        return located(where, [&] { return weibull_law(shape, scale); });
    }
    if (kind == "lognormal") {
        check_keys(j, where, {"law", "mu", "sigma"});
        const double mu = get_number(j, where, "mu");
        const double sigma = get_number(j, where, "sigma");
        return located(where, [&] { return lognormal_law(mu, sigma); });
    }
    if (kind == "point") {
        check_keys(j, where, {"law", "value"});
        const double value = get_number(j, where, "value");
        return located(where, [&] { return point_mass_law(value); });
    }
    fail(where + ".law",
         "unknown law '" + kind + "' (pareto | exponential | weibull | lognormal | point)");
}

AngularMeasure parse_angular(const json& j, const std::string& where) {
    const std::string kind = get_string(j, where, "angular");
    if (kind == "atom") {
        check_keys(j, where, {"angular", "theta"});
        Vec theta = get_vec(j, where, "theta");
        return located(where, [&] { return AngularMeasure::single_atom(std::move(theta)); });
    }
    if (kind == "atoms") {
        check_keys(j, where, {"angular", "atoms"});
        const json& arr = get(j, where, "atoms");
        if (!arr.is_array() || arr.empty()) fail(where + ".atoms", "expected a nonempty array");
        std::vector<std::pair<Vec, double>> atoms;
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string at = where + ".atoms[" + std::to_string(i) + "]";
            check_keys(arr[i], at, {"theta", "weight"});
            atoms.emplace_back(get_vec(arr[i], at, "theta"), opt_number(arr[i], at, "weight", 1.0));
        }
        return located(where, [&] { return AngularMeasure::atom_list(std::move(atoms)); });
    }
    if (kind == "dirichlet") {
        check_keys(j, where, {"angular", "alpha"});
        Vec alpha = get_vec(j, where, "alpha");
        return located(where, [&] { return AngularMeasure::dirichlet(std::move(alpha)); });
    }
    if (kind == "uniform") {
        check_keys(j, where, {"angular", "dim"});
        const auto dim = as_count(get(j, where, "dim"), where + ".dim");
        return located(where, [&] { return AngularMeasure::uniform(static_cast<int>(dim)); });
    }
    fail(where + ".angular",
         "unknown angular measure '" + kind + "' (atom | atoms | dirichlet | uniform)");
}

ModelPtr parse_claims(const json& j, const std::string& where) {
    const std::string kind = get_string(j, where, "type");
    if (kind == "independent") {
        check_keys(j, where, {"type", "marginals"});
        const json& arr = get(j, where, "marginals");
        if (!arr.is_array() || arr.empty())
            fail(where + ".marginals", "expected a nonempty array of laws");
        std::vector<LawPtr> laws;
        for (std::size_t i = 0; i < arr.size(); ++i)
            laws.push_back(parse_law(arr[i], where + ".marginals[" + std::to_string(i) + "]"));
        return located(where, [&] { return independent_marginals_model(std::move(laws)); });
    }
    if (kind == "polar") {
        check_keys(j, where, {"type", "angular", "radial"});
        AngularMeasure angular = parse_angular(get(j, where, "angular"), where + ".angular");
        LawPtr radial = parse_law(get(j, where, "radial"), where + ".radial");
        return located(where,
                       [&] { return polar_model(std::move(angular), std::move(radial)); });
    }
    if (kind == "dyadic_simplex") {
        check_keys(j, where, {"type"});
        return dyadic_simplex_model();
    }
    if (kind == "oscillating") {
        check_keys(j, where, {"type", "gamma"});
        const double gamma = get_number(j, where, "gamma");
        return located(where, [&] { return oscillating_model(gamma); });
    }
    if (kind == "point") {
        check_keys(j, where, {"type", "value"});
        Vec value = get_vec(j, where, "value");
        return located(where, [&] { return point_model(std::move(value)); });
    }
    fail(where + ".type",
         "unknown claim model '" + kind +
             "' (independent | polar | dyadic_simplex | oscillating | point)");
}

HyperplaneFamily parse_family(const json& j, const std::string& where) {
    const std::string kind = get_string(j, where, "type");
    HyperplaneFamily fam;
    if (kind == "hyperplanes") {
        check_keys(j, where, {"type", "directions"});
        const json& arr = get(j, where, "directions");
        if (!arr.is_array() || arr.empty())
            fail(where + ".directions", "expected a nonempty array of direction vectors");
        for (std::size_t i = 0; i < arr.size(); ++i)
            fam.directions.push_back(
                as_vec(arr[i], where + ".directions[" + std::to_string(i) + "]"));
        fam.dim = static_cast<int>(fam.directions.front().size());
    } else if (kind == "aggregate") {
        // One supporting direction: the aggregate book sum_j w_j x_j > u.
        check_keys(j, where, {"type", "weights"});
        fam.directions.push_back(get_vec(j, where, "weights"));
        fam.dim = static_cast<int>(fam.directions.front().size());
    } else if (kind == "union") {
        // Per-line thresholds: line j alone ruins once x_j > t_j * u, i.e.
        // axis direction e_j / t_j.
        check_keys(j, where, {"type", "thresholds"});
        Vec t = get_vec(j, where, "thresholds");
        fam.dim = static_cast<int>(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (!(t[i] > 0.0) || !std::isfinite(t[i]))
                fail(where + ".thresholds", "thresholds must be positive and finite");
            Vec dir(t.size(), 0.0);
            dir[i] = 1.0 / t[i];
            fam.directions.push_back(std::move(dir));
        }
    } else if (kind == "bidask") {
        check_keys(j, where, {"type", "pi", "b"});
        const json& arr = get(j, where, "pi");
        if (!arr.is_array() || arr.empty())
            fail(where + ".pi", "expected a square matrix of exchange rates");
        BidAskSpec spec;
        spec.dim = static_cast<int>(arr.size());
        for (std::size_t i = 0; i < arr.size(); ++i)
            spec.pi.push_back(as_vec(arr[i], where + ".pi[" + std::to_string(i) + "]"));
        spec.allocation = get_vec(j, where, "b");
        if (auto msg = validate(spec)) fail(where, *msg);
        return located(where, [&] { return compile_bidask(spec); });
    } else {
        fail(where + ".type",
             "unknown family type '" + kind + "' (hyperplanes | aggregate | union | bidask)");
    }
    if (auto msg = validate(fam)) fail(where, *msg);
    return fam;
}

InterarrivalSpec parse_interarrival(const json& j, const std::string& where) {
    const std::string kind = get_string(j, where, "kind");
    if (kind == "exponential") {
        check_keys(j, where, {"kind", "rate"});
        const double rate = get_number(j, where, "rate");
        return located(where, [&] { return InterarrivalSpec::exponential(rate); });
    }
    if (kind == "deterministic") {
        check_keys(j, where, {"kind", "delta"});
        const double delta = get_number(j, where, "delta");
        return located(where, [&] { return InterarrivalSpec::deterministic(delta); });
    }
    if (kind == "gamma") {
        check_keys(j, where, {"kind", "shape", "scale"});
        const double shape = get_number(j, where, "shape");
        const double scale = get_number(j, where, "scale");
        return located(where, [&] { return InterarrivalSpec::gamma(shape, scale); });
    }
    fail(where + ".kind",
         "unknown interarrival kind '" + kind + "' (exponential | deterministic | gamma)");
}

RiskConfig parse_risk(const json& j, const std::string& where) {
    check_keys(j, where,
               {"claims", "interarrival", "premium", "allocation", "family", "give_up",
                "max_steps"});
    RiskConfig cfg;
    cfg.claims = parse_claims(get(j, where, "claims"), where + ".claims");
    cfg.interarrival = parse_interarrival(get(j, where, "interarrival"), where + ".interarrival");
    cfg.premium = get_vec(j, where, "premium");
    if (find(j, "allocation")) cfg.allocation = get_vec(j, where, "allocation");
    cfg.family = parse_family(get(j, where, "family"), where + ".family");
    cfg.give_up = opt_number(j, where, "give_up", 0.0);
    cfg.max_steps = opt_count(j, where, "max_steps", 0);
    if (auto msg = cfg.validate()) fail(where, *msg);
    return cfg;
}

Experiment parse_experiment(const json& j) {
    check_keys(j, "config",
               {"schema_version", "seed", "output", "geometry", "diagnose", "hcurve", "ruin",
                "compare"});
    Experiment exp;
    const json& ver = get(j, "config", "schema_version");
    if (!ver.is_number_integer() || ver.get<std::int64_t>() != 1)
        fail("config.schema_version", "unrecognized schema version (expected 1)");
    exp.schema_version = 1;
    const json* seed = find(j, "seed");
    if (!seed) fail("config", "missing field 'seed' (runs must be explicitly seeded)");
    exp.seed = as_count(*seed, "config.seed");
    if (const json* out = find(j, "output")) {
        if (!out->is_string()) fail("config.output", "expected a string");
        exp.output = out->get<std::string>();
    }

    int sections = 0;
    for (const char* k : {"geometry", "diagnose", "hcurve", "ruin", "compare"})
        if (find(j, k)) ++sections;
    if (sections != 1)
        fail("config",
             "expected exactly one of geometry | diagnose | hcurve | ruin | compare, found " +
                 std::to_string(sections));

    if (const json* s = find(j, "geometry")) {
        const std::string where = "geometry";
        check_keys(*s, where, {"family", "points", "levels"});
        GeometrySpec spec;
        spec.family = parse_family(get(*s, where, "family"), where + ".family");
        if (const json* pts = find(*s, "points")) {
            if (!pts->is_array()) fail(where + ".points", "expected an array of points");
            for (std::size_t i = 0; i < pts->size(); ++i) {
                Vec p = as_vec((*pts)[i], where + ".points[" + std::to_string(i) + "]");
                if (static_cast<int>(p.size()) != spec.family.dim)
                    fail(where + ".points[" + std::to_string(i) + "]",
                         "point dimension does not match the family");
                spec.points.push_back(std::move(p));
            }
        }
        spec.levels = find(*s, "levels") ? parse_levels(*s, where) : std::vector<double>{1.0};
        exp.kind = "geometry";
        exp.geometry = std::move(spec);
        return exp;
    }

    if (const json* s = find(j, "diagnose")) {
        const std::string where = "diagnose";
        check_keys(*s, where, {"claims", "family", "test", "levels", "n", "m", "p_geom", "shift"});
        DiagnoseSpec spec;
        spec.claims = parse_claims(get(*s, where, "claims"), where + ".claims");
        spec.family = parse_family(get(*s, where, "family"), where + ".family");
        if (spec.family.dim != spec.claims->dim())
            fail(where, "family dimension does not match the claim model");
        spec.test = get_string(*s, where, "test");
        spec.levels = parse_levels(*s, where);
        spec.n = opt_count(*s, where, "n", spec.n);
        if (spec.n == 0) fail(where + ".n", "sample count must be positive");
        if (spec.test == "convolution") {
            spec.m = static_cast<int>(opt_count(*s, where, "m", 2));
            if (spec.m < 2) fail(where + ".m", "fold count must be >= 2");
        } else if (spec.test == "random_sum") {
            spec.p_geom = opt_number(*s, where, "p_geom", 0.5);
            if (!(spec.p_geom > 0.0) || !(spec.p_geom < 1.0))
                fail(where + ".p_geom", "stopping parameter must lie in (0,1)");
        } else if (spec.test == "translation") {
            spec.shift = get_vec(*s, where, "shift");
            if (static_cast<int>(spec.shift.size()) != spec.family.dim)
                fail(where + ".shift", "shift dimension does not match the family");
        } else if (spec.test == "long_tail") {
            spec.shift_scalar = get_number(*s, where, "shift");
            if (!(spec.shift_scalar > 0.0)) fail(where + ".shift", "shift must be positive");
        } else if (spec.test != "dominated") {
            fail(where + ".test",
                 "unknown test '" + spec.test +
                     "' (convolution | random_sum | translation | long_tail | dominated)");
        }
        exp.kind = "diagnose";
        exp.diagnose = std::move(spec);
        return exp;
    }

    if (const json* s = find(j, "hcurve")) {
        const std::string where = "hcurve";
        check_keys(*s, where, {"claims", "family", "drift", "levels", "n", "method"});
        HcurveSpec spec;
        spec.claims = parse_claims(get(*s, where, "claims"), where + ".claims");
        spec.family = parse_family(get(*s, where, "family"), where + ".family");
        if (spec.family.dim != spec.claims->dim())
            fail(where, "family dimension does not match the claim model");
        spec.drift = get_vec(*s, where, "drift");
        if (static_cast<int>(spec.drift.size()) != spec.claims->dim())
            fail(where + ".drift", "drift dimension does not match the claim model");
        if (!all_positive(spec.drift) || !all_finite(spec.drift))
            fail(where + ".drift", "drift must be strictly positive");
        spec.levels = parse_levels(*s, where);
        spec.n = opt_count(*s, where, "n", spec.n);
        if (spec.n == 0) fail(where + ".n", "sample count must be positive");
        if (const json* m = find(*s, "method")) {
            if (!m->is_string()) fail(where + ".method", "expected a string");
            spec.method = m->get<std::string>();
            if (spec.method != "auto" && spec.method != "mc" && spec.method != "quadrature")
                fail(where + ".method", "unknown method (auto | mc | quadrature)");
        }
        exp.kind = "hcurve";
        exp.hcurve = std::move(spec);
        return exp;
    }

    if (const json* s = find(j, "ruin")) {
        const std::string where = "ruin";
        check_keys(*s, where, {"risk", "levels", "n_paths"});
        RuinSpec spec;
        spec.risk = parse_risk(get(*s, where, "risk"), where + ".risk");
        spec.levels = parse_levels(*s, where);
        spec.n_paths = opt_count(*s, where, "n_paths", spec.n_paths);
        if (spec.n_paths == 0) fail(where + ".n_paths", "path count must be positive");
        exp.kind = "ruin";
        exp.ruin = std::move(spec);
        return exp;
    }

    const json* s = find(j, "compare");
    const std::string where = "compare";
    check_keys(*s, where, {"risk", "levels", "n_paths", "h_samples"});
    CompareSpec spec;
    spec.risk = parse_risk(get(*s, where, "risk"), where + ".risk");
    spec.levels = parse_levels(*s, where);
    spec.n_paths = opt_count(*s, where, "n_paths", spec.n_paths);
    if (spec.n_paths == 0) fail(where + ".n_paths", "path count must be positive");
    spec.h_samples = opt_count(*s, where, "h_samples", spec.h_samples);
    if (spec.h_samples == 0) fail(where + ".h_samples", "sample count must be positive");
    exp.kind = "compare";
    exp.compare = std::move(spec);
    return exp;
}

Experiment load_experiment(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        const std::size_t stop = std::min(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < stop; ++i)
            if (text[i] == '\n') ++line;
        throw ConfigError(path + ":" + std::to_string(line) + ": " + e.what());
    }
    try {
        return parse_experiment(j);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

}  // namespace ruinlab
