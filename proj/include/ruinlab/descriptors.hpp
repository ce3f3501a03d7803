#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "ruinlab/angular.hpp"
#include "ruinlab/claims.hpp"
#include "ruinlab/laws.hpp"
#include "ruinlab/ruinsets.hpp"
#include "ruinlab/simulator.hpp"
#include "ruinlab/vec.hpp"

namespace ruinlab {

// Raised for any structural problem in a config.  The message starts with
// the JSON path of the offending node, or file:line for syntax errors, so
// the CLI can surface it verbatim.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Descriptor parsers.  `where` is the JSON path used to prefix error
// messages ("compare.risk.claims" and the like).  Unknown keys are rejected:
// a silently ignored typo in an experiment config is worse than an error.
LawPtr parse_law(const nlohmann::json& j, const std::string& where);
AngularMeasure parse_angular(const nlohmann::json& j, const std::string& where);
ModelPtr parse_claims(const nlohmann::json& j, const std::string& where);
HyperplaneFamily parse_family(const nlohmann::json& j, const std::string& where);
InterarrivalSpec parse_interarrival(const nlohmann::json& j, const std::string& where);
RiskConfig parse_risk(const nlohmann::json& j, const std::string& where);

struct GeometrySpec {
    HyperplaneFamily family;
    std::vector<Vec> points;     // probe points, may be empty
    std::vector<double> levels;  // defaults to {1}
};

struct DiagnoseSpec {
    ModelPtr claims;
    HyperplaneFamily family;
    std::string test;  // convolution | random_sum | translation | long_tail | dominated
    int m = 2;                  // convolution fold count
    double p_geom = 0.5;        // random_sum stopping parameter
    Vec shift;                  // translation shift vector
    double shift_scalar = 0.0;  // long_tail shift
    std::vector<double> levels;
    std::uint64_t n = 1000000;
};

struct HcurveSpec {
    ModelPtr claims;
    HyperplaneFamily family;
    Vec drift;
    std::vector<double> levels;
    std::uint64_t n = 4000000;
    std::string method = "auto";  // auto | mc | quadrature
};

struct RuinSpec {
    RiskConfig risk;
    std::vector<double> levels;
    std::uint64_t n_paths = 100000;
};

struct CompareSpec {
    RiskConfig risk;
    std::vector<double> levels;
    std::uint64_t n_paths = 100000;
    std::uint64_t h_samples = 4000000;
};

// A parsed experiment file: a mandatory seed plus exactly one payload.
struct Experiment {
    int schema_version = 1;
    std::uint64_t seed = 0;
    std::string output;  // output directory named in the config; may be empty
    std::string kind;    // geometry | diagnose | hcurve | ruin | compare
    std::optional<GeometrySpec> geometry;
    std::optional<DiagnoseSpec> diagnose;
    std::optional<HcurveSpec> hcurve;
    std::optional<RuinSpec> ruin;
    std::optional<CompareSpec> compare;
};

Experiment parse_experiment(const nlohmann::json& j);

// Reads and parses a config file.  Syntax errors surface as
// "path:line: message"; structural errors as "path: json.path: message".
Experiment load_experiment(const std::string& path);

}  // namespace ruinlab
