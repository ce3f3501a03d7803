#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "ruinlab/descriptors.hpp"
#include "ruinlab/parallel.hpp"
#include "ruinlab/report.hpp"

using namespace ruinlab;
using nlohmann::json;

namespace {

std::filesystem::path temp_dir(const char* tag) {
    auto p = std::filesystem::temp_directory_path() / (std::string("ruinlab_rep_") + tag);
    std::filesystem::remove_all(p);
    return p;
}

std::string slurp(const std::filesystem::path& p) { return read_file(p.string()); }

}  // namespace

TEST_CASE("csv escaping and line assembly") {
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_escape("line\nbreak") == "\"line\nbreak\"");
    CHECK(csv_line({"a", "b,c", "d"}) == "a,\"b,c\",d\r\n");

    Table t;
    t.header = {"u", "value"};
    t.rows = {{"1", "0.5"}, {"2", "0.25"}};
    const std::string csv = render_csv(t);
    CHECK(csv == "u,value\r\n1,0.5\r\n2,0.25\r\n");
}

TEST_CASE("compact numeric formatting") {
    CHECK(format_compact(0.25) == "0.25");
    CHECK(format_compact(1.0) == "1");
    CHECK(format_compact(1e100) == "1e+100");
    // round-trips to the same double at 12 significant digits for table-scale values
    CHECK(format_compact(1.0 / 3.0) == "0.333333333333");
}

TEST_CASE("fnv1a64 is deterministic and distinguishes inputs") {
    const std::uint64_t a = fnv1a64("hello");
    CHECK(a == fnv1a64("hello"));
    CHECK(a != fnv1a64("hellp"));
    CHECK(fnv1a64("") != fnv1a64(" "));
    CHECK(hex64(a).size() == 16);
    CHECK(hex64(0) == "0000000000000000");
    CHECK(hex64(0xdeadbeefULL) == "00000000deadbeef");
}

TEST_CASE("ratio svg contains the expected structure") {
    std::vector<RatioSeriesPoint> pts = {
        {10.0, 0.9, 0.8, 1.0}, {100.0, 0.95, 0.9, 1.0}, {1000.0, 1.01, 0.97, 1.05}};
    const std::string svg = render_ratio_svg("t", "x", "y", pts, 1.0);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("<!-- data:") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK(svg.find("stroke-dasharray") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);

    const std::string empty_svg = render_ratio_svg("t", "x", "y", {}, 1.0);
    CHECK(empty_svg.find("no usable points") != std::string::npos);
}

TEST_CASE("experiment parsing rejects malformed configs with located messages") {
    auto parse = [](const char* text) { return parse_experiment(json::parse(text)); };

    // unknown key is named in the error
    try {
        parse(R"({"schema_version":1,"seed":1,"geometry":{"family":{"type":"hyperplanes",
               "directions":[[1]]},"points":[[1]],"levels":[1],"bogus":3}})");
        CHECK(false);
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("bogus") != std::string::npos);
    }

    // missing seed
    try {
        parse(R"({"schema_version":1,"geometry":{"family":{"type":"hyperplanes",
               "directions":[[1]]},"points":[[1]],"levels":[1]}})");
        CHECK(false);
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("seed") != std::string::npos);
    }

    // two experiment sections at once
    CHECK_THROWS_AS(parse(R"({"schema_version":1,"seed":1,
        "geometry":{"family":{"type":"hyperplanes","directions":[[1]]},"points":[[1]],"levels":[1]},
        "hcurve":{"claims":{"type":"independent","marginals":[{"law":"exponential","rate":1}]},
                  "family":{"type":"hyperplanes","directions":[[1]]},"drift":[1],"levels":[1]}})"),
                    ConfigError);

    // wrong schema version
    CHECK_THROWS_AS(parse(R"({"schema_version":2,"seed":1,
        "geometry":{"family":{"type":"hyperplanes","directions":[[1]]},"points":[[1]],"levels":[1]}})"),
                    ConfigError);

    // bid-ask matrix that breaks the consistency rules
    try {
        parse(R"({"schema_version":1,"seed":1,"geometry":{
            "family":{"type":"bidask","pi":[[1,0.5],[2,1]],"b":[0.5,0.5]},
            "points":[[1,1]],"levels":[1]}})");
        CHECK(false);
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("pi[0][1]") != std::string::npos);
    }
}

TEST_CASE("family shorthands expand to the expected directions") {
    // aggregate weights w become the single direction w
    HyperplaneFamily agg = parse_family(json::parse(R"({"type":"aggregate","weights":[0.5,0.5]})"),
                                        "family");
    REQUIRE(agg.directions.size() == 1);
    CHECK(agg.directions[0] == Vec{0.5, 0.5});

    // union of per-component thresholds t_j becomes directions e_j / t_j
    HyperplaneFamily uni = parse_family(json::parse(R"({"type":"union","thresholds":[2,4]})"),
                                        "family");
    REQUIRE(uni.directions.size() == 2);
    CHECK(uni.directions[0] == Vec{0.5, 0.0});
    CHECK(uni.directions[1] == Vec{0.0, 0.25});
}

TEST_CASE("load_experiment reports the file and line of a syntax error") {
    const auto dir = temp_dir("syntax");
    std::filesystem::create_directories(dir);
    const auto path = dir / "broken.json";
    write_file(path.string(), "{\n  \"schema_version\": 1,\n  oops\n}\n");
    try {
        load_experiment(path.string());
        CHECK(false);
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("broken.json:3") != std::string::npos);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("run_experiment writes byte-identical artifacts for the same seed") {
    const char* cfg_text = R"({
        "schema_version": 1,
        "seed": 4242,
        "compare": {
            "risk": {
                "claims": {"type":"independent","marginals":[{"law":"pareto","alpha":1.5,"scale":1}]},
                "interarrival": {"kind":"exponential","rate":1},
                "premium": [103],
                "family": {"type":"hyperplanes","directions":[[1]]},
                "give_up": 2000
            },
            "levels": [20, 40],
            "n_paths": 5000,
            "h_samples": 50000
        }
    })";
    Experiment exp = parse_experiment(json::parse(cfg_text));
    const std::uint64_t hash = fnv1a64(cfg_text);

    const auto dir_a = temp_dir("runA");
    const auto dir_b = temp_dir("runB");

    const int saved = max_threads();
    set_max_threads(1);
    RunArtifacts a = run_experiment(exp, dir_a.string(), hash);
    set_max_threads(2);
    RunArtifacts b = run_experiment(exp, dir_b.string(), hash);
    set_max_threads(saved);

    REQUIRE(a.files == b.files);
    REQUIRE(!a.files.empty());
    CHECK(a.files.back() == "meta.json");
    for (const auto& name : a.files) {
        if (name == "meta.json") continue;  // carries wall-clock time
        INFO("artifact ", name);
        CHECK(slurp(dir_a / name) == slurp(dir_b / name));
    }

    // metadata records the config hash and the artifact list
    json meta = json::parse(slurp(dir_a / "meta.json"));
    CHECK(meta.at("config_hash").get<std::string>() == hex64(hash));
    CHECK(meta.at("seed").get<std::uint64_t>() == 4242);
    CHECK(meta.at("experiment").get<std::string>() == "compare");
    auto outputs = meta.at("outputs").get<std::vector<std::string>>();
    std::vector<std::string> expect(a.files.begin(), a.files.end() - 1);
    CHECK(outputs == expect);
    CHECK(meta.at("wall_ms").is_number());

    // every artifact it names exists on disk
    for (const auto& name : outputs) CHECK(std::filesystem::exists(dir_a / name));

    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
}

TEST_CASE("geometry and ruin experiments produce their documented artifacts") {
    const char* geo_text = R"({
        "schema_version": 1,
        "seed": 7,
        "geometry": {
            "family": {"type":"bidask","pi":[[1,1.5],[1.4,1]],"b":[0.5,0.5]},
            "points": [[1,0],[0,1],[2,2]],
            "levels": [0.5, 1.0]
        }
    })";
    Experiment geo = parse_experiment(json::parse(geo_text));
    const auto dir_g = temp_dir("geo");
    RunArtifacts g = run_experiment(geo, dir_g.string(), fnv1a64(geo_text));
    CHECK(g.files == std::vector<std::string>{"geometry.json", "meta.json"});
    json gj = json::parse(slurp(dir_g / "geometry.json"));
    CHECK(gj.at("dim").get<int>() == 2);
    REQUIRE(gj.at("points").size() == 3);
    // (2,2) dominates every direction, so it is a member at both levels
    const auto& pt = gj.at("points")[2];
    CHECK(pt.at("scale_index").get<double>() > 1.0);
    CHECK(pt.at("member")[0].get<bool>());
    CHECK(pt.at("member")[1].get<bool>());
    std::filesystem::remove_all(dir_g);

    const char* ruin_text = R"({
        "schema_version": 1,
        "seed": 11,
        "ruin": {
            "risk": {
                "claims": {"type":"independent","marginals":[{"law":"exponential","rate":1}]},
                "interarrival": {"kind":"exponential","rate":1},
                "premium": [1.25],
                "family": {"type":"hyperplanes","directions":[[1]]},
                "give_up": 50
            },
            "levels": [1, 5],
            "n_paths": 2000
        }
    })";
    Experiment ruin = parse_experiment(json::parse(ruin_text));
    const auto dir_r = temp_dir("ruin");
    RunArtifacts r = run_experiment(ruin, dir_r.string(), fnv1a64(ruin_text));
    CHECK(r.files == std::vector<std::string>{"ruin.csv", "meta.json"});
    const std::string csv = slurp(dir_r / "ruin.csv");
    CHECK(csv.rfind("u,psi_hat,ci_lo,ci_hi,H,ratio,truncated_frac,mean_steps\r\n", 0) == 0);
    // two data rows follow the header
    std::size_t lines = 0;
    for (char ch : csv)
        if (ch == '\n') ++lines;
    CHECK(lines == 3);
    std::filesystem::remove_all(dir_r);
}
