#include "ruinlab/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "ruinlab/asymptotics.hpp"
#include "ruinlab/diagnostics.hpp"
#include "ruinlab/simulator.hpp"

namespace ruinlab {

std::string format_compact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string csv_escape(const std::string& field) {
    bool needs = false;
    for (char ch : field)
        if (ch == ',' || ch == '"' || ch == '\r' || ch == '\n') {
            needs = true;
            break;
        }
    if (!needs) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

std::string csv_line(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += csv_escape(fields[i]);
    }
    out += "\r\n";
    return out;
}

std::string render_csv(const Table& t) {
    std::string out = csv_line(t.header);
    for (const auto& row : t.rows) out += csv_line(row);
    return out;
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error(path + ": write failed");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char ch : bytes) {
        h ^= static_cast<unsigned char>(ch);
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

namespace {

std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

}  // namespace

std::string render_ratio_svg(const std::string& title, const std::string& x_label,
                             const std::string& y_label,
                             const std::vector<RatioSeriesPoint>& points, double target) {
    const double kW = 640.0, kH = 400.0, kL = 72.0, kR = 24.0, kT = 44.0, kB = 56.0;
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
         "viewBox=\"0 0 640 400\" font-family=\"monospace\" font-size=\"12\">\n";
    s << "<!-- data: x,y,lo,hi\n";
    for (const auto& p : points)
        s << format_compact(p.x) << ',' << format_compact(p.y) << ',' << format_compact(p.lo)
          << ',' << format_compact(p.hi) << '\n';
    s << "-->\n";
    s << "<rect x=\"0\" y=\"0\" width=\"640\" height=\"400\" fill=\"white\"/>\n";
    s << "<text x=\"" << px(kW / 2) << "\" y=\"20\" text-anchor=\"middle\">" << title
      << "</text>\n";

    if (points.empty()) {
        s << "<text x=\"" << px(kW / 2) << "\" y=\"" << px(kH / 2)
          << "\" text-anchor=\"middle\">no usable points</text>\n</svg>\n";
        return s.str();
    }

    double lx0 = std::log10(points.front().x);
    double lx1 = lx0;
    double y0 = target;
    double y1 = target;
    for (const auto& p : points) {
        lx0 = std::min(lx0, std::log10(p.x));
        lx1 = std::max(lx1, std::log10(p.x));
        y0 = std::min({y0, p.y, p.lo});
        y1 = std::max({y1, p.y, p.hi});
    }
    if (lx1 - lx0 < 1e-12) {
        lx0 -= 0.30103;
        lx1 += 0.30103;
    }
    double dy = y1 - y0;
    if (dy <= 0.0) dy = std::max(1e-6, std::fabs(y0) * 0.5 + 1e-6);
    y0 -= 0.08 * dy;
    y1 += 0.08 * dy;

    auto X = [&](double x) { return kL + (std::log10(x) - lx0) / (lx1 - lx0) * (kW - kL - kR); };
    auto Y = [&](double y) { return kH - kB - (y - y0) / (y1 - y0) * (kH - kT - kB); };

    // confidence band
    bool has_band = false;
    for (const auto& p : points)
        if (p.hi > p.lo) has_band = true;
    if (has_band) {
        s << "<polygon fill=\"#9ecae1\" fill-opacity=\"0.45\" stroke=\"none\" points=\"";
        for (const auto& p : points) s << px(X(p.x)) << ',' << px(Y(p.hi)) << ' ';
        for (auto it = points.rbegin(); it != points.rend(); ++it)
            s << px(X(it->x)) << ',' << px(Y(it->lo)) << ' ';
        s << "\"/>\n";
    }

    // axes
    s << "<line x1=\"" << px(kL) << "\" y1=\"" << px(kH - kB) << "\" x2=\"" << px(kW - kR)
      << "\" y2=\"" << px(kH - kB) << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << px(kL) << "\" y1=\"" << px(kT) << "\" x2=\"" << px(kL) << "\" y2=\""
      << px(kH - kB) << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double yv = y0 + (y1 - y0) * k / 4.0;
        s << "<line x1=\"" << px(kL - 4) << "\" y1=\"" << px(Y(yv)) << "\" x2=\"" << px(kL)
          << "\" y2=\"" << px(Y(yv)) << "\" stroke=\"black\"/>\n";
        s << "<text x=\"" << px(kL - 8) << "\" y=\"" << px(Y(yv) + 4)
          << "\" text-anchor=\"end\">" << tick_label(yv) << "</text>\n";
    }
    for (const auto& p : points) {
        s << "<line x1=\"" << px(X(p.x)) << "\" y1=\"" << px(kH - kB) << "\" x2=\""
          << px(X(p.x)) << "\" y2=\"" << px(kH - kB + 4) << "\" stroke=\"black\"/>\n";
        s << "<text x=\"" << px(X(p.x)) << "\" y=\"" << px(kH - kB + 18)
          << "\" text-anchor=\"middle\">" << tick_label(p.x) << "</text>\n";
    }
    s << "<text x=\"" << px((kL + kW - kR) / 2) << "\" y=\"" << px(kH - 14)
      << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
    s << "<text x=\"18\" y=\"" << px((kT + kH - kB) / 2)
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << px((kT + kH - kB) / 2)
      << ")\">" << y_label << "</text>\n";

    // target rule
    s << "<line x1=\"" << px(kL) << "\" y1=\"" << px(Y(target)) << "\" x2=\"" << px(kW - kR)
      << "\" y2=\"" << px(Y(target)) << "\" stroke=\"#d62728\" stroke-dasharray=\"6 4\"/>\n";

    // curve
    s << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    for (const auto& p : points) s << px(X(p.x)) << ',' << px(Y(p.y)) << ' ';
    s << "\"/>\n";
    for (const auto& p : points)
        s << "<circle cx=\"" << px(X(p.x)) << "\" cy=\"" << px(Y(p.y))
          << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
    s << "</svg>\n";
    return s.str();
}

namespace {

using nlohmann::json;
using Artifact = std::pair<std::string, std::string>;

json ratio_points_json(const std::vector<RatioPoint>& pts) {
    json arr = json::array();
    for (const auto& p : pts)
        arr.push_back({{"u", p.level},
                       {"ratio", p.ratio},
                       {"lo", p.lo},
                       {"hi", p.hi},
                       {"inconclusive", p.inconclusive}});
    return arr;
}

void append_curve_rows(Table& t, const TailCurve& curve, const std::string& role) {
    for (std::size_t i = 0; i < curve.levels.size(); ++i)
        t.rows.push_back({format_compact(curve.levels[i]), format_compact(curve.values[i]),
                          format_compact(curve.stderrs[i]), role,
                          std::to_string(curve.n_samples)});
}

void append_ratio_rows(Table& t, const RatioVerdict& rv, const std::string& role,
                       std::uint64_t n) {
    const double z = 1.959963984540054;
    for (const auto& p : rv.points)
        t.rows.push_back({format_compact(p.level), format_compact(p.ratio),
                          format_compact((p.hi - p.lo) / (2.0 * z)), role, std::to_string(n)});
}

std::vector<Artifact> run_geometry(const GeometrySpec& spec, std::string* summary) {
    json out;
    out["dim"] = spec.family.dim;
    json dirs = json::array();
    for (const auto& p : spec.family.directions) dirs.push_back(p);
    out["directions"] = dirs;
    out["levels"] = spec.levels;
    json pts = json::array();
    for (const auto& x : spec.points) {
        json e;
        e["x"] = x;
        e["scale_index"] = scale_index(spec.family, x);
        json mem = json::array();
        for (double u : spec.levels) mem.push_back(membership(spec.family, x, u));
        e["member"] = mem;
        pts.push_back(std::move(e));
    }
    out["points"] = pts;
    *summary = std::to_string(spec.family.directions.size()) + " direction(s) in dimension " +
               std::to_string(spec.family.dim);
    return {{"geometry.json", out.dump(2) + "\n"}};
}

std::vector<Artifact> run_diagnose(const DiagnoseSpec& spec, std::uint64_t seed,
                                   std::string* summary) {
    RngStream stream(seed);
    Table t{{"level", "estimate", "stderr", "method", "n"}, {}};
    RatioVerdict rv;
    json extra;
    if (spec.test == "convolution") {
        auto res = convolution_ratio_mc(*spec.claims, spec.family, spec.m, spec.levels, spec.n,
                                        stream);
        rv = res.verdict;
        append_curve_rows(t, res.numerator, "sum_tail");
        append_curve_rows(t, res.denominator, "single_tail");
        append_curve_rows(t, res.lower_bound, "union_lower_bound");
        append_curve_rows(t, res.upper_bound, "independent_upper_bound");
        append_ratio_rows(t, rv, "ratio", spec.n);
        extra["sandwich_ok"] = res.sandwich_ok;
        extra["m"] = spec.m;
    } else if (spec.test == "random_sum") {
        rv = random_sum_ratio(*spec.claims, spec.family, spec.p_geom, spec.levels, spec.n,
                              stream);
        append_ratio_rows(t, rv, "random_sum_ratio", spec.n);
        extra["p_geom"] = spec.p_geom;
    } else if (spec.test == "translation") {
        rv = translation_test(*spec.claims, spec.family, spec.shift, spec.levels, spec.n,
                              stream);
        append_ratio_rows(t, rv, "translation_ratio", spec.n);
    } else if (spec.test == "long_tail") {
        TailCurve curve =
            empirical_scalarized_survival(*spec.claims, spec.family, spec.levels, spec.n, stream);
        rv = long_tail_test(curve, spec.shift_scalar);
        append_curve_rows(t, curve, "scalarized_survival");
        append_ratio_rows(t, rv, "shift_ratio", spec.n);
        extra["shift"] = spec.shift_scalar;
    } else {  // dominated
        TailCurve curve =
            empirical_scalarized_survival(*spec.claims, spec.family, spec.levels, spec.n, stream);
        auto res = dominated_variation_test(curve);
        rv = res.verdict;
        append_curve_rows(t, curve, "scalarized_survival");
        append_ratio_rows(t, rv, "halving_ratio", spec.n);
        extra["inf_ratio"] = res.inf_ratio;
    }
    json v;
    v["test"] = spec.test;
    v["target"] = rv.target;
    v["points"] = ratio_points_json(rv.points);
    v["verdict"] = verdict_name(rv.verdict);
    if (!rv.note.empty()) v["note"] = rv.note;
    for (auto& item : extra.items()) v[item.key()] = item.value();
    *summary = spec.test + ": " + verdict_name(rv.verdict);
    return {{"diagnostics.csv", render_csv(t)}, {"verdict.json", v.dump(2) + "\n"}};
}

std::vector<Artifact> run_hcurve(const HcurveSpec& spec, std::uint64_t seed,
                                 std::string* summary) {
    RngStream stream(seed);
    TailCurve curve;
    if (spec.method == "quadrature") {
        curve = h_curve_quadrature(*spec.claims, spec.family, spec.drift, spec.levels);
    } else if (spec.method == "mc") {
        curve = h_curve_mc(*spec.claims, spec.family, spec.drift, spec.levels, spec.n, stream)
                    .curve;
    } else {
        try {
            curve = h_curve_quadrature(*spec.claims, spec.family, spec.drift, spec.levels);
        } catch (const std::invalid_argument&) {
            curve = h_curve_mc(*spec.claims, spec.family, spec.drift, spec.levels, spec.n,
                               stream)
                        .curve;
        }
    }
    Table t{{"u", "H", "stderr", "method"}, {}};
    for (std::size_t i = 0; i < curve.levels.size(); ++i)
        t.rows.push_back({format_compact(curve.levels[i]), format_compact(curve.values[i]),
                          format_compact(curve.stderrs[i]), curve.method});
    std::vector<Artifact> arts{{"hcurve.csv", render_csv(t)}};
    if (auto mrv = spec.claims->mrv(); mrv && mrv->alpha > 1.0) {
        Estimate k;
        if (mrv->spectral.kind == AngularMeasure::Kind::kAtoms)
            k = mrv_ruin_constant(*mrv, spec.family, spec.drift);
        else
            k = mrv_ruin_constant_mc(*mrv, spec.family, spec.drift, 2000000, stream.child(9));
        json cj;
        cj["alpha"] = mrv->alpha;
        cj["constant"] = k.value;
        cj["quadrature_error"] = k.stderr_v;
        cj["method"] = k.method;
        arts.emplace_back("constants.json", cj.dump(2) + "\n");
    }
    *summary = "H on " + std::to_string(spec.levels.size()) + " level(s) by " + curve.method;
    return arts;
}

const std::vector<std::string> kRuinHeader = {"u",  "psi_hat", "ci_lo",          "ci_hi",
                                              "H",  "ratio",   "truncated_frac", "mean_steps"};

std::vector<Artifact> run_ruin(const RuinSpec& spec, std::uint64_t seed, std::string* summary) {
    RngStream stream(seed);
    auto grid = simulate_ruin_grid(spec.risk, spec.levels, spec.n_paths, stream);
    Table t{kRuinHeader, {}};
    for (const auto& r : grid)
        t.rows.push_back({format_compact(r.u), format_compact(r.psi_hat),
                          format_compact(r.ci.lo), format_compact(r.ci.hi), "", "",
                          format_compact(static_cast<double>(r.truncated_paths) /
                                         static_cast<double>(r.n_paths)),
                          format_compact(r.mean_steps)});
    *summary = "psi_hat on " + std::to_string(spec.levels.size()) + " level(s), " +
               std::to_string(spec.n_paths) + " paths";
    return {{"ruin.csv", render_csv(t)}};
}

std::vector<Artifact> run_compare(const CompareSpec& spec, std::uint64_t seed,
                                  std::string* summary) {
    RngStream stream(seed);
    auto cmp = ruin_vs_asymptote(spec.risk, spec.levels, spec.n_paths, stream, spec.h_samples);
    Table t{kRuinHeader, {}};
    std::vector<RatioPoint> pts;
    std::vector<RatioSeriesPoint> series;
    for (const auto& row : cmp.rows) {
        const auto& r = row.ruin;
        t.rows.push_back({format_compact(r.u), format_compact(r.psi_hat),
                          format_compact(r.ci.lo), format_compact(r.ci.hi),
                          format_compact(row.h), row.h > 0.0 ? format_compact(row.ratio) : "",
                          format_compact(static_cast<double>(r.truncated_paths) /
                                         static_cast<double>(r.n_paths)),
                          format_compact(r.mean_steps)});
        RatioPoint p;
        p.level = r.u;
        p.ratio = row.ratio;
        p.lo = row.ratio_ci.lo;
        p.hi = row.ratio_ci.hi;
        p.inconclusive = !row.usable;
        pts.push_back(p);
        if (row.usable)
            series.push_back({r.u, row.ratio, row.ratio_ci.lo, row.ratio_ci.hi});
    }
    const Verdict v = read_ratio_points(pts, 1.0);
    json vj;
    vj["target"] = 1.0;
    vj["points"] = ratio_points_json(pts);
    vj["verdict"] = verdict_name(v);
    vj["trend_toward_one"] = cmp.trend_toward_one;
    vj["h_method"] = cmp.h_method;
    vj["give_up"] = cmp.give_up;
    vj["loading"] = {{"c", cmp.loading.c}, {"provenance", cmp.loading.provenance}};
    if (!cmp.loading.stderr_c.empty()) vj["loading"]["stderr"] = cmp.loading.stderr_c;
    if (!cmp.note.empty()) vj["note"] = cmp.note;
    const std::string svg =
        render_ratio_svg("ruin probability against its asymptote", "initial capital u",
                         "psi_hat / H", series, 1.0);
    *summary = std::string("ratio verdict: ") + verdict_name(v) +
               (cmp.trend_toward_one ? " (trend toward 1)" : "");
    return {{"ruin.csv", render_csv(t)},
            {"verdict.json", vj.dump(2) + "\n"},
            {"ratio.svg", svg}};
}

}  // namespace

RunArtifacts run_experiment(const Experiment& exp, const std::string& out_dir,
                            std::uint64_t config_hash) {
    namespace fs = std::filesystem;
    const auto start = std::chrono::steady_clock::now();
    fs::create_directories(out_dir);
    std::string summary;
    std::vector<Artifact> arts;
    if (exp.geometry)
        arts = run_geometry(*exp.geometry, &summary);
    else if (exp.diagnose)
        arts = run_diagnose(*exp.diagnose, exp.seed, &summary);
    else if (exp.hcurve)
        arts = run_hcurve(*exp.hcurve, exp.seed, &summary);
    else if (exp.ruin)
        arts = run_ruin(*exp.ruin, exp.seed, &summary);
    else if (exp.compare)
        arts = run_compare(*exp.compare, exp.seed, &summary);
    else
        throw std::invalid_argument("experiment has no payload");

    RunArtifacts out;
    for (const auto& [name, bytes] : arts) {
        write_file((fs::path(out_dir) / name).string(), bytes);
        out.files.push_back(name);
    }
    const auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - start)
                             .count();
    json meta;
    meta["schema_version"] = exp.schema_version;
    meta["seed"] = exp.seed;
    meta["config_hash"] = hex64(config_hash);
    meta["experiment"] = exp.kind;
    meta["outputs"] = out.files;
    meta["wall_ms"] = wall_ms;
    write_file((fs::path(out_dir) / "meta.json").string(), meta.dump(2) + "\n");
    out.files.push_back("meta.json");
    out.summary = std::move(summary);
    return out;
}

}  // namespace ruinlab
