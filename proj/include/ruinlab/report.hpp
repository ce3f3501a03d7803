#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ruinlab/descriptors.hpp"

namespace ruinlab {

// One decimal rendering shared by every artifact: %.12g keeps distinct
// estimator outputs distinct while staying diff-friendly.  All artifact
// bytes must be a pure function of (config, seed, build), so nothing here
// may consult locale, time, or thread identity.
std::string format_compact(double v);

// RFC-4180: comma separation, CRLF line ends, quotes only where required.
std::string csv_escape(const std::string& field);
std::string csv_line(const std::vector<std::string>& fields);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};
std::string render_csv(const Table& t);

void write_file(const std::string& path, std::string_view content);
std::string read_file(const std::string& path);

// FNV-1a 64-bit content hash, printed as 16 hex digits; identifies the
// config in every artifact so a report can be matched to its inputs.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

// Self-contained SVG line chart: ratio curve with a confidence band and a
// dashed horizontal target rule, log-scaled x.  The numbers ride along in an
// XML comment so the figure can be rebuilt without the CSV.
struct RatioSeriesPoint {
    double x = 0.0;
    double y = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};
std::string render_ratio_svg(const std::string& title, const std::string& x_label,
                             const std::string& y_label,
                             const std::vector<RatioSeriesPoint>& points, double target);

// Executes a parsed experiment and writes its artifacts (tables, verdicts,
// plot, meta.json) under out_dir, which is created if missing.  Every
// artifact except meta.json is byte-reproducible for a fixed config and
// seed; meta.json carries the wall time and is the one deliberate exception.
struct RunArtifacts {
    std::vector<std::string> files;  // artifact file names, meta.json last
    std::string summary;             // one human-readable line
};
RunArtifacts run_experiment(const Experiment& exp, const std::string& out_dir,
                            std::uint64_t config_hash);

}  // namespace ruinlab
