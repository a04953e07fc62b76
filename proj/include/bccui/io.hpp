#pragma once

#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "bccui/error.hpp"
#include "bccui/features.hpp"
#include "bccui/svm.hpp"

namespace bccui {

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        out.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

/// Splits text into lines, dropping '\r' and blank lines. Returns (line number, text).
inline std::vector<std::pair<std::size_t, std::string>> csv_lines(std::string_view text) {
    std::vector<std::pair<std::size_t, std::string>> out;
    std::istringstream is{std::string(text)};
    std::string line;
    std::size_t no = 0;
    while (std::getline(is, line)) {
        ++no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        out.emplace_back(no, line);
    }
    return out;
}

inline double parse_double(const std::string& s, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("CSV: '" + s + "' is not a number", line);
    }
}

inline int parse_int(const std::string& s, std::size_t line) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("CSV: '" + s + "' is not an integer", line);
    }
}

}  // namespace detail

/// "%.17g": enough digits for an exact round trip.
inline std::string format_exact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Labels

/// +1 malignant, -1 benign, 0 unknown.
inline int parse_label(const std::string& s, std::size_t line) {
    if (s == "malignant") return 1;
    if (s == "benign") return -1;
    if (s == "unknown" || s.empty()) return 0;
    throw ParseError("CSV: label must be benign, malignant or unknown, got '" + s + "'", line);
}

inline std::string label_name(int label) { return label > 0 ? "malignant" : label < 0 ? "benign" : "unknown"; }

// ---------------------------------------------------------------------------
// Annotation CSV: image,seed_x,seed_y,label

struct Annotation {
    std::string image;
    int seed_x = 0;
    int seed_y = 0;
    int label = 0;
};

inline std::vector<Annotation> read_annotations(std::string_view text) {
    const auto lines = detail::csv_lines(text);
    if (lines.empty() || lines.front().second != "image,seed_x,seed_y,label")
        throw ParseError("annotations: header must be 'image,seed_x,seed_y,label'", 1);
    std::vector<Annotation> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto& [no, line] = lines[i];
        const auto f = detail::split_csv_line(line);
        if (f.size() != 4) throw ParseError("annotations: expected 4 fields", no);
        if (f[0].empty()) throw ParseError("annotations: empty image path", no);
        out.push_back({f[0], detail::parse_int(f[1], no), detail::parse_int(f[2], no), parse_label(f[3], no)});
    }
    return out;
}

inline std::string write_annotations(const std::vector<Annotation>& rows) {
    std::string out = "image,seed_x,seed_y,label\n";
    for (const auto& r : rows)
        out += r.image + "," + std::to_string(r.seed_x) + "," + std::to_string(r.seed_y) + "," + label_name(r.label) + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Feature CSV: image,ar,rd,cp,rg,cr,energy,homogeneity,correlation,ac,label

struct FeatureRow {
    std::string image;
    FeatureVector features;
    int label = 0;
};

inline std::string feature_csv_header() {
    std::string h = "image";
    for (auto n : kFeatureNames) h += "," + std::string(n);
    return h + ",label";
}

inline std::string write_feature_csv(const std::vector<FeatureRow>& rows) {
    std::string out = feature_csv_header() + "\n";
    for (const auto& r : rows) {
        out += r.image;
        for (double v : r.features.values) out += "," + format_exact(v);
        out += "," + label_name(r.label) + "\n";
    }
    return out;
}

inline std::vector<FeatureRow> read_feature_csv(std::string_view text) {
    const auto lines = detail::csv_lines(text);
    if (lines.empty() || lines.front().second != feature_csv_header())
        throw ParseError("features: header must be '" + feature_csv_header() + "'", 1);
    std::vector<FeatureRow> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto& [no, line] = lines[i];
        const auto f = detail::split_csv_line(line);
        if (f.size() != kFeatureCount + 2) throw ParseError("features: expected 11 fields", no);
        FeatureRow r;
        r.image = f[0];
        for (std::size_t j = 0; j < kFeatureCount; ++j) r.features.values[j] = detail::parse_double(f[j + 1], no);
        r.label = parse_label(f.back(), no);
        out.push_back(std::move(r));
    }
    return out;
}

/// Labeled rows only; the image name is the case id.
inline Dataset to_dataset(const std::vector<FeatureRow>& rows) {
    Dataset d;
    for (const auto& r : rows)
        if (r.label != 0) d.push_back({r.features.as_vector(), r.label, r.image});
    return d;
}

}  // namespace bccui
