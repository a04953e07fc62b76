#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "bccui/error.hpp"
#include "bccui/image.hpp"
#include "bccui/roi.hpp"

namespace bccui {

enum class Feature : std::size_t {
    aspect_ratio,
    roundness,
    compactness,
    roughness,
    contrast_ratio,
    energy,
    homogeneity,
    correlation,
    attenuation,
};

inline constexpr std::size_t kFeatureCount = 9;
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames{
    "ar", "rd", "cp", "rg", "cr", "energy", "homogeneity", "correlation", "ac"};

/// The nine features in fixed order.
struct FeatureVector {
    std::array<double, kFeatureCount> values{};
    bool correlation_degenerate = false;  // constant ROI: correlation reported as 0

    double operator[](Feature f) const { return values[static_cast<std::size_t>(f)]; }
    double& operator[](Feature f) { return values[static_cast<std::size_t>(f)]; }
    std::vector<double> as_vector() const { return {values.begin(), values.end()}; }
};

enum class GlcmAngle { deg0, deg45, deg90, deg135 };

struct GlcmSpec {
    int levels = 32;
    int distance = 1;
    std::vector<GlcmAngle> angles{GlcmAngle::deg0, GlcmAngle::deg45, GlcmAngle::deg90, GlcmAngle::deg135};
};

/// Normalized, symmetric co-occurrence matrix.
struct Glcm {
    int levels = 0;
    std::vector<double> p;  // row-major levels x levels

    double operator()(int i, int j) const {
        return p[static_cast<std::size_t>(i) * static_cast<std::size_t>(levels) + static_cast<std::size_t>(j)];
    }
};

/// Pixel offset for an angle at displacement d, in image coordinates (y down).
inline Point glcm_offset(GlcmAngle a, int d) {
    switch (a) {
        case GlcmAngle::deg0: return {d, 0};
        case GlcmAngle::deg45: return {d, -d};
        case GlcmAngle::deg90: return {0, -d};
        case GlcmAngle::deg135: return {-d, -d};
    }
    return {0, 0};
}

inline std::string angle_name(GlcmAngle a) {
    switch (a) {
        case GlcmAngle::deg0: return "0";
        case GlcmAngle::deg45: return "45";
        case GlcmAngle::deg90: return "90";
        case GlcmAngle::deg135: return "135";
    }
    return "?";
}

inline int quantize(std::uint8_t v, int levels) { return (static_cast<int>(v) * levels) / 256; }

// ---------------------------------------------------------------------------
// Geometric features

struct BoundingBox {
    int min_x = 0, max_x = 0, min_y = 0, max_y = 0;
    int width() const { return max_x - min_x + 1; }
    int height() const { return max_y - min_y + 1; }
};

inline BoundingBox bounding_box(const BinaryMask& m) {
    BoundingBox bb{m.width, -1, m.height, -1};
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x)
            if (m(x, y)) {
                bb.min_x = std::min(bb.min_x, x);
                bb.max_x = std::max(bb.max_x, x);
                bb.min_y = std::min(bb.min_y, y);
                bb.max_y = std::max(bb.max_y, y);
            }
    if (bb.max_x < 0) throw InvalidArgument("bounding_box: empty mask");
    return bb;
}

/// Height over width of the axis-aligned bounding box.
inline double aspect_ratio(const BinaryMask& m) {
    const auto bb = bounding_box(m);
    return static_cast<double>(bb.height()) / static_cast<double>(bb.width());
}

inline double roundness(double area, double perimeter) {
    detail::require(perimeter > 0.0, "roundness: perimeter must be > 0");
    return 4.0 * std::numbers::pi * area / (perimeter * perimeter);
}

/// S / (4 pi L^2), the form used throughout this library (equals roundness / 16 pi^2).
inline double compactness(double area, double perimeter) {
    detail::require(perimeter > 0.0, "compactness: perimeter must be > 0");
    return area / (4.0 * std::numbers::pi * perimeter * perimeter);
}

/// Mean absolute successive difference of the radial profile, cyclic.
inline double roughness(const std::vector<double>& profile) {
    detail::require(profile.size() >= 2, "roughness: profile needs at least 2 samples");
    double sum = 0.0;
    for (std::size_t i = 0; i < profile.size(); ++i) sum += std::abs(profile[i] - profile[(i + 1) % profile.size()]);
    return sum / static_cast<double>(profile.size());
}

// ---------------------------------------------------------------------------
// Texture features

/// (max + 1) / (min + 1) over the ROI.
inline double contrast_ratio(const GrayImage& img, const BinaryMask& m) {
    int lo = 256, hi = -1;
    const auto px = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
        if (!m.bits[i]) continue;
        lo = std::min(lo, static_cast<int>(px[i]));
        hi = std::max(hi, static_cast<int>(px[i]));
    }
    if (hi < 0) throw InvalidArgument("contrast_ratio: empty mask");
    return static_cast<double>(hi + 1) / static_cast<double>(lo + 1);
}

/// Raw symmetric pair counts (before normalization), row-major levels x levels.
inline std::vector<double> glcm_counts(const GrayImage& img, const BinaryMask& m, const GlcmSpec& spec) {
    detail::require(spec.levels >= 2, "glcm: levels must be >= 2");
    detail::require(spec.distance >= 1, "glcm: distance must be >= 1");
    detail::require(!spec.angles.empty(), "glcm: angle set must be nonempty");
    detail::require(img.width() == m.width && img.height() == m.height, "glcm: mask dimensions differ from image");
    const auto L = static_cast<std::size_t>(spec.levels);
    std::vector<double> counts(L * L, 0.0);
    for (auto angle : spec.angles) {
        const Point off = glcm_offset(angle, spec.distance);
        for (int y = 0; y < img.height(); ++y) {
            for (int x = 0; x < img.width(); ++x) {
                if (!m(x, y) || !m.inside(x + off.x, y + off.y)) continue;
                const auto i = static_cast<std::size_t>(quantize(img(x, y), spec.levels));
                const auto j = static_cast<std::size_t>(quantize(img(x + off.x, y + off.y), spec.levels));
                counts[i * L + j] += 1.0;
                counts[j * L + i] += 1.0;
            }
        }
    }
    return counts;
}

inline Glcm glcm(const GrayImage& img, const BinaryMask& m, const GlcmSpec& spec) {
    auto counts = glcm_counts(img, m, spec);
    double total = 0.0;
    for (double c : counts) total += c;
    if (total == 0.0) {
        std::string angles;
        for (auto a : spec.angles) angles += (angles.empty() ? "" : ",") + angle_name(a);
        throw Error("glcm: no co-occurring pair inside the mask for angles {" + angles + "} at d=" +
                    std::to_string(spec.distance));
    }
    for (double& c : counts) c /= total;
    return Glcm{spec.levels, std::move(counts)};
}

inline double glcm_energy(const Glcm& g) {
    double e = 0.0;
    for (double v : g.p) e += v * v;
    return e;
}

inline double glcm_homogeneity(const Glcm& g) {
    double h = 0.0;
    for (int i = 0; i < g.levels; ++i)
        for (int j = 0; j < g.levels; ++j) h += g(i, j) / (1.0 + static_cast<double>((i - j) * (i - j)));
    return h;
}

struct GlcmMarginals {
    double mu_x = 0.0, mu_y = 0.0, sigma_x = 0.0, sigma_y = 0.0;
};

inline GlcmMarginals glcm_marginals(const Glcm& g) {
    GlcmMarginals m;
    std::vector<double> px(static_cast<std::size_t>(g.levels), 0.0), py(static_cast<std::size_t>(g.levels), 0.0);
    for (int i = 0; i < g.levels; ++i)
        for (int j = 0; j < g.levels; ++j) {
            px[static_cast<std::size_t>(i)] += g(i, j);
            py[static_cast<std::size_t>(j)] += g(i, j);
        }
    for (int i = 0; i < g.levels; ++i) {
        m.mu_x += i * px[static_cast<std::size_t>(i)];
        m.mu_y += i * py[static_cast<std::size_t>(i)];
    }
    double vx = 0.0, vy = 0.0;
    for (int i = 0; i < g.levels; ++i) {
        vx += (i - m.mu_x) * (i - m.mu_x) * px[static_cast<std::size_t>(i)];
        vy += (i - m.mu_y) * (i - m.mu_y) * py[static_cast<std::size_t>(i)];
    }
    m.sigma_x = std::sqrt(vx);
    m.sigma_y = std::sqrt(vy);
    return m;
}

/// Pearson correlation of the GLCM. A zero marginal deviation yields 0 and sets *degenerate.
inline double glcm_correlation(const Glcm& g, bool* degenerate = nullptr) {
    const auto m = glcm_marginals(g);
    if (m.sigma_x == 0.0 || m.sigma_y == 0.0) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    if (degenerate) *degenerate = false;
    double cov = 0.0;
    for (int i = 0; i < g.levels; ++i)
        for (int j = 0; j < g.levels; ++j) cov += (i - m.mu_x) * (j - m.mu_y) * g(i, j);
    return std::clamp(cov / (m.sigma_x * m.sigma_y), -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// Gray feature

/// Rectangle directly below the mask's bounding box, same columns, height
/// fraction x bbox height (at least one row), clipped to the image.
inline BoundingBox posterior_rectangle(const BinaryMask& m, double fraction = 0.5) {
    detail::require(fraction > 0.0, "posterior_rectangle: fraction must be > 0");
    const auto bb = bounding_box(m);
    if (bb.max_y + 1 >= m.height) throw Error("attenuation: mask touches the bottom edge, no posterior region");
    const int rows = std::max(1, static_cast<int>(std::lround(fraction * bb.height())));
    return BoundingBox{bb.min_x, bb.max_x, bb.max_y + 1, std::min(m.height - 1, bb.max_y + rows)};
}

/// (mean ROI + 1) / (mean posterior rectangle + 1)
inline double attenuation_coefficient(const GrayImage& img, const BinaryMask& m, double fraction = 0.5) {
    const auto rect = posterior_rectangle(m, fraction);
    double roi_sum = 0.0, rect_sum = 0.0;
    std::size_t roi_n = 0, rect_n = 0;
    const auto px = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i)
        if (m.bits[i]) {
            roi_sum += px[i];
            ++roi_n;
        }
    for (int y = rect.min_y; y <= rect.max_y; ++y)
        for (int x = rect.min_x; x <= rect.max_x; ++x) {
            rect_sum += img(x, y);
            ++rect_n;
        }
    const double roi_mean = roi_sum / static_cast<double>(roi_n);
    const double rect_mean = rect_sum / static_cast<double>(rect_n);
    return (roi_mean + 1.0) / (rect_mean + 1.0);
}

struct FeatureOptions {
    GlcmSpec glcm;
    double posterior_fraction = 0.5;
};

inline FeatureVector extract_all(const GrayImage& img, const RoiMask& roi, const FeatureOptions& opt = {}) {
    detail::require(img.width() == roi.mask.width && img.height() == roi.mask.height,
                    "extract_all: mask dimensions differ from image");
    FeatureVector f;
    const double area = static_cast<double>(roi.area_px);
    f[Feature::aspect_ratio] = aspect_ratio(roi.mask);
    f[Feature::roundness] = roundness(area, roi.perimeter);
    f[Feature::compactness] = compactness(area, roi.perimeter);
    f[Feature::roughness] = roughness(centroid_radial_lengths(roi.mask, roi.boundary));
    f[Feature::contrast_ratio] = contrast_ratio(img, roi.mask);
    const auto g = glcm(img, roi.mask, opt.glcm);
    f[Feature::energy] = glcm_energy(g);
    f[Feature::homogeneity] = glcm_homogeneity(g);
    f[Feature::correlation] = glcm_correlation(g, &f.correlation_degenerate);
    f[Feature::attenuation] = attenuation_coefficient(img, roi.mask, opt.posterior_fraction);
    for (double v : f.values)
        if (!std::isfinite(v)) throw Error("extract_all: non-finite feature value");
    return f;
}

}  // namespace bccui
