#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "bccui/error.hpp"
#include "bccui/image.hpp"
#include "bccui/roi.hpp"

namespace bccui {

enum class LesionClass { benign, malignant };
enum class PosteriorMode { enhancement, shadow };

/// Synthetic B-mode-like frame: a dark subcutaneous layer at the top, a
/// hypoechoic lesion, and a posterior band under the lesion that is brighter
/// (benign) or darker (malignant) than the surrounding tissue.
struct PhantomSpec {
    int width = 256;
    int height = 400;
    LesionClass lesion_class = LesionClass::benign;
    double lesion_intensity = 30.0;
    double background_intensity = 200.0;  // just below the layer
    double depth_attenuation = 70.0;      // background falls linearly by this much to the last row
    double layer_intensity = 60.0;
    double layer_fraction = 0.2;  // of image height
    double center_x = 128.0;
    double center_y = 225.0;
    // benign ellipse, horizontal semi-axis a >= vertical semi-axis b
    double axis_a = 52.0;
    double axis_b = 36.0;
    // malignant star r(t) = r0 (1 + amplitude sin(spikes t + phase)), stretched vertically
    double radius = 35.0;
    int spikes = 7;
    double amplitude = 0.22;
    double phase = 0.0;
    double vertical_stretch = 1.22;
    PosteriorMode posterior = PosteriorMode::enhancement;
    double posterior_delta = 55.0;      // magnitude; sign follows the mode
    double posterior_fraction = 0.6;    // band depth as a fraction of lesion height
    double speckle_sigma = 0.0;
    std::uint64_t seed = 1;

    static PhantomSpec malignant_default() {
        PhantomSpec s;
        s.lesion_class = LesionClass::malignant;
        s.posterior = PosteriorMode::shadow;
        s.posterior_delta = 70.0;
        s.center_y = 230.0;
        return s;
    }
};

struct PhantomCase {
    GrayImage image;
    BinaryMask truth;
    Point seed;
    int label = -1;  // +1 malignant, -1 benign
    std::string id;
};

inline bool lesion_contains(const PhantomSpec& s, double x, double y) {
    const double dx = x - s.center_x, dy = y - s.center_y;
    if (s.lesion_class == LesionClass::benign) {
        return (dx * dx) / (s.axis_a * s.axis_a) + (dy * dy) / (s.axis_b * s.axis_b) <= 1.0;
    }
    const double sy = dy / s.vertical_stretch;
    const double r = std::hypot(dx, sy);
    const double t = std::atan2(sy, dx);
    return r <= s.radius * (1.0 + s.amplitude * std::sin(s.spikes * t + s.phase));
}

inline PhantomCase generate(const PhantomSpec& s) {
    detail::require(s.width > 0 && s.height > 0, "phantom: frame must be nonempty");
    detail::require(s.speckle_sigma >= 0.0, "phantom: speckle sigma must be >= 0");
    if (s.lesion_class == LesionClass::benign) {
        detail::require(s.axis_a > 0 && s.axis_b > 0 && s.axis_b <= s.axis_a, "phantom: benign needs 0 < b <= a");
    } else {
        detail::require(s.radius > 0 && s.spikes >= 1 && s.amplitude >= 0 && s.amplitude < 1,
                        "phantom: malignant needs radius > 0, spikes >= 1, amplitude in [0,1)");
        detail::require(s.vertical_stretch >= 1.0, "phantom: malignant lesion must be vertically elongated");
    }

    PhantomCase pc;
    pc.label = s.lesion_class == LesionClass::malignant ? 1 : -1;
    pc.truth = BinaryMask(s.width, s.height);
    std::vector<int> lowest(static_cast<std::size_t>(s.width), -1);
    int top = s.height, bottom = -1;
    double sx = 0.0, sy = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < s.height; ++y)
        for (int x = 0; x < s.width; ++x)
            if (lesion_contains(s, x, y)) {
                pc.truth.set(x, y);
                lowest[static_cast<std::size_t>(x)] = y;
                top = std::min(top, y);
                bottom = std::max(bottom, y);
                sx += x;
                sy += y;
                ++n;
            }
    if (n == 0) throw InvalidArgument("phantom: lesion does not intersect the frame");
    const int layer_rows = static_cast<int>(std::lround(s.layer_fraction * s.height));
    const int band_rows = std::max(1, static_cast<int>(std::lround(s.posterior_fraction * (bottom - top + 1))));
    const int band_end = bottom + band_rows;
    for (int x = 0; x < s.width; ++x) {
        if (pc.truth(x, 0) || pc.truth(x, s.height - 1)) throw InvalidArgument("phantom: lesion out of frame");
    }
    for (int y = 0; y < s.height; ++y)
        if (pc.truth(0, y) || pc.truth(s.width - 1, y)) throw InvalidArgument("phantom: lesion out of frame");
    if (top < layer_rows) throw InvalidArgument("phantom: lesion overlaps the subcutaneous layer");
    if (band_end >= s.height) throw InvalidArgument("phantom: posterior band does not fit in the frame");

    const double depth_span = std::max(1, s.height - 1 - layer_rows);
    const double delta = s.posterior == PosteriorMode::enhancement ? s.posterior_delta : -s.posterior_delta;
    std::vector<double> clean(static_cast<std::size_t>(s.width) * static_cast<std::size_t>(s.height));
    for (int y = 0; y < s.height; ++y) {
        for (int x = 0; x < s.width; ++x) {
            const double tissue = s.background_intensity - s.depth_attenuation * (y - layer_rows) / depth_span;
            double v = y < layer_rows ? s.layer_intensity : tissue;
            const int low = lowest[static_cast<std::size_t>(x)];
            if (pc.truth(x, y)) v = s.lesion_intensity;
            else if (low >= 0 && y > low && y <= band_end) v = tissue + delta;
            clean[static_cast<std::size_t>(y) * static_cast<std::size_t>(s.width) + static_cast<std::size_t>(x)] = v;
        }
    }

    std::mt19937_64 rng(s.seed);
    std::normal_distribution<double> noise(0.0, s.speckle_sigma > 0 ? s.speckle_sigma : 1.0);
    pc.image = GrayImage(s.width, s.height);
    auto px = pc.image.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
        double v = clean[i];
        if (s.speckle_sigma > 0) v *= 1.0 + noise(rng);
        px[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }

    Point c{static_cast<int>(std::lround(sx / static_cast<double>(n))), static_cast<int>(std::lround(sy / static_cast<double>(n)))};
    if (!pc.truth(c.x, c.y)) {
        // nearest lesion pixel to the centroid
        long best = -1;
        for (int y = 0; y < s.height; ++y)
            for (int x = 0; x < s.width; ++x)
                if (pc.truth(x, y)) {
                    const long d = static_cast<long>(x - c.x) * (x - c.x) + static_cast<long>(y - c.y) * (y - c.y);
                    if (best < 0 || d < best) {
                        best = d;
                        c = {x, y};
                    }
                }
    }
    pc.seed = c;
    return pc;
}

/// Ranges the per-case parameters are drawn from.
struct PhantomRanges {
    double center_x_jitter = 20.0;
    double benign_center_y_min = 210.0, benign_center_y_max = 240.0;
    double benign_a_min = 42.0, benign_a_max = 62.0;
    double benign_ratio_min = 0.55, benign_ratio_max = 0.9;
    double malignant_center_y_min = 220.0, malignant_center_y_max = 240.0;
    double radius_min = 30.0, radius_max = 40.0;
    int spikes_min = 5, spikes_max = 9;
    double amplitude_min = 0.15, amplitude_max = 0.3;
    double stretch_min = 1.15, stretch_max = 1.3;
    double enhancement_delta = 55.0;
    double shadow_delta = 70.0;
};

inline std::string case_id(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "case_%03zu", i);
    return buf;
}

/// n_benign benign cases followed by n_malignant malignant ones, case i
/// drawn with seed + i.
inline std::vector<PhantomCase> generate_dataset(std::size_t n_benign, std::size_t n_malignant, const PhantomSpec& base,
                                                 std::uint64_t seed, const PhantomRanges& r = {}) {
    detail::require(n_benign >= 1 && n_malignant >= 1, "generate_dataset: both counts must be >= 1");
    std::vector<PhantomCase> out;
    const std::size_t total = n_benign + n_malignant;
    for (std::size_t i = 0; i < total; ++i) {
        std::mt19937_64 rng(seed + i);
        auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
        PhantomSpec s = base;
        s.seed = rng();
        s.center_x = base.width / 2.0 + uni(-r.center_x_jitter, r.center_x_jitter);
        if (i < n_benign) {
            s.lesion_class = LesionClass::benign;
            s.posterior = PosteriorMode::enhancement;
            s.posterior_delta = r.enhancement_delta;
            s.center_y = uni(r.benign_center_y_min, r.benign_center_y_max);
            s.axis_a = uni(r.benign_a_min, r.benign_a_max);
            s.axis_b = s.axis_a * uni(r.benign_ratio_min, r.benign_ratio_max);
        } else {
            s.lesion_class = LesionClass::malignant;
            s.posterior = PosteriorMode::shadow;
            s.posterior_delta = r.shadow_delta;
            s.center_y = uni(r.malignant_center_y_min, r.malignant_center_y_max);
            s.radius = uni(r.radius_min, r.radius_max);
            s.spikes = std::uniform_int_distribution<int>(r.spikes_min, r.spikes_max)(rng);
            s.amplitude = uni(r.amplitude_min, r.amplitude_max);
            s.phase = uni(0.0, 2.0 * std::numbers::pi);
            s.vertical_stretch = uni(r.stretch_min, r.stretch_max);
        }
        auto pc = generate(s);
        pc.id = case_id(i);
        out.push_back(std::move(pc));
    }
    return out;
}

}  // namespace bccui
