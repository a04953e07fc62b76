#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "bccui/error.hpp"
#include "bccui/image.hpp"
#include "bccui/superpixel.hpp"

namespace bccui {

struct Point {
    int x = 0;
    int y = 0;
    friend bool operator==(const Point&, const Point&) = default;
};

enum class SeedSource { annotated_center, manual };

struct SeedSpec {
    int x = 0;
    int y = 0;
    SeedSource source = SeedSource::manual;
};

struct GrowParams {
    double threshold = 38.25;  // gray levels
};

/// Binary raster, row-major, 0 or 1 per pixel.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;

    BinaryMask() = default;
    BinaryMask(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0) {}

    bool operator()(int x, int y) const {
        return bits[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)] != 0;
    }
    void set(int x, int y, bool v = true) {
        bits[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)] = v ? 1 : 0;
    }
    bool inside(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height && (*this)(x, y); }
    std::size_t count() const {
        return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
    }
    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

struct Contour {
    std::vector<Point> points;  // closed loop; the last point is 8-adjacent to the first
    double perimeter = 0.0;
};

struct RoiMask {
    BinaryMask mask;
    std::vector<Point> boundary;
    std::size_t area_px = 0;
    double perimeter = 0.0;
    std::vector<int> accepted_labels;
};

/// Mean intensity of each superpixel.
inline std::vector<double> block_means(const GrayImage& img, const SuperpixelLabeling& lab) {
    detail::require(img.width() == lab.width && img.height() == lab.height,
                    "block_means: labeling dimensions differ from image");
    std::vector<double> sum(lab.count(), 0.0);
    std::vector<std::size_t> n(lab.count(), 0);
    const auto px = img.pixels();
    for (std::size_t p = 0; p < px.size(); ++p) {
        const auto l = static_cast<std::size_t>(lab.labels[p]);
        sum[l] += px[p];
        ++n[l];
    }
    for (std::size_t l = 0; l < sum.size(); ++l) {
        if (n[l] == 0) throw Error("block_means: label " + std::to_string(l) + " has no pixels");
        sum[l] /= static_cast<double>(n[l]);
    }
    return sum;
}

/// fraction x intensity range of the image.
inline double default_grow_threshold(const GrayImage& img, double fraction = 0.15) {
    const auto [lo, hi] = std::minmax_element(img.pixels().begin(), img.pixels().end());
    return fraction * static_cast<double>(*hi - *lo);
}

/// Keeps the 4-connected component of the mask that contains the seed.
inline BinaryMask component_containing(const BinaryMask& mask, Point seed) {
    BinaryMask out(mask.width, mask.height);
    if (!mask.inside(seed.x, seed.y)) return out;
    std::vector<Point> stack{seed};
    out.set(seed.x, seed.y);
    while (!stack.empty()) {
        const Point p = stack.back();
        stack.pop_back();
        const std::array<Point, 4> nb{{{p.x - 1, p.y}, {p.x + 1, p.y}, {p.x, p.y - 1}, {p.x, p.y + 1}}};
        for (const auto& q : nb) {
            if (mask.inside(q.x, q.y) && !out(q.x, q.y)) {
                out.set(q.x, q.y);
                stack.push_back(q);
            }
        }
    }
    return out;
}

namespace detail {
// Clockwise on screen (y grows downward), starting west.
inline constexpr std::array<Point, 8> kMoore{{{-1, 0}, {-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}}};

inline int moore_index(int dx, int dy) {
    for (int i = 0; i < 8; ++i)
        if (kMoore[static_cast<std::size_t>(i)].x == dx && kMoore[static_cast<std::size_t>(i)].y == dy) return i;
    return -1;
}
}  // namespace detail

/// Moore-neighbor tracing from the topmost-then-leftmost pixel, clockwise,
/// stopping when the first move repeats. Perimeter counts axial steps as 1 and
/// diagonal steps as sqrt(2); a lone pixel has perimeter 4.
inline Contour trace_boundary(const BinaryMask& mask) {
    Point start{-1, -1};
    for (int y = 0; y < mask.height && start.x < 0; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask(x, y)) {
                start = {x, y};
                break;
            }
    if (start.x < 0) throw InvalidArgument("trace_boundary: empty mask");

    Contour c;
    c.points.push_back(start);
    Point p = start;
    int back = 0;  // direction from p to the last background pixel examined
    int first_move = -1;
    for (;;) {
        int found = -1;
        for (int k = 1; k <= 8; ++k) {
            const int d = (back + k) % 8;
            const Point q{p.x + detail::kMoore[static_cast<std::size_t>(d)].x, p.y + detail::kMoore[static_cast<std::size_t>(d)].y};
            if (mask.inside(q.x, q.y)) {
                found = d;
                break;
            }
        }
        if (found < 0) {
            c.perimeter = 4.0;
            return c;
        }
        if (p == start && found == first_move) break;
        if (first_move < 0) first_move = found;

        const auto& step = detail::kMoore[static_cast<std::size_t>(found)];
        const Point q{p.x + step.x, p.y + step.y};
        const auto& pb = detail::kMoore[static_cast<std::size_t>((found + 7) % 8)];
        const Point prev{p.x + pb.x, p.y + pb.y};
        back = detail::moore_index(prev.x - q.x, prev.y - q.y);
        c.perimeter += (step.x != 0 && step.y != 0) ? std::numbers::sqrt2 : 1.0;
        p = q;
        c.points.push_back(p);
    }
    c.points.pop_back();  // the closing return to start
    return c;
}

/// Breadth-first growth over the superpixel adjacency graph. A neighboring
/// superpixel joins iff |mean - seed block mean| < threshold.
inline RoiMask grow(const GrayImage& img, const SuperpixelLabeling& lab, const SeedSpec& seed, const GrowParams& params) {
    detail::require(img.contains(seed.x, seed.y), "grow: seed out of bounds");
    detail::require(params.threshold >= 0.0, "grow: threshold must be >= 0");
    const auto means = block_means(img, lab);
    const auto adj = adjacency(lab);
    const int seed_label = lab(seed.x, seed.y);
    const double g_seed = means[static_cast<std::size_t>(seed_label)];

    std::vector<char> decided(lab.count(), 0), accepted(lab.count(), 0);
    std::deque<int> frontier{seed_label};
    decided[static_cast<std::size_t>(seed_label)] = accepted[static_cast<std::size_t>(seed_label)] = 1;
    RoiMask roi;
    while (!frontier.empty()) {
        const int l = frontier.front();
        frontier.pop_front();
        roi.accepted_labels.push_back(l);
        for (int nb : adj[static_cast<std::size_t>(l)]) {
            const auto i = static_cast<std::size_t>(nb);
            if (decided[i]) continue;
            decided[i] = 1;
            if (std::abs(means[i] - g_seed) < params.threshold) {
                accepted[i] = 1;
                frontier.push_back(nb);
            }
        }
    }
    std::sort(roi.accepted_labels.begin(), roi.accepted_labels.end());

    BinaryMask grown(lab.width, lab.height);
    for (std::size_t p = 0; p < lab.labels.size(); ++p)
        grown.bits[p] = accepted[static_cast<std::size_t>(lab.labels[p])] ? 1 : 0;
    roi.mask = component_containing(grown, {seed.x, seed.y});
    roi.area_px = roi.mask.count();
    auto contour = trace_boundary(roi.mask);
    roi.boundary = std::move(contour.points);
    roi.perimeter = contour.perimeter;
    return roi;
}

/// Builds an RoiMask (boundary, area, perimeter) from an arbitrary mask,
/// keeping its largest 4-connected component.
inline RoiMask roi_from_mask(const BinaryMask& mask) {
    BinaryMask best(mask.width, mask.height);
    std::size_t best_n = 0;
    BinaryMask seen(mask.width, mask.height);
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x) {
            if (!mask(x, y) || seen(x, y)) continue;
            auto comp = component_containing(mask, {x, y});
            const auto n = comp.count();
            for (std::size_t i = 0; i < comp.bits.size(); ++i)
                if (comp.bits[i]) seen.bits[i] = 1;
            if (n > best_n) {
                best_n = n;
                best = std::move(comp);
            }
        }
    if (best_n == 0) throw InvalidArgument("roi_from_mask: empty mask");
    RoiMask roi;
    roi.mask = std::move(best);
    roi.area_px = best_n;
    auto contour = trace_boundary(roi.mask);
    roi.boundary = std::move(contour.points);
    roi.perimeter = contour.perimeter;
    return roi;
}

/// d(i) = |boundary_i - centroid| / max_j |boundary_j - centroid|
inline std::vector<double> centroid_radial_lengths(const BinaryMask& mask, const std::vector<Point>& boundary) {
    double sx = 0.0, sy = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask(x, y)) {
                sx += x;
                sy += y;
                ++n;
            }
    if (n == 0 || boundary.empty()) throw InvalidArgument("centroid_radial_lengths: empty mask");
    const double cx = sx / static_cast<double>(n), cy = sy / static_cast<double>(n);
    std::vector<double> d;
    d.reserve(boundary.size());
    double dmax = 0.0;
    for (const auto& b : boundary) {
        d.push_back(std::hypot(b.x - cx, b.y - cy));
        dmax = std::max(dmax, d.back());
    }
    if (dmax == 0.0) throw InvalidArgument("centroid_radial_lengths: degenerate single-pixel region");
    for (auto& v : d) v /= dmax;
    return d;
}

inline double dice(const BinaryMask& a, const BinaryMask& b) {
    detail::require(a.width == b.width && a.height == b.height, "dice: mask dimensions differ");
    std::size_t inter = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.bits.size(); ++i) {
        na += a.bits[i];
        nb += b.bits[i];
        inter += (a.bits[i] && b.bits[i]) ? 1 : 0;
    }
    if (na + nb == 0) return 1.0;
    return 2.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
}

inline GrayImage mask_to_image(const BinaryMask& m) {
    GrayImage img(m.width, m.height);
    auto px = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = m.bits[i] ? 255 : 0;
    return img;
}

/// Any nonzero pixel is foreground.
inline BinaryMask image_to_mask(const GrayImage& img) {
    BinaryMask m(img.width(), img.height());
    const auto px = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) m.bits[i] = px[i] ? 1 : 0;
    return m;
}

/// "x y" per line, closed loop implied.
inline std::string write_contour(const std::vector<Point>& boundary) {
    std::ostringstream os;
    for (const auto& p : boundary) os << p.x << ' ' << p.y << '\n';
    return os.str();
}

}  // namespace bccui
