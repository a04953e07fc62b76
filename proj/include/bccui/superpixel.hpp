#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "bccui/error.hpp"
#include "bccui/image.hpp"

namespace bccui {

struct SlicParams {
    int k = 50;                 // target superpixel count
    double compactness = 10.0;  // color normalizer N_c on the l in [0,100] scale
    int max_iters = 10;
    double conv_eps = 0.25;     // mean center displacement, pixels
};

/// A point in the joint (l, a, b, x, y) space. Used both for cluster centers
/// and for individual pixels.
struct ClusterCenter {
    double l = 0.0;
    double a = 0.0;
    double b = 0.0;
    double x = 0.0;
    double y = 0.0;
};

struct SuperpixelLabeling {
    int width = 0;
    int height = 0;
    std::vector<int> labels;  // row-major, values in [0, centers.size())
    std::vector<ClusterCenter> centers;
    double step = 0.0;        // S

    int operator()(int x, int y) const {
        return labels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                      static_cast<std::size_t>(x)];
    }
    std::size_t count() const noexcept { return centers.size(); }
};

/// Per-iteration bookkeeping exposed for invariant checks.
struct SlicTrace {
    std::vector<double> displacement;          // mean center move per iteration
    std::vector<std::size_t> labeled_pixels;   // pixels carrying a label after each assignment
    double max_assignment_offset = 0.0;        // max Chebyshev pixel-to-center distance seen
    std::size_t iterations = 0;
    std::size_t merged_fragments = 0;
    std::size_t split_fragments = 0;
};

/// S = sqrt(n / k).
inline double step_size(std::size_t n, std::size_t k) {
    detail::require(k >= 1, "step_size: k must be >= 1");
    detail::require(k <= n, "step_size: k exceeds pixel count");
    return std::sqrt(static_cast<double>(n) / static_cast<double>(k));
}

inline long grid_spacing(double step) { return std::max(1L, std::lround(step)); }

/// Squared central-difference gradient on l with clamped sampling.
inline double lightness_gradient(const LabPlane& plane, int x, int y) {
    const double gx = plane.clamped(x + 1, y).l - plane.clamped(x - 1, y).l;
    const double gy = plane.clamped(x, y + 1).l - plane.clamped(x, y - 1).l;
    return gx * gx + gy * gy;
}

/// Regular grid of seeds, each moved to the lowest-gradient pixel of its 3x3
/// neighborhood. A seed only moves if the new gradient is strictly lower;
/// among equal lower candidates the first in scan order wins.
inline std::vector<ClusterCenter> seed_grid(const LabPlane& plane, double step) {
    detail::require(step >= 1.0, "seed_grid: step must be >= 1");
    const long s = grid_spacing(step);
    const long offset = s / 2;
    std::vector<ClusterCenter> seeds;
    for (long gy = offset; gy < plane.height; gy += s) {
        for (long gx = offset; gx < plane.width; gx += s) {
            int bx = static_cast<int>(gx);
            int by = static_cast<int>(gy);
            double best = lightness_gradient(plane, bx, by);
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = static_cast<int>(gx) + dx;
                    const int ny = static_cast<int>(gy) + dy;
                    if (nx < 0 || ny < 0 || nx >= plane.width || ny >= plane.height) continue;
                    const double g = lightness_gradient(plane, nx, ny);
                    if (g < best) {
                        best = g;
                        bx = nx;
                        by = ny;
                    }
                }
            }
            const auto& p = plane(bx, by);
            seeds.push_back({p.l, p.a, p.b, static_cast<double>(bx), static_cast<double>(by)});
        }
    }
    return seeds;
}

/// D' = sqrt((d_c / n_c)^2 + (d_s / n_s)^2)
inline double distance(const ClusterCenter& c, const ClusterCenter& p, double n_c, double n_s) {
    const double dl = p.l - c.l, da = p.a - c.a, db = p.b - c.b;
    const double dx = p.x - c.x, dy = p.y - c.y;
    const double dc2 = dl * dl + da * da + db * db;
    const double ds2 = dx * dx + dy * dy;
    return std::sqrt(dc2 / (n_c * n_c) + ds2 / (n_s * n_s));
}

namespace detail {

inline std::vector<int> connected_components4(const std::vector<int>& labels, int width, int height,
                                              std::vector<int>& comp_label, std::vector<std::size_t>& comp_size) {
    const std::size_t n = labels.size();
    std::vector<int> comp(n, -1);
    std::vector<std::size_t> stack;
    comp_label.clear();
    comp_size.clear();
    for (std::size_t start = 0; start < n; ++start) {
        if (comp[start] != -1) continue;
        const int id = static_cast<int>(comp_label.size());
        const int lab = labels[start];
        comp_label.push_back(lab);
        comp_size.push_back(0);
        comp[start] = id;
        stack.assign(1, start);
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            ++comp_size.back();
            const int x = static_cast<int>(p % static_cast<std::size_t>(width));
            const int y = static_cast<int>(p / static_cast<std::size_t>(width));
            const int nx[4] = {x - 1, x + 1, x, x};
            const int ny[4] = {y, y, y - 1, y + 1};
            for (int d = 0; d < 4; ++d) {
                if (nx[d] < 0 || ny[d] < 0 || nx[d] >= width || ny[d] >= height) continue;
                const std::size_t q = static_cast<std::size_t>(ny[d]) * static_cast<std::size_t>(width) +
                                      static_cast<std::size_t>(nx[d]);
                if (comp[q] == -1 && labels[q] == lab) {
                    comp[q] = id;
                    stack.push_back(q);
                }
            }
        }
    }
    return comp;
}

}  // namespace detail

/// Makes every label 4-connected. Components smaller than min_size are merged
/// into the largest adjacent region; other stray fragments become new labels
/// appended after the existing ones. Empty labels are dropped and the result
/// is compacted to [0, L) preserving label order.
inline std::vector<int> enforce_connectivity(const std::vector<int>& labels, int width, int height,
                                             std::size_t min_size, SlicTrace* trace = nullptr) {
    std::vector<int> comp_label;
    std::vector<std::size_t> comp_size;
    const auto comp = detail::connected_components4(labels, width, height, comp_label, comp_size);
    const std::size_t ncomp = comp_label.size();

    std::vector<std::vector<int>> adj(ncomp);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                                  static_cast<std::size_t>(x);
            if (x + 1 < width && comp[p + 1] != comp[p]) {
                adj[static_cast<std::size_t>(comp[p])].push_back(comp[p + 1]);
                adj[static_cast<std::size_t>(comp[p + 1])].push_back(comp[p]);
            }
            if (y + 1 < height) {
                const std::size_t q = p + static_cast<std::size_t>(width);
                if (comp[q] != comp[p]) {
                    adj[static_cast<std::size_t>(comp[p])].push_back(comp[q]);
                    adj[static_cast<std::size_t>(comp[q])].push_back(comp[p]);
                }
            }
        }
    }
    for (auto& a : adj) {
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
    }

    std::vector<int> parent(ncomp);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int c) {
        while (parent[static_cast<std::size_t>(c)] != c) {
            parent[static_cast<std::size_t>(c)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(c)])];
            c = parent[static_cast<std::size_t>(c)];
        }
        return c;
    };
    std::vector<std::size_t> size = comp_size;
    std::vector<std::vector<int>> members(ncomp);
    for (std::size_t c = 0; c < ncomp; ++c) members[c] = {static_cast<int>(c)};

    auto neighbor_roots = [&](int root) {
        std::vector<int> out;
        for (int m : members[static_cast<std::size_t>(root)])
            for (int n : adj[static_cast<std::size_t>(m)]) {
                const int r = find(n);
                if (r != root) out.push_back(r);
            }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    };

    // Smallest undersized region first; ties by scan order.
    std::vector<int> order(ncomp);
    std::iota(order.begin(), order.end(), 0);
    bool changed = true;
    while (changed) {
        changed = false;
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return size[static_cast<std::size_t>(find(a))] < size[static_cast<std::size_t>(find(b))];
        });
        for (int c : order) {
            const int r = find(c);
            if (r != c || size[static_cast<std::size_t>(r)] >= min_size) continue;
            const auto nb = neighbor_roots(r);
            if (nb.empty()) continue;
            int target = nb.front();
            for (int t : nb)
                if (size[static_cast<std::size_t>(t)] > size[static_cast<std::size_t>(target)]) target = t;
            parent[static_cast<std::size_t>(r)] = target;
            size[static_cast<std::size_t>(target)] += size[static_cast<std::size_t>(r)];
            auto& tm = members[static_cast<std::size_t>(target)];
            auto& rm = members[static_cast<std::size_t>(r)];
            tm.insert(tm.end(), rm.begin(), rm.end());
            rm.clear();
            if (trace) ++trace->merged_fragments;
            changed = true;
            break;
        }
    }

    // Assign labels: per original label the largest group keeps it, others are appended.
    int max_label = -1;
    for (int l : comp_label) max_label = std::max(max_label, l);
    std::vector<int> best_root(static_cast<std::size_t>(max_label + 1), -1);
    for (std::size_t c = 0; c < ncomp; ++c) {
        if (find(static_cast<int>(c)) != static_cast<int>(c)) continue;
        auto& br = best_root[static_cast<std::size_t>(comp_label[c])];
        if (br == -1 || size[c] > size[static_cast<std::size_t>(br)]) br = static_cast<int>(c);
    }
    std::vector<int> root_label(ncomp, -1);
    int next = max_label + 1;
    for (std::size_t c = 0; c < ncomp; ++c) {
        if (find(static_cast<int>(c)) != static_cast<int>(c)) continue;
        if (best_root[static_cast<std::size_t>(comp_label[c])] == static_cast<int>(c)) {
            root_label[c] = comp_label[c];
        } else {
            root_label[c] = next++;
            if (trace) ++trace->split_fragments;
        }
    }

    std::vector<int> raw(labels.size());
    std::vector<char> used(static_cast<std::size_t>(next), 0);
    for (std::size_t p = 0; p < labels.size(); ++p) {
        raw[p] = root_label[static_cast<std::size_t>(find(comp[p]))];
        used[static_cast<std::size_t>(raw[p])] = 1;
    }
    std::vector<int> remap(static_cast<std::size_t>(next), -1);
    int compact = 0;
    for (std::size_t l = 0; l < used.size(); ++l)
        if (used[l]) remap[l] = compact++;
    for (auto& v : raw) v = remap[static_cast<std::size_t>(v)];
    return raw;
}

/// Mean (l, a, b, x, y) of each label's member pixels.
inline std::vector<ClusterCenter> label_means(const LabPlane& plane, const std::vector<int>& labels,
                                              std::size_t count) {
    std::vector<ClusterCenter> sums(count);
    std::vector<std::size_t> n(count, 0);
    for (int y = 0; y < plane.height; ++y) {
        for (int x = 0; x < plane.width; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * static_cast<std::size_t>(plane.width) +
                                  static_cast<std::size_t>(x);
            const auto l = static_cast<std::size_t>(labels[p]);
            const auto& px = plane.px[p];
            sums[l].l += px.l;
            sums[l].a += px.a;
            sums[l].b += px.b;
            sums[l].x += x;
            sums[l].y += y;
            ++n[l];
        }
    }
    for (std::size_t i = 0; i < count; ++i) {
        if (n[i] == 0) continue;
        const double inv = 1.0 / static_cast<double>(n[i]);
        sums[i] = {sums[i].l * inv, sums[i].a * inv, sums[i].b * inv, sums[i].x * inv, sums[i].y * inv};
    }
    return sums;
}

/// SLIC: local k-means over (l, a, b, x, y) with each center searching only its
/// 2S x 2S window, followed by connectivity enforcement.
inline SuperpixelLabeling slic(const GrayImage& img, const SlicParams& params, SlicTrace* trace = nullptr) {
    detail::require(params.k >= 1, "slic: k must be >= 1");
    detail::require(params.compactness > 0.0, "slic: compactness must be > 0");
    detail::require(params.max_iters >= 1, "slic: max_iters must be >= 1");
    detail::require(params.conv_eps >= 0.0, "slic: conv_eps must be >= 0");

    const LabPlane plane = to_pseudolab(img);
    const int w = img.width(), h = img.height();
    const std::size_t n = img.size();
    const double step = step_size(n, static_cast<std::size_t>(params.k));
    const double n_c = params.compactness;
    const double n_s = step;

    std::vector<ClusterCenter> centers = seed_grid(plane, step);
    std::vector<int> labels(n, -1);
    std::vector<double> best(n);
    SlicTrace local;
    SlicTrace& tr = trace ? *trace : local;

    auto pixel_point = [&](int x, int y) {
        const auto& p = plane(x, y);
        return ClusterCenter{p.l, p.a, p.b, static_cast<double>(x), static_cast<double>(y)};
    };
    auto window = [&](const ClusterCenter& c, double radius, int& x0, int& x1, int& y0, int& y1) {
        x0 = std::max(0, static_cast<int>(std::ceil(c.x - radius)));
        x1 = std::min(w - 1, static_cast<int>(std::floor(c.x + radius)));
        y0 = std::max(0, static_cast<int>(std::ceil(c.y - radius)));
        y1 = std::min(h - 1, static_cast<int>(std::floor(c.y + radius)));
    };

    for (int iter = 0; iter < params.max_iters; ++iter) {
        const std::vector<int> previous = labels;
        std::fill(best.begin(), best.end(), std::numeric_limits<double>::infinity());
        std::fill(labels.begin(), labels.end(), -1);

        // Ascending center index with strict '<' keeps the lowest index on ties.
        for (std::size_t ci = 0; ci < centers.size(); ++ci) {
            int x0, x1, y0, y1;
            window(centers[ci], step, x0, x1, y0, y1);
            for (int y = y0; y <= y1; ++y) {
                for (int x = x0; x <= x1; ++x) {
                    const std::size_t p = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) +
                                          static_cast<std::size_t>(x);
                    const double d = distance(centers[ci], pixel_point(x, y), n_c, n_s);
                    if (d < best[p]) {
                        best[p] = d;
                        labels[p] = static_cast<int>(ci);
                    }
                }
            }
        }

        // Pixels no window reached: nearest claimant within 2S, else keep the previous label.
        for (std::size_t p = 0; p < n; ++p) {
            if (labels[p] != -1) continue;
            const int x = static_cast<int>(p % static_cast<std::size_t>(w));
            const int y = static_cast<int>(p / static_cast<std::size_t>(w));
            const auto pt = pixel_point(x, y);
            for (std::size_t ci = 0; ci < centers.size(); ++ci) {
                const auto& c = centers[ci];
                if (std::abs(c.x - x) > 2 * step || std::abs(c.y - y) > 2 * step) continue;
                const double d = distance(c, pt, n_c, n_s);
                if (d < best[p]) {
                    best[p] = d;
                    labels[p] = static_cast<int>(ci);
                }
            }
            if (labels[p] == -1) labels[p] = previous[p];
        }

        std::size_t labeled = 0;
        for (std::size_t p = 0; p < n; ++p) {
            if (labels[p] < 0) continue;
            ++labeled;
            const auto& c = centers[static_cast<std::size_t>(labels[p])];
            const double off = std::max(std::abs(c.x - static_cast<double>(p % static_cast<std::size_t>(w))),
                                        std::abs(c.y - static_cast<double>(p / static_cast<std::size_t>(w))));
            tr.max_assignment_offset = std::max(tr.max_assignment_offset, off);
        }
        tr.labeled_pixels.push_back(labeled);

        auto updated = label_means(plane, labels, centers.size());
        std::vector<std::size_t> members(centers.size(), 0);
        for (int l : labels)
            if (l >= 0) ++members[static_cast<std::size_t>(l)];
        double moved = 0.0;
        for (std::size_t ci = 0; ci < centers.size(); ++ci) {
            if (members[ci] == 0) continue;  // empty cluster keeps its coordinates
            moved += std::hypot(updated[ci].x - centers[ci].x, updated[ci].y - centers[ci].y);
            centers[ci] = updated[ci];
        }
        moved /= static_cast<double>(centers.size());
        tr.displacement.push_back(moved);
        tr.iterations = static_cast<std::size_t>(iter) + 1;
        if (moved <= params.conv_eps) break;
    }

    const long s = grid_spacing(step);
    const auto min_size = static_cast<std::size_t>((s * s) / 4);
    SuperpixelLabeling out;
    out.width = w;
    out.height = h;
    out.step = step;
    out.labels = enforce_connectivity(labels, w, h, min_size, &tr);
    const int count = *std::max_element(out.labels.begin(), out.labels.end()) + 1;
    out.centers = label_means(plane, out.labels, static_cast<std::size_t>(count));
    return out;
}

/// Label adjacency under 4-neighborhood. Each list is sorted and excludes the label itself.
inline std::vector<std::vector<int>> adjacency(const SuperpixelLabeling& lab) {
    std::vector<std::vector<int>> adj(lab.count());
    for (int y = 0; y < lab.height; ++y) {
        for (int x = 0; x < lab.width; ++x) {
            const int a = lab(x, y);
            if (x + 1 < lab.width && lab(x + 1, y) != a) {
                adj[static_cast<std::size_t>(a)].push_back(lab(x + 1, y));
                adj[static_cast<std::size_t>(lab(x + 1, y))].push_back(a);
            }
            if (y + 1 < lab.height && lab(x, y + 1) != a) {
                adj[static_cast<std::size_t>(a)].push_back(lab(x, y + 1));
                adj[static_cast<std::size_t>(lab(x, y + 1))].push_back(a);
            }
        }
    }
    for (auto& v : adj) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    return adj;
}

/// 16-bit PGM label map.
inline std::string write_label_map(const SuperpixelLabeling& lab) {
    detail::require(lab.count() <= 65536, "write_label_map: more than 65536 labels");
    std::vector<std::uint16_t> samples(lab.labels.begin(), lab.labels.end());
    return write_pgm16(lab.width, lab.height, samples);
}

/// One line per center: "index l x y".
inline std::string write_centers(const SuperpixelLabeling& lab) {
    std::ostringstream os;
    os.precision(10);
    for (std::size_t i = 0; i < lab.centers.size(); ++i) {
        const auto& c = lab.centers[i];
        os << i << ' ' << c.l << ' ' << c.x << ' ' << c.y << '\n';
    }
    return os.str();
}

}  // namespace bccui
