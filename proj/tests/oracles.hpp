#pragma once

// Independent reference computations, kept naive and separate from the library.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "bccui/bccui.hpp"

namespace oracle {

/// Co-occurrence counts by scanning every ordered pixel pair (p, q) and keeping
/// those whose displacement equals one of the requested offsets.
inline std::vector<double> glcm_counts(const bccui::GrayImage& img, const bccui::BinaryMask& m, int levels, int d,
                                       const std::vector<bccui::GlcmAngle>& angles) {
    std::vector<std::pair<int, int>> offsets;
    for (auto a : angles) {
        switch (a) {
            case bccui::GlcmAngle::deg0: offsets.push_back({d, 0}); break;
            case bccui::GlcmAngle::deg45: offsets.push_back({d, -d}); break;
            case bccui::GlcmAngle::deg90: offsets.push_back({0, -d}); break;
            case bccui::GlcmAngle::deg135: offsets.push_back({-d, -d}); break;
        }
    }
    const int w = img.width(), h = img.height(), n = w * h;
    std::vector<double> c(static_cast<std::size_t>(levels * levels), 0.0);
    auto bin = [&](int v) { return static_cast<int>(std::floor(v * static_cast<double>(levels) / 256.0)); };
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
            const int px = p % w, py = p / w, qx = q % w, qy = q / w;
            if (!m(px, py) || !m(qx, qy)) continue;
            for (auto [dx, dy] : offsets)
                if (qx - px == dx && qy - py == dy) {
                    const int i = bin(img(px, py)), j = bin(img(qx, qy));
                    c[static_cast<std::size_t>(i * levels + j)] += 1;
                    c[static_cast<std::size_t>(j * levels + i)] += 1;
                }
        }
    return c;
}

inline std::vector<double> normalized(std::vector<double> c) {
    double s = 0;
    for (double v : c) s += v;
    for (double& v : c) v /= s;
    return c;
}

struct Texture {
    double energy = 0, homogeneity = 0, correlation = 0;
    bool degenerate = false;
};

inline Texture texture(const std::vector<double>& p, int L) {
    Texture t;
    auto at = [&](int i, int j) { return p[static_cast<std::size_t>(i * L + j)]; };
    double mx = 0, my = 0;
    for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j) {
            t.energy += at(i, j) * at(i, j);
            t.homogeneity += at(i, j) / (1.0 + (i - j) * (i - j));
            mx += i * at(i, j);
            my += j * at(i, j);
        }
    double vx = 0, vy = 0, cov = 0;
    for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j) {
            vx += (i - mx) * (i - mx) * at(i, j);
            vy += (j - my) * (j - my) * at(i, j);
            cov += (i - mx) * (j - my) * at(i, j);
        }
    if (vx == 0 || vy == 0) {
        t.degenerate = true;
        return t;
    }
    t.correlation = cov / std::sqrt(vx * vy);
    return t;
}

/// Mann-Whitney: P(score_pos > score_neg) + 1/2 P(tie).
inline double mann_whitney_auc(const std::vector<double>& s, const std::vector<int>& y) {
    double wins = 0, pairs = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j)
            if (y[i] > 0 && y[j] < 0) {
                pairs += 1;
                if (s[i] > s[j]) wins += 1;
                else if (s[i] == s[j]) wins += 0.5;
            }
    return wins / pairs;
}

/// W(a) = sum a - 1/2 sum_ij a_i a_j y_i y_j K_ij
inline double dual_objective(const std::vector<double>& a, const std::vector<int>& y, const std::vector<double>& K) {
    const std::size_t n = a.size();
    double lin = 0, quad = 0;
    for (std::size_t i = 0; i < n; ++i) {
        lin += a[i];
        for (std::size_t j = 0; j < n; ++j) quad += a[i] * a[j] * y[i] * y[j] * K[i * n + j];
    }
    return lin - 0.5 * quad;
}

/// Maximum of the 3-point dual by exhaustive search over (a0, a1) with a2
/// fixed by the equality constraint, refined by repeated zooming.
inline double brute_force_dual3(const std::vector<int>& y, const std::vector<double>& K, double C) {
    double best = -std::numeric_limits<double>::infinity();
    double lo0 = 0, hi0 = C, lo1 = 0, hi1 = C;
    double b0 = 0, b1 = 0;
    const int grid = 200;
    for (int round = 0; round < 12; ++round) {
        for (int i = 0; i <= grid; ++i)
            for (int j = 0; j <= grid; ++j) {
                const double a0 = lo0 + (hi0 - lo0) * i / grid, a1 = lo1 + (hi1 - lo1) * j / grid;
                const double a2 = -y[2] * (a0 * y[0] + a1 * y[1]);
                if (a2 < 0 || a2 > C) continue;
                const double w = dual_objective({a0, a1, a2}, y, K);
                if (w > best) best = w, b0 = a0, b1 = a1;
            }
        const double s0 = (hi0 - lo0) / 10, s1 = (hi1 - lo1) / 10;
        lo0 = std::max(0.0, b0 - s0), hi0 = std::min(C, b0 + s0);
        lo1 = std::max(0.0, b1 - s1), hi1 = std::min(C, b1 + s1);
    }
    return best;
}

/// Largest KKT violation over training points for f(x_i) = sum_j a_j y_j K_ij + b:
/// a = 0 needs y f >= 1, 0 < a < C needs y f = 1, a = C needs y f <= 1.
inline double kkt_residual(const std::vector<double>& a, const std::vector<int>& y, const std::vector<double>& K, double b,
                           double C) {
    const std::size_t n = a.size();
    double worst = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double f = b;
        for (std::size_t j = 0; j < n; ++j) f += a[j] * y[j] * K[i * n + j];
        const double m = y[i] * f;
        double r = 0;
        if (a[i] <= 0) r = std::max(0.0, 1 - m);
        else if (a[i] >= C) r = std::max(0.0, m - 1);
        else r = std::abs(m - 1);
        worst = std::max(worst, r);
    }
    return worst;
}

// Flood-fill component count per label, written independently of the library.
inline std::map<int, int> components_per_label(const bccui::SuperpixelLabeling& lab) {
    std::vector<char> seen(lab.labels.size(), 0);
    std::map<int, int> count;
    for (int y = 0; y < lab.height; ++y)
        for (int x = 0; x < lab.width; ++x) {
            const auto p = static_cast<std::size_t>(y * lab.width + x);
            if (seen[p]) continue;
            const int l = lab.labels[p];
            ++count[l];
            std::vector<std::pair<int, int>> stack{{x, y}};
            seen[p] = 1;
            while (!stack.empty()) {
                auto [cx, cy] = stack.back();
                stack.pop_back();
                const int nb[4][2] = {{cx - 1, cy}, {cx + 1, cy}, {cx, cy - 1}, {cx, cy + 1}};
                for (auto& q : nb) {
                    if (q[0] < 0 || q[1] < 0 || q[0] >= lab.width || q[1] >= lab.height) continue;
                    const auto qi = static_cast<std::size_t>(q[1] * lab.width + q[0]);
                    if (!seen[qi] && lab.labels[qi] == l) {
                        seen[qi] = 1;
                        stack.push_back({q[0], q[1]});
                    }
                }
            }
        }
    return count;
}

// Smallest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
inline double min_eigenvalue(std::vector<double> a, std::size_t n) {
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
        if (off < 1e-24) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p * n + q]) < 1e-300) continue;
                const double theta = (a[q * n + q] - a[p * n + p]) / (2 * a[p * n + q]);
                const double t = (theta >= 0 ? 1 : -1) / (std::abs(theta) + std::sqrt(theta * theta + 1));
                const double c = 1 / std::sqrt(t * t + 1), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k * n + p], akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p * n + k], aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
    }
    double lo = a[0];
    for (std::size_t i = 1; i < n; ++i) lo = std::min(lo, a[i * n + i]);
    return lo;
}

}  // namespace oracle
