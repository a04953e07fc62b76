#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "bccui/error.hpp"
#include "bccui/metrics.hpp"

namespace bccui {

enum class KernelKind { rbf, sigmoid, linear };

inline std::string to_string(KernelKind k) {
    switch (k) {
        case KernelKind::rbf: return "rbf";
        case KernelKind::sigmoid: return "sigmoid";
        case KernelKind::linear: return "linear";
    }
    return "?";
}

inline KernelKind parse_kernel_kind(const std::string& s) {
    if (s == "rbf") return KernelKind::rbf;
    if (s == "sigmoid") return KernelKind::sigmoid;
    if (s == "linear") return KernelKind::linear;
    throw InvalidArgument("unknown kernel kind '" + s + "'");
}

/// rbf: exp(-gamma |x - y|^2), i.e. delta = 1/sqrt(gamma).
/// sigmoid: tanh(gamma <x, y> + c0). linear: <x, y>.
struct KernelSpec {
    KernelKind kind = KernelKind::rbf;
    double gamma = 1.0;
    double c0 = 0.0;

    static KernelSpec rbf_from_delta(double delta) { return {KernelKind::rbf, 1.0 / (delta * delta), 0.0}; }
    double delta() const { return 1.0 / std::sqrt(gamma); }
};

inline double kernel_eval(const KernelSpec& k, std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InvalidArgument("kernel_eval: dimension mismatch");
    switch (k.kind) {
        case KernelKind::rbf: {
            double d2 = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
            return std::exp(-k.gamma * d2);
        }
        case KernelKind::sigmoid:
        case KernelKind::linear: {
            const double dot = std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
            return k.kind == KernelKind::linear ? dot : std::tanh(k.gamma * dot + k.c0);
        }
    }
    return 0.0;
}

struct Sample {
    std::vector<double> x;
    int label = 0;  // +1 malignant, -1 benign
    std::string id;
};

using Dataset = std::vector<Sample>;

// ---------------------------------------------------------------------------
// Min-max normalization

struct NormStats {
    std::vector<double> min;
    std::vector<double> max;

    bool constant(std::size_t j) const { return !(max[j] > min[j]); }
};

inline NormStats normalize_fit(const Dataset& data) {
    if (data.empty()) throw InvalidArgument("normalize_fit: empty dataset");
    const std::size_t d = data.front().x.size();
    NormStats s{std::vector<double>(d, std::numeric_limits<double>::infinity()),
                std::vector<double>(d, -std::numeric_limits<double>::infinity())};
    for (const auto& r : data) {
        if (r.x.size() != d) throw InvalidArgument("normalize_fit: inconsistent feature dimension");
        for (std::size_t j = 0; j < d; ++j) {
            s.min[j] = std::min(s.min[j], r.x[j]);
            s.max[j] = std::max(s.max[j], r.x[j]);
        }
    }
    return s;
}

/// Maps each feature to [0, 1], clamping out-of-range values; constant features map to 0.
inline std::vector<double> normalize_apply(const NormStats& s, std::span<const double> v) {
    if (v.size() != s.min.size()) throw InvalidArgument("normalize_apply: dimension mismatch");
    std::vector<double> out(v.size());
    for (std::size_t j = 0; j < v.size(); ++j)
        out[j] = s.constant(j) ? 0.0 : std::clamp((v[j] - s.min[j]) / (s.max[j] - s.min[j]), 0.0, 1.0);
    return out;
}

// ---------------------------------------------------------------------------
// SMO

struct TrainConfig {
    double c = 1.0;
    KernelSpec kernel;
    double tol = 1e-3;
    int max_passes = 10000;  // iteration cap is max_passes * n
    bool normalize = true;
};

struct DualSolution {
    std::vector<double> alpha;  // in [0, C]
    double bias = 0.0;          // f(x) = sum alpha_i y_i K(x_i, x) + bias
    double objective = 0.0;     // sum alpha - 1/2 alpha' Q alpha
    double kkt_gap = 0.0;       // max violating pair gap at exit
    std::size_t iterations = 0;
    bool converged = false;
};

/// Solves max sum(a) - 1/2 a'Qa, Q_ij = y_i y_j K_ij, 0 <= a <= C, y'a = 0 by
/// sequential minimal optimization. Each step updates the maximal violating
/// pair (the feasible pair with the largest error difference) analytically and
/// clips to the box. Stops when the pair's gap is below tol.
inline DualSolution solve_dual(std::span<const double> kernel, std::span<const int> y, double c, double tol,
                               std::size_t max_iter) {
    const std::size_t n = y.size();
    detail::require(kernel.size() == n * n, "solve_dual: kernel must be n x n");
    detail::require(c > 0.0 && tol > 0.0, "solve_dual: C and tol must be > 0");
    auto Q = [&](std::size_t i, std::size_t j) { return y[i] * y[j] * kernel[i * n + j]; };
    constexpr double tau = 1e-12;

    DualSolution sol;
    sol.alpha.assign(n, 0.0);
    std::vector<double> grad(n, -1.0);  // gradient of 1/2 a'Qa - sum(a)
    auto& a = sol.alpha;
    auto in_up = [&](std::size_t t) { return (y[t] > 0 && a[t] < c) || (y[t] < 0 && a[t] > 0); };
    auto in_low = [&](std::size_t t) { return (y[t] > 0 && a[t] > 0) || (y[t] < 0 && a[t] < c); };

    while (sol.iterations < max_iter) {
        double gmax = -std::numeric_limits<double>::infinity(), gmin = std::numeric_limits<double>::infinity();
        std::size_t i = n, j = n;
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -y[t] * grad[t];
            if (in_up(t) && v > gmax) {
                gmax = v;
                i = t;
            }
            if (in_low(t) && v < gmin) {
                gmin = v;
                j = t;
            }
        }
        sol.kkt_gap = (i == n || j == n) ? 0.0 : gmax - gmin;
        if (i == n || j == n || gmax - gmin < tol) {
            sol.converged = true;
            break;
        }
        ++sol.iterations;

        const double old_i = a[i], old_j = a[j];
        if (y[i] != y[j]) {
            double quad = Q(i, i) + Q(j, j) + 2.0 * Q(i, j);
            if (quad <= 0) quad = tau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = a[i] - a[j];
            a[i] += delta;
            a[j] += delta;
            if (diff > 0) {
                if (a[j] < 0) {
                    a[j] = 0;
                    a[i] = diff;
                }
            } else if (a[i] < 0) {
                a[i] = 0;
                a[j] = -diff;
            }
            if (diff > 0) {
                if (a[i] > c) {
                    a[i] = c;
                    a[j] = c - diff;
                }
            } else if (a[j] > c) {
                a[j] = c;
                a[i] = c + diff;
            }
        } else {
            double quad = Q(i, i) + Q(j, j) - 2.0 * Q(i, j);
            if (quad <= 0) quad = tau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = a[i] + a[j];
            a[i] -= delta;
            a[j] += delta;
            if (sum > c) {
                if (a[i] > c) {
                    a[i] = c;
                    a[j] = sum - c;
                }
            } else if (a[j] < 0) {
                a[j] = 0;
                a[i] = sum;
            }
            if (sum > c) {
                if (a[j] > c) {
                    a[j] = c;
                    a[i] = sum - c;
                }
            } else if (a[i] < 0) {
                a[i] = 0;
                a[j] = sum;
            }
        }
        const double di = a[i] - old_i, dj = a[j] - old_j;
        for (std::size_t t = 0; t < n; ++t) grad[t] += Q(t, i) * di + Q(t, j) * dj;
    }

    // Bias from free vectors, else the midpoint of the feasible interval.
    double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
    double free_sum = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        if (a[t] >= c) {
            if (y[t] < 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (a[t] <= 0) {
            if (y[t] > 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++n_free;
            free_sum += yg;
        }
    }
    const double rho = n_free > 0 ? free_sum / static_cast<double>(n_free) : (ub + lb) / 2.0;
    sol.bias = -rho;

    double obj = 0.0;
    for (std::size_t t = 0; t < n; ++t) obj += a[t] * (grad[t] - 1.0);
    sol.objective = -obj / 2.0;
    return sol;
}

struct SvmModel {
    KernelSpec kernel;
    double c = 1.0;
    bool normalized = true;
    NormStats norm;
    std::vector<std::vector<double>> support_vectors;  // in normalized space when normalized
    std::vector<double> alphas;                        // alpha_i * y_i
    double bias = 0.0;
    std::size_t dims = 0;
};

inline void validate_dataset(const Dataset& data) {
    if (data.empty()) throw InvalidArgument("dataset is empty");
    const std::size_t d = data.front().x.size();
    bool pos = false, neg = false;
    std::vector<std::string> ids;
    for (const auto& r : data) {
        if (r.x.size() != d) throw InvalidArgument("dataset: inconsistent feature dimension");
        for (double v : r.x)
            if (!std::isfinite(v)) throw InvalidArgument("dataset: non-finite feature in case '" + r.id + "'");
        if (r.label == 1) pos = true;
        else if (r.label == -1) neg = true;
        else throw InvalidArgument("dataset: label must be +1 or -1 in case '" + r.id + "'");
        ids.push_back(r.id);
    }
    if (!pos || !neg) throw InvalidArgument("dataset: both classes must be present");
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw InvalidArgument("dataset: duplicate case id");
}

inline std::vector<double> kernel_matrix(const KernelSpec& k, const std::vector<std::vector<double>>& xs) {
    const std::size_t n = xs.size();
    std::vector<double> m(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) m[i * n + j] = m[j * n + i] = kernel_eval(k, xs[i], xs[j]);
    return m;
}

inline SvmModel train_smo(const Dataset& data, const TrainConfig& cfg, DualSolution* out_solution = nullptr) {
    validate_dataset(data);
    detail::require(cfg.c > 0.0, "train: C must be > 0");
    detail::require(cfg.tol > 0.0, "train: tol must be > 0");
    detail::require(cfg.kernel.kind != KernelKind::rbf || cfg.kernel.gamma > 0.0, "train: rbf gamma must be > 0");

    SvmModel model;
    model.kernel = cfg.kernel;
    model.c = cfg.c;
    model.normalized = cfg.normalize;
    model.dims = data.front().x.size();
    std::vector<std::vector<double>> xs;
    std::vector<int> ys;
    if (cfg.normalize) model.norm = normalize_fit(data);
    for (const auto& r : data) {
        xs.push_back(cfg.normalize ? normalize_apply(model.norm, r.x) : r.x);
        ys.push_back(r.label);
    }
    const auto K = kernel_matrix(cfg.kernel, xs);
    const std::size_t max_iter = static_cast<std::size_t>(std::max(1, cfg.max_passes)) * std::max<std::size_t>(xs.size(), 1);
    auto sol = solve_dual(K, ys, cfg.c, cfg.tol, max_iter);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (sol.alpha[i] <= 0.0) continue;
        model.support_vectors.push_back(xs[i]);
        model.alphas.push_back(sol.alpha[i] * ys[i]);
    }
    model.bias = sol.bias;
    if (out_solution) *out_solution = std::move(sol);
    return model;
}

inline double decision(const SvmModel& m, std::span<const double> v) {
    if (v.size() != m.dims) throw InvalidArgument("decision: dimension mismatch");
    std::vector<double> x(v.begin(), v.end());
    if (m.normalized) x = normalize_apply(m.norm, x);
    double f = m.bias;
    for (std::size_t i = 0; i < m.support_vectors.size(); ++i) f += m.alphas[i] * kernel_eval(m.kernel, m.support_vectors[i], x);
    return f;
}

/// sign(f), with f == 0 resolving to benign (-1).
inline int predict(const SvmModel& m, std::span<const double> v) { return decision(m, v) > 0.0 ? 1 : -1; }

// ---------------------------------------------------------------------------
// Model persistence

inline std::string save_model(const SvmModel& m) {
    nlohmann::ordered_json j;
    j["format"] = "bccui-svm";
    j["version"] = 1;
    j["kernel"] = {{"kind", to_string(m.kernel.kind)}, {"gamma", m.kernel.gamma}, {"c0", m.kernel.c0}};
    j["c"] = m.c;
    j["dims"] = m.dims;
    j["normalization"] = {{"enabled", m.normalized}, {"min", m.norm.min}, {"max", m.norm.max}};
    j["bias"] = m.bias;
    j["alphas"] = m.alphas;
    j["support_vectors"] = m.support_vectors;
    return j.dump(2) + "\n";
}

inline SvmModel load_model(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("model: ") + e.what(), e.byte);
    }
    try {
        if (j.at("format") != "bccui-svm") throw ParseError("model: unknown format tag", 0);
        SvmModel m;
        m.kernel.kind = parse_kernel_kind(j.at("kernel").at("kind").get<std::string>());
        m.kernel.gamma = j.at("kernel").at("gamma").get<double>();
        m.kernel.c0 = j.at("kernel").at("c0").get<double>();
        m.c = j.at("c").get<double>();
        m.dims = j.at("dims").get<std::size_t>();
        m.normalized = j.at("normalization").at("enabled").get<bool>();
        m.norm.min = j.at("normalization").at("min").get<std::vector<double>>();
        m.norm.max = j.at("normalization").at("max").get<std::vector<double>>();
        m.bias = j.at("bias").get<double>();
        m.alphas = j.at("alphas").get<std::vector<double>>();
        m.support_vectors = j.at("support_vectors").get<std::vector<std::vector<double>>>();
        if (m.alphas.size() != m.support_vectors.size()) throw ParseError("model: alphas/support vector count mismatch", 0);
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model: ") + e.what(), 0);
    }
}

// ---------------------------------------------------------------------------
// Cross-validation and grid search

/// Stratified folds. Each class is ordered by id, shuffled with the seed and
/// dealt round-robin, continuing the deal across classes so fold sizes differ
/// by at most one. Fold membership depends only on ids, labels and seed.
inline std::vector<std::vector<std::size_t>> kfold_split(const Dataset& data, int k, std::uint64_t seed) {
    detail::require(k >= 2, "kfold_split: k must be >= 2");
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < data.size(); ++i) (data[i].label > 0 ? pos : neg).push_back(i);
    if (pos.size() < static_cast<std::size_t>(k) || neg.size() < static_cast<std::size_t>(k))
        throw InvalidArgument("kfold_split: each class needs at least k=" + std::to_string(k) + " members");

    auto by_id = [&](std::size_t a, std::size_t b) { return data[a].id < data[b].id; };
    std::mt19937_64 rng(seed);
    std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
    std::size_t slot = 0;
    for (auto* cls : {&pos, &neg}) {
        std::sort(cls->begin(), cls->end(), by_id);
        std::shuffle(cls->begin(), cls->end(), rng);
        for (auto idx : *cls) folds[slot++ % folds.size()].push_back(idx);
    }
    for (auto& f : folds) std::sort(f.begin(), f.end(), by_id);
    return folds;
}

struct CvResult {
    std::vector<ConfusionCounts> folds;
    std::vector<double> decisions;  // out-of-fold decision value per row
    std::vector<int> predictions;
    double mean_accuracy = 0.0;
};

inline CvResult cross_validate(const Dataset& data, const TrainConfig& cfg, int k, std::uint64_t seed) {
    validate_dataset(data);
    const auto folds = kfold_split(data, k, seed);
    CvResult res;
    res.decisions.assign(data.size(), 0.0);
    res.predictions.assign(data.size(), -1);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return data[a].id < data[b].id; });
    std::vector<int> fold_of(data.size());
    for (std::size_t f = 0; f < folds.size(); ++f)
        for (auto i : folds[f]) fold_of[i] = static_cast<int>(f);

    double acc_sum = 0.0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        Dataset train;
        for (auto i : order)
            if (fold_of[i] != static_cast<int>(f)) train.push_back(data[i]);
        const auto model = train_smo(train, cfg);
        std::vector<int> pred, truth;
        for (auto i : folds[f]) {
            res.decisions[i] = decision(model, data[i].x);
            res.predictions[i] = res.decisions[i] > 0.0 ? 1 : -1;
            pred.push_back(res.predictions[i]);
            truth.push_back(data[i].label);
        }
        const auto cc = accumulate(pred, truth);
        res.folds.push_back(cc);
        acc_sum += static_cast<double>(cc.tp + cc.tn) / static_cast<double>(cc.total());
    }
    res.mean_accuracy = acc_sum / static_cast<double>(folds.size());
    return res;
}

struct ExponentRange {
    double lo = -8.0;
    double hi = 8.0;
};

/// lo, lo + step, ... <= hi, each rounded to 1e-9 so lattice points are reproducible.
inline std::vector<double> exponent_lattice(ExponentRange r, double step) {
    detail::require(step > 0.0, "exponent_lattice: step must be > 0");
    detail::require(r.hi >= r.lo, "exponent_lattice: empty range");
    const auto count = static_cast<std::size_t>(std::floor((r.hi - r.lo) / step + 1e-9)) + 1;
    std::vector<double> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(std::round((r.lo + static_cast<double>(i) * step) * 1e9) / 1e9);
    return out;
}

struct GridCell {
    double log2c = 0.0;
    double log2g = 0.0;
    double cv_accuracy = 0.0;
};

struct GridResult {
    double best_log2c = 0.0;
    double best_log2g = 0.0;
    double best_c = 0.0;
    double best_gamma = 0.0;
    double best_accuracy = -1.0;
    std::vector<GridCell> surface;  // C-major, then gamma
};

struct GridSpec {
    ExponentRange c_exponents;
    ExponentRange g_exponents;
    double step = 0.4;
    int folds = 5;
    std::uint64_t seed = 1;
    KernelSpec kernel;  // gamma overwritten per cell
    double tol = 1e-3;
};

/// Exhaustive (C, gamma) = (2^a, 2^b) search by stratified k-fold accuracy.
/// Ties prefer the smaller C, then the smaller gamma.
inline GridResult grid_search(const Dataset& data, const GridSpec& spec) {
    const auto cs = exponent_lattice(spec.c_exponents, spec.step);
    const auto gs = exponent_lattice(spec.g_exponents, spec.step);
    GridResult out;
    for (double a : cs) {
        for (double b : gs) {
            TrainConfig cfg;
            cfg.c = std::exp2(a);
            cfg.kernel = spec.kernel;
            cfg.kernel.gamma = std::exp2(b);
            cfg.tol = spec.tol;
            const double acc = cross_validate(data, cfg, spec.folds, spec.seed).mean_accuracy;
            out.surface.push_back({a, b, acc});
            // Lattice is visited in ascending (C, gamma), so strict '>' keeps the tie rule.
            if (acc > out.best_accuracy) {
                out.best_accuracy = acc;
                out.best_log2c = a;
                out.best_log2g = b;
            }
        }
    }
    out.best_c = std::exp2(out.best_log2c);
    out.best_gamma = std::exp2(out.best_log2g);
    return out;
}

inline std::string write_surface(const GridResult& g) {
    std::string out = "log2c,log2g,cv_accuracy\n";
    for (const auto& c : g.surface) out += format_real(c.log2c) + "," + format_real(c.log2g) + "," + format_real(c.cv_accuracy) + "\n";
    return out;
}

}  // namespace bccui
