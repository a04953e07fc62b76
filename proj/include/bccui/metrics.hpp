#pragma once

#include <algorithm>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bccui/error.hpp"

namespace bccui {

/// Positive class is malignant (+1).
struct ConfusionCounts {
    std::size_t tp = 0, tn = 0, fp = 0, fn = 0;

    std::size_t total() const noexcept { return tp + tn + fp + fn; }
    ConfusionCounts& operator+=(const ConfusionCounts& o) {
        tp += o.tp;
        tn += o.tn;
        fp += o.fp;
        fn += o.fn;
        return *this;
    }
    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

inline ConfusionCounts accumulate(std::span<const int> predicted, std::span<const int> truth) {
    detail::require(predicted.size() == truth.size(), "accumulate: prediction and truth lengths differ");
    ConfusionCounts c;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool pos = predicted[i] > 0, actual = truth[i] > 0;
        if (pos && actual) ++c.tp;
        else if (!pos && !actual) ++c.tn;
        else if (pos) ++c.fp;
        else ++c.fn;
    }
    return c;
}

/// Indices with a zero denominator are left empty.
struct Evaluation {
    std::optional<double> accuracy;
    std::optional<double> sensitivity;
    std::optional<double> specificity;
    std::optional<double> positive_accuracy;  // PPV
    std::optional<double> negative_accuracy;  // NPV
};

inline Evaluation evaluate(const ConfusionCounts& c) {
    auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
        if (den == 0) return std::nullopt;
        return static_cast<double>(num) / static_cast<double>(den);
    };
    return {ratio(c.tp + c.tn, c.total()), ratio(c.tp, c.tp + c.fn), ratio(c.tn, c.tn + c.fp),
            ratio(c.tp, c.tp + c.fp), ratio(c.tn, c.tn + c.fn)};
}

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

struct RocCurve {
    std::vector<RocPoint> points;
    double auc = 0.0;
};

/// Threshold sweep over the distinct decision values, highest first, with
/// +inf and -inf sentinels. Cases with tied decisions flip together.
inline RocCurve roc(std::span<const double> decisions, std::span<const int> truth) {
    detail::require(decisions.size() == truth.size(), "roc: decision and truth lengths differ");
    const auto n_pos = static_cast<std::size_t>(std::count_if(truth.begin(), truth.end(), [](int t) { return t > 0; }));
    const std::size_t n_neg = truth.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) throw InvalidArgument("roc: both classes must be present");

    std::vector<std::size_t> order(decisions.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return decisions[a] > decisions[b]; });

    RocCurve curve;
    curve.points.push_back({0.0, 0.0});
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        const double t = decisions[order[i]];
        while (i < order.size() && decisions[order[i]] == t) {
            if (truth[order[i]] > 0) ++tp;
            else ++fp;
            ++i;
        }
        curve.points.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                                static_cast<double>(tp) / static_cast<double>(n_pos)});
    }
    curve.points.push_back({1.0, 1.0});
    curve.points.erase(std::unique(curve.points.begin(), curve.points.end()), curve.points.end());

    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const auto& a = curve.points[i - 1];
        const auto& b = curve.points[i];
        curve.auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
    }
    return curve;
}

inline std::string format_percent(const std::optional<double>& v) {
    if (!v) return "undefined";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", *v * 100.0);
    return buf;
}

inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// Per-fold count rows, a totals row, then the five indices (percent and full precision).
inline std::string write_report(const std::vector<ConfusionCounts>& folds, std::optional<double> auc = std::nullopt) {
    std::string out = "fold,tp,tn,fp,fn\n";
    ConfusionCounts total;
    auto row = [](const std::string& name, const ConfusionCounts& c) {
        return name + "," + std::to_string(c.tp) + "," + std::to_string(c.tn) + "," + std::to_string(c.fp) + "," +
               std::to_string(c.fn) + "\n";
    };
    for (std::size_t i = 0; i < folds.size(); ++i) {
        out += row(std::to_string(i + 1), folds[i]);
        total += folds[i];
    }
    out += row("total", total);
    const auto e = evaluate(total);
    out += "index,percent,value\n";
    auto idx = [&](const char* name, const std::optional<double>& v) {
        out += std::string(name) + "," + format_percent(v) + "," + (v ? format_real(*v) : "undefined") + "\n";
    };
    idx("Accuracy", e.accuracy);
    idx("Sensitivity", e.sensitivity);
    idx("Specificity", e.specificity);
    idx("Positive Accuracy", e.positive_accuracy);
    idx("Negative Accuracy", e.negative_accuracy);
    if (auc) idx("AUC", *auc);
    return out;
}

inline std::string write_roc(const RocCurve& curve) {
    std::string out = "fpr,tpr\n";
    for (const auto& p : curve.points) out += format_real(p.fpr) + "," + format_real(p.tpr) + "\n";
    return out;
}

}  // namespace bccui
