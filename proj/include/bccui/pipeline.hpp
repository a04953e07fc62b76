#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bccui/error.hpp"
#include "bccui/features.hpp"
#include "bccui/image.hpp"
#include "bccui/io.hpp"
#include "bccui/metrics.hpp"
#include "bccui/phantom.hpp"
#include "bccui/roi.hpp"
#include "bccui/superpixel.hpp"
#include "bccui/svm.hpp"

namespace bccui {

inline constexpr int kConfigVersion = 1;

struct PipelineConfig {
    PreprocessOptions preprocess;
    SlicParams slic;
    std::optional<double> grow_threshold;  // unset: threshold_fraction x intensity range
    double threshold_fraction = 0.15;
    FeatureOptions features;
    KernelKind kernel = KernelKind::rbf;
    double sigmoid_c0 = 0.0;
    double tol = 1e-3;
    int max_passes = 10000;
    ExponentRange c_exponents;
    ExponentRange g_exponents;
    double grid_step = 0.4;
    int folds = 5;
    std::uint64_t seed = 1;
};

inline int angle_degrees(GlcmAngle a) {
    switch (a) {
        case GlcmAngle::deg0: return 0;
        case GlcmAngle::deg45: return 45;
        case GlcmAngle::deg90: return 90;
        case GlcmAngle::deg135: return 135;
    }
    return 0;
}

inline GlcmAngle angle_from_degrees(int d) {
    switch (d) {
        case 0: return GlcmAngle::deg0;
        case 45: return GlcmAngle::deg45;
        case 90: return GlcmAngle::deg90;
        case 135: return GlcmAngle::deg135;
        default: throw InvalidArgument("GLCM angle must be one of 0, 45, 90, 135");
    }
}

inline std::string config_to_json(const PipelineConfig& c) {
    nlohmann::ordered_json j;
    j["version"] = kConfigVersion;
    j["preprocess"] = {{"equalize", c.preprocess.equalize},
                       {"denoise_radius", c.preprocess.denoise_radius},
                       {"unsharp_amount", c.preprocess.unsharp_amount},
                       {"unsharp_radius", c.preprocess.unsharp_radius}};
    j["slic"] = {{"k", c.slic.k}, {"compactness", c.slic.compactness}, {"max_iters", c.slic.max_iters}, {"conv_eps", c.slic.conv_eps}};
    j["grow"] = {{"threshold", c.grow_threshold ? nlohmann::ordered_json(*c.grow_threshold) : nlohmann::ordered_json(nullptr)},
                 {"threshold_fraction", c.threshold_fraction}};
    std::vector<int> angles;
    for (auto a : c.features.glcm.angles) angles.push_back(angle_degrees(a));
    j["features"] = {{"glcm_levels", c.features.glcm.levels},
                     {"glcm_distance", c.features.glcm.distance},
                     {"glcm_angles", angles},
                     {"posterior_fraction", c.features.posterior_fraction}};
    j["svm"] = {{"kernel", to_string(c.kernel)}, {"c0", c.sigmoid_c0}, {"tol", c.tol}, {"max_passes", c.max_passes}};
    j["grid"] = {{"log2c_min", c.c_exponents.lo},
                 {"log2c_max", c.c_exponents.hi},
                 {"log2g_min", c.g_exponents.lo},
                 {"log2g_max", c.g_exponents.hi},
                 {"step", c.grid_step}};
    j["folds"] = c.folds;
    j["seed"] = c.seed;
    return j.dump(2) + "\n";
}

/// Missing keys keep their defaults; unknown versions are rejected.
inline PipelineConfig config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("config: ") + e.what(), e.byte);
    }
    PipelineConfig c;
    try {
        if (j.value("version", 0) != kConfigVersion)
            throw ParseError("config: unsupported version (expected " + std::to_string(kConfigVersion) + ")", 0);
        auto get = [](const nlohmann::json& obj, const char* key, auto& dst) {
            if (obj.contains(key)) dst = obj.at(key).get<std::decay_t<decltype(dst)>>();
        };
        if (j.contains("preprocess")) {
            const auto& p = j["preprocess"];
            get(p, "equalize", c.preprocess.equalize);
            get(p, "denoise_radius", c.preprocess.denoise_radius);
            get(p, "unsharp_amount", c.preprocess.unsharp_amount);
            get(p, "unsharp_radius", c.preprocess.unsharp_radius);
        }
        if (j.contains("slic")) {
            const auto& s = j["slic"];
            get(s, "k", c.slic.k);
            get(s, "compactness", c.slic.compactness);
            get(s, "max_iters", c.slic.max_iters);
            get(s, "conv_eps", c.slic.conv_eps);
        }
        if (j.contains("grow")) {
            const auto& g = j["grow"];
            if (g.contains("threshold") && !g["threshold"].is_null()) c.grow_threshold = g["threshold"].get<double>();
            get(g, "threshold_fraction", c.threshold_fraction);
        }
        if (j.contains("features")) {
            const auto& f = j["features"];
            get(f, "glcm_levels", c.features.glcm.levels);
            get(f, "glcm_distance", c.features.glcm.distance);
            if (f.contains("glcm_angles")) {
                c.features.glcm.angles.clear();
                for (int d : f["glcm_angles"].get<std::vector<int>>()) c.features.glcm.angles.push_back(angle_from_degrees(d));
            }
            get(f, "posterior_fraction", c.features.posterior_fraction);
        }
        if (j.contains("svm")) {
            const auto& s = j["svm"];
            if (s.contains("kernel")) c.kernel = parse_kernel_kind(s["kernel"].get<std::string>());
            get(s, "c0", c.sigmoid_c0);
            get(s, "tol", c.tol);
            get(s, "max_passes", c.max_passes);
        }
        if (j.contains("grid")) {
            const auto& g = j["grid"];
            get(g, "log2c_min", c.c_exponents.lo);
            get(g, "log2c_max", c.c_exponents.hi);
            get(g, "log2g_min", c.g_exponents.lo);
            get(g, "log2g_max", c.g_exponents.hi);
            get(g, "step", c.grid_step);
        }
        get(j, "folds", c.folds);
        get(j, "seed", c.seed);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("config: ") + e.what(), 0);
    }
    return c;
}

inline GridSpec grid_spec(const PipelineConfig& c) {
    GridSpec g;
    g.c_exponents = c.c_exponents;
    g.g_exponents = c.g_exponents;
    g.step = c.grid_step;
    g.folds = c.folds;
    g.seed = c.seed;
    g.kernel = {c.kernel, 1.0, c.sigmoid_c0};
    g.tol = c.tol;
    return g;
}

// ---------------------------------------------------------------------------
// Single case

struct Segmentation {
    GrayImage preprocessed;
    SuperpixelLabeling labeling;
    RoiMask roi;
    double threshold = 0.0;
};

inline Segmentation segment(const GrayImage& raw, Point seed, const PipelineConfig& cfg) {
    Segmentation s;
    s.preprocessed = preprocess(raw, cfg.preprocess);
    s.labeling = slic(s.preprocessed, cfg.slic);
    s.threshold = cfg.grow_threshold ? *cfg.grow_threshold : default_grow_threshold(s.preprocessed, cfg.threshold_fraction);
    s.roi = grow(s.preprocessed, s.labeling, {seed.x, seed.y, SeedSource::annotated_center}, {s.threshold});
    return s;
}

// ---------------------------------------------------------------------------
// Batch

struct CaseError {
    std::string case_id;
    std::string stage;
    std::string message;
};

struct PipelineSummary {
    std::size_t cases = 0;
    std::size_t succeeded = 0;
    std::vector<CaseError> errors;
    std::optional<GridResult> grid;
    std::optional<CvResult> cv;
    std::optional<double> auc;
    std::optional<Evaluation> evaluation;
};

inline std::string write_errors(const std::vector<CaseError>& errors) {
    std::string out = "case_id,stage,message\n";
    for (const auto& e : errors) {
        std::string msg = e.message;
        for (auto& ch : msg)
            if (ch == ',' || ch == '\n') ch = ';';
        out += e.case_id + "," + e.stage + "," + msg + "\n";
    }
    return out;
}

/// Cross-validated evaluation of a dataset at fixed hyperparameters.
struct EvaluationRun {
    CvResult cv;
    RocCurve roc;
    Evaluation evaluation;
};

inline EvaluationRun evaluate_dataset(const Dataset& data, const TrainConfig& cfg, int folds, std::uint64_t seed) {
    EvaluationRun r;
    r.cv = cross_validate(data, cfg, folds, seed);
    std::vector<int> truth;
    for (const auto& s : data) truth.push_back(s.label);
    r.roc = roc(r.cv.decisions, truth);
    ConfusionCounts total;
    for (const auto& f : r.cv.folds) total += f;
    r.evaluation = evaluate(total);
    return r;
}

/// Runs segmentation and feature extraction on every annotated image, then
/// grid search, cross-validated evaluation and a final model on all labeled
/// cases. Writes features.csv, grid.csv, report.csv, roc.csv, model.json,
/// errors.csv, config.json and masks/<case>.pgm under out_dir.
inline PipelineSummary run_pipeline(const std::filesystem::path& annotations_path, const PipelineConfig& cfg,
                                    const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    const auto annotations = read_annotations(read_file(annotations_path));
    const fs::path base = annotations_path.parent_path();
    fs::create_directories(out_dir / "masks");
    write_file(out_dir / "config.json", config_to_json(cfg));

    PipelineSummary sum;
    std::vector<FeatureRow> rows;
    std::vector<std::string> seen;
    for (const auto& a : annotations) {
        ++sum.cases;
        const std::string id = fs::path(a.image).stem().string();
        if (std::find(seen.begin(), seen.end(), id) != seen.end()) {
            sum.errors.push_back({id, "load", "duplicate case id"});
            continue;
        }
        seen.push_back(id);
        std::string stage = "load";
        try {
            const auto raw = load_pgm(base / a.image);
            if (!raw.contains(a.seed_x, a.seed_y)) throw InvalidArgument("seed outside image");
            stage = "segment";
            const auto seg = segment(raw, {a.seed_x, a.seed_y}, cfg);
            save_pgm(out_dir / "masks" / (id + ".pgm"), mask_to_image(seg.roi.mask));
            stage = "features";
            FeatureRow row{id, extract_all(seg.preprocessed, seg.roi, cfg.features), a.label};
            rows.push_back(std::move(row));
            ++sum.succeeded;
        } catch (const std::exception& e) {
            sum.errors.push_back({id, stage, e.what()});
        }
    }
    write_file(out_dir / "features.csv", write_feature_csv(rows));

    try {
        const auto data = to_dataset(rows);
        validate_dataset(data);
        sum.grid = grid_search(data, grid_spec(cfg));
        write_file(out_dir / "grid.csv", write_surface(*sum.grid));

        TrainConfig tc;
        tc.c = sum.grid->best_c;
        tc.kernel = {cfg.kernel, sum.grid->best_gamma, cfg.sigmoid_c0};
        tc.tol = cfg.tol;
        tc.max_passes = cfg.max_passes;
        auto run = evaluate_dataset(data, tc, cfg.folds, cfg.seed);
        sum.auc = run.roc.auc;
        sum.evaluation = run.evaluation;
        write_file(out_dir / "report.csv", write_report(run.cv.folds, run.roc.auc));
        write_file(out_dir / "roc.csv", write_roc(run.roc));
        sum.cv = std::move(run.cv);
        write_file(out_dir / "model.json", save_model(train_smo(data, tc)));
    } catch (const std::exception& e) {
        sum.errors.push_back({"*", "train", e.what()});
    }
    write_file(out_dir / "errors.csv", write_errors(sum.errors));
    return sum;
}

// ---------------------------------------------------------------------------
// Phantom dataset on disk

/// Writes <id>.pgm, truth_<id>.pgm and annotations.csv into dir.
inline void write_phantom_dataset(const std::vector<PhantomCase>& cases, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<Annotation> ann;
    for (const auto& c : cases) {
        save_pgm(dir / (c.id + ".pgm"), c.image);
        save_pgm(dir / ("truth_" + c.id + ".pgm"), mask_to_image(c.truth));
        ann.push_back({c.id + ".pgm", c.seed.x, c.seed.y, c.label});
    }
    write_file(dir / "annotations.csv", write_annotations(ann));
}

}  // namespace bccui
