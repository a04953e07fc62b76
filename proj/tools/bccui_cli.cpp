// Command-line front end for the ultrasound ROI / feature / SVM pipeline.
//
// Exit status: 0 ok, 1 usage, 2 input parse error, 3 case-level failures.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bccui/bccui.hpp"

namespace fs = std::filesystem;
using namespace bccui;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitParse = 2;
constexpr int kExitCaseFailures = 3;

Point parse_seed(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw InvalidArgument("--seed expects X,Y");
    try {
        return {std::stoi(s.substr(0, comma)), std::stoi(s.substr(comma + 1))};
    } catch (const std::exception&) {
        throw InvalidArgument("--seed expects integer X,Y");
    }
}

Dataset load_dataset(const std::string& path) { return to_dataset(read_feature_csv(read_file(path))); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Breast ultrasound ROI extraction, feature extraction and SVM classification"};
    app.require_subcommand(1);

    // preprocess
    auto* pre = app.add_subcommand("preprocess", "Histogram equalization, median denoise, optional unsharp mask");
    std::string pre_in, pre_out;
    bool pre_no_denoise = false, pre_no_equalize = false;
    double pre_unsharp = 0.0;
    int pre_radius = 1;
    pre->add_option("input", pre_in, "Input PGM")->required();
    pre->add_option("output", pre_out, "Output PGM")->required();
    pre->add_flag("--no-denoise", pre_no_denoise, "Skip the median filter");
    pre->add_flag("--no-equalize", pre_no_equalize, "Skip histogram equalization");
    pre->add_option("--unsharp", pre_unsharp, "Unsharp mask gain (0 = off)");
    pre->add_option("--radius", pre_radius, "Median window radius")->check(CLI::PositiveNumber);

    // segment
    auto* seg = app.add_subcommand("segment", "SLIC superpixels + region growing from a seed");
    std::string seg_in, seg_seed, seg_mask, seg_contour, seg_labels, seg_centers;
    int seg_k = 50;
    double seg_m = 10.0;
    std::optional<double> seg_threshold;
    bool seg_raw = false;
    seg->add_option("input", seg_in, "Input PGM")->required();
    seg->add_option("--seed", seg_seed, "Seed point X,Y")->required();
    seg->add_option("--k", seg_k, "Target superpixel count")->check(CLI::PositiveNumber);
    seg->add_option("--compactness", seg_m, "SLIC compactness");
    seg->add_option("--threshold", seg_threshold, "Growth threshold in gray levels (default 0.15 x range)");
    seg->add_option("--out-mask", seg_mask, "Mask PGM (0/255)")->required();
    seg->add_option("--out-contour", seg_contour, "Boundary text file")->required();
    seg->add_option("--out-labels", seg_labels, "16-bit label map PGM");
    seg->add_option("--out-centers", seg_centers, "Superpixel centers text file");
    seg->add_flag("--no-preprocess", seg_raw, "Segment the input as given");

    // features
    auto* feat = app.add_subcommand("features", "Extract the nine ROI features");
    std::string feat_in, feat_mask, feat_out, feat_label = "unknown", feat_name;
    bool feat_raw = false;
    feat->add_option("input", feat_in, "Input PGM")->required();
    feat->add_option("mask", feat_mask, "Mask PGM (nonzero = ROI)")->required();
    feat->add_option("--out", feat_out, "Feature CSV")->required();
    feat->add_option("--label", feat_label, "benign | malignant | unknown");
    feat->add_option("--name", feat_name, "Case id (default: input file stem)");
    feat->add_flag("--raw", feat_raw, "Measure on the input as given instead of the preprocessed image");

    // train
    auto* train = app.add_subcommand("train", "Train an SVM on a feature CSV");
    std::string train_csv, train_out, train_kernel = "rbf";
    double train_c = 1.0, train_gamma = 1.0, train_c0 = 0.0, train_tol = 1e-3;
    train->add_option("features", train_csv, "Feature CSV")->required();
    train->add_option("--c", train_c, "Penalty C")->required();
    train->add_option("--gamma", train_gamma, "Kernel gamma")->required();
    train->add_option("--kernel", train_kernel, "rbf | sigmoid | linear");
    train->add_option("--c0", train_c0, "Sigmoid offset");
    train->add_option("--tol", train_tol, "KKT tolerance");
    train->add_option("--out", train_out, "Model file")->required();

    // gridsearch
    auto* grid = app.add_subcommand("gridsearch", "Search (C, gamma) on a log2 lattice by k-fold CV");
    std::string grid_csv, grid_out, grid_kernel = "rbf";
    GridSpec gspec;
    grid->add_option("features", grid_csv, "Feature CSV")->required();
    grid->add_option("--folds", gspec.folds, "Fold count");
    grid->add_option("--seed", gspec.seed, "Fold RNG seed");
    grid->add_option("--log2c-min", gspec.c_exponents.lo);
    grid->add_option("--log2c-max", gspec.c_exponents.hi);
    grid->add_option("--log2g-min", gspec.g_exponents.lo);
    grid->add_option("--log2g-max", gspec.g_exponents.hi);
    grid->add_option("--step", gspec.step, "Exponent step");
    grid->add_option("--kernel", grid_kernel, "rbf | sigmoid");
    grid->add_option("--out", grid_out, "Surface CSV")->required();

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "k-fold evaluation at a model's hyperparameters");
    std::string eval_model, eval_csv, eval_out, eval_roc;
    int eval_folds = 5;
    std::uint64_t eval_seed = 1;
    eval->add_option("model", eval_model, "Model file")->required();
    eval->add_option("features", eval_csv, "Feature CSV")->required();
    eval->add_option("--folds", eval_folds, "Fold count");
    eval->add_option("--seed", eval_seed, "Fold RNG seed");
    eval->add_option("--out", eval_out, "Report CSV")->required();
    eval->add_option("--roc", eval_roc, "ROC points CSV");

    // phantom
    auto* ph = app.add_subcommand("phantom", "Generate a labeled synthetic dataset");
    std::size_t ph_benign = 62, ph_malignant = 88;
    std::uint64_t ph_seed = 1;
    double ph_sigma = 0.05;
    std::string ph_dir;
    ph->add_option("--benign", ph_benign, "Benign case count");
    ph->add_option("--malignant", ph_malignant, "Malignant case count");
    ph->add_option("--seed", ph_seed, "RNG seed");
    ph->add_option("--sigma", ph_sigma, "Multiplicative speckle sigma");
    ph->add_option("--out-dir", ph_dir, "Output directory")->required();

    // pipeline
    auto* pipe = app.add_subcommand("pipeline", "End-to-end batch run over an annotation CSV");
    std::string pipe_ann, pipe_cfg, pipe_dir;
    std::optional<int> pipe_folds;
    std::optional<std::uint64_t> pipe_seed;
    pipe->add_option("--annotations", pipe_ann, "Annotation CSV")->required();
    pipe->add_option("--config", pipe_cfg, "Config file (JSON); defaults when omitted");
    pipe->add_option("--out-dir", pipe_dir, "Output directory")->required();
    pipe->add_option("--folds", pipe_folds, "Override fold count");
    pipe->add_option("--seed", pipe_seed, "Override RNG seed");

    // config
    auto* conf = app.add_subcommand("config", "Write the default pipeline config");
    std::string conf_out;
    conf->add_option("--out", conf_out, "Output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*pre) {
            PreprocessOptions opt;
            opt.equalize = !pre_no_equalize;
            opt.denoise_radius = pre_no_denoise ? 0 : pre_radius;
            opt.unsharp_amount = pre_unsharp;
            save_pgm(pre_out, preprocess(load_pgm(pre_in), opt));
        } else if (*seg) {
            PipelineConfig cfg;
            cfg.slic.k = seg_k;
            cfg.slic.compactness = seg_m;
            cfg.grow_threshold = seg_threshold;
            if (seg_raw) {
                cfg.preprocess.equalize = false;
                cfg.preprocess.denoise_radius = 0;
            }
            const auto s = segment(load_pgm(seg_in), parse_seed(seg_seed), cfg);
            save_pgm(seg_mask, mask_to_image(s.roi.mask));
            write_file(seg_contour, write_contour(s.roi.boundary));
            if (!seg_labels.empty()) write_file(seg_labels, write_label_map(s.labeling));
            if (!seg_centers.empty()) write_file(seg_centers, write_centers(s.labeling));
            std::printf("superpixels %zu, threshold %.3f, area %zu px, perimeter %.3f\n", s.labeling.count(), s.threshold,
                        s.roi.area_px, s.roi.perimeter);
        } else if (*feat) {
            const auto raw = load_pgm(feat_in);
            const auto img = feat_raw ? raw : preprocess(raw);
            const auto mask = image_to_mask(load_pgm(feat_mask));
            if (mask.width != img.width() || mask.height != img.height())
                throw InvalidArgument("mask dimensions differ from image");
            FeatureRow row{feat_name.empty() ? fs::path(feat_in).stem().string() : feat_name,
                           extract_all(img, roi_from_mask(mask)), parse_label(feat_label, 0)};
            write_file(feat_out, write_feature_csv({row}));
        } else if (*train) {
            TrainConfig tc;
            tc.c = train_c;
            tc.kernel = {parse_kernel_kind(train_kernel), train_gamma, train_c0};
            tc.tol = train_tol;
            const auto model = train_smo(load_dataset(train_csv), tc);
            write_file(train_out, save_model(model));
            std::printf("support vectors %zu, bias %.6g\n", model.support_vectors.size(), model.bias);
        } else if (*grid) {
            gspec.kernel.kind = parse_kernel_kind(grid_kernel);
            const auto res = grid_search(load_dataset(grid_csv), gspec);
            write_file(grid_out, write_surface(res));
            std::printf("best log2c %.4g log2g %.4g  C %.6g gamma %.6g  CV accuracy %.4f%%\n", res.best_log2c,
                        res.best_log2g, res.best_c, res.best_gamma, res.best_accuracy * 100.0);
        } else if (*eval) {
            const auto model = load_model(read_file(eval_model));
            TrainConfig tc;
            tc.c = model.c;
            tc.kernel = model.kernel;
            tc.normalize = model.normalized;
            const auto run = evaluate_dataset(load_dataset(eval_csv), tc, eval_folds, eval_seed);
            write_file(eval_out, write_report(run.cv.folds, run.roc.auc));
            if (!eval_roc.empty()) write_file(eval_roc, write_roc(run.roc));
            std::printf("accuracy %s%%  AUC %.4f\n", format_percent(run.evaluation.accuracy).c_str(), run.roc.auc);
        } else if (*ph) {
            PhantomSpec base;
            base.speckle_sigma = ph_sigma;
            write_phantom_dataset(generate_dataset(ph_benign, ph_malignant, base, ph_seed), ph_dir);
        } else if (*pipe) {
            PipelineConfig cfg = pipe_cfg.empty() ? PipelineConfig{} : config_from_json(read_file(pipe_cfg));
            if (pipe_folds) cfg.folds = *pipe_folds;
            if (pipe_seed) cfg.seed = *pipe_seed;
            const auto sum = run_pipeline(pipe_ann, cfg, pipe_dir);
            std::printf("cases %zu, succeeded %zu, errors %zu\n", sum.cases, sum.succeeded, sum.errors.size());
            if (sum.grid)
                std::printf("best C %.6g gamma %.6g  CV accuracy %.4f%%\n", sum.grid->best_c, sum.grid->best_gamma,
                            sum.grid->best_accuracy * 100.0);
            if (sum.evaluation && sum.auc)
                std::printf("accuracy %s%%  AUC %.4f\n", format_percent(sum.evaluation->accuracy).c_str(), *sum.auc);
            return sum.errors.empty() ? kExitOk : kExitCaseFailures;
        } else if (*conf) {
            write_file(conf_out, config_to_json(PipelineConfig{}));
        }
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    }
    return kExitOk;
}
