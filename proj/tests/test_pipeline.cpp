#include <gtest/gtest.h>

#include "support.hpp"

using namespace bccui;
namespace fs = std::filesystem;

namespace {

PipelineConfig small_config() {
    PipelineConfig c;
    c.c_exponents = {-1, 3};
    c.g_exponents = {-2, 2};
    c.grid_step = 2;
    c.folds = 3;
    return c;
}

fs::path small_dataset(const std::string& name) {
    const auto dir = testing_support::scratch_dir(name);
    write_phantom_dataset(generate_dataset(4, 4, PhantomSpec{}, 11), dir / "data");
    return dir;
}

}  // namespace

TEST(Config, JsonRoundTrip) {
    auto c = small_config();
    c.grow_threshold = 33.5;
    c.kernel = KernelKind::sigmoid;
    c.features.glcm.angles = {GlcmAngle::deg90};
    c.seed = 42;
    const auto text = config_to_json(c);
    EXPECT_EQ(config_to_json(config_from_json(text)), text);
    EXPECT_EQ(config_to_json(config_from_json("{\"version\":1}")), config_to_json(PipelineConfig{}));
}

TEST(Config, RejectsBadInput) {
    EXPECT_THROW(config_from_json("{\"version\":2}"), ParseError);
    EXPECT_THROW(config_from_json("{\"version\":1,\"features\":{\"glcm_angles\":[30]}}"), Error);
    EXPECT_THROW(config_from_json("{\"version\":1,\"svm\":{\"kernel\":\"poly\"}}"), Error);
    EXPECT_THROW(config_from_json("[1,"), ParseError);
}

TEST(Csv, AnnotationsRoundTrip) {
    const std::vector<Annotation> rows{{"a.pgm", 3, 4, 1}, {"b.pgm", 0, 9, -1}, {"c.pgm", 7, 7, 0}};
    const auto text = write_annotations(rows);
    EXPECT_EQ(write_annotations(read_annotations(text)), text);
    EXPECT_THROW(read_annotations("image,x,y,label\n"), ParseError);
    try {
        read_annotations("image,seed_x,seed_y,label\na.pgm,1,2,benign\nb.pgm,1,2,maybe\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.offset(), 3u);
    }
}

TEST(Csv, FeaturesRoundTripExactly) {
    FeatureRow r{"case_000", {}, 1};
    for (std::size_t i = 0; i < kFeatureCount; ++i) r.features.values[i] = 1.0 / (3.0 + double(i)) * (i % 2 ? -1 : 1);
    const std::vector<FeatureRow> rows{r, {"case_001", {}, -1}, {"case_002", {}, 0}};
    const auto text = write_feature_csv(rows);
    const auto back = read_feature_csv(text);
    ASSERT_EQ(back.size(), 3u);
    EXPECT_EQ(back[0].features.values, r.features.values);
    EXPECT_EQ(write_feature_csv(back), text);
    const auto data = to_dataset(back);
    ASSERT_EQ(data.size(), 2u);
    EXPECT_EQ(data[0].id, "case_000");
}

TEST(Pipeline, RunsAndIsDeterministic) {
    const auto dir = small_dataset("pipeline_det");
    const auto cfg = small_config();
    const auto a = run_pipeline(dir / "data" / "annotations.csv", cfg, dir / "out1");
    const auto b = run_pipeline(dir / "data" / "annotations.csv", cfg, dir / "out2");
    EXPECT_EQ(a.cases, 8u);
    EXPECT_EQ(a.succeeded, 8u);
    EXPECT_TRUE(a.errors.empty());
    ASSERT_TRUE(a.grid && a.auc);
    EXPECT_EQ(a.grid->surface.size(), 9u);
    for (const char* f : {"features.csv", "grid.csv", "report.csv", "roc.csv", "model.json", "errors.csv", "config.json",
                          "masks/case_000.pgm"})
        EXPECT_EQ(read_file(dir / "out1" / f), read_file(dir / "out2" / f)) << f;
    for (int i = 0; i < 8; ++i) {
        const auto mask = image_to_mask(load_pgm(dir / "out1" / "masks" / (case_id(std::size_t(i)) + ".pgm")));
        const auto truth = image_to_mask(load_pgm(dir / "data" / ("truth_" + case_id(std::size_t(i)) + ".pgm")));
        EXPECT_GE(dice(mask, truth), 0.85);
    }
}

TEST(Pipeline, RecordsPerCaseErrorsAndContinues) {
    const auto dir = small_dataset("pipeline_err");
    auto ann = read_annotations(read_file(dir / "data" / "annotations.csv"));
    ann.push_back({"missing.pgm", 5, 5, 1});
    ann.push_back({"case_000.pgm", 5000, 5, -1});
    write_file(dir / "data" / "annotations.csv", write_annotations(ann));
    const auto s = run_pipeline(dir / "data" / "annotations.csv", small_config(), dir / "out");
    EXPECT_EQ(s.cases, 10u);
    EXPECT_EQ(s.succeeded, 8u);
    ASSERT_EQ(s.errors.size(), 2u);
    EXPECT_EQ(s.errors[0].case_id, "missing");
    EXPECT_EQ(s.errors[0].stage, "load");
    EXPECT_TRUE(s.auc.has_value());
    const auto errors = read_file(dir / "out" / "errors.csv");
    EXPECT_NE(errors.find("missing,load,"), std::string::npos);
}

TEST(Pipeline, EvaluateDatasetMatchesCrossValidation) {
    Dataset d;
    for (int i = 0; i < 12; ++i) d.push_back({{double(i % 2) * 3 + 0.1 * i, 1.0}, i % 2 ? 1 : -1, "r" + std::to_string(100 + i)});
    TrainConfig cfg;
    const auto run = evaluate_dataset(d, cfg, 3, 1);
    EXPECT_EQ(run.cv.decisions, cross_validate(d, cfg, 3, 1).decisions);
    EXPECT_EQ(*run.evaluation.accuracy, 1.0);
    EXPECT_EQ(run.roc.auc, 1.0);
}
