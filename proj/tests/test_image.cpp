#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

#include "support.hpp"

using namespace bccui;
using testing_support::random_image;

namespace {

std::string bytes(std::initializer_list<int> v) {
    std::string s;
    for (int b : v) s.push_back(static_cast<char>(b));
    return s;
}

// Median of the clamped (2r+1)^2 window by full sort.
GrayImage median_oracle(const GrayImage& img, int r) {
    GrayImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            std::vector<int> w;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) w.push_back(img.clamped(x + dx, y + dy));
            std::sort(w.begin(), w.end());
            out(x, y) = static_cast<std::uint8_t>(w[w.size() / 2]);
        }
    return out;
}

double bin8_variance(const GrayImage& img) {
    std::array<double, 8> h{};
    for (auto v : img.pixels()) h[v / 32] += 1.0;
    const double mean = std::accumulate(h.begin(), h.end(), 0.0) / 8.0;
    double var = 0.0;
    for (double c : h) var += (c - mean) * (c - mean);
    return var / 8.0;
}

}  // namespace

TEST(Pgm, ReadsSmallestLegalImage) {
    const auto img = read_pgm("P5 2 1 255 " + bytes({0, 255}));
    EXPECT_EQ(img.width(), 2);
    EXPECT_EQ(img.height(), 1);
    EXPECT_EQ(img(0, 0), 0);
    EXPECT_EQ(img(1, 0), 255);
}

TEST(Pgm, WritesCanonicalHeader) {
    GrayImage img(1, 1, std::uint8_t{7});
    EXPECT_EQ(write_pgm(img), "P5\n1 1\n255\n" + bytes({7}));
}

TEST(Pgm, FullFramePayloadSize) {
    const auto out = write_pgm(GrayImage(580, 775));
    const std::string header = "P5\n580 775\n255\n";
    ASSERT_EQ(out.size(), header.size() + 449500);
    EXPECT_EQ(out.substr(0, header.size()), header);
    EXPECT_TRUE(std::all_of(out.begin() + static_cast<long>(header.size()), out.end(), [](char c) { return c == 0; }));
}

TEST(Pgm, RoundTripRandomImages) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 50; ++i) {
        const int w = 1 + static_cast<int>(rng() % 40), h = 1 + static_cast<int>(rng() % 40);
        const auto img = random_image(w, h, rng);
        const auto enc = write_pgm(img);
        EXPECT_EQ(read_pgm(enc), img);
        EXPECT_EQ(write_pgm(read_pgm(enc)), enc);
    }
}

TEST(Pgm, CommentsAndWhitespaceNormalize) {
    const auto img = read_pgm("P5\n# made by hand\n2  1\n# max\n255\n" + bytes({3, 4}));
    EXPECT_EQ(write_pgm(img), "P5\n2 1\n255\n" + bytes({3, 4}));
}

TEST(Pgm, RejectsAsciiMagic) { EXPECT_THROW(read_pgm("P2 1 1 255 7"), ParseError); }

TEST(Pgm, RejectsWideMaxval) {
    try {
        read_pgm("P5 1 1 256 " + bytes({0, 0}));
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.offset(), 7u);
    }
}

TEST(Pgm, TruncatedPayloadNamesOffset) {
    const std::string data = "P5 3 1 255 " + bytes({1, 2});
    try {
        read_pgm(data);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.offset(), data.size());
    }
}

TEST(Pgm, LabelRasterRoundTrip) {
    const std::vector<std::uint16_t> s{0, 1, 300, 65535, 4096, 7};
    const auto r = read_pgm16(write_pgm16(3, 2, s));
    EXPECT_EQ(r.width, 3);
    EXPECT_EQ(r.height, 2);
    EXPECT_EQ(r.samples, s);
}

TEST(Equalize, ConstantImageMapsToZero) {
    const auto out = histogram_equalize(GrayImage(5, 4, std::uint8_t{40}));
    EXPECT_EQ(out, GrayImage(5, 4, std::uint8_t{0}));
}

TEST(Equalize, TwoLevelImageUnchanged) {
    const GrayImage img(2, 2, std::vector<std::uint8_t>{0, 255, 0, 255});
    EXPECT_EQ(histogram_equalize(img), img);
}

TEST(Equalize, MatchesCdfFormula) {
    // counts: 10 -> 1, 20 -> 2, 30 -> 1; N = 4, cdf_min = 1
    const GrayImage img(4, 1, std::vector<std::uint8_t>{20, 10, 30, 20});
    const auto out = histogram_equalize(img);
    EXPECT_EQ(out(1, 0), 0);     // (1-1)/3
    EXPECT_EQ(out(0, 0), 170);   // round(255*2/3)
    EXPECT_EQ(out(2, 0), 255);   // 3/3
}

TEST(Equalize, MonotoneAndNearlyIdempotent) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 40; ++i) {
        auto img = random_image(24, 24, rng, 0, 60 + static_cast<int>(rng() % 190));
        const auto once = histogram_equalize(img);
        const auto twice = histogram_equalize(once);
        const auto a = img.pixels();
        const auto b = once.pixels();
        for (std::size_t p = 0; p < a.size(); ++p)
            for (std::size_t q = 0; q < a.size(); q += 7) {
                if (a[p] <= a[q]) {
                    ASSERT_LE(b[p], b[q]);
                }
            }
        for (std::size_t p = 0; p < a.size(); ++p)
            EXPECT_LE(std::abs(int(once.pixels()[p]) - int(twice.pixels()[p])), 1);
    }
}

TEST(Equalize, FlattensSkewedHistograms) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        GrayImage img(32, 32);
        const double power = 1.5 + 2.0 * u(rng);
        for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(255.0 * std::pow(u(rng), power));
        EXPECT_LE(bin8_variance(histogram_equalize(img)), bin8_variance(img)) << "image " << i;
    }
}

TEST(Median, ConstantImageUnchanged) {
    const GrayImage img(9, 7, std::uint8_t{77});
    EXPECT_EQ(denoise(img), img);
}

TEST(Median, RemovesImpulse) {
    GrayImage img(5, 5);
    img(2, 2) = 255;
    EXPECT_EQ(denoise(img, 1), GrayImage(5, 5));
}

TEST(Median, MatchesSortOracle) {
    std::mt19937_64 rng(8);
    for (int r = 1; r <= 2; ++r)
        for (int i = 0; i < 10; ++i) {
            const auto img = random_image(32, 32, rng);
            EXPECT_EQ(median_filter(img, r), median_oracle(img, r));
        }
}

TEST(Unsharp, ZeroAmountIsIdentity) {
    std::mt19937_64 rng(2);
    const auto img = random_image(16, 16, rng);
    EXPECT_EQ(unsharp(img, 0.0, 2), img);
}

TEST(Unsharp, ConstantImageIsIdentity) {
    const GrayImage img(8, 8, std::uint8_t{99});
    EXPECT_EQ(unsharp(img, 3.5, 1), img);
}

TEST(Unsharp, StepEdgeHandEvaluated) {
    // blur row: 50, 100, 150, 200 -> out = v + (v - blur)
    const GrayImage img(4, 1, std::vector<std::uint8_t>{50, 50, 200, 200});
    EXPECT_EQ(unsharp(img, 1.0, 1), GrayImage(4, 1, std::vector<std::uint8_t>{50, 0, 250, 200}));
    const GrayImage hard(4, 1, std::vector<std::uint8_t>{0, 0, 255, 255});
    const auto out = unsharp(hard, 1.0, 1);
    EXPECT_EQ(out, hard);  // overshoot clamped
    EXPECT_GE(out(2, 0) - out(1, 0), hard(2, 0) - hard(1, 0));
}

TEST(PseudoLab, Endpoints) {
    const auto p = to_pseudolab(GrayImage(3, 1, std::vector<std::uint8_t>{0, 255, 51}));
    EXPECT_EQ(p(0, 0).l, 0.0);
    EXPECT_EQ(p(1, 0).l, 100.0);
    EXPECT_EQ(p(2, 0).l, 20.0);
    for (const auto& px : p.px) {
        EXPECT_EQ(px.a, 0.0);
        EXPECT_EQ(px.b, 0.0);
    }
}

TEST(PseudoLab, LinearAndInvertible) {
    for (int v = 0; v < 256; ++v) {
        EXPECT_NEAR(lightness_to_intensity(intensity_to_lightness(v)), v, 1e-12);
        EXPECT_NEAR(intensity_to_lightness(v), v * intensity_to_lightness(1), 1e-12);
    }
}

TEST(Preprocess, DefaultIsEqualizeThenMedian) {
    std::mt19937_64 rng(4);
    const auto img = random_image(20, 18, rng, 30, 140);
    EXPECT_EQ(preprocess(img), median_filter(histogram_equalize(img), 1));
}

TEST(Preprocess, FlagsDisableStages) {
    std::mt19937_64 rng(6);
    const auto img = random_image(12, 12, rng);
    PreprocessOptions opt;
    opt.denoise_radius = 0;
    EXPECT_EQ(preprocess(img, opt), histogram_equalize(img));
    opt.equalize = false;
    EXPECT_EQ(preprocess(img, opt), img);
    opt.unsharp_amount = 1.0;
    EXPECT_EQ(preprocess(img, opt), unsharp(img, 1.0, 1));
}
