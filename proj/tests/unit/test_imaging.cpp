#include <gtest/gtest.h>

#include <random>

#include "asnet/imaging.hpp"
#include "oracles.hpp"

using namespace asnet;

namespace {

Frame random_frame(std::mt19937_64& rng, int w, int h, int c = 3) {
    std::uniform_int_distribution<int> d(0, 255);
    Frame f(w, h, c);
    for (auto& p : f.pixels) p = static_cast<std::uint8_t>(d(rng));
    return f;
}

Patch to_patch(const Frame& f) {
    Patch p(f.width, f.height, f.channels);
    for (std::size_t i = 0; i < f.pixels.size(); ++i) p.pixels[i] = f.pixels[i];
    return p;
}

}  // namespace

TEST(ExtractPatch, IdentityCropAtUnitPad) {
    std::mt19937_64 rng(3);
    const Frame f = random_frame(rng, 100, 100);
    const Patch p = extract_patch(f, {40, 40, 20, 20}, 1.0, 20);
    for (int r = 0; r < 20; ++r)
        for (int c = 0; c < 20; ++c)
            for (int ch = 0; ch < 3; ++ch) ASSERT_FLOAT_EQ(p.at(r, c, ch), f.at(40 + r, 40 + c, ch));
}

TEST(ExtractPatch, CornerBoxReplicatesBorder) {
    std::mt19937_64 rng(4);
    const Frame f = random_frame(rng, 50, 40);
    const Patch p = extract_patch(f, BoundingBox::from_center(0, 0, 10, 10), 2.0, 20);
    // The top-left quadrant lies outside the frame and replicates pixel (0, 0).
    for (int r = 0; r < 9; ++r)
        for (int c = 0; c < 9; ++c) EXPECT_FLOAT_EQ(p.at(r, c, 0), f.at(0, 0, 0));
}

TEST(ExtractPatch, ConstantFrameStaysConstant) {
    const Frame f(64, 48, 3, 128);
    const Patch p = extract_patch(f, {10.3, 7.7, 13.1, 9.4}, 2.5, 37);
    for (float v : p.pixels) EXPECT_FLOAT_EQ(v, 128.0f);
}

TEST(ExtractPatch, FuzzStaysInsideFrameBuffer) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> pos(-300.0, 300.0), size(0.5, 200.0), pad(1.0, 6.0);
    const Frame f = random_frame(rng, 31, 17);
    for (int i = 0; i < 500; ++i) {
        const Patch p = extract_patch(f, {pos(rng), pos(rng), size(rng), size(rng)}, pad(rng), 16);
        for (float v : p.pixels) ASSERT_TRUE(v >= 0.0f && v <= 255.0f);
    }
}

TEST(ExtractPatch, RejectsBadArguments) {
    const Frame f(10, 10, 1);
    EXPECT_THROW(extract_patch(f, {0, 0, 0, 5}, 1.0, 4), InvalidBoxError);
    EXPECT_THROW(extract_patch(f, {0, 0, 5, 5}, 0.5, 4), ParameterError);
    EXPECT_THROW(extract_patch(f, {0, 0, 5, 5}, 1.0, 0), ParameterError);
}

TEST(Embed, ConstantPatchGivesZeroFeatures) {
    const GrayGradientExtractor ex(2);
    const FeatureMap m = ex.embed(Patch(16, 16, 3, 77.0f));
    for (double v : m.values) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(Embed, UnitCellKeepsPatchShape) {
    const GrayGradientExtractor ex(1);
    const FeatureMap m = ex.embed(Patch(13, 9, 1, 5.0f));
    EXPECT_EQ(m.height, 9);
    EXPECT_EQ(m.width, 13);
    EXPECT_EQ(m.channels, 4);
}

TEST(Embed, StepEdgeGradientMatchesFiniteDifference) {
    Patch p(12, 8, 1, 20.0f);
    for (int r = 0; r < 8; ++r)
        for (int c = 6; c < 12; ++c) p.at(r, c) = 220.0f;
    const GrayGradientExtractor ex(1);
    const FeatureMap raw = ex.pooled_cells(p);
    // Central difference of the normalized intensity on the raw patch.
    for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 12; ++c) {
            const int cp = std::max(c - 1, 0), cn = std::min(c + 1, 11);
            const double want = 0.5 * (p.at(r, cn) - p.at(r, cp)) / 255.0;
            EXPECT_NEAR(raw.at(1, r, c), want, 1e-6);
        }
    const FeatureMap m = ex.embed(p);
    int best = 0;
    for (int c = 1; c < 12; ++c)
        if (m.at(1, 3, c) > m.at(1, 3, best)) best = c;
    EXPECT_TRUE(best == 5 || best == 6);
}

TEST(Embed, CellShiftShiftsFeatureMap) {
    std::mt19937_64 rng(8);
    const Frame big = random_frame(rng, 40, 40, 1);
    const int cell = 2;
    Patch a(32, 32, 1), b(32, 32, 1);
    for (int r = 0; r < 32; ++r)
        for (int c = 0; c < 32; ++c) {
            a.at(r, c) = big.at(r + 4, c + 4);
            b.at(r, c) = big.at(r + 4, c + 4 + cell);
        }
    const GrayGradientExtractor ex(cell);
    const FeatureMap fa = ex.pooled_cells(a), fb = ex.pooled_cells(b);
    for (int ch = 0; ch < 4; ++ch)
        for (int r = 1; r < 15; ++r)
            for (int c = 1; c < 14; ++c) EXPECT_NEAR(fb.at(ch, r, c), fa.at(ch, r, c + 1), 1e-9);
}

TEST(Embed, FuzzOutputIsFinite) {
    std::mt19937_64 rng(9);
    const GrayGradientExtractor ex(2);
    for (int i = 0; i < 50; ++i) {
        Patch p = to_patch(random_frame(rng, 16, 16));
        EXPECT_TRUE(ex.embed(p).all_finite());
    }
    EXPECT_TRUE(ex.embed(Patch(8, 8, 3, 255.0f)).all_finite());
    EXPECT_THROW(ex.embed(Patch(7, 8, 1)), ShapeError);
}

TEST(CosineWindow, DegenerateIsOne) {
    const FeatureMap w = cosine_window(1, 1);
    EXPECT_DOUBLE_EQ(w.at(0, 0, 0), 1.0);
}

TEST(CosineWindow, SymmetricUnderFlips) {
    const FeatureMap w = cosine_window(4, 4);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
            EXPECT_DOUBLE_EQ(w.at(0, r, c), w.at(0, 3 - r, c));
            EXPECT_DOUBLE_EQ(w.at(0, r, c), w.at(0, r, 3 - c));
        }
}

TEST(CosineWindow, MatchesDirectHannProduct) {
    const FeatureMap w = cosine_window(8, 8);
    for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c) EXPECT_NEAR(w.at(0, r, c), oracle::hann(r, 8) * oracle::hann(c, 8), 1e-12);
}

TEST(CosineWindow, ValuesInUnitInterval) {
    for (int h : {1, 2, 5, 16})
        for (int w : {1, 3, 8}) {
            const FeatureMap m = cosine_window(h, w);
            for (double v : m.values) EXPECT_TRUE(v >= 0.0 && v <= 1.0);
        }
}

TEST(GaussianWeightMap, CentreIsOne) {
    EXPECT_DOUBLE_EQ(gaussian_weight_map(5, 5, 1.0).at(0, 2, 2), 1.0);
}

TEST(GaussianWeightMap, CornerMatchesFormula) {
    EXPECT_NEAR(gaussian_weight_map(5, 5, 1.0).at(0, 0, 0), std::exp(-4.0), 1e-15);
}

TEST(GaussianWeightMap, ValuesInHalfOpenUnitInterval) {
    const FeatureMap m = gaussian_weight_map(16, 12, 2.0);
    for (double v : m.values) EXPECT_TRUE(v > 0.0 && v <= 1.0);
    EXPECT_THROW(gaussian_weight_map(4, 4, 0.0), ParameterError);
}
