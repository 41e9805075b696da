#include <gtest/gtest.h>

#include "asnet/eval.hpp"
#include "asnet/synth.hpp"
#include "asnet/tracker.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace asnet;

namespace {

std::uint8_t to_byte_for_test(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

// Single frame with a 64x64 target whose top-left is at (x, 140).
Frame scene(double x, double gain = 1.0) {
    SynthConfig c;
    c.frames = 1;
    c.target_x = x;
    c.target_y = 140;
    c.target_w = c.target_h = 64;
    c.noise = 0.0;
    Frame f = synth_group(c).frames[0][0];
    if (gain != 1.0)
        for (int r = 140; r < 204; ++r)
            for (int col = static_cast<int>(x); col < static_cast<int>(x) + 64; ++col)
                for (int ch = 0; ch < 3; ++ch) f.at(r, col, ch) = to_byte_for_test(f.at(r, col, ch) * gain);
    return f;
}

}  // namespace

TEST(Tracker, TemplateShape) {
    const BaseTracker tr;
    const DroneTrackerState s = tr.init(scene(200), {200, 140, 64, 64});
    EXPECT_EQ(s.template_features.height, 32);
    EXPECT_EQ(s.template_features.width, 32);
    EXPECT_EQ(s.template_features.channels, 4);
}

TEST(Tracker, InitRejectsInvalidBox) {
    const BaseTracker tr;
    EXPECT_THROW(tr.init(scene(200), {200, 140, 0, 64}), InvalidBoxError);
}

TEST(Tracker, UnchangedAppearanceGivesIdentityVariation) {
    TrackerConfig cfg;
    cfg.lambda_m = 0.0;
    const BaseTracker tr(cfg);
    const Frame f = scene(200);
    const DroneTrackerState s = tr.update_transforms(tr.init(f, {200, 140, 64, 64}), f);
    EXPECT_LT(oracle::max_abs_diff(s.variation.kernel.values, FeatureMap::impulse(32, 32, 4).values), 1e-6);
}

TEST(Tracker, ConstantFrameKeepsTransformsFinite) {
    const BaseTracker tr;
    const Frame f(320, 240, 3, 90);
    const DroneTrackerState s = tr.update_transforms(tr.init(f, {100, 80, 64, 64}), f);
    EXPECT_TRUE(s.variation.kernel.all_finite());
    EXPECT_TRUE(s.suppression.kernel.all_finite());
}

TEST(Tracker, AdaptedTemplateRespondsMoreOnBrightenedTarget) {
    const BaseTracker tr;
    const BoundingBox box{200, 140, 64, 64};
    const Frame f0 = scene(200), bright = scene(200, 1.2);
    const DroneTrackerState raw = tr.init(f0, box);
    const DroneTrackerState adapted = tr.update_transforms(raw, bright);
    // Same search features for both; only the template differs.
    DroneTrackerState search_state = raw;
    const SearchGeometry g = tr.default_geometry(box);
    const Spectrum search = tr.search_spectrum(search_state, bright, g);
    const double p_raw = tr.own_response_fn(raw)(g, search).peak_value;
    const double p_adapted = tr.own_response_fn(adapted)(g, search).peak_value;
    EXPECT_GT(p_adapted, p_raw);
}

TEST(Tracker, StaticSceneRecoversInitialBox) {
    TrackerConfig cfg;
    cfg.subpixel = false;
    const BaseTracker tr(cfg);
    const BoundingBox box{200, 140, 64, 64};
    const Frame f = scene(200);
    const DroneTrackerState s = tr.init(f, box);
    const ScaledResponse sr = tr.compute_own_response(s, f);
    EXPECT_EQ(sr.response.peak_row, sr.geometry.cells / 2);
    EXPECT_EQ(sr.response.peak_col, sr.geometry.cells / 2);
    EXPECT_EQ(tr.locate(s, sr).first, box);

    const BaseTracker sub;
    const auto [b, score] = sub.locate(s, sub.compute_own_response(s, f));
    EXPECT_NEAR(b.cx(), box.cx(), 0.5);
    EXPECT_NEAR(b.cy(), box.cy(), 0.5);
}

TEST(Tracker, TranslationMovesPeakByCells) {
    const BaseTracker tr;
    const BoundingBox box{200, 140, 64, 64};
    const DroneTrackerState s = tr.init(scene(200), box);
    const Frame moved = scene(208);
    const ScaledResponse sr = tr.compute_own_response(s, moved);
    EXPECT_EQ(sr.geometry.scale, 1.0);
    EXPECT_EQ(sr.response.peak_col - sr.geometry.cells / 2, 8 / tr.config().cell_size);
    EXPECT_EQ(sr.response.peak_row, sr.geometry.cells / 2);
    const BoundingBox b = tr.locate(s, sr).first;
    EXPECT_NEAR(b.cx(), box.cx() + 8, tr.config().cell_size);
    EXPECT_NEAR(b.cy(), box.cy(), tr.config().cell_size);
}

TEST(Tracker, FeaturelessSearchGivesFlatZeroMap) {
    const BaseTracker tr;
    const BoundingBox box{200, 140, 64, 64};
    const DroneTrackerState s = tr.init(scene(200), box);
    const Frame blank(640, 360, 3, 100);
    const ScaledResponse sr = tr.compute_own_response(s, blank);
    for (double v : sr.response.values) EXPECT_NEAR(v, 0.0, 1e-9);
    EXPECT_NEAR(sr.response.peak_value, 0.0, 1e-9);
}

TEST(Locate, CoordinateArithmetic) {
    TrackerConfig cfg;
    const BaseTracker tr(cfg);
    const BoundingBox box{100, 100, 64, 64};
    const DroneTrackerState s = tr.init(scene(200), box);
    const SearchGeometry g = tr.default_geometry(box);
    auto spike = [&](int dr, int dc) {
        std::vector<double> v(static_cast<std::size_t>(g.cells) * g.cells, 0.0);
        v[static_cast<std::size_t>(g.cells / 2 + dr) * g.cells + g.cells / 2 + dc] = 1.0;
        return ResponseMap(g.cells, g.cells, std::move(v));
    };
    EXPECT_EQ(tr.locate(s, {spike(0, 0), g}).first, box);
    const BoundingBox right = tr.locate(s, {spike(0, 1), g}).first;
    EXPECT_DOUBLE_EQ(right.cx(), box.cx() + 2.0);
    EXPECT_DOUBLE_EQ(right.cy(), box.cy());

    const SearchGeometry gs = tr.default_geometry(box, 1.025);
    const BoundingBox scaled = tr.locate(s, {spike(0, 0), gs}).first;
    EXPECT_DOUBLE_EQ(scaled.w, 64 * 1.025);
    EXPECT_DOUBLE_EQ(scaled.h, 64 * 1.025);
    EXPECT_DOUBLE_EQ(scaled.cx(), box.cx());
}

TEST(ResponseMapPeak, RowMajorTieBreak) {
    const ResponseMap flat(4, 5, std::vector<double>(20, 0.25));
    EXPECT_EQ(flat.peak_row, 0);
    EXPECT_EQ(flat.peak_col, 0);
    std::vector<double> v(20, 0.0);
    v[7] = v[12] = 1.0;
    const ResponseMap two(4, 5, v);
    EXPECT_EQ(two.peak_row, 1);
    EXPECT_EQ(two.peak_col, 2);
}

TEST(ResponseMapPeak, SubpixelVertex) {
    std::vector<double> v(25, 0.0);
    v[2 * 5 + 1] = 0.5;
    v[2 * 5 + 2] = 1.0;
    v[2 * 5 + 3] = 0.75;
    const auto [dr, dc] = ResponseMap(5, 5, v).subpixel_offset();
    EXPECT_DOUBLE_EQ(dr, 0.0);
    // Parabola through (-1, 0.5), (0, 1), (1, 0.75) peaks at 0.25 / 1.5.
    EXPECT_NEAR(dc, 0.5 * (0.5 - 0.75) / (0.5 - 2.0 + 0.75), 1e-15);
    EXPECT_NEAR(dc, 1.0 / 6.0, 1e-15);
}

TEST(TrackSequence, SingleFrame) {
    const BaseTracker tr;
    const std::vector<Frame> frames{scene(200)};
    const Trajectory t = tr.track_sequence(frames, {200, 140, 64, 64});
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(t[0].box, (BoundingBox{200, 140, 64, 64}));
    EXPECT_GT(t[0].score, 0.0);
}

TEST(TrackSequence, StaticFixtureStaysOnTarget) {
    const auto g = fixtures::render("static");
    const BaseTracker tr;
    const std::vector<Frame> frames(g.frames[0].begin(), g.frames[0].begin() + 50);
    const Trajectory t = tr.track_sequence(frames, *g.sequence.views[0].ground_truth[0]);
    for (std::size_t i = 0; i < t.size(); ++i) EXPECT_GE(iou(t[i].box, *g.sequence.views[0].ground_truth[0]), 0.9) << i;
}

TEST(TrackSequence, LinearMotionFixture) {
    const auto g = fixtures::render("linear-motion");
    const BaseTracker tr;
    const Trajectory t = tr.track_sequence(g.frames[0], *g.sequence.views[0].ground_truth[0]);
    EXPECT_GE(fixtures::mean_iou(t, g.sequence.views[0].ground_truth), 0.5);
}

TEST(TrackSequence, Deterministic) {
    const auto g = fixtures::render("jump");
    const BaseTracker tr;
    const std::vector<Frame> frames(g.frames[0].begin(), g.frames[0].begin() + 120);
    EXPECT_EQ(tr.track_sequence(frames, *g.sequence.views[0].ground_truth[0]),
              tr.track_sequence(frames, *g.sequence.views[0].ground_truth[0]));
}

TEST(TrackFrame, ScoreIsPeakOfUsedResponse) {
    const auto g = fixtures::render("jump");
    const BaseTracker tr;
    DroneTrackerState s = tr.init(g.frames[0][0], *g.sequence.views[0].ground_truth[0]);
    tr.seed_score(s);
    for (int t = 1; t < 110; ++t) {
        const FrameOutcome o = tr.step(s, std::make_shared<const Frame>(g.frames[0][t]));
        EXPECT_EQ(o.score, o.used.response.peak_value);
    }
}

TEST(TrackerConfig, Validation) {
    TrackerConfig c;
    c.template_size = 63;
    EXPECT_THROW(BaseTracker{c}, ParameterError);
    c = {};
    c.pad_factor = 0.5;
    EXPECT_THROW(BaseTracker{c}, ParameterError);
    c = {};
    c.scale_steps.clear();
    EXPECT_THROW(BaseTracker{c}, ParameterError);
    c = {};
    c.extractor = "cnn";
    EXPECT_THROW(BaseTracker{c}, ParameterError);
}
