#include "mosaic/canvas.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace mosaic;

namespace {

Placement place(const BBox& source, double scale, int x, int y, int camera = 0) {
    Placement p;
    p.camera_id = camera;
    p.source = source;
    p.scale = scale;
    p.x = x;
    p.y = y;
    p.w = static_cast<int>(std::lround(source.width() * scale));
    p.h = static_cast<int>(std::lround(source.height() * scale));
    return p;
}

CanvasLayout layout_of(std::vector<Placement> ps, int canvas = 640) {
    CanvasLayout l;
    l.canvas = canvas;
    l.placements = std::move(ps);
    return l;
}

Detection det(const BBox& b, double conf = 0.9, std::string label = "person") {
    Detection d;
    d.bbox = b;
    d.confidence = conf;
    d.label = std::move(label);
    return d;
}

// Pixel-centre bilinear sample with edge clamping.
double reference_sample(const GrayFrame& f, double sx, double sy) {
    sx = std::clamp(sx, 0.0, double(f.width - 1));
    sy = std::clamp(sy, 0.0, double(f.height - 1));
    const int x0 = int(sx), y0 = int(sy);
    const int x1 = std::min(x0 + 1, f.width - 1), y1 = std::min(y0 + 1, f.height - 1);
    const double ax = sx - x0, ay = sy - y0;
    return (1 - ax) * (1 - ay) * f.at(x0, y0) + ax * (1 - ay) * f.at(x1, y0) + (1 - ax) * ay * f.at(x0, y1) +
           ax * ay * f.at(x1, y1);
}

}  // namespace

TEST(Resample, CheckerDownscaledToMean) {
    GrayFrame f(2, 2);
    f.at(0, 0) = 0;
    f.at(1, 0) = 200;
    f.at(0, 1) = 200;
    f.at(1, 1) = 0;
    const GrayFrame out = resample_bilinear(f, {0, 0, 2, 2}, 1, 1);
    EXPECT_EQ(out.at(0, 0), 100);
}

TEST(Resample, MatchesReferenceSampler) {
    std::mt19937_64 rng(21);
    GrayFrame f(64, 48);
    for (auto& v : f.data) v = static_cast<std::uint8_t>(rng() % 256);
    for (int trial = 0; trial < 50; ++trial) {
        const BBox box = BBox::from_xywh(double(rng() % 20), double(rng() % 16), 20 + double(rng() % 40), 16 + double(rng() % 30));
        const int ow = 5 + int(rng() % 60), oh = 5 + int(rng() % 60);
        const GrayFrame out = resample_bilinear(f, box, ow, oh);
        for (int v = 0; v < oh; ++v)
            for (int u = 0; u < ow; ++u) {
                const double sx = box.x_min + (u + 0.5) * box.width() / ow - 0.5;
                const double sy = box.y_min + (v + 0.5) * box.height() / oh - 0.5;
                ASSERT_NEAR(out.at(u, v), reference_sample(f, std::clamp(sx, box.x_min, box.x_max - 1), std::clamp(sy, box.y_min, box.y_max - 1)), 0.5 + 1e-9);
            }
    }
}

TEST(Compose, IdentityPlacement) {
    std::mt19937_64 rng(22);
    GrayFrame src(64, 64);
    for (auto& v : src.data) v = static_cast<std::uint8_t>(rng() % 256);
    const std::vector<GrayFrame> sources{src};
    const CanvasFrame f = compose(layout_of({place({0, 0, 64, 64}, 1.0, 0, 0)}, 64), sources);
    EXPECT_EQ(f.raster, src);
}

TEST(Compose, EmptyLayoutIsGutter) {
    const CanvasFrame f = compose(layout_of({}, 32), {});
    EXPECT_EQ(f.raster, GrayFrame(32, 32, kGutterValue));
}

TEST(Compose, MissingSourceThrows) {
    EXPECT_ANY_THROW(compose(layout_of({place({0, 0, 8, 8}, 1.0, 0, 0, 3)}, 32), {}));
}

TEST(TranslateBack, WorkedExample) {
    const CanvasFrame f = describe(layout_of({place({1000, 500, 1256, 756}, 0.5, 0, 0)}));
    const std::vector<Detection> dets{det({32, 32, 64, 64})};
    const auto r = translate_back(dets, f);
    ASSERT_EQ(r.per_camera.at(0).size(), 1u);
    EXPECT_EQ(r.per_camera.at(0)[0].bbox, (BBox{1064, 564, 1128, 628}));
    EXPECT_DOUBLE_EQ(r.per_camera.at(0)[0].render_scale, 0.5);
}

TEST(TranslateBack, UnitScaleShiftsOnly) {
    const CanvasFrame f = describe(layout_of({place({300, 200, 400, 300}, 1.0, 0, 0, 2)}));
    const std::vector<Detection> dets{det({10, 20, 30, 40})};
    const auto r = translate_back(dets, f);
    EXPECT_EQ(r.per_camera.at(2)[0].bbox, (BBox{310, 220, 330, 240}));
}

TEST(TranslateBack, GutterDetectionDropped) {
    const CanvasFrame f = describe(layout_of({place({0, 0, 100, 100}, 1.0, 0, 0)}));
    const std::vector<Detection> dets{det({300, 300, 320, 320})};
    const auto r = translate_back(dets, f);
    EXPECT_EQ(r.dropped, 1);
    EXPECT_TRUE(r.per_camera.empty());
}

TEST(BinAt, HalfOpen) {
    const CanvasFrame f = describe(layout_of({place({0, 0, 100, 100}, 1.0, 0, 0), place({0, 0, 100, 100}, 1.0, 100, 0)}));
    EXPECT_EQ(bin_at(f, {99.9, 50}), 0);
    EXPECT_EQ(bin_at(f, {100, 50}), 1);
    EXPECT_EQ(bin_at(f, {200, 50}), -1);
}

TEST(TranslateBack, RoundTripFuzz) {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 10000; ++i) {
        const BBox src = BBox::from_xywh(std::floor(u(rng) * 3000), std::floor(u(rng) * 1500), 32 + std::floor(u(rng) * 400),
                                         32 + std::floor(u(rng) * 400));
        Placement p;
        p.source = src;
        p.w = 16 + 2 * int(u(rng) * 150);
        p.h = 16 + 2 * int(u(rng) * 150);
        p.x = int(u(rng) * (640 - p.w));
        p.y = int(u(rng) * (640 - p.h));
        p.scale = p.h / src.height();
        const CanvasFrame f = describe(layout_of({p}));
        const double x0 = src.x_min + u(rng) * src.width(), y0 = src.y_min + u(rng) * src.height();
        const BBox truth{x0, y0, x0 + u(rng) * (src.x_max - x0), y0 + u(rng) * (src.y_max - y0)};
        const std::vector<Detection> dets{det(f.mapping[0].to_canvas(truth))};
        const auto r = translate_back(dets, f);
        ASSERT_EQ(r.dropped, 0);
        const BBox back = r.per_camera.at(0)[0].bbox;
        ASSERT_NEAR(back.x_min, truth.x_min, 0.5);
        ASSERT_NEAR(back.y_min, truth.y_min, 0.5);
        ASSERT_NEAR(back.x_max, truth.x_max, 0.5);
        ASSERT_NEAR(back.y_max, truth.y_max, 0.5);
    }
}

TEST(Dedupe, OverlappingTilesCollapse) {
    std::map<int, std::vector<Detection>> in;
    in[0] = {det({100, 100, 140, 180}, 0.9), det({101, 99, 141, 181}, 0.8)};
    const auto out = dedupe(in);
    ASSERT_EQ(out.at(0).size(), 1u);
    EXPECT_DOUBLE_EQ(out.at(0)[0].confidence, 0.9);
}

TEST(Dedupe, DistinctObjectsAndClassesSurvive) {
    std::map<int, std::vector<Detection>> in;
    in[0] = {det({0, 0, 10, 10}), det({50, 50, 60, 60}), det({0, 0, 10, 10}, 0.5, "car")};
    in[1] = {det({0, 0, 10, 10})};
    const auto out = dedupe(in);
    EXPECT_EQ(out.at(0).size(), 3u);
    EXPECT_EQ(out.at(1).size(), 1u);
}

TEST(Dedupe, SurvivorsSeparated) {
    std::mt19937_64 rng(24);
    std::uniform_real_distribution<double> pos(0, 200), side(5, 60);
    std::map<int, std::vector<Detection>> in;
    for (int i = 0; i < 200; ++i)
        in[int(rng() % 3)].push_back(det(BBox::from_xywh(pos(rng), pos(rng), side(rng), side(rng)), double(rng() % 100) / 100,
                                         rng() % 2 ? "a" : "b"));
    for (const auto& [cam, dets] : dedupe(in))
        for (std::size_t i = 0; i < dets.size(); ++i)
            for (std::size_t j = i + 1; j < dets.size(); ++j)
                if (dets[i].label == dets[j].label) {
                    ASSERT_LE(iou(dets[i].bbox, dets[j].bbox), 0.45);
                }
}
