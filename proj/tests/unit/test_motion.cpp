#include "mosaic/motion.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace mosaic;

namespace {

GrayFrame square_at(int w, int h, int x, int y, int side, bool textured = false) {
    GrayFrame f(w, h, 0);
    for (int yy = y; yy < y + side; ++yy)
        for (int xx = x; xx < x + side; ++xx) f.at(xx, yy) = textured && ((xx - x) / 2 + (yy - y) / 2) % 2 ? 100 : 255;
    return f;
}

void expect_box_near(const BBox& got, const BBox& want, double tol) {
    EXPECT_NEAR(got.x_min, want.x_min, tol);
    EXPECT_NEAR(got.y_min, want.y_min, tol);
    EXPECT_NEAR(got.x_max, want.x_max, tol);
    EXPECT_NEAR(got.y_max, want.y_max, tol);
}

std::vector<Correspondence> transformed_grid(const Affine2D& t) {
    std::vector<Correspondence> out;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 5; ++j) {
            const Point2 p{20.0 + 37.0 * i, 15.0 + 41.0 * j};
            out.push_back({p, t.apply(p)});
        }
    return out;
}

}  // namespace

TEST(FrameDiff, IdenticalFramesAreEmpty) {
    const GrayFrame f = square_at(64, 64, 10, 10, 20);
    for (int thr : {1, 25, 200}) EXPECT_TRUE(frame_diff_masks(f, f, thr, 1).empty());
}

TEST(FrameDiff, SeparatedMoveGivesTwoBoxes) {
    auto boxes = frame_diff_masks(square_at(100, 50, 10, 10, 20), square_at(100, 50, 40, 10, 20));
    ASSERT_EQ(boxes.size(), 2u);
    std::sort(boxes.begin(), boxes.end(), [](const BBox& a, const BBox& b) { return a.x_min < b.x_min; });
    expect_box_near(boxes[0], {10, 10, 30, 30}, 1.0);
    expect_box_near(boxes[1], {40, 10, 60, 30}, 1.0);
}

TEST(FrameDiff, OverlappingMoveGivesUnion) {
    // A flat square only changes along its leading and trailing edges, so the square carries a texture.
    const auto boxes = frame_diff_masks(square_at(100, 50, 10, 10, 20, true), square_at(100, 50, 15, 10, 20, true));
    ASSERT_EQ(boxes.size(), 1u);
    expect_box_near(boxes[0], {10, 10, 35, 30}, 1.0);
}

TEST(FrameDiff, SmallBlobsFiltered) {
    const auto boxes = frame_diff_masks(GrayFrame(40, 40, 0), square_at(40, 40, 5, 5, 3), 25, 64);
    EXPECT_TRUE(boxes.empty());
}

TEST(PartialAffine, PureTranslation) {
    const auto m = transformed_grid(Affine2D::translation(5, 3));
    const Affine2D t = estimate_partial_affine(m);
    EXPECT_NEAR(t.scale, 1.0, 1e-9);
    EXPECT_NEAR(t.rotation, 0.0, 1e-9);
    EXPECT_NEAR(t.tx, 5.0, 1e-9);
    EXPECT_NEAR(t.ty, 3.0, 1e-9);
}

TEST(PartialAffine, Rotation) {
    const auto m = transformed_grid({1.0, std::numbers::pi / 6, 0, 0});
    EXPECT_NEAR(estimate_partial_affine(m).rotation, std::numbers::pi / 6, 1e-6);
}

TEST(PartialAffine, NoiselessRecovery) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> s(0.8, 1.25), r(-0.5, 0.5), tr(-20, 20);
    for (int i = 0; i < 100; ++i) {
        const Affine2D want{s(rng), r(rng), tr(rng), tr(rng)};
        for (bool ransac : {false, true}) {
            const Affine2D got = estimate_partial_affine(transformed_grid(want), ransac);
            ASSERT_NEAR(got.scale, want.scale, 1e-6);
            ASSERT_NEAR(got.rotation, want.rotation, 1e-6);
            ASSERT_NEAR(got.tx, want.tx, 1e-6);
            ASSERT_NEAR(got.ty, want.ty, 1e-6);
        }
    }
}

TEST(PartialAffine, RansacRejectsOutliers) {
    std::mt19937_64 rng(10);
    std::normal_distribution<double> noise(0.0, 0.2);
    std::uniform_real_distribution<double> pos(0, 500), gross(-80, 80);
    std::vector<Correspondence> m;
    for (int i = 0; i < 100; ++i) {
        const Point2 p{pos(rng), pos(rng)};
        if (i % 10 == 0)
            m.push_back({p, {p.x + gross(rng), p.y + gross(rng)}});
        else
            m.push_back({p, {p.x + 5 + noise(rng), p.y + 3 + noise(rng)}});
    }
    const Affine2D t = estimate_partial_affine(m, true);
    EXPECT_NEAR(t.tx, 5.0, 0.1);
    EXPECT_NEAR(t.ty, 3.0, 0.1);
}

TEST(Kalman, HandComputedUpdate) {
    // Per axis, P0 = 10 I; predicted P = [[20.01, 10], [10, 10.01]]; innovation variance 21.01.
    CameraTracker tracker;
    tracker.add_track(BBox::from_xywh(45, 45, 10, 10), TrackStatus::active, {5, 0});
    Track t = tracker.tracks()[0];
    const KalmanParams p;
    kalman_predict(t, p);
    EXPECT_NEAR(t.state(0), 55.0, 1e-12);
    EXPECT_NEAR(t.covariance(0, 0), 20.01, 1e-12);
    EXPECT_NEAR(t.covariance(0, 2), 10.0, 1e-12);
    kalman_update(t, {57.0, 50.0}, p);
    EXPECT_NEAR(t.state(0), 55.0 + 2.0 * 20.01 / 21.01, 1e-9);
    EXPECT_NEAR(t.state(2), 5.0 + 2.0 * 10.0 / 21.01, 1e-9);
    EXPECT_NEAR(t.state(1), 50.0, 1e-12);
    EXPECT_NEAR(t.state(3), 0.0, 1e-12);
    EXPECT_NEAR(t.covariance(0, 0), 20.01 - 20.01 * 20.01 / 21.01, 1e-9);
}

TEST(Tracker, FirstObservationSpawnsTrack) {
    CameraTracker tracker;
    const std::vector<BBox> obs{{10, 10, 30, 30}};
    const auto r = tracker.step(obs);
    EXPECT_EQ(r.spawned, 1);
    ASSERT_EQ(tracker.tracks().size(), 1u);
    EXPECT_EQ(tracker.tracks()[0].status, TrackStatus::active);
    EXPECT_EQ(r.mask_boxes, obs);
}

TEST(Tracker, MatchedTrackKeepsVelocity) {
    CameraTracker tracker;
    tracker.add_track(BBox::from_xywh(45, 45, 10, 10), TrackStatus::active, {5, 0});
    const std::vector<BBox> obs{BBox::from_xywh(50, 45, 10, 10)};
    const auto r = tracker.step(obs);
    EXPECT_EQ(r.matched, 1);
    EXPECT_NEAR(tracker.tracks()[0].velocity().x, 5.0, 1e-9);
    EXPECT_NEAR(tracker.tracks()[0].velocity().y, 0.0, 1e-9);
}

TEST(Tracker, StationaryTrackRetained) {
    CameraTracker tracker;
    const BBox b{100, 100, 130, 140};
    tracker.add_track(b, TrackStatus::stationary);
    const auto r = tracker.step({});
    ASSERT_EQ(tracker.tracks().size(), 1u);
    EXPECT_EQ(tracker.tracks()[0].status, TrackStatus::stationary);
    EXPECT_EQ(r.mask_boxes, std::vector<BBox>{b});
}

TEST(Tracker, LostTrackBecomesLastSeen) {
    CameraTracker tracker;
    tracker.add_track({0, 0, 10, 10});
    tracker.step({});
    EXPECT_EQ(tracker.tracks()[0].status, TrackStatus::last_seen);
}

TEST(Tracker, EgoWarpShiftsTracks) {
    CameraTracker tracker;
    tracker.add_track({0, 0, 10, 10});
    const std::vector<BBox> obs{{20, 0, 30, 10}};
    tracker.step(obs, Affine2D::translation(20, 0));
    EXPECT_EQ(tracker.tracks().size(), 1u);
}

TEST(Tracker, NoSilentDropsAndNoShrinking) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> pos(0, 400);
    CameraTracker tracker;
    std::size_t prev_tracks = 0;
    for (int step = 0; step < 1000; ++step) {
        std::vector<BBox> obs(rng() % 5);
        for (auto& b : obs) b = BBox::from_xywh(pos(rng), pos(rng), 20, 30);
        const auto r = tracker.step(obs);
        for (const auto& o : obs) {
            const auto n = std::count(r.mask_boxes.begin(), r.mask_boxes.end(), o);
            ASSERT_GE(n, 1);
        }
        ASSERT_EQ(static_cast<std::size_t>(r.matched + r.spawned), obs.size());
        ASSERT_GE(tracker.tracks().size(), prev_tracks);
        prev_tracks = tracker.tracks().size();
        if (step % 50 == 49) {
            tracker.clear();
            prev_tracks = 0;
        }
    }
}

TEST(ClassifyStationary, ConstantPosition) {
    const std::vector<Point2> h(10, Point2{5, 5});
    EXPECT_EQ(classify_stationary(h, 20), TrackStatus::stationary);
}

TEST(ClassifyStationary, TenStepsOfFive) {
    std::vector<Point2> h;
    for (int i = 0; i <= 10; ++i) h.push_back({5.0 * i, 0});
    EXPECT_EQ(classify_stationary(h, 20), TrackStatus::active);
}

TEST(ClassifyStationary, JustBelowThreshold) {
    const std::vector<Point2> h{{0, 0}, {10, 0}, {19.9, 0}};
    EXPECT_EQ(classify_stationary(h, 20), TrackStatus::stationary);
}
