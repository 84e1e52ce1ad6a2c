#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "mosaic/geometry.hpp"
#include "mosaic/image.hpp"

namespace mosaic {

/// Bounding boxes of changed regions between two frames: |cur - prev| > threshold,
/// one 3x3 dilation, 4-connected components with at least `min_area` pixels.
std::vector<BBox> frame_diff_masks(const GrayFrame& prev, const GrayFrame& cur, int threshold = 25,
                                   int min_area = 64);

struct Correspondence {
    Point2 from;
    Point2 to;
};

struct RansacOptions {
    int iterations = 100;
    double inlier_threshold = 2.0;
    std::uint64_t seed = 0xa11ce;
};

/// Least-squares 4-DOF similarity fit; with `ransac`, the best 2-point
/// hypothesis is refit on its inliers.
Affine2D estimate_partial_affine(std::span<const Correspondence> matches, bool ransac = false,
                                 const RansacOptions& opts = {});

enum class TrackStatus { active, stationary, last_seen };

const char* to_string(TrackStatus s);

struct KalmanParams {
    double process_noise = 0.01;
    double measurement_noise = 1.0;
    double initial_covariance = 10.0;
};

/// Constant-velocity centroid track. State is (x, y, vx, vy) in pixels and pixels/frame.
struct Track {
    int id = 0;
    BBox bbox;
    TrackStatus status = TrackStatus::active;
    int frames_since_update = 0;
    Eigen::Vector4d state = Eigen::Vector4d::Zero();
    Eigen::Matrix4d covariance = Eigen::Matrix4d::Identity();

    Point2 centroid() const { return {state(0), state(1)}; }
    Point2 velocity() const { return {state(2), state(3)}; }
};

void kalman_predict(Track& t, const KalmanParams& p);
void kalman_update(Track& t, Point2 measured, const KalmanParams& p);

struct TrackerConfig {
    double gate = 50.0;
    KalmanParams kalman;
};

struct TrackerStepResult {
    std::vector<BBox> mask_boxes;
    int matched = 0;
    int spawned = 0;
};

/// Per-camera multi-object tracker that turns motion observations into the
/// list of mask boxes for one frame.
class CameraTracker {
public:
    explicit CameraTracker(TrackerConfig cfg = {}) : cfg_(cfg) {}

    TrackerStepResult step(std::span<const BBox> observations, const std::optional<Affine2D>& ego = std::nullopt);

    /// Adds a track with the given box; returns its id.
    int add_track(const BBox& box, TrackStatus status = TrackStatus::active, Point2 velocity = {});
    void clear() { tracks_.clear(); }

    const std::vector<Track>& tracks() const { return tracks_; }
    std::vector<Track>& tracks() { return tracks_; }
    const TrackerConfig& config() const { return cfg_; }

private:
    TrackerConfig cfg_;
    std::vector<Track> tracks_;
    int next_id_ = 0;
};

/// Stationary iff the summed path length over the window is below `move_threshold`.
TrackStatus classify_stationary(std::span<const Point2> history, double move_threshold = 20.0);

}  // namespace mosaic
