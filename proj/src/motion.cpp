#include "mosaic/motion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <tuple>

#include <Eigen/Dense>

namespace mosaic {

std::vector<BBox> frame_diff_masks(const GrayFrame& prev, const GrayFrame& cur, int threshold, int min_area) {
    if (prev.width != cur.width || prev.height != cur.height) {
        throw std::invalid_argument("frame_diff_masks: frame dimensions differ");
    }
    const int w = cur.width;
    const int h = cur.height;
    if (w == 0 || h == 0) return {};

    const std::size_t n = static_cast<std::size_t>(w) * h;
    std::vector<std::uint8_t> diff(n, 0);
    std::vector<char> row_hit(static_cast<std::size_t>(h), 0);
    bool any = false;
    for (int y = 0; y < h; ++y) {
        const std::size_t base = static_cast<std::size_t>(y) * w;
        std::uint8_t hit = 0;
        for (int x = 0; x < w; ++x) {
            const int d = std::abs(static_cast<int>(cur.data[base + x]) - static_cast<int>(prev.data[base + x]));
            diff[base + x] = d > threshold;
            hit |= diff[base + x];
        }
        row_hit[static_cast<std::size_t>(y)] = hit;
        any = any || hit;
    }
    if (!any) return {};

    // 3x3 dilation, separable: horizontal then vertical. Rows far from any change stay empty.
    std::vector<std::uint8_t> horiz(n, 0);
    for (int y = 0; y < h; ++y) {
        if (!row_hit[static_cast<std::size_t>(y)]) continue;
        const std::uint8_t* row = &diff[static_cast<std::size_t>(y) * w];
        std::uint8_t* out = &horiz[static_cast<std::size_t>(y) * w];
        for (int x = 0; x < w; ++x) {
            out[x] = row[x] | (x > 0 ? row[x - 1] : 0) | (x + 1 < w ? row[x + 1] : 0);
        }
    }
    std::vector<std::uint8_t>& mask = diff;
    std::vector<char> row_live(static_cast<std::size_t>(h), 0);
    for (int y = 0; y < h; ++y) {
        const bool up = y > 0 && row_hit[static_cast<std::size_t>(y - 1)];
        const bool mid = row_hit[static_cast<std::size_t>(y)];
        const bool down = y + 1 < h && row_hit[static_cast<std::size_t>(y + 1)];
        std::uint8_t* out = &mask[static_cast<std::size_t>(y) * w];
        if (!(up || mid || down)) continue;
        row_live[static_cast<std::size_t>(y)] = 1;
        const std::uint8_t* c = &horiz[static_cast<std::size_t>(y) * w];
        for (int x = 0; x < w; ++x) {
            out[x] = c[x] | (up ? c[x - w] : 0) | (down ? c[x + w] : 0);
        }
    }

    std::vector<BBox> boxes;
    std::vector<int> stack;
    for (int y = 0; y < h; ++y) {
        if (!row_live[static_cast<std::size_t>(y)]) continue;
        for (int x = 0; x < w; ++x) {
            const std::size_t seed = static_cast<std::size_t>(y) * w + x;
            if (mask[seed] != 1) continue;
            mask[seed] = 2;
            stack.assign(1, static_cast<int>(seed));
            int area = 0;
            int x0 = x, x1 = x, y0 = y, y1 = y;
            while (!stack.empty()) {
                const int idx = stack.back();
                stack.pop_back();
                const int px = idx % w;
                const int py = idx / w;
                ++area;
                x0 = std::min(x0, px);
                x1 = std::max(x1, px);
                y0 = std::min(y0, py);
                y1 = std::max(y1, py);
                const auto visit = [&](int qx, int qy) {
                    const std::size_t q = static_cast<std::size_t>(qy) * w + qx;
                    if (mask[q] == 1) {
                        mask[q] = 2;
                        stack.push_back(static_cast<int>(q));
                    }
                };
                if (px > 0) visit(px - 1, py);
                if (px + 1 < w) visit(px + 1, py);
                if (py > 0) visit(px, py - 1);
                if (py + 1 < h) visit(px, py + 1);
            }
            if (area >= min_area) boxes.push_back({double(x0), double(y0), double(x1 + 1), double(y1 + 1)});
        }
    }
    return boxes;
}

namespace {

Affine2D fit_similarity(std::span<const Correspondence> m) {
    if (m.size() < 2) throw std::invalid_argument("estimate_partial_affine: need at least 2 correspondences");
    double mx = 0, my = 0, mu = 0, mv = 0;
    for (const auto& c : m) {
        mx += c.from.x;
        my += c.from.y;
        mu += c.to.x;
        mv += c.to.y;
    }
    const double inv_n = 1.0 / static_cast<double>(m.size());
    mx *= inv_n;
    my *= inv_n;
    mu *= inv_n;
    mv *= inv_n;

    double sxx = 0, num_a = 0, num_b = 0;
    for (const auto& c : m) {
        const double x = c.from.x - mx, y = c.from.y - my;
        const double u = c.to.x - mu, v = c.to.y - mv;
        sxx += x * x + y * y;
        num_a += x * u + y * v;
        num_b += x * v - y * u;
    }
    if (sxx < 1e-12) throw std::invalid_argument("estimate_partial_affine: degenerate (coincident) points");
    const double a = num_a / sxx;
    const double b = num_b / sxx;
    const double scale = std::hypot(a, b);
    if (scale < 1e-12) throw std::invalid_argument("estimate_partial_affine: degenerate transform");

    Affine2D t;
    t.scale = scale;
    t.rotation = std::atan2(b, a);
    t.tx = mu - (a * mx - b * my);
    t.ty = mv - (b * mx + a * my);
    return t;
}

double residual(const Affine2D& t, const Correspondence& c) {
    const Point2 p = t.apply(c.from);
    return std::hypot(p.x - c.to.x, p.y - c.to.y);
}

}  // namespace

Affine2D estimate_partial_affine(std::span<const Correspondence> matches, bool ransac, const RansacOptions& opts) {
    if (!ransac) return fit_similarity(matches);
    if (matches.size() < 2) throw std::invalid_argument("estimate_partial_affine: need at least 2 correspondences");

    std::mt19937_64 rng(opts.seed);
    std::uniform_int_distribution<std::size_t> pick(0, matches.size() - 1);
    std::vector<std::size_t> best_inliers;
    for (int it = 0; it < opts.iterations; ++it) {
        const std::size_t i = pick(rng);
        std::size_t j = pick(rng);
        if (i == j) continue;
        const std::array<Correspondence, 2> sample{matches[i], matches[j]};
        Affine2D hyp;
        try {
            hyp = fit_similarity(sample);
        } catch (const std::invalid_argument&) {
            continue;
        }
        std::vector<std::size_t> inliers;
        for (std::size_t k = 0; k < matches.size(); ++k) {
            if (residual(hyp, matches[k]) <= opts.inlier_threshold) inliers.push_back(k);
        }
        if (inliers.size() > best_inliers.size()) best_inliers = std::move(inliers);
    }
    if (best_inliers.size() < 2) return fit_similarity(matches);

    std::vector<Correspondence> refit;
    refit.reserve(best_inliers.size());
    for (std::size_t k : best_inliers) refit.push_back(matches[k]);
    return fit_similarity(refit);
}

const char* to_string(TrackStatus s) {
    switch (s) {
        case TrackStatus::active: return "active";
        case TrackStatus::stationary: return "stationary";
        case TrackStatus::last_seen: return "last_seen";
    }
    return "unknown";
}

void kalman_predict(Track& t, const KalmanParams& p) {
    Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
    f(0, 2) = 1.0;
    f(1, 3) = 1.0;
    t.state = f * t.state;
    t.covariance = f * t.covariance * f.transpose() + p.process_noise * Eigen::Matrix4d::Identity();
}

void kalman_update(Track& t, Point2 measured, const KalmanParams& p) {
    Eigen::Matrix<double, 2, 4> hm = Eigen::Matrix<double, 2, 4>::Zero();
    hm(0, 0) = 1.0;
    hm(1, 1) = 1.0;
    const Eigen::Vector2d z(measured.x, measured.y);
    const Eigen::Vector2d innovation = z - hm * t.state;
    const Eigen::Matrix2d s = hm * t.covariance * hm.transpose() + p.measurement_noise * Eigen::Matrix2d::Identity();
    const Eigen::Matrix<double, 4, 2> gain = t.covariance * hm.transpose() * s.inverse();
    t.state += gain * innovation;
    t.covariance = (Eigen::Matrix4d::Identity() - gain * hm) * t.covariance;
}

namespace {

void warp_track(Track& t, const Affine2D& ego) {
    t.bbox = apply_affine(ego, t.bbox);
    const Point2 c = ego.apply(t.centroid());
    const Affine2D linear{ego.scale, ego.rotation, 0.0, 0.0};
    const Point2 v = linear.apply(t.velocity());
    t.state << c.x, c.y, v.x, v.y;
}

}  // namespace

int CameraTracker::add_track(const BBox& box, TrackStatus status, Point2 velocity) {
    Track t;
    t.id = next_id_++;
    t.bbox = box;
    t.status = status;
    const Point2 c = box.center();
    t.state << c.x, c.y, velocity.x, velocity.y;
    t.covariance = cfg_.kalman.initial_covariance * Eigen::Matrix4d::Identity();
    tracks_.push_back(t);
    return t.id;
}

TrackerStepResult CameraTracker::step(std::span<const BBox> observations, const std::optional<Affine2D>& ego) {
    TrackerStepResult result;

    if (ego) {
        for (Track& t : tracks_) warp_track(t, *ego);
    }
    for (Track& t : tracks_) kalman_predict(t, cfg_.kalman);

    std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
    for (std::size_t ti = 0; ti < tracks_.size(); ++ti) {
        const Point2 pc = tracks_[ti].centroid();
        for (std::size_t oi = 0; oi < observations.size(); ++oi) {
            const Point2 oc = observations[oi].center();
            const double d = std::hypot(pc.x - oc.x, pc.y - oc.y);
            if (d <= cfg_.gate) pairs.emplace_back(d, ti, oi);
        }
    }
    std::sort(pairs.begin(), pairs.end());

    std::vector<bool> track_used(tracks_.size(), false);
    std::vector<bool> obs_used(observations.size(), false);
    for (const auto& [d, ti, oi] : pairs) {
        if (track_used[ti] || obs_used[oi]) continue;
        track_used[ti] = true;
        obs_used[oi] = true;
        Track& t = tracks_[ti];
        kalman_update(t, observations[oi].center(), cfg_.kalman);
        t.bbox = observations[oi];
        t.status = TrackStatus::active;
        t.frames_since_update = 0;
        ++result.matched;
    }

    result.mask_boxes.assign(observations.begin(), observations.end());
    for (std::size_t ti = 0; ti < tracks_.size(); ++ti) {
        if (track_used[ti]) continue;
        Track& t = tracks_[ti];
        ++t.frames_since_update;
        if (t.status != TrackStatus::stationary) t.status = TrackStatus::last_seen;
        // Unmatched objects are assumed to rest at their last known location.
        const Point2 c = t.bbox.center();
        t.state << c.x, c.y, 0.0, 0.0;
        result.mask_boxes.push_back(t.bbox);
    }

    for (std::size_t oi = 0; oi < observations.size(); ++oi) {
        if (obs_used[oi]) continue;
        add_track(observations[oi]);
        ++result.spawned;
    }
    return result;
}

TrackStatus classify_stationary(std::span<const Point2> history, double move_threshold) {
    double path = 0.0;
    for (std::size_t i = 1; i < history.size(); ++i) {
        path += std::hypot(history[i].x - history[i - 1].x, history[i].y - history[i - 1].y);
    }
    return path < move_threshold ? TrackStatus::stationary : TrackStatus::active;
}

}  // namespace mosaic
