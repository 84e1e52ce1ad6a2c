#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mosaic/canvas.hpp"
#include "mosaic/geometry.hpp"
#include "mosaic/image.hpp"
#include "mosaic/motion.hpp"

namespace mosaic {

/// Stateless keyed randomness: the same key always yields the same draw.
std::uint64_t mix_key(std::initializer_list<std::uint64_t> parts);
double keyed_unit(std::initializer_list<std::uint64_t> parts);    // [0, 1)
double keyed_normal(std::initializer_list<std::uint64_t> parts);  // standard normal

struct GtObject {
    int id = 0;
    std::string label;
    BBox bbox;
    std::string plate;  // empty when the object carries no plate
    std::optional<BBox> plate_bbox;

    bool operator==(const GtObject&) const = default;
};

struct FrameRecord {
    int camera_id = 0;
    int frame_idx = 0;
    Affine2D ego;  // maps the previous frame's pixels onto this frame
    std::vector<GtObject> objects;
};

struct CameraInfo {
    int camera_id = 0;
    int width = 0;
    int height = 0;
    double fps = 30.0;
};

struct Scenario {
    std::string preset;
    std::uint64_t seed = 0;
    int background = 60;
    std::vector<CameraInfo> cameras;
    std::vector<std::vector<FrameRecord>> frames;  // [camera][frame]

    int camera_count() const { return static_cast<int>(cameras.size()); }
    int frame_count() const { return frames.empty() ? 0 : static_cast<int>(frames.front().size()); }
    const FrameRecord& record(int camera, int frame) const {
        return frames.at(static_cast<std::size_t>(camera)).at(static_cast<std::size_t>(frame));
    }
};

struct SizeClass {
    std::string label;
    double width = 0.0;
    double height = 0.0;
    double weight = 1.0;
    double spread = 0.05;  // relative standard deviation of both sides
    bool plated = false;
};

struct ScenarioSpec {
    std::string preset = "custom";
    int cameras = 1;
    int frames = 300;
    double fps = 30.0;
    int width = 960;
    int height = 540;
    int background = 60;
    std::vector<SizeClass> classes;
    int objects_min = 1;
    int objects_max = 1;
    double static_fraction = 0.0;
    double speed_min = 1.0;  // px per frame
    double speed_max = 3.0;
    double ego_amplitude = 0.0;  // std-dev of per-frame camera translation, px
    double plate_height_min = 19.0;
    double plate_height_max = 24.0;
    double plate_aspect = 3.0;
    double min_separation = 16.0;

    void validate() const;
};

/// Built-in presets: "okutama-like" (aerial pedestrians) and "ufpr-like" (vehicles with plates).
ScenarioSpec preset_spec(std::string_view name, int cameras, int frames);

Scenario generate_scenario(const ScenarioSpec& spec, std::uint64_t seed);

/// Uniform background with each object drawn as a fixed per-object noise texture; plates are bright.
GrayFrame render_frame(const Scenario& s, int camera, int frame);

/// Simulated background feature matches between frame - 1 and frame, with a few outliers.
std::vector<Correspondence> ego_correspondences(const Scenario& s, int camera, int frame, int count = 24);

/// Line-delimited JSON: one header record, then one record per (camera, frame).
void write_scenario(const Scenario& s, std::ostream& out);
Scenario read_scenario(std::istream& in);

struct DetectorModel {
    double h0 = 12.0;      // px, never detected below
    double h1 = 32.0;      // px, full confidence from here
    double p_max = 0.98;
    bool deterministic = false;
    std::uint64_t seed = 0;
    double jitter = 0.02;  // box noise std-dev as a fraction of box size

    double probability(double effective_height) const;
    void validate() const;
};

/// A ground-truth object as it appears in one canvas bin.
struct VisibleObject {
    int object_id = 0;
    int camera_id = 0;
    int bin = 0;
    std::string label;
    BBox canvas_box;
    double render_height = 0.0;
    double native_height = 0.0;
    double render_scale = 1.0;
};

/// Objects with at least `min_fraction` of their area inside a bin's source crop, clipped to it.
std::vector<VisibleObject> visible_objects(const CanvasFrame& frame, std::span<const FrameRecord> records,
                                           double min_fraction = 0.5);

/// Detections in canvas coordinates. `frame_key` decorrelates draws between canvases.
std::vector<Detection> mock_detect(std::span<const VisibleObject> visible, const DetectorModel& model,
                                   std::uint64_t frame_key);

inline constexpr double kDefaultOcrHeight = 16.0;

/// Plate reading from a plate rendered `height` px tall.
std::string mock_ocr(double height, std::string_view truth, double h_ocr = kDefaultOcrHeight, std::uint64_t key = 0);

}  // namespace mosaic
