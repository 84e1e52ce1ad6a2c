#include "mosaic/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace mosaic {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_key(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x6a09e667f3bcc908ULL;
    for (std::uint64_t p : parts) h = splitmix(h ^ splitmix(p));
    return h;
}

double keyed_unit(std::initializer_list<std::uint64_t> parts) {
    return static_cast<double>(mix_key(parts) >> 11) * 0x1.0p-53;
}

double keyed_normal(std::initializer_list<std::uint64_t> parts) {
    const std::uint64_t h = mix_key(parts);
    const double u1 = (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = static_cast<double>(splitmix(h) >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void ScenarioSpec::validate() const {
    if (cameras < 1) throw std::invalid_argument("scenario: at least one camera required");
    if (frames < 1) throw std::invalid_argument("scenario: at least one frame required");
    if (width < 1 || height < 1 || fps <= 0.0) throw std::invalid_argument("scenario: bad frame geometry");
    if (objects_min < 0 || objects_max < objects_min) throw std::invalid_argument("scenario: bad object counts");
    if (objects_max > 0 && classes.empty()) throw std::invalid_argument("scenario: objects need a size class");
    if (speed_min < 0.0 || speed_max < speed_min) throw std::invalid_argument("scenario: bad speed range");
    if (static_fraction < 0.0 || static_fraction > 1.0) throw std::invalid_argument("scenario: bad static fraction");
    for (const auto& c : classes) {
        if (c.width <= 0.0 || c.height <= 0.0 || c.width >= width || c.height >= height || c.weight <= 0.0) {
            throw std::invalid_argument("scenario: bad size class " + c.label);
        }
    }
}

ScenarioSpec preset_spec(std::string_view name, int cameras, int frames) {
    ScenarioSpec s;
    s.preset = std::string(name);
    s.cameras = cameras;
    s.frames = frames;
    if (name == "okutama-like") {
        s.width = 960;
        s.height = 540;
        s.classes = {{"person", 36, 39, 1.0, 0.05, false},
                     {"person", 50, 54, 1.0, 0.05, false},
                     {"person", 81, 44, 1.0, 0.05, false}};
        s.objects_min = 5;
        s.objects_max = 7;
        s.static_fraction = 0.3;
        s.speed_min = 1.0;
        s.speed_max = 2.5;
        s.ego_amplitude = 0.25;
        s.min_separation = 24.0;
    } else if (name == "ufpr-like") {
        s.width = 1920;
        s.height = 1080;
        s.classes = {{"car", 160, 110, 0.6, 0.05, true},
                     {"motorcycle", 80, 115, 0.2, 0.05, true},
                     {"bus", 190, 135, 0.2, 0.05, true}};
        s.objects_min = 1;
        s.objects_max = 1;
        s.static_fraction = 0.3;
        s.speed_min = 2.0;
        s.speed_max = 4.0;
        s.ego_amplitude = 0.0;
        s.min_separation = 48.0;
    } else {
        throw std::invalid_argument("unknown preset: " + std::string(name));
    }
    return s;
}

namespace {

struct Walker {
    GtObject obj;
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;
    double vx = 0.0;
    double vy = 0.0;
    double plate_dx = 0.0;
    double plate_dy = 0.0;
    double plate_w = 0.0;
    double plate_h = 0.0;

    void sync() {
        obj.bbox = {x, y, x + w, y + h};
        if (obj.plate_bbox) obj.plate_bbox = BBox{x + plate_dx, y + plate_dy, x + plate_dx + plate_w, y + plate_dy + plate_h};
    }
};

void bounce(double& pos, double& vel, double size, double extent) {
    if (pos < 0.0) {
        pos = -pos;
        vel = -vel;
    }
    if (pos + size > extent) {
        pos = 2.0 * (extent - size) - pos;
        vel = -vel;
    }
    pos = std::clamp(pos, 0.0, extent - size);
}

std::string plate_text(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> letter(0, 25);
    std::uniform_int_distribution<int> digit(0, 9);
    std::string t;
    for (int i = 0; i < 3; ++i) t.push_back(static_cast<char>('A' + letter(rng)));
    for (int i = 0; i < 4; ++i) t.push_back(static_cast<char>('0' + digit(rng)));
    return t;
}

}  // namespace

Scenario generate_scenario(const ScenarioSpec& spec, std::uint64_t seed) {
    spec.validate();
    Scenario sc;
    sc.preset = spec.preset;
    sc.seed = seed;
    sc.background = spec.background;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> weights;
    for (const auto& c : spec.classes) weights.push_back(c.weight);

    int next_id = 0;
    for (int cam = 0; cam < spec.cameras; ++cam) {
        sc.cameras.push_back({cam, spec.width, spec.height, spec.fps});
        const int n = std::uniform_int_distribution<int>(spec.objects_min, spec.objects_max)(rng);
        std::vector<Walker> walkers;
        for (int k = 0; k < n; ++k) {
            const SizeClass& cls = spec.classes[std::discrete_distribution<std::size_t>(weights.begin(), weights.end())(rng)];
            Walker wk;
            wk.obj.id = next_id++;
            wk.obj.label = cls.label;
            wk.w = cls.width * std::clamp(1.0 + cls.spread * normal(rng), 0.8, 1.2);
            wk.h = cls.height * std::clamp(1.0 + cls.spread * normal(rng), 0.8, 1.2);
            for (int attempt = 0; attempt < 200; ++attempt) {
                wk.x = unit(rng) * (spec.width - wk.w);
                wk.y = unit(rng) * (spec.height - wk.h);
                const BBox probe{wk.x - spec.min_separation, wk.y - spec.min_separation,
                                 wk.x + wk.w + spec.min_separation, wk.y + wk.h + spec.min_separation};
                const bool clear = std::none_of(walkers.begin(), walkers.end(), [&](const Walker& o) {
                    return intersection_area(probe, BBox{o.x, o.y, o.x + o.w, o.y + o.h}) > 0.0;
                });
                if (clear) break;
            }
            if (unit(rng) >= spec.static_fraction) {
                const double speed = spec.speed_min + unit(rng) * (spec.speed_max - spec.speed_min);
                const double heading = unit(rng) * 2.0 * std::numbers::pi;
                wk.vx = speed * std::cos(heading);
                wk.vy = speed * std::sin(heading);
            }
            if (cls.plated) {
                wk.plate_h = spec.plate_height_min + unit(rng) * (spec.plate_height_max - spec.plate_height_min);
                wk.plate_w = std::min(wk.plate_h * spec.plate_aspect, 0.8 * wk.w);
                wk.plate_dx = 0.5 * (wk.w - wk.plate_w);
                wk.plate_dy = 0.7 * wk.h - 0.5 * wk.plate_h;
                wk.obj.plate = plate_text(rng);
                wk.obj.plate_bbox = BBox{};
            }
            wk.sync();
            walkers.push_back(std::move(wk));
        }

        auto& frames = sc.frames.emplace_back();
        for (int f = 0; f < spec.frames; ++f) {
            FrameRecord rec;
            rec.camera_id = cam;
            rec.frame_idx = f;
            if (f > 0) {
                if (spec.ego_amplitude > 0.0) {
                    rec.ego = Affine2D::translation(spec.ego_amplitude * normal(rng), spec.ego_amplitude * normal(rng));
                }
                for (Walker& wk : walkers) {
                    const Point2 moved = rec.ego.apply({wk.x, wk.y});
                    wk.x = moved.x + wk.vx;
                    wk.y = moved.y + wk.vy;
                    bounce(wk.x, wk.vx, wk.w, spec.width);
                    bounce(wk.y, wk.vy, wk.h, spec.height);
                    wk.sync();
                }
            }
            for (const Walker& wk : walkers) rec.objects.push_back(wk.obj);
            frames.push_back(std::move(rec));
        }
    }
    return sc;
}

GrayFrame render_frame(const Scenario& s, int camera, int frame) {
    const CameraInfo& info = s.cameras.at(static_cast<std::size_t>(camera));
    GrayFrame img(info.width, info.height, static_cast<std::uint8_t>(s.background));
    auto pixel_span = [&](const BBox& b, int& x0, int& y0, int& x1, int& y1) {
        // Origin plus rounded size, so a sprite never gains or loses an edge column while moving.
        const int left = static_cast<int>(std::lround(b.x_min));
        const int top = static_cast<int>(std::lround(b.y_min));
        x0 = std::clamp(left, 0, info.width);
        y0 = std::clamp(top, 0, info.height);
        x1 = std::clamp(left + static_cast<int>(std::lround(b.width())), 0, info.width);
        y1 = std::clamp(top + static_cast<int>(std::lround(b.height())), 0, info.height);
    };
    for (const GtObject& o : s.record(camera, frame).objects) {
        int x0, y0, x1, y1;
        pixel_span(o.bbox, x0, y0, x1, y1);
        const std::uint64_t base = mix_key({s.seed, static_cast<std::uint64_t>(o.id), 0x7e47});
        const long left = std::lround(o.bbox.x_min);
        const long top = std::lround(o.bbox.y_min);
        for (int y = y0; y < y1; ++y) {
            for (int x = x0; x < x1; ++x) {
                const std::uint64_t bit = mix_key({base, static_cast<std::uint64_t>(x - left), static_cast<std::uint64_t>(y - top)}) & 1u;
                img.at(x, y) = bit ? 95 : 25;
            }
        }
        if (o.plate_bbox) {
            pixel_span(*o.plate_bbox, x0, y0, x1, y1);
            for (int y = y0; y < y1; ++y) {
                for (int x = x0; x < x1; ++x) img.at(x, y) = 220;
            }
        }
    }
    return img;
}

std::vector<Correspondence> ego_correspondences(const Scenario& s, int camera, int frame, int count) {
    const CameraInfo& info = s.cameras.at(static_cast<std::size_t>(camera));
    const Affine2D& ego = s.record(camera, frame).ego;
    std::vector<Correspondence> out;
    const auto cam = static_cast<std::uint64_t>(camera);
    const auto f = static_cast<std::uint64_t>(frame);
    for (int i = 0; i < count; ++i) {
        const auto k = static_cast<std::uint64_t>(i);
        Point2 from{keyed_unit({s.seed, cam, f, k, 1}) * info.width, keyed_unit({s.seed, cam, f, k, 2}) * info.height};
        Point2 to = ego.apply(from);
        to.x += 0.3 * keyed_normal({s.seed, cam, f, k, 3});
        to.y += 0.3 * keyed_normal({s.seed, cam, f, k, 4});
        if (i % 8 == 7) {
            to.x += 20.0 + 20.0 * keyed_unit({s.seed, cam, f, k, 5});
            to.y -= 20.0 + 20.0 * keyed_unit({s.seed, cam, f, k, 6});
        }
        out.push_back({from, to});
    }
    return out;
}

namespace {

using nlohmann::json;

json box_json(const BBox& b) { return json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

BBox box_from(const json& j) {
    if (!j.is_array() || j.size() != 4) throw std::invalid_argument("scenario: bbox must have 4 numbers");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

}  // namespace

void write_scenario(const Scenario& s, std::ostream& out) {
    json header{{"type", "header"}, {"preset", s.preset}, {"seed", s.seed}, {"background", s.background},
                {"frames", s.frame_count()}};
    json cams = json::array();
    for (const CameraInfo& c : s.cameras) {
        cams.push_back({{"camera_id", c.camera_id}, {"width", c.width}, {"height", c.height}, {"fps", c.fps}});
    }
    header["cameras"] = cams;
    out << header.dump() << '\n';
    for (const auto& cam_frames : s.frames) {
        for (const FrameRecord& r : cam_frames) {
            json objs = json::array();
            for (const GtObject& o : r.objects) {
                json jo{{"id", o.id}, {"class", o.label}, {"bbox", box_json(o.bbox)}};
                if (!o.plate.empty()) jo["plate"] = o.plate;
                if (o.plate_bbox) jo["plate_bbox"] = box_json(*o.plate_bbox);
                objs.push_back(std::move(jo));
            }
            json rec{{"camera_id", r.camera_id},
                     {"frame_idx", r.frame_idx},
                     {"ego", json::array({r.ego.scale, r.ego.rotation, r.ego.tx, r.ego.ty})},
                     {"objects", std::move(objs)}};
            out << rec.dump() << '\n';
        }
    }
}

Scenario read_scenario(std::istream& in) {
    Scenario s;
    std::string line;
    bool have_header = false;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw std::invalid_argument("scenario line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!have_header) {
            if (j.value("type", "") != "header") throw std::invalid_argument("scenario: first record must be the header");
            s.preset = j.value("preset", "custom");
            s.seed = j.at("seed").get<std::uint64_t>();
            s.background = j.value("background", 60);
            for (const auto& c : j.at("cameras")) {
                s.cameras.push_back({c.at("camera_id").get<int>(), c.at("width").get<int>(), c.at("height").get<int>(),
                                     c.value("fps", 30.0)});
            }
            for (std::size_t i = 0; i < s.cameras.size(); ++i) {
                if (s.cameras[i].camera_id != static_cast<int>(i)) throw std::invalid_argument("scenario: camera ids must be 0..M-1");
            }
            s.frames.resize(s.cameras.size());
            have_header = true;
            continue;
        }
        FrameRecord r;
        r.camera_id = j.at("camera_id").get<int>();
        r.frame_idx = j.at("frame_idx").get<int>();
        const auto& ego = j.at("ego");
        r.ego = {ego.at(0).get<double>(), ego.at(1).get<double>(), ego.at(2).get<double>(), ego.at(3).get<double>()};
        for (const auto& jo : j.at("objects")) {
            GtObject o;
            o.id = jo.at("id").get<int>();
            o.label = jo.at("class").get<std::string>();
            o.bbox = box_from(jo.at("bbox"));
            o.plate = jo.value("plate", "");
            if (jo.contains("plate_bbox")) o.plate_bbox = box_from(jo.at("plate_bbox"));
            r.objects.push_back(std::move(o));
        }
        if (r.camera_id < 0 || r.camera_id >= s.camera_count()) throw std::invalid_argument("scenario: unknown camera id");
        auto& frames = s.frames[static_cast<std::size_t>(r.camera_id)];
        if (r.frame_idx != static_cast<int>(frames.size())) throw std::invalid_argument("scenario: frames out of order");
        frames.push_back(std::move(r));
    }
    if (!have_header) throw std::invalid_argument("scenario: empty input");
    for (const auto& f : s.frames) {
        if (f.size() != s.frames.front().size()) throw std::invalid_argument("scenario: cameras have different lengths");
    }
    return s;
}

double DetectorModel::probability(double h) const {
    if (h < h0) return 0.0;
    if (h >= h1) return p_max;
    return p_max * (h - h0) / (h1 - h0);
}

void DetectorModel::validate() const {
    if (!(h0 > 0.0 && h0 < h1)) throw std::invalid_argument("detector: need 0 < h0 < h1");
    if (!(p_max > 0.0 && p_max <= 1.0)) throw std::invalid_argument("detector: p_max must lie in (0, 1]");
}

std::vector<VisibleObject> visible_objects(const CanvasFrame& frame, std::span<const FrameRecord> records,
                                           double min_fraction) {
    std::vector<VisibleObject> out;
    for (std::size_t b = 0; b < frame.layout.placements.size(); ++b) {
        const Placement& p = frame.layout.placements[b];
        const BinMapping& m = frame.mapping[b];
        const auto rec = std::find_if(records.begin(), records.end(),
                                      [&](const FrameRecord& r) { return r.camera_id == p.camera_id; });
        if (rec == records.end()) continue;
        for (const GtObject& o : rec->objects) {
            const BBox clipped = intersection(o.bbox, p.source);
            if (o.bbox.area() <= 0.0 || clipped.area() < min_fraction * o.bbox.area()) continue;
            VisibleObject v;
            v.object_id = o.id;
            v.camera_id = p.camera_id;
            v.bin = static_cast<int>(b);
            v.label = o.label;
            v.canvas_box = m.to_canvas(clipped);
            v.render_height = v.canvas_box.height();
            v.native_height = clipped.height();
            v.render_scale = m.scale_y();
            out.push_back(std::move(v));
        }
    }
    return out;
}

std::vector<Detection> mock_detect(std::span<const VisibleObject> visible, const DetectorModel& model,
                                   std::uint64_t frame_key) {
    std::vector<Detection> out;
    for (const VisibleObject& v : visible) {
        const double h_eff = std::min(v.render_height, v.native_height);
        const double p = model.probability(h_eff);
        const auto cam = static_cast<std::uint64_t>(v.camera_id);
        const auto obj = static_cast<std::uint64_t>(v.object_id);
        const auto bin = static_cast<std::uint64_t>(v.bin);
        const bool hit = model.deterministic ? h_eff >= model.h0 : keyed_unit({model.seed, frame_key, cam, obj, bin, 0}) < p;
        if (!hit) continue;
        const double w = v.canvas_box.width();
        const double h = v.canvas_box.height();
        Detection d;
        d.bbox = {v.canvas_box.x_min + model.jitter * w * keyed_normal({model.seed, frame_key, cam, obj, bin, 1}),
                  v.canvas_box.y_min + model.jitter * h * keyed_normal({model.seed, frame_key, cam, obj, bin, 2}),
                  v.canvas_box.x_max + model.jitter * w * keyed_normal({model.seed, frame_key, cam, obj, bin, 3}),
                  v.canvas_box.y_max + model.jitter * h * keyed_normal({model.seed, frame_key, cam, obj, bin, 4})};
        d.label = v.label;
        d.confidence = p;
        d.camera_id = v.camera_id;
        d.render_scale = v.render_scale;
        out.push_back(std::move(d));
    }
    return out;
}

std::string mock_ocr(double height, std::string_view truth, double h_ocr, std::uint64_t key) {
    if (height >= h_ocr) return std::string(truth);
    if (height <= 0.5 * h_ocr || truth.empty()) return {};
    static constexpr std::string_view alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
    const double frac = std::clamp((h_ocr - height) / h_ocr, 0.0, 1.0);
    const auto n = std::min(truth.size(), static_cast<std::size_t>(std::ceil(frac * truth.size() - 1e-9)));
    std::string out(truth);
    std::vector<std::size_t> pos(truth.size());
    for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = i;
    for (std::size_t i = 0; i < n; ++i) {
        const auto j = i + static_cast<std::size_t>(keyed_unit({key, i, 1}) * (pos.size() - i));
        std::swap(pos[i], pos[j]);
        std::size_t c = static_cast<std::size_t>(keyed_unit({key, i, 2}) * alphabet.size());
        if (alphabet[c] == out[pos[i]]) c = (c + 1) % alphabet.size();
        out[pos[i]] = alphabet[c];
    }
    return out;
}

}  // namespace mosaic
