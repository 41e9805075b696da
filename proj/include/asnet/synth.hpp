#pragma once

// Seeded synthetic multi-view sequences with exact ground truth.
//
// A textured target moves over a textured static background. Every view sees the scene through
// its own axis-aligned affine map (scale + offset) and can carry occlusion windows and an
// illumination drift. All randomness derives from the config seed.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "asnet/dataio.hpp"
#include "asnet/error.hpp"
#include "asnet/imaging.hpp"
#include "asnet/kv.hpp"

namespace asnet {

enum class OcclusionKind { Full, Partial };

struct OcclusionWindow {
    int start = 0;  // inclusive, 0-based frame index
    int end = 0;    // inclusive
    OcclusionKind kind = OcclusionKind::Full;

    bool covers(int t) const noexcept { return t >= start && t <= end; }
    friend bool operator==(const OcclusionWindow&, const OcclusionWindow&) = default;
};

struct TargetJump {
    int frame = 0;  // displacement applied from this frame on
    double dx = 0.0;
    double dy = 0.0;
    friend bool operator==(const TargetJump&, const TargetJump&) = default;
};

struct SynthView {
    double scale_x = 1.0;
    double scale_y = 1.0;
    double offset_x = 0.0;
    double offset_y = 0.0;
    std::vector<OcclusionWindow> occlusions;
    double illumination_drift = 0.0;  // relative intensity change per frame
    friend bool operator==(const SynthView&, const SynthView&) = default;
};

struct SynthConfig {
    std::string name = "synthetic";
    int frames = 100;
    int width = 640;
    int height = 360;
    double target_x = 300.0;  // world top-left at frame 0
    double target_y = 160.0;
    double target_w = 40.0;
    double target_h = 40.0;
    double velocity_x = 0.0;  // world pixels per frame
    double velocity_y = 0.0;
    std::vector<TargetJump> jumps;
    double background_contrast = 25.0;
    double target_contrast = 70.0;
    double noise = 2.0;  // additive Gaussian sigma, gray levels
    std::uint64_t seed = 1;
    std::string image_format = "jpg";
    std::vector<SynthView> views{SynthView{}};

    int view_count() const noexcept { return static_cast<int>(views.size()); }

    void validate() const {
        if (views.empty()) throw ParameterError("synth: at least one view required");
        if (frames < 1) throw ParameterError("synth: frames must be >= 1");
        if (width < 8 || height < 8) throw ParameterError("synth: frame too small");
        if (!(target_w > 0.0) || !(target_h > 0.0)) throw ParameterError("synth: target size must be positive");
        if (!(noise >= 0.0)) throw ParameterError("synth: noise must be >= 0");
        if (image_format != "jpg" && image_format != "png") throw ParameterError("synth: image_format must be jpg or png");
        for (const auto& v : views) {
            if (!(v.scale_x > 0.0) || !(v.scale_y > 0.0)) throw ParameterError("synth: view scale must be positive");
            for (const auto& o : v.occlusions)
                if (o.start < 0 || o.end < o.start || o.end >= frames)
                    throw ParameterError("synth: occlusion window outside the sequence");
        }
        for (const auto& j : jumps)
            if (j.frame < 0 || j.frame >= frames) throw ParameterError("synth: jump frame outside the sequence");
    }

    /// World-space target box at frame t.
    BoundingBox world_box(int t) const {
        double x = target_x + velocity_x * t;
        double y = target_y + velocity_y * t;
        for (const auto& j : jumps)
            if (t >= j.frame) {
                x += j.dx;
                y += j.dy;
            }
        return {x, y, target_w, target_h};
    }

    BoundingBox view_box(int view, int t) const {
        const auto& v = views[view];
        const BoundingBox w = world_box(t);
        return {v.scale_x * w.x + v.offset_x, v.scale_y * w.y + v.offset_y, v.scale_x * w.w, v.scale_y * w.h};
    }
};

/// Rendered group held in memory; frames[view][t].
struct SynthGroup {
    GroupSequence sequence;
    std::vector<std::vector<Frame>> frames;
};

namespace detail {

// splitmix64; stable across standard library implementations
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double symmetric() { return 2.0 * uniform() - 1.0; }
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Bilinearly interpolated lattice noise in [-1, 1] over the unit square.
class LatticeNoise {
public:
    LatticeNoise(int cells, SeededRng& rng) : n_(cells + 1), values_(static_cast<std::size_t>(n_) * n_) {
        for (auto& v : values_) v = rng.symmetric();
    }

    double sample(double u, double v) const {
        const double x = std::clamp(u, 0.0, 1.0) * (n_ - 1);
        const double y = std::clamp(v, 0.0, 1.0) * (n_ - 1);
        const int x0 = std::min(static_cast<int>(x), n_ - 2);
        const int y0 = std::min(static_cast<int>(y), n_ - 2);
        const double ax = x - x0, ay = y - y0;
        auto at = [&](int r, int c) { return values_[static_cast<std::size_t>(r) * n_ + c]; };
        return (1 - ay) * ((1 - ax) * at(y0, x0) + ax * at(y0, x0 + 1)) +
               ay * ((1 - ax) * at(y0 + 1, x0) + ax * at(y0 + 1, x0 + 1));
    }

private:
    int n_;
    std::vector<double> values_;
};

inline std::uint8_t to_byte(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace detail

/// Attribute flags implied by a config.
inline AttributeSet synth_attributes(const SynthConfig& cfg) {
    AttributeSet a;
    a.set(Attribute::DAY);
    if (!cfg.jumps.empty()) a.set(Attribute::CM);
    bool vc = false;
    for (const auto& v : cfg.views) {
        for (const auto& o : v.occlusions) a.set(o.kind == OcclusionKind::Full ? Attribute::FOC : Attribute::POC);
        if (v.illumination_drift != 0.0) a.set(Attribute::IV);
        if (v.scale_x != cfg.views[0].scale_x || v.scale_y != cfg.views[0].scale_y) vc = true;
    }
    if (vc) a.set(Attribute::VC);
    for (int v = 0; v < cfg.view_count(); ++v) {
        int tiny = 0;
        for (int t = 0; t < cfg.frames; ++t) {
            const BoundingBox b = cfg.view_box(v, t);
            if (b.x + b.w <= 0 || b.y + b.h <= 0 || b.x >= cfg.width || b.y >= cfg.height) a.set(Attribute::OV);
            if (b.area() < 400.0) ++tiny;
        }
        if (tiny > 50) a.set(Attribute::LR);
    }
    return a;
}

/// Renders every view and frame in memory together with exact ground truth.
inline SynthGroup synth_group(const SynthConfig& cfg) {
    cfg.validate();
    const int V = cfg.view_count();
    SynthGroup out;
    auto& seq = out.sequence;
    seq.group_id = cfg.name;
    seq.attributes = synth_attributes(cfg);
    seq.views.resize(V);
    out.frames.resize(V);

    // Target appearance lives in normalized target coordinates so every view samples the same object.
    detail::SeededRng target_rng(detail::mix64(cfg.seed ^ 0x7a11e7ull));
    const detail::LatticeNoise tex_coarse(4, target_rng), tex_fine(8, target_rng);
    const std::array<double, 3> target_base{150.0 + 60.0 * target_rng.uniform(), 90.0 + 60.0 * target_rng.uniform(),
                                            70.0 + 40.0 * target_rng.uniform()};

    for (int v = 0; v < V; ++v) {
        const auto& view = cfg.views[v];
        auto& vs = seq.views[v];
        vs.name = "drone" + std::to_string(v + 1);

        detail::SeededRng bg_rng(detail::mix64(cfg.seed * 1315423911ull + static_cast<std::uint64_t>(v) + 1));
        const int lattice = std::max(cfg.width, cfg.height) / 24;
        const detail::LatticeNoise bg_a(lattice, bg_rng), bg_b(lattice * 2, bg_rng), bg_c(lattice / 3 + 1, bg_rng);
        const std::array<double, 3> tint{bg_rng.symmetric() * 10.0, bg_rng.symmetric() * 10.0, bg_rng.symmetric() * 10.0};
        const double side = std::max(cfg.width, cfg.height);
        std::vector<double> background(static_cast<std::size_t>(cfg.width) * cfg.height);
        for (int r = 0; r < cfg.height; ++r)
            for (int c = 0; c < cfg.width; ++c) {
                const double u = (c + 0.5) / side, w = (r + 0.5) / side;
                background[static_cast<std::size_t>(r) * cfg.width + c] =
                    cfg.background_contrast * (0.5 * bg_a.sample(u, w) + 0.3 * bg_b.sample(u, w) + 0.2 * bg_c.sample(u, w));
            }

        for (int t = 0; t < cfg.frames; ++t) {
            const BoundingBox box = cfg.view_box(v, t);
            const bool outside = box.x + box.w <= 0 || box.y + box.h <= 0 || box.x >= cfg.width || box.y >= cfg.height;
            vs.ground_truth.push_back(outside ? std::nullopt : std::optional<BoundingBox>(box));
            const OcclusionWindow* occ = nullptr;
            for (const auto& o : view.occlusions)
                if (o.covers(t)) occ = &o;
            vs.occluded.push_back(occ != nullptr);

            const double gain = std::max(0.0, 1.0 + view.illumination_drift * t);
            Frame f(cfg.width, cfg.height, 3);
            f.frame_index = t;
            for (int r = 0; r < cfg.height; ++r)
                for (int c = 0; c < cfg.width; ++c) {
                    const double b = background[static_cast<std::size_t>(r) * cfg.width + c];
                    for (int ch = 0; ch < 3; ++ch) f.at(r, c, ch) = detail::to_byte(gain * (110.0 + tint[ch] + b));
                }

            // Pixels whose centres fall inside the box belong to the target.
            const int c0 = std::max(0, static_cast<int>(std::ceil(box.x - 0.5)));
            const int c1 = std::min(cfg.width - 1, static_cast<int>(std::ceil(box.x + box.w - 0.5)) - 1);
            const int r0 = std::max(0, static_cast<int>(std::ceil(box.y - 0.5)));
            const int r1 = std::min(cfg.height - 1, static_cast<int>(std::ceil(box.y + box.h - 0.5)) - 1);
            if (!(occ && occ->kind == OcclusionKind::Full)) {
                for (int r = r0; r <= r1; ++r)
                    for (int c = c0; c <= c1; ++c) {
                        const double u = (c + 0.5 - box.x) / box.w;
                        const double w = (r + 0.5 - box.y) / box.h;
                        if (occ && u >= 0.5) continue;  // partial occlusion hides the right half
                        const bool border = u < 0.08 || u > 0.92 || w < 0.08 || w > 0.92;
                        const double tex = 0.6 * tex_coarse.sample(u, w) + 0.4 * tex_fine.sample(u, w);
                        for (int ch = 0; ch < 3; ++ch) {
                            const double val = border ? 25.0 : target_base[ch] + cfg.target_contrast * tex;
                            f.at(r, c, ch) = detail::to_byte(gain * val);
                        }
                    }
            }

            if (cfg.noise > 0.0) {
                detail::SeededRng noise_rng(detail::mix64(cfg.seed ^ (static_cast<std::uint64_t>(v) << 40) ^
                                                          (static_cast<std::uint64_t>(t) << 8) ^ 0x5eedull));
                for (auto& p : f.pixels) p = detail::to_byte(p + cfg.noise * noise_rng.normal());
            }
            out.frames[v].push_back(std::move(f));
        }
    }
    return out;
}

/// Writes frames and metadata under root/<name>; fills in frame paths.
inline GroupSequence write_group(SynthGroup& g, const fs::path& root, const std::string& image_format = "jpg") {
    auto& seq = g.sequence;
    seq.root = root / seq.group_id;
    save_group_metadata(seq, seq.root);
    const std::string ext = "." + image_format;
    for (std::size_t v = 0; v < seq.views.size(); ++v) {
        auto& vs = seq.views[v];
        vs.frame_paths.clear();
        for (std::size_t t = 0; t < g.frames[v].size(); ++t) {
            const fs::path p = seq.root / vs.name / frame_filename(static_cast<int>(t + 1), ext);
            save_frame(g.frames[v][t], p);
            vs.frame_paths.push_back(p);
        }
    }
    return seq;
}

namespace detail {

inline std::vector<OcclusionWindow> parse_occlusions(const KeyValueFile& kv, const std::string& key) {
    std::vector<OcclusionWindow> out;
    const std::string raw = kv.get_string(key, "");
    if (raw.empty()) return out;
    for (const auto& item : split(raw, ',')) {
        // start-end[:FOC|POC]
        OcclusionWindow w;
        std::string range = item;
        if (auto colon = item.find(':'); colon != std::string::npos) {
            const std::string kind = item.substr(colon + 1);
            range = item.substr(0, colon);
            if (kind == "POC") w.kind = OcclusionKind::Partial;
            else if (kind != "FOC") kv.fail(key, "occlusion kind must be FOC or POC");
        }
        const auto dash = range.find('-');
        long long a = 0, b = 0;
        if (dash == std::string::npos || !parse_int(range.substr(0, dash), a) || !parse_int(range.substr(dash + 1), b))
            kv.fail(key, "expected start-end[:FOC|POC]");
        w.start = static_cast<int>(a);
        w.end = static_cast<int>(b);
        out.push_back(w);
    }
    return out;
}

inline std::vector<TargetJump> parse_jumps(const KeyValueFile& kv, const std::string& key) {
    std::vector<TargetJump> out;
    const std::string raw = kv.get_string(key, "");
    if (raw.empty()) return out;
    for (const auto& item : split(raw, ',')) {
        // frame:dx:dy
        const auto parts = split(item, ':');
        long long f = 0;
        TargetJump j;
        if (parts.size() != 3 || !parse_int(parts[0], f) || !parse_double(parts[1], j.dx) || !parse_double(parts[2], j.dy))
            kv.fail(key, "expected frame:dx:dy");
        j.frame = static_cast<int>(f);
        out.push_back(j);
    }
    return out;
}

}  // namespace detail

/// Reads a synthetic scene description; view keys are view1.*, view2.*, ...
inline SynthConfig synth_config_from(const KeyValueFile& kv) {
    SynthConfig c;
    c.name = kv.get_string("name", c.name);
    c.frames = kv.get_int("frames", c.frames);
    c.width = kv.get_int("width", c.width);
    c.height = kv.get_int("height", c.height);
    c.target_x = kv.get_double("target.x", c.target_x);
    c.target_y = kv.get_double("target.y", c.target_y);
    c.target_w = kv.get_double("target.w", c.target_w);
    c.target_h = kv.get_double("target.h", c.target_h);
    c.velocity_x = kv.get_double("target.vx", c.velocity_x);
    c.velocity_y = kv.get_double("target.vy", c.velocity_y);
    c.target_contrast = kv.get_double("target.contrast", c.target_contrast);
    c.background_contrast = kv.get_double("background.contrast", c.background_contrast);
    c.jumps = detail::parse_jumps(kv, "target.jumps");
    c.noise = kv.get_double("noise", c.noise);
    c.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<int>(c.seed)));
    c.image_format = kv.get_string("image_format", c.image_format);
    const int V = kv.get_int("views", 1);
    if (V < 1) kv.fail("views", "must be >= 1");
    c.views.assign(V, SynthView{});
    for (int v = 0; v < V; ++v) {
        const std::string p = "view" + std::to_string(v + 1) + ".";
        auto& sv = c.views[v];
        const double scale = kv.get_double(p + "scale", 1.0);
        sv.scale_x = kv.get_double(p + "scale_x", scale);
        sv.scale_y = kv.get_double(p + "scale_y", scale);
        sv.offset_x = kv.get_double(p + "offset_x", 0.0);
        sv.offset_y = kv.get_double(p + "offset_y", 0.0);
        sv.illumination_drift = kv.get_double(p + "illumination_drift", 0.0);
        sv.occlusions = detail::parse_occlusions(kv, p + "occlusions");
    }
    kv.reject_unknown();
    c.validate();
    return c;
}

inline SynthConfig load_synth_config(const fs::path& path) { return synth_config_from(KeyValueFile::load(path)); }

}  // namespace asnet
