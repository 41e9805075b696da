#pragma once

// Single-view base tracker: template embedding, per-frame transform solves, scale search,
// peak localization and the re-detection loop.

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "asnet/error.hpp"
#include "asnet/fft.hpp"
#include "asnet/freqsolve.hpp"
#include "asnet/imaging.hpp"
#include "asnet/redetect.hpp"
#include "asnet/response.hpp"
#include "asnet/trajectory.hpp"

namespace asnet {

struct TrackerConfig {
    int template_size = 64;     // template patch side in pixels, before embedding
    double pad_factor = 2.0;    // search region side relative to the target
    int cell_size = 2;
    double lambda_m = 0.1;
    double lambda_w = 0.1;
    std::vector<double> scale_steps{0.975, 1.0, 1.025};
    double scale_penalty = 0.97;
    double gaussian_sigma = 0.5;  // Gaussian weight map sigma, in template sides
    // Restrict M and W to even kernels: a transform that can translate feeds tracking error back
    // into the next frame's template or search features.
    bool zero_phase_transforms = true;
    bool subpixel = true;         // parabolic refinement of the response peak
    bool relative_lambda = true;  // scale lambda_m / lambda_w by the source's spectral energy
    std::string extractor = "gray_gradient";
    RedetectConfig redetect;

    void validate() const {
        if (template_size <= 0) throw ParameterError("template_size must be positive");
        if (cell_size < 1) throw ParameterError("cell_size must be >= 1");
        if (template_size % cell_size != 0) throw ParameterError("template_size must be divisible by cell_size");
        if (!(pad_factor >= 1.0)) throw ParameterError("pad_factor must be >= 1");
        if (!(lambda_m >= 0.0) || !(lambda_w >= 0.0)) throw ParameterError("lambda_m and lambda_w must be >= 0");
        if (scale_steps.empty()) throw ParameterError("scale_steps must not be empty");
        for (double s : scale_steps)
            if (!(s > 0.0)) throw ParameterError("scale steps must be positive");
        if (!(scale_penalty > 0.0)) throw ParameterError("scale_penalty must be positive");
        if (!(gaussian_sigma > 0.0)) throw ParameterError("gaussian_sigma must be positive");
        redetect.validate();
    }
};

/// Square search patch resampled from a frame region centred on the tracked target.
struct SearchGeometry {
    double cx = 0.0;
    double cy = 0.0;
    double region_w = 0.0;  // frame pixels covered
    double region_h = 0.0;
    int patch_px = 0;       // resampled patch side
    int cells = 0;          // feature map side
    double pad = 0.0;       // effective pad factor (patch_px / template_size)
    double scale = 1.0;
    bool windowed = true;   // cosine window on the features; off for re-detection regions

    friend bool operator==(const SearchGeometry&, const SearchGeometry&) = default;
};

struct DroneTrackerState {
    int drone_id = 0;
    FeatureMap template_features;  // F1, fixed for the state's lifetime
    Transform variation;           // M, template shaped
    Transform suppression;         // W, search shaped
    BoundingBox current_box;
    double current_scale = 1.0;    // current box size relative to the initial box
    ScoreHistory history{5};
    double running_max_score = 0.0;
    bool border_flag = false;
    bool lost = false;             // last re-detection failed; transforms and statistics are frozen
    int frame_index = 0;
    std::shared_ptr<const Frame> previous_frame;
    // Frame and box the current transforms were solved on, and W solved there for enlarged regions.
    std::shared_ptr<const Frame> reference_frame;
    BoundingBox reference_box;
    std::shared_ptr<std::vector<std::pair<SearchGeometry, Transform>>> enlarged_suppression;
};

/// Response at one search geometry, centred so that zero displacement sits at (cells/2, cells/2).
struct ScaledResponse {
    ResponseMap response;
    SearchGeometry geometry;
};

struct FrameOutcome {
    BoundingBox box;
    double score = 0.0;
    bool redetect_triggered = false;
    bool recovered = false;
    int expansion_steps = 0;
    ScaledResponse used;
};

/// Evaluates the (possibly fused) response for a search geometry given the spectrum of its
/// processed features.
using ResponseFn = std::function<ResponseMap(const SearchGeometry&, const Spectrum& search)>;

class BaseTracker {
public:
    explicit BaseTracker(TrackerConfig cfg = {}, std::shared_ptr<const FeatureExtractor> extractor = nullptr)
        : cfg_(std::move(cfg)),
          extractor_(extractor ? std::move(extractor) : make_extractor(cfg_.extractor, cfg_.cell_size)) {
        cfg_.validate();
        if (extractor_->cell_size() != cfg_.cell_size)
            throw ParameterError("extractor cell size does not match tracker config");
    }

    const TrackerConfig& config() const noexcept { return cfg_; }
    const FeatureExtractor& extractor() const noexcept { return *extractor_; }

    int template_cells() const noexcept { return cfg_.template_size / cfg_.cell_size; }

    SearchGeometry geometry(const BoundingBox& box, double scale, double pad) const {
        // Even cell count so zero displacement sits on a bin; sizes are rounded up to ones the FFT handles fast.
        const int unit = 2 * cfg_.cell_size;
        int px = static_cast<int>(std::lround(cfg_.template_size * pad / unit)) * unit;
        px = std::max(px, cfg_.template_size);
        px = fft_friendly_even(px / cfg_.cell_size) * cfg_.cell_size;
        SearchGeometry g;
        g.cx = box.cx();
        g.cy = box.cy();
        g.patch_px = px;
        g.cells = px / cfg_.cell_size;
        g.pad = static_cast<double>(px) / cfg_.template_size;
        g.scale = scale;
        g.region_w = box.w * scale * g.pad;
        g.region_h = box.h * scale * g.pad;
        return g;
    }

    SearchGeometry default_geometry(const BoundingBox& box, double scale = 1.0) const {
        return geometry(box, scale, cfg_.pad_factor);
    }

    DroneTrackerState init(const Frame& frame, const BoundingBox& gt_box, int drone_id = 0) const {
        if (!gt_box.valid()) throw InvalidBoxError("initial box must have positive width and height");
        DroneTrackerState s;
        s.drone_id = drone_id;
        s.template_features = extractor_->embed(extract_patch(frame, gt_box, 1.0, cfg_.template_size));
        const int tc = s.template_features.height;
        s.variation = Transform::identity(tc, s.template_features.width, s.template_features.channels);
        const SearchGeometry g = default_geometry(gt_box);
        s.suppression = Transform::identity(g.cells, g.cells, extractor_->channels());
        s.current_box = gt_box;
        s.current_scale = 1.0;
        s.history = ScoreHistory(cfg_.redetect.q);
        s.frame_index = frame.frame_index;
        s.previous_frame = std::make_shared<const Frame>(frame);
        s.reference_frame = s.previous_frame;
        s.reference_box = gt_box;
        s.enlarged_suppression = std::make_shared<std::vector<std::pair<SearchGeometry, Transform>>>();
        return s;
    }

    /// M (x) F1
    FeatureMap adapted_template(const DroneTrackerState& s) const {
        return s.variation.apply(s.template_features);
    }

    /// Configured regularization scaled by the mean per-bin spectral energy of the solve's source,
    /// i.e. its mean squared value times the plane size. Makes the transforms invariant to feature scale.
    double effective_lambda(const FeatureMap& source, double lambda) const {
        if (!cfg_.relative_lambda) return lambda;
        double energy = 0.0;
        for (double v : source.values) energy += v * v;
        // featureless source (constant patch): fall back to the absolute value
        return energy > 0.0 ? lambda * energy / source.channels : lambda;
    }

    /// Background-suppression transform for the region `g` would cover around `box` in `frame`.
    Transform solve_suppression_at(const Frame& frame, const BoundingBox& box, const SearchGeometry& g) const {
        const Patch region = extract_region(frame, box.cx(), box.cy(), g.region_w, g.region_h, g.patch_px, g.patch_px);
        const FeatureMap weight = gaussian_weight_map(g.patch_px, g.patch_px, cfg_.gaussian_sigma * cfg_.template_size);
        const FeatureMap plain = windowed_features(region, g);
        const FeatureMap weighted = windowed_features(apply_weight(region, weight), g);
        Transform w = solve_suppression_transform(plain, weighted, effective_lambda(plain, cfg_.lambda_w));
        return cfg_.zero_phase_transforms ? zero_phase(w) : w;
    }

    /// Re-solves M and W from the tracked result on `prev_frame`.
    DroneTrackerState update_transforms(DroneTrackerState s, const Frame& prev_frame) const {
        refresh_transforms(s, prev_frame);
        return s;
    }

    /// In-place form of update_transforms; leaves `s` untouched if a solve throws.
    void refresh_transforms(DroneTrackerState& s, const Frame& prev_frame) const {
        const FeatureMap prev_target =
            extractor_->embed(extract_patch(prev_frame, s.current_box, 1.0, cfg_.template_size));
        Transform m = solve_variation_transform(s.template_features, prev_target,
                                                effective_lambda(s.template_features, cfg_.lambda_m));
        if (cfg_.zero_phase_transforms) m = zero_phase(m);
        Transform w = solve_suppression_at(prev_frame, s.current_box, default_geometry(s.current_box));
        s.variation = std::move(m);
        s.suppression = std::move(w);
        s.reference_frame = s.previous_frame.get() == &prev_frame ? s.previous_frame
                                                                   : std::make_shared<const Frame>(prev_frame);
        s.reference_box = s.current_box;
        s.enlarged_suppression = std::make_shared<std::vector<std::pair<SearchGeometry, Transform>>>();
    }

    /// Embedded search patch, windowed when `g` asks for it, re-centred to zero mean per channel.
    FeatureMap windowed_features(const Patch& patch, const SearchGeometry& g) const {
        FeatureMap out = extractor_->embed(patch);
        if (g.windowed) out = apply_window(out, cosine_window(g.cells, g.cells));
        remove_channel_means(out);
        return out;
    }

    /// Spectrum of W (x) (window * f(Z)) for the search region `g` of `frame`.
    Spectrum search_spectrum(const DroneTrackerState& s, const Frame& frame, const SearchGeometry& g) const {
        const Patch z = extract_region(frame, g.cx, g.cy, g.region_w, g.region_h, g.patch_px, g.patch_px);
        const FeatureMap windowed = windowed_features(z, g);
        if (g.windowed && s.suppression.matches(windowed)) return s.suppression.apply_spectrum(windowed);
        // Re-detection regions get a suppression transform solved at their own size on the
        // reference frame, cached until the transforms are next refreshed.
        auto key = [](const SearchGeometry& a, const SearchGeometry& b) {
            return a.cells == b.cells && a.windowed == b.windowed;
        };
        if (s.enlarged_suppression)
            for (const auto& [geo, w] : *s.enlarged_suppression)
                if (key(geo, g)) return w.apply_spectrum(windowed);
        const Frame& source = s.reference_frame ? *s.reference_frame : frame;
        Transform w = solve_suppression_at(source, s.reference_box, g);
        Spectrum out = w.apply_spectrum(windowed);
        if (s.enlarged_suppression) s.enlarged_suppression->emplace_back(g, std::move(w));
        return out;
    }

    /// W (x) (window * f(Z)) in the spatial domain.
    FeatureMap search_features(const DroneTrackerState& s, const Frame& frame, const SearchGeometry& g) const {
        return ifft_real(search_spectrum(s, frame, g));
    }

    /// Correlation of a template with processed search features, centred on zero displacement.
    ResponseMap respond(const FeatureMap& tmpl, const FeatureMap& search) const {
        return correlate(tmpl, search).rolled(tmpl.height / 2, tmpl.width / 2);
    }

    /// As respond, with the search features already transformed.
    ResponseMap respond(TemplateSpectra& tmpl, const Spectrum& search) const {
        const FeatureMap& t = tmpl.features();
        if (t.channels != search.channels) throw ShapeError("correlate: channel mismatch");
        return correlate_spectra(tmpl.padded(search.height, search.width), search).rolled(t.height / 2, t.width / 2);
    }

    ResponseFn own_response_fn(const DroneTrackerState& s) const {
        auto tmpl = std::make_shared<TemplateSpectra>(adapted_template(s));
        return [this, tmpl](const SearchGeometry&, const Spectrum& search) { return respond(*tmpl, search); };
    }

    /// Best response over the scale set at the default pad; non-unity scales are penalized.
    ScaledResponse scale_search(const DroneTrackerState& s, const Frame& frame, const ResponseFn& fn) const {
        ScaledResponse best;
        double best_rank = -std::numeric_limits<double>::infinity();
        auto consider = [&](double scale) {
            const SearchGeometry g = default_geometry(s.current_box, scale);
            ResponseMap r = fn(g, search_spectrum(s, frame, g));
            const double rank = scale == 1.0 ? r.peak_value : r.peak_value * cfg_.scale_penalty;
            if (rank > best_rank) {
                best_rank = rank;
                best = {std::move(r), g};
            }
        };
        // Unity scale first so that ties keep the current size.
        consider(1.0);
        for (double scale : cfg_.scale_steps)
            if (scale != 1.0) consider(scale);
        return best;
    }

    ScaledResponse compute_own_response(const DroneTrackerState& s, const Frame& frame) const {
        return scale_search(s, frame, own_response_fn(s));
    }

    /// Maps the response peak back to frame coordinates; returns the box and its peak score.
    std::pair<BoundingBox, double> locate(const DroneTrackerState& s, const ScaledResponse& sr) const {
        const auto& g = sr.geometry;
        const auto& r = sr.response;
        const double px_x = cfg_.cell_size * g.region_w / g.patch_px;
        const double px_y = cfg_.cell_size * g.region_h / g.patch_px;
        const auto [dr, dc] = cfg_.subpixel ? r.subpixel_offset() : std::pair{0.0, 0.0};
        const double cx = g.cx + (r.peak_col + dc - r.width / 2) * px_x;
        const double cy = g.cy + (r.peak_row + dr - r.height / 2) * px_y;
        const BoundingBox box = BoundingBox::from_center(cx, cy, s.current_box.w * g.scale, s.current_box.h * g.scale);
        return {box, r.peak_value};
    }

    /// Region for re-detection step `step`; the full-frame cap makes the region span the frame.
    SearchGeometry expand_search(const DroneTrackerState& s, const Frame& frame, int step) const {
        const double full = std::max(frame.width / s.current_box.w, frame.height / s.current_box.h);
        SearchGeometry g = geometry(s.current_box, 1.0, expanded_pad(cfg_.pad_factor, step, cfg_.redetect, full));
        g.windowed = false;
        return g;
    }

    /// Tracks one frame with already-updated transforms, running re-detection when enabled.
    FrameOutcome track_frame(DroneTrackerState& s, std::shared_ptr<const Frame> frame, const ResponseFn& fn,
                             bool redetect_enabled) const {
        FrameOutcome out;
        out.used = scale_search(s, *frame, fn);
        std::tie(out.box, out.score) = locate(s, out.used);
        s.border_flag = out.used.response.peak_on_border();

        if (redetect_enabled) {
            const auto& rc = cfg_.redetect;
            const double omega = s.history.full() ? threshold(s.history, rc.lambda)
                                                  : -std::numeric_limits<double>::infinity();
            const double floor = rc.t_score * s.running_max_score;
            if (s.border_flag || should_redetect(out.score, omega, floor)) {
                out.redetect_triggered = true;
                FrameOutcome best = out;
                double last_pad = out.used.geometry.pad;
                for (int step = 1;; ++step) {
                    const SearchGeometry g = expand_search(s, *frame, step);
                    if (g.pad <= last_pad) break;
                    last_pad = g.pad;
                    ScaledResponse cand{fn(g, search_spectrum(s, *frame, g)), g};
                    auto [box, score] = locate(s, cand);
                    if (score > best.score) {
                        best.used = std::move(cand);
                        best.box = box;
                        best.score = score;
                        best.expansion_steps = step;
                    }
                    if (score >= omega && score >= floor) {
                        best.recovered = true;
                        break;
                    }
                }
                out = std::move(best);
                out.redetect_triggered = true;
                if (out.recovered) s.history.clear();
            }
        }

        // An unrecovered target follows the best candidate, but transforms and statistics stay
        // frozen so the template is not learned from background.
        s.lost = out.redetect_triggered && !out.recovered;
        if (!s.lost) {
            s.history.push(out.score);
            s.running_max_score = std::max(s.running_max_score, out.score);
        }
        s.current_box = out.box;
        s.current_scale *= out.used.geometry.scale;
        s.frame_index = frame->frame_index;
        s.previous_frame = std::move(frame);
        return out;
    }

    /// Autocorrelation score on the initialization frame; seeds the score statistics.
    double seed_score(DroneTrackerState& s) const {
        const SearchGeometry g = default_geometry(s.current_box);
        const double score = own_response_fn(s)(g, search_spectrum(s, *s.previous_frame, g)).peak_value;
        s.history.push(score);
        s.running_max_score = std::max(s.running_max_score, score);
        return score;
    }

    /// One full step: refresh transforms from the previous frame (unless the target is lost), then track.
    FrameOutcome step(DroneTrackerState& s, std::shared_ptr<const Frame> frame) const {
        if (!s.lost) refresh_transforms(s, *s.previous_frame);
        return track_frame(s, std::move(frame), own_response_fn(s), cfg_.redetect.enabled);
    }

    Trajectory track_sequence(std::span<const Frame> frames, const BoundingBox& gt0) const {
        if (frames.empty()) throw ParameterError("track_sequence needs at least one frame");
        Trajectory traj;
        traj.entries.reserve(frames.size());
        DroneTrackerState s = init(frames[0], gt0);
        traj.entries.push_back({gt0, seed_score(s), kNoView});
        for (std::size_t t = 1; t < frames.size(); ++t) {
            FrameOutcome o;
            try {
                o = step(s, std::make_shared<const Frame>(frames[t]));
            } catch (const Error&) {
                traj.entries.push_back({s.current_box, 0.0, kNoView});
                continue;
            }
            traj.entries.push_back({o.box, o.score, kNoView});
        }
        return traj;
    }

private:
    TrackerConfig cfg_;
    std::shared_ptr<const FeatureExtractor> extractor_;
};

}  // namespace asnet
