#pragma once

// Agent sharing across views: cross-view responses, fusion-weight regression, fused maps and
// view-aware selection.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "asnet/error.hpp"
#include "asnet/tracker.hpp"
#include "asnet/trajectory.hpp"

namespace asnet {

enum class ScoreNormalization { None, RunningMax };

inline std::string normalization_name(ScoreNormalization n) {
    return n == ScoreNormalization::None ? "none" : "running_max";
}

inline ScoreNormalization normalization_from_name(const std::string& name) {
    if (name == "none") return ScoreNormalization::None;
    if (name == "running_max") return ScoreNormalization::RunningMax;
    throw ParameterError("unknown score normalization '" + name + "'");
}

struct FusionConfig {
    double lambda_u = 0.01;
    bool template_sharing = true;
    bool view_fusion = true;
    ScoreNormalization normalization = ScoreNormalization::None;

    void validate() const {
        if (!(lambda_u >= 0.0) || !std::isfinite(lambda_u)) throw ParameterError("lambda_u must be finite and >= 0");
    }
};

struct FusionWeights {
    std::vector<double> u;

    std::size_t size() const noexcept { return u.size(); }
    bool valid() const noexcept {
        return !u.empty() && std::all_of(u.begin(), u.end(), [](double x) { return std::isfinite(x); });
    }

    static FusionWeights one_hot(std::size_t views, std::size_t at) {
        FusionWeights w;
        w.u.assign(views, 0.0);
        w.u.at(at) = 1.0;
        return w;
    }

    friend bool operator==(const FusionWeights&, const FusionWeights&) = default;
};

namespace detail {

// Solves A x = b in place by Gaussian elimination with partial pivoting. Returns false when a
// pivot is negligible relative to the matrix scale.
inline bool solve_dense(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
    double scale = 0.0;
    for (double v : a) scale = std::max(scale, std::abs(v));
    const double tiny = scale * static_cast<double>(n) * std::numeric_limits<double>::epsilon();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
        if (!(std::abs(a[piv * n + col]) > tiny)) return false;
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
            std::swap(b[col], b[piv]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r * n + col] / a[col * n + col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
            b[r] -= f * b[col];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        double acc = b[i];
        for (std::size_t c = i + 1; c < n; ++c) acc -= a[i * n + c] * b[c];
        b[i] = acc / a[i * n + i];
    }
    return true;
}

}  // namespace detail

/// u = (D^T D + lambda_u I)^-1 D^T y with D's columns the row-major (h, w, c) flattened features.
inline FusionWeights learn_fusion_weights(std::span<const FeatureMap> tracked, const FeatureMap& target,
                                          double lambda_u) {
    if (tracked.empty()) throw ParameterError("learn_fusion_weights: no views");
    if (!(lambda_u >= 0.0) || !std::isfinite(lambda_u)) throw ParameterError("lambda_u must be finite and >= 0");
    for (const auto& f : tracked)
        if (!f.same_shape(target)) throw ShapeError("learn_fusion_weights: feature shape mismatch");
    const std::size_t v = tracked.size();
    std::vector<std::vector<double>> cols;
    cols.reserve(v);
    for (const auto& f : tracked) cols.push_back(f.flatten_hwc());
    const std::vector<double> y = target.flatten_hwc();
    auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    };
    std::vector<double> gram(v * v), rhs(v);
    for (std::size_t i = 0; i < v; ++i) {
        for (std::size_t j = i; j < v; ++j) gram[i * v + j] = gram[j * v + i] = dot(cols[i], cols[j]);
        gram[i * v + i] += lambda_u;
        rhs[i] = dot(cols[i], y);
    }
    if (!detail::solve_dense(gram, rhs, v))
        throw SingularSystemError("fusion weights: singular normal equations");
    FusionWeights w{std::move(rhs)};
    if (!w.valid()) throw SingularSystemError("fusion weights: non-finite solution");
    return w;
}

/// S = sum_v u_v * S^v; the peak is recomputed on the fused map.
inline ResponseMap fuse_responses(std::span<const ResponseMap> maps, const FusionWeights& w) {
    if (maps.empty()) throw ParameterError("fuse_responses: no maps");
    if (maps.size() != w.size()) throw ShapeError("fuse_responses: weight count does not match map count");
    std::vector<double> acc(maps[0].values.size(), 0.0);
    for (std::size_t v = 0; v < maps.size(); ++v) {
        if (!maps[v].same_shape(maps[0])) throw ShapeError("fuse_responses: response shape mismatch");
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w.u[v] * maps[v].values[i];
    }
    return ResponseMap(maps[0].height, maps[0].width, std::move(acc));
}

/// Index of the highest score; ties go to the lowest index.
inline int select_best_view(std::span<const double> scores) {
    if (scores.empty()) throw ParameterError("select_best_view: no scores");
    int best = 0;
    for (std::size_t v = 0; v < scores.size(); ++v) {
        if (!std::isfinite(scores[v])) throw ParameterError("select_best_view: non-finite score");
        if (scores[v] > scores[best]) best = static_cast<int>(v);
    }
    return best;
}

struct AgentGroupState {
    std::vector<DroneTrackerState> views;
    std::vector<FusionWeights> weights;
    std::vector<double> scores;  // latest per-view tracking scores
    int selected_view = 0;
    int frame_index = 0;

    std::size_t size() const noexcept { return views.size(); }
};

struct GroupStep {
    std::vector<BoundingBox> boxes;
    std::vector<double> scores;
    int selected_view = kNoView;
    BoundingBox selected_box;
};

class AsnetTracker {
public:
    explicit AsnetTracker(TrackerConfig tcfg = {}, FusionConfig fcfg = {},
                          std::shared_ptr<const FeatureExtractor> extractor = nullptr)
        : base_(std::move(tcfg), std::move(extractor)), fcfg_(fcfg) {
        fcfg_.validate();
    }

    const BaseTracker& base() const noexcept { return base_; }
    const FusionConfig& fusion_config() const noexcept { return fcfg_; }

    /// S^{kv}: view k's processed search region against view v's adapted template.
    ResponseMap cross_response(const DroneTrackerState& k_state, const DroneTrackerState& v_state,
                               const Frame& frame_k) const {
        TemplateSpectra tmpl(base_.adapted_template(v_state));
        if (!tmpl.features().same_shape(base_.adapted_template(k_state)))
            throw ShapeError("cross_response: template shapes differ across views");
        auto fn = [this, &tmpl](const SearchGeometry&, const Spectrum& search) { return base_.respond(tmpl, search); };
        return base_.scale_search(k_state, frame_k, fn).response;
    }

    AgentGroupState init_group(std::span<const Frame> frames, std::span<const BoundingBox> boxes) const {
        if (frames.empty()) throw ParameterError("init_group: no views");
        if (frames.size() != boxes.size()) throw SyncError("init_group: frame and box counts differ");
        check_synchronized(frames[0].frame_index, frames);
        AgentGroupState g;
        std::vector<double> seeds;
        for (std::size_t v = 0; v < frames.size(); ++v) {
            g.views.push_back(base_.init(frames[v], boxes[v], static_cast<int>(v)));
            seeds.push_back(base_.seed_score(g.views.back()));
            g.weights.push_back(FusionWeights::one_hot(frames.size(), v));
        }
        g.selected_view = select_best_view(seeds);
        g.scores = std::move(seeds);
        g.frame_index = frames[0].frame_index;
        return g;
    }

    /// Advances every view by one synchronized frame and selects the best view.
    GroupStep step_group(AgentGroupState& g, std::span<const std::shared_ptr<const Frame>> frames) const {
        const std::size_t n = g.size();
        if (frames.size() != n)
            throw SyncError("step_group: expected " + std::to_string(n) + " frames, got " + std::to_string(frames.size()));
        for (const auto& f : frames)
            if (!f) throw SyncError("step_group: missing frame");
        const int t = frames[0]->frame_index;
        for (const auto& f : frames)
            if (f->frame_index != t) throw SyncError("step_group: frames are not synchronized");
        if (t <= g.frame_index) throw SyncError("step_group: frame index does not advance");

        // Transforms for t-1 first, so that every view's template is available to the others.
        std::vector<bool> ok(n, true);
        for (std::size_t k = 0; k < n; ++k) {
            try {
                if (!g.views[k].lost) base_.refresh_transforms(g.views[k], *g.views[k].previous_frame);
            } catch (const SyncError&) {
                throw;
            } catch (const Error&) {
                ok[k] = false;
            }
        }
        std::vector<std::shared_ptr<TemplateSpectra>> templates(n);
        for (std::size_t v = 0; v < n; ++v)
            templates[v] = std::make_shared<TemplateSpectra>(base_.adapted_template(g.views[v]));

        GroupStep out;
        out.boxes.resize(n);
        out.scores.resize(n);
        std::vector<double> rank(n);
        for (std::size_t k = 0; k < n; ++k) {
            auto& s = g.views[k];
            const double prior_max = s.running_max_score;
            try {
                if (!ok[k]) throw Error("transform update failed");
                auto weights = std::make_shared<std::optional<FusionWeights>>();
                const bool share = fcfg_.template_sharing && n > 1;
                ResponseFn fn = share ? fused_response_fn(s, k, frames[k], templates, weights) : base_.own_response_fn(s);
                const FrameOutcome o = base_.track_frame(s, frames[k], fn, base_.config().redetect.enabled);
                out.boxes[k] = o.box;
                out.scores[k] = o.score;
                g.weights[k] = weights->value_or(FusionWeights::one_hot(n, k));
            } catch (const SyncError&) {
                throw;
            } catch (const Error&) {
                out.boxes[k] = s.current_box;
                out.scores[k] = 0.0;
            }
            rank[k] = out.scores[k];
            if (fcfg_.normalization == ScoreNormalization::RunningMax)
                rank[k] = prior_max > 0.0 ? out.scores[k] / prior_max : out.scores[k];
        }
        g.frame_index = t;
        g.scores = out.scores;
        if (fcfg_.view_fusion) {
            out.selected_view = select_best_view(rank);
            out.selected_box = out.boxes[out.selected_view];
            g.selected_view = out.selected_view;
        }
        return out;
    }

    /// Runs a whole group; frames[v][t] is view v's frame t.
    GroupResult track_group(const std::vector<std::vector<Frame>>& frames, std::span<const BoundingBox> init_boxes) const {
        if (frames.empty()) throw ParameterError("track_group: no views");
        const std::size_t n_frames = frames[0].size();
        for (const auto& view : frames)
            if (view.size() != n_frames)
                throw SyncError("track_group: views have different frame counts (" + std::to_string(view.size()) +
                                " vs " + std::to_string(n_frames) + ")");
        return track_group_from(frames.size(), n_frames,
                                [&](std::size_t v, std::size_t t) { return std::make_shared<const Frame>(frames[v][t]); },
                                init_boxes);
    }

    /// Same, pulling frames on demand from frame_at(v, t). When given, *tracking_seconds receives
    /// the wall time spent inside the tracker, excluding frame_at.
    template <typename FrameAt>
    GroupResult track_group_from(std::size_t n_views, std::size_t n_frames, FrameAt&& frame_at,
                                 std::span<const BoundingBox> init_boxes, double* tracking_seconds = nullptr) const {
        using clock = std::chrono::steady_clock;
        if (n_views == 0) throw ParameterError("track_group: no views");
        if (n_frames == 0) throw ParameterError("track_group: empty sequence");
        double spent = 0.0;
        std::vector<Frame> first;
        for (std::size_t v = 0; v < n_views; ++v) first.push_back(*frame_at(v, 0));
        auto t0 = clock::now();
        AgentGroupState g = init_group(first, init_boxes);
        spent += std::chrono::duration<double>(clock::now() - t0).count();
        first.clear();

        GroupResult res;
        res.views.resize(n_views);
        for (std::size_t v = 0; v < n_views; ++v) res.views[v].entries.push_back({init_boxes[v], g.scores[v], kNoView});
        const int sel0 = fcfg_.view_fusion ? g.selected_view : kNoView;
        res.selected.push_back(sel0);
        for (auto& traj : res.views) traj.entries.back().selected_view = sel0;

        std::vector<std::shared_ptr<const Frame>> step_frames(n_views);
        for (std::size_t t = 1; t < n_frames; ++t) {
            for (std::size_t v = 0; v < n_views; ++v) step_frames[v] = frame_at(v, t);
            t0 = clock::now();
            const GroupStep st = step_group(g, step_frames);
            spent += std::chrono::duration<double>(clock::now() - t0).count();
            for (std::size_t v = 0; v < n_views; ++v)
                res.views[v].entries.push_back({st.boxes[v], st.scores[v], st.selected_view});
            res.selected.push_back(st.selected_view);
        }
        if (tracking_seconds) *tracking_seconds = spent;
        return res;
    }

private:
    // With relative regularization lambda_u is scaled by the energy of the regression target y, so
    // that nearly collinear columns stay well posed and low-energy crops (an occluded target)
    // cannot inflate the weights.
    double effective_lambda_u(const FeatureMap& target) const {
        if (!base_.config().relative_lambda) return fcfg_.lambda_u;
        double energy = 0.0;
        for (double x : target.values) energy += x * x;
        return energy > 0.0 ? fcfg_.lambda_u * energy : fcfg_.lambda_u;
    }

    static void check_synchronized(int index, std::span<const Frame> frames) {
        for (const auto& f : frames)
            if (f.frame_index != index) throw SyncError("frames are not synchronized");
    }

    // Response for view k at any search geometry: all cross-view maps fused with u. The weights
    // are learned once per frame, at the first geometry evaluated (the default region at the
    // current scale), from template-sized crops at each map's peak; later scales and enlarged
    // regions reuse them.
    ResponseFn fused_response_fn(const DroneTrackerState& s, std::size_t k, std::shared_ptr<const Frame> frame,
                                 std::vector<std::shared_ptr<TemplateSpectra>> templates,
                                 std::shared_ptr<std::optional<FusionWeights>> weights) const {
        return [this, &s, k, frame = std::move(frame), templates = std::move(templates),
                weights = std::move(weights)](const SearchGeometry& geo, const Spectrum& search) {
            std::vector<ResponseMap> maps;
            for (const auto& tmpl : templates) {
                if (!tmpl->features().same_shape(templates[k]->features()))
                    throw ShapeError("cross_response: template shapes differ across views");
                maps.push_back(base_.respond(*tmpl, search));
            }
            if (!weights->has_value()) {
                const int size = base_.config().template_size;
                std::vector<FeatureMap> tracked;
                for (const auto& m : maps) {
                    const BoundingBox box = base_.locate(s, ScaledResponse{m, geo}).first;
                    tracked.push_back(base_.extractor().embed(extract_patch(*frame, box, 1.0, size)));
                }
                *weights = learn_fusion_weights(tracked, templates[k]->features(), effective_lambda_u(templates[k]->features()));
            }
            return fuse_responses(maps, **weights);
        };
    }

    BaseTracker base_;
    FusionConfig fcfg_;
};

}  // namespace asnet
