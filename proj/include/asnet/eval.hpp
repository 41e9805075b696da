#pragma once

// One-pass evaluation: overlap and centre-error curves, the automatic and ideal fusion scores,
// and attribute-conditioned summaries.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "asnet/dataio.hpp"
#include "asnet/error.hpp"
#include "asnet/imaging.hpp"
#include "asnet/trajectory.hpp"

namespace asnet {

inline double iou(const BoundingBox& a, const BoundingBox& b) {
    const double iw = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
    const double ih = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

inline double center_error(const BoundingBox& a, const BoundingBox& b) {
    return std::hypot(a.cx() - b.cx(), a.cy() - b.cy());
}

inline constexpr double kPrecisionThreshold = 20.0;

struct EvalCurve {
    std::vector<double> thresholds;
    std::vector<double> values;
    double auc = 0.0;

    /// Value at the grid point equal to `threshold`.
    double value_at(double threshold) const {
        for (std::size_t i = 0; i < thresholds.size(); ++i)
            if (std::abs(thresholds[i] - threshold) < 1e-9) return values[i];
        throw ParameterError("threshold not on the curve grid");
    }
};

/// {0.00, 0.01, ..., 1.00}
inline std::vector<double> success_grid() {
    std::vector<double> g(101);
    for (int i = 0; i <= 100; ++i) g[i] = i / 100.0;
    return g;
}

/// {0, 1, ..., 50} pixels
inline std::vector<double> precision_grid() {
    std::vector<double> g(51);
    for (int i = 0; i <= 50; ++i) g[i] = i;
    return g;
}

namespace detail {

template <typename Pred>
EvalCurve curve_over(std::vector<double> grid, std::span<const double> samples, Pred pass) {
    EvalCurve c;
    c.thresholds = std::move(grid);
    c.values.assign(c.thresholds.size(), 0.0);
    if (!samples.empty()) {
        for (std::size_t i = 0; i < c.thresholds.size(); ++i) {
            std::size_t hits = 0;
            for (double s : samples) hits += pass(s, c.thresholds[i]) ? 1 : 0;
            c.values[i] = static_cast<double>(hits) / static_cast<double>(samples.size());
        }
    }
    double sum = 0.0;
    for (double v : c.values) sum += v;
    c.auc = sum / static_cast<double>(c.values.size());
    return c;
}

}  // namespace detail

/// Fraction of overlaps strictly above each threshold.
inline EvalCurve success_curve_from(std::span<const double> overlaps) {
    return detail::curve_over(success_grid(), overlaps, [](double s, double t) { return s > t; });
}

/// Fraction of centre errors at or below each threshold.
inline EvalCurve precision_curve_from(std::span<const double> errors) {
    return detail::curve_over(precision_grid(), errors, [](double s, double t) { return s <= t; });
}

namespace detail {

inline void check_aligned(std::size_t traj, std::size_t gt) {
    if (traj != gt)
        throw AlignmentError("trajectory has " + std::to_string(traj) + " frames, ground truth has " +
                             std::to_string(gt));
}

}  // namespace detail

/// Per-frame overlaps, skipping frames whose ground truth is out of view.
inline std::vector<double> overlaps(const Trajectory& traj, std::span<const std::optional<BoundingBox>> gt) {
    detail::check_aligned(traj.size(), gt.size());
    std::vector<double> out;
    for (std::size_t i = 0; i < gt.size(); ++i)
        if (gt[i]) out.push_back(iou(traj[i].box, *gt[i]));
    return out;
}

inline std::vector<double> center_errors(const Trajectory& traj, std::span<const std::optional<BoundingBox>> gt) {
    detail::check_aligned(traj.size(), gt.size());
    std::vector<double> out;
    for (std::size_t i = 0; i < gt.size(); ++i)
        if (gt[i]) out.push_back(center_error(traj[i].box, *gt[i]));
    return out;
}

inline EvalCurve success_curve(const Trajectory& traj, std::span<const std::optional<BoundingBox>> gt) {
    return success_curve_from(overlaps(traj, gt));
}

inline EvalCurve precision_curve(const Trajectory& traj, std::span<const std::optional<BoundingBox>> gt) {
    return precision_curve_from(center_errors(traj, gt));
}

enum class FrameScoreMode { Success, Precision };

/// s(h, y): overlap, or the indicator of a centre error within the precision threshold.
inline double frame_score(const BoundingBox& h, const BoundingBox& y, FrameScoreMode mode) {
    if (mode == FrameScoreMode::Success) return iou(h, y);
    return center_error(h, y) <= kPrecisionThreshold ? 1.0 : 0.0;
}

/// Matrix of frame scores, scores[v][i].
using ScoreMatrix = std::vector<std::vector<double>>;

namespace detail {

inline std::size_t check_matrix(const ScoreMatrix& scores) {
    if (scores.empty()) throw ParameterError("score matrix has no views");
    const std::size_t n = scores[0].size();
    for (const auto& row : scores)
        if (row.size() != n) throw AlignmentError("score matrix rows differ in length");
    return n;
}

}  // namespace detail

/// Mean over frames of the weighted frame scores; every weight row must be one-hot.
inline double afs(const ScoreMatrix& scores, const std::vector<std::vector<int>>& weights) {
    const std::size_t n = detail::check_matrix(scores);
    if (weights.size() != n) throw AlignmentError("weights must have one row per frame");
    if (n == 0) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = weights[i];
        if (row.size() != scores.size()) throw InvalidWeightsError("weight row length differs from view count");
        int ones = 0;
        for (std::size_t v = 0; v < row.size(); ++v) {
            if (row[v] != 0 && row[v] != 1) throw InvalidWeightsError("weights must be 0 or 1");
            if (row[v] == 1) {
                ++ones;
                sum += scores[v][i];
            }
        }
        if (ones != 1) throw InvalidWeightsError("frame " + std::to_string(i) + " weight row is not one-hot");
    }
    return sum / static_cast<double>(n);
}

/// One-hot weight rows from per-frame selected view indices.
inline std::vector<std::vector<int>> one_hot_rows(std::span<const int> selected, std::size_t views) {
    std::vector<std::vector<int>> rows;
    rows.reserve(selected.size());
    for (int s : selected) {
        if (s < 0 || static_cast<std::size_t>(s) >= views)
            throw InvalidWeightsError("selected view " + std::to_string(s) + " out of range");
        std::vector<int> r(views, 0);
        r[s] = 1;
        rows.push_back(std::move(r));
    }
    return rows;
}

/// Mean over frames of the best view's frame score.
inline double ifs(const ScoreMatrix& scores) {
    const std::size_t n = detail::check_matrix(scores);
    if (n == 0) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double best = scores[0][i];
        for (const auto& row : scores) best = std::max(best, row[i]);
        sum += best;
    }
    return sum / static_cast<double>(n);
}

/// Frame-score matrix of a group. Frames where every view is out of view are dropped; an
/// out-of-view entry otherwise scores 0. `kept` receives the surviving frame indices.
inline ScoreMatrix group_score_matrix(const GroupResult& result, const GroupSequence& seq, FrameScoreMode mode,
                                      std::vector<std::size_t>* kept = nullptr) {
    if (result.views.size() != seq.views.size())
        throw AlignmentError("result has " + std::to_string(result.views.size()) + " views, group has " +
                             std::to_string(seq.views.size()));
    const std::size_t n = seq.views.empty() ? 0 : seq.views[0].ground_truth.size();
    for (std::size_t v = 0; v < seq.views.size(); ++v) {
        detail::check_aligned(result.views[v].size(), seq.views[v].ground_truth.size());
        detail::check_aligned(seq.views[v].ground_truth.size(), n);
    }
    ScoreMatrix m(seq.views.size());
    for (std::size_t i = 0; i < n; ++i) {
        bool any = false;
        for (const auto& view : seq.views) any = any || view.ground_truth[i].has_value();
        if (!any) continue;
        if (kept) kept->push_back(i);
        for (std::size_t v = 0; v < seq.views.size(); ++v) {
            const auto& gt = seq.views[v].ground_truth[i];
            m[v].push_back(gt ? frame_score(result.views[v][i].box, *gt, mode) : 0.0);
        }
    }
    return m;
}

/// Everything needed to aggregate one group with others by pooling frames.
struct GroupEvaluation {
    std::string group_id;
    AttributeSet attributes;
    std::vector<EvalCurve> view_success;
    std::vector<EvalCurve> view_precision;
    std::vector<double> pooled_overlaps;  // all views, in-view frames
    std::vector<double> pooled_errors;
    // Selected-view and best-view frame scores; the selected ones are absent when the run logged
    // no view selection.
    std::optional<std::vector<double>> afs_success_frames;
    std::optional<std::vector<double>> afs_precision_frames;
    std::vector<double> ifs_success_frames;
    std::vector<double> ifs_precision_frames;
};

inline GroupEvaluation evaluate_group(const GroupResult& result, const GroupSequence& seq) {
    GroupEvaluation ev;
    ev.group_id = seq.group_id;
    ev.attributes = seq.attributes;
    if (result.views.size() != seq.views.size()) throw AlignmentError("view count mismatch for group " + seq.group_id);
    for (std::size_t v = 0; v < seq.views.size(); ++v) {
        const auto ov = overlaps(result.views[v], seq.views[v].ground_truth);
        const auto ce = center_errors(result.views[v], seq.views[v].ground_truth);
        ev.view_success.push_back(success_curve_from(ov));
        ev.view_precision.push_back(precision_curve_from(ce));
        ev.pooled_overlaps.insert(ev.pooled_overlaps.end(), ov.begin(), ov.end());
        ev.pooled_errors.insert(ev.pooled_errors.end(), ce.begin(), ce.end());
    }
    std::vector<std::size_t> kept;
    const ScoreMatrix ms = group_score_matrix(result, seq, FrameScoreMode::Success, &kept);
    const ScoreMatrix mp = group_score_matrix(result, seq, FrameScoreMode::Precision);
    const std::size_t views = seq.views.size();
    for (std::size_t j = 0; j < kept.size(); ++j) {
        double bs = 0.0, bp = 0.0;
        for (std::size_t v = 0; v < views; ++v) {
            bs = std::max(bs, ms[v][j]);
            bp = std::max(bp, mp[v][j]);
        }
        ev.ifs_success_frames.push_back(bs);
        ev.ifs_precision_frames.push_back(bp);
    }
    detail::check_aligned(result.selected.size(), views ? seq.views[0].ground_truth.size() : 0);
    const bool selected = std::all_of(result.selected.begin(), result.selected.end(), [&](int s) {
        return s >= 0 && static_cast<std::size_t>(s) < views;
    });
    if (selected) {
        std::vector<double> s, p;
        for (std::size_t j = 0; j < kept.size(); ++j) {
            const int b = result.selected[kept[j]];
            s.push_back(ms[b][j]);
            p.push_back(mp[b][j]);
        }
        ev.afs_success_frames = std::move(s);
        ev.afs_precision_frames = std::move(p);
    }
    return ev;
}

struct MetricSummary {
    int groups = 0;
    EvalCurve success;
    EvalCurve precision;
    double success_auc = 0.0;
    double precision_20px = 0.0;
    std::optional<double> afs_success;
    std::optional<double> afs_precision;
    double ifs_success = 0.0;
    double ifs_precision = 0.0;
};

namespace detail {

inline double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace detail

/// Pools the frames of all given groups.
inline MetricSummary summarize(std::span<const GroupEvaluation* const> groups) {
    MetricSummary m;
    m.groups = static_cast<int>(groups.size());
    std::vector<double> ov, ce, is, ip, as, ap;
    bool have_afs = !groups.empty();
    for (const auto* g : groups) {
        ov.insert(ov.end(), g->pooled_overlaps.begin(), g->pooled_overlaps.end());
        ce.insert(ce.end(), g->pooled_errors.begin(), g->pooled_errors.end());
        is.insert(is.end(), g->ifs_success_frames.begin(), g->ifs_success_frames.end());
        ip.insert(ip.end(), g->ifs_precision_frames.begin(), g->ifs_precision_frames.end());
        if (g->afs_success_frames) {
            as.insert(as.end(), g->afs_success_frames->begin(), g->afs_success_frames->end());
            ap.insert(ap.end(), g->afs_precision_frames->begin(), g->afs_precision_frames->end());
        } else {
            have_afs = false;
        }
    }
    m.success = success_curve_from(ov);
    m.precision = precision_curve_from(ce);
    m.success_auc = m.success.auc;
    m.precision_20px = m.precision.value_at(kPrecisionThreshold);
    m.ifs_success = detail::mean(is);
    m.ifs_precision = detail::mean(ip);
    if (have_afs) {
        m.afs_success = detail::mean(as);
        m.afs_precision = detail::mean(ap);
    }
    return m;
}

inline MetricSummary summarize(std::span<const GroupEvaluation> groups) {
    std::vector<const GroupEvaluation*> ptrs;
    for (const auto& g : groups) ptrs.push_back(&g);
    return summarize(std::span<const GroupEvaluation* const>(ptrs));
}

struct AttributeRow {
    Attribute attribute;
    std::optional<MetricSummary> metrics;  // absent when no group carries the flag
};

/// One row per requested attribute, pooling the groups that carry it.
inline std::vector<AttributeRow> attribute_breakdown(std::span<const GroupEvaluation> groups,
                                                     std::span<const Attribute> which) {
    std::vector<AttributeRow> rows;
    for (Attribute a : which) {
        std::vector<const GroupEvaluation*> subset;
        for (const auto& g : groups)
            if (g.attributes.has(a)) subset.push_back(&g);
        AttributeRow row{a, std::nullopt};
        if (!subset.empty()) row.metrics = summarize(std::span<const GroupEvaluation* const>(subset));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::vector<AttributeRow> attribute_breakdown(std::span<const GroupEvaluation> groups) {
    std::vector<Attribute> all;
    for (std::size_t i = 0; i < kAttributeNames.size(); ++i) all.push_back(static_cast<Attribute>(i));
    return attribute_breakdown(groups, all);
}

inline std::vector<AttributeRow> attribute_breakdown(std::span<const GroupEvaluation> groups,
                                                     std::span<const std::string> names) {
    std::vector<Attribute> which;
    for (const auto& n : names) which.push_back(attribute_from_name(n));
    return attribute_breakdown(groups, which);
}

/// "threshold,value" rows.
inline std::string curve_csv(const EvalCurve& c) {
    std::string out = "";
    char buf[64];
    for (std::size_t i = 0; i < c.thresholds.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.2f,%.6f\n", c.thresholds[i], c.values[i]);
        out += buf;
    }
    return out;
}

enum class MetricSelection { Success, Precision, Both };

inline MetricSelection metric_selection_from(const std::string& name) {
    if (name == "success") return MetricSelection::Success;
    if (name == "precision") return MetricSelection::Precision;
    if (name == "both") return MetricSelection::Both;
    throw ParameterError("metric must be success, precision or both");
}

inline nlohmann::ordered_json metrics_json(const MetricSummary& m, MetricSelection sel) {
    nlohmann::ordered_json j;
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); };
    const bool s = sel != MetricSelection::Precision;
    const bool p = sel != MetricSelection::Success;
    if (s) j["success_auc"] = m.success_auc;
    if (p) j["precision_20px"] = m.precision_20px;
    if (s) j["afs_success"] = opt(m.afs_success);
    if (p) j["afs_precision"] = opt(m.afs_precision);
    if (s) j["ifs_success"] = m.ifs_success;
    if (p) j["ifs_precision"] = m.ifs_precision;
    return j;
}

/// Summary document: overall metrics, per-attribute rows (null when absent) and per-group,
/// per-view one-pass scores.
inline nlohmann::ordered_json summary_json(std::span<const GroupEvaluation> groups, MetricSelection sel) {
    nlohmann::ordered_json j = metrics_json(summarize(groups), sel);
    nlohmann::ordered_json attrs = nlohmann::ordered_json::object();
    for (const auto& row : attribute_breakdown(groups)) {
        const std::string name = kAttributeNames[static_cast<std::size_t>(row.attribute)];
        attrs[name] = row.metrics ? metrics_json(*row.metrics, sel) : nlohmann::ordered_json();
    }
    j["per_attribute"] = attrs;
    nlohmann::ordered_json per_group = nlohmann::ordered_json::array();
    for (const auto& g : groups) {
        nlohmann::ordered_json gj;
        gj["group"] = g.group_id;
        nlohmann::ordered_json views = nlohmann::ordered_json::array();
        for (std::size_t v = 0; v < g.view_success.size(); ++v) {
            nlohmann::ordered_json vj;
            if (sel != MetricSelection::Precision) vj["success_auc"] = g.view_success[v].auc;
            if (sel != MetricSelection::Success) vj["precision_20px"] = g.view_precision[v].value_at(kPrecisionThreshold);
            views.push_back(vj);
        }
        gj["views"] = views;
        const GroupEvaluation* one[] = {&g};
        gj["metrics"] = metrics_json(summarize(std::span<const GroupEvaluation* const>(one)), sel);
        per_group.push_back(gj);
    }
    j["groups"] = per_group;
    return j;
}

}  // namespace asnet
