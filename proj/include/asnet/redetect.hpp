#pragma once

// Loss detection from recent peak-score statistics and local-to-global search expansion.

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "asnet/error.hpp"

namespace asnet {

struct RedetectConfig {
    bool enabled = true;
    double lambda = 2.0;          // multiplier on the score stdev
    double t_score = 0.05;        // absolute floor, as a fraction of the running maximum score
    int q = 5;                    // history length
    double expand_factor = 1.5;
    int max_expansions = 3;       // geometric steps before the full-frame search

    void validate() const {
        if (!(lambda > 0.0)) throw ParameterError("redetect.lambda must be > 0");
        if (!(t_score >= 0.0)) throw ParameterError("redetect.t_score must be >= 0");
        if (q < 1) throw ParameterError("redetect.q must be >= 1");
        if (!(expand_factor > 1.0)) throw ParameterError("redetect.expand_factor must be > 1");
        if (max_expansions < 0) throw ParameterError("redetect.max_expansions must be >= 0");
    }
};

/// Ring buffer of the last q peak scores with exact population statistics.
class ScoreHistory {
public:
    explicit ScoreHistory(int capacity = 5) : capacity_(capacity) {
        if (capacity < 1) throw ParameterError("score history capacity must be >= 1");
    }

    void push(double score) {
        if (static_cast<int>(scores_.size()) == capacity_) scores_.pop_front();
        scores_.push_back(score);
    }
    void clear() noexcept { scores_.clear(); }

    int capacity() const noexcept { return capacity_; }
    int size() const noexcept { return static_cast<int>(scores_.size()); }
    bool empty() const noexcept { return scores_.empty(); }
    bool full() const noexcept { return size() == capacity_; }
    const std::deque<double>& scores() const noexcept { return scores_; }

    double mean() const {
        if (empty()) throw ParameterError("mean of empty score history");
        double s = 0.0;
        for (double v : scores_) s += v;
        return s / static_cast<double>(scores_.size());
    }

    double stdev() const {
        const double m = mean();
        double ss = 0.0;
        for (double v : scores_) ss += (v - m) * (v - m);
        return std::sqrt(ss / static_cast<double>(scores_.size()));
    }

    friend bool operator==(const ScoreHistory&, const ScoreHistory&) = default;

private:
    int capacity_;
    std::deque<double> scores_;
};

/// omega = mean - lambda * stdev over the buffered scores.
inline double threshold(const ScoreHistory& history, double lambda) {
    if (history.empty()) throw ParameterError("threshold of empty score history");
    return history.mean() - lambda * history.stdev();
}

/// The target is considered lost below omega or below the absolute floor.
inline bool should_redetect(double score, double omega, double t_score) {
    return score < omega || score < t_score;
}

/// Search pad after `step` expansions; never beyond `full_frame_pad`.
inline double expanded_pad(double base_pad, int step, const RedetectConfig& cfg, double full_frame_pad) {
    if (step < 1) throw ParameterError("expansion step must be >= 1");
    const double cap = std::max(full_frame_pad, base_pad);
    if (step > cfg.max_expansions) return cap;
    return std::min(base_pad * std::pow(cfg.expand_factor, step), cap);
}

}  // namespace asnet
