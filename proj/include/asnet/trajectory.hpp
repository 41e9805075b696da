#pragma once

#include <vector>

#include "asnet/imaging.hpp"

namespace asnet {

inline constexpr int kNoView = -1;

struct TrajectoryEntry {
    BoundingBox box;
    double score = 0.0;
    int selected_view = kNoView;

    friend bool operator==(const TrajectoryEntry&, const TrajectoryEntry&) = default;
};

/// One entry per frame, no gaps.
struct Trajectory {
    std::vector<TrajectoryEntry> entries;

    std::size_t size() const noexcept { return entries.size(); }
    bool empty() const noexcept { return entries.empty(); }
    const TrajectoryEntry& operator[](std::size_t i) const { return entries[i]; }

    std::vector<BoundingBox> boxes() const {
        std::vector<BoundingBox> out;
        out.reserve(entries.size());
        for (const auto& e : entries) out.push_back(e.box);
        return out;
    }

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Per-view trajectories of one group plus the per-frame selected view.
struct GroupResult {
    std::vector<Trajectory> views;
    std::vector<int> selected;

    int view_count() const noexcept { return static_cast<int>(views.size()); }
    std::size_t frame_count() const noexcept { return selected.size(); }

    friend bool operator==(const GroupResult&, const GroupResult&) = default;
};

}  // namespace asnet
