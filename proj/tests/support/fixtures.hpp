#pragma once

// Named synthetic fixtures from tests/fixtures, rendered in memory.

#include <cstdint>
#include <filesystem>
#include <string>

#include "asnet/synth.hpp"

#ifndef ASNET_FIXTURE_DIR
#error "ASNET_FIXTURE_DIR must point at tests/fixtures"
#endif

namespace fixtures {

inline std::filesystem::path dir() { return ASNET_FIXTURE_DIR; }

inline std::filesystem::path path(const std::string& name) { return dir() / (name + ".cfg"); }

inline asnet::SynthConfig config(const std::string& name, std::uint64_t seed = 1) {
    asnet::SynthConfig c = asnet::load_synth_config(path(name));
    c.seed = seed;
    return c;
}

inline asnet::SynthGroup render(const std::string& name, std::uint64_t seed = 1) {
    return asnet::synth_group(config(name, seed));
}

inline std::vector<asnet::BoundingBox> first_boxes(const asnet::SynthGroup& g) {
    std::vector<asnet::BoundingBox> out;
    for (const auto& v : g.sequence.views) out.push_back(*v.ground_truth[0]);
    return out;
}

/// Mean IoU of a trajectory against in-view ground truth.
template <typename Traj, typename Gt>
double mean_iou(const Traj& traj, const Gt& gt) {
    double s = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < gt.size(); ++i)
        if (gt[i]) {
            const auto& a = traj[i].box;
            const auto& b = *gt[i];
            const double iw = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
            const double ih = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
            const double inter = iw > 0 && ih > 0 ? iw * ih : 0.0;
            s += inter / (a.w * a.h + b.w * b.h - inter);
            ++n;
        }
    return n ? s / n : 0.0;
}

}  // namespace fixtures
