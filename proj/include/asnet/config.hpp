#pragma once

// Run configuration from key-value text, plus the eight ablation presets.

#include <array>
#include <cstdio>
#include <filesystem>
#include <string>
#include <string_view>

#include "asnet/error.hpp"
#include "asnet/fusion.hpp"
#include "asnet/kv.hpp"
#include "asnet/redetect.hpp"
#include "asnet/tracker.hpp"

namespace asnet {

struct AsnetConfig {
    TrackerConfig tracker;
    FusionConfig fusion;

    void validate() const {
        tracker.validate();
        fusion.validate();
    }
};

/// Reads every known key, leaving defaults for absent ones. Unknown keys are rejected.
inline AsnetConfig config_from(const KeyValueFile& kv) {
    AsnetConfig c;
    auto& t = c.tracker;
    t.template_size = kv.get_int("template_size", t.template_size);
    t.pad_factor = kv.get_double("pad_factor", t.pad_factor);
    t.cell_size = kv.get_int("cell_size", t.cell_size);
    t.lambda_m = kv.get_double("lambda_m", t.lambda_m);
    t.lambda_w = kv.get_double("lambda_w", t.lambda_w);
    t.scale_steps = kv.get_doubles("scale_steps", t.scale_steps);
    t.scale_penalty = kv.get_double("scale_penalty", t.scale_penalty);
    t.gaussian_sigma = kv.get_double("gaussian_sigma", t.gaussian_sigma);
    t.zero_phase_transforms = kv.get_bool("zero_phase_transforms", t.zero_phase_transforms);
    t.subpixel = kv.get_bool("subpixel", t.subpixel);
    t.relative_lambda = kv.get_bool("relative_lambda", t.relative_lambda);
    t.extractor = kv.get_string("extractor", t.extractor);

    auto& r = t.redetect;
    r.enabled = kv.get_bool("redetect.enabled", r.enabled);
    r.lambda = kv.get_double("redetect.lambda", r.lambda);
    r.t_score = kv.get_double("redetect.t_score", r.t_score);
    r.q = kv.get_int("redetect.q", r.q);
    r.expand_factor = kv.get_double("redetect.expand_factor", r.expand_factor);
    r.max_expansions = kv.get_int("redetect.max_expansions", r.max_expansions);

    auto& f = c.fusion;
    f.lambda_u = kv.get_double("fusion.lambda_u", f.lambda_u);
    f.template_sharing = kv.get_bool("fusion.template_sharing", f.template_sharing);
    f.view_fusion = kv.get_bool("fusion.view_fusion", f.view_fusion);
    if (kv.has("fusion.normalization")) {
        try {
            f.normalization = normalization_from_name(kv.get_string("fusion.normalization", ""));
        } catch (const ParameterError& e) {
            kv.fail("fusion.normalization", e.what());
        }
    }

    kv.reject_unknown();
    try {
        c.validate();
    } catch (const ParameterError& e) {
        throw ParseError(kv.source(), 0, e.what());
    }
    return c;
}

inline AsnetConfig load_config(const std::filesystem::path& path) { return config_from(KeyValueFile::load(path)); }

/// Canonical text of a config; equal configs give equal text.
inline std::string config_text(const AsnetConfig& c) {
    const auto& t = c.tracker;
    const auto& r = t.redetect;
    const auto& f = c.fusion;
    std::string steps;
    for (std::size_t i = 0; i < t.scale_steps.size(); ++i) {
        char b[32];
        std::snprintf(b, sizeof b, "%s%.17g", i ? "," : "", t.scale_steps[i]);
        steps += b;
    }
    char buf[1024];
    std::snprintf(buf, sizeof buf,
                  "cell_size=%d\nextractor=%s\nfusion.lambda_u=%.17g\nfusion.normalization=%s\n"
                  "fusion.template_sharing=%d\nfusion.view_fusion=%d\ngaussian_sigma=%.17g\nlambda_m=%.17g\n"
                  "lambda_w=%.17g\npad_factor=%.17g\nredetect.enabled=%d\nredetect.expand_factor=%.17g\n"
                  "redetect.lambda=%.17g\nredetect.max_expansions=%d\nredetect.q=%d\nredetect.t_score=%.17g\n"
                  "relative_lambda=%d\nscale_penalty=%.17g\nscale_steps=%s\nsubpixel=%d\ntemplate_size=%d\n"
                  "zero_phase_transforms=%d\n",
                  t.cell_size, t.extractor.c_str(), f.lambda_u, normalization_name(f.normalization).c_str(),
                  f.template_sharing, f.view_fusion, t.gaussian_sigma, t.lambda_m, t.lambda_w, t.pad_factor,
                  r.enabled, r.expand_factor, r.lambda, r.max_expansions, r.q, r.t_score, t.relative_lambda,
                  t.scale_penalty, steps.c_str(), t.subpixel, t.template_size, t.zero_phase_transforms);
    return buf;
}

inline std::string config_fingerprint(const AsnetConfig& c) { return fingerprint(config_text(c)); }

// ---------------------------------------------------------------------------------------------
// Ablation presets

struct AblationPreset {
    int row;
    std::string_view name;
    bool redetect;
    bool template_sharing;
    bool view_fusion;
};

inline constexpr std::array<AblationPreset, 8> kAblationPresets{{
    {1, "base", false, false, false},
    {2, "re-detection", true, false, false},
    {3, "template-sharing", false, true, false},
    {4, "asnet-wo-vf", true, true, false},
    {5, "view-aware-fusion", false, false, true},
    {6, "asnet-wo-rd", false, true, true},
    {7, "asnet-wo-ts", true, false, true},
    {8, "asnet", true, true, true},
}};

/// Looks a preset up by name or by row number ("1".."8").
inline const AblationPreset& ablation_preset(std::string_view key) {
    for (const auto& p : kAblationPresets)
        if (p.name == key || std::to_string(p.row) == key) return p;
    throw ParameterError("unknown preset '" + std::string(key) + "'");
}

inline void apply_preset(AsnetConfig& c, const AblationPreset& p) {
    c.tracker.redetect.enabled = p.redetect;
    c.fusion.template_sharing = p.template_sharing;
    c.fusion.view_fusion = p.view_fusion;
}

}  // namespace asnet
