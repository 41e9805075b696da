#pragma once

// Benchmark harness commands behind the asnet executable: track, eval, synth.
//
// Exit codes: 0 success, 1 some group failed, 2 usage or config error.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "asnet/config.hpp"
#include "asnet/dataio.hpp"
#include "asnet/error.hpp"
#include "asnet/eval.hpp"
#include "asnet/fusion.hpp"
#include "asnet/synth.hpp"

namespace asnet {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitUsage = 2;

struct RunConfig {
    fs::path dataset;
    std::vector<std::string> groups;  // empty: every group under dataset
    std::optional<fs::path> config_path;
    std::optional<std::string> preset;
    bool redetect = true;
    bool template_sharing = true;
    bool view_fusion = true;
    fs::path out;
    int workers = 1;
    std::uint64_t seed = 1;
};

/// Config file, then preset, then the --no-* switches.
inline AsnetConfig resolve_config(const RunConfig& run) {
    AsnetConfig c = run.config_path ? load_config(*run.config_path) : AsnetConfig{};
    if (run.preset) apply_preset(c, ablation_preset(*run.preset));
    if (!run.redetect) c.tracker.redetect.enabled = false;
    if (!run.template_sharing) c.fusion.template_sharing = false;
    if (!run.view_fusion) c.fusion.view_fusion = false;
    c.validate();
    return c;
}

/// Group directories under the dataset root (those holding attributes.txt), sorted by name,
/// restricted to `filter` when non-empty. Filtered names that do not exist are still returned so
/// that the caller reports them.
inline std::vector<std::string> discover_groups(const fs::path& dataset, const std::vector<std::string>& filter) {
    if (!fs::is_directory(dataset)) throw IoError("dataset root does not exist: " + dataset.string());
    if (!filter.empty()) {
        std::vector<std::string> out = filter;
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }
    std::vector<std::string> out;
    for (const auto& e : fs::directory_iterator(dataset))
        if (e.is_directory() && fs::exists(e.path() / "attributes.txt")) out.push_back(e.path().filename().string());
    std::sort(out.begin(), out.end());
    return out;
}

inline fs::path results_path(const fs::path& dir, const std::string& group) { return dir / (group + ".txt"); }

namespace detail {

// Runs job(i) for i in [0, n) on up to `workers` threads; each index is claimed exactly once.
template <typename Job>
void run_indexed(std::size_t n, int workers, Job&& job) {
    const std::size_t w = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), 1, std::max<std::size_t>(n, 1));
    if (w <= 1) {
        for (std::size_t i = 0; i < n; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < w; ++k)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) job(i);
        });
    for (auto& t : pool) t.join();
}

}  // namespace detail

struct TrackOutcome {
    std::string group;
    bool ok = false;
    std::string error;
    int views = 0;
    std::size_t frames = 0;
    double seconds = 0.0;  // tracking loop only
    double fps() const { return seconds > 0.0 ? static_cast<double>(frames) / seconds : 0.0; }
};

inline TrackOutcome track_one_group(const fs::path& dataset, const std::string& group, const AsnetConfig& cfg,
                                    const std::string& fingerprint_hex, const fs::path& out_dir) {
    TrackOutcome o;
    o.group = group;
    try {
        const GroupSequence seq = load_group(dataset / group);
        std::vector<BoundingBox> init;
        for (const auto& v : seq.views) init.push_back(*v.ground_truth[0]);
        const AsnetTracker tracker(cfg.tracker, cfg.fusion);
        auto frame_at = [&](std::size_t v, std::size_t t) {
            return std::make_shared<const Frame>(load_frame(seq.views[v].frame_paths[t], static_cast<int>(t)));
        };
        ResultsFile rf;
        rf.sequence_id = seq.group_id;
        rf.config_fingerprint = fingerprint_hex;
        rf.result = tracker.track_group_from(seq.views.size(), static_cast<std::size_t>(seq.frame_count()), frame_at,
                                             init, &o.seconds);
        save_results(rf, results_path(out_dir, group));
        o.views = seq.view_count();
        o.frames = static_cast<std::size_t>(seq.frame_count());
        o.ok = true;
    } catch (const std::exception& e) {
        o.error = e.what();
    }
    return o;
}

/// Tracks every selected group and writes one results file per group into run.out.
inline int cmd_track(const RunConfig& run, std::ostream& log) {
    AsnetConfig cfg;
    std::vector<std::string> groups;
    try {
        cfg = resolve_config(run);
        groups = discover_groups(run.dataset, run.groups);
        fs::create_directories(run.out);
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    if (groups.empty()) {
        log << "error: no groups found under " << run.dataset.string() << "\n";
        return kExitUsage;
    }
    const std::string fp = fingerprint(config_text(cfg) + "seed=" + std::to_string(run.seed) + "\n");
    std::vector<TrackOutcome> outcomes(groups.size());
    detail::run_indexed(groups.size(), run.workers,
                        [&](std::size_t i) { outcomes[i] = track_one_group(run.dataset, groups[i], cfg, fp, run.out); });
    int failed = 0;
    char buf[256];
    for (const auto& o : outcomes) {
        if (o.ok) {
            std::snprintf(buf, sizeof buf, "%s: %d views, %zu frames, %.3f s, %.1f FPS\n", o.group.c_str(), o.views,
                          o.frames, o.seconds, o.fps());
            log << buf;
        } else {
            ++failed;
            log << o.group << ": FAILED: " << o.error << "\n";
        }
    }
    log << groups.size() - failed << "/" << groups.size() << " groups tracked\n";
    return failed ? kExitPartial : kExitOk;
}

inline void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

namespace detail {

inline std::string fmt_opt(const std::optional<double>& v) {
    if (!v) return "     -";
    char b[32];
    std::snprintf(b, sizeof b, "%6.1f", 100.0 * *v);
    return b;
}

inline void print_summary_row(std::ostream& log, const std::string& label, const MetricSummary& m, MetricSelection sel) {
    char b[256];
    std::snprintf(b, sizeof b, "%-10s %6d", label.c_str(), m.groups);
    std::string row = b;
    if (sel != MetricSelection::Precision) {
        std::snprintf(b, sizeof b, " %6.1f %s %6.1f", 100.0 * m.success_auc, fmt_opt(m.afs_success).c_str(),
                      100.0 * m.ifs_success);
        row += b;
    }
    if (sel != MetricSelection::Success) {
        std::snprintf(b, sizeof b, " %6.1f %s %6.1f", 100.0 * m.precision_20px, fmt_opt(m.afs_precision).c_str(),
                      100.0 * m.ifs_precision);
        row += b;
    }
    log << row << "\n";
}

}  // namespace detail

/// Scores results_dir/<group>.txt against the dataset ground truth. Writes summary.json and the
/// pooled curves (success.csv, precision.csv) into run.out and prints a summary table.
inline int cmd_eval(const RunConfig& run, const fs::path& results_dir, MetricSelection sel, std::ostream& log) {
    std::vector<std::string> groups;
    try {
        groups = discover_groups(run.dataset, run.groups);
        if (!fs::is_directory(results_dir)) throw IoError("results directory does not exist: " + results_dir.string());
        fs::create_directories(run.out);
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    std::vector<std::optional<GroupEvaluation>> evals(groups.size());
    std::vector<std::string> errors(groups.size());
    detail::run_indexed(groups.size(), run.workers, [&](std::size_t i) {
        try {
            const fs::path rp = results_path(results_dir, groups[i]);
            if (!fs::exists(rp)) throw IoError("missing results file " + rp.string());
            const GroupSequence seq = load_group(run.dataset / groups[i]);
            evals[i] = evaluate_group(load_results(rp).result, seq);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    std::vector<GroupEvaluation> ok;
    int skipped = 0;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        if (evals[i]) {
            ok.push_back(std::move(*evals[i]));
        } else {
            ++skipped;
            log << groups[i] << ": skipped: " << errors[i] << "\n";
        }
    }
    if (ok.empty()) {
        log << "error: no group could be evaluated\n";
        return kExitPartial;
    }
    try {
        const MetricSummary overall = summarize(std::span<const GroupEvaluation>(ok));
        write_text(run.out / "summary.json", summary_json(ok, sel).dump(2) + "\n");
        if (sel != MetricSelection::Precision) write_text(run.out / "success.csv", "threshold,value\n" + curve_csv(overall.success));
        if (sel != MetricSelection::Success) write_text(run.out / "precision.csv", "threshold,value\n" + curve_csv(overall.precision));

        std::string head = "subset     groups";
        if (sel != MetricSelection::Precision) head += "  S-OPE  S-AFS  S-IFS";
        if (sel != MetricSelection::Success) head += "  P-OPE  P-AFS  P-IFS";
        log << head << "\n";
        detail::print_summary_row(log, "overall", overall, sel);
        for (const auto& row : attribute_breakdown(std::span<const GroupEvaluation>(ok)))
            if (row.metrics)
                detail::print_summary_row(log, kAttributeNames[static_cast<std::size_t>(row.attribute)], *row.metrics, sel);
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kExitPartial;
    }
    return skipped ? kExitPartial : kExitOk;
}

/// Renders each synthetic config into out/<name>. A seed, when given, replaces the configs' own.
inline int cmd_synth(const std::vector<fs::path>& configs, const fs::path& out, std::optional<std::uint64_t> seed,
                     int workers, std::ostream& log) {
    std::vector<SynthConfig> cfgs;
    try {
        for (const auto& p : configs) {
            cfgs.push_back(load_synth_config(p));
            if (seed) cfgs.back().seed = *seed;
        }
        fs::create_directories(out);
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    std::vector<std::string> errors(cfgs.size());
    std::vector<double> seconds(cfgs.size());
    detail::run_indexed(cfgs.size(), workers, [&](std::size_t i) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            SynthGroup g = synth_group(cfgs[i]);
            write_group(g, out, cfgs[i].image_format);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
        seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    });
    int failed = 0;
    char buf[256];
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
        if (errors[i].empty()) {
            std::snprintf(buf, sizeof buf, "%s: %d views, %d frames, %.2f s\n", cfgs[i].name.c_str(),
                          cfgs[i].view_count(), cfgs[i].frames, seconds[i]);
            log << buf;
        } else {
            ++failed;
            log << cfgs[i].name << ": FAILED: " << errors[i] << "\n";
        }
    }
    return failed ? kExitPartial : kExitOk;
}

}  // namespace asnet
