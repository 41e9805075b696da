// asnet: multi-view tracking benchmark harness.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "asnet/cli.hpp"

namespace {

void add_common(CLI::App* cmd, asnet::RunConfig& run, std::string& groups, bool with_switches) {
    cmd->add_option("--dataset", run.dataset, "dataset root holding group directories")->required();
    cmd->add_option("--groups", groups, "comma-separated group names (default: all)");
    cmd->add_option("--out", run.out, "output directory")->required();
    cmd->add_option("--workers", run.workers, "parallel groups")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", run.seed, "run seed");
    if (!with_switches) return;
    cmd->add_option("--config", run.config_path, "tracker config file (key = value)");
    std::vector<std::string> names;
    for (const auto& p : asnet::kAblationPresets) names.emplace_back(p.name);
    cmd->add_option("--preset", run.preset, "ablation preset: row number 1-8 or name")
        ->check(CLI::IsMember(names) | CLI::Range(1, 8));
    cmd->add_flag("!--no-redetect", run.redetect, "disable re-detection");
    cmd->add_flag("!--no-sharing", run.template_sharing, "disable template sharing");
    cmd->add_flag("!--no-view-fusion", run.view_fusion, "disable view-aware fusion");
}

std::vector<std::string> split_groups(const std::string& s) {
    std::vector<std::string> out;
    for (const auto& g : asnet::detail::split(s, ','))
        if (!asnet::detail::trim(g).empty()) out.push_back(asnet::detail::trim(g));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"asnet: multi-view single-object tracking benchmark"};
    app.require_subcommand(1);

    asnet::RunConfig track_run;
    std::string track_groups;
    auto* track = app.add_subcommand("track", "track dataset groups and write results files");
    add_common(track, track_run, track_groups, true);

    asnet::RunConfig eval_run;
    std::string eval_groups, metric = "both";
    std::filesystem::path results_dir;
    auto* eval = app.add_subcommand("eval", "score results files against ground truth");
    add_common(eval, eval_run, eval_groups, false);
    eval->add_option("--results", results_dir, "directory of results files")->required();
    eval->add_option("--metric", metric, "success, precision or both")
        ->check(CLI::IsMember({"success", "precision", "both"}));

    std::vector<std::filesystem::path> synth_configs;
    std::filesystem::path synth_out;
    std::optional<std::uint64_t> synth_seed;
    int synth_workers = 1;
    auto* synth = app.add_subcommand("synth", "render synthetic groups from generator configs");
    synth->add_option("--config", synth_configs, "generator config file(s)")->required();
    synth->add_option("--out", synth_out, "dataset root to write into")->required();
    synth->add_option("--seed", synth_seed, "override the configs' seed");
    synth->add_option("--workers", synth_workers, "parallel groups")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? asnet::kExitOk : asnet::kExitUsage;
    }

    if (*track) {
        track_run.groups = split_groups(track_groups);
        return asnet::cmd_track(track_run, std::cerr);
    }
    if (*eval) {
        eval_run.groups = split_groups(eval_groups);
        const int code = asnet::cmd_eval(eval_run, results_dir, asnet::metric_selection_from(metric), std::cout);
        return code;
    }
    return asnet::cmd_synth(synth_configs, synth_out, synth_seed, synth_workers, std::cerr);
}
