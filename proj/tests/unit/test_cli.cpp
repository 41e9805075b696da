#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

#include "asnet/cli.hpp"
#include "fixtures.hpp"

#ifndef ASNET_CLI_PATH
#error "ASNET_CLI_PATH must name the asnet executable"
#endif

using namespace asnet;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(ASNET_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Short two-group dataset shared by every test in this file.
class CliTest : public ::testing::Test {
protected:
    static inline fs::path root;

    static void SetUpTestSuite() {
        root = fs::temp_directory_path() / ("asnet-cli-" + std::to_string(std::random_device{}()));
        fs::create_directories(root / "cfg");
        std::ofstream(root / "cfg" / "one.cfg") << "name = one\nframes = 25\ntarget.vx = 1.0\n";
        std::ofstream(root / "cfg" / "two.cfg")
            << "name = two\nframes = 25\nviews = 2\ntarget.x = 200\nview1.occlusions = 8-14:FOC\n"
               "view2.scale = 0.9\nview2.offset_x = 40\nview2.offset_y = 20\n";
        std::ostringstream log;
        ASSERT_EQ(cmd_synth({root / "cfg" / "one.cfg", root / "cfg" / "two.cfg"}, root / "data", std::nullopt, 1, log),
                  kExitOk)
            << log.str();
    }

    static void TearDownTestSuite() { fs::remove_all(root); }

    static RunConfig run_to(const std::string& out) {
        RunConfig r;
        r.dataset = root / "data";
        r.out = root / out;
        return r;
    }
};

}  // namespace

TEST_F(CliTest, DiscoverGroupsSorted) {
    EXPECT_EQ(discover_groups(root / "data", {}), (std::vector<std::string>{"one", "two"}));
    EXPECT_EQ(discover_groups(root / "data", {"two", "two"}), (std::vector<std::string>{"two"}));
}

TEST_F(CliTest, TrackIsDeterministicAndWorkerIndependent) {
    std::ostringstream log;
    RunConfig a = run_to("det-a"), b = run_to("det-b");
    b.workers = 2;
    ASSERT_EQ(cmd_track(a, log), kExitOk) << log.str();
    ASSERT_EQ(cmd_track(b, log), kExitOk) << log.str();
    for (const char* g : {"one", "two"}) EXPECT_EQ(slurp(results_path(a.out, g)), slurp(results_path(b.out, g))) << g;
    EXPECT_NE(log.str().find("2/2 groups tracked"), std::string::npos);
}

TEST_F(CliTest, SeedAndConfigChangeFingerprint) {
    std::ostringstream log;
    RunConfig a = run_to("fp-a"), b = run_to("fp-b");
    a.groups = b.groups = {"one"};
    b.preset = "base";
    ASSERT_EQ(cmd_track(a, log), kExitOk);
    ASSERT_EQ(cmd_track(b, log), kExitOk);
    EXPECT_NE(load_results(results_path(a.out, "one")).config_fingerprint,
              load_results(results_path(b.out, "one")).config_fingerprint);
}

TEST_F(CliTest, SingleViewGroupMatchesBaseTracker) {
    std::ostringstream log;
    RunConfig r = run_to("single");
    r.groups = {"one"};
    ASSERT_EQ(cmd_track(r, log), kExitOk);
    const GroupSequence seq = load_group(root / "data" / "one");
    std::vector<Frame> frames;
    for (const auto& p : seq.views[0].frame_paths) frames.push_back(load_frame(p));
    const Trajectory base = BaseTracker().track_sequence(frames, *seq.views[0].ground_truth[0]);
    const ResultsFile rf = load_results(results_path(r.out, "one"));
    ASSERT_EQ(rf.result.views[0].size(), base.size());
    for (std::size_t t = 0; t < base.size(); ++t) {
        EXPECT_EQ(rf.result.views[0][t].box.x, round2(base[t].box.x));
        EXPECT_EQ(rf.result.views[0][t].score, base[t].score);
    }
}

TEST_F(CliTest, EvalWritesOutputsAndDominanceHolds) {
    std::ostringstream log;
    ASSERT_EQ(cmd_track(run_to("ev-track"), log), kExitOk);
    std::ostringstream table;
    ASSERT_EQ(cmd_eval(run_to("ev-out"), root / "ev-track", MetricSelection::Both, table), kExitOk) << table.str();
    EXPECT_NE(table.str().find("overall"), std::string::npos);
    EXPECT_EQ(slurp(root / "ev-out" / "success.csv").rfind("threshold,value\n0.00,", 0), 0u);
    const auto j = nlohmann::json::parse(slurp(root / "ev-out" / "summary.json"));
    EXPECT_GE(j["ifs_success"].get<double>(), j["afs_success"].get<double>());
    EXPECT_GE(j["ifs_precision"].get<double>(), j["afs_precision"].get<double>());
    for (const auto& [name, row] : j["per_attribute"].items())
        if (!row.is_null()) {
            EXPECT_GE(row["ifs_success"].get<double>(), row["afs_success"].get<double>()) << name;
            EXPECT_GE(row["ifs_precision"].get<double>(), row["afs_precision"].get<double>()) << name;
        }
}

TEST_F(CliTest, EvalSkipsMissingGroup) {
    std::ostringstream log;
    RunConfig t = run_to("partial");
    t.groups = {"one"};
    ASSERT_EQ(cmd_track(t, log), kExitOk);
    std::ostringstream table;
    EXPECT_EQ(cmd_eval(run_to("partial-eval"), root / "partial", MetricSelection::Success, table), kExitPartial);
    EXPECT_NE(table.str().find("two: skipped"), std::string::npos);
    EXPECT_FALSE(fs::exists(root / "partial-eval" / "precision.csv"));
}

TEST_F(CliTest, TrackReportsUnknownGroup) {
    std::ostringstream log;
    RunConfig r = run_to("unknown");
    r.groups = {"one", "nope"};
    EXPECT_EQ(cmd_track(r, log), kExitPartial);
    EXPECT_TRUE(fs::exists(results_path(r.out, "one")));
}

TEST_F(CliTest, ConfigPrecedence) {
    std::ofstream(root / "cfg" / "run.cfg") << "fusion.view_fusion = false\nredetect.q = 9\n";
    RunConfig r = run_to("unused");
    r.config_path = root / "cfg" / "run.cfg";
    AsnetConfig c = resolve_config(r);
    EXPECT_FALSE(c.fusion.view_fusion);
    EXPECT_EQ(c.tracker.redetect.q, 9);
    r.preset = "asnet";
    EXPECT_TRUE(resolve_config(r).fusion.view_fusion);
    r.redetect = false;
    EXPECT_FALSE(resolve_config(r).tracker.redetect.enabled);
}

TEST_F(CliTest, ExecutableExitCodes) {
    const std::string data = (root / "data").string();
    EXPECT_EQ(run_cli("--bogus"), kExitUsage);
    EXPECT_EQ(run_cli("track --dataset " + data + " --out " + (root / "x").string() + " --preset 9"), kExitUsage);
    EXPECT_EQ(run_cli("track --dataset " + (root / "nowhere").string() + " --out " + (root / "x").string()), kExitUsage);
    EXPECT_EQ(run_cli("eval --dataset " + data + " --out " + (root / "y").string() + " --results " +
                      (root / "nowhere").string()),
              kExitUsage);
    EXPECT_EQ(run_cli("track --dataset " + data + " --groups one --out " + (root / "exe").string() + " --preset base"),
              kExitOk);
    EXPECT_EQ(run_cli("eval --dataset " + data + " --groups one --out " + (root / "exe-eval").string() +
                      " --results " + (root / "exe").string()),
              kExitOk);
    EXPECT_TRUE(fs::exists(root / "exe-eval" / "summary.json"));
}
