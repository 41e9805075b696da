#pragma once

// Group dataset layout, frame I/O and results files.
//
// Layout of a group directory:
//   <group>/attributes.txt          ten comma-separated 0/1 flags (DAY,NIGHT,CM,POC,FOC,OV,SO,VC,IV,LR)
//   <group>/droneK/imgNNNNNN.jpg    frames, 1-based zero-padded ordinal (.jpg, .jpeg or .png)
//   <group>/droneK/groundtruth.txt  "x,y,w,h" per frame, "NaN,NaN,NaN,NaN" when out of view
//   <group>/droneK/occlusion.txt    optional, one 0/1 per frame

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "asnet/error.hpp"
#include "asnet/imaging.hpp"
#include "asnet/kv.hpp"
#include "asnet/trajectory.hpp"

namespace asnet {

namespace fs = std::filesystem;

enum class Attribute { DAY, NIGHT, CM, POC, FOC, OV, SO, VC, IV, LR };

inline constexpr std::array<const char*, 10> kAttributeNames{"DAY", "NIGHT", "CM", "POC", "FOC",
                                                              "OV",  "SO",    "VC", "IV",  "LR"};

inline Attribute attribute_from_name(const std::string& name) {
    for (std::size_t i = 0; i < kAttributeNames.size(); ++i)
        if (name == kAttributeNames[i]) return static_cast<Attribute>(i);
    throw ParameterError("unknown attribute '" + name + "'");
}

struct AttributeSet {
    std::array<bool, 10> flags{};

    bool has(Attribute a) const noexcept { return flags[static_cast<std::size_t>(a)]; }
    void set(Attribute a, bool on = true) noexcept { flags[static_cast<std::size_t>(a)] = on; }

    void validate() const {
        if (has(Attribute::DAY) && has(Attribute::NIGHT)) throw ParameterError("DAY and NIGHT are mutually exclusive");
    }

    std::string to_line() const {
        std::string out;
        for (std::size_t i = 0; i < flags.size(); ++i) out += (i ? "," : "") + std::string(flags[i] ? "1" : "0");
        return out;
    }

    static AttributeSet parse(const std::string& line, const std::string& file = "attributes.txt", int lineno = 1) {
        const auto parts = detail::split(detail::trim(line), ',');
        if (parts.size() != 10) throw ParseError(file, lineno, "expected 10 comma-separated flags");
        AttributeSet a;
        for (std::size_t i = 0; i < 10; ++i) {
            if (parts[i] == "1") a.flags[i] = true;
            else if (parts[i] != "0") throw ParseError(file, lineno, "flag " + std::string(kAttributeNames[i]) + " must be 0 or 1");
        }
        if (a.has(Attribute::DAY) && a.has(Attribute::NIGHT))
            throw ParseError(file, lineno, "DAY and NIGHT are mutually exclusive");
        return a;
    }

    friend bool operator==(const AttributeSet&, const AttributeSet&) = default;
};

struct ViewSequence {
    std::string name;
    std::vector<fs::path> frame_paths;
    std::vector<std::optional<BoundingBox>> ground_truth;  // nullopt: target out of view
    std::vector<bool> occluded;

    friend bool operator==(const ViewSequence&, const ViewSequence&) = default;
};

/// One multi-view recording group; all views are synchronized.
struct GroupSequence {
    std::string group_id;
    fs::path root;
    AttributeSet attributes;
    std::vector<ViewSequence> views;

    int view_count() const noexcept { return static_cast<int>(views.size()); }
    int frame_count() const noexcept { return views.empty() ? 0 : static_cast<int>(views[0].ground_truth.size()); }

    friend bool operator==(const GroupSequence&, const GroupSequence&) = default;
};

// ---------------------------------------------------------------------------------------------
// Frames

inline Frame load_frame(const fs::path& path, int frame_index = 0) {
    cv::Mat img = cv::imread(path.string(), cv::IMREAD_COLOR);
    if (img.empty()) throw IoError("cannot decode image " + path.string());
    cv::Mat rgb;
    cv::cvtColor(img, rgb, cv::COLOR_BGR2RGB);
    Frame f(rgb.cols, rgb.rows, 3);
    for (int r = 0; r < rgb.rows; ++r) std::copy_n(rgb.ptr<std::uint8_t>(r), rgb.cols * 3, &f.at(r, 0));
    f.frame_index = frame_index;
    return f;
}

inline void save_frame(const Frame& f, const fs::path& path, int jpeg_quality = 95) {
    cv::Mat img(f.height, f.width, f.channels == 3 ? CV_8UC3 : CV_8UC1);
    for (int r = 0; r < f.height; ++r) std::copy_n(&f.at(r, 0), f.width * f.channels, img.ptr<std::uint8_t>(r));
    if (f.channels == 3) cv::cvtColor(img, img, cv::COLOR_RGB2BGR);
    const std::vector<int> params{cv::IMWRITE_JPEG_QUALITY, jpeg_quality};
    if (!cv::imwrite(path.string(), img, params)) throw IoError("cannot write image " + path.string());
}

inline std::string frame_filename(int ordinal, const std::string& ext = ".jpg") {
    char buf[32];
    std::snprintf(buf, sizeof buf, "img%06d", ordinal);
    return buf + ext;
}

// ---------------------------------------------------------------------------------------------
// Ground truth

inline std::optional<BoundingBox> parse_gt_line(const std::string& raw, const std::string& file, int lineno) {
    const auto parts = detail::split(detail::trim(raw), ',');
    if (parts.size() != 4) throw ParseError(file, lineno, "expected 'x,y,w,h'");
    if (std::all_of(parts.begin(), parts.end(), [](const std::string& p) { return p == "NaN" || p == "nan"; }))
        return std::nullopt;
    std::array<double, 4> v{};
    for (int i = 0; i < 4; ++i)
        if (!detail::parse_double(parts[i], v[i]) || !std::isfinite(v[i]))
            throw ParseError(file, lineno, "malformed number '" + parts[i] + "'");
    const BoundingBox b{v[0], v[1], v[2], v[3]};
    if (!b.valid()) throw ParseError(file, lineno, "box width and height must be positive");
    return b;
}

inline std::string format_gt_line(const std::optional<BoundingBox>& b) {
    if (!b) return "NaN,NaN,NaN,NaN";
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g", b->x, b->y, b->w, b->h);
    return buf;
}

inline std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && detail::trim(lines.back()).empty()) lines.pop_back();
    return lines;
}

inline std::vector<fs::path> list_frames(const fs::path& dir) {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const std::string name = e.path().filename().string();
        std::string ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (name.rfind("img", 0) == 0 && (ext == ".jpg" || ext == ".jpeg" || ext == ".png")) out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// View directories named droneK, ordered by K.
inline std::vector<fs::path> list_view_dirs(const fs::path& group) {
    std::vector<std::pair<long long, fs::path>> found;
    for (const auto& e : fs::directory_iterator(group)) {
        if (!e.is_directory()) continue;
        const std::string name = e.path().filename().string();
        long long k = 0;
        if (name.rfind("drone", 0) == 0 && detail::parse_int(name.substr(5), k)) found.emplace_back(k, e.path());
    }
    std::sort(found.begin(), found.end());
    std::vector<fs::path> out;
    for (auto& [k, p] : found) out.push_back(p);
    return out;
}

inline GroupSequence load_group(const fs::path& path) {
    if (!fs::is_directory(path)) throw IoError("group directory does not exist: " + path.string());
    GroupSequence g;
    g.root = path;
    g.group_id = path.filename().string();

    const fs::path attr_file = path / "attributes.txt";
    if (!fs::exists(attr_file)) throw ParseError(attr_file.string(), 0, "missing attributes file");
    const auto attr_lines = read_lines(attr_file);
    if (attr_lines.size() != 1) throw ParseError(attr_file.string(), 0, "expected exactly one line");
    g.attributes = AttributeSet::parse(attr_lines[0], attr_file.string(), 1);

    const auto dirs = list_view_dirs(path);
    if (dirs.empty()) throw ParseError(path.string(), 0, "no droneK view directories");
    for (const auto& dir : dirs) {
        ViewSequence v;
        v.name = dir.filename().string();
        v.frame_paths = list_frames(dir);
        const fs::path gt_file = dir / "groundtruth.txt";
        if (!fs::exists(gt_file)) throw ParseError(gt_file.string(), 0, "missing ground-truth file");
        const auto lines = read_lines(gt_file);
        for (std::size_t i = 0; i < lines.size(); ++i)
            v.ground_truth.push_back(parse_gt_line(lines[i], gt_file.string(), static_cast<int>(i + 1)));
        if (v.ground_truth.size() != v.frame_paths.size())
            throw ParseError(gt_file.string(), 0,
                             "ground truth has " + std::to_string(v.ground_truth.size()) + " lines but " +
                                 std::to_string(v.frame_paths.size()) + " frames were found");
        v.occluded.assign(v.ground_truth.size(), false);
        const fs::path occ_file = dir / "occlusion.txt";
        if (fs::exists(occ_file)) {
            const auto occ = read_lines(occ_file);
            if (occ.size() != v.ground_truth.size())
                throw ParseError(occ_file.string(), 0, "occlusion flags do not match the frame count");
            for (std::size_t i = 0; i < occ.size(); ++i) {
                const auto t = detail::trim(occ[i]);
                if (t != "0" && t != "1") throw ParseError(occ_file.string(), static_cast<int>(i + 1), "expected 0 or 1");
                v.occluded[i] = t == "1";
            }
        }
        if (!g.views.empty() && v.frame_paths.size() != g.views[0].frame_paths.size())
            throw ParseError(dir.string(), 0,
                             "views are not synchronized: " + g.views[0].name + " has " +
                                 std::to_string(g.views[0].frame_paths.size()) + " frames, " + v.name + " has " +
                                 std::to_string(v.frame_paths.size()));
        g.views.push_back(std::move(v));
    }
    if (g.frame_count() == 0) throw ParseError(path.string(), 0, "group has no frames");
    for (const auto& v : g.views)
        if (!v.ground_truth[0]) throw ParseError((path / v.name / "groundtruth.txt").string(), 1,
                                                 "first frame must be annotated");
    return g;
}

/// Writes attributes, ground truth and occlusion flags (frames are written separately).
inline void save_group_metadata(const GroupSequence& g, const fs::path& path) {
    fs::create_directories(path);
    {
        std::ofstream out(path / "attributes.txt");
        if (!out) throw IoError("cannot write " + (path / "attributes.txt").string());
        out << g.attributes.to_line() << "\n";
    }
    for (const auto& v : g.views) {
        const fs::path dir = path / v.name;
        fs::create_directories(dir);
        std::ofstream gt(dir / "groundtruth.txt");
        if (!gt) throw IoError("cannot write " + (dir / "groundtruth.txt").string());
        for (const auto& b : v.ground_truth) gt << format_gt_line(b) << "\n";
        std::ofstream occ(dir / "occlusion.txt");
        for (bool o : v.occluded) occ << (o ? 1 : 0) << "\n";
    }
}

// ---------------------------------------------------------------------------------------------
// Results files
//
//   # asnet-results sequence=<id> config=<fingerprint> views=<V> frames=<n>
//   frame,view,x,y,w,h,score,selected
//
// Boxes carry two decimals; scores round-trip exactly. selected is -1 without view selection.

struct ResultsFile {
    std::string sequence_id;
    std::string config_fingerprint;
    GroupResult result;

    friend bool operator==(const ResultsFile&, const ResultsFile&) = default;
};

inline double round2(double v) { return std::round(v * 100.0) / 100.0; }

inline void save_results(const ResultsFile& rf, const fs::path& path) {
    const auto& r = rf.result;
    const int V = r.view_count();
    for (const auto& t : r.views)
        if (t.size() != r.selected.size()) throw AlignmentError("trajectories are not aligned with selections");
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw IoError("cannot write results file " + path.string());
    out << "# asnet-results sequence=" << rf.sequence_id << " config=" << rf.config_fingerprint << " views=" << V
        << " frames=" << r.selected.size() << "\n";
    char buf[256];
    for (std::size_t t = 0; t < r.selected.size(); ++t)
        for (int v = 0; v < V; ++v) {
            const auto& e = r.views[v][t];
            std::snprintf(buf, sizeof buf, "%zu,%d,%.2f,%.2f,%.2f,%.2f,%.17g,%d\n", t, v, e.box.x, e.box.y, e.box.w,
                          e.box.h, e.score, r.selected[t]);
            out << buf;
        }
    if (!out) throw IoError("failed writing results file " + path.string());
}

inline ResultsFile load_results(const fs::path& path) {
    const std::string file = path.string();
    const auto lines = read_lines(path);
    if (lines.empty() || lines[0].rfind("# asnet-results", 0) != 0)
        throw ParseError(file, 1, "missing '# asnet-results' header");
    ResultsFile rf;
    int V = -1;
    long long n = -1;
    for (const auto& tok : detail::split(lines[0].substr(15), ' ')) {
        if (tok.empty()) continue;
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw ParseError(file, 1, "malformed header field '" + tok + "'");
        const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        long long iv = 0;
        if (key == "sequence") rf.sequence_id = val;
        else if (key == "config") rf.config_fingerprint = val;
        else if (key == "views" && detail::parse_int(val, iv) && iv >= 0) V = static_cast<int>(iv);
        else if (key == "frames" && detail::parse_int(val, iv) && iv >= 0) n = iv;
        else throw ParseError(file, 1, "malformed header field '" + tok + "'");
    }
    if (V < 0 || n < 0) throw ParseError(file, 1, "header must declare views and frames");
    if (lines.size() - 1 != static_cast<std::size_t>(V) * n)
        throw ParseError(file, 0, "expected " + std::to_string(V * n) + " rows, found " + std::to_string(lines.size() - 1));
    auto& r = rf.result;
    r.views.assign(V, Trajectory{});
    for (auto& t : r.views) t.entries.resize(n);
    r.selected.assign(n, kNoView);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const int lineno = static_cast<int>(i + 1);
        const auto parts = detail::split(lines[i], ',');
        if (parts.size() != 8) throw ParseError(file, lineno, "expected 8 fields");
        long long t = 0, v = 0, sel = 0;
        std::array<double, 5> d{};
        if (!detail::parse_int(parts[0], t) || !detail::parse_int(parts[1], v) || !detail::parse_int(parts[7], sel))
            throw ParseError(file, lineno, "malformed integer field");
        for (int k = 0; k < 5; ++k)
            if (!detail::parse_double(parts[2 + k], d[k])) throw ParseError(file, lineno, "malformed number field");
        const std::size_t expect = i - 1;
        if (t != static_cast<long long>(expect / V) || v != static_cast<long long>(expect % V))
            throw ParseError(file, lineno, "rows out of order");
        if (sel < kNoView || sel >= V) throw ParseError(file, lineno, "selected view out of range");
        if (v > 0 && r.selected[t] != sel) throw ParseError(file, lineno, "selected view differs across rows of a frame");
        r.selected[t] = static_cast<int>(sel);
        r.views[v].entries[t] = {{d[0], d[1], d[2], d[3]}, d[4], static_cast<int>(sel)};
    }
    return rf;
}

}  // namespace asnet
