#pragma once

// Frames, patch resampling, feature embedding and window functions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "asnet/error.hpp"

namespace asnet {

/// Interleaved image; channels is 1 (gray) or 3 (RGB).
template <typename Pixel>
struct Image {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<Pixel> pixels;
    int frame_index = 0;

    Image() = default;
    Image(int w, int h, int c, Pixel fill = Pixel{})
        : width(w), height(h), channels(c),
          pixels(static_cast<std::size_t>(w) * h * c, fill) {
        if (w <= 0 || h <= 0 || (c != 1 && c != 3))
            throw ShapeError("image dimensions must be positive with 1 or 3 channels");
    }

    bool empty() const noexcept { return pixels.empty(); }

    Pixel& at(int row, int col, int ch = 0) {
        return pixels[(static_cast<std::size_t>(row) * width + col) * channels + ch];
    }
    const Pixel& at(int row, int col, int ch = 0) const {
        return pixels[(static_cast<std::size_t>(row) * width + col) * channels + ch];
    }

    friend bool operator==(const Image&, const Image&) = default;
};

/// 8-bit video frame.
using Frame = Image<std::uint8_t>;
/// Resampled crop; keeps sub-integer intensities from interpolation.
using Patch = Image<float>;

/// Axis-aligned box in frame pixels; (x, y) is the top-left corner.
struct BoundingBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double cx() const noexcept { return x + 0.5 * w; }
    double cy() const noexcept { return y + 0.5 * h; }
    double area() const noexcept { return w * h; }
    bool valid() const noexcept {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h) &&
               w > 0.0 && h > 0.0;
    }

    static BoundingBox from_center(double cx, double cy, double w, double h) {
        return {cx - 0.5 * w, cy - 0.5 * h, w, h};
    }

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Real H x W x C tensor stored channel-planar: values[(ch * H + row) * W + col].
struct FeatureMap {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> values;

    FeatureMap() = default;
    FeatureMap(int h, int w, int c, double fill = 0.0)
        : height(h), width(w), channels(c),
          values(static_cast<std::size_t>(h) * w * c, fill) {
        if (h <= 0 || w <= 0 || c <= 0) throw ShapeError("feature map dimensions must be positive");
    }

    std::size_t plane_size() const noexcept { return static_cast<std::size_t>(height) * width; }

    double& at(int ch, int row, int col) {
        return values[(static_cast<std::size_t>(ch) * height + row) * width + col];
    }
    double at(int ch, int row, int col) const {
        return values[(static_cast<std::size_t>(ch) * height + row) * width + col];
    }

    std::span<double> plane(int ch) {
        return {values.data() + ch * plane_size(), plane_size()};
    }
    std::span<const double> plane(int ch) const {
        return {values.data() + ch * plane_size(), plane_size()};
    }

    bool same_shape(const FeatureMap& o) const noexcept {
        return height == o.height && width == o.width && channels == o.channels;
    }

    /// Row-major flatten over (height, width, channel).
    std::vector<double> flatten_hwc() const {
        std::vector<double> out;
        out.reserve(values.size());
        for (int r = 0; r < height; ++r)
            for (int c = 0; c < width; ++c)
                for (int ch = 0; ch < channels; ++ch) out.push_back(at(ch, r, c));
        return out;
    }

    bool all_finite() const noexcept {
        return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
    }

    /// Unit impulse at the origin of every channel.
    static FeatureMap impulse(int h, int w, int c) {
        FeatureMap m(h, w, c);
        for (int ch = 0; ch < c; ++ch) m.at(ch, 0, 0) = 1.0;
        return m;
    }

    friend bool operator==(const FeatureMap&, const FeatureMap&) = default;
};

/// Embedding block: patch -> feature map.
class FeatureExtractor {
public:
    virtual ~FeatureExtractor() = default;

    virtual int cell_size() const noexcept = 0;
    virtual int channels() const noexcept = 0;
    virtual std::string kind() const = 0;
    virtual FeatureMap embed(const Patch& patch) const = 0;
};

namespace detail {

inline float luminance(const Patch& p, int row, int col) {
    if (p.channels == 1) return p.at(row, col);
    return 0.299f * p.at(row, col, 0) + 0.587f * p.at(row, col, 1) + 0.114f * p.at(row, col, 2);
}

}  // namespace detail

/// Resamples the region of size region_w x region_h centred on (cx, cy) to out_w x out_h.
inline Patch extract_region(const Frame& frame, double cx, double cy, double region_w,
                            double region_h, int out_w, int out_h) {
    if (frame.empty()) throw ShapeError("empty frame");
    if (!(region_w > 0.0) || !(region_h > 0.0)) throw InvalidBoxError("region must have positive size");
    if (out_w <= 0 || out_h <= 0) throw ParameterError("output size must be positive");
    Patch out(out_w, out_h, frame.channels);
    out.frame_index = frame.frame_index;
    // Bilinear taps are separable: precompute them once per column and per row.
    struct Tap {
        int lo, hi;
        double a;
    };
    auto taps = [](double origin, double step, int count, int size) {
        std::vector<Tap> t(count);
        for (int i = 0; i < count; ++i) {
            const double u = origin + (i + 0.5) * step - 0.5;
            const double fu = std::floor(u);
            auto clamp_to = [size](double x) { return static_cast<int>(std::clamp(x, 0.0, static_cast<double>(size - 1))); };
            t[i] = {clamp_to(fu), clamp_to(fu + 1.0), u - fu};
        }
        return t;
    };
    const auto cols = taps(cx - 0.5 * region_w, region_w / out_w, out_w, frame.width);
    const auto rows = taps(cy - 0.5 * region_h, region_h / out_h, out_h, frame.height);
    const int ch_n = frame.channels;
    for (int r = 0; r < out_h; ++r) {
        const Tap& tr = rows[r];
        const std::uint8_t* top = &frame.pixels[static_cast<std::size_t>(tr.lo) * frame.width * ch_n];
        const std::uint8_t* bot = &frame.pixels[static_cast<std::size_t>(tr.hi) * frame.width * ch_n];
        float* dst = &out.pixels[static_cast<std::size_t>(r) * out_w * ch_n];
        for (int c = 0; c < out_w; ++c) {
            const Tap& tc = cols[c];
            for (int ch = 0; ch < ch_n; ++ch) {
                const double t = (1.0 - tc.a) * top[tc.lo * ch_n + ch] + tc.a * top[tc.hi * ch_n + ch];
                const double b = (1.0 - tc.a) * bot[tc.lo * ch_n + ch] + tc.a * bot[tc.hi * ch_n + ch];
                dst[c * ch_n + ch] = static_cast<float>((1.0 - tr.a) * t + tr.a * b);
            }
        }
    }
    return out;
}

/// Square crop of pad_factor * box around the box centre, resampled to out_size^2.
inline Patch extract_patch(const Frame& frame, const BoundingBox& box, double pad_factor, int out_size) {
    if (!box.valid()) throw InvalidBoxError("box must have positive width and height");
    if (!(pad_factor >= 1.0)) throw ParameterError("pad_factor must be >= 1");
    if (out_size <= 0) throw ParameterError("out_size must be positive");
    return extract_region(frame, box.cx(), box.cy(), pad_factor * box.w, pad_factor * box.h,
                          out_size, out_size);
}

/// Separable Hann window; a length-1 axis is 1.
inline FeatureMap cosine_window(int h, int w) {
    if (h <= 0 || w <= 0) throw ParameterError("window dimensions must be positive");
    auto hann = [](int n) {
        std::vector<double> v(n, 1.0);
        if (n > 1)
            for (int i = 0; i < n; ++i) v[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / (n - 1)));
        return v;
    };
    const auto wy = hann(h);
    const auto wx = hann(w);
    FeatureMap m(h, w, 1);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) m.at(0, r, c) = wy[r] * wx[c];
    return m;
}

/// Isotropic Gaussian centred at ((h-1)/2, (w-1)/2); exactly 1 at the centre cell of odd maps.
inline FeatureMap gaussian_weight_map(int h, int w, double sigma) {
    if (h <= 0 || w <= 0) throw ParameterError("map dimensions must be positive");
    if (!(sigma > 0.0)) throw ParameterError("sigma must be positive");
    FeatureMap m(h, w, 1);
    const double cr = 0.5 * (h - 1);
    const double cc = 0.5 * (w - 1);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            const double d2 = (r - cr) * (r - cr) + (c - cc) * (c - cc);
            m.at(0, r, c) = std::exp(-d2 / (2.0 * sigma * sigma));
        }
    return m;
}

/// Multiplies every channel of a patch by a single-channel weight map of the same size.
inline Patch apply_weight(const Patch& patch, const FeatureMap& weight) {
    if (weight.channels != 1 || weight.height != patch.height || weight.width != patch.width)
        throw ShapeError("weight map must match patch size");
    Patch out = patch;
    for (int r = 0; r < patch.height; ++r)
        for (int c = 0; c < patch.width; ++c)
            for (int ch = 0; ch < patch.channels; ++ch)
                out.at(r, c, ch) = static_cast<float>(patch.at(r, c, ch) * weight.at(0, r, c));
    return out;
}

/// Multiplies every channel of a map by a single-channel window.
inline FeatureMap apply_window(const FeatureMap& map, const FeatureMap& window) {
    if (window.channels != 1 || window.height != map.height || window.width != map.width)
        throw ShapeError("window must match feature map size");
    FeatureMap out = map;
    for (int ch = 0; ch < map.channels; ++ch) {
        auto p = out.plane(ch);
        auto wv = window.plane(0);
        for (std::size_t i = 0; i < p.size(); ++i) p[i] *= wv[i];
    }
    return out;
}

/// Shifts every channel of a map to zero mean.
inline void remove_channel_means(FeatureMap& map) {
    for (int ch = 0; ch < map.channels; ++ch) {
        auto p = map.plane(ch);
        double mean = 0.0;
        for (double v : p) mean += v;
        mean /= static_cast<double>(p.size());
        for (double& v : p) v -= mean;
    }
}

/// Grayscale plus gradient cell features.
///
/// Channels: intensity, horizontal gradient, vertical gradient, gradient magnitude. Intensity is
/// scaled to [0, 1]; gradients are central differences with replicated borders. Each channel is
/// averaged over cell_size x cell_size cells and then shifted to zero mean over the map.
class GrayGradientExtractor final : public FeatureExtractor {
public:
    explicit GrayGradientExtractor(int cell_size = 2) : cell_size_(cell_size) {
        if (cell_size < 1) throw ParameterError("cell_size must be >= 1");
    }

    int cell_size() const noexcept override { return cell_size_; }
    int channels() const noexcept override { return 4; }
    std::string kind() const override { return "gray_gradient"; }

    /// Cell-pooled channels before mean removal.
    FeatureMap pooled_cells(const Patch& patch) const {
        if (patch.empty()) throw ShapeError("empty patch");
        if (patch.width % cell_size_ != 0 || patch.height % cell_size_ != 0)
            throw ShapeError("patch " + std::to_string(patch.width) + "x" + std::to_string(patch.height) +
                             " not divisible by cell size " + std::to_string(cell_size_));
        const int H = patch.height;
        const int W = patch.width;
        std::vector<double> gray(static_cast<std::size_t>(H) * W);
        for (int r = 0; r < H; ++r)
            for (int c = 0; c < W; ++c) gray[r * W + c] = detail::luminance(patch, r, c) / 255.0;

        const int hc = H / cell_size_;
        const int wc = W / cell_size_;
        FeatureMap out(hc, wc, 4);
        const double norm = 1.0 / (cell_size_ * cell_size_);
        for (int r = 0; r < H; ++r) {
            const int rp = std::max(r - 1, 0), rn = std::min(r + 1, H - 1);
            for (int c = 0; c < W; ++c) {
                const int cp = std::max(c - 1, 0), cn = std::min(c + 1, W - 1);
                const double gx = 0.5 * (gray[r * W + cn] - gray[r * W + cp]);
                const double gy = 0.5 * (gray[rn * W + c] - gray[rp * W + c]);
                const int cr = r / cell_size_, cc = c / cell_size_;
                out.at(0, cr, cc) += norm * gray[r * W + c];
                out.at(1, cr, cc) += norm * gx;
                out.at(2, cr, cc) += norm * gy;
                out.at(3, cr, cc) += norm * std::sqrt(gx * gx + gy * gy);
            }
        }
        return out;
    }

    FeatureMap embed(const Patch& patch) const override {
        FeatureMap out = pooled_cells(patch);
        remove_channel_means(out);
        return out;
    }

private:
    int cell_size_;
};

inline std::shared_ptr<const FeatureExtractor> make_extractor(const std::string& kind, int cell_size) {
    if (kind == "gray_gradient") return std::make_shared<GrayGradientExtractor>(cell_size);
    throw ParameterError("unknown feature extractor '" + kind + "'");
}

}  // namespace asnet
