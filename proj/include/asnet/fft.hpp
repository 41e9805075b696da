#pragma once

// 2-D complex DFT over feature-map planes, backed by FFTW.
//
// Convention: unnormalized forward transform, 1/N on the inverse.

#include <algorithm>
#include <complex>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include <fftw3.h>

#include "asnet/error.hpp"
#include "asnet/imaging.hpp"

namespace asnet {

using Complex = std::complex<double>;

/// Per-channel spectrum of a FeatureMap, channel-planar like its source.
struct Spectrum {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<Complex> values;

    Spectrum() = default;
    Spectrum(int h, int w, int c)
        : height(h), width(w), channels(c), values(static_cast<std::size_t>(h) * w * c) {}

    std::size_t plane_size() const noexcept { return static_cast<std::size_t>(height) * width; }
    Complex* plane(int ch) { return values.data() + ch * plane_size(); }
    const Complex* plane(int ch) const { return values.data() + ch * plane_size(); }
};

namespace detail {

// Plans are in-place (matching how they are executed) and FFTW_UNALIGNED so results never depend
// on buffer alignment. The planner is not thread-safe and is serialized; new-array execution is.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(int h, int w, int sign) {
        std::lock_guard lock(mutex_);
        auto key = std::make_tuple(h, w, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        std::vector<Complex> buf(static_cast<std::size_t>(h) * w);
        auto* data = reinterpret_cast<fftw_complex*>(buf.data());
        fftw_plan p = fftw_plan_dft_2d(h, w, data, data, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (p == nullptr) throw Error("fftw planning failed");
        plans_.emplace(key, p);
        return p;
    }

    PlanCache(const PlanCache&) = delete;
    PlanCache& operator=(const PlanCache&) = delete;

private:
    PlanCache() = default;
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

inline void dft_inplace(Complex* data, int h, int w, int sign) {
    fftw_plan p = PlanCache::instance().get(h, w, sign);
    auto* buf = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(p, buf, buf);
}

}  // namespace detail

inline Spectrum fft(const FeatureMap& map) {
    Spectrum s(map.height, map.width, map.channels);
    for (int ch = 0; ch < map.channels; ++ch) {
        auto src = map.plane(ch);
        Complex* dst = s.plane(ch);
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = Complex(src[i], 0.0);
        detail::dft_inplace(dst, map.height, map.width, FFTW_FORWARD);
    }
    return s;
}

/// Inverse transform keeping the real part.
inline FeatureMap ifft_real(const Spectrum& spec) {
    FeatureMap out(spec.height, spec.width, spec.channels);
    std::vector<Complex> buf(spec.plane_size());
    const double scale = 1.0 / static_cast<double>(spec.plane_size());
    for (int ch = 0; ch < spec.channels; ++ch) {
        std::copy(spec.plane(ch), spec.plane(ch) + spec.plane_size(), buf.begin());
        detail::dft_inplace(buf.data(), spec.height, spec.width, FFTW_BACKWARD);
        auto dst = out.plane(ch);
        for (std::size_t i = 0; i < buf.size(); ++i) dst[i] = buf[i].real() * scale;
    }
    return out;
}

/// Smallest even n' >= n whose only prime factors are 2, 3 and 5.
inline int fft_friendly_even(int n) {
    for (int m = std::max(2, n + (n & 1));; m += 2) {
        int r = m;
        for (int p : {2, 3, 5})
            while (r % p == 0) r /= p;
        if (r == 1) return m;
    }
}

/// Zero-pads (top-left aligned) every channel to h x w.
inline FeatureMap zero_pad(const FeatureMap& map, int h, int w) {
    if (h < map.height || w < map.width) throw ShapeError("zero_pad target smaller than source");
    if (h == map.height && w == map.width) return map;
    FeatureMap out(h, w, map.channels);
    for (int ch = 0; ch < map.channels; ++ch)
        for (int r = 0; r < map.height; ++r)
            for (int c = 0; c < map.width; ++c) out.at(ch, r, c) = map.at(ch, r, c);
    return out;
}

}  // namespace asnet
