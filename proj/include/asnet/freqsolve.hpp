#pragma once

// Frequency-domain circular convolution, closed-form ridge transforms and correlation.

#include <cmath>
#include <deque>
#include <string>

#include "asnet/error.hpp"
#include "asnet/fft.hpp"
#include "asnet/imaging.hpp"
#include "asnet/response.hpp"

namespace asnet {

/// Per-channel circular-convolution kernel together with its spectrum.
struct Transform {
    FeatureMap kernel;
    Spectrum spectrum;

    static Transform identity(int h, int w, int c) {
        Transform t;
        t.kernel = FeatureMap::impulse(h, w, c);
        t.spectrum = Spectrum(h, w, c);
        for (auto& v : t.spectrum.values) v = Complex(1.0, 0.0);
        return t;
    }

    static Transform from_kernel(FeatureMap kernel) {
        Transform t;
        t.spectrum = fft(kernel);
        t.kernel = std::move(kernel);
        return t;
    }

    bool matches(const FeatureMap& m) const noexcept { return kernel.same_shape(m); }

    /// Spectrum of kernel (x) map.
    Spectrum apply_spectrum(const FeatureMap& map) const {
        if (!matches(map)) throw ShapeError("transform shape does not match feature map");
        Spectrum s = fft(map);
        for (std::size_t i = 0; i < s.values.size(); ++i) s.values[i] *= spectrum.values[i];
        return s;
    }

    /// kernel (x) map
    FeatureMap apply(const FeatureMap& map) const { return ifft_real(apply_spectrum(map)); }
};

/// Per-channel 2-D circular convolution.
inline FeatureMap circular_convolve(const FeatureMap& a, const FeatureMap& b) {
    if (!a.same_shape(b)) throw ShapeError("circular_convolve: shape mismatch");
    Spectrum sa = fft(a);
    const Spectrum sb = fft(b);
    for (std::size_t i = 0; i < sa.values.size(); ++i) sa.values[i] *= sb.values[i];
    return ifft_real(sa);
}

/// argmin_K ||K (x) source - target||^2 + lambda ||K||^2, solved per channel and frequency bin.
inline Transform solve_ridge_transform(const FeatureMap& source, const FeatureMap& target, double lambda) {
    if (!source.same_shape(target)) throw ShapeError("ridge transform: shape mismatch");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParameterError("lambda must be finite and >= 0");
    const Spectrum s = fft(source);
    const Spectrum t = fft(target);
    Spectrum k(s.height, s.width, s.channels);
    for (std::size_t i = 0; i < k.values.size(); ++i) {
        const double energy = std::norm(s.values[i]);
        if (lambda == 0.0 && energy == 0.0)
            throw SingularSystemError("ridge transform: zero frequency bin with lambda = 0");
        k.values[i] = std::conj(s.values[i]) * t.values[i] / (energy + lambda);
    }
    Transform out;
    out.kernel = ifft_real(k);
    out.spectrum = std::move(k);
    return out;
}

/// Ridge optimum restricted to even (zero-phase) kernels: the real part of each bin.
inline Transform zero_phase(const Transform& t) {
    Transform out;
    out.spectrum = t.spectrum;
    for (auto& v : out.spectrum.values) v = Complex(v.real(), 0.0);
    out.kernel = ifft_real(out.spectrum);
    return out;
}

/// Appearance-variation transform mapping the first-frame template to the latest target features.
inline Transform solve_variation_transform(const FeatureMap& first_template, const FeatureMap& previous_target,
                                           double lambda_m) {
    return solve_ridge_transform(first_template, previous_target, lambda_m);
}

/// Background-suppression transform mapping region features to their Gaussian-weighted version.
inline Transform solve_suppression_transform(const FeatureMap& region, const FeatureMap& weighted_region,
                                             double lambda_w) {
    return solve_ridge_transform(region, weighted_region, lambda_w);
}

/// Spectrum of a template zero-padded to the search size, ready for correlate_spectra.
inline Spectrum template_spectrum(const FeatureMap& tmpl, int search_h, int search_w) {
    if (tmpl.height > search_h || tmpl.width > search_w)
        throw ShapeError("template larger than search region");
    return fft(zero_pad(tmpl, search_h, search_w));
}

/// R[dy, dx] = sum_c sum_{i,j} T[c, i, j] * S[c, (i + dy) mod H, (j + dx) mod W].
inline ResponseMap correlate_spectra(const Spectrum& tmpl, const Spectrum& search) {
    if (tmpl.channels != search.channels)
        throw ShapeError("correlate: channel mismatch (" + std::to_string(tmpl.channels) + " vs " +
                         std::to_string(search.channels) + ")");
    if (tmpl.height != search.height || tmpl.width != search.width)
        throw ShapeError("correlate: padded template does not match search size");
    const std::size_t n = search.plane_size();
    std::vector<Complex> acc(n);
    for (int ch = 0; ch < search.channels; ++ch) {
        const Complex* t = tmpl.plane(ch);
        const Complex* s = search.plane(ch);
        for (std::size_t i = 0; i < n; ++i) acc[i] += std::conj(t[i]) * s[i];
    }
    detail::dft_inplace(acc.data(), search.height, search.width, FFTW_BACKWARD);
    std::vector<double> out(n);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = acc[i].real() * scale;
    return ResponseMap(search.height, search.width, std::move(out));
}

/// A template with its zero-padded spectra cached per search size.
class TemplateSpectra {
public:
    explicit TemplateSpectra(FeatureMap tmpl) : features_(std::move(tmpl)) {}

    const FeatureMap& features() const noexcept { return features_; }

    const Spectrum& padded(int h, int w) {
        for (const auto& s : cache_)
            if (s.height == h && s.width == w) return s;
        cache_.push_back(template_spectrum(features_, h, w));
        return cache_.back();
    }

private:
    FeatureMap features_;
    std::deque<Spectrum> cache_;
};

/// Circular cross-correlation summed over channels; the template is zero-padded to the search size.
inline ResponseMap correlate(const FeatureMap& tmpl, const FeatureMap& search) {
    if (tmpl.channels != search.channels) throw ShapeError("correlate: channel mismatch");
    return correlate_spectra(template_spectrum(tmpl, search.height, search.width), fft(search));
}

}  // namespace asnet
