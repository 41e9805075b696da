#pragma once

#include <cmath>
#include <utility>
#include <algorithm>
#include <vector>

#include "asnet/error.hpp"

namespace asnet {

/// Real 2-D score surface with its maximum (first in row-major order on ties).
struct ResponseMap {
    int height = 0;
    int width = 0;
    std::vector<double> values;
    double peak_value = 0.0;
    int peak_row = 0;
    int peak_col = 0;

    ResponseMap() = default;
    ResponseMap(int h, int w, std::vector<double> v) : height(h), width(w), values(std::move(v)) {
        if (h <= 0 || w <= 0 || values.size() != static_cast<std::size_t>(h) * w)
            throw ShapeError("response map size mismatch");
        refresh_peak();
    }

    double at(int row, int col) const { return values[static_cast<std::size_t>(row) * width + col]; }

    void refresh_peak() {
        std::size_t best = 0;
        for (std::size_t i = 1; i < values.size(); ++i)
            if (values[i] > values[best]) best = i;
        peak_value = values[best];
        peak_row = static_cast<int>(best / width);
        peak_col = static_cast<int>(best % width);
    }

    bool same_shape(const ResponseMap& o) const noexcept { return height == o.height && width == o.width; }

    bool peak_on_border() const noexcept {
        return peak_row == 0 || peak_col == 0 || peak_row == height - 1 || peak_col == width - 1;
    }

    /// Parabolic sub-bin refinement of the peak along (row, col), each in [-0.5, 0.5].
    std::pair<double, double> subpixel_offset() const {
        auto vertex = [](double left, double mid, double right) {
            const double denom = left - 2.0 * mid + right;
            if (!(denom < 0.0)) return 0.0;
            return std::clamp(0.5 * (left - right) / denom, -0.5, 0.5);
        };
        const int up = (peak_row + height - 1) % height, down = (peak_row + 1) % height;
        const int lt = (peak_col + width - 1) % width, rt = (peak_col + 1) % width;
        const double dr = height > 2 ? vertex(at(up, peak_col), peak_value, at(down, peak_col)) : 0.0;
        const double dc = width > 2 ? vertex(at(peak_row, lt), peak_value, at(peak_row, rt)) : 0.0;
        return {dr, dc};
    }

    /// Circularly shifts so that bin (r, c) moves to ((r + dr) mod H, (c + dc) mod W).
    ResponseMap rolled(int dr, int dc) const {
        std::vector<double> out(values.size());
        for (int r = 0; r < height; ++r) {
            const int rr = ((r + dr) % height + height) % height;
            for (int c = 0; c < width; ++c) {
                const int cc = ((c + dc) % width + width) % width;
                out[static_cast<std::size_t>(rr) * width + cc] = at(r, c);
            }
        }
        return ResponseMap(height, width, std::move(out));
    }

    friend bool operator==(const ResponseMap&, const ResponseMap&) = default;
};

}  // namespace asnet
