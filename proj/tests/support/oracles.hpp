#pragma once

// Reference implementations for tests. Nothing here touches the FFT path: everything is dense
// linear algebra or a direct loop.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "asnet/imaging.hpp"
#include "asnet/response.hpp"

namespace oracle {

using asnet::FeatureMap;

inline FeatureMap random_map(std::mt19937_64& rng, int h, int w, int c) {
    std::normal_distribution<double> n(0.0, 1.0);
    FeatureMap m(h, w, c);
    for (auto& v : m.values) v = n(rng);
    return m;
}

inline int wrap(int i, int n) { return ((i % n) + n) % n; }

/// (a (x) b)[p] = sum_q a[p - q] b[q], per channel, by a direct double loop.
inline FeatureMap circular_convolve(const FeatureMap& a, const FeatureMap& b) {
    FeatureMap out(a.height, a.width, a.channels);
    for (int ch = 0; ch < a.channels; ++ch)
        for (int pr = 0; pr < a.height; ++pr)
            for (int pc = 0; pc < a.width; ++pc) {
                double s = 0.0;
                for (int qr = 0; qr < a.height; ++qr)
                    for (int qc = 0; qc < a.width; ++qc)
                        s += a.at(ch, wrap(pr - qr, a.height), wrap(pc - qc, a.width)) * b.at(ch, qr, qc);
                out.at(ch, pr, pc) = s;
            }
    return out;
}

/// Circulant matrix C of one channel of `s`, so that C k is the circular convolution s (x) k.
inline Eigen::MatrixXd circulant(const FeatureMap& s, int ch) {
    const int n = s.height * s.width;
    Eigen::MatrixXd c(n, n);
    for (int pr = 0; pr < s.height; ++pr)
        for (int pc = 0; pc < s.width; ++pc)
            for (int qr = 0; qr < s.height; ++qr)
                for (int qc = 0; qc < s.width; ++qc)
                    c(pr * s.width + pc, qr * s.width + qc) = s.at(ch, wrap(pr - qr, s.height), wrap(pc - qc, s.width));
    return c;
}

/// argmin_k ||C k - t||^2 + lambda ||k||^2 per channel, by a least-squares solve of the stacked
/// system [C; sqrt(lambda) I] k = [t; 0].
inline FeatureMap dense_ridge(const FeatureMap& source, const FeatureMap& target, double lambda) {
    const int n = source.height * source.width;
    FeatureMap k(source.height, source.width, source.channels);
    for (int ch = 0; ch < source.channels; ++ch) {
        Eigen::MatrixXd a(2 * n, n);
        a.topRows(n) = circulant(source, ch);
        a.bottomRows(n) = std::sqrt(lambda) * Eigen::MatrixXd::Identity(n, n);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(2 * n);
        for (int i = 0; i < n; ++i) b(i) = target.values[static_cast<std::size_t>(ch) * n + i];
        const Eigen::VectorXd x = a.colPivHouseholderQr().solve(b);
        for (int i = 0; i < n; ++i) k.values[static_cast<std::size_t>(ch) * n + i] = x(i);
    }
    return k;
}

/// ||k (x) source - target||^2 + lambda ||k||^2
inline double ridge_objective(const FeatureMap& k, const FeatureMap& source, const FeatureMap& target, double lambda) {
    const FeatureMap r = oracle::circular_convolve(k, source);
    double obj = 0.0;
    for (std::size_t i = 0; i < r.values.size(); ++i) {
        const double d = r.values[i] - target.values[i];
        obj += d * d + lambda * k.values[i] * k.values[i];
    }
    return obj;
}

/// R[dy, dx] = sum_c sum_{i,j} T[c, i, j] S[c, (i + dy) mod H, (j + dx) mod W]
inline std::vector<double> sliding_correlation(const FeatureMap& t, const FeatureMap& s) {
    std::vector<double> out(static_cast<std::size_t>(s.height) * s.width, 0.0);
    for (int dy = 0; dy < s.height; ++dy)
        for (int dx = 0; dx < s.width; ++dx) {
            double acc = 0.0;
            for (int ch = 0; ch < t.channels; ++ch)
                for (int i = 0; i < t.height; ++i)
                    for (int j = 0; j < t.width; ++j)
                        acc += t.at(ch, i, j) * s.at(ch, (i + dy) % s.height, (j + dx) % s.width);
            out[static_cast<std::size_t>(dy) * s.width + dx] = acc;
        }
    return out;
}

/// w[n] = sin^2(pi n / (N - 1)), the Hann window in its sine form.
inline double hann(int n, int len) {
    if (len == 1) return 1.0;
    const double s = std::sin(std::numbers::pi * n / (len - 1));
    return s * s;
}

/// Ridge least squares u = argmin ||A u - y||^2 + lambda ||u||^2 through the pseudo-inverse of
/// the stacked matrix [A; sqrt(lambda) I].
inline Eigen::VectorXd ridge_lstsq(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, double lambda) {
    const auto d = a.rows(), v = a.cols();
    Eigen::MatrixXd s(d + v, v);
    s.topRows(d) = a;
    s.bottomRows(v) = std::sqrt(lambda) * Eigen::MatrixXd::Identity(v, v);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(d + v);
    b.head(d) = y;
    return s.completeOrthogonalDecomposition().pseudoInverse() * b;
}

/// Column of a design matrix: the map flattened row-major over (height, width, channel).
inline Eigen::VectorXd flatten(const FeatureMap& m) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(m.values.size()));
    Eigen::Index i = 0;
    for (int r = 0; r < m.height; ++r)
        for (int c = 0; c < m.width; ++c)
            for (int ch = 0; ch < m.channels; ++ch) out(i++) = m.at(ch, r, c);
    return out;
}

inline double rel_error(const std::vector<double>& got, const std::vector<double>& want) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        num += (got[i] - want[i]) * (got[i] - want[i]);
        den += want[i] * want[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace oracle
