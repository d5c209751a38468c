#pragma once

// 1-D signal tools for the slow-time series: Butterworth sections built from
// RBJ biquads, zero-phase filtering, Savitzky-Golay derivatives, decimation,
// Welch PSD and a few robust statistics.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cagesense/error.hpp"
#include "cagesense/fft.hpp"

namespace cagesense {

// ---- statistics ---------------------------------------------------------------

inline double median(std::vector<double> v)
{
    if (v.empty()) throw Error(ErrorCode::empty_series, "median of empty series");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

inline double mean(std::span<const double> v)
{
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

/// Vertex offset in (-0.5, 0.5) of the parabola through (-1,l), (0,c), (1,r).
inline double parabolic_offset(double l, double c, double r) noexcept
{
    const double den = l - 2.0 * c + r;
    if (den == 0.0) return 0.0;
    return std::clamp(0.5 * (l - r) / den, -0.5, 0.5);
}

// ---- biquads ----------------------------------------------------------------

/// Normalized (a0 = 1) second-order section, transposed direct form II.
struct Biquad {
    double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;

    [[nodiscard]] double dc_gain() const noexcept { return (b0 + b1 + b2) / (1.0 + a1 + a2); }
};

using Sos = std::vector<Biquad>;

namespace detail {

inline void check_cutoff(double fc, double fs)
{
    if (!(fs > 0.0) || !(fc > 0.0) || !(fc < 0.5 * fs))
        throw Error(ErrorCode::invalid_argument, "cutoff must lie in (0, fs/2)");
}

inline Biquad rbj(double fc, double fs, double q, bool highpass)
{
    check_cutoff(fc, fs);
    const double w0 = 2.0 * std::numbers::pi * fc / fs;
    const double cw = std::cos(w0);
    const double alpha = std::sin(w0) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    Biquad s;
    if (highpass) {
        s.b0 = (1.0 + cw) / 2.0;
        s.b1 = -(1.0 + cw);
    } else {
        s.b0 = (1.0 - cw) / 2.0;
        s.b1 = 1.0 - cw;
    }
    s.b2 = s.b0;
    s.a1 = -2.0 * cw;
    s.a2 = 1.0 - alpha;
    s.b0 /= a0;
    s.b1 /= a0;
    s.b2 /= a0;
    s.a1 /= a0;
    s.a2 /= a0;
    return s;
}

// Pole-pair quality factors of an even-order Butterworth prototype.
inline std::vector<double> butterworth_q(int order)
{
    if (order < 2 || order % 2 != 0) throw Error(ErrorCode::invalid_argument, "Butterworth order must be even and >= 2");
    std::vector<double> q;
    for (int k = 1; k <= order / 2; ++k)
        q.push_back(1.0 / (2.0 * std::cos((2.0 * k - 1.0) * std::numbers::pi / (2.0 * order))));
    return q;
}

} // namespace detail

inline Sos butter_lowpass(int order, double fc, double fs)
{
    Sos s;
    for (double q : detail::butterworth_q(order)) s.push_back(detail::rbj(fc, fs, q, false));
    return s;
}

inline Sos butter_highpass(int order, double fc, double fs)
{
    Sos s;
    for (double q : detail::butterworth_q(order)) s.push_back(detail::rbj(fc, fs, q, true));
    return s;
}

/// High-pass at lo followed by low-pass at hi, each of the given order.
inline Sos butter_bandpass(int order, double lo, double hi, double fs)
{
    if (!(lo < hi)) throw Error(ErrorCode::invalid_argument, "band edges must satisfy lo < hi");
    Sos s = butter_highpass(order, lo, fs);
    Sos lp = butter_lowpass(order, hi, fs);
    s.insert(s.end(), lp.begin(), lp.end());
    return s;
}

/// Magnitude response at f (Hz).
inline double sos_gain(const Sos& sos, double f, double fs)
{
    const double w = 2.0 * std::numbers::pi * f / fs;
    const std::complex<double> z1 = std::polar(1.0, -w);
    const std::complex<double> z2 = z1 * z1;
    std::complex<double> h = 1.0;
    for (const auto& s : sos) h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
    return std::abs(h);
}

/// Causal filtering. When `x0` is given, each section starts in the steady
/// state it would reach for a constant input equal to x0.
inline std::vector<double> sosfilt(const Sos& sos, std::span<const double> x, const double* x0 = nullptr)
{
    std::vector<double> y(x.begin(), x.end());
    double level = x0 ? *x0 : 0.0;
    for (const auto& s : sos) {
        double z1 = 0.0, z2 = 0.0;
        if (x0) {
            const double g = s.dc_gain();
            z1 = (g - s.b0) * level;
            z2 = (s.b2 - s.a2 * g) * level;
            level *= g;
        }
        for (double& v : y) {
            const double in = v;
            const double out = s.b0 * in + z1;
            z1 = s.b1 * in - s.a1 * out + z2;
            z2 = s.b2 * in - s.a2 * out;
            v = out;
        }
    }
    return y;
}

/// Zero-phase forward-backward filtering with odd reflection padding.
inline std::vector<double> filtfilt(const Sos& sos, std::span<const double> x)
{
    const std::size_t n = x.size();
    if (n < 2) return {x.begin(), x.end()};
    const std::size_t pad = std::min<std::size_t>(3 * (2 * sos.size() + 1), n - 1);

    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

    double x0 = ext.front();
    std::vector<double> y = sosfilt(sos, ext, &x0);
    std::reverse(y.begin(), y.end());
    x0 = y.front();
    y = sosfilt(sos, y, &x0);
    std::reverse(y.begin(), y.end());
    return {y.begin() + static_cast<std::ptrdiff_t>(pad), y.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

// ---- Savitzky-Golay ---------------------------------------------------------

/// Dot-product coefficients c such that sum_k c[k]*x[i-m+k] estimates the
/// `deriv`-th derivative at sample i (window 2m+1, sample spacing delta).
inline std::vector<double> savgol_coefficients(std::size_t window, int order, int deriv, double delta = 1.0)
{
    if (window % 2 == 0 || window < 3) throw Error(ErrorCode::invalid_argument, "Savitzky-Golay window must be odd and >= 3");
    if (order < 0 || static_cast<std::size_t>(order) >= window || deriv < 0 || deriv > order)
        throw Error(ErrorCode::invalid_argument, "Savitzky-Golay needs 0 <= deriv <= order < window");

    const int m = static_cast<int>(window / 2);
    Eigen::MatrixXd A(window, order + 1);
    for (int i = 0; i < static_cast<int>(window); ++i)
        for (int j = 0; j <= order; ++j) A(i, j) = std::pow(static_cast<double>(i - m), j);
    // Least-squares fit: row `deriv` of pinv(A) gives the polynomial coefficient.
    const Eigen::MatrixXd pinv = A.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(window),
                                                                                           static_cast<Eigen::Index>(window)));
    double fact = 1.0;
    for (int k = 2; k <= deriv; ++k) fact *= k;
    const double scale = fact / std::pow(delta, deriv);
    std::vector<double> c(window);
    for (std::size_t k = 0; k < window; ++k) c[k] = pinv(deriv, static_cast<Eigen::Index>(k)) * scale;
    return c;
}

/// Applies dot-product coefficients at every position where the window fits
/// (output length n - window + 1, aligned to input index window/2).
inline std::vector<double> apply_valid(std::span<const double> x, std::span<const double> c)
{
    if (x.size() < c.size()) return {};
    std::vector<double> y(x.size() - c.size() + 1);
    for (std::size_t i = 0; i < y.size(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) s += c[k] * x[i + k];
        y[i] = s;
    }
    return y;
}

// ---- resampling / spectra ---------------------------------------------------

/// Zero-phase 8th-order Butterworth anti-alias at 0.8 x the new Nyquist, then
/// keeps every `factor`-th sample.
inline std::vector<double> decimate(std::span<const double> x, std::size_t factor, double fs = 1.0)
{
    if (factor == 0) throw Error(ErrorCode::invalid_argument, "decimation factor must be >= 1");
    if (factor == 1) return {x.begin(), x.end()};
    const Sos lp = butter_lowpass(8, 0.8 * fs / (2.0 * static_cast<double>(factor)), fs);
    const std::vector<double> y = filtfilt(lp, x);
    std::vector<double> out;
    out.reserve(y.size() / factor + 1);
    for (std::size_t i = 0; i < y.size(); i += factor) out.push_back(y[i]);
    return out;
}

struct Spectrum {
    std::vector<double> freq_hz;
    std::vector<double> value;
};

/// One-sided magnitude spectrum of a Hann-windowed, mean-removed series
/// zero-padded to the next power of two >= n*pad.
inline Spectrum magnitude_spectrum(std::span<const double> x, double fs, std::size_t pad = 8)
{
    const std::size_t n = x.size();
    Spectrum s;
    if (n == 0) return s;
    const double mu = mean(x);
    std::vector<double> xw(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = n > 1 ? 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1)) : 1.0;
        xw[i] = (x[i] - mu) * w;
    }
    const std::size_t n_fft = fft::next_power_of_two(n * std::max<std::size_t>(pad, 1));
    const auto X = fft::forward_real(xw, n_fft);
    s.freq_hz.resize(X.size());
    s.value.resize(X.size());
    for (std::size_t k = 0; k < X.size(); ++k) {
        s.freq_hz[k] = static_cast<double>(k) * fs / static_cast<double>(n_fft);
        s.value[k] = std::abs(X[k]);
    }
    return s;
}

/// Welch PSD estimate: Hann segments, 50% overlap, per-segment mean removal.
inline Spectrum welch(std::span<const double> x, double fs, std::size_t nperseg)
{
    Spectrum s;
    nperseg = std::min(nperseg, x.size());
    if (nperseg < 2) return s;
    const std::size_t step = std::max<std::size_t>(nperseg / 2, 1);
    std::vector<double> w(nperseg);
    double wss = 0.0;
    for (std::size_t i = 0; i < nperseg; ++i) {
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(nperseg));
        wss += w[i] * w[i];
    }
    const std::size_t n_fft = fft::next_power_of_two(nperseg);
    std::vector<double> acc(n_fft / 2 + 1, 0.0);
    std::vector<double> seg(nperseg);
    std::vector<double> scratch;
    std::vector<fft::cplx> X;
    std::size_t count = 0;
    for (std::size_t start = 0; start + nperseg <= x.size(); start += step) {
        const double mu = mean(x.subspan(start, nperseg));
        for (std::size_t i = 0; i < nperseg; ++i) seg[i] = (x[start + i] - mu) * w[i];
        fft::forward_real(seg, n_fft, scratch, X);
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += std::norm(X[k]);
        ++count;
    }
    s.freq_hz.resize(acc.size());
    s.value.resize(acc.size());
    for (std::size_t k = 0; k < acc.size(); ++k) {
        s.freq_hz[k] = static_cast<double>(k) * fs / static_cast<double>(n_fft);
        s.value[k] = acc[k] / (static_cast<double>(count) * fs * wss);
    }
    return s;
}

/// Linear interpolation of a sampled spectrum at f.
inline double interpolate(const Spectrum& s, double f)
{
    if (s.freq_hz.empty()) return 0.0;
    if (f <= s.freq_hz.front()) return s.value.front();
    if (f >= s.freq_hz.back()) return s.value.back();
    const auto it = std::upper_bound(s.freq_hz.begin(), s.freq_hz.end(), f);
    const std::size_t i = static_cast<std::size_t>(it - s.freq_hz.begin());
    const double t = (f - s.freq_hz[i - 1]) / (s.freq_hz[i] - s.freq_hz[i - 1]);
    return s.value[i - 1] + t * (s.value[i] - s.value[i - 1]);
}

} // namespace cagesense
