#pragma once

// Frame-level preprocessing and spectra: mean removal, running-average clutter
// filter, windowed zero-padded range FFT, range-Doppler map, leakage clip and
// the movement-power reductions built on the map.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

#include "cagesense/error.hpp"
#include "cagesense/fft.hpp"
#include "cagesense/frame.hpp"
#include "cagesense/radar_model.hpp"

namespace cagesense {

using cplx = std::complex<double>;

/// Bins nearer than this are dominated by Tx-Rx leakage and never read.
inline constexpr double leakage_floor_m = 0.05;

enum class Window { hann, rectangular };

inline std::vector<double> make_window(Window kind, std::size_t n)
{
    std::vector<double> w(n, 1.0);
    if (kind == Window::hann && n > 1) {
        for (std::size_t k = 0; k < n; ++k)
            w[k] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n - 1));
    }
    return w;
}

inline std::size_t leakage_clip_bin(double bin_spacing_m)
{
    return static_cast<std::size_t>(std::ceil(leakage_floor_m / bin_spacing_m - 1e-9));
}

// ---- preprocessing ----------------------------------------------------------

/// Subtracts each chirp's fast-time mean.
template <std::floating_point T>
Frame<T> mean_removal(Frame<T> frame)
{
    for (std::size_t a = 0; a < frame.n_antennas; ++a) {
        for (std::size_t c = 0; c < frame.n_chirps; ++c) {
            auto x = frame.chirp(a, c);
            const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
            for (T& v : x) v = static_cast<T>(static_cast<double>(v) - mean);
        }
    }
    return frame;
}

struct RafState {
    double alpha = 0.95;
    bool initialized = false;
    std::size_t n_antennas = 0, n_chirps = 0, n_samples = 0;
    std::vector<double> running_mean;

    explicit RafState(double a = 0.95)
        : alpha(a)
    {
        if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::invalid_argument, "RAF alpha must lie in [0,1]");
    }
};

template <std::floating_point T>
struct RafResult {
    Frame<T> filtered;
    bool warmup = false;
};

/// Running average filter: out = x - mean; mean <- alpha*mean + (1-alpha)*x.
/// The first frame seeds the mean and passes through unchanged (warm-up).
template <std::floating_point T>
RafResult<T> raf_apply(RafState& state, const Frame<T>& frame)
{
    if (!state.initialized) {
        state.n_antennas = frame.n_antennas;
        state.n_chirps = frame.n_chirps;
        state.n_samples = frame.n_samples;
        state.running_mean.assign(frame.samples.begin(), frame.samples.end());
        state.initialized = true;
        return {frame, true};
    }
    if (frame.n_antennas != state.n_antennas || frame.n_chirps != state.n_chirps || frame.n_samples != state.n_samples)
        throw Error(ErrorCode::shape_mismatch, "raf_apply: frame shape differs from filter state");

    RafResult<T> out{frame, false};
    const double a = state.alpha;
    for (std::size_t i = 0; i < frame.samples.size(); ++i) {
        const double x = static_cast<double>(frame.samples[i]);
        out.filtered.samples[i] = static_cast<T>(x - state.running_mean[i]);
        state.running_mean[i] = a * state.running_mean[i] + (1.0 - a) * x;
    }
    return out;
}

// ---- range FFT ------------------------------------------------------------

struct RangeFftOptions {
    Window window = Window::hann;
    std::size_t zero_pad = 4;
    double max_range_m = std::numeric_limits<double>::infinity();
};

/// Complex range spectra indexed [antenna][chirp][range_bin].
struct RangeProfile {
    std::int64_t timestamp_us = 0;
    std::size_t n_antennas = 0;
    std::size_t n_chirps = 0;
    std::size_t n_bins = 0;
    double bin_spacing_m = 0.0;
    std::size_t valid_from_bin = 0;
    std::vector<cplx> bins;

    [[nodiscard]] const cplx& at(std::size_t a, std::size_t b) const noexcept { return bins[a * n_chirps * n_bins + b]; }
    [[nodiscard]] cplx& at(std::size_t a, std::size_t b) noexcept { return bins[a * n_chirps * n_bins + b]; }
    [[nodiscard]] const cplx& at(std::size_t a, std::size_t c, std::size_t b) const noexcept
    {
        return bins[(a * n_chirps + c) * n_bins + b];
    }
    [[nodiscard]] double range_of(double bin) const noexcept { return bin * bin_spacing_m; }
};

inline std::size_t checked_fft_length(std::size_t n, std::size_t pad, const char* axis)
{
    if (pad < 1 || !fft::is_power_of_two(n * pad))
        throw Error(ErrorCode::invalid_pad, std::string(axis) + " FFT length must be a power of two (pad >= 1)");
    return n * pad;
}

inline std::size_t kept_bins(std::size_t n_fft, double spacing, double max_range_m)
{
    const std::size_t all = n_fft / 2 + 1;
    if (!std::isfinite(max_range_m)) return all;
    return std::min(all, static_cast<std::size_t>(std::floor(max_range_m / spacing)) + 1);
}

template <std::floating_point T>
RangeProfile range_fft(const Frame<T>& frame, const RadarConfig& config, const RangeFftOptions& opt = {})
{
    if (!frame.matches(config) && !(frame.n_chirps == 1 && frame.n_antennas == config.n_antennas
                                     && frame.n_samples == config.n_samples))
        throw Error(ErrorCode::shape_mismatch, "range_fft: frame does not match config");
    const std::size_t n_fft = checked_fft_length(frame.n_samples, opt.zero_pad, "range");
    const DerivedParams p = derive_params(config);

    RangeProfile prof;
    prof.timestamp_us = frame.timestamp_us;
    prof.n_antennas = frame.n_antennas;
    prof.n_chirps = frame.n_chirps;
    prof.bin_spacing_m = p.d_res_m / static_cast<double>(opt.zero_pad);
    prof.n_bins = kept_bins(n_fft, prof.bin_spacing_m, opt.max_range_m);
    prof.valid_from_bin = leakage_clip_bin(prof.bin_spacing_m);
    prof.bins.resize(prof.n_antennas * prof.n_chirps * prof.n_bins);

    const auto w = make_window(opt.window, frame.n_samples);
    std::vector<double> xw(frame.n_samples);
    std::vector<double> scratch;
    std::vector<cplx> sp;
    for (std::size_t a = 0; a < frame.n_antennas; ++a) {
        for (std::size_t c = 0; c < frame.n_chirps; ++c) {
            auto x = frame.chirp(a, c);
            for (std::size_t s = 0; s < x.size(); ++s) xw[s] = static_cast<double>(x[s]) * w[s];
            fft::forward_real(xw, n_fft, scratch, sp);
            std::copy_n(sp.begin(), prof.n_bins,
                        prof.bins.begin() + static_cast<std::ptrdiff_t>((a * prof.n_chirps + c) * prof.n_bins));
        }
    }
    return prof;
}

// ---- range-Doppler --------------------------------------------------------

struct RangeDopplerOptions {
    Window window = Window::hann;
    std::size_t range_pad = 4;
    std::size_t doppler_pad = 4;
    double max_range_m = std::numeric_limits<double>::infinity();
    bool average_antennas = false; // emit combined() directly
};

/// Power (|X|^2) indexed [antenna][range_bin][doppler_bin]; the Doppler axis
/// is shifted so index n_doppler/2 is zero velocity.
struct RangeDopplerMap {
    std::int64_t timestamp_us = 0;
    std::size_t n_antennas = 0;
    std::size_t n_range = 0;
    std::size_t n_doppler = 0;
    double range_spacing_m = 0.0;
    double velocity_spacing_mps = 0.0;
    std::size_t range_pad = 1;
    std::size_t doppler_pad = 1;
    std::size_t valid_from_bin = 0;
    std::vector<double> power;

    [[nodiscard]] double& at(std::size_t a, std::size_t r, std::size_t d) noexcept
    {
        return power[(a * n_range + r) * n_doppler + d];
    }
    [[nodiscard]] double at(std::size_t a, std::size_t r, std::size_t d) const noexcept
    {
        return power[(a * n_range + r) * n_doppler + d];
    }
    [[nodiscard]] std::size_t zero_doppler_bin() const noexcept { return n_doppler / 2; }
    [[nodiscard]] double range_of(double r) const noexcept { return r * range_spacing_m; }
    [[nodiscard]] double velocity_of(double d) const noexcept
    {
        return (d - static_cast<double>(zero_doppler_bin())) * velocity_spacing_mps;
    }

    /// Antenna-averaged (non-coherent) power map.
    [[nodiscard]] RangeDopplerMap combined() const
    {
        RangeDopplerMap m = *this;
        m.n_antennas = 1;
        const std::size_t cells = n_range * n_doppler;
        m.power.assign(cells, 0.0);
        for (std::size_t a = 0; a < n_antennas; ++a)
            for (std::size_t i = 0; i < cells; ++i) m.power[i] += power[a * cells + i];
        if (n_antennas > 0)
            for (double& v : m.power) v /= static_cast<double>(n_antennas);
        return m;
    }

    /// Zeroes every range bin below the leakage floor.
    void clip_leakage() noexcept
    {
        for (std::size_t a = 0; a < n_antennas; ++a)
            for (std::size_t r = 0; r < std::min(valid_from_bin, n_range); ++r)
                for (std::size_t d = 0; d < n_doppler; ++d) at(a, r, d) = 0.0;
    }
};

template <std::floating_point T>
RangeDopplerMap range_doppler(const Frame<T>& frame, const RadarConfig& config, const RangeDopplerOptions& opt = {})
{
    if (frame.n_chirps < 2) throw Error(ErrorCode::invalid_argument, "range_doppler needs at least two chirps");
    const std::size_t n_dopp = checked_fft_length(frame.n_chirps, opt.doppler_pad, "Doppler");
    const DerivedParams p = derive_params(config);
    const RangeProfile cube = range_fft(frame, config, {opt.window, opt.range_pad, opt.max_range_m});

    RangeDopplerMap map;
    map.timestamp_us = frame.timestamp_us;
    map.n_antennas = opt.average_antennas ? 1 : frame.n_antennas;
    map.n_range = cube.n_bins;
    map.n_doppler = n_dopp;
    map.range_spacing_m = cube.bin_spacing_m;
    map.velocity_spacing_mps = p.v_res_mps / static_cast<double>(opt.doppler_pad);
    map.range_pad = opt.range_pad;
    map.doppler_pad = opt.doppler_pad;
    map.valid_from_bin = cube.valid_from_bin;
    map.power.assign(map.n_antennas * map.n_range * map.n_doppler, 0.0);

    const auto w = make_window(opt.window, frame.n_chirps);
    const double scale = opt.average_antennas ? 1.0 / static_cast<double>(frame.n_antennas) : 1.0;
    std::vector<cplx> buf(n_dopp);
    const std::size_t half = n_dopp / 2;
    for (std::size_t a = 0; a < frame.n_antennas; ++a) {
        const std::size_t dst = opt.average_antennas ? 0 : a;
        for (std::size_t r = map.valid_from_bin; r < map.n_range; ++r) {
            std::fill(buf.begin(), buf.end(), cplx{});
            for (std::size_t c = 0; c < frame.n_chirps; ++c) buf[c] = cube.at(a, c, r) * w[c];
            fft::forward(buf);
            for (std::size_t k = 0; k < n_dopp; ++k) map.at(dst, r, (k + half) % n_dopp) += scale * std::norm(buf[k]);
        }
    }
    map.clip_leakage();
    return map;
}

/// L2 norm over every magnitude in the map.
inline double movement_power(const RangeDopplerMap& map)
{
    double s = 0.0;
    for (double v : map.power) s += v;
    return std::sqrt(s);
}

/// Per range bin, L2 norm of the magnitudes over Doppler (and antennas).
inline std::vector<double> range_power_profile(const RangeDopplerMap& map)
{
    std::vector<double> prof(map.n_range, 0.0);
    for (std::size_t a = 0; a < map.n_antennas; ++a)
        for (std::size_t r = 0; r < map.n_range; ++r)
            for (std::size_t d = 0; d < map.n_doppler; ++d) prof[r] += map.at(a, r, d);
    for (double& v : prof) v = std::sqrt(v);
    return prof;
}

} // namespace cagesense
