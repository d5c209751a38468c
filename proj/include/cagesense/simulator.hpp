#pragma once

// IF-signal synthesis. Each reflector at range d contributes
//   A * cos(2*pi*f_IF(d)*t + 4*pi*d/lambda_0),  f_IF = S*2d/c,
// to every fast-time sample of a chirp, lambda_0 being the wavelength at the
// chirp start frequency. Ranges are evaluated at chirp start
// (stop-and-hop); antennas share the deterministic part and get independent
// noise streams keyed by (seed, frame, antenna).

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include <boost/random/normal_distribution.hpp>

#include "cagesense/error.hpp"
#include "cagesense/frame.hpp"
#include "cagesense/radar_model.hpp"
#include "cagesense/scene.hpp"

namespace cagesense {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t frame, std::uint64_t antenna) noexcept
{
    return splitmix64(splitmix64(splitmix64(seed) ^ frame) ^ (antenna + 0x5bd1e995ull));
}

// Adds A*cos(phase0 + k*step) for k in [0, n) to out.
inline void accumulate_tone(std::vector<double>& out, double amplitude, double phase0, double step)
{
    std::complex<double> z = std::polar(amplitude, phase0);
    const std::complex<double> w = std::polar(1.0, step);
    for (double& v : out) {
        v += z.real();
        z *= w;
    }
}

} // namespace detail

/// Per-target received amplitude at time t after the range law and shadowing.
/// A target is shadowed when another target sits less than one range bin
/// closer (ties: the earlier target in the list counts as nearer).
inline std::vector<double> occlude(const Scene& scene, const RadarConfig& config, double t)
{
    const double d_res = derive_params(config).d_res_m;
    const std::size_t n = scene.targets.size();
    std::vector<double> ranges(n);
    std::vector<double> amps(n);
    for (std::size_t i = 0; i < n; ++i) {
        ranges[i] = scene.targets[i].range(t);
        amps[i] = scene.target_amplitude(scene.targets[i], ranges[i]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const bool j_nearer = ranges[j] < ranges[i] || (ranges[j] == ranges[i] && j < i);
            if (j_nearer && ranges[i] - ranges[j] < d_res) {
                amps[i] *= scene.occlusion_factor;
                break;
            }
        }
    }
    return amps;
}

class FrameSynthesizer {
public:
    FrameSynthesizer(Scene scene, RadarConfig config)
        : scene_(std::move(scene))
        , config_(config)
        , params_(derive_params(config_))
    {
        validate(scene_);
        check_scene_fits(scene_, params_);
        dt_ = config_.fast_time_step_s();
        static_chirp_.assign(config_.n_samples, 0.0);
        for (const auto& c : scene_.clutter) add_reflector(static_chirp_, c.amplitude, c.range_m);
    }

    [[nodiscard]] const Scene& scene() const noexcept { return scene_; }
    [[nodiscard]] const RadarConfig& config() const noexcept { return config_; }
    [[nodiscard]] const DerivedParams& params() const noexcept { return params_; }

    /// Frames whose start time lies inside [0, duration).
    [[nodiscard]] std::size_t frame_count() const noexcept
    {
        return static_cast<std::size_t>(std::floor(scene_.duration_s * config_.frame_rate_hz + 1e-9));
    }

    [[nodiscard]] double frame_time(std::size_t index) const noexcept
    {
        return static_cast<double>(index) / config_.frame_rate_hz;
    }

    [[nodiscard]] static std::int64_t frame_timestamp_us(std::size_t index, double frame_rate_hz) noexcept
    {
        return std::llround(static_cast<double>(index) * 1e6 / frame_rate_hz);
    }

    [[nodiscard]] RawFrame frame(std::size_t index) const
    {
        const double t0 = frame_time(index);
        if (t0 > scene_.duration_s * (1.0 + 1e-12))
            throw Error(ErrorCode::scene_exhausted, "frame " + std::to_string(index) + " beyond scene duration");

        const std::size_t n_c = config_.n_chirps;
        const std::size_t n_s = config_.n_samples;
        const std::vector<double> amps = occlude(scene_, config_, t0);

        std::vector<double> chirps(n_c * n_s);
        std::vector<double> acc(n_s);
        for (std::size_t c = 0; c < n_c; ++c) {
            acc = static_chirp_;
            const double tc = t0 + static_cast<double>(c) * config_.chirp_repetition_s;
            for (std::size_t k = 0; k < scene_.targets.size(); ++k) {
                if (amps[k] == 0.0) continue;
                add_reflector(acc, amps[k], scene_.targets[k].range(tc));
            }
            std::copy(acc.begin(), acc.end(), chirps.begin() + static_cast<std::ptrdiff_t>(c * n_s));
        }

        RawFrame out = RawFrame::zeros_like(config_, frame_timestamp_us(index, config_.frame_rate_hz));
        for (std::size_t a = 0; a < config_.n_antennas; ++a) {
            auto dst = out.antenna(a);
            if (scene_.noise_std > 0.0) {
                std::mt19937_64 rng(detail::stream_seed(scene_.seed, index, a));
                boost::random::normal_distribution<double> noise(0.0, scene_.noise_std);
                for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = clamp(chirps[i] + noise(rng), out);
            } else {
                for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = clamp(chirps[i], out);
            }
        }
        return out;
    }

private:
    void add_reflector(std::vector<double>& acc, double amplitude, double range_m) const
    {
        using std::numbers::pi;
        const double f_if = if_frequency(range_m, config_.slope_hz_per_s);
        // The constant term belongs to the chirp's start frequency; together
        // with the IF ramp the phase at mid-chirp is 4*pi*d/lambda_center.
        const double phase0 = 4.0 * pi * range_m * config_.f_start_hz / speed_of_light;
        detail::accumulate_tone(acc, amplitude, phase0, 2.0 * pi * f_if * dt_);
    }

    static float clamp(double v, RawFrame& frame) noexcept
    {
        if (v > 1.0 || v < -1.0) {
            ++frame.clamped_samples;
            v = v > 0.0 ? 1.0 : -1.0;
        }
        return static_cast<float>(v);
    }

    Scene scene_;
    RadarConfig config_;
    DerivedParams params_;
    double dt_ = 0.0;
    std::vector<double> static_chirp_;
};

inline RawFrame synthesize_frame(const Scene& scene, const RadarConfig& config, std::size_t frame_index)
{
    return FrameSynthesizer(scene, config).frame(frame_index);
}

/// Rounds every sample to the nearest 12-bit signed ADC code.
inline RawFrame quantize_12bit(RawFrame frame)
{
    for (float& v : frame.samples) v = static_cast<float>(std::round(static_cast<double>(v) * 2047.0) / 2047.0);
    return frame;
}

} // namespace cagesense
