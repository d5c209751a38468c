#pragma once

// FMCW acquisition parameters and the closed-form relations between them.
// Every other module reads resolutions and limits from DerivedParams so the
// equations live in exactly one place.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>

#include "cagesense/error.hpp"

namespace cagesense {

inline constexpr double speed_of_light = 299'792'458.0; // m/s

struct RadarConfig {
    double f_start_hz = 0.0;
    double f_end_hz = 0.0;
    double frame_rate_hz = 0.0;
    double adc_rate_hz = 0.0;
    std::size_t n_antennas = 0;
    std::size_t n_chirps = 0;
    std::size_t n_samples = 0;
    double slope_hz_per_s = 0.0;
    double chirp_repetition_s = 0.0;
    // Unset means "whatever is left of the frame period".
    std::optional<double> frame_idle_s;

    [[nodiscard]] double bandwidth_hz() const noexcept { return f_end_hz - f_start_hz; }
    [[nodiscard]] double center_frequency_hz() const noexcept { return 0.5 * (f_start_hz + f_end_hz); }
    [[nodiscard]] double chirp_time_s() const noexcept { return bandwidth_hz() / slope_hz_per_s; }
    [[nodiscard]] double frame_idle_or_slack_s() const noexcept
    {
        return frame_idle_s ? *frame_idle_s
                            : 1.0 / frame_rate_hz - static_cast<double>(n_chirps) * chirp_repetition_s;
    }
    [[nodiscard]] double frame_time_s() const noexcept
    {
        return static_cast<double>(n_chirps) * chirp_repetition_s + frame_idle_or_slack_s();
    }
    /// Fast-time sample interval: the N_s samples span the active chirp.
    [[nodiscard]] double fast_time_step_s() const noexcept
    {
        return chirp_time_s() / static_cast<double>(n_samples);
    }

    friend bool operator==(const RadarConfig&, const RadarConfig&) = default;
};

struct DerivedParams {
    double wavelength_m = 0.0;
    double d_res_m = 0.0;
    double d_max_m = 0.0;
    double v_max_mps = 0.0;
    double v_res_mps = 0.0;
    double slow_time_rate_hz = 0.0;
    double chirp_time_s = 0.0;
    double frame_time_s = 0.0;
    double fast_time_rate_hz = 0.0;
};

/// Throws Error(invalid_config) naming the first violated field.
inline void validate(const RadarConfig& c)
{
    auto fail = [](const std::string& what) { throw Error(ErrorCode::invalid_config, what); };
    auto finite_pos = [](double v) { return std::isfinite(v) && v > 0.0; };

    if (!finite_pos(c.f_start_hz)) fail("f_start must be positive");
    if (!std::isfinite(c.f_end_hz) || c.f_end_hz <= c.f_start_hz) fail("f_end must exceed f_start");
    if (!finite_pos(c.frame_rate_hz)) fail("frame_rate must be positive");
    if (!finite_pos(c.adc_rate_hz)) fail("adc_rate must be positive");
    if (c.n_antennas < 1) fail("n_antennas must be >= 1");
    if (c.n_chirps < 1) fail("n_chirps must be >= 1");
    if (c.n_samples < 2) fail("n_samples must be >= 2");
    if (!finite_pos(c.slope_hz_per_s)) fail("chirp_slope must be positive");
    if (!finite_pos(c.chirp_repetition_s)) fail("chirp_repetition must be positive");
    if (c.chirp_repetition_s < c.chirp_time_s()) fail("chirp_repetition shorter than active chirp time B/S");
    if (c.frame_idle_s && (!std::isfinite(*c.frame_idle_s) || *c.frame_idle_s < 0.0)) fail("frame_idle must be >= 0");
    // Relative slack absorbs rounding of 1/frame_rate.
    const double period = 1.0 / c.frame_rate_hz;
    if (c.frame_time_s() > period * (1.0 + 1e-12) || c.frame_idle_or_slack_s() < -period * 1e-12)
        fail("frame_time exceeds 1/frame_rate");
}

inline DerivedParams derive_params(const RadarConfig& config)
{
    validate(config);
    const double bandwidth = config.bandwidth_hz();
    const double wavelength = speed_of_light / config.center_frequency_hz();
    const double t_cr = config.chirp_repetition_s;

    DerivedParams p;
    p.wavelength_m = wavelength;
    p.d_res_m = speed_of_light / (2.0 * bandwidth);
    p.d_max_m = config.adc_rate_hz * speed_of_light / (2.0 * config.slope_hz_per_s);
    p.v_max_mps = wavelength / (4.0 * t_cr);
    p.v_res_mps = wavelength / (2.0 * static_cast<double>(config.n_chirps) * t_cr);
    p.slow_time_rate_hz = config.frame_rate_hz;
    p.chirp_time_s = config.chirp_time_s();
    p.frame_time_s = config.frame_time_s();
    p.fast_time_rate_hz = 1.0 / config.fast_time_step_s();
    return p;
}

inline double phase_to_displacement(double delta_phi_rad, double wavelength_m) noexcept
{
    return wavelength_m * delta_phi_rad / (4.0 * std::numbers::pi);
}

inline double displacement_to_phase(double displacement_m, double wavelength_m) noexcept
{
    return 4.0 * std::numbers::pi * displacement_m / wavelength_m;
}

inline double if_frequency(double distance_m, double slope_hz_per_s) noexcept
{
    return slope_hz_per_s * 2.0 * distance_m / speed_of_light;
}

/// Radar-to-radome spacing at `multiple` half wavelengths.
inline double radome_spacing(double wavelength_m, int multiple)
{
    if (multiple < 1) throw Error(ErrorCode::invalid_argument, "radome spacing multiple must be >= 1");
    return multiple * wavelength_m / 2.0;
}

namespace presets {

/// Coarse movement / ranging acquisition (40 Hz, 128 chirps).
inline RadarConfig movement()
{
    RadarConfig c;
    c.f_start_hz = 58e9;
    c.f_end_hz = 63e9;
    c.frame_rate_hz = 40.0;
    c.adc_rate_hz = 2e6;
    c.n_antennas = 3;
    c.n_chirps = 128;
    c.n_samples = 256;
    c.slope_hz_per_s = 78.9e12; // gives d_max = 3.8 m at 2 MHz
    c.chirp_repetition_s = 185e-6;
    return c;
}

/// Fine micro-motion acquisition (400 Hz, 16-chirp burst of 1.2 ms).
inline RadarConfig vital_sign()
{
    RadarConfig c;
    c.f_start_hz = 58e9;
    c.f_end_hz = 63e9;
    c.frame_rate_hz = 400.0;
    c.adc_rate_hz = 2e6;
    c.n_antennas = 3;
    c.n_chirps = 16;
    c.n_samples = 128;
    c.slope_hz_per_s = 157.9e12; // gives d_max = 1.9 m at 2 MHz
    c.chirp_repetition_s = 75e-6; // 1.2 ms burst / 16 chirps
    return c;
}

inline std::optional<RadarConfig> by_name(const std::string& name)
{
    if (name == "movement") return movement();
    if (name == "vital-sign") return vital_sign();
    return std::nullopt;
}

} // namespace presets

} // namespace cagesense
