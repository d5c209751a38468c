#pragma once

// Ground-truth world model for the simulator: targets with piecewise-linear
// range trajectories plus periodic micro-motion, static clutter and noise.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cagesense/config_io.hpp"
#include "cagesense/error.hpp"
#include "cagesense/radar_model.hpp"

namespace cagesense {

enum class MotionKind { breathing, cardiac, fixed_tone };
enum class Waveform { sinusoid, rectified_sinusoid, pulse_train };

inline constexpr double pulse_duty_cycle = 0.35;

struct MicroMotion {
    MotionKind kind = MotionKind::breathing;
    double rate_bpm = 180.0;
    double amplitude_m = 0.3e-3; // peak
    Waveform waveform = Waveform::sinusoid;
    double phase_offset_rad = 0.0;

    [[nodiscard]] double frequency_hz() const noexcept { return rate_bpm / 60.0; }

    /// Displacement (m) along the radar line of sight at time t.
    [[nodiscard]] double displacement(double t) const noexcept
    {
        using std::numbers::pi;
        const double f = frequency_hz();
        switch (waveform) {
        case Waveform::sinusoid:
            return amplitude_m * std::sin(2.0 * pi * f * t + phase_offset_rad);
        case Waveform::rectified_sinusoid:
            // One hump per period.
            return amplitude_m * std::abs(std::sin(pi * f * t + 0.5 * phase_offset_rad));
        case Waveform::pulse_train: {
            double u = f * t + phase_offset_rad / (2.0 * pi);
            u -= std::floor(u);
            if (u >= pulse_duty_cycle) return 0.0;
            return amplitude_m * 0.5 * (1.0 - std::cos(2.0 * pi * u / pulse_duty_cycle));
        }
        }
        return 0.0;
    }

    [[nodiscard]] static MicroMotion breathing(double rate_bpm = 180.0, double amplitude_m = 0.3e-3)
    {
        return {MotionKind::breathing, rate_bpm, amplitude_m, Waveform::sinusoid, 0.0};
    }
    [[nodiscard]] static MicroMotion cardiac(double rate_bpm = 600.0, double amplitude_m = 20e-6)
    {
        return {MotionKind::cardiac, rate_bpm, amplitude_m, Waveform::pulse_train, 0.0};
    }
    [[nodiscard]] static MicroMotion fixed_tone(double rate_bpm, double amplitude_m)
    {
        return {MotionKind::fixed_tone, rate_bpm, amplitude_m, Waveform::sinusoid, 0.0};
    }
};

struct Waypoint {
    double t_s = 0.0;
    double range_m = 0.0;
};

struct Target {
    std::string label = "target";
    std::vector<Waypoint> waypoints;
    double rcs_amplitude = 0.5;
    std::vector<MicroMotion> micro_motions;

    /// Macro range, piecewise linear between waypoints and held beyond the ends.
    [[nodiscard]] double trajectory_range(double t) const noexcept
    {
        if (waypoints.empty()) return 0.0;
        if (t <= waypoints.front().t_s) return waypoints.front().range_m;
        if (t >= waypoints.back().t_s) return waypoints.back().range_m;
        auto it = std::upper_bound(waypoints.begin(), waypoints.end(), t,
                                   [](double v, const Waypoint& w) { return v < w.t_s; });
        const auto& b = *it;
        const auto& a = *(it - 1);
        const double u = (t - a.t_s) / (b.t_s - a.t_s);
        return a.range_m + u * (b.range_m - a.range_m);
    }

    /// Macro radial velocity (positive = receding).
    [[nodiscard]] double trajectory_velocity(double t) const noexcept
    {
        if (waypoints.size() < 2 || t < waypoints.front().t_s || t >= waypoints.back().t_s) return 0.0;
        auto it = std::upper_bound(waypoints.begin(), waypoints.end(), t,
                                   [](double v, const Waypoint& w) { return v < w.t_s; });
        const auto& b = *it;
        const auto& a = *(it - 1);
        return (b.range_m - a.range_m) / (b.t_s - a.t_s);
    }

    [[nodiscard]] double micro_displacement(double t) const noexcept
    {
        double d = 0.0;
        for (const auto& m : micro_motions) d += m.displacement(t);
        return d;
    }

    [[nodiscard]] double range(double t) const noexcept { return trajectory_range(t) + micro_displacement(t); }

    [[nodiscard]] double micro_amplitude_bound() const noexcept
    {
        double s = 0.0;
        for (const auto& m : micro_motions) s += m.amplitude_m;
        return s;
    }

    /// Stationary target held at one range.
    [[nodiscard]] static Target stationary(double range_m, double rcs, std::vector<MicroMotion> motions = {},
                                           std::string label = "target")
    {
        Target t;
        t.label = std::move(label);
        t.waypoints = {{0.0, range_m}};
        t.rcs_amplitude = rcs;
        t.micro_motions = std::move(motions);
        return t;
    }
};

struct ClutterReflector {
    double range_m = 0.0;
    double amplitude = 0.0; // received amplitude, full-scale units
    std::string label;
};

struct Scene {
    std::string name = "scene";
    std::vector<Target> targets;
    std::vector<ClutterReflector> clutter;
    double noise_std = 0.0;
    double occlusion_factor = 1.0;
    double duration_s = 1.0;
    std::uint64_t seed = 0;
    // Target amplitude = rcs * (reference_range / r)^2.
    double reference_range_m = 0.05;
    double velocity_cap_mps = 3.5;

    [[nodiscard]] double target_amplitude(const Target& target, double range_m) const noexcept
    {
        const double ratio = reference_range_m / range_m;
        return target.rcs_amplitude * ratio * ratio;
    }
};

/// Checks the scene's own invariants (independent of any radar config).
inline void validate(const Scene& s)
{
    auto fail = [&](const std::string& what) { throw Error(ErrorCode::invalid_scene, s.name + ": " + what); };
    if (!(s.duration_s > 0.0)) fail("duration must be positive");
    if (!(s.noise_std >= 0.0)) fail("noise_std must be >= 0");
    if (!(s.occlusion_factor >= 0.0 && s.occlusion_factor <= 1.0)) fail("occlusion_factor must lie in [0,1]");
    if (!(s.reference_range_m > 0.0)) fail("reference_range must be positive");
    if (!(s.velocity_cap_mps > 0.0)) fail("velocity cap must be positive");
    for (const auto& c : s.clutter) {
        if (!(c.range_m > 0.0)) fail("clutter range must be positive");
        if (!(c.amplitude >= 0.0)) fail("clutter amplitude must be >= 0");
    }
    for (const auto& t : s.targets) {
        if (t.waypoints.empty()) fail(t.label + ": trajectory has no waypoints");
        if (!(t.rcs_amplitude > 0.0 && t.rcs_amplitude <= 1.0)) fail(t.label + ": rcs_amplitude must lie in (0,1]");
        for (std::size_t i = 0; i < t.waypoints.size(); ++i) {
            if (!(t.waypoints[i].range_m > 0.0)) fail(t.label + ": trajectory range must be positive");
            if (i == 0) continue;
            const double dt = t.waypoints[i].t_s - t.waypoints[i - 1].t_s;
            if (!(dt > 0.0)) fail(t.label + ": waypoint times must increase");
            const double v = std::abs(t.waypoints[i].range_m - t.waypoints[i - 1].range_m) / dt;
            if (v > s.velocity_cap_mps * (1.0 + 1e-9)) fail(t.label + ": trajectory exceeds velocity cap");
        }
        for (const auto& m : t.micro_motions) {
            if (!(m.rate_bpm > 0.0)) fail(t.label + ": micro-motion rate must be positive");
            if (!(m.amplitude_m >= 0.0)) fail(t.label + ": micro-motion amplitude must be >= 0");
        }
    }
}

/// Every reflector must stay inside (0, d_max) of the acquisition config.
inline void check_scene_fits(const Scene& s, const DerivedParams& p)
{
    auto fail = [&](const std::string& what) { throw Error(ErrorCode::config_mismatch, s.name + ": " + what); };
    for (const auto& c : s.clutter)
        if (c.range_m >= p.d_max_m) fail("clutter beyond d_max");
    for (const auto& t : s.targets) {
        const double slack = t.micro_amplitude_bound();
        for (const auto& w : t.waypoints) {
            if (w.range_m + slack >= p.d_max_m) fail(t.label + ": trajectory beyond d_max");
            if (w.range_m - slack <= 0.0) fail(t.label + ": trajectory reaches zero range");
        }
    }
}

// ---- JSON -----------------------------------------------------------------

inline std::string to_string(MotionKind k)
{
    switch (k) {
    case MotionKind::breathing: return "breathing";
    case MotionKind::cardiac: return "cardiac";
    case MotionKind::fixed_tone: return "fixed_tone";
    }
    return "breathing";
}

inline std::string to_string(Waveform w)
{
    switch (w) {
    case Waveform::sinusoid: return "sinusoid";
    case Waveform::rectified_sinusoid: return "rectified_sinusoid";
    case Waveform::pulse_train: return "pulse_train";
    }
    return "sinusoid";
}

inline MotionKind motion_kind_from_string(const std::string& s)
{
    if (s == "breathing") return MotionKind::breathing;
    if (s == "cardiac") return MotionKind::cardiac;
    if (s == "fixed_tone") return MotionKind::fixed_tone;
    throw Error(ErrorCode::invalid_scene, "unknown micro-motion kind '" + s + "'");
}

inline Waveform waveform_from_string(const std::string& s)
{
    if (s == "sinusoid") return Waveform::sinusoid;
    if (s == "rectified_sinusoid") return Waveform::rectified_sinusoid;
    if (s == "pulse_train") return Waveform::pulse_train;
    throw Error(ErrorCode::invalid_scene, "unknown waveform '" + s + "'");
}

inline nlohmann::ordered_json scene_to_json(const Scene& s)
{
    nlohmann::ordered_json j;
    j["name"] = s.name;
    j["duration_s"] = s.duration_s;
    j["seed"] = s.seed;
    j["noise_std"] = s.noise_std;
    j["occlusion_factor"] = s.occlusion_factor;
    j["reference_range_m"] = s.reference_range_m;
    j["velocity_cap_mps"] = s.velocity_cap_mps;
    j["clutter"] = nlohmann::ordered_json::array();
    for (const auto& c : s.clutter)
        j["clutter"].push_back({{"label", c.label}, {"range_m", c.range_m}, {"amplitude", c.amplitude}});
    j["targets"] = nlohmann::ordered_json::array();
    for (const auto& t : s.targets) {
        nlohmann::ordered_json jt;
        jt["label"] = t.label;
        jt["rcs_amplitude"] = t.rcs_amplitude;
        jt["waypoints"] = nlohmann::ordered_json::array();
        for (const auto& w : t.waypoints) jt["waypoints"].push_back({{"t_s", w.t_s}, {"range_m", w.range_m}});
        jt["micro_motions"] = nlohmann::ordered_json::array();
        for (const auto& m : t.micro_motions) {
            jt["micro_motions"].push_back({{"kind", to_string(m.kind)},
                                           {"rate_bpm", m.rate_bpm},
                                           {"amplitude_um", m.amplitude_m * 1e6},
                                           {"waveform", to_string(m.waveform)},
                                           {"phase_offset_rad", m.phase_offset_rad}});
        }
        j["targets"].push_back(jt);
    }
    return j;
}

inline Scene scene_from_json(const nlohmann::json& j)
{
    Scene s;
    try {
        s.name = j.value("name", std::string("scene"));
        s.duration_s = j.at("duration_s").get<double>();
        s.seed = j.value("seed", std::uint64_t{0});
        s.noise_std = j.value("noise_std", 0.0);
        s.occlusion_factor = j.value("occlusion_factor", 1.0);
        s.reference_range_m = j.value("reference_range_m", 0.05);
        s.velocity_cap_mps = j.value("velocity_cap_mps", 3.5);
        for (const auto& jc : j.value("clutter", nlohmann::json::array())) {
            s.clutter.push_back({jc.at("range_m").get<double>(), jc.at("amplitude").get<double>(),
                                 jc.value("label", std::string{})});
        }
        for (const auto& jt : j.value("targets", nlohmann::json::array())) {
            Target t;
            t.label = jt.value("label", std::string("target"));
            t.rcs_amplitude = jt.at("rcs_amplitude").get<double>();
            for (const auto& jw : jt.at("waypoints"))
                t.waypoints.push_back({jw.at("t_s").get<double>(), jw.at("range_m").get<double>()});
            for (const auto& jm : jt.value("micro_motions", nlohmann::json::array())) {
                MicroMotion m;
                m.kind = motion_kind_from_string(jm.at("kind").get<std::string>());
                m.rate_bpm = jm.at("rate_bpm").get<double>();
                m.amplitude_m = jm.at("amplitude_um").get<double>() * 1e-6;
                m.waveform = waveform_from_string(jm.value("waveform", std::string("sinusoid")));
                m.phase_offset_rad = jm.value("phase_offset_rad", 0.0);
                t.micro_motions.push_back(m);
            }
            s.targets.push_back(std::move(t));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::invalid_scene, e.what());
    }
    validate(s);
    return s;
}

inline Scene load_scene(const std::filesystem::path& path) { return scene_from_json(read_json_file(path)); }

inline void save_scene(const Scene& s, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::malformed_file, "cannot write " + path.string());
    out << scene_to_json(s).dump(2) << '\n';
}

} // namespace cagesense
