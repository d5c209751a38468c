#pragma once

// Scripted validation scenes. Each scenario carries its radar preset and the
// ground truth the harness scores against. Clutter levels mimic the three
// cage-complexity setups: bare cage walls, walls plus cage furniture, and the
// full rack with metal bars behind the cage.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cagesense/error.hpp"
#include "cagesense/scene.hpp"
#include "cagesense/tracking.hpp"

namespace cagesense {

enum class ClutterLevel { empty, internal, full };

inline std::string to_string(ClutterLevel l)
{
    switch (l) {
    case ClutterLevel::empty: return "empty";
    case ClutterLevel::internal: return "internal";
    case ClutterLevel::full: return "full";
    }
    return "?";
}

inline ClutterLevel clutter_level_from_string(const std::string& s)
{
    if (s == "empty") return ClutterLevel::empty;
    if (s == "internal") return ClutterLevel::internal;
    if (s == "full") return ClutterLevel::full;
    throw Error(ErrorCode::invalid_argument, "unknown clutter level '" + s + "'");
}

inline constexpr std::array<ClutterLevel, 3> all_clutter_levels{ClutterLevel::empty, ClutterLevel::internal,
                                                                 ClutterLevel::full};

inline std::vector<ClutterReflector> cage_clutter(ClutterLevel level)
{
    std::vector<ClutterReflector> c{{0.035, 0.12, "front wall"}, {0.40, 0.04, "back wall"}};
    if (level == ClutterLevel::empty) return c;
    c.push_back({0.08, 0.015, "bedding"});
    c.push_back({0.13, 0.03, "house"});
    c.push_back({0.30, 0.05, "food hopper"});
    c.push_back({0.34, 0.04, "water bottle"});
    if (level == ClutterLevel::internal) return c;
    c.push_back({0.45, 0.10, "rack bar"});
    c.push_back({0.50, 0.06, "rack bar"});
    c.push_back({0.62, 0.05, "rack bar"});
    return c;
}

inline constexpr double default_noise_std = 1e-3;
inline constexpr double mouse_rcs = 0.6;

// Appends a cosine-eased move from r0 to r1 over [t0, t1] (t0 itself excluded).
inline void eased_leg(std::vector<Waypoint>& w, double t0, double t1, double r0, double r1, int steps = 40)
{
    for (int i = 1; i <= steps; ++i) {
        const double u = static_cast<double>(i) / steps;
        w.push_back({t0 + u * (t1 - t0), r0 + (r1 - r0) * 0.5 * (1.0 - std::cos(std::numbers::pi * u))});
    }
}

inline void hold(std::vector<Waypoint>& w, double t, double r) { w.push_back({t, r}); }

struct ActivitySegment {
    double t0_s = 0.0;
    double t1_s = 0.0;
    Activity label = Activity::quasi_static;
};

struct Scenario {
    std::string name;
    std::string preset; // "movement" or "vital-sign"
    ClutterLevel clutter = ClutterLevel::internal;
    Scene scene;
    std::optional<double> rr_truth_bpm;
    std::optional<double> hr_truth_bpm;
    std::optional<double> tone_truth_bpm; // vibration source
    std::vector<ActivitySegment> activity_script;
    std::optional<Scene> calibration; // quasi-static reference for activity thresholds
    ZoneConfig zones{};
    std::string description;

    [[nodiscard]] std::optional<Activity> activity_at(double t) const
    {
        for (const auto& s : activity_script)
            if (t >= s.t0_s && t < s.t1_s) return s.label;
        return std::nullopt;
    }
};

// ---- building blocks ----------------------------------------------------------

inline Scene base_scene(std::string name, ClutterLevel level, double duration_s, std::uint64_t seed)
{
    Scene s;
    s.name = std::move(name);
    s.clutter = cage_clutter(level);
    s.noise_std = default_noise_std;
    s.duration_s = duration_s;
    s.seed = seed;
    return s;
}

/// Stationary breathing mouse for the vital-sign preset.
inline Scene breathing_scene(double rate_bpm, double amplitude_m = 0.3e-3, double duration_s = 70.0,
                             ClutterLevel level = ClutterLevel::internal, std::uint64_t seed = 1, double range_m = 0.18)
{
    Scene s = base_scene("breathing-" + std::to_string(static_cast<int>(std::lround(rate_bpm))), level, duration_s, seed);
    s.targets.push_back(Target::stationary(range_m, mouse_rcs, {MicroMotion::breathing(rate_bpm, amplitude_m)}, "mouse"));
    return s;
}

/// Wandering mouse: rests of 2-8 s alternate with eased moves across the cage.
/// The route comes from a fixed generator so it does not depend on the noise seed.
inline std::vector<Waypoint> wandering_route(double duration_s, std::uint32_t route_seed = 7)
{
    std::mt19937 g(route_seed);
    std::uniform_real_distribution<double> rest(2.0, 8.0), pos(0.07, 0.35), speed(0.08, 0.25);
    std::vector<Waypoint> w{{0.0, 0.20}};
    double t = 0.0, r = 0.20;
    while (t < duration_s) {
        t += rest(g);
        hold(w, t, r);
        double next = pos(g);
        while (std::abs(next - r) < 0.06) next = pos(g);
        // Peak speed of an eased leg is pi/2 times its mean speed.
        const double dt = std::abs(next - r) / speed(g) * (std::numbers::pi / 2.0);
        eased_leg(w, t, t + dt, r, next);
        t += dt;
        r = next;
    }
    return w;
}

/// Smooth sinusoidal back-and-forth, sampled densely into waypoints.
inline std::vector<Waypoint> oscillating_route(double duration_s, double center_m, double amplitude_m, double period_s,
                                               double phase_rad = 0.0, double step_s = 0.05)
{
    std::vector<Waypoint> w;
    for (double t = 0.0; t <= duration_s + step_s; t += step_s)
        w.push_back({t, center_m + amplitude_m * std::sin(2.0 * std::numbers::pi * t / period_s + phase_rad)});
    return w;
}

// ---- catalog ----------------------------------------------------------------

inline Scenario puppet_move(ClutterLevel level = ClutterLevel::internal, std::uint64_t seed = 1)
{
    Scenario sc;
    sc.name = "puppet-move";
    sc.preset = "movement";
    sc.clutter = level;
    sc.description = "puppet moved near-far-near twice (5-10 s, 20-25 s), stationary otherwise";
    sc.scene = base_scene(sc.name, level, 30.0, seed);
    Target p;
    p.label = "puppet";
    p.rcs_amplitude = mouse_rcs;
    const double near = 0.06, far = 0.36;
    hold(p.waypoints, 0.0, near);
    hold(p.waypoints, 5.0, near);
    eased_leg(p.waypoints, 5.0, 7.5, near, far);
    eased_leg(p.waypoints, 7.5, 10.0, far, near);
    hold(p.waypoints, 20.0, near);
    eased_leg(p.waypoints, 20.0, 22.5, near, far);
    eased_leg(p.waypoints, 22.5, 25.0, far, near);
    hold(p.waypoints, 30.0, near);
    sc.scene.targets.push_back(std::move(p));
    return sc;
}

inline Scenario vibration_200bpm(ClutterLevel level = ClutterLevel::internal, std::uint64_t seed = 1)
{
    Scenario sc;
    sc.name = "vibration-200bpm";
    sc.preset = "vital-sign";
    sc.clutter = level;
    sc.description = "stationary reflector driven at 200 bpm, 0.3 mm";
    sc.scene = base_scene(sc.name, level, 20.0, seed);
    sc.scene.targets.push_back(Target::stationary(0.20, mouse_rcs, {MicroMotion::fixed_tone(200.0, 0.3e-3)}, "diapason"));
    sc.tone_truth_bpm = 200.0;
    sc.rr_truth_bpm = 200.0;
    return sc;
}

inline Scenario single_mouse(ClutterLevel level = ClutterLevel::internal, std::uint64_t seed = 1, double duration_s = 180.0)
{
    Scenario sc;
    sc.name = "single-mouse";
    sc.preset = "movement";
    sc.clutter = level;
    sc.description = "one breathing mouse wandering between rests";
    sc.scene = base_scene(sc.name, level, duration_s, seed);
    Target m;
    m.label = "mouse";
    m.rcs_amplitude = mouse_rcs;
    m.waypoints = wandering_route(duration_s);
    m.micro_motions = {MicroMotion::breathing(180.0, 0.3e-3)};
    sc.scene.targets.push_back(std::move(m));
    sc.rr_truth_bpm = 180.0;
    return sc;
}

inline Scenario two_mice(ClutterLevel level = ClutterLevel::internal, std::uint64_t seed = 1, double duration_s = 180.0)
{
    Scenario sc;
    sc.name = "two-mice";
    sc.preset = "movement";
    sc.clutter = level;
    sc.description = "two breathing mice pacing in separate halves of the cage";
    sc.scene = base_scene(sc.name, level, duration_s, seed);
    sc.scene.occlusion_factor = 0.3;
    Target a;
    a.label = "mouse-a";
    a.rcs_amplitude = mouse_rcs;
    a.waypoints = oscillating_route(duration_s, 0.125, 0.045, 2.5);
    a.micro_motions = {MicroMotion::breathing(180.0, 0.3e-3)};
    Target b;
    b.label = "mouse-b";
    b.rcs_amplitude = mouse_rcs;
    b.waypoints = oscillating_route(duration_s, 0.28, 0.055, 3.3, 1.0);
    b.micro_motions = {MicroMotion::breathing(220.0, 0.3e-3)};
    sc.scene.targets.push_back(std::move(a));
    sc.scene.targets.push_back(std::move(b));
    return sc;
}

/// Dynamic movement 0-5 s, quasi-static 5-8 s, in-place (static) movement 8-15 s.
/// Locomotion happens close to the radar, rest and grooming at the far end
/// ("home"): movement power follows the 1/r^2 amplitude law, so this mirrors
/// the proximity effect seen with real animals.
inline Scenario activity_levels(ClutterLevel level = ClutterLevel::internal, std::uint64_t seed = 1)
{
    Scenario sc;
    sc.name = "activity-levels";
    sc.preset = "movement";
    sc.clutter = level;
    sc.description = "locomotion, then rest, then in-place grooming motion";
    sc.scene = base_scene(sc.name, level, 15.0, seed);
    const double home = 0.22;
    Target m;
    m.label = "mouse";
    m.rcs_amplitude = mouse_rcs;
    // Constant-speed legs so the animal never pauses while "dynamic".
    m.waypoints = {{0.0, home}, {0.35, 0.12}};
    double t = 0.35;
    bool inward = true;
    while (t + 0.5 <= 4.6 + 1e-9) {
        t += 0.5;
        m.waypoints.push_back({t, inward ? 0.065 : 0.13});
        inward = !inward;
    }
    m.waypoints.push_back({5.0, home});
    hold(m.waypoints, 8.0, home);
    // Grooming: sub-millimetre body jitter on top of breathing.
    for (double u = 0.01; 8.0 + u <= 15.0 + 1e-9; u += 0.01) {
        const double j = 0.5e-3 * std::sin(2.0 * std::numbers::pi * 4.0 * u) + 0.2e-3 * std::sin(2.0 * std::numbers::pi * 1.0 * u);
        m.waypoints.push_back({8.0 + u, home + j});
    }
    m.micro_motions = {MicroMotion::breathing(180.0, 0.1e-3)};
    sc.scene.targets.push_back(std::move(m));
    sc.activity_script = {{0.0, 5.0, Activity::dynamic},
                          {5.0, 8.0, Activity::quasi_static},
                          {8.0, 15.0, Activity::static_movement}};

    Scene cal = base_scene("activity-calibration", level, 6.0, seed + 1000);
    cal.targets.push_back(Target::stationary(home, mouse_rcs, {MicroMotion::breathing(180.0, 0.1e-3)}, "mouse"));
    sc.calibration = std::move(cal);
    return sc;
}

inline Scenario sleeping_mouse(ClutterLevel level = ClutterLevel::internal, std::uint64_t seed = 1)
{
    Scenario sc;
    sc.name = "sleeping-mouse";
    sc.preset = "vital-sign";
    sc.clutter = level;
    sc.description = "resting mouse: breathing 180 bpm / 0.3 mm plus heartbeat 600 bpm / 10 um";
    sc.scene = base_scene(sc.name, level, 70.0, seed);
    sc.scene.targets.push_back(Target::stationary(
        0.18, mouse_rcs, {MicroMotion::breathing(180.0, 0.3e-3), MicroMotion::cardiac(600.0, 10e-6)}, "mouse"));
    sc.rr_truth_bpm = 180.0;
    sc.hr_truth_bpm = 600.0;
    return sc;
}

inline Scenario empty_cage(ClutterLevel level = ClutterLevel::internal, std::uint64_t seed = 1)
{
    Scenario sc;
    sc.name = "empty-cage";
    sc.preset = "movement";
    sc.clutter = level;
    sc.description = "cage without animals";
    sc.scene = base_scene(sc.name, level, 10.0, seed);
    return sc;
}

/// Two-hour resting recording for long-run continuity checks.
inline Scenario soak(ClutterLevel level = ClutterLevel::internal, std::uint64_t seed = 1)
{
    Scenario sc = sleeping_mouse(level, seed);
    sc.name = "soak-2h";
    sc.description = "two-hour resting recording (estimate continuity only)";
    sc.scene.name = sc.name;
    sc.scene.duration_s = 7200.0;
    return sc;
}

inline std::vector<std::string> scenario_names()
{
    return {"puppet-move", "vibration-200bpm", "single-mouse", "two-mice",
            "activity-levels", "sleeping-mouse", "empty-cage", "soak-2h"};
}

inline Scenario make_scenario(const std::string& name, ClutterLevel level = ClutterLevel::internal, std::uint64_t seed = 1)
{
    if (name == "puppet-move") return puppet_move(level, seed);
    if (name == "vibration-200bpm") return vibration_200bpm(level, seed);
    if (name == "single-mouse") return single_mouse(level, seed);
    if (name == "two-mice") return two_mice(level, seed);
    if (name == "activity-levels") return activity_levels(level, seed);
    if (name == "sleeping-mouse") return sleeping_mouse(level, seed);
    if (name == "empty-cage") return empty_cage(level, seed);
    if (name == "soak-2h") return soak(level, seed);
    throw Error(ErrorCode::unknown_scenario, "unknown scenario '" + name + "'");
}

/// The validation catalog at one clutter level.
inline std::vector<Scenario> scripted_scenarios(ClutterLevel level = ClutterLevel::internal, std::uint64_t seed = 1)
{
    return {puppet_move(level, seed), vibration_200bpm(level, seed), single_mouse(level, seed), two_mice(level, seed)};
}

} // namespace cagesense
