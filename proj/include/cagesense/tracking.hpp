#pragma once

// Range, zone, activity and multi-target peaks from range-Doppler products.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cagesense/dsp.hpp"
#include "cagesense/error.hpp"
#include "cagesense/filters.hpp"

namespace cagesense {

// ---- range ------------------------------------------------------------------

/// Range of the strongest bin at or beyond valid_from_bin, refined by a
/// three-point parabola. Empty when the profile carries no power (no target).
inline std::optional<double> estimate_range(std::span<const double> profile, double bin_spacing_m,
                                            std::size_t valid_from_bin = 0)
{
    std::size_t best = profile.size();
    double best_v = 0.0;
    for (std::size_t i = valid_from_bin; i < profile.size(); ++i) {
        if (profile[i] > best_v) {
            best_v = profile[i];
            best = i;
        }
    }
    if (best == profile.size()) return std::nullopt;
    double offset = 0.0;
    if (best > valid_from_bin && best + 1 < profile.size())
        offset = parabolic_offset(profile[best - 1], profile[best], profile[best + 1]);
    return (static_cast<double>(best) + offset) * bin_spacing_m;
}

inline std::optional<double> estimate_range(const RangeDopplerMap& map)
{
    return estimate_range(range_power_profile(map), map.range_spacing_m, map.valid_from_bin);
}

// ---- zones ------------------------------------------------------------------

enum class Zone { near, middle, far };

inline std::string_view to_string(Zone z)
{
    switch (z) {
    case Zone::near: return "Near";
    case Zone::middle: return "Middle";
    case Zone::far: return "Far";
    }
    return "?";
}

struct ZoneConfig {
    double b1_m = 0.37 / 3.0;
    double b2_m = 2.0 * 0.37 / 3.0;
    double cage_length_m = 0.37;

    /// Equal thirds of the cage length.
    static ZoneConfig thirds(double cage_length_m)
    {
        return {cage_length_m / 3.0, 2.0 * cage_length_m / 3.0, cage_length_m};
    }
};

inline void validate(const ZoneConfig& z, double d_max_m = std::numeric_limits<double>::infinity())
{
    if (!(leakage_floor_m < z.b1_m && z.b1_m < z.b2_m && z.b2_m < z.cage_length_m && z.cage_length_m <= d_max_m))
        throw Error(ErrorCode::invalid_argument, "zone boundaries must satisfy 0.05 < b1 < b2 < cage_length <= d_max");
}

/// Boundary values belong to the farther zone.
inline Zone classify_zone(double range_m, const ZoneConfig& z)
{
    if (range_m < z.b1_m) return Zone::near;
    if (range_m < z.b2_m) return Zone::middle;
    return Zone::far;
}

// ---- activity ---------------------------------------------------------------

enum class Activity { quasi_static, static_movement, dynamic };

inline std::string_view to_string(Activity a)
{
    switch (a) {
    case Activity::quasi_static: return "quasi_static";
    case Activity::static_movement: return "static_movement";
    case Activity::dynamic: return "dynamic";
    }
    return "?";
}

struct ActivityThresholds {
    double theta_qs = 0.0;
    double theta_dyn = 0.0;
    double baseline = 0.0;

    [[nodiscard]] bool set() const noexcept { return theta_qs > 0.0 && theta_dyn > theta_qs; }

    static ActivityThresholds from_baseline(double baseline, double qs_factor = 3.0, double dyn_factor = 10.0)
    {
        return {qs_factor * baseline, dyn_factor * baseline, baseline};
    }
};

/// Centered running median; the window shrinks at the ends.
inline std::vector<double> median_smooth(std::span<const double> x, std::size_t window)
{
    if (window < 2 || x.empty()) return {x.begin(), x.end()};
    const std::size_t h = window / 2;
    std::vector<double> out(x.size());
    std::vector<double> buf;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const std::size_t lo = i >= h ? i - h : 0;
        const std::size_t hi = std::min(x.size(), i + h + 1);
        buf.assign(x.begin() + static_cast<std::ptrdiff_t>(lo), x.begin() + static_cast<std::ptrdiff_t>(hi));
        out[i] = median(buf);
    }
    return out;
}

inline std::size_t smoothing_window(double frame_rate_hz, double seconds = 0.5)
{
    auto w = static_cast<std::size_t>(std::lround(seconds * frame_rate_hz));
    return w % 2 == 0 ? w + 1 : w;
}

/// Baseline from the first `seconds` of a calibration series (median of the
/// smoothed power).
inline ActivityThresholds calibrate_thresholds(std::span<const double> calibration_power, double frame_rate_hz,
                                               double seconds = 5.0)
{
    if (calibration_power.empty()) throw Error(ErrorCode::empty_series, "calibration series is empty");
    const auto n = std::min(calibration_power.size(), static_cast<std::size_t>(std::lround(seconds * frame_rate_hz)));
    const auto sm = median_smooth(calibration_power.first(n), smoothing_window(frame_rate_hz));
    const double b = median(sm);
    if (!(b > 0.0)) throw Error(ErrorCode::unset_thresholds, "calibration baseline power is zero");
    return ActivityThresholds::from_baseline(b);
}

/// Relative mode: the baseline is the quietest `seconds`-long stretch of the
/// series itself (lowest windowed median of the smoothed power).
inline ActivityThresholds relative_thresholds(std::span<const double> power, double frame_rate_hz, double seconds = 5.0)
{
    if (power.empty()) throw Error(ErrorCode::empty_series, "power series is empty");
    const auto sm = median_smooth(power, smoothing_window(frame_rate_hz));
    const auto w = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(seconds * frame_rate_hz)), 1, sm.size());
    const std::size_t step = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(frame_rate_hz / 4.0)));
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s + w <= sm.size(); s += step)
        b = std::min(b, median({sm.begin() + static_cast<std::ptrdiff_t>(s), sm.begin() + static_cast<std::ptrdiff_t>(s + w)}));
    if (!(b > 0.0) || !std::isfinite(b)) throw Error(ErrorCode::unset_thresholds, "baseline power is zero");
    return ActivityThresholds::from_baseline(b);
}

/// Two-threshold classifier with a relative hysteresis band around each
/// threshold. Holds one label of state.
class ActivityClassifier {
public:
    explicit ActivityClassifier(ActivityThresholds t, double hysteresis = 0.10)
        : t_(t)
        , h_(hysteresis)
    {
        if (!t_.set()) throw Error(ErrorCode::unset_thresholds, "activity thresholds are not set");
    }

    Activity step(double p)
    {
        if (!label_) {
            label_ = p >= t_.theta_dyn ? Activity::dynamic : p >= t_.theta_qs ? Activity::static_movement : Activity::quasi_static;
            return *label_;
        }
        const double qs_up = t_.theta_qs * (1.0 + h_), qs_down = t_.theta_qs * (1.0 - h_);
        const double dyn_up = t_.theta_dyn * (1.0 + h_), dyn_down = t_.theta_dyn * (1.0 - h_);
        Activity& l = *label_;
        switch (l) {
        case Activity::quasi_static:
            if (p >= dyn_up) l = Activity::dynamic;
            else if (p >= qs_up) l = Activity::static_movement;
            break;
        case Activity::static_movement:
            if (p >= dyn_up) l = Activity::dynamic;
            else if (p < qs_down) l = Activity::quasi_static;
            break;
        case Activity::dynamic:
            if (p < qs_down) l = Activity::quasi_static;
            else if (p < dyn_down) l = Activity::static_movement;
            break;
        }
        return l;
    }

    [[nodiscard]] const ActivityThresholds& thresholds() const noexcept { return t_; }

private:
    ActivityThresholds t_;
    double h_;
    std::optional<Activity> label_;
};

/// Labels every sample of a movement-power series (0.5 s centered median,
/// then hysteresis). Needs at least one second of samples.
inline std::vector<Activity> classify_activity(std::span<const double> power, double frame_rate_hz,
                                               const std::optional<ActivityThresholds>& thresholds,
                                               double hysteresis = 0.10)
{
    if (!thresholds || !thresholds->set()) throw Error(ErrorCode::unset_thresholds, "activity thresholds are not set");
    if (static_cast<double>(power.size()) < frame_rate_hz - 1e-9)
        throw Error(ErrorCode::invalid_argument, "classify_activity needs at least 1 s of samples");
    const auto sm = median_smooth(power, smoothing_window(frame_rate_hz));
    ActivityClassifier c(*thresholds, hysteresis);
    std::vector<Activity> out;
    out.reserve(sm.size());
    for (double p : sm) out.push_back(c.step(p));
    return out;
}

// ---- peaks ------------------------------------------------------------------

struct Peak {
    double range_m = 0.0;
    double velocity_mps = 0.0;
    double power = 0.0; // |X| at the cell, after optional range compensation
    std::size_t range_bin = 0;
    std::size_t doppler_bin = 0;
};

struct PeakOptions {
    std::size_t max_targets = 2;
    double noise_k = 8.0;
    bool range_compensation = false;
    double reference_range_m = 0.05;
    // Suppression neighbourhood in native (un-padded) bins.
    std::size_t range_halfwidth_bins = 1;
    std::size_t doppler_halfwidth_bins = 2;
};

/// Greedy local-maximum extraction on the antenna-averaged magnitude map.
/// Returned peaks are sorted by descending power.
inline std::vector<Peak> detect_peaks(const RangeDopplerMap& input, const PeakOptions& opt = {})
{
    const RangeDopplerMap map = input.n_antennas == 1 ? input : input.combined();
    const std::size_t nr = map.n_range, nd = map.n_doppler;
    std::vector<Peak> out;
    if (nr == 0 || nd == 0 || opt.max_targets == 0) return out;

    // Work on power; the median and the local-maximum test commute with sqrt.
    const std::vector<double>& pw = map.power;
    const std::size_t r0 = std::min(map.valid_from_bin, nr);
    // Floor from a regular subsample of the valid cells (at least 8192).
    const std::size_t n_valid = (nr - r0) * nd;
    if (n_valid == 0) return out;
    const std::size_t stride = std::max<std::size_t>(1, n_valid / 8192) | 1; // odd: cycles through Doppler
    std::vector<double> valid;
    valid.reserve(n_valid / stride + 1);
    for (std::size_t i = r0 * nd; i < pw.size(); i += stride) valid.push_back(pw[i]);
    const double floor = std::sqrt(median(std::move(valid)));
    const double thresh = opt.noise_k * floor;
    const double thresh_pw = thresh * thresh;

    auto at = [&](std::size_t r, std::size_t d) { return pw[r * nd + d]; };
    std::vector<Peak> cand;
    // The first valid row borders the zeroed leakage cells, so a maximum there
    // may just be the skirt of a leakage-region return.
    for (std::size_t r = r0 > 0 ? r0 + 1 : 0; r < nr; ++r) {
        for (std::size_t d = 0; d < nd; ++d) {
            const double v = at(r, d);
            if (!(v > 0.0) || v < thresh_pw) continue;
            bool is_max = true;
            for (int dr = -1; dr <= 1 && is_max; ++dr) {
                for (int dd = -1; dd <= 1; ++dd) {
                    if (dr == 0 && dd == 0) continue;
                    const auto rr = static_cast<std::ptrdiff_t>(r) + dr;
                    const auto dq = static_cast<std::ptrdiff_t>(d) + dd;
                    if (rr < static_cast<std::ptrdiff_t>(r0) || rr >= static_cast<std::ptrdiff_t>(nr) || dq < 0
                        || dq >= static_cast<std::ptrdiff_t>(nd))
                        continue;
                    if (at(static_cast<std::size_t>(rr), static_cast<std::size_t>(dq)) > v) {
                        is_max = false;
                        break;
                    }
                }
            }
            if (!is_max) continue;
            Peak p;
            p.range_bin = r;
            p.doppler_bin = d;
            p.range_m = map.range_of(static_cast<double>(r));
            p.velocity_mps = map.velocity_of(static_cast<double>(d));
            p.power = std::sqrt(v);
            if (opt.range_compensation) {
                const double k = p.range_m / opt.reference_range_m;
                p.power *= k * k;
            }
            cand.push_back(p);
        }
    }
    std::stable_sort(cand.begin(), cand.end(), [](const Peak& a, const Peak& b) { return a.power > b.power; });

    const auto wr = static_cast<std::ptrdiff_t>(opt.range_halfwidth_bins * map.range_pad);
    const auto wd = static_cast<std::ptrdiff_t>(opt.doppler_halfwidth_bins * map.doppler_pad);
    for (const Peak& p : cand) {
        bool suppressed = false;
        for (const Peak& q : out) {
            if (std::abs(static_cast<std::ptrdiff_t>(p.range_bin) - static_cast<std::ptrdiff_t>(q.range_bin)) <= wr
                && std::abs(static_cast<std::ptrdiff_t>(p.doppler_bin) - static_cast<std::ptrdiff_t>(q.doppler_bin)) <= wd) {
                suppressed = true;
                break;
            }
        }
        if (suppressed) continue;
        out.push_back(p);
        if (out.size() == opt.max_targets) break;
    }
    return out;
}

} // namespace cagesense
