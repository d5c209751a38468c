#pragma once

// Streaming processors that chain the stages per frame.
//
// movement: mean removal -> RAF -> range-Doppler -> antenna average ->
//           movement power, range, zone, peaks (activity labelled afterwards)
// vitals:   chirp accumulation -> mean removal -> range FFT -> sliding
//           windows of profiles -> target bin -> phase -> RR / HR

#include <algorithm>
#include <cstddef>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "cagesense/dsp.hpp"
#include "cagesense/error.hpp"
#include "cagesense/frame.hpp"
#include "cagesense/radar_model.hpp"
#include "cagesense/tracking.hpp"
#include "cagesense/vitals.hpp"

namespace cagesense {

enum class Mode { movement, vitals };

inline Mode mode_from_string(const std::string& s)
{
    if (s == "movement") return Mode::movement;
    if (s == "vitals" || s == "vital-sign") return Mode::vitals;
    throw Error(ErrorCode::invalid_argument, "unknown mode '" + s + "'");
}

/// Vitals processing needs a slow-time rate that decimates to 100 Hz exactly;
/// movement processing needs a Doppler axis.
inline void check_mode(const RadarConfig& c, Mode m)
{
    if (m == Mode::vitals) {
        const double r = c.frame_rate_hz / 100.0;
        if (c.frame_rate_hz < 100.0 || std::abs(r - std::round(r)) > 1e-9)
            throw Error(ErrorCode::config_mismatch, "vitals mode needs a frame rate that is a multiple of 100 Hz, got "
                                                        + std::to_string(c.frame_rate_hz) + " Hz");
    } else if (c.n_chirps < 2) {
        throw Error(ErrorCode::config_mismatch, "movement mode needs at least two chirps per frame");
    }
}

// ---- movement ---------------------------------------------------------------

struct MovementOptions {
    double raf_alpha = 0.95;
    std::size_t range_pad = 4;
    std::size_t doppler_pad = 4;
    double max_range_m = 1.0;
    ZoneConfig zones{};
    // Distance-power compensation on: without it the nearer of two animals
    // masks the farther one's sidelobe-level peak.
    PeakOptions peaks{.range_compensation = true};
};

struct TrackEstimate {
    double t_s = 0.0;
    bool warmup = false;
    double movement_power = 0.0;
    std::optional<double> range_m;
    std::optional<Zone> zone;
    std::optional<Activity> activity;
    std::vector<Peak> peaks;
};

class MovementProcessor {
public:
    MovementProcessor(RadarConfig config, MovementOptions opt = {})
        : config_(config)
        , opt_(std::move(opt))
        , raf_(opt_.raf_alpha)
    {
        validate(config_);
        check_mode(config_, Mode::movement);
        validate(opt_.zones, derive_params(config_).d_max_m);
    }

    /// Processes one frame; `map_out`, when given, receives the averaged map.
    TrackEstimate process(const RawFrame& frame, RangeDopplerMap* map_out = nullptr)
    {
        if (!frame.matches(config_)) throw Error(ErrorCode::shape_mismatch, "frame does not match processor config");
        auto [filtered, warm] = raf_apply(raf_, mean_removal(frame));
        RangeDopplerMap map =
            range_doppler(filtered, config_, {Window::hann, opt_.range_pad, opt_.doppler_pad, opt_.max_range_m, true});

        TrackEstimate t;
        t.t_s = frame.timestamp_s();
        t.warmup = warm;
        t.movement_power = movement_power(map);
        t.range_m = estimate_range(map);
        if (t.range_m) t.zone = classify_zone(*t.range_m, opt_.zones);
        t.peaks = detect_peaks(map, opt_.peaks);
        if (map_out) *map_out = std::move(map);
        return t;
    }

    [[nodiscard]] const RadarConfig& config() const noexcept { return config_; }
    [[nodiscard]] const MovementOptions& options() const noexcept { return opt_; }

private:
    RadarConfig config_;
    MovementOptions opt_;
    RafState raf_;
};

/// Fills the activity label of every estimate from the movement-power series.
/// Without explicit thresholds the quietest 5 s of the run set the baseline.
inline ActivityThresholds label_activity(std::vector<TrackEstimate>& track, double frame_rate_hz,
                                         std::optional<ActivityThresholds> thresholds = std::nullopt)
{
    std::vector<double> p;
    p.reserve(track.size());
    for (const auto& t : track) p.push_back(t.movement_power);
    if (!thresholds) {
        // Nothing ever moved (noise-free empty scene): no baseline to scale.
        if (std::all_of(p.begin(), p.end(), [](double v) { return v == 0.0; })) {
            for (auto& t : track) t.activity = Activity::quasi_static;
            return {};
        }
        thresholds = relative_thresholds(p, frame_rate_hz);
    }
    const auto labels = classify_activity(p, frame_rate_hz, thresholds);
    for (std::size_t i = 0; i < track.size(); ++i) track[i].activity = labels[i];
    return *thresholds;
}

// ---- vitals -----------------------------------------------------------------

struct VitalsOptions {
    double window_s = 15.0;
    double hop_s = 5.0;
    std::size_t range_pad = 4;
    double max_range_m = 1.0;
    double min_range_m = leakage_floor_m;
    VitalsConfig vitals{};
};

struct VitalsEstimate {
    double window_start_s = 0.0;
    double window_len_s = 0.0;
    std::optional<double> rr_bpm;
    double rr_confidence = 0.0;
    std::vector<std::optional<double>> per_antenna_rr;
    std::optional<double> hr_bpm;
    double hr_peak_bpm = 0.0;
    double hr_ratio_db = 0.0;
    std::optional<double> displacement_peak_bpm; // strongest displacement line, rr_lo/2 .. hr_hi
    std::size_t target_bin = 0;
    double target_range_m = 0.0;
};

/// Full analysis of one window of single-chirp range profiles.
inline VitalsEstimate analyse_window(std::span<const RangeProfile> profiles, double rate_hz, double wavelength_m,
                                     const VitalsOptions& opt, PhaseSeries* series_out = nullptr)
{
    VitalsEstimate e;
    e.window_start_s = static_cast<double>(profiles.front().timestamp_us) * 1e-6;
    e.window_len_s = static_cast<double>(profiles.size()) / rate_hz;
    const std::size_t bin = select_target_bin(remove_static(profiles), opt.min_range_m);
    PhaseSeries s = extract_phase(profiles, bin, rate_hz, wavelength_m);
    e.target_bin = bin;
    e.target_range_m = s.target_range_m;

    const FusedRr rr = rr_estimate(s, opt.vitals);
    e.rr_bpm = rr.rr_bpm;
    e.rr_confidence = rr.confidence;
    e.per_antenna_rr = rr.per_antenna;

    const HrEstimate hr = hr_estimate(s, opt.vitals);
    e.hr_bpm = hr.hr_bpm;
    e.hr_peak_bpm = hr.peak_bpm;
    e.hr_ratio_db = hr.peak_ratio_db;
    e.displacement_peak_bpm = spectral_peak(s, 0.5 * opt.vitals.rr_band_lo_bpm, opt.vitals.hr_band_hi_bpm).bpm;
    if (series_out) *series_out = std::move(s);
    return e;
}

class VitalsProcessor {
public:
    VitalsProcessor(RadarConfig config, VitalsOptions opt = {})
        : config_(config)
        , opt_(std::move(opt))
        , params_(derive_params(config_))
    {
        validate(config_);
        check_mode(config_, Mode::vitals);
        if (!(opt_.hop_s > 0.0) || !(opt_.window_s >= opt_.vitals.min_window_s))
            throw Error(ErrorCode::invalid_argument, "vitals window must be >= the minimum window and hop > 0");
        window_ = static_cast<std::size_t>(std::lround(opt_.window_s * config_.frame_rate_hz));
        hop_ = static_cast<std::size_t>(std::lround(opt_.hop_s * config_.frame_rate_hz));
    }

    /// Single-chirp range profile of one frame (exposed for plotting/tests).
    [[nodiscard]] RangeProfile profile(const RawFrame& frame) const
    {
        return range_fft(mean_removal(chirp_accumulate(frame)), config_,
                         {Window::hann, opt_.range_pad, opt_.max_range_m});
    }

    /// Adds a frame; returns an estimate whenever a window completes.
    std::optional<VitalsEstimate> push(const RawFrame& frame)
    {
        if (!frame.matches(config_)) throw Error(ErrorCode::shape_mismatch, "frame does not match processor config");
        buffer_.push_back(profile(frame));
        ++seen_;
        if (buffer_.size() > window_) buffer_.pop_front();
        if (buffer_.size() == window_ && (seen_ - window_) % hop_ == 0) return emit();
        return std::nullopt;
    }

    /// For recordings shorter than one window: analyses what was buffered if
    /// it spans at least the minimum window and nothing was emitted yet.
    std::optional<VitalsEstimate> finish()
    {
        if (emitted_ > 0) return std::nullopt;
        const double dur = static_cast<double>(buffer_.size()) / config_.frame_rate_hz;
        if (dur + 1e-9 < opt_.vitals.min_window_s) return std::nullopt;
        return emit();
    }

    [[nodiscard]] const PhaseSeries& last_series() const noexcept { return last_; }
    [[nodiscard]] const RadarConfig& config() const noexcept { return config_; }
    [[nodiscard]] const VitalsOptions& options() const noexcept { return opt_; }

private:
    VitalsEstimate emit()
    {
        std::vector<RangeProfile> win(buffer_.begin(), buffer_.end());
        ++emitted_;
        return analyse_window(win, config_.frame_rate_hz, params_.wavelength_m, opt_, &last_);
    }

    RadarConfig config_;
    VitalsOptions opt_;
    DerivedParams params_;
    std::size_t window_ = 0;
    std::size_t hop_ = 0;
    std::deque<RangeProfile> buffer_;
    std::size_t seen_ = 0;
    std::size_t emitted_ = 0;
    PhaseSeries last_;
};

} // namespace cagesense
