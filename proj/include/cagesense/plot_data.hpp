#pragma once

// Plain-text tables for plotting: one header line naming columns and units,
// comma separated, fixed number formatting so reruns are byte identical.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cagesense/dsp.hpp"
#include "cagesense/error.hpp"
#include "cagesense/filters.hpp"
#include "cagesense/pipeline.hpp"
#include "cagesense/stream_io.hpp"
#include "cagesense/vitals.hpp"

namespace cagesense {

namespace csv {

inline void num(std::string& out, double v, int digits = 9)
{
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    out += buf;
}

inline void opt(std::string& out, const std::optional<double>& v, int digits = 9)
{
    if (v) num(out, *v, digits);
}

inline void require_nonempty(std::size_t n, const char* what)
{
    if (n == 0) throw Error(ErrorCode::empty_series, std::string(what) + ": series is empty");
}

} // namespace csv

// ---- result tables ----------------------------------------------------------

inline std::string track_csv(std::span<const TrackEstimate> track)
{
    std::string s = "t_s,range_m,zone,movement_power,activity,peak1_range_m,peak1_vel_mps,peak2_range_m,peak2_vel_mps\n";
    for (const auto& t : track) {
        csv::num(s, t.t_s);
        s += ',';
        csv::opt(s, t.range_m);
        s += ',';
        if (t.zone) s += to_string(*t.zone);
        s += ',';
        csv::num(s, t.movement_power);
        s += ',';
        if (t.activity) s += to_string(*t.activity);
        for (std::size_t k = 0; k < 2; ++k) {
            s += ',';
            if (k < t.peaks.size()) csv::num(s, t.peaks[k].range_m);
            s += ',';
            if (k < t.peaks.size()) csv::num(s, t.peaks[k].velocity_mps);
        }
        s += '\n';
    }
    return s;
}

inline std::string vitals_csv(std::span<const VitalsEstimate> est)
{
    std::string s = "window_start_s,window_len_s,rr_bpm,rr_confidence,hr_bpm,hr_peak_bpm,hr_ratio_db,displacement_peak_bpm,target_range_m\n";
    for (const auto& e : est) {
        csv::num(s, e.window_start_s);
        s += ',';
        csv::num(s, e.window_len_s);
        s += ',';
        csv::opt(s, e.rr_bpm);
        s += ',';
        csv::num(s, e.rr_confidence, 6);
        s += ',';
        csv::opt(s, e.hr_bpm);
        s += ',';
        csv::num(s, e.hr_peak_bpm);
        s += ',';
        csv::num(s, e.hr_ratio_db, 6);
        s += ',';
        csv::opt(s, e.displacement_peak_bpm);
        s += ',';
        csv::num(s, e.target_range_m);
        s += '\n';
    }
    return s;
}

// ---- plot data --------------------------------------------------------------

/// Movement power per frame.
inline std::filesystem::path emit_frame_power(const std::filesystem::path& path, std::span<const TrackEstimate> track)
{
    csv::require_nonempty(track.size(), "frame_power");
    std::string s = "t_s,movement_power\n";
    for (const auto& t : track) {
        csv::num(s, t.t_s);
        s += ',';
        csv::num(s, t.movement_power);
        s += '\n';
    }
    write_file_atomic(path, s);
    return path;
}

/// One antenna-averaged map as a matrix: rows are range cells (from the
/// first valid bin), columns Doppler cells; the header carries the velocity
/// of each column.
inline std::string range_doppler_csv(const RangeDopplerMap& m)
{
    std::string s = "range_m\\velocity_mps";
    for (std::size_t d = 0; d < m.n_doppler; ++d) {
        s += ',';
        csv::num(s, m.velocity_of(static_cast<double>(d)), 6);
    }
    s += '\n';
    const RangeDopplerMap c = m.n_antennas == 1 ? m : m.combined();
    for (std::size_t r = c.valid_from_bin; r < c.n_range; ++r) {
        csv::num(s, c.range_of(static_cast<double>(r)), 6);
        for (std::size_t d = 0; d < c.n_doppler; ++d) {
            s += ',';
            csv::num(s, std::sqrt(c.at(0, r, d)), 5);
        }
        s += '\n';
    }
    return s;
}

/// One file per second of recording, named rd_<second>s.csv.
inline std::vector<std::filesystem::path> emit_range_doppler_sequence(const std::filesystem::path& dir,
                                                                      std::span<const RangeDopplerMap> per_second)
{
    csv::require_nonempty(per_second.size(), "range_doppler_sequence");
    std::vector<std::filesystem::path> out;
    for (const auto& m : per_second) {
        char name[32];
        std::snprintf(name, sizeof name, "rd_%04llds.csv", static_cast<long long>(std::llround(static_cast<double>(m.timestamp_us) * 1e-6)));
        out.push_back(dir / name);
        write_file_atomic(out.back(), range_doppler_csv(m));
    }
    return out;
}

/// Displacement of every antenna over `span_s` seconds starting at `t0_s`
/// into the series.
inline std::filesystem::path emit_displacement_zoom(const std::filesystem::path& path, const PhaseSeries& series,
                                                    double t0_s = 0.0, double span_s = 0.5)
{
    csv::require_nonempty(series.length(), "displacement_zoom");
    const auto i0 = static_cast<std::size_t>(std::max(0.0, std::round(t0_s * series.rate_hz)));
    const auto n = static_cast<std::size_t>(std::round(span_s * series.rate_hz));
    if (i0 >= series.length()) throw Error(ErrorCode::invalid_argument, "zoom start lies beyond the series");
    const std::size_t i1 = std::min(series.length(), i0 + n);
    std::string s = "t_s";
    for (std::size_t a = 0; a < series.n_antennas(); ++a) s += ",displacement_rx" + std::to_string(a) + "_um";
    s += '\n';
    for (std::size_t i = i0; i < i1; ++i) {
        csv::num(s, static_cast<double>(i) / series.rate_hz);
        for (std::size_t a = 0; a < series.n_antennas(); ++a) {
            s += ',';
            csv::num(s, (series.displacement[a][i] - series.displacement[a][i0]) * 1e6, 7);
        }
        s += '\n';
    }
    write_file_atomic(path, s);
    return path;
}

inline std::filesystem::path emit_spectrum(const std::filesystem::path& path, const Spectrum& sp,
                                           double max_freq_hz = std::numeric_limits<double>::infinity())
{
    csv::require_nonempty(sp.value.size(), "spectrum");
    std::string s = "freq_hz,rate_bpm,magnitude\n";
    for (std::size_t k = 0; k < sp.value.size() && sp.freq_hz[k] <= max_freq_hz; ++k) {
        csv::num(s, sp.freq_hz[k]);
        s += ',';
        csv::num(s, 60.0 * sp.freq_hz[k]);
        s += ',';
        csv::num(s, sp.value[k], 7);
        s += '\n';
    }
    write_file_atomic(path, s);
    return path;
}

} // namespace cagesense
