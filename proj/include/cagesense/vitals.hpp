#pragma once

// Micro-displacement from the target range bin, respiration rate from the
// median peak interval of the band-passed displacement, heart rate from the
// rectified Savitzky-Golay acceleration spectrum.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "cagesense/dsp.hpp"
#include "cagesense/error.hpp"
#include "cagesense/filters.hpp"
#include "cagesense/frame.hpp"

namespace cagesense {

struct VitalsConfig {
    double rr_band_lo_bpm = 150.0;
    double rr_band_hi_bpm = 300.0;
    double hr_band_lo_bpm = 500.0;
    double hr_band_hi_bpm = 700.0;
    int bandpass_order = 2;          // per edge; filtfilt doubles the effective order
    double min_window_s = 5.0;
    double interval_tolerance = 0.2; // relative, for the interval-consistency part of confidence
    double concentration_halfwidth_hz = 0.25;
    double band_clamp_fraction = 0.10;
    std::size_t sg_window = 7;
    int sg_order = 3;
    std::size_t hr_decimation = 4;
    std::size_t hr_fft_pad = 8;
    double hr_guard_db = 6.0;
    double hr_min_relative_db = -30.0; // candidate vs strongest envelope line
    double hr_highpass_fraction = 0.75; // of the HR band's lower edge; 0 disables
    double welch_segment_s = 2.0;
};

// ---- accumulation and bin selection -----------------------------------------

/// Mean over the chirp axis; the result has a single chirp per antenna.
template <std::floating_point T>
Frame<T> chirp_accumulate(const Frame<T>& frame)
{
    Frame<T> out(frame.n_antennas, 1, frame.n_samples, frame.timestamp_us);
    if (frame.n_chirps == 0) return out;
    const double inv = 1.0 / static_cast<double>(frame.n_chirps);
    std::vector<double> acc(frame.n_samples);
    for (std::size_t a = 0; a < frame.n_antennas; ++a) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t c = 0; c < frame.n_chirps; ++c) {
            auto x = frame.chirp(a, c);
            for (std::size_t s = 0; s < x.size(); ++s) acc[s] += static_cast<double>(x[s]);
        }
        auto dst = out.chirp(a, 0);
        for (std::size_t s = 0; s < dst.size(); ++s) dst[s] = static_cast<T>(acc[s] * inv);
    }
    return out;
}

/// Bin with the largest temporal variance of |X| (summed over antennas) at or
/// beyond min_range_m and the leakage boundary. Exact ties go to the nearer bin.
inline std::size_t select_target_bin(std::span<const RangeProfile> history, double min_range_m = leakage_floor_m)
{
    if (history.empty()) throw Error(ErrorCode::empty_history, "select_target_bin: no profiles");
    const RangeProfile& p0 = history.front();
    const std::size_t first = std::max(p0.valid_from_bin,
                                       static_cast<std::size_t>(std::ceil(min_range_m / p0.bin_spacing_m - 1e-9)));
    if (first >= p0.n_bins) throw Error(ErrorCode::empty_history, "select_target_bin: no bins beyond the minimum range");

    const double n = static_cast<double>(history.size());
    std::size_t best = first;
    double best_var = -1.0;
    for (std::size_t b = first; b < p0.n_bins; ++b) {
        double var = 0.0;
        for (std::size_t a = 0; a < p0.n_antennas; ++a) {
            double s = 0.0, s2 = 0.0;
            for (const auto& p : history) {
                const double m = std::abs(p.at(a, b));
                s += m;
                s2 += m * m;
            }
            const double mu = s / n;
            var += std::max(0.0, s2 / n - mu * mu);
        }
        if (var > best_var) {
            best_var = var;
            best = b;
        }
    }
    return best;
}

/// Copies of `history` with each bin's complex temporal mean subtracted, so
/// static reflectors drop out before the variance test. A still clutter return
/// beating against the target skirt otherwise puts the largest magnitude
/// swing between the two rather than on the target.
inline std::vector<RangeProfile> remove_static(std::span<const RangeProfile> history)
{
    std::vector<RangeProfile> out(history.begin(), history.end());
    if (out.empty()) return out;
    std::vector<cplx> mean(out.front().bins.size());
    for (const auto& p : out)
        for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += p.bins[i];
    const double inv = 1.0 / static_cast<double>(out.size());
    for (auto& m : mean) m *= inv;
    for (auto& p : out)
        for (std::size_t i = 0; i < mean.size(); ++i) p.bins[i] -= mean[i];
    return out;
}

// ---- phase ------------------------------------------------------------------

/// Removes 2*pi jumps so consecutive samples differ by at most pi.
inline std::vector<double> unwrap(std::span<const double> phase)
{
    using std::numbers::pi;
    std::vector<double> out(phase.begin(), phase.end());
    double offset = 0.0;
    for (std::size_t i = 1; i < phase.size(); ++i) {
        const double d = phase[i] - phase[i - 1];
        double dd = std::fmod(d + pi, 2.0 * pi);
        if (dd < 0) dd += 2.0 * pi;
        dd -= pi;
        if (dd == -pi && d > 0) dd = pi;
        if (std::abs(d) >= pi) offset += dd - d;
        out[i] = phase[i] + offset;
    }
    return out;
}

struct PhaseSeries {
    double rate_hz = 0.0;
    double wavelength_m = 0.0;
    std::size_t target_bin = 0;
    double target_range_m = 0.0;
    std::vector<std::vector<double>> phase;        // [antenna][frame], unwrapped
    std::vector<std::vector<double>> displacement; // [antenna][frame], metres

    [[nodiscard]] std::size_t n_antennas() const noexcept { return phase.size(); }
    [[nodiscard]] std::size_t length() const noexcept { return phase.empty() ? 0 : phase.front().size(); }
    [[nodiscard]] double duration_s() const noexcept { return static_cast<double>(length()) / rate_hz; }
};

inline PhaseSeries make_phase_series(std::vector<std::vector<double>> phase, double rate_hz, double wavelength_m)
{
    PhaseSeries s;
    s.rate_hz = rate_hz;
    s.wavelength_m = wavelength_m;
    s.displacement.resize(phase.size());
    for (std::size_t a = 0; a < phase.size(); ++a) {
        s.displacement[a].resize(phase[a].size());
        for (std::size_t i = 0; i < phase[a].size(); ++i)
            s.displacement[a][i] = phase_to_displacement(phase[a][i], wavelength_m);
    }
    s.phase = std::move(phase);
    return s;
}

/// Per-antenna angle of `target_bin` across the history, unwrapped.
inline PhaseSeries extract_phase(std::span<const RangeProfile> history, std::size_t target_bin, double rate_hz,
                                 double wavelength_m)
{
    if (history.empty()) throw Error(ErrorCode::empty_history, "extract_phase: no profiles");
    const std::size_t n_ant = history.front().n_antennas;
    if (target_bin >= history.front().n_bins) throw Error(ErrorCode::invalid_argument, "extract_phase: bin out of range");
    std::vector<std::vector<double>> phase(n_ant, std::vector<double>(history.size()));
    std::vector<double> raw(history.size());
    for (std::size_t a = 0; a < n_ant; ++a) {
        for (std::size_t i = 0; i < history.size(); ++i) raw[i] = std::arg(history[i].at(a, target_bin));
        phase[a] = unwrap(raw);
    }
    PhaseSeries s = make_phase_series(std::move(phase), rate_hz, wavelength_m);
    s.target_bin = target_bin;
    s.target_range_m = history.front().range_of(static_cast<double>(target_bin));
    return s;
}

// ---- respiration ------------------------------------------------------------

/// Local maxima (left strictly lower, right not higher) kept greedily by
/// height so that no two survivors are closer than `min_distance` samples.
inline std::vector<std::size_t> find_peaks(std::span<const double> y, double min_distance)
{
    std::vector<std::size_t> cand;
    for (std::size_t i = 1; i + 1 < y.size(); ++i)
        if (y[i] > y[i - 1] && y[i] >= y[i + 1]) cand.push_back(i);
    std::vector<std::size_t> order = cand;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return y[a] > y[b]; });
    std::vector<std::size_t> kept;
    for (std::size_t i : order) {
        bool ok = true;
        for (std::size_t k : kept)
            if (std::abs(static_cast<double>(i) - static_cast<double>(k)) < min_distance) {
                ok = false;
                break;
            }
        if (ok) kept.push_back(i);
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

struct RrEstimate {
    std::optional<double> rr_bpm;
    double confidence = 0.0;
    std::size_t n_peaks = 0;
};

/// RR from one displacement series sampled at fs.
inline RrEstimate rr_estimate(std::span<const double> displacement, double fs, const VitalsConfig& cfg = {})
{
    if (static_cast<double>(displacement.size()) / fs < cfg.min_window_s - 1e-9)
        throw Error(ErrorCode::invalid_argument, "rr_estimate: window shorter than the minimum");
    const double lo = cfg.rr_band_lo_bpm / 60.0;
    const double hi = cfg.rr_band_hi_bpm / 60.0;
    const std::vector<double> y = filtfilt(butter_bandpass(cfg.bandpass_order, lo, hi, fs), displacement);

    RrEstimate est;
    const std::vector<std::size_t> peaks = find_peaks(y, fs * 60.0 / cfg.rr_band_hi_bpm);
    est.n_peaks = peaks.size();
    if (peaks.size() < 3) return est;

    std::vector<double> t(peaks.size());
    for (std::size_t i = 0; i < peaks.size(); ++i) {
        const std::size_t p = peaks[i];
        t[i] = (static_cast<double>(p) + parabolic_offset(y[p - 1], y[p], y[p + 1])) / fs;
    }
    std::vector<double> iv(t.size() - 1);
    for (std::size_t i = 0; i + 1 < t.size(); ++i) iv[i] = t[i + 1] - t[i];
    const double med = median(iv);
    double rr = 60.0 / med;

    const double slack = cfg.band_clamp_fraction;
    if (rr < cfg.rr_band_lo_bpm * (1.0 - slack) || rr > cfg.rr_band_hi_bpm * (1.0 + slack)) return est;
    rr = std::clamp(rr, cfg.rr_band_lo_bpm, cfg.rr_band_hi_bpm);

    std::size_t consistent = 0;
    for (double v : iv)
        if (std::abs(v - med) <= cfg.interval_tolerance * med) ++consistent;
    const double consistency = static_cast<double>(consistent) / static_cast<double>(iv.size());

    // Share of near-band spectral power sitting at the estimated rate. Broadband
    // input spreads its power and scores low even when its intervals look regular.
    const Spectrum sp = magnitude_spectrum(displacement, fs, 4);
    const double f0 = 1.0 / med;
    const double hw = cfg.concentration_halfwidth_hz;
    double at_peak = 0.0, near_band = 0.0;
    for (std::size_t k = 0; k < sp.freq_hz.size(); ++k) {
        const double f = sp.freq_hz[k];
        const double p = sp.value[k] * sp.value[k];
        if (f >= lo - hw && f <= hi + hw) near_band += p;
        if (std::abs(f - f0) <= hw) at_peak += p;
    }
    const double concentration = near_band > 0.0 ? std::min(1.0, at_peak / near_band) : 0.0;

    est.rr_bpm = rr;
    est.confidence = consistency * concentration;
    return est;
}

/// Median of the available per-antenna values; absent when none is available.
inline std::optional<double> fuse(std::span<const std::optional<double>> values)
{
    std::vector<double> v;
    for (const auto& x : values)
        if (x) v.push_back(*x);
    if (v.empty()) return std::nullopt;
    return median(std::move(v));
}

struct FusedRr {
    std::optional<double> rr_bpm;
    double confidence = 0.0;
    std::vector<std::optional<double>> per_antenna;
    std::vector<double> per_antenna_confidence;
};

inline FusedRr rr_estimate(const PhaseSeries& series, const VitalsConfig& cfg = {})
{
    FusedRr out;
    std::vector<double> conf;
    for (const auto& d : series.displacement) {
        const RrEstimate e = rr_estimate(d, series.rate_hz, cfg);
        out.per_antenna.push_back(e.rr_bpm);
        out.per_antenna_confidence.push_back(e.confidence);
        conf.push_back(e.confidence);
    }
    out.rr_bpm = fuse(out.per_antenna);
    if (out.rr_bpm) out.confidence = median(conf);
    return out;
}

// ---- heart rate ---------------------------------------------------------------

/// Full-wave rectification written as positive part plus magnitude of the
/// negative part.
inline std::vector<double> rectify(std::span<const double> x)
{
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::max(x[i], 0.0) + std::abs(std::min(x[i], 0.0));
    return out;
}

struct HrEstimate {
    std::optional<double> hr_bpm;
    double peak_bpm = 0.0;     // strongest in-band local maximum, even when rejected
    double peak_ratio_db = 0.0; // guard statistic
    double analysis_rate_hz = 0.0;
};

/// Second derivative of displacement after optional decimation; returns the
/// series and the rate it is sampled at.
inline std::pair<std::vector<double>, double> acceleration(std::span<const double> displacement, double fs,
                                                           const VitalsConfig& cfg)
{
    const double need = 2.0 * cfg.hr_band_hi_bpm / 60.0;
    std::size_t factor = std::max<std::size_t>(cfg.hr_decimation, 1);
    while (factor > 1 && fs / static_cast<double>(factor) < need) --factor;
    const double rate = fs / static_cast<double>(factor);
    std::vector<double> x = decimate(displacement, factor, fs);
    // Respiration dwarfs the cardiac component; left in, rectification mixes
    // the two into spurious in-band lines.
    if (cfg.hr_highpass_fraction > 0.0)
        x = filtfilt(butter_highpass(4, cfg.hr_highpass_fraction * cfg.hr_band_lo_bpm / 60.0, rate), x);
    const auto c = savgol_coefficients(cfg.sg_window, cfg.sg_order, 2, 1.0 / rate);
    return {apply_valid(x, c), rate};
}

inline HrEstimate hr_estimate(const PhaseSeries& series, const VitalsConfig& cfg = {})
{
    const double lo = cfg.hr_band_lo_bpm / 60.0;
    const double hi = cfg.hr_band_hi_bpm / 60.0;
    if (series.rate_hz < 2.0 * hi)
        throw Error(ErrorCode::nyquist_violation, "slow-time rate " + std::to_string(series.rate_hz)
                                                      + " Hz is below twice the heart-rate band edge");
    HrEstimate est;
    Spectrum avg, avg_psd;
    std::size_t used = 0;
    for (const auto& d : series.displacement) {
        auto [acc, rate] = acceleration(d, series.rate_hz, cfg);
        est.analysis_rate_hz = rate;
        if (acc.size() < 8) continue;
        const std::vector<double> env = rectify(acc);
        Spectrum s = magnitude_spectrum(env, rate, cfg.hr_fft_pad);
        Spectrum w = welch(env, rate, static_cast<std::size_t>(cfg.welch_segment_s * rate));
        if (used == 0) {
            avg = std::move(s);
            avg_psd = std::move(w);
        } else {
            for (std::size_t k = 0; k < avg.value.size(); ++k) avg.value[k] += s.value[k];
            for (std::size_t k = 0; k < avg_psd.value.size(); ++k) avg_psd.value[k] += w.value[k];
        }
        ++used;
    }
    if (used == 0) return est;

    std::size_t best = 0;
    double best_mag = -1.0;
    for (std::size_t k = 1; k + 1 < avg.value.size(); ++k) {
        const double f = avg.freq_hz[k];
        if (f < lo || f > hi) continue;
        const double m = avg.value[k];
        if (m > avg.value[k - 1] && m >= avg.value[k + 1] && m > best_mag) {
            best_mag = m;
            best = k;
        }
    }
    if (best_mag < 0.0) return est;

    const double df = avg.freq_hz[1] - avg.freq_hz[0];
    const double f_peak = avg.freq_hz[best] + df * parabolic_offset(avg.value[best - 1], avg.value[best], avg.value[best + 1]);
    est.peak_bpm = 60.0 * f_peak;

    // Guard, on the Welch estimate: the candidate must sit on a local maximum
    // (not on the skirt of an out-of-band line), clear the in-band median by
    // hr_guard_db and not be negligible next to the strongest envelope line.
    const auto& fw = avg_psd.freq_hz;
    const auto& pw = avg_psd.value;
    if (fw.size() < 3) return est;
    const double dfw = fw[1] - fw[0];
    const std::size_t kw = std::min(static_cast<std::size_t>(std::lround(f_peak / dfw)), fw.size() - 2);
    const bool welch_peak = kw >= 1 && pw[kw] >= pw[kw - 1] && pw[kw] >= pw[kw + 1];

    std::vector<double> band;
    double strongest = 0.0;
    for (std::size_t k = 1; k < fw.size(); ++k) {
        if (fw[k] >= lo && fw[k] <= hi) band.push_back(pw[k]);
        strongest = std::max(strongest, pw[k]);
    }
    if (band.empty()) return est;
    const double floor = median(band);
    const double peak = interpolate(avg_psd, f_peak);
    est.peak_ratio_db = (floor > 0.0 && peak > 0.0) ? 10.0 * std::log10(peak / floor) : 0.0;
    const double relative_db = (strongest > 0.0 && peak > 0.0) ? 10.0 * std::log10(peak / strongest) : -1e9;
    if (welch_peak && est.peak_ratio_db >= cfg.hr_guard_db && relative_db >= cfg.hr_min_relative_db)
        est.hr_bpm = std::clamp(est.peak_bpm, cfg.hr_band_lo_bpm, cfg.hr_band_hi_bpm);
    return est;
}

struct SpectralPeak {
    std::optional<double> bpm; // absent when the band holds no local maximum
    double magnitude = 0.0;
    Spectrum spectrum; // antenna-averaged displacement magnitude spectrum
};

/// Dominant displacement line between lo and hi bpm, antenna-averaged.
inline SpectralPeak spectral_peak(const PhaseSeries& series, double lo_bpm, double hi_bpm, std::size_t pad = 8)
{
    SpectralPeak out;
    for (const auto& d : series.displacement) {
        Spectrum s = magnitude_spectrum(d, series.rate_hz, pad);
        if (out.spectrum.value.empty()) {
            out.spectrum = std::move(s);
        } else {
            for (std::size_t k = 0; k < s.value.size(); ++k) out.spectrum.value[k] += s.value[k];
        }
    }
    const auto& f = out.spectrum.freq_hz;
    auto& v = out.spectrum.value;
    for (double& x : v) x /= static_cast<double>(std::max<std::size_t>(series.n_antennas(), 1));
    std::size_t best = 0;
    for (std::size_t k = 1; k + 1 < v.size(); ++k) {
        if (60.0 * f[k] < lo_bpm || 60.0 * f[k] > hi_bpm) continue;
        if (v[k] > v[k - 1] && v[k] >= v[k + 1] && v[k] > out.magnitude) {
            out.magnitude = v[k];
            best = k;
        }
    }
    if (best == 0) return out;
    const double df = f[1] - f[0];
    out.bpm = 60.0 * (f[best] + df * parabolic_offset(v[best - 1], v[best], v[best + 1]));
    return out;
}

} // namespace cagesense
