// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>

#include "support.hpp"

using namespace cagesense;
using namespace testsupport;
using std::numbers::pi;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        pass = pass && ok;
        if (!detail.empty()) detail += "; ";
        detail += (ok ? "" : "!") + what;
    }
};

std::string f2(const char* fmt, double v)
{
    char b[64];
    std::snprintf(b, sizeof b, fmt, v);
    return b;
}

// ---- AC1 -------------------------------------------------------------------

Outcome ac1()
{
    Outcome o;
    const auto p = derive_params(presets::movement());
    o.require(std::abs(p.d_res_m - 0.03) < 5e-5, f2("d_res %.4f m", p.d_res_m));
    o.require(std::abs(p.v_max_mps - 6.70) <= 0.05, f2("v_max %.3f m/s", p.v_max_mps));
    o.require(std::abs(p.v_res_mps - 0.105) <= 0.001, f2("v_res %.4f m/s", p.v_res_mps));
    o.require(std::abs(p.d_max_m - 3.80) <= 0.01, f2("d_max %.3f m", p.d_max_m));
    return o;
}

// ---- AC2 -------------------------------------------------------------------

Outcome ac2()
{
    Outcome o;
    const RadarConfig cfg = presets::vital_sign();
    for (const ClutterLevel level : all_clutter_levels) {
        const Scenario sc = vibration_200bpm(level, 11);
        const FrameSynthesizer syn(sc.scene, cfg);
        const VitalsRun run = process_vitals(cfg, synthetic_source(syn));
        double worst_peak = 0.0, worst_rr = 0.0;
        bool all = !run.windows.empty();
        for (const auto& w : run.windows) {
            if (!w.displacement_peak_bpm || !w.rr_bpm) {
                all = false;
                continue;
            }
            worst_peak = std::max(worst_peak, std::abs(*w.displacement_peak_bpm - 200.0));
            worst_rr = std::max(worst_rr, std::abs(*w.rr_bpm - 200.0));
        }
        o.require(all && worst_peak <= 2.0 && worst_rr <= 2.0,
                  std::string(to_string(level)) + f2(" peak err %.2f", worst_peak) + f2(" rr err %.2f bpm", worst_rr));
    }
    return o;
}

// ---- AC3 -------------------------------------------------------------------

Outcome ac3()
{
    Outcome o;
    const RadarConfig cfg = presets::vital_sign();
    std::vector<std::optional<double>> all;
    double worst = 0.0;
    bool every = true;
    for (const double rate : {150.0, 180.0, 240.0, 300.0}) {
        const Scene s = breathing_scene(rate, 0.3e-3, 70.0, ClutterLevel::internal, 5);
        const double snr = power_db(0.5 * std::pow(s.target_amplitude(s.targets[0], s.targets[0].range(0.0)), 2) / (s.noise_std * s.noise_std));
        if (rate == 150.0) o.require(snr >= 20.0, f2("per-sample SNR %.1f dB", snr));
        const FrameSynthesizer syn(s, cfg);
        const VitalsRun run = process_vitals(cfg, synthetic_source(syn));
        for (const auto& w : run.windows) {
            all.push_back(w.rr_bpm);
            if (!w.rr_bpm) {
                every = false;
                continue;
            }
            worst = std::max(worst, std::abs(*w.rr_bpm - rate));
            every = every && std::abs(*w.rr_bpm - rate) <= 2.0;
        }
        // accuracy is relative to each scene's own truth; fold it into one score
        const auto sc = rr_accuracy(std::span<const std::optional<double>>(all).last(run.windows.size()), rate);
        o.require(sc.accuracy_pct >= 99.0, f2("%g bpm", rate) + f2(" %.2f%%", sc.accuracy_pct));
    }
    o.require(every, std::to_string(all.size()) + " windows, worst " + f2("%.2f bpm", worst));
    return o;
}

// ---- AC4 -------------------------------------------------------------------

double zone_accuracy(const Scenario& sc)
{
    const RadarConfig cfg = presets::movement();
    MovementOptions opt;
    opt.zones = sc.zones;
    const FrameSynthesizer syn(sc.scene, cfg);
    const MovementRun run = process_movement(cfg, synthetic_source(syn), opt);
    return zone_range_score(run, sc.scene.targets[0], sc.zones).zone.pct;
}

Outcome ac4()
{
    Outcome o;
    Scenario noisy = single_mouse(ClutterLevel::internal, 3, 60.0);
    Scenario clean = single_mouse(ClutterLevel::internal, 3, 60.0);
    clean.scene.noise_std = 0.0;
    const double a = zone_accuracy(noisy), b = zone_accuracy(clean);
    o.require(a >= 93.0, f2("default noise %.2f%%", a));
    o.require(b >= 99.0, f2("noiseless %.2f%%", b));
    return o;
}

// ---- AC5 -------------------------------------------------------------------

Outcome ac5()
{
    Outcome o;
    const Scenario sc = activity_levels(ClutterLevel::internal, 2);
    const RadarConfig cfg = presets::movement();
    MovementOptions opt;
    opt.zones = sc.zones;
    std::optional<ActivityThresholds> th;
    if (sc.calibration) th = calibration_thresholds(*sc.calibration, cfg, opt);
    const FrameSynthesizer syn(sc.scene, cfg);
    const MovementRun run = process_movement(cfg, synthetic_source(syn), opt, th);
    const ActivityScore s = activity_score(run, sc);
    o.require(s.dm_over_sm_db >= 6.0, f2("DM/SM %.1f dB", s.dm_over_sm_db));
    o.require(s.sm_over_qs_db >= 6.0, f2("SM/QS %.1f dB", s.sm_over_qs_db));
    o.require(s.agreement.pct >= 90.0, f2("agreement %.2f%%", s.agreement.pct));
    return o;
}

// ---- AC6 -------------------------------------------------------------------

Outcome ac6()
{
    Outcome o;
    const Scenario sc = two_mice(ClutterLevel::internal, 4, 60.0);
    const RadarConfig cfg = presets::movement();
    const auto p = derive_params(cfg);
    const FrameSynthesizer syn(sc.scene, cfg);
    const MovementRun run = process_movement(cfg, synthetic_source(syn));
    const auto s = separation_score(run, sc.scene, p.d_res_m, p.v_res_mps, p.d_res_m);
    o.require(s.pct >= 95.0, f2("%.2f%% of ", s.pct) + std::to_string(s.n_eligible) + " separated frames");
    return o;
}

// ---- AC7 -------------------------------------------------------------------

Outcome ac7()
{
    Outcome o;
    const RadarConfig mv = presets::movement();
    auto peaks = [&](double r0, double sep) {
        const Scene s = still_scene({Target::stationary(r0, 0.5), Target::stationary(r0 + sep, 0.5)});
        const RangeProfile p = range_fft(mean_removal(synthesize_frame(s, mv, 0)), mv, {Window::hann, 4, 1.0});
        return profile_maxima(p, r0 - 0.05, r0 + sep + 0.05).size();
    };
    std::size_t wide_ok = 0, narrow_ok = 0, n = 0;
    for (double r0 = 0.15; r0 < 0.30; r0 += 0.0037, ++n) {
        wide_ok += peaks(r0, 0.06) == 2;
        narrow_ok += peaks(r0, 0.02) == 1;
    }
    o.require(wide_ok == n, "6 cm resolved " + std::to_string(wide_ok) + "/" + std::to_string(n));
    o.require(narrow_ok == n, "2 cm merged " + std::to_string(narrow_ok) + "/" + std::to_string(n));

    Target t;
    t.waypoints = {{0.0, 0.20}, {1.0, 0.70}};
    const Scene s = still_scene({t}, 1e-3, 1.0, 8);
    double worst = 0.0;
    bool seen = true;
    for (std::size_t i = 0; i < 10; ++i) {
        const auto m = range_doppler(mean_removal(synthesize_frame(s, mv, i)), mv, {Window::hann, 4, 4, 1.0, true});
        const auto pk = detect_peaks(m);
        if (pk.empty()) {
            seen = false;
            continue;
        }
        worst = std::max(worst, std::abs(pk.front().velocity_mps - 0.5));
    }
    const double v_res = derive_params(mv).v_res_mps;
    o.require(seen && worst <= v_res, f2("0.5 m/s worst error %.3f m/s", worst));
    return o;
}

// ---- AC8 -------------------------------------------------------------------

// Amplitude of the least-squares sinusoid at a known rate.
double fitted_amplitude(const std::vector<double>& d, double fs, double f0)
{
    const double m = mean(d);
    double ss = 0, sc = 0, cc = 0, xs = 0, xc = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double w = 2.0 * pi * f0 * static_cast<double>(i) / fs;
        const double s = std::sin(w), c = std::cos(w);
        ss += s * s, cc += c * c, sc += s * c;
        xs += (d[i] - m) * s, xc += (d[i] - m) * c;
    }
    const double det = ss * cc - sc * sc;
    const double a = (xs * cc - xc * sc) / det, b = (xc * ss - xs * sc) / det;
    return std::hypot(a, b);
}

Outcome ac8()
{
    Outcome o;
    const RadarConfig vs = presets::vital_sign();
    const double lambda = derive_params(vs).wavelength_m;
    auto recovered = [&](double amp, double noise_std) {
        const double rate = 200.0;
        const Scene s = still_scene({Target::stationary(0.18, 0.5, {MicroMotion::fixed_tone(rate, amp)})}, noise_std, 5.0, 13);
        const auto prof = vital_profiles(s, vs, 2000);
        const auto ps = extract_phase(prof, select_target_bin(prof), vs.frame_rate_hz, lambda);
        double worst = 0.0;
        for (const auto& d : ps.displacement)
            worst = std::max(worst, std::abs(fitted_amplitude(d, vs.frame_rate_hz, rate / 60.0) - amp) / amp);
        return worst;
    };
    const double e100 = recovered(100e-6, 1e-3);
    o.require(e100 < 0.05, f2("100 um error %.2f%%", 100.0 * e100));
    // 30 dB per-sample SNR for the target echo amplitude at 0.18 m.
    const Scene probe = still_scene({Target::stationary(0.18, 0.5)});
    const double a = probe.target_amplitude(probe.targets[0], 0.18);
    const double sigma = a / std::sqrt(2.0) / std::pow(10.0, 30.0 / 20.0);
    const double e2 = recovered(2e-6, sigma);
    o.require(e2 < 0.5, f2("2 um error %.1f%% at 30 dB", 100.0 * e2));
    return o;
}

// ---- AC9 -------------------------------------------------------------------

Outcome ac9()
{
    Outcome o;
    const RadarConfig vs = presets::vital_sign();
    Scene s = still_scene({Target::stationary(0.18, mouse_rcs, {MicroMotion::cardiac(550.0, 20e-6)})}, default_noise_std, 25.0, 17);
    {
        const FrameSynthesizer syn(s, vs);
        const VitalsRun run = process_vitals(vs, synthetic_source(syn));
        double worst = 0.0;
        bool all = !run.windows.empty();
        for (const auto& w : run.windows) {
            if (!w.hr_bpm) {
                all = false;
                continue;
            }
            worst = std::max(worst, std::abs(*w.hr_bpm - 550.0));
        }
        o.require(all && worst <= 10.0, std::to_string(run.windows.size()) + f2(" cardiac-only windows, worst %.2f bpm", worst));
    }
    {
        const Scenario sc = sleeping_mouse(ClutterLevel::internal, 17);
        const FrameSynthesizer syn(sc.scene, vs);
        const VitalsRun run = process_vitals(vs, synthetic_source(syn));
        std::size_t present = 0, wrong = 0;
        for (const auto& w : run.windows) {
            if (!w.hr_bpm) continue;
            ++present;
            wrong += std::abs(*w.hr_bpm - *sc.hr_truth_bpm) > 15.0;
        }
        o.require(wrong == 0, "breathing+cardiac: " + std::to_string(present) + " of " + std::to_string(run.windows.size())
                                  + " windows report HR, " + std::to_string(wrong) + " wrong");
    }
    return o;
}

// ---- AC10 ------------------------------------------------------------------

Outcome ac10()
{
    Outcome o;
    const RadarConfig mv = presets::movement();
    {
        Scene s = still_scene({}, 1e-4, 6.0, 4);
        s.clutter = cage_clutter(ClutterLevel::full);
        const FrameSynthesizer syn(s, mv);
        RafState st(0.95);
        double before = 0.0, after = 0.0;
        for (std::size_t i = 0; i <= 200; ++i) {
            const RawFrame f = mean_removal(syn.frame(i));
            const auto r = raf_apply(st, f);
            if (i < 200) continue;
            before = movement_power(range_doppler(f, mv, {Window::hann, 4, 4, 1.0, true}));
            after = movement_power(range_doppler(r.filtered, mv, {Window::hann, 4, 4, 1.0, true}));
        }
        const double db = amplitude_db(before / after);
        o.require(db >= 20.0, f2("RAF %.1f dB", db));
    }
    {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        double worst = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
            std::vector<double> x(40);
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double t = static_cast<double>(i);
                x[i] = a + b * t + c * t * t + d * t * t * t;
            }
            const auto y = apply_valid(x, savgol_coefficients(7, 3, 2));
            for (std::size_t i = 0; i < y.size(); ++i) {
                const double truth = 2 * c + 6 * d * static_cast<double>(i + 3);
                worst = std::max(worst, std::abs(y[i] - truth) / std::max(1.0, std::abs(truth)));
            }
        }
        o.require(worst <= 1e-9, f2("SG rel err %.1e", worst));
    }
    {
        const std::size_t n = 128, k0 = 20;
        auto snr_db = [&](std::span<const double> x) {
            const auto X = fft::forward_real(x, n);
            double noise = 0.0;
            std::size_t cnt = 0;
            for (std::size_t k = 1; k < X.size() - 1; ++k)
                if (k + 2 < k0 || k > k0 + 2) noise += std::norm(X[k]), ++cnt;
            return 10.0 * std::log10(std::norm(X[k0]) / (noise / static_cast<double>(cnt)));
        };
        double gain = 0.0;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            std::mt19937_64 rng(seed);
            std::normal_distribution<double> g(0.0, 0.5);
            Frame<double> f(1, 16, n, 0);
            for (std::size_t c = 0; c < 16; ++c)
                for (std::size_t s = 0; s < n; ++s)
                    f.at(0, c, s) = std::cos(2.0 * pi * static_cast<double>(k0 * s) / static_cast<double>(n)) + g(rng);
            gain += snr_db(chirp_accumulate(f).chirp(0, 0)) - snr_db(f.chirp(0, 0));
        }
        gain /= 100.0;
        o.require(std::abs(gain - 12.04) <= 1.0, f2("chirp gain %.2f dB", gain));
    }
    {
        const RadarConfig vs = presets::vital_sign();
        std::mt19937_64 rng(77);
        std::uniform_int_distribution<std::uint32_t> bits;
        std::vector<RawFrame> frames;
        for (std::int64_t i = 0; i < 8; ++i) {
            RawFrame f = RawFrame::zeros_like(vs, i * 2500);
            for (float& v : f.samples) {
                do v = std::bit_cast<float>(bits(rng));
                while (std::isnan(v));
            }
            frames.push_back(std::move(f));
        }
        const DecodedStream d = decode_stream(encode_stream(vs, frames));
        bool same = d.config == vs && d.frames.size() == frames.size();
        for (std::size_t i = 0; same && i < frames.size(); ++i)
            same = d.frames[i].timestamp_us == frames[i].timestamp_us
                   && std::memcmp(d.frames[i].samples.data(), frames[i].samples.data(), frames[i].samples.size() * 4) == 0;
        o.require(same, "codec bit-identical");
    }
    {
        auto once = [] {
            const Scenario sc = two_mice(ClutterLevel::full, 9, 3.0);
            const RadarConfig cfg = presets::movement();
            const FrameSynthesizer syn(sc.scene, cfg);
            std::vector<RawFrame> frames;
            for (std::size_t i = 0; i < syn.frame_count(); ++i) frames.push_back(syn.frame(i));
            const DecodedStream d = decode_stream(encode_stream(cfg, frames));
            std::size_t k = 0;
            const MovementRun run = process_movement(cfg, [&]() -> std::optional<RawFrame> {
                if (k == d.frames.size()) return std::nullopt;
                return d.frames[k++];
            });
            return encode_stream(cfg, frames) + track_csv(run.track);
        };
        o.require(once() == once(), "seeded end-to-end byte-identical");
    }
    return o;
}

} // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
        {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10},
    };
    // Wall-clock budgets in seconds.
    const double budget[] = {1, 30, 60, 30, 30, 30, 30, 30, 60, 60};
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > budget[i]) o.require(false, f2("over %.0f s budget", budget[i]));
        std::printf("%-4s %s  (%.1f s)  %s\n", criteria[i].first, o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed ? 1 : 0;
}
