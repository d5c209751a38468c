#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support.hpp"

using namespace cagesense;
using namespace testsupport;

namespace {

using std::numbers::pi;
const RadarConfig vs = presets::vital_sign();
const double lambda = derive_params(vs).wavelength_m;

// Three identical antennas carrying displacement d(t) sampled at fs.
template <typename F>
PhaseSeries series_of(F d, double fs, double seconds, double noise_m = 0.0, std::uint64_t seed = 1)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, noise_m);
    const auto n = static_cast<std::size_t>(std::lround(fs * seconds));
    std::vector<std::vector<double>> ph(3, std::vector<double>(n));
    for (auto& a : ph)
        for (std::size_t i = 0; i < n; ++i)
            a[i] = displacement_to_phase(d(static_cast<double>(i) / fs) + (noise_m > 0 ? g(rng) : 0.0), lambda);
    return make_phase_series(std::move(ph), fs, lambda);
}

RangeProfile manual_profile(std::vector<double> mags, double spacing, std::int64_t t_us = 0)
{
    RangeProfile p;
    p.timestamp_us = t_us;
    p.n_antennas = 1;
    p.n_chirps = 1;
    p.n_bins = mags.size();
    p.bin_spacing_m = spacing;
    p.valid_from_bin = leakage_clip_bin(spacing);
    for (double m : mags) p.bins.emplace_back(m, 0.0);
    return p;
}

TEST(ChirpAccumulate, IdenticalChirpsPassThrough)
{
    Frame<double> f(2, 16, 32, 7);
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t c = 0; c < 16; ++c)
            for (std::size_t s = 0; s < 32; ++s) f.at(a, c, s) = std::sin(0.3 * static_cast<double>(s) + static_cast<double>(a));
    const auto out = chirp_accumulate(f);
    ASSERT_EQ(out.n_chirps, 1u);
    EXPECT_EQ(out.timestamp_us, 7);
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t s = 0; s < 32; ++s) EXPECT_NEAR(out.at(a, 0, s), f.at(a, 5, s), 1e-15);
}

TEST(ChirpAccumulate, AlternatingChirpsCancel)
{
    Frame<double> f(1, 16, 32, 0);
    for (std::size_t c = 0; c < 16; ++c)
        for (std::size_t s = 0; s < 32; ++s) f.at(0, c, s) = (c % 2 ? -1.0 : 1.0) * std::cos(0.7 * static_cast<double>(s));
    for (double v : chirp_accumulate(f).samples) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(ChirpAccumulate, SnrGainOverHundredSeeds)
{
    // Tone-bin SNR against the mean noise power of the bins away from the tone.
    const std::size_t n = 128, k0 = 20;
    const double sigma = 0.5;
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
        std::normal_distribution<double> g(0.0, sigma);
        Frame<double> f(1, 16, n, 0);
        for (std::size_t c = 0; c < 16; ++c)
            for (std::size_t s = 0; s < n; ++s)
                f.at(0, c, s) = std::cos(2.0 * pi * static_cast<double>(k0 * s) / static_cast<double>(n)) + g(rng);
        const auto acc = chirp_accumulate(f);
        gain += snr_db(acc.chirp(0, 0)) - snr_db(f.chirp(0, 0));
    }
    EXPECT_NEAR(gain / 100.0, 10.0 * std::log10(16.0), 1.0);
}

TEST(SelectTargetBin, OscillatingBinWins)
{
    std::vector<RangeProfile> h;
    for (int i = 0; i < 40; ++i) {
        std::vector<double> m(30, 1.0);
        m[17] = 1.0 + 0.5 * std::sin(0.4 * i);
        h.push_back(manual_profile(m, 0.01));
    }
    EXPECT_EQ(select_target_bin(h), 17u);
}

TEST(SelectTargetBin, LeakageBinsIgnored)
{
    std::vector<RangeProfile> h;
    for (int i = 0; i < 40; ++i) {
        std::vector<double> m(30, 1.0);
        m[3] = 1.0 + 5.0 * std::sin(0.4 * i);  // 3 cm
        m[20] = 1.0 + 0.5 * std::sin(0.4 * i); // 20 cm
        h.push_back(manual_profile(m, 0.01));
    }
    EXPECT_EQ(select_target_bin(h), 20u);
}

TEST(SelectTargetBin, TieGoesToNearerBin)
{
    std::vector<RangeProfile> h;
    for (int i = 0; i < 40; ++i) {
        std::vector<double> m(30, 1.0);
        m[8] = m[15] = (i % 2) ? 2.0 : 0.0;
        h.push_back(manual_profile(m, 0.01));
    }
    EXPECT_EQ(select_target_bin(h), 8u);
}

TEST(SelectTargetBin, EmptyHistory)
{
    try {
        (void)select_target_bin(std::span<const RangeProfile>{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::empty_history);
    }
}

TEST(ExtractPhase, StationaryReflectorGivesConstantPhase)
{
    const auto prof = vital_profiles(still_scene({Target::stationary(0.2, 0.5)}), vs, 100);
    const auto s = extract_phase(prof, static_cast<std::size_t>(std::lround(0.2 / prof[0].bin_spacing_m)), vs.frame_rate_hz, lambda);
    ASSERT_EQ(s.n_antennas(), 3u);
    for (const auto& a : s.phase)
        for (double v : a) EXPECT_NEAR(v, a[0], 1e-5);
}

TEST(ExtractPhase, ChestMotionAmplitude)
{
    const double amp = 0.3e-3;
    const Scene sc = still_scene({Target::stationary(0.17, 0.5, {MicroMotion::fixed_tone(200.0, amp)})}, 0.0, 2.0);
    const auto prof = vital_profiles(sc, vs, 600);
    const auto s = extract_phase(prof, select_target_bin(prof), vs.frame_rate_hz, lambda);
    for (const auto& d : s.displacement) {
        const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
        EXPECT_NEAR(0.5 * (*hi - *lo), amp, 0.03 * amp);
    }
}

TEST(ExtractPhase, DriftUnwrapsMonotonically)
{
    // 1 mm over 1 s is 2.5 rad of phase: several wraps with no jumps.
    Target t;
    t.waypoints = {{0.0, 0.20}, {1.0, 0.201}};
    const auto prof = vital_profiles(still_scene({t}, 0.0, 1.0), vs, 400);
    const auto s = extract_phase(prof, static_cast<std::size_t>(std::lround(0.2 / prof[0].bin_spacing_m)), vs.frame_rate_hz, lambda);
    for (const auto& p : s.phase) {
        for (std::size_t i = 1; i < p.size(); ++i) {
            EXPECT_GT(p[i], p[i - 1]);
            EXPECT_LT(p[i] - p[i - 1], pi);
        }
        EXPECT_NEAR(p.back() - p.front(), displacement_to_phase(1e-3 * 399.0 / 400.0, lambda), 0.05);
    }
    EXPECT_NEAR(s.displacement[0].back() - s.displacement[0].front(), 1e-3 * 399.0 / 400.0, 2e-5);
}

TEST(Unwrap, MatchesContinuousPhase)
{
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> step(-3.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> truth{step(rng)}, wrapped;
        for (int i = 0; i < 300; ++i) truth.push_back(truth.back() + step(rng));
        for (double v : truth) wrapped.push_back(std::remainder(v, 2.0 * pi));
        const auto u = unwrap(wrapped);
        const double k = (truth[0] - u[0]) / (2.0 * pi);
        EXPECT_NEAR(k, std::round(k), 1e-9);
        for (std::size_t i = 0; i < u.size(); ++i) ASSERT_NEAR(u[i] + 2.0 * pi * std::round(k), truth[i], 1e-9);
    }
}

TEST(Rr, CleanToneAtTwoHundred)
{
    const auto s = series_of([](double t) { return 0.3e-3 * std::sin(2.0 * pi * (200.0 / 60.0) * t); }, 400.0, 15.0);
    const auto r = rr_estimate(s);
    ASSERT_TRUE(r.rr_bpm);
    EXPECT_NEAR(*r.rr_bpm, 200.0, 2.0);
    EXPECT_GT(r.confidence, 0.9);
}

TEST(Rr, TwoAndAHalfHertzIsOneFifty)
{
    const auto s = series_of([](double t) { return 0.3e-3 * std::sin(2.0 * pi * 2.5 * t); }, 400.0, 15.0);
    const auto r = rr_estimate(s);
    ASSERT_TRUE(r.rr_bpm);
    EXPECT_NEAR(*r.rr_bpm, 150.0, 0.01);
}

TEST(Rr, WhiteNoiseIsRejected)
{
    int rejected = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto s = series_of([](double) { return 0.0; }, 400.0, 15.0, 50e-6, seed);
        const auto r = rr_estimate(s);
        if (!r.rr_bpm || r.confidence < 0.3) ++rejected;
    }
    EXPECT_GE(rejected, 95);
}

TEST(Rr, ScaleInvariant)
{
    auto d = [](double t) { return 0.2e-3 * std::sin(2.0 * pi * 3.7 * t) + 0.05e-3 * std::sin(2.0 * pi * 0.4 * t); };
    const auto s = series_of(d, 400.0, 15.0, 5e-6, 3);
    const auto base = rr_estimate(s.displacement[0], s.rate_hz);
    ASSERT_TRUE(base.rr_bpm);
    for (double k : {0.01, 0.5, 7.0, 1e3}) {
        std::vector<double> y(s.displacement[0]);
        for (double& v : y) v *= k;
        const auto r = rr_estimate(y, s.rate_hz);
        ASSERT_TRUE(r.rr_bpm);
        EXPECT_NEAR(*r.rr_bpm, *base.rr_bpm, 1e-6 * *base.rr_bpm) << k;
    }
}

TEST(Rr, MedianFusionIgnoresOneBadAntenna)
{
    for (double bad : {150.0, 250.0}) {
        const std::vector<std::optional<double>> v{200.0, bad, 200.0};
        EXPECT_EQ(fuse(v), 200.0);
    }
    const std::vector<std::optional<double>> none{std::nullopt, std::nullopt};
    EXPECT_FALSE(fuse(none));
}

TEST(Rr, ShortWindowRejected)
{
    std::vector<double> y(400 * 4);
    EXPECT_THROW(rr_estimate(y, 400.0), Error);
}

TEST(Hr, CardiacPulseTrain)
{
    const auto m = MicroMotion::cardiac(550.0, 20e-6);
    const auto s = series_of([&](double t) { return m.displacement(t); }, 400.0, 15.0, 0.2e-6, 4);
    const auto h = hr_estimate(s);
    ASSERT_TRUE(h.hr_bpm);
    EXPECT_NEAR(*h.hr_bpm, 550.0, 10.0);
}

TEST(Hr, BreathingOnlyIsAbsent)
{
    const auto s = series_of([](double t) { return 0.3e-3 * std::sin(2.0 * pi * 3.0 * t); }, 400.0, 15.0, 0.2e-6, 5);
    EXPECT_FALSE(hr_estimate(s).hr_bpm);
}

TEST(Hr, NyquistViolation)
{
    const auto s = series_of([](double t) { return 1e-4 * std::sin(t); }, 20.0, 15.0);
    try {
        (void)hr_estimate(s);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::nyquist_violation);
    }
}

TEST(Hr, RectificationIdentity)
{
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g;
    std::vector<double> x(500);
    for (double& v : x) v = g(rng);
    const auto r = rectify(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_EQ(r[i], std::abs(x[i]));
        EXPECT_EQ(std::max(x[i], 0.0) + std::abs(std::min(x[i], 0.0)), std::abs(x[i]));
    }
}

TEST(VitalsProcessor, EmitsSlidingWindows)
{
    Scenario sc = sleeping_mouse(ClutterLevel::internal, 2);
    sc.scene.duration_s = 25.0;
    FrameSynthesizer syn(sc.scene, vs);
    const VitalsRun run = process_vitals(vs, synthetic_source(syn));
    ASSERT_EQ(run.windows.size(), 3u); // windows at 0, 5 and 10 s
    for (std::size_t i = 0; i < run.windows.size(); ++i) {
        EXPECT_NEAR(run.windows[i].window_start_s, 5.0 * static_cast<double>(i), 1e-9);
        EXPECT_NEAR(run.windows[i].window_len_s, 15.0, 1e-9);
        ASSERT_TRUE(run.windows[i].rr_bpm);
        EXPECT_NEAR(*run.windows[i].rr_bpm, 180.0, 2.0);
        EXPECT_NEAR(run.windows[i].target_range_m, 0.18, 0.03);
        EXPECT_EQ(run.windows[i].per_antenna_rr.size(), 3u);
    }
}

TEST(VitalsProcessor, ShortRecordingFallsBackToOneWindow)
{
    Scenario sc = sleeping_mouse(ClutterLevel::empty, 2);
    sc.scene.duration_s = 8.0;
    FrameSynthesizer syn(sc.scene, vs);
    const VitalsRun run = process_vitals(vs, synthetic_source(syn));
    ASSERT_EQ(run.windows.size(), 1u);
    EXPECT_NEAR(*run.windows[0].rr_bpm, 180.0, 2.0);
}

TEST(VitalsProcessor, RejectsMovementConfig)
{
    try {
        VitalsProcessor p(presets::movement());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::config_mismatch);
    }
}

} // namespace
