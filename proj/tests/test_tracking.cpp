#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"

using namespace cagesense;
using namespace testsupport;

namespace {

const RadarConfig mv = presets::movement();

TEST(EstimateRange, TargetAtThirtySixCentimetres)
{
    // Moving so the RAF keeps it.
    Target t;
    t.waypoints = {{0.0, 0.355}, {0.5, 0.365}, {1.0, 0.355}};
    t.micro_motions = {MicroMotion::breathing()};
    const Scene s = still_scene({t}, 1e-3, 1.0);
    MovementProcessor proc(mv);
    const FrameSynthesizer syn(s, mv);
    for (std::size_t i = 0; i < syn.frame_count(); ++i) {
        const auto est = proc.process(syn.frame(i));
        if (est.warmup || i < 4) continue;
        ASSERT_TRUE(est.range_m);
        EXPECT_NEAR(*est.range_m, t.trajectory_range(syn.frame_time(i)), 0.015);
    }
}

TEST(EstimateRange, ZeroProfileHasNoTarget)
{
    EXPECT_FALSE(estimate_range(std::vector<double>(50, 0.0), 0.0075, 7));
}

TEST(EstimateRange, StrongerOfTwoWins)
{
    std::vector<double> p(100, 0.0);
    const double dx = 0.0075;
    auto bump = [&](double r, double a) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double u = (static_cast<double>(i) * dx - r) / 0.01;
            p[i] += a * std::exp(-u * u);
        }
    };
    bump(0.10, 2.0);
    bump(0.30, 1.0);
    EXPECT_NEAR(*estimate_range(p, dx, 7), 0.10, 0.002);
}

TEST(EstimateRange, ParabolicRefinement)
{
    // Samples of a parabola with its vertex between bins.
    std::vector<double> p(20, 0.0);
    for (std::size_t i = 8; i <= 12; ++i) p[i] = 10.0 - (static_cast<double>(i) - 10.3) * (static_cast<double>(i) - 10.3);
    EXPECT_NEAR(*estimate_range(p, 0.01, 0), 0.103, 1e-12);
}

TEST(Zones, BoundaryConvention)
{
    const ZoneConfig z;
    EXPECT_NEAR(z.b1_m, 0.37 / 3.0, 1e-3);
    EXPECT_NEAR(z.b2_m, 2.0 * 0.37 / 3.0, 1e-3);
    EXPECT_EQ(classify_zone(z.b1_m, z), Zone::middle);
    EXPECT_EQ(classify_zone(z.b2_m, z), Zone::far);
    EXPECT_EQ(classify_zone(0.30, z), Zone::far);
    EXPECT_EQ(classify_zone(0.06, z), Zone::near);
    EXPECT_EQ(classify_zone(0.2, z), Zone::middle);
}

TEST(Zones, InvalidConfigRejected)
{
    ZoneConfig z;
    z.b1_m = 0.3;
    z.b2_m = 0.2;
    EXPECT_THROW(validate(z), Error);
    z = ZoneConfig{};
    z.b1_m = 0.04;
    EXPECT_THROW(validate(z), Error);
    z = ZoneConfig{};
    EXPECT_THROW(validate(z, 0.3), Error); // cage longer than d_max
    EXPECT_NO_THROW(validate(ZoneConfig{}, 3.8));
}

TEST(Activity, ZeroPowerIsQuasiStatic)
{
    std::vector<TrackEstimate> track(80);
    for (std::size_t i = 0; i < track.size(); ++i) track[i].t_s = static_cast<double>(i) / 40.0;
    label_activity(track, 40.0);
    for (const auto& t : track) EXPECT_EQ(t.activity, Activity::quasi_static);

    const std::vector<double> zeros(80, 0.0);
    const auto labels = classify_activity(zeros, 40.0, ActivityThresholds::from_baseline(1.0));
    for (auto l : labels) EXPECT_EQ(l, Activity::quasi_static);
}

TEST(Activity, HysteresisPreventsChatter)
{
    const auto th = ActivityThresholds::from_baseline(1.0);
    std::vector<double> p;
    for (int i = 0; i < 400; ++i) p.push_back(th.theta_dyn * (i % 2 ? 1.05 : 0.95));
    for (int start : {0, 1}) {
        const auto labels = classify_activity(std::span<const double>(p).subspan(static_cast<std::size_t>(start)), 40.0, th);
        for (auto l : labels) EXPECT_EQ(l, labels.front());
    }
    // Raw classifier without smoothing: still a single label.
    ActivityClassifier c(th);
    const Activity first = c.step(p[0]);
    for (double v : p) EXPECT_EQ(c.step(v), first);
}

TEST(Activity, ThreeLevels)
{
    const auto th = ActivityThresholds::from_baseline(1.0);
    std::vector<double> p;
    for (int i = 0; i < 200; ++i) p.push_back(0.8);
    for (int i = 0; i < 200; ++i) p.push_back(5.0);
    for (int i = 0; i < 200; ++i) p.push_back(30.0);
    const auto l = classify_activity(p, 40.0, th);
    EXPECT_EQ(l[100], Activity::quasi_static);
    EXPECT_EQ(l[300], Activity::static_movement);
    EXPECT_EQ(l[500], Activity::dynamic);
}

TEST(Activity, RelativeModeIsScaleInvariant)
{
    std::mt19937_64 rng(2);
    std::lognormal_distribution<double> g(0.0, 0.3);
    std::vector<double> p;
    for (int seg = 0; seg < 6; ++seg) {
        const double level = seg % 3 == 0 ? 1.0 : seg % 3 == 1 ? 6.0 : 40.0;
        for (int i = 0; i < 240; ++i) p.push_back(level * g(rng));
    }
    const auto ref = classify_activity(p, 40.0, relative_thresholds(p, 40.0));
    for (double k : {1e-6, 0.3, 17.0, 1e9}) {
        std::vector<double> q(p);
        for (double& v : q) v *= k;
        EXPECT_EQ(classify_activity(q, 40.0, relative_thresholds(q, 40.0)), ref) << k;
    }
}

TEST(Activity, Errors)
{
    const std::vector<double> p(100, 1.0);
    try {
        (void)classify_activity(p, 40.0, std::nullopt);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::unset_thresholds);
    }
    EXPECT_THROW((void)classify_activity(std::span<const double>(p).first(20), 40.0, ActivityThresholds::from_baseline(1.0)), Error);
    EXPECT_THROW((void)calibrate_thresholds(std::vector<double>(100, 0.0), 40.0), Error);
}

TEST(Activity, CalibrationUsesFirstFiveSeconds)
{
    std::vector<double> p(200, 2.0);
    p.insert(p.end(), 200, 50.0);
    const auto th = calibrate_thresholds(p, 40.0);
    EXPECT_DOUBLE_EQ(th.baseline, 2.0);
    EXPECT_DOUBLE_EQ(th.theta_qs, 6.0);
    EXPECT_DOUBLE_EQ(th.theta_dyn, 20.0);
}

RangeDopplerMap two_mouse_map(bool noisy = true, std::size_t frame = 30)
{
    const Scenario sc = two_mice(ClutterLevel::internal, 1, 2.0);
    Scene s = sc.scene;
    if (!noisy) s.noise_std = 0.0;
    const FrameSynthesizer syn(s, mv);
    MovementProcessor proc(mv);
    RangeDopplerMap m;
    for (std::size_t i = 0; i <= frame; ++i) (void)proc.process(syn.frame(i), &m);
    return m;
}

TEST(Peaks, TwoMiceFoundNearTruth)
{
    const Scenario sc = two_mice(ClutterLevel::internal, 1, 2.0);
    const FrameSynthesizer syn(sc.scene, mv);
    MovementProcessor proc(mv);
    const auto d = derive_params(mv);
    int good = 0, total = 0;
    for (std::size_t i = 0; i < syn.frame_count(); ++i) {
        const RawFrame f = syn.frame(i);
        const auto est = proc.process(f);
        if (i < 5) continue;
        ++total;
        const double t = truth_time(f, mv);
        bool both = true;
        for (const auto& tg : sc.scene.targets) {
            bool hit = false;
            for (const auto& p : est.peaks)
                hit = hit || (std::abs(p.range_m - tg.trajectory_range(t)) <= d.d_res_m
                              && std::abs(p.velocity_mps - tg.trajectory_velocity(t)) <= d.v_res_mps);
            both = both && hit;
        }
        good += both;
    }
    EXPECT_GE(good, total * 9 / 10);
}

TEST(Peaks, EmptyMapGivesNothing)
{
    RangeDopplerMap m;
    m.n_antennas = 1;
    m.n_range = 40;
    m.n_doppler = 64;
    m.range_spacing_m = 0.0075;
    m.velocity_spacing_mps = 0.026;
    m.valid_from_bin = 7;
    m.power.assign(40 * 64, 0.0);
    EXPECT_TRUE(detect_peaks(m).empty());
}

TEST(Peaks, SortedAndMonotoneInMaxTargets)
{
    const auto m = two_mouse_map();
    std::vector<Peak> prev;
    for (std::size_t k = 1; k <= 6; ++k) {
        PeakOptions o;
        o.max_targets = k;
        const auto p = detect_peaks(m, o);
        EXPECT_LE(p.size(), k);
        for (std::size_t i = 1; i < p.size(); ++i) EXPECT_GE(p[i - 1].power, p[i].power);
        for (const auto& q : prev) {
            bool found = false;
            for (const auto& r : p) found = found || (r.range_bin == q.range_bin && r.doppler_bin == q.doppler_bin);
            EXPECT_TRUE(found);
        }
        for (const auto& r : p) EXPECT_GE(r.range_m, leakage_floor_m);
        prev = p;
    }
}

TEST(Peaks, RangeCompensationEqualisesEqualTargets)
{
    // Equal reflectivity at 0.10 m and 0.30 m, both moving.
    Target a, b;
    a.waypoints = {{0.0, 0.10}, {0.1, 0.10 + 0.04}};
    b.waypoints = {{0.0, 0.30}, {0.1, 0.30 - 0.06}};
    a.rcs_amplitude = b.rcs_amplitude = 0.5;
    Scene s = still_scene({a, b}, 1e-4);
    s.duration_s = 0.1;
    const RawFrame f = mean_removal(synthesize_frame(s, mv, 0));
    const auto m = range_doppler(f, mv, {Window::hann, 4, 4, 1.0, true});
    auto two = [&](bool comp) {
        PeakOptions o;
        o.range_compensation = comp;
        auto p = detect_peaks(m, o);
        EXPECT_EQ(p.size(), 2u);
        std::sort(p.begin(), p.end(), [](const Peak& x, const Peak& y) { return x.range_m < y.range_m; });
        return p;
    };
    const auto raw = two(false);
    const auto comp = two(true);
    ASSERT_EQ(comp.size(), 2u);
    EXPECT_NEAR(raw[0].range_m, 0.10, 0.015);
    EXPECT_NEAR(raw[1].range_m, 0.30, 0.015);
    EXPECT_LT(raw[1].power, raw[0].power);
    EXPECT_NEAR(comp[1].power / comp[0].power, 1.0, 0.25);
}

TEST(Peaks, NoiseOnlyMapIsQuiet)
{
    Scene s = still_scene({}, 1e-3, 1.0);
    s.clutter = cage_clutter(ClutterLevel::full);
    const FrameSynthesizer syn(s, mv);
    MovementProcessor proc(mv);
    for (std::size_t i = 0; i < syn.frame_count(); ++i) {
        const auto est = proc.process(syn.frame(i));
        if (i > 20) {
            EXPECT_TRUE(est.peaks.empty()) << i;
        }
    }
}

TEST(Track, ZoneAccuracyNoiseless)
{
    // Short noiseless excerpt of the wandering route; the full-length runs
    // live in the acceptance suite.
    Scenario sc = single_mouse(ClutterLevel::internal, 1, 20.0);
    sc.scene.noise_std = 0.0;
    const FrameSynthesizer syn(sc.scene, mv);
    const MovementRun run = process_movement(mv, synthetic_source(syn));
    const auto z = zone_range_score(run, sc.scene.targets[0], sc.zones);
    EXPECT_GE(z.zone.pct, 99.0);
    EXPECT_LT(z.range.mae_m, 0.015 + 0.005);
}

} // namespace
