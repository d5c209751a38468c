#pragma once

// Scenario runner: drives the pipelines over synthetic or recorded frames,
// scores the result against the scene's ground truth and writes a report
// plus plot data into a run directory.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cagesense/error.hpp"
#include "cagesense/metrics.hpp"
#include "cagesense/pipeline.hpp"
#include "cagesense/plot_data.hpp"
#include "cagesense/radar_model.hpp"
#include "cagesense/scenarios.hpp"
#include "cagesense/simulator.hpp"
#include "cagesense/stream_io.hpp"

namespace cagesense {

using FrameSource = std::function<std::optional<RawFrame>()>;

inline FrameSource synthetic_source(const FrameSynthesizer& syn)
{
    return [&syn, i = std::size_t{0}]() mutable -> std::optional<RawFrame> {
        if (i >= syn.frame_count()) return std::nullopt;
        return syn.frame(i++);
    };
}

inline FrameSource file_source(StreamReader& reader)
{
    return [&reader]() { return reader.next(); };
}

/// Instant the simulated truth is sampled at for a frame: mid burst.
inline double truth_time(const RawFrame& f, const RadarConfig& c)
{
    return f.timestamp_s() + 0.5 * static_cast<double>(c.n_chirps) * c.chirp_repetition_s;
}

// ---- pipeline drivers -------------------------------------------------------

struct MovementRun {
    std::vector<TrackEstimate> track;
    std::vector<double> truth_time_s;
    ActivityThresholds thresholds;
    std::vector<RangeDopplerMap> per_second_maps;
};

inline MovementRun process_movement(const RadarConfig& config, const FrameSource& next, const MovementOptions& opt = {},
                                    std::optional<ActivityThresholds> thresholds = std::nullopt, bool keep_maps = false)
{
    MovementProcessor proc(config, opt);
    MovementRun run;
    const auto per_second = static_cast<std::int64_t>(std::llround(config.frame_rate_hz));
    std::int64_t n = 0;
    while (auto f = next()) {
        const bool keep = keep_maps && per_second > 0 && n % per_second == 0;
        RangeDopplerMap map;
        run.track.push_back(proc.process(*f, keep ? &map : nullptr));
        run.truth_time_s.push_back(truth_time(*f, config));
        if (keep) run.per_second_maps.push_back(std::move(map));
        ++n;
    }
    if (run.track.empty()) throw Error(ErrorCode::empty_series, "recording holds no frames");
    run.thresholds = label_activity(run.track, config.frame_rate_hz, thresholds);
    return run;
}

/// Thresholds from a calibration recording (RAF warm-up left out).
inline ActivityThresholds calibration_thresholds(const Scene& calibration, const RadarConfig& config,
                                                 const MovementOptions& opt = {})
{
    FrameSynthesizer syn(calibration, config);
    MovementProcessor proc(config, opt);
    std::vector<double> p;
    for (std::size_t i = 0; i < syn.frame_count(); ++i) {
        const auto t = proc.process(syn.frame(i));
        if (!t.warmup) p.push_back(t.movement_power);
    }
    return calibrate_thresholds(p, config.frame_rate_hz);
}

struct VitalsRun {
    std::vector<VitalsEstimate> windows;
    PhaseSeries last_series;
};

inline VitalsRun process_vitals(const RadarConfig& config, const FrameSource& next, const VitalsOptions& opt = {})
{
    VitalsProcessor proc(config, opt);
    VitalsRun run;
    std::size_t frames = 0;
    while (auto f = next()) {
        ++frames;
        if (auto e = proc.push(*f)) run.windows.push_back(std::move(*e));
    }
    if (frames == 0) throw Error(ErrorCode::empty_series, "recording holds no frames");
    if (run.windows.empty())
        if (auto e = proc.finish()) run.windows.push_back(std::move(*e));
    run.last_series = proc.last_series();
    return run;
}

// ---- scoring ----------------------------------------------------------------

/// Frames in which each of the first two targets has a detected peak within
/// `range_tol` and `vel_tol` of its simulated state, counted over frames whose
/// target separation exceeds `min_separation` (warm-up left out).
struct SeparationScore {
    double pct = 0.0;
    std::size_t n_eligible = 0;
    std::size_t n_hit = 0;
};

inline SeparationScore separation_score(const MovementRun& run, const Scene& scene, double range_tol_m, double vel_tol_mps,
                                        double min_separation_m)
{
    if (scene.targets.size() < 2) throw Error(ErrorCode::invalid_argument, "separation needs two targets");
    SeparationScore s;
    const Target& a = scene.targets[0];
    const Target& b = scene.targets[1];
    for (std::size_t i = 0; i < run.track.size(); ++i) {
        const auto& t = run.track[i];
        if (t.warmup) continue;
        const double tt = run.truth_time_s[i];
        const double ra = a.trajectory_range(tt), rb = b.trajectory_range(tt);
        if (std::abs(ra - rb) <= min_separation_m) continue;
        ++s.n_eligible;
        auto found = [&](double r, double v) {
            return std::any_of(t.peaks.begin(), t.peaks.end(), [&](const Peak& p) {
                return std::abs(p.range_m - r) <= range_tol_m && std::abs(p.velocity_mps - v) <= vel_tol_mps;
            });
        };
        if (found(ra, a.trajectory_velocity(tt)) && found(rb, b.trajectory_velocity(tt))) ++s.n_hit;
    }
    if (s.n_eligible == 0) throw Error(ErrorCode::no_estimates, "targets never separated by more than the limit");
    s.pct = 100.0 * static_cast<double>(s.n_hit) / static_cast<double>(s.n_eligible);
    return s;
}

struct ZoneRangeScore {
    AgreementScore zone;
    RangeScore range;
};

inline ZoneRangeScore zone_range_score(const MovementRun& run, const Target& target, const ZoneConfig& zones)
{
    const std::size_t n = run.track.size();
    std::vector<std::optional<Zone>> ez(n);
    std::vector<Zone> tz(n);
    std::vector<std::optional<double>> er(n);
    std::vector<double> tr(n);
    std::unique_ptr<bool[]> skip(new bool[n]);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& t = run.track[i];
        tr[i] = target.trajectory_range(run.truth_time_s[i]);
        tz[i] = classify_zone(tr[i], zones);
        ez[i] = t.range_m ? std::optional<Zone>(classify_zone(*t.range_m, zones)) : std::nullopt;
        er[i] = t.range_m;
        skip[i] = t.warmup;
    }
    const std::span<const bool> sk(skip.get(), n);
    return {label_agreement<Zone>(ez, tz, sk), range_error(er, tr, sk)};
}

struct ActivityScore {
    AgreementScore agreement;
    double mean_power[3] = {0.0, 0.0, 0.0}; // indexed by Activity
    double dm_over_sm_db = 0.0;
    double sm_over_qs_db = 0.0;
};

inline ActivityScore activity_score(const MovementRun& run, const Scenario& sc)
{
    const std::size_t n = run.track.size();
    std::vector<std::optional<Activity>> est(n);
    std::vector<Activity> truth(n);
    std::unique_ptr<bool[]> skip(new bool[n]);
    double sum[3] = {0, 0, 0};
    std::size_t cnt[3] = {0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        const auto& t = run.track[i];
        const auto label = sc.activity_at(t.t_s);
        skip[i] = t.warmup || !label;
        truth[i] = label.value_or(Activity::quasi_static);
        est[i] = t.activity;
        if (skip[i]) continue;
        const auto k = static_cast<std::size_t>(*label);
        sum[k] += t.movement_power;
        ++cnt[k];
    }
    ActivityScore s;
    s.agreement = label_agreement<Activity>(est, truth, {skip.get(), n});
    for (std::size_t k = 0; k < 3; ++k) s.mean_power[k] = cnt[k] ? sum[k] / static_cast<double>(cnt[k]) : 0.0;
    const double qs = s.mean_power[static_cast<int>(Activity::quasi_static)];
    const double sm = s.mean_power[static_cast<int>(Activity::static_movement)];
    const double dm = s.mean_power[static_cast<int>(Activity::dynamic)];
    s.dm_over_sm_db = sm > 0.0 ? amplitude_db(dm / sm) : 0.0;
    s.sm_over_qs_db = qs > 0.0 ? amplitude_db(sm / qs) : 0.0;
    return s;
}

/// Mean movement power inside [t0, t1).
inline double mean_power(const MovementRun& run, double t0, double t1)
{
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& t : run.track) {
        if (t.warmup || t.t_s < t0 || t.t_s >= t1) continue;
        s += t.movement_power;
        ++n;
    }
    return n ? s / static_cast<double>(n) : 0.0;
}

// ---- report -----------------------------------------------------------------

struct Metric {
    std::string name;
    std::optional<double> value;
    std::string unit;
    std::string definition;
};

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct RunReport {
    std::string scenario;
    std::string preset;
    std::string clutter;
    std::uint64_t seed = 0;
    double duration_s = 0.0;
    std::size_t frames = 0;
    double runtime_s = 0.0;
    ZoneConfig zones{};
    std::vector<Metric> metrics;
    std::vector<Check> checks;
    std::vector<std::string> artifacts;

    [[nodiscard]] bool passed() const
    {
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
    }

    [[nodiscard]] const Metric* metric(const std::string& name) const
    {
        for (const auto& m : metrics)
            if (m.name == name) return &m;
        return nullptr;
    }

    void set(const std::string& name, std::optional<double> value, std::string unit, std::string definition)
    {
        for (auto& m : metrics)
            if (m.name == name) {
                m = {name, value, std::move(unit), std::move(definition)};
                return;
            }
        metrics.push_back({name, value, std::move(unit), std::move(definition)});
    }

    void check(std::string name, bool ok, std::string detail) { checks.push_back({std::move(name), ok, std::move(detail)}); }
};

inline nlohmann::ordered_json to_json(const RunReport& r)
{
    nlohmann::ordered_json j;
    j["scenario"] = r.scenario;
    j["config_preset"] = r.preset;
    j["clutter"] = r.clutter;
    j["seed"] = r.seed;
    j["duration_s"] = r.duration_s;
    j["frames"] = r.frames;
    j["runtime_s"] = r.runtime_s;
    j["zone_boundaries_m"] = {{"b1", r.zones.b1_m}, {"b2", r.zones.b2_m}, {"cage_length", r.zones.cage_length_m}};
    auto& m = j["metrics"] = nlohmann::ordered_json::object();
    for (const auto& x : r.metrics) {
        m[x.name] = {{"value", x.value ? nlohmann::ordered_json(*x.value) : nlohmann::ordered_json(nullptr)},
                     {"unit", x.unit},
                     {"definition", x.definition}};
    }
    auto& c = j["checks"] = nlohmann::ordered_json::array();
    for (const auto& x : r.checks) c.push_back({{"name", x.name}, {"passed", x.passed}, {"detail", x.detail}});
    j["passed"] = r.passed();
    j["artifacts"] = r.artifacts;
    return j;
}

inline RunReport report_from_json(const nlohmann::json& j)
{
    try {
        RunReport r;
        r.scenario = j.at("scenario").get<std::string>();
        r.preset = j.at("config_preset").get<std::string>();
        r.clutter = j.at("clutter").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.duration_s = j.at("duration_s").get<double>();
        r.frames = j.at("frames").get<std::size_t>();
        r.runtime_s = j.at("runtime_s").get<double>();
        const auto& z = j.at("zone_boundaries_m");
        r.zones = {z.at("b1").get<double>(), z.at("b2").get<double>(), z.at("cage_length").get<double>()};
        for (const auto& [name, m] : j.at("metrics").items()) {
            const auto& v = m.at("value");
            r.metrics.push_back({name, v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()),
                                 m.at("unit").get<std::string>(), m.at("definition").get<std::string>()});
        }
        for (const auto& c : j.at("checks"))
            r.checks.push_back({c.at("name").get<std::string>(), c.at("passed").get<bool>(), c.at("detail").get<std::string>()});
        r.artifacts = j.at("artifacts").get<std::vector<std::string>>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::malformed_file, std::string("run report: ") + e.what());
    }
}

// ---- validation -------------------------------------------------------------

namespace detail {

inline std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

inline void standard_metrics(RunReport& r)
{
    // Always present so reports line up; null where a scenario has no truth.
    r.set("rr_mae_bpm", std::nullopt, "bpm", RrScore::definition);
    r.set("rr_accuracy_pct", std::nullopt, "%", RrScore::definition);
    r.set("zone_accuracy_pct", std::nullopt, "%", zone_accuracy_definition);
    r.set("activity_agreement_pct", std::nullopt, "%", activity_agreement_definition);
    r.set("range_mae_m", std::nullopt, "m", RangeScore::definition);
}

inline void validate_movement(const Scenario& sc, const RadarConfig& cfg, const std::filesystem::path& dir, RunReport& r)
{
    MovementOptions opt;
    opt.zones = sc.zones;
    std::optional<ActivityThresholds> th;
    if (sc.calibration) th = calibration_thresholds(*sc.calibration, cfg, opt);
    FrameSynthesizer syn(sc.scene, cfg);
    const bool maps = sc.name == "puppet-move";
    const MovementRun run = process_movement(cfg, synthetic_source(syn), opt, th, maps);
    r.frames = run.track.size();

    write_file_atomic(dir / "track.csv", track_csv(run.track));
    r.artifacts.push_back("track.csv");
    emit_frame_power(dir / "frame_power.csv", run.track);
    r.artifacts.push_back("frame_power.csv");
    if (maps) {
        for (const auto& p : emit_range_doppler_sequence(dir / "range_doppler", run.per_second_maps))
            r.artifacts.push_back(std::filesystem::relative(p, dir).string());
    }
    r.set("activity_baseline_power", run.thresholds.baseline, "L2 norm",
          th ? "median smoothed movement power over the first 5 s of the calibration scene"
             : "lowest 5 s windowed median of the smoothed movement power");

    // Zones are scored where a target is always visible after clutter removal
    // (a breathing animal); a still puppet vanishes by design.
    if (sc.name == "single-mouse") {
        const auto zr = zone_range_score(run, sc.scene.targets[0], sc.zones);
        r.set("zone_accuracy_pct", zr.zone.pct, "%", zone_accuracy_definition);
        r.set("range_mae_m", zr.range.mae_m, "m", RangeScore::definition);
    }
    if (sc.name == "single-mouse") {
        const double v = r.metric("zone_accuracy_pct")->value.value_or(0.0);
        r.check("zone accuracy >= 93%", v >= 93.0, fmt("%.2f%%", v));
    }
    if (sc.name == "two-mice") {
        const auto p = derive_params(cfg);
        const auto s = separation_score(run, sc.scene, p.d_res_m, p.v_res_mps, p.d_res_m);
        r.set("two_target_detection_pct", s.pct, "%",
              "frames with target separation > d_res where both animals have a peak within +-1 range bin (d_res) "
              "and +-1 Doppler bin (v_res) of truth");
        r.check("both animals resolved in >= 95% of separated frames", s.pct >= 95.0, fmt("%.2f%%", s.pct));
    }
    if (sc.name == "activity-levels") {
        const auto a = activity_score(run, sc);
        r.set("activity_agreement_pct", a.agreement.pct, "%", activity_agreement_definition);
        r.set("power_dm_over_sm_db", a.dm_over_sm_db, "dB", "20*log10 of mean movement power ratio, dynamic vs static movement");
        r.set("power_sm_over_qs_db", a.sm_over_qs_db, "dB", "20*log10 of mean movement power ratio, static movement vs quasi-static");
        r.check("activity agreement >= 90%", a.agreement.pct >= 90.0, fmt("%.2f%%", a.agreement.pct));
        r.check("DM over SM >= 6 dB", a.dm_over_sm_db >= 6.0, fmt("%.2f dB", a.dm_over_sm_db));
        r.check("SM over QS >= 6 dB", a.sm_over_qs_db >= 6.0, fmt("%.2f dB", a.sm_over_qs_db));
    }
    if (sc.name == "puppet-move") {
        // Rest stretches start well after the RAF trail of the previous move.
        const double rest = std::max(mean_power(run, 1.0, 4.5), mean_power(run, 14.0, 19.5));
        const double hump1 = mean_power(run, 5.0, 10.0), hump2 = mean_power(run, 20.0, 25.0);
        const double contrast = rest > 0.0 ? amplitude_db(std::min(hump1, hump2) / rest) : 0.0;
        r.set("hump_contrast_db", contrast, "dB",
              "20*log10 of the weaker of the mean movement powers over 5-10 s and 20-25 s versus the stronger rest stretch (1-4.5 s, 14-19.5 s)");
        r.check("movement humps stand >= 6 dB above rest", contrast >= 6.0, fmt("%.2f dB", contrast));
    }
    if (sc.name == "empty-cage") {
        std::size_t with_peaks = 0, scored = 0;
        for (const auto& t : run.track) {
            if (t.warmup) continue;
            ++scored;
            with_peaks += !t.peaks.empty();
        }
        const double pct = 100.0 * static_cast<double>(with_peaks) / static_cast<double>(std::max<std::size_t>(scored, 1));
        r.set("frames_with_peaks_pct", pct, "%", "share of post warm-up frames in which detect_peaks reports any target");
    }
}

inline void validate_vitals(const Scenario& sc, const RadarConfig& cfg, const std::filesystem::path& dir, RunReport& r)
{
    FrameSynthesizer syn(sc.scene, cfg);
    const VitalsRun run = process_vitals(cfg, synthetic_source(syn));
    r.frames = syn.frame_count();
    write_file_atomic(dir / "vitals.csv", vitals_csv(run.windows));
    r.artifacts.push_back("vitals.csv");
    if (run.last_series.length() > 0) {
        emit_displacement_zoom(dir / "displacement_zoom.csv", run.last_series, 0.0, 0.5);
        r.artifacts.push_back("displacement_zoom.csv");
        emit_spectrum(dir / "spectrum.csv", spectral_peak(run.last_series, 0.0, 1e9).spectrum, 15.0);
        r.artifacts.push_back("spectrum.csv");
    }

    std::vector<std::optional<double>> rr;
    for (const auto& w : run.windows) rr.push_back(w.rr_bpm);
    r.set("windows", static_cast<double>(run.windows.size()), "count", "analysis windows (15 s, 5 s hop)");

    if (sc.rr_truth_bpm) {
        const double gt = *sc.rr_truth_bpm;
        try {
            const auto s = rr_accuracy(rr, gt);
            r.set("rr_mae_bpm", s.mae_bpm, "bpm", RrScore::definition);
            r.set("rr_accuracy_pct", s.accuracy_pct, "%", RrScore::definition);
            r.set("rr_pass_rate_pct", s.pass_rate_pct, "%", RrScore::definition);
            r.check("every window within +-2 bpm", s.pass_rate_pct >= 100.0,
                    fmt("max error %.3f bpm", s.max_error_bpm) + ", " + std::to_string(s.n_absent) + " absent");
            if (sc.name != "vibration-200bpm")
                r.check("RR accuracy >= 99%", s.accuracy_pct >= 99.0, fmt("%.3f%%", s.accuracy_pct));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::no_estimates) throw;
            r.check("every window within +-2 bpm", false, "no window produced an estimate");
        }
    }
    if (sc.tone_truth_bpm) {
        double worst = 0.0;
        bool all = !run.windows.empty();
        for (const auto& w : run.windows) {
            if (!w.displacement_peak_bpm) {
                all = false;
                continue;
            }
            worst = std::max(worst, std::abs(*w.displacement_peak_bpm - *sc.tone_truth_bpm));
        }
        r.set("spectral_peak_bpm", run.windows.empty() ? std::nullopt : run.windows.back().displacement_peak_bpm, "bpm",
              "strongest displacement spectrum line of the last window");
        r.set("spectral_peak_max_error_bpm", worst, "bpm", "largest |spectral peak - actuator rate| over windows");
        r.check("spectral peak within +-2 bpm", all && worst <= 2.0, fmt("max error %.3f bpm", worst));
    }
    if (sc.hr_truth_bpm) {
        std::size_t present = 0, wrong = 0;
        for (const auto& w : run.windows) {
            if (!w.hr_bpm) continue;
            ++present;
            wrong += std::abs(*w.hr_bpm - *sc.hr_truth_bpm) > 15.0;
        }
        const double n = static_cast<double>(std::max<std::size_t>(run.windows.size(), 1));
        r.set("hr_detection_pct", 100.0 * static_cast<double>(present) / n, "%", "windows with a heart-rate estimate");
        r.set("hr_wrong_pct", 100.0 * static_cast<double>(wrong) / n, "%",
              "windows whose heart-rate estimate is more than 15 bpm from truth");
        r.check("no confident wrong heart rate", wrong == 0, std::to_string(wrong) + " wrong of " + std::to_string(present));
    }
    if (sc.name == "soak-2h") {
        const bool continuous = std::all_of(rr.begin(), rr.end(), [](const auto& v) { return v.has_value(); });
        r.check("every window produced an RR estimate", continuous && !rr.empty(), std::to_string(rr.size()) + " windows");
    }
}

} // namespace detail

/// Simulates, processes and scores one scenario; writes report.json and the
/// artifacts into `dir`.
inline RunReport validate_scenario(const Scenario& sc, const std::filesystem::path& dir)
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto cfg = presets::by_name(sc.preset);
    if (!cfg) throw Error(ErrorCode::invalid_config, "scenario names unknown preset '" + sc.preset + "'");
    RunReport r;
    r.scenario = sc.name;
    r.preset = sc.preset;
    r.clutter = to_string(sc.clutter);
    r.seed = sc.scene.seed;
    r.duration_s = sc.scene.duration_s;
    r.zones = sc.zones;
    detail::standard_metrics(r);
    std::filesystem::create_directories(dir);
    if (sc.preset == "movement") {
        detail::validate_movement(sc, *cfg, dir, r);
    } else {
        detail::validate_vitals(sc, *cfg, dir, r);
    }
    r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_file_atomic(dir / "report.json", to_json(r).dump(2) + "\n");
    return r;
}

/// Every report.json at or below the given paths.
inline std::vector<RunReport> collect_reports(const std::vector<std::filesystem::path>& roots)
{
    std::vector<std::filesystem::path> files;
    for (const auto& root : roots) {
        if (std::filesystem::is_regular_file(root)) {
            files.push_back(root);
        } else if (std::filesystem::is_directory(root)) {
            for (const auto& e : std::filesystem::recursive_directory_iterator(root))
                if (e.is_regular_file() && e.path().filename() == "report.json") files.push_back(e.path());
        } else {
            throw Error(ErrorCode::malformed_file, root.string() + ": no such run directory");
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<RunReport> out;
    for (const auto& f : files) out.push_back(report_from_json(read_json_file(f)));
    return out;
}

/// Summary table: one row per run, standard metrics as columns.
inline std::string summary_csv(const std::vector<RunReport>& reports)
{
    static const char* cols[] = {"rr_mae_bpm", "rr_accuracy_pct", "zone_accuracy_pct", "activity_agreement_pct", "range_mae_m"};
    std::string s = "scenario,clutter,seed,passed";
    for (const char* c : cols) s += std::string(",") + c;
    s += '\n';
    for (const auto& r : reports) {
        s += r.scenario + "," + r.clutter + "," + std::to_string(r.seed) + "," + (r.passed() ? "true" : "false");
        for (const char* c : cols) {
            s += ',';
            if (const Metric* m = r.metric(c)) csv::opt(s, m->value, 6);
        }
        s += '\n';
    }
    return s;
}

} // namespace cagesense
