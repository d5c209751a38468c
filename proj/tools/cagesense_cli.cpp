// cagesense: simulate | process | validate | report
//
// Exit status: 0 ok, 2 usage, 3 data error, 4 validation failure.
// Failures print one JSON object on stderr: {"error": <code>, "message": ...}

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cagesense/cagesense.hpp"

namespace fs = std::filesystem;
using namespace cagesense;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 2;
constexpr int exit_data = 3;
constexpr int exit_validation = 4;

int fail(const std::string& code, const std::string& message, int status)
{
    nlohmann::ordered_json j;
    j["error"] = code;
    j["message"] = message;
    std::cerr << j.dump() << std::endl;
    return status;
}

void say(const nlohmann::ordered_json& j) { std::cout << j.dump() << std::endl; }

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
    std::string scene;
    std::string preset;
    std::string config_file;
    std::uint64_t seed = 1;
    std::string clutter = "internal";
    std::optional<double> duration;
    bool quantize = false;
    std::string out;
};

int run_simulate(const SimulateArgs& a)
{
    Scene scene;
    std::string preset = a.preset;
    if (fs::exists(a.scene)) {
        scene = load_scene(a.scene);
        scene.seed = a.seed;
        if (preset.empty()) preset = "movement";
    } else {
        const Scenario sc = make_scenario(a.scene, clutter_level_from_string(a.clutter), a.seed);
        scene = sc.scene;
        if (preset.empty()) preset = sc.preset;
    }
    if (a.duration) scene.duration_s = *a.duration;

    RadarConfig config;
    if (!a.config_file.empty()) {
        config = load_config(a.config_file);
    } else {
        const auto p = presets::by_name(preset);
        if (!p) throw Error(ErrorCode::invalid_argument, "unknown config preset '" + preset + "'");
        config = *p;
    }

    FrameSynthesizer syn(scene, config);
    StreamWriter out(a.out, config);
    std::size_t clamped = 0;
    for (std::size_t i = 0; i < syn.frame_count(); ++i) {
        RawFrame f = syn.frame(i);
        clamped += f.clamped_samples;
        out.write(a.quantize ? quantize_12bit(std::move(f)) : f);
    }
    out.close();
    say({{"out", a.out}, {"scene", scene.name}, {"frames", out.frames_written()}, {"clamped_samples", clamped}});
    return exit_ok;
}

// ---- process ----------------------------------------------------------------

struct ProcessArgs {
    std::string in;
    std::string mode;
    std::string out_dir;
    std::string calibration;
    bool rd_maps = false;
};

int run_process(const ProcessArgs& a)
{
    const Mode mode = mode_from_string(a.mode);
    StreamReader reader(a.in);
    const RadarConfig config = reader.config();
    check_mode(config, mode);
    const fs::path dir = a.out_dir;
    fs::create_directories(dir);

    nlohmann::ordered_json summary;
    summary["in"] = a.in;
    summary["mode"] = a.mode;
    summary["frames"] = reader.frame_count();

    if (mode == Mode::movement) {
        std::optional<ActivityThresholds> th;
        if (!a.calibration.empty()) {
            StreamReader cal(a.calibration);
            if (!(cal.config() == config))
                throw Error(ErrorCode::config_mismatch, "calibration recording uses a different radar config");
            MovementProcessor proc(config);
            std::vector<double> p;
            while (auto f = cal.next()) {
                const auto t = proc.process(*f);
                if (!t.warmup) p.push_back(t.movement_power);
            }
            th = calibrate_thresholds(p, config.frame_rate_hz);
        }
        const MovementRun run = process_movement(config, file_source(reader), {}, th, a.rd_maps);
        write_file_atomic(dir / "track.csv", track_csv(run.track));
        emit_frame_power(dir / "frame_power.csv", run.track);
        std::vector<std::string> files{"track.csv", "frame_power.csv"};
        if (a.rd_maps)
            for (const auto& p : emit_range_doppler_sequence(dir / "range_doppler", run.per_second_maps))
                files.push_back(fs::relative(p, dir).string());
        summary["activity_thresholds"] = {{"mode", th ? "calibrated" : "relative"},
                                          {"baseline", run.thresholds.baseline},
                                          {"theta_qs", run.thresholds.theta_qs},
                                          {"theta_dyn", run.thresholds.theta_dyn}};
        summary["artifacts"] = files;
    } else {
        const VitalsRun run = process_vitals(config, file_source(reader));
        write_file_atomic(dir / "vitals.csv", vitals_csv(run.windows));
        std::vector<std::string> files{"vitals.csv"};
        if (run.last_series.length() > 0) {
            emit_displacement_zoom(dir / "displacement_zoom.csv", run.last_series, 0.0, 0.5);
            emit_spectrum(dir / "spectrum.csv", spectral_peak(run.last_series, 0.0, 1e9).spectrum, 15.0);
            files.push_back("displacement_zoom.csv");
            files.push_back("spectrum.csv");
        }
        summary["windows"] = run.windows.size();
        summary["artifacts"] = files;
    }
    write_file_atomic(dir / "summary.json", summary.dump(2) + "\n");
    say(summary);
    return exit_ok;
}

// ---- validate ---------------------------------------------------------------

struct ValidateArgs {
    std::string scenario;
    std::string clutter = "all";
    std::uint64_t seed = 1;
    std::optional<double> duration;
    std::string out_dir = "runs";
};

int run_validate(const ValidateArgs& a)
{
    std::vector<std::string> names;
    if (a.scenario == "all") {
        for (const auto& n : scenario_names())
            if (n != "soak-2h") names.push_back(n);
    } else {
        make_scenario(a.scenario); // unknown names fail before any work
        names.push_back(a.scenario);
    }
    std::vector<ClutterLevel> levels;
    if (a.clutter == "all")
        levels.assign(all_clutter_levels.begin(), all_clutter_levels.end());
    else
        levels.push_back(clutter_level_from_string(a.clutter));

    bool all_passed = true;
    for (const auto& name : names) {
        for (const auto level : levels) {
            Scenario sc = make_scenario(name, level, a.seed);
            if (a.duration) sc.scene.duration_s = *a.duration;
            const RunReport r = validate_scenario(sc, fs::path(a.out_dir) / name / to_string(level));
            all_passed = all_passed && r.passed();
            nlohmann::ordered_json line;
            line["scenario"] = r.scenario;
            line["clutter"] = r.clutter;
            line["passed"] = r.passed();
            for (const auto& m : r.metrics)
                if (m.value) line[m.name] = *m.value;
            for (const auto& c : r.checks)
                if (!c.passed) line["failed"].push_back(c.name + " (" + c.detail + ")");
            line["runtime_s"] = r.runtime_s;
            say(line);
        }
    }
    return all_passed ? exit_ok : exit_validation;
}

// ---- report -----------------------------------------------------------------

struct ReportArgs {
    std::vector<std::string> runs;
    std::string out;
};

int run_report(const ReportArgs& a)
{
    std::vector<fs::path> roots(a.runs.begin(), a.runs.end());
    const auto reports = collect_reports(roots);
    if (reports.empty()) throw Error(ErrorCode::no_estimates, "no report.json found under the given paths");
    const std::string table = summary_csv(reports);
    if (a.out.empty())
        std::cout << table;
    else
        write_file_atomic(a.out, table);
    const bool ok = std::all_of(reports.begin(), reports.end(), [](const RunReport& r) { return r.passed(); });
    return ok ? exit_ok : exit_validation;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Desk-scale FMCW radar simulator and cage-monitoring pipeline"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "synthesize a frame-stream recording");
    s->add_option("--scene", sim.scene, "scene JSON file or catalog scenario name")->required();
    s->add_option("--config-preset", sim.preset, "radar preset (default: the scenario's own)")
        ->check(CLI::IsMember({"movement", "vital-sign"}));
    s->add_option("--config", sim.config_file, "radar config JSON instead of a preset")->check(CLI::ExistingFile);
    s->add_option("--seed", sim.seed, "noise seed");
    s->add_option("--clutter", sim.clutter, "clutter level for catalog scenarios")
        ->check(CLI::IsMember({"empty", "internal", "full"}));
    s->add_option("--duration", sim.duration, "override the scene duration (s)")->check(CLI::PositiveNumber);
    s->add_flag("--quantize", sim.quantize, "round samples to 12-bit ADC codes");
    s->add_option("--out", sim.out, "output recording")->required();

    ProcessArgs proc;
    auto* p = app.add_subcommand("process", "run a pipeline over a recording");
    p->add_option("--in", proc.in, "frame-stream recording")->required();
    p->add_option("--mode", proc.mode, "pipeline")->required()->check(CLI::IsMember({"movement", "vitals"}));
    p->add_option("--out-dir", proc.out_dir, "directory for CSV outputs")->required();
    p->add_option("--calibration", proc.calibration, "quasi-static recording whose first 5 s set the activity baseline")
        ->check(CLI::ExistingFile);
    p->add_flag("--rd-maps", proc.rd_maps, "also write one range-Doppler map per second");

    ValidateArgs val;
    auto* v = app.add_subcommand("validate", "simulate, process and score a catalog scenario");
    v->add_option("--scenario", val.scenario, "catalog scenario name, or 'all'")->required();
    v->add_option("--clutter", val.clutter, "clutter level, or 'all'")
        ->check(CLI::IsMember({"empty", "internal", "full", "all"}));
    v->add_option("--seed", val.seed, "noise seed");
    v->add_option("--duration", val.duration, "override the scene duration (s)")->check(CLI::PositiveNumber);
    v->add_option("--out-dir", val.out_dir, "root directory for run outputs");

    ReportArgs rep;
    auto* r = app.add_subcommand("report", "aggregate run directories into one table");
    r->add_option("runs", rep.runs, "run directories or report.json files")->required();
    r->add_option("--out", rep.out, "write the CSV table here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what(), exit_usage);
    }

    try {
        if (s->parsed()) return run_simulate(sim);
        if (p->parsed()) return run_process(proc);
        if (v->parsed()) return run_validate(val);
        if (r->parsed()) return run_report(rep);
    } catch (const Error& e) {
        const int status = e.code() == ErrorCode::unknown_scenario ? exit_usage : exit_data;
        return fail(std::string(to_string(e.code())), e.detail(), status);
    } catch (const nlohmann::json::exception& e) {
        return fail("malformed-file", e.what(), exit_data);
    } catch (const fs::filesystem_error& e) {
        return fail("io-error", e.what(), exit_data);
    }
    return exit_usage;
}
