#pragma once

// JSON (de)serialization of RadarConfig. Keys carry their SI unit as a
// suffix; see configs/*.json for the two shipped presets.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "cagesense/error.hpp"
#include "cagesense/radar_model.hpp"

namespace cagesense {

inline nlohmann::ordered_json config_to_json(const RadarConfig& c)
{
    nlohmann::ordered_json j;
    j["sweep"] = {
        {"f_start_hz", c.f_start_hz},
        {"f_end_hz", c.f_end_hz},
        {"slope_hz_per_s", c.slope_hz_per_s},
    };
    j["timing"] = {
        {"frame_rate_hz", c.frame_rate_hz},
        {"chirp_repetition_s", c.chirp_repetition_s},
    };
    if (c.frame_idle_s) j["timing"]["frame_idle_s"] = *c.frame_idle_s;
    j["adc"] = {
        {"sample_rate_hz", c.adc_rate_hz},
        {"samples_per_chirp", c.n_samples},
    };
    j["frame"] = {
        {"antennas", c.n_antennas},
        {"chirps", c.n_chirps},
    };
    return j;
}

inline RadarConfig config_from_json(const nlohmann::json& j)
{
    RadarConfig c;
    try {
        const auto& sweep = j.at("sweep");
        const auto& timing = j.at("timing");
        const auto& adc = j.at("adc");
        const auto& frame = j.at("frame");
        c.f_start_hz = sweep.at("f_start_hz").get<double>();
        c.f_end_hz = sweep.at("f_end_hz").get<double>();
        c.slope_hz_per_s = sweep.at("slope_hz_per_s").get<double>();
        c.frame_rate_hz = timing.at("frame_rate_hz").get<double>();
        c.chirp_repetition_s = timing.at("chirp_repetition_s").get<double>();
        if (timing.contains("frame_idle_s") && !timing.at("frame_idle_s").is_null())
            c.frame_idle_s = timing.at("frame_idle_s").get<double>();
        c.adc_rate_hz = adc.at("sample_rate_hz").get<double>();
        c.n_samples = adc.at("samples_per_chirp").get<std::size_t>();
        c.n_antennas = frame.at("antennas").get<std::size_t>();
        c.n_chirps = frame.at("chirps").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::invalid_config, e.what());
    }
    validate(c);
    return c;
}

inline nlohmann::json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::malformed_file, "cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::malformed_file, path.string() + ": " + e.what());
    }
}

inline RadarConfig load_config(const std::filesystem::path& path)
{
    return config_from_json(read_json_file(path));
}

inline void save_config(const RadarConfig& c, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::malformed_file, "cannot write " + path.string());
    out << config_to_json(c).dump(2) << '\n';
}

} // namespace cagesense
