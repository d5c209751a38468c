#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cagesense {

enum class ErrorCode {
    invalid_config,
    invalid_scene,
    scene_exhausted,
    config_mismatch,
    shape_mismatch,
    invalid_pad,
    empty_history,
    nyquist_violation,
    unset_thresholds,
    unknown_scenario,
    malformed_file,
    no_estimates,
    empty_series,
    invalid_argument,
};

inline constexpr std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::invalid_config: return "invalid-config";
    case ErrorCode::invalid_scene: return "invalid-scene";
    case ErrorCode::scene_exhausted: return "scene-exhausted";
    case ErrorCode::config_mismatch: return "config-mismatch";
    case ErrorCode::shape_mismatch: return "shape-mismatch";
    case ErrorCode::invalid_pad: return "invalid-pad";
    case ErrorCode::empty_history: return "empty-history";
    case ErrorCode::nyquist_violation: return "nyquist-violation";
    case ErrorCode::unset_thresholds: return "unset-thresholds";
    case ErrorCode::unknown_scenario: return "unknown-scenario";
    case ErrorCode::malformed_file: return "malformed-file";
    case ErrorCode::no_estimates: return "no-estimates";
    case ErrorCode::empty_series: return "empty-series";
    case ErrorCode::invalid_argument: return "invalid-argument";
    }
    return "unknown";
}

/// Library-wide exception. `code()` is stable and machine readable; the
/// message carries the human detail (e.g. the offending field).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail)
        , code_(code)
        , detail_(detail)
    {
    }

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

} // namespace cagesense
