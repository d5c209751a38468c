#pragma once

// Scores against simulator ground truth. Every score carries the definition
// it was computed with so reports are self-describing.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cagesense/error.hpp"
#include "cagesense/tracking.hpp"

namespace cagesense {

struct RrScore {
    double accuracy_pct = 0.0;
    double mae_bpm = 0.0;
    double pass_rate_pct = 0.0; // windows within +-tolerance, absent windows count as misses
    double max_error_bpm = 0.0;
    std::size_t n_windows = 0;
    std::size_t n_absent = 0;

    static constexpr const char* definition =
        "accuracy = 100*(1 - mean(|est-gt|/gt)) over windows with an estimate; "
        "MAE = mean(|est-gt|) bpm; pass rate = share of all windows within +-2 bpm";
};

inline RrScore rr_accuracy(std::span<const std::optional<double>> estimates, double truth_bpm, double tolerance_bpm = 2.0)
{
    if (!(truth_bpm > 0.0)) throw Error(ErrorCode::invalid_argument, "ground-truth rate must be positive");
    RrScore s;
    s.n_windows = estimates.size();
    double rel = 0.0, abs_sum = 0.0;
    std::size_t n = 0, pass = 0;
    for (const auto& e : estimates) {
        if (!e) {
            ++s.n_absent;
            continue;
        }
        const double err = std::abs(*e - truth_bpm);
        rel += err / truth_bpm;
        abs_sum += err;
        s.max_error_bpm = std::max(s.max_error_bpm, err);
        if (err <= tolerance_bpm) ++pass;
        ++n;
    }
    if (n == 0) throw Error(ErrorCode::no_estimates, "no window produced a rate estimate");
    s.accuracy_pct = 100.0 * (1.0 - rel / static_cast<double>(n));
    s.mae_bpm = abs_sum / static_cast<double>(n);
    s.pass_rate_pct = 100.0 * static_cast<double>(pass) / static_cast<double>(s.n_windows);
    return s;
}

inline RrScore rr_accuracy(std::span<const double> estimates, double truth_bpm, double tolerance_bpm = 2.0)
{
    std::vector<std::optional<double>> e(estimates.begin(), estimates.end());
    return rr_accuracy(std::span<const std::optional<double>>(e), truth_bpm, tolerance_bpm);
}

struct AgreementScore {
    double pct = 0.0;
    std::size_t n_scored = 0;
    std::size_t n_skipped = 0;
};

/// Per-frame agreement of optional labels with truth; frames whose `skip`
/// flag is set are left out, a missing estimate counts as a miss.
template <typename L>
AgreementScore label_agreement(std::span<const std::optional<L>> est, std::span<const L> truth,
                               std::span<const bool> skip = {})
{
    if (est.size() != truth.size() || (!skip.empty() && skip.size() != est.size()))
        throw Error(ErrorCode::shape_mismatch, "estimate and truth series differ in length");
    AgreementScore s;
    std::size_t hit = 0;
    for (std::size_t i = 0; i < est.size(); ++i) {
        if (!skip.empty() && skip[i]) {
            ++s.n_skipped;
            continue;
        }
        ++s.n_scored;
        if (est[i] && *est[i] == truth[i]) ++hit;
    }
    if (s.n_scored == 0) throw Error(ErrorCode::no_estimates, "no frames to score");
    s.pct = 100.0 * static_cast<double>(hit) / static_cast<double>(s.n_scored);
    return s;
}

inline constexpr const char* zone_accuracy_definition =
    "share of frames (RAF warm-up excluded) whose estimated zone equals the zone of the simulated macro range";
inline constexpr const char* activity_agreement_definition =
    "share of frames whose activity label equals the scripted segment label";

struct RangeScore {
    double mae_m = 0.0;
    double max_error_m = 0.0;
    std::size_t n_scored = 0;

    static constexpr const char* definition =
        "mean |estimated range - simulated macro range| over frames with an estimate, warm-up excluded";
};

inline RangeScore range_error(std::span<const std::optional<double>> est, std::span<const double> truth,
                              std::span<const bool> skip = {})
{
    if (est.size() != truth.size() || (!skip.empty() && skip.size() != est.size()))
        throw Error(ErrorCode::shape_mismatch, "estimate and truth series differ in length");
    RangeScore s;
    double sum = 0.0;
    for (std::size_t i = 0; i < est.size(); ++i) {
        if ((!skip.empty() && skip[i]) || !est[i]) continue;
        const double e = std::abs(*est[i] - truth[i]);
        sum += e;
        s.max_error_m = std::max(s.max_error_m, e);
        ++s.n_scored;
    }
    if (s.n_scored == 0) throw Error(ErrorCode::no_estimates, "no frame produced a range estimate");
    s.mae_m = sum / static_cast<double>(s.n_scored);
    return s;
}

/// 10*log10 of an energy ratio.
inline double power_db(double ratio) { return 10.0 * std::log10(ratio); }

/// 20*log10 of a ratio of root-energy quantities (magnitudes, L2 norms such
/// as movement power).
inline double amplitude_db(double ratio) { return 20.0 * std::log10(ratio); }

} // namespace cagesense
