#pragma once

#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "cagesense/cagesense.hpp"

namespace testsupport {

using namespace cagesense;

inline Scene still_scene(std::vector<Target> targets, double noise_std = 0.0, double duration_s = 1.0,
                         std::uint64_t seed = 1)
{
    Scene s;
    s.name = "test";
    s.targets = std::move(targets);
    s.noise_std = noise_std;
    s.duration_s = duration_s;
    s.seed = seed;
    return s;
}

/// Textbook O(N^2) DFT, used as an independent oracle for the FFT path.
inline std::vector<std::complex<double>> brute_dft(const std::vector<double>& x, std::size_t n_fft)
{
    using std::numbers::pi;
    std::vector<std::complex<double>> out(n_fft / 2 + 1);
    for (std::size_t k = 0; k < out.size(); ++k) {
        std::complex<double> acc{};
        for (std::size_t n = 0; n < x.size(); ++n)
            acc += x[n] * std::polar(1.0, -2.0 * pi * static_cast<double>(k * n) / static_cast<double>(n_fft));
        out[k] = acc;
    }
    return out;
}

/// Local maxima of |profile| (antenna 0, chirp 0) above `rel` of the global
/// maximum, restricted to [lo, hi] metres.
inline std::vector<std::size_t> profile_maxima(const RangeProfile& p, double lo, double hi, double rel = 0.25)
{
    std::vector<double> m(p.n_bins);
    for (std::size_t b = 0; b < p.n_bins; ++b) m[b] = std::abs(p.at(0, 0, b));
    const double top = *std::max_element(m.begin(), m.end());
    std::vector<std::size_t> out;
    for (std::size_t b = 1; b + 1 < p.n_bins; ++b) {
        const double r = p.range_of(static_cast<double>(b));
        if (r < lo || r > hi) continue;
        if (m[b] > m[b - 1] && m[b] >= m[b + 1] && m[b] > rel * top) out.push_back(b);
    }
    return out;
}

inline std::size_t argmax(const std::vector<double>& v)
{
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

/// Range profiles of consecutive vital-sign frames of a scene.
inline std::vector<RangeProfile> vital_profiles(const Scene& scene, const RadarConfig& cfg, std::size_t n_frames)
{
    const FrameSynthesizer syn(scene, cfg);
    std::vector<RangeProfile> out;
    out.reserve(n_frames);
    for (std::size_t i = 0; i < n_frames; ++i)
        out.push_back(range_fft(mean_removal(chirp_accumulate(syn.frame(i))), cfg, {Window::hann, 4, 1.0}));
    return out;
}

inline std::filesystem::path scratch_dir(const std::string& name)
{
    const auto d = std::filesystem::temp_directory_path() / ("cagesense_test_" + name);
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
    return d;
}

} // namespace testsupport
