#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cagesense/error.hpp"
#include "cagesense/radar_model.hpp"

namespace cagesense {

/// One radar frame of real IF samples laid out [antenna][chirp][sample].
template <std::floating_point T>
struct Frame {
    std::int64_t timestamp_us = 0;
    std::size_t n_antennas = 0;
    std::size_t n_chirps = 0;
    std::size_t n_samples = 0;
    std::vector<T> samples;
    // Number of samples clamped to full scale during synthesis (not serialized).
    std::size_t clamped_samples = 0;

    Frame() = default;
    Frame(std::size_t antennas, std::size_t chirps, std::size_t fast_samples, std::int64_t t_us = 0)
        : timestamp_us(t_us)
        , n_antennas(antennas)
        , n_chirps(chirps)
        , n_samples(fast_samples)
        , samples(antennas * chirps * fast_samples, T{0})
    {
    }

    [[nodiscard]] static Frame zeros_like(const RadarConfig& c, std::int64_t t_us = 0)
    {
        return Frame(c.n_antennas, c.n_chirps, c.n_samples, t_us);
    }

    [[nodiscard]] double timestamp_s() const noexcept { return static_cast<double>(timestamp_us) * 1e-6; }
    [[nodiscard]] std::size_t size() const noexcept { return samples.size(); }

    [[nodiscard]] T& at(std::size_t a, std::size_t c, std::size_t s) noexcept
    {
        return samples[(a * n_chirps + c) * n_samples + s];
    }
    [[nodiscard]] const T& at(std::size_t a, std::size_t c, std::size_t s) const noexcept
    {
        return samples[(a * n_chirps + c) * n_samples + s];
    }

    [[nodiscard]] std::span<T> chirp(std::size_t a, std::size_t c) noexcept
    {
        return {samples.data() + (a * n_chirps + c) * n_samples, n_samples};
    }
    [[nodiscard]] std::span<const T> chirp(std::size_t a, std::size_t c) const noexcept
    {
        return {samples.data() + (a * n_chirps + c) * n_samples, n_samples};
    }
    [[nodiscard]] std::span<T> antenna(std::size_t a) noexcept
    {
        return {samples.data() + a * n_chirps * n_samples, n_chirps * n_samples};
    }
    [[nodiscard]] std::span<const T> antenna(std::size_t a) const noexcept
    {
        return {samples.data() + a * n_chirps * n_samples, n_chirps * n_samples};
    }

    [[nodiscard]] bool same_shape(const Frame& o) const noexcept
    {
        return n_antennas == o.n_antennas && n_chirps == o.n_chirps && n_samples == o.n_samples;
    }
    [[nodiscard]] bool matches(const RadarConfig& c) const noexcept
    {
        return n_antennas == c.n_antennas && n_chirps == c.n_chirps && n_samples == c.n_samples;
    }

    [[nodiscard]] bool all_finite() const noexcept
    {
        for (T v : samples)
            if (!std::isfinite(v)) return false;
        return true;
    }

    /// Equality over the serialized content (timestamp, shape, sample bits).
    friend bool operator==(const Frame& a, const Frame& b) noexcept
    {
        return a.timestamp_us == b.timestamp_us && a.same_shape(b) && a.samples == b.samples;
    }
};

using RawFrame = Frame<float>;

inline void require_same_shape(const auto& a, const auto& b, const char* where)
{
    if (!a.same_shape(b)) throw Error(ErrorCode::shape_mismatch, where);
}

} // namespace cagesense
