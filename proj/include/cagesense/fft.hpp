#pragma once

// Thin FFTW3 front-end. Plans are created once per (kind, size) with
// FFTW_ESTIMATE (deterministic, unlike measured plans) on SIMD-aligned
// buffers and reused through the new-array execute interface, which is safe
// to call concurrently. Misaligned arrays are staged through aligned scratch
// so the same plan, hence the same arithmetic, always runs.

#include <algorithm>
#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include <fftw3.h>

namespace cagesense::fft {

using cplx = std::complex<double>;

namespace detail {

enum class Kind { forward_inplace, r2c };

class PlanCache {
public:
    static PlanCache& instance()
    {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(Kind kind, std::size_t n)
    {
        std::lock_guard lock(mutex_);
        auto key = std::make_pair(kind, n);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;

        const int len = static_cast<int>(n);
        const unsigned flags = FFTW_ESTIMATE;
        fftw_plan plan = nullptr;
        if (kind == Kind::forward_inplace) {
            auto* buf = fftw_alloc_complex(n);
            plan = fftw_plan_dft_1d(len, buf, buf, FFTW_FORWARD, flags);
            fftw_free(buf);
        } else {
            auto* in = fftw_alloc_real(n);
            auto* out = fftw_alloc_complex(n / 2 + 1);
            plan = fftw_plan_dft_r2c_1d(len, in, out, flags);
            fftw_free(in);
            fftw_free(out);
        }
        plans_.emplace(key, plan);
        return plan;
    }

    PlanCache(const PlanCache&) = delete;
    PlanCache& operator=(const PlanCache&) = delete;

private:
    PlanCache() = default;
    ~PlanCache()
    {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    std::mutex mutex_;
    std::map<std::pair<Kind, std::size_t>, fftw_plan> plans_;
};

} // namespace detail

[[nodiscard]] constexpr bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

[[nodiscard]] constexpr std::size_t next_power_of_two(std::size_t n) noexcept
{
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

namespace detail {

inline bool aligned(const void* p) noexcept
{
    return fftw_alignment_of(reinterpret_cast<double*>(const_cast<void*>(p))) == 0;
}

} // namespace detail

/// Unnormalized forward DFT, in place.
inline void forward(std::span<cplx> data)
{
    if (data.empty()) return;
    auto plan = detail::PlanCache::instance().get(detail::Kind::forward_inplace, data.size());
    if (detail::aligned(data.data())) {
        auto* p = reinterpret_cast<fftw_complex*>(data.data());
        fftw_execute_dft(plan, p, p);
        return;
    }
    thread_local std::vector<cplx> stage;
    stage.assign(data.begin(), data.end());
    auto* p = reinterpret_cast<fftw_complex*>(stage.data());
    fftw_execute_dft(plan, p, p);
    std::copy(stage.begin(), stage.end(), data.begin());
}

/// Forward DFT of a real sequence zero-padded to `n_fft`; returns bins 0..n_fft/2.
inline void forward_real(std::span<const double> input, std::size_t n_fft, std::vector<double>& scratch,
                         std::vector<cplx>& out)
{
    scratch.assign(n_fft, 0.0);
    std::copy_n(input.begin(), std::min(input.size(), n_fft), scratch.begin());
    out.resize(n_fft / 2 + 1);
    auto plan = detail::PlanCache::instance().get(detail::Kind::r2c, n_fft);
    if (detail::aligned(scratch.data()) && detail::aligned(out.data())) {
        fftw_execute_dft_r2c(plan, scratch.data(), reinterpret_cast<fftw_complex*>(out.data()));
        return;
    }
    double* in = fftw_alloc_real(n_fft);
    fftw_complex* res = fftw_alloc_complex(n_fft / 2 + 1);
    std::copy(scratch.begin(), scratch.end(), in);
    fftw_execute_dft_r2c(plan, in, res);
    std::copy_n(reinterpret_cast<cplx*>(res), out.size(), out.begin());
    fftw_free(in);
    fftw_free(res);
}

inline std::vector<cplx> forward_real(std::span<const double> input, std::size_t n_fft)
{
    std::vector<double> scratch;
    std::vector<cplx> out;
    forward_real(input, n_fft, scratch, out);
    return out;
}

} // namespace cagesense::fft
