#pragma once

// Binary frame-stream recording.
//
//   "FMCW" | u16 version | u32 n | n bytes config JSON | u64 frame_count
//   frame_count x ( u64 timestamp_us | f32[antenna][chirp][sample] )
//
// All integers and floats little-endian. Files are written to a sibling
// temporary and renamed into place on close.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "cagesense/config_io.hpp"
#include "cagesense/error.hpp"
#include "cagesense/frame.hpp"

namespace cagesense {

inline constexpr std::array<char, 4> stream_magic{'F', 'M', 'C', 'W'};
inline constexpr std::uint16_t stream_version = 1;

namespace detail {

template <typename U>
void put_le(std::string& out, U v)
{
    static_assert(std::is_unsigned_v<U>);
    for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

template <typename U>
U get_le(const unsigned char* p)
{
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(p[i]) << (8 * i));
    return v;
}

inline void put_frame_body(std::string& out, const RawFrame& f)
{
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(f.timestamp_us));
    const std::size_t at = out.size();
    out.resize(at + 4 * f.samples.size());
    if constexpr (std::endian::native == std::endian::little) {
        std::memcpy(out.data() + at, f.samples.data(), 4 * f.samples.size());
    } else {
        for (std::size_t i = 0; i < f.samples.size(); ++i) {
            const auto bits = std::bit_cast<std::uint32_t>(f.samples[i]);
            for (int b = 0; b < 4; ++b) out[at + 4 * i + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
        }
    }
}

inline std::string header_bytes(const RadarConfig& config, std::uint64_t frame_count)
{
    const std::string json = config_to_json(config).dump();
    std::string out(stream_magic.begin(), stream_magic.end());
    put_le<std::uint16_t>(out, stream_version);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(json.size()));
    out += json;
    put_le<std::uint64_t>(out, frame_count);
    return out;
}

inline std::filesystem::path temp_sibling(const std::filesystem::path& path)
{
    static thread_local std::mt19937_64 rng{std::random_device{}()};
    return path.string() + ".tmp." + std::to_string(::getpid()) + "." + std::to_string(rng() & 0xFFFFFF);
}

} // namespace detail

/// Writes `content` to `path` through a temporary file and rename.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = detail::temp_sibling(path);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::malformed_file, "cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::filesystem::remove(tmp);
            throw Error(ErrorCode::malformed_file, "write failed for " + path.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

// ---- in-memory codec --------------------------------------------------------

inline std::string encode_stream(const RadarConfig& config, const std::vector<RawFrame>& frames)
{
    std::string out = detail::header_bytes(config, frames.size());
    for (const auto& f : frames) {
        if (!f.matches(config)) throw Error(ErrorCode::shape_mismatch, "frame shape does not match stream config");
        detail::put_frame_body(out, f);
    }
    return out;
}

struct DecodedStream {
    RadarConfig config;
    std::vector<RawFrame> frames;
};

namespace detail {

struct Header {
    RadarConfig config;
    std::uint64_t frame_count = 0;
    std::size_t size = 0; // bytes
};

inline Header parse_header(const unsigned char* p, std::size_t n, std::size_t* need_more = nullptr)
{
    auto need = [&](std::size_t k) {
        if (n < k) {
            if (need_more) *need_more = k;
            throw Error(ErrorCode::malformed_file, "truncated header");
        }
    };
    need(10);
    if (std::memcmp(p, stream_magic.data(), 4) != 0) throw Error(ErrorCode::malformed_file, "bad magic");
    const auto version = get_le<std::uint16_t>(p + 4);
    if (version != stream_version)
        throw Error(ErrorCode::malformed_file, "unsupported format version " + std::to_string(version));
    const auto json_len = get_le<std::uint32_t>(p + 6);
    need(10 + static_cast<std::size_t>(json_len) + 8);
    Header h;
    try {
        const auto j = nlohmann::json::parse(std::string(reinterpret_cast<const char*>(p + 10), json_len));
        h.config = config_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::malformed_file, std::string("header config: ") + e.what());
    } catch (const Error& e) {
        throw Error(ErrorCode::malformed_file, std::string("header config: ") + e.what());
    }
    h.frame_count = get_le<std::uint64_t>(p + 10 + json_len);
    h.size = 10 + json_len + 8;
    return h;
}

inline std::size_t frame_bytes(const RadarConfig& c) { return 8 + 4 * c.n_antennas * c.n_chirps * c.n_samples; }

inline RawFrame parse_frame(const unsigned char* p, const RadarConfig& c)
{
    RawFrame f = RawFrame::zeros_like(c, static_cast<std::int64_t>(get_le<std::uint64_t>(p)));
    p += 8;
    if constexpr (std::endian::native == std::endian::little) {
        std::memcpy(f.samples.data(), p, 4 * f.samples.size());
    } else {
        for (std::size_t i = 0; i < f.samples.size(); ++i) f.samples[i] = std::bit_cast<float>(get_le<std::uint32_t>(p + 4 * i));
    }
    return f;
}

} // namespace detail

inline DecodedStream decode_stream(std::string_view bytes)
{
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const detail::Header h = detail::parse_header(p, bytes.size());
    const std::size_t fb = detail::frame_bytes(h.config);
    if (bytes.size() != h.size + h.frame_count * fb)
        throw Error(ErrorCode::malformed_file, "body size does not match header frame count");
    DecodedStream out{h.config, {}};
    out.frames.reserve(h.frame_count);
    for (std::uint64_t i = 0; i < h.frame_count; ++i) out.frames.push_back(detail::parse_frame(p + h.size + i * fb, h.config));
    return out;
}

// ---- files ------------------------------------------------------------------

/// Streams frames to disk; the frame count in the header is patched on close.
class StreamWriter {
public:
    StreamWriter(std::filesystem::path path, const RadarConfig& config)
        : path_(std::move(path))
        , config_(config)
    {
        if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
        tmp_ = detail::temp_sibling(path_);
        out_.open(tmp_, std::ios::binary | std::ios::trunc);
        if (!out_) throw Error(ErrorCode::malformed_file, "cannot write " + tmp_.string());
        const std::string h = detail::header_bytes(config_, 0);
        count_offset_ = h.size() - 8;
        out_.write(h.data(), static_cast<std::streamsize>(h.size()));
    }

    StreamWriter(const StreamWriter&) = delete;
    StreamWriter& operator=(const StreamWriter&) = delete;

    ~StreamWriter()
    {
        if (!closed_) {
            out_.close();
            std::error_code ec;
            std::filesystem::remove(tmp_, ec);
        }
    }

    void write(const RawFrame& f)
    {
        if (!f.matches(config_)) throw Error(ErrorCode::shape_mismatch, "frame shape does not match stream config");
        buf_.clear();
        detail::put_frame_body(buf_, f);
        out_.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
        ++count_;
    }

    void close()
    {
        if (closed_) return;
        std::string c;
        detail::put_le<std::uint64_t>(c, count_);
        out_.seekp(static_cast<std::streamoff>(count_offset_));
        out_.write(c.data(), 8);
        out_.flush();
        const bool ok = static_cast<bool>(out_);
        out_.close();
        closed_ = true;
        if (!ok) {
            std::filesystem::remove(tmp_);
            throw Error(ErrorCode::malformed_file, "write failed for " + path_.string());
        }
        std::filesystem::rename(tmp_, path_);
    }

    [[nodiscard]] std::uint64_t frames_written() const noexcept { return count_; }

private:
    std::filesystem::path path_;
    std::filesystem::path tmp_;
    RadarConfig config_;
    std::ofstream out_;
    std::string buf_;
    std::size_t count_offset_ = 0;
    std::uint64_t count_ = 0;
    bool closed_ = false;
};

/// Sequential reader; validates the header and the body length up front.
class StreamReader {
public:
    explicit StreamReader(const std::filesystem::path& path)
        : in_(path, std::ios::binary)
    {
        if (!in_) throw Error(ErrorCode::malformed_file, "cannot open " + path.string());
        std::error_code ec;
        const auto file_size = std::filesystem::file_size(path, ec);
        if (ec) throw Error(ErrorCode::malformed_file, "cannot stat " + path.string());

        std::vector<unsigned char> head(std::min<std::uintmax_t>(file_size, 10));
        in_.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
        std::size_t need = 0;
        try {
            header_ = detail::parse_header(head.data(), head.size(), &need);
        } catch (const Error&) {
            if (need == 0 || need > file_size) throw;
            head.resize(need);
            in_.read(reinterpret_cast<char*>(head.data() + 10), static_cast<std::streamsize>(need - 10));
            header_ = detail::parse_header(head.data(), head.size());
        }
        frame_bytes_ = detail::frame_bytes(header_.config);
        if (file_size != header_.size + header_.frame_count * frame_bytes_)
            throw Error(ErrorCode::malformed_file, path.string() + ": body size does not match header frame count");
        in_.seekg(static_cast<std::streamoff>(header_.size));
        buf_.resize(frame_bytes_);
    }

    [[nodiscard]] const RadarConfig& config() const noexcept { return header_.config; }
    [[nodiscard]] std::uint64_t frame_count() const noexcept { return header_.frame_count; }

    std::optional<RawFrame> next()
    {
        if (read_ >= header_.frame_count) return std::nullopt;
        in_.read(reinterpret_cast<char*>(buf_.data()), static_cast<std::streamsize>(buf_.size()));
        if (!in_) throw Error(ErrorCode::malformed_file, "truncated frame " + std::to_string(read_));
        ++read_;
        return detail::parse_frame(buf_.data(), header_.config);
    }

private:
    std::ifstream in_;
    detail::Header header_;
    std::size_t frame_bytes_ = 0;
    std::vector<unsigned char> buf_;
    std::uint64_t read_ = 0;
};

inline void write_stream(const std::filesystem::path& path, const RadarConfig& config, const std::vector<RawFrame>& frames)
{
    StreamWriter w(path, config);
    for (const auto& f : frames) w.write(f);
    w.close();
}

inline DecodedStream read_stream(const std::filesystem::path& path)
{
    StreamReader r(path);
    DecodedStream out{r.config(), {}};
    while (auto f = r.next()) out.frames.push_back(std::move(*f));
    return out;
}

} // namespace cagesense
