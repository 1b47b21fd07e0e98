#ifndef EMNLMS_WAV_HPP
#define EMNLMS_WAV_HPP

// Minimal RIFF/WAVE reader and writer for 16-bit PCM mono.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "emnlms/error.hpp"
#include "emnlms/signals.hpp"

namespace emnlms {

class WavError : public Error {
public:
    enum class Kind { malformed_header, unsupported_encoding, io };

    WavError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

namespace detail {

inline std::uint32_t le32(const unsigned char* p) {
    return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}
inline std::uint16_t le16(const unsigned char* p) { return std::uint16_t(p[0] | p[1] << 8); }

inline void put32(std::vector<unsigned char>& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<unsigned char>(v >> (8 * i)));
}
inline void put16(std::vector<unsigned char>& b, std::uint16_t v) {
    b.push_back(static_cast<unsigned char>(v));
    b.push_back(static_cast<unsigned char>(v >> 8));
}

}  // namespace detail

inline SignalStream read_wav(const std::string& path) {
    using K = WavError::Kind;
    std::ifstream is(path, std::ios::binary);
    if (!is) throw WavError(K::io, "cannot open '" + path + "'");
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    if (is.bad()) throw WavError(K::io, "read failed: '" + path + "'");

    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        throw WavError(K::malformed_header, path + ": not a RIFF/WAVE file");

    bool have_fmt = false;
    std::uint32_t rate = 0;
    const unsigned char* data = nullptr;
    std::size_t data_len = 0;
    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const unsigned char* chunk = bytes.data() + pos;
        const std::uint32_t len = detail::le32(chunk + 4);
        const std::size_t body = pos + 8;
        if (len > bytes.size() - body) throw WavError(K::malformed_header, path + ": truncated chunk");
        if (std::memcmp(chunk, "fmt ", 4) == 0) {
            if (len < 16) throw WavError(K::malformed_header, path + ": short fmt chunk");
            const unsigned char* f = bytes.data() + body;
            const std::uint16_t format = detail::le16(f);
            const std::uint16_t channels = detail::le16(f + 2);
            const std::uint16_t bits = detail::le16(f + 14);
            if (format != 1) throw WavError(K::unsupported_encoding, path + ": format tag " + std::to_string(format) + " is not PCM");
            if (channels != 1)
                throw WavError(K::unsupported_encoding, path + ": " + std::to_string(channels) + " channels, expected mono");
            if (bits != 16)
                throw WavError(K::unsupported_encoding, path + ": " + std::to_string(bits) + "-bit samples, expected 16");
            rate = detail::le32(f + 4);
            have_fmt = true;
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            data = bytes.data() + body;
            data_len = len;
        }
        pos = body + len + (len & 1u);
    }
    if (!have_fmt || data == nullptr) throw WavError(K::malformed_header, path + ": missing fmt or data chunk");
    if (rate == 0) throw WavError(K::malformed_header, path + ": zero sample rate");

    Vector samples(data_len / 2);
    for (std::size_t i = 0; i < samples.size(); ++i)
        samples[i] = static_cast<std::int16_t>(detail::le16(data + 2 * i)) / 32768.0;
    return {std::move(samples), static_cast<double>(rate), "wav:" + path};
}

/// Values are scaled by 32768, rounded and clamped to the int16 range.
inline void write_wav(const SignalStream& stream, const std::string& path) {
    const auto rate = static_cast<std::uint32_t>(std::lround(stream.fs));
    const auto data_len = static_cast<std::uint32_t>(stream.size() * 2);
    std::vector<unsigned char> b;
    b.reserve(44 + data_len);
    b.insert(b.end(), {'R', 'I', 'F', 'F'});
    detail::put32(b, 36 + data_len);
    b.insert(b.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
    detail::put32(b, 16);
    detail::put16(b, 1);
    detail::put16(b, 1);
    detail::put32(b, rate);
    detail::put32(b, rate * 2);
    detail::put16(b, 2);
    detail::put16(b, 16);
    b.insert(b.end(), {'d', 'a', 't', 'a'});
    detail::put32(b, data_len);
    for (double v : stream.samples) {
        const double q = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
        detail::put16(b, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw WavError(WavError::Kind::io, "cannot open '" + path + "' for writing");
    os.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
    if (!os) throw WavError(WavError::Kind::io, "write failed: '" + path + "'");
}

}  // namespace emnlms

#endif  // EMNLMS_WAV_HPP
