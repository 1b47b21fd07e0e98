#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include <gtest/gtest.h>

#include "emnlms/wav.hpp"
#include "test_util.hpp"

namespace emnlms {
namespace {

std::vector<char> slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

void dump(const std::filesystem::path& p, const std::vector<char>& bytes) {
    std::ofstream(p, std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

TEST(Wav, RampRoundTrip) {
    const auto dir = test::scratch_dir();
    Vector ramp(1000);
    for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = -1.0 + 2.0 * static_cast<double>(i) / 1000.0;
    write_wav(SignalStream(ramp, 16000.0, "ramp"), (dir / "ramp.wav").string());
    const SignalStream back = read_wav((dir / "ramp.wav").string());
    EXPECT_EQ(back.fs, 16000.0);
    ASSERT_EQ(back.size(), ramp.size());
    for (std::size_t i = 0; i < ramp.size(); ++i) EXPECT_NEAR(back.samples[i], ramp[i], 1.0 / 32768.0);
}

TEST(Wav, WriterClamps) {
    const auto dir = test::scratch_dir();
    write_wav(SignalStream(Vector{2.0, -3.0}, 8000.0, "loud"), (dir / "c.wav").string());
    const SignalStream back = read_wav((dir / "c.wav").string());
    EXPECT_EQ(back.samples, (Vector{32767.0 / 32768.0, -1.0}));
}

TEST(Wav, TruncatedFile) {
    const auto dir = test::scratch_dir();
    write_wav(SignalStream(Vector(100, 0.25), 16000.0, "x"), (dir / "ok.wav").string());
    auto bytes = slurp(dir / "ok.wav");
    bytes.resize(60);
    dump(dir / "cut.wav", bytes);
    try {
        read_wav((dir / "cut.wav").string());
        FAIL() << "expected WavError";
    } catch (const WavError& e) {
        EXPECT_EQ(e.kind(), WavError::Kind::malformed_header);
    }
    dump(dir / "tiny.wav", std::vector<char>{'R', 'I', 'F'});
    try {
        read_wav((dir / "tiny.wav").string());
        FAIL() << "expected WavError";
    } catch (const WavError& e) {
        EXPECT_EQ(e.kind(), WavError::Kind::malformed_header);
    }
}

TEST(Wav, StereoIsRejectedWithChannelCount) {
    const auto dir = test::scratch_dir();
    write_wav(SignalStream(Vector(10, 0.0), 16000.0, "x"), (dir / "mono.wav").string());
    auto bytes = slurp(dir / "mono.wav");
    bytes[22] = 2;  // fmt channel count
    dump(dir / "stereo.wav", bytes);
    try {
        read_wav((dir / "stereo.wav").string());
        FAIL() << "expected WavError";
    } catch (const WavError& e) {
        EXPECT_EQ(e.kind(), WavError::Kind::unsupported_encoding);
        EXPECT_NE(std::string(e.what()).find("2 channels"), std::string::npos) << e.what();
    }
}

TEST(Wav, NonPcmIsRejected) {
    const auto dir = test::scratch_dir();
    write_wav(SignalStream(Vector(10, 0.0), 16000.0, "x"), (dir / "mono.wav").string());
    auto bytes = slurp(dir / "mono.wav");
    bytes[20] = 3;  // IEEE float tag
    dump(dir / "float.wav", bytes);
    try {
        read_wav((dir / "float.wav").string());
        FAIL() << "expected WavError";
    } catch (const WavError& e) {
        EXPECT_EQ(e.kind(), WavError::Kind::unsupported_encoding);
    }
}

TEST(Wav, MissingFile) {
    try {
        read_wav("/nonexistent/dir/none.wav");
        FAIL() << "expected WavError";
    } catch (const WavError& e) {
        EXPECT_EQ(e.kind(), WavError::Kind::io);
    }
}

}  // namespace
}  // namespace emnlms
