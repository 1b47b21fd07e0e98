#ifndef EMNLMS_SIGNALS_HPP
#define EMNLMS_SIGNALS_HPP

// Synthetic echo-cancellation scenario: excitation generators, an
// exponentially decaying noise RIR and the noisy microphone signal.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "emnlms/delay_line.hpp"
#include "emnlms/error.hpp"
#include "emnlms/filter_core.hpp"
#include "emnlms/metrics.hpp"

namespace emnlms {

using Rng = std::mt19937_64;

struct SignalStream {
    Vector samples;
    double fs = 16000.0;
    std::string label;

    SignalStream() = default;
    SignalStream(Vector s, double rate, std::string name)
        : samples(std::move(s)), fs(rate), label(std::move(name)) {
        if (!(fs > 0.0)) throw InvalidArgument("SignalStream: fs must be > 0");
        for (double v : samples)
            if (!std::isfinite(v)) throw InvalidArgument("SignalStream '" + label + "': non-finite sample");
    }

    std::size_t size() const { return samples.size(); }
};

struct RirSpec {
    std::size_t taps = 512;
    double t60 = 0.1;
    double fs = 16000.0;
    std::uint64_t seed = 1;
    std::size_t pre_delay = 0;
};

inline void validate(const RirSpec& spec) {
    if (spec.taps < 1) throw InvalidArgument("RirSpec: taps must be >= 1");
    if (!(spec.t60 > 0.0)) throw InvalidArgument("RirSpec: t60 must be > 0");
    if (!(spec.fs > 0.0)) throw InvalidArgument("RirSpec: fs must be > 0");
    if (spec.pre_delay >= spec.taps) throw InvalidArgument("RirSpec: pre_delay must leave at least one tap");
}

/// Gaussian taps under exp(-k / tau) with tau = t60 fs / ln(1000), i.e. a 60 dB
/// amplitude decay over t60, after pre_delay zero taps. Unit l2 norm.
inline Vector synth_rir(const RirSpec& spec) {
    validate(spec);
    const double tau = spec.t60 * spec.fs / std::log(1000.0);
    Rng rng(spec.seed);
    std::normal_distribution<double> gauss;
    Vector h(spec.taps, 0.0);
    for (std::size_t k = spec.pre_delay; k < spec.taps; ++k)
        h[k] = gauss(rng) * std::exp(-static_cast<double>(k - spec.pre_delay) / tau);
    const double norm = std::sqrt(energy(h));
    for (double& v : h) v /= norm;
    return h;
}

/// Shift a response right by `delay` zero taps; the length grows accordingly.
inline Vector prepend_delay(std::span<const double> h, std::size_t delay) {
    Vector out(delay, 0.0);
    out.insert(out.end(), h.begin(), h.end());
    return out;
}

inline SignalStream gen_white_noise(std::size_t n_samples, std::uint64_t seed, double fs = 16000.0) {
    if (n_samples < 1) throw InvalidArgument("gen_white_noise: n_samples must be >= 1");
    Rng rng(seed);
    std::normal_distribution<double> gauss;
    Vector x(n_samples);
    for (double& v : x) v = gauss(rng);
    return {std::move(x), fs, "white"};
}

struct SpeechlikeParams {
    double fs = 16000.0;
    double formant1_hz = 500.0;
    double formant2_hz = 1500.0;
    double pole_radius = 0.97;
    double aspiration = 0.3;  // white component, rms relative to the resonator output
    double syllable_rate_hz = 4.0;
    double pause_fraction = 0.3;
};

/// Coloured noise with two formant resonances, gated by a syllable envelope.
///
/// White noise drives two cascaded all-pole resonators (conjugate pole pairs
/// at the formant frequencies); the output is scaled to unit rms and a
/// broadband white component of rms `aspiration` is added. Each syllable
/// period (1/rate, jittered by +-25 %) holds one Hann-shaped burst of random
/// amplitude followed by a pause averaging `pause_fraction` of the period.
/// The envelope is exactly zero in pauses. Peak-normalised to 1.
inline SignalStream gen_speechlike(std::size_t n_samples, std::uint64_t seed, const SpeechlikeParams& p = {}) {
    if (n_samples < 1) throw InvalidArgument("gen_speechlike: n_samples must be >= 1");
    if (!(p.fs > 0.0) || !(p.syllable_rate_hz > 0.0) || !(p.pause_fraction >= 0.0 && p.pause_fraction < 1.0) ||
        !(p.pole_radius >= 0.0 && p.pole_radius < 1.0) || !(p.aspiration >= 0.0))
        throw InvalidArgument("gen_speechlike: invalid parameters");
    Rng rng(seed);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // y[n] = w[n] - a1 y[n-1] - a2 y[n-2] per resonator
    auto resonate = [&](Vector& sig, double f) {
        const double w = 2.0 * std::numbers::pi * f / p.fs;
        const double a1 = -2.0 * p.pole_radius * std::cos(w);
        const double a2 = p.pole_radius * p.pole_radius;
        double y1 = 0.0, y2 = 0.0;
        for (double& v : sig) {
            const double y = v - a1 * y1 - a2 * y2;
            y2 = y1;
            y1 = y;
            v = y;
        }
    };
    Vector voiced(n_samples);
    for (double& v : voiced) v = gauss(rng);
    resonate(voiced, p.formant1_hz);
    resonate(voiced, p.formant2_hz);
    const double rms = std::sqrt(energy(voiced) / static_cast<double>(n_samples));

    Vector x(n_samples);
    for (std::size_t n = 0; n < n_samples; ++n) x[n] = (rms > 0.0 ? voiced[n] / rms : 0.0) + p.aspiration * gauss(rng);

    const double period = p.fs / p.syllable_rate_hz;
    std::size_t n = 0;
    while (n < n_samples) {
        const double len = period * (0.75 + 0.5 * unit(rng));
        const double pause = len * p.pause_fraction * (0.6 + 0.8 * unit(rng));
        const auto active = static_cast<std::size_t>(len - pause);
        const auto silent = static_cast<std::size_t>(pause);
        const double amp = 0.3 + 0.7 * unit(rng);
        for (std::size_t k = 0; k < active && n < n_samples; ++k, ++n) {
            const double s = std::sin(std::numbers::pi * static_cast<double>(k) / static_cast<double>(active));
            x[n] *= amp * s * s;
        }
        for (std::size_t k = 0; k < silent && n < n_samples; ++k, ++n) x[n] = 0.0;
    }
    double peak = 0.0;
    for (double v : x) peak = std::max(peak, std::abs(v));
    if (peak > 0.0)
        for (double& v : x) v /= peak;
    return {std::move(x), p.fs, "speechlike"};
}

struct Microphone {
    SignalStream d;
    SignalStream clean_echo;
};

/// Echo x * h plus white Gaussian noise scaled to the requested global
/// echo-to-noise ratio. snr_db = +inf gives a noiseless microphone.
inline Microphone simulate_microphone(const SignalStream& x, std::span<const double> h, double snr_db,
                                      std::uint64_t seed) {
    if (h.empty()) throw InvalidArgument("simulate_microphone: empty response");
    if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity())
        throw InvalidArgument("simulate_microphone: snr_db must be finite or +inf");

    DelayLine line(h.size());
    Vector echo(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) {
        line.push(x.samples[n]);
        echo[n] = dot(line.window(), h);
    }
    Vector d = echo;
    if (std::isfinite(snr_db)) {
        const double echo_power = energy(echo);
        if (echo_power == 0.0) throw DegenerateError("simulate_microphone: echo is all zero, cannot scale noise");
        Rng rng(seed);
        std::normal_distribution<double> gauss;
        Vector noise(x.size());
        for (double& v : noise) v = gauss(rng);
        const double gain = std::sqrt(echo_power / (std::pow(10.0, snr_db / 10.0) * energy(noise)));
        for (std::size_t n = 0; n < d.size(); ++n) d[n] += gain * noise[n];
    }
    return {SignalStream(std::move(d), x.fs, "microphone"), SignalStream(std::move(echo), x.fs, "echo")};
}

inline void write_rir_csv(const std::string& path, std::span<const double> h) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    os << "tap_value\n";
    for (double v : h) os << format_real(v) << '\n';
    if (!os) throw IoError("write failed: '" + path + "'");
}

inline Vector read_rir_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(is, line) || (line != "tap_value" && line != "tap_value\r"))
        throw FormatError(path + ": expected header 'tap_value'");
    Vector h;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(line, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != line.size() || !std::isfinite(v))
            throw FormatError(path + ":" + std::to_string(lineno) + ": bad tap value '" + line + "'");
        h.push_back(v);
    }
    if (h.empty()) throw FormatError(path + ": no taps");
    return h;
}

}  // namespace emnlms

#endif  // EMNLMS_SIGNALS_HPP
