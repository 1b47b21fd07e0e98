#ifndef EMNLMS_CONFIG_HPP
#define EMNLMS_CONFIG_HPP

// Scenario configuration: flat `key = value` lines grouped under `[section]`
// headers. `#` starts a comment at the beginning of a line or after
// whitespace. Every key is checked; unknown ones are rejected.
//
//   [scenario]   excitation (white | speechlike | wav:<path>), input_gain,
//                duration_s, fs, snr_db (number or inf), decimation, output
//   [rir]        taps, t60, pre_delay, file (one-column CSV, header tap_value)
//   [seeds]      rir, excitation, noise
//   [em_nlms]    c_h0, c_w0, c_v0, eps
//   [adapt_nlms] n_t, eta, e0_sq, eps, lambda_cap (number | none | auto),
//                delay, warm_start_samples
//   [conv_nlms]  mu, eps, gate (on | off | auto), gate_factor, gate_window_s
//
// An algorithm runs iff its section is present (an empty section takes all
// defaults). `auto` resolves by excitation: speech-like and WAV input get the
// lambda cap of 0.5 and the pause gate, white noise gets neither.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "emnlms/algorithms.hpp"
#include "emnlms/error.hpp"
#include "emnlms/metrics.hpp"
#include "emnlms/signals.hpp"

namespace emnlms {

class ConfigError : public Error {
public:
    enum class Kind { missing_file, syntax, unknown_key, invalid_value };

    ConfigError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

enum class Excitation { white, speechlike, wav };

struct Seeds {
    std::uint64_t rir = 1;
    std::uint64_t excitation = 2;
    std::uint64_t noise = 3;
};

struct ScenarioConfig {
    Excitation excitation = Excitation::white;
    std::string wav_path;
    double input_gain = 1.0;  // applied to the generated or loaded excitation
    double duration_s = 5.0;
    double fs = 16000.0;
    double snr_db = 20.0;
    std::size_t decimation = 16;
    std::string output = "out";

    std::size_t taps = 512;
    double t60 = 0.1;
    std::size_t pre_delay = 0;  // before the Adapt. NLMS delay is added
    std::string rir_file;

    Seeds seeds;

    std::optional<EmNlmsParams> em;
    std::optional<AdaptNlmsParams> adapt;
    std::optional<ConvNlmsParams> conv;

    std::size_t samples() const { return static_cast<std::size_t>(std::llround(duration_s * fs)); }

    /// Leading zero taps of the simulated echo path.
    std::size_t total_pre_delay() const { return pre_delay + (adapt && adapt->delay ? adapt->n_t : 0); }

    /// Echo-path length; an imported RIR grows by the prepended delay.
    std::size_t path_taps(std::size_t file_taps = 0) const {
        return rir_file.empty() ? taps : file_taps + total_pre_delay();
    }

    std::vector<Algorithm> algorithms() const {
        std::vector<Algorithm> out;
        if (em) out.push_back(Algorithm::em_nlms);
        if (adapt) out.push_back(Algorithm::adapt_nlms);
        if (conv) out.push_back(Algorithm::conv_nlms);
        return out;
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::string_view strip_comment(std::string_view s) {
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s[i] == '#' && (i == 0 || s[i - 1] == ' ' || s[i - 1] == '\t')) return s.substr(0, i);
    return s;
}

class ValueReader {
public:
    ValueReader(std::string where, std::string value) : where_(std::move(where)), value_(std::move(value)) {}

    const std::string& text() const { return value_; }

    double real() const {
        if (value_ == "inf" || value_ == "+inf" || value_ == "infinity") return std::numeric_limits<double>::infinity();
        double v = 0.0;
        const auto* end = value_.data() + value_.size();
        auto [ptr, ec] = std::from_chars(value_.data(), end, v);
        if (ec != std::errc() || ptr != end || value_.empty()) fail("expected a number");
        return v;
    }

    std::uint64_t integer() const {
        std::uint64_t v = 0;
        const auto* end = value_.data() + value_.size();
        auto [ptr, ec] = std::from_chars(value_.data(), end, v);
        if (ec != std::errc() || ptr != end || value_.empty()) fail("expected a non-negative integer");
        return v;
    }

    bool boolean() const {
        if (value_ == "true" || value_ == "on" || value_ == "yes" || value_ == "1") return true;
        if (value_ == "false" || value_ == "off" || value_ == "no" || value_ == "0") return false;
        fail("expected true/false");
    }

    [[noreturn]] void fail(const std::string& why) const {
        throw ConfigError(ConfigError::Kind::syntax, where_ + ": " + why + ", got '" + value_ + "'");
    }

private:
    std::string where_;
    std::string value_;
};

[[noreturn]] inline void invalid(const std::string& what) {
    throw ConfigError(ConfigError::Kind::invalid_value, "invalid configuration: " + what);
}

}  // namespace detail

/// Check every invariant of a resolved configuration.
inline void validate(const ScenarioConfig& c) {
    using detail::invalid;
    if (!(c.duration_s > 0.0) || !std::isfinite(c.duration_s)) invalid("scenario.duration_s must be > 0");
    if (!(c.fs > 0.0) || !std::isfinite(c.fs)) invalid("scenario.fs must be > 0");
    const double exact = c.duration_s * c.fs;
    if (std::abs(exact - std::round(exact)) > 1e-6) invalid("scenario.duration_s * fs must be an integer sample count");
    if (std::isnan(c.snr_db) || c.snr_db == -std::numeric_limits<double>::infinity())
        invalid("scenario.snr_db must be finite or inf");
    if (!(c.input_gain > 0.0) || !std::isfinite(c.input_gain)) invalid("scenario.input_gain must be > 0");
    if (c.decimation < 1) invalid("scenario.decimation must be >= 1");
    if (c.excitation == Excitation::wav && c.wav_path.empty()) invalid("scenario.excitation wav: needs a path");
    if (c.rir_file.empty()) {
        if (c.taps < 1) invalid("rir.taps must be >= 1");
        if (!(c.t60 > 0.0)) invalid("rir.t60 must be > 0");
        if (c.total_pre_delay() >= c.taps) invalid("rir.pre_delay plus the adapt_nlms delay must be < rir.taps");
    }
    if (!c.rir_file.empty() && c.samples() < c.total_pre_delay() + 1) invalid("scenario too short for the echo path");
    if (c.rir_file.empty() && c.samples() < c.taps) invalid("scenario.duration_s * fs must be >= rir.taps");
    if (c.algorithms().empty()) invalid("no algorithm section ([em_nlms], [adapt_nlms], [conv_nlms])");
    if (c.em) {
        if (!(c.em->c_h0 >= 0.0) || !(c.em->c_w0 >= 0.0) || !(c.em->c_v0 >= 0.0))
            invalid("em_nlms variances must be >= 0");
        if (!(c.em->eps > 0.0)) invalid("em_nlms.eps must be > 0");
    }
    if (c.adapt) {
        const std::size_t m = c.rir_file.empty() ? c.taps : 0;
        if (c.adapt->n_t < 1 || (m != 0 && c.adapt->n_t > m)) invalid("adapt_nlms.n_t must lie in [1, taps]");
        if (!(c.adapt->eta >= 0.0 && c.adapt->eta < 1.0)) invalid("adapt_nlms.eta must lie in [0, 1)");
        if (!(c.adapt->e0_sq >= 0.0)) invalid("adapt_nlms.e0_sq must be >= 0");
        if (!(c.adapt->eps > 0.0)) invalid("adapt_nlms.eps must be > 0");
        if (c.adapt->lambda_cap && !(*c.adapt->lambda_cap > 0.0)) invalid("adapt_nlms.lambda_cap must be > 0");
    }
    if (c.conv) {
        if (!(c.conv->mu > 0.0)) invalid("conv_nlms.mu must be > 0");
        if (!(c.conv->eps > 0.0)) invalid("conv_nlms.eps must be > 0");
        if (c.conv->gate && (!(c.conv->gate->factor >= 0.0) || !(c.conv->gate->window_s > 0.0)))
            invalid("conv_nlms gate_factor must be >= 0 and gate_window_s > 0");
    }
}

/// Parse configuration text; `source` names the input in error messages.
inline ScenarioConfig parse_config_text(std::string_view text, const std::string& source = "<config>") {
    static const std::map<std::string, std::set<std::string>> known = {
        {"scenario", {"excitation", "input_gain", "duration_s", "fs", "snr_db", "decimation", "output"}},
        {"rir", {"taps", "t60", "pre_delay", "file"}},
        {"seeds", {"rir", "excitation", "noise"}},
        {"em_nlms", {"c_h0", "c_w0", "c_v0", "eps"}},
        {"adapt_nlms", {"n_t", "eta", "e0_sq", "eps", "lambda_cap", "delay", "warm_start_samples"}},
        {"conv_nlms", {"mu", "eps", "gate", "gate_factor", "gate_window_s"}},
    };

    // section -> key -> (value, line)
    std::map<std::string, std::map<std::string, std::pair<std::string, std::size_t>>> entries;
    std::set<std::string> sections;
    std::string section;
    std::size_t lineno = 0;
    std::istringstream is{std::string(text)};
    std::string raw;
    while (std::getline(is, raw)) {
        ++lineno;
        const std::string where = source + ":" + std::to_string(lineno);
        const std::string_view line = detail::trim(detail::strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(ConfigError::Kind::syntax, where + ": unterminated section header");
            section = std::string(detail::trim(line.substr(1, line.size() - 2)));
            if (!known.contains(section))
                throw ConfigError(ConfigError::Kind::unknown_key, where + ": unknown section [" + section + "]");
            if (!sections.insert(section).second)
                throw ConfigError(ConfigError::Kind::syntax, where + ": duplicate section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(ConfigError::Kind::syntax, where + ": expected 'key = value'");
        if (section.empty()) throw ConfigError(ConfigError::Kind::syntax, where + ": key outside of a section");
        const std::string key(detail::trim(line.substr(0, eq)));
        const std::string value(detail::trim(line.substr(eq + 1)));
        if (key.empty()) throw ConfigError(ConfigError::Kind::syntax, where + ": empty key");
        if (!known.at(section).contains(key))
            throw ConfigError(ConfigError::Kind::unknown_key, where + ": unknown key '" + key + "' in [" + section + "]");
        if (!entries[section].emplace(key, std::make_pair(value, lineno)).second)
            throw ConfigError(ConfigError::Kind::syntax, where + ": duplicate key '" + key + "'");
    }

    auto get = [&](const std::string& sec, const std::string& key) -> std::optional<detail::ValueReader> {
        auto s = entries.find(sec);
        if (s == entries.end()) return std::nullopt;
        auto k = s->second.find(key);
        if (k == s->second.end()) return std::nullopt;
        return detail::ValueReader(source + ":" + std::to_string(k->second.second) + ": " + sec + "." + key,
                                   k->second.first);
    };

    ScenarioConfig c;
    if (auto v = get("scenario", "excitation")) {
        const std::string& t = v->text();
        if (t == "white") c.excitation = Excitation::white;
        else if (t == "speechlike") c.excitation = Excitation::speechlike;
        else if (t.rfind("wav:", 0) == 0) {
            c.excitation = Excitation::wav;
            c.wav_path = t.substr(4);
        } else v->fail("expected white, speechlike or wav:<path>");
    }
    if (auto v = get("scenario", "input_gain")) c.input_gain = v->real();
    if (auto v = get("scenario", "duration_s")) c.duration_s = v->real();
    if (auto v = get("scenario", "fs")) c.fs = v->real();
    if (auto v = get("scenario", "snr_db")) c.snr_db = v->real();
    if (auto v = get("scenario", "decimation")) c.decimation = v->integer();
    if (auto v = get("scenario", "output")) c.output = v->text();

    if (auto v = get("rir", "taps")) c.taps = v->integer();
    if (auto v = get("rir", "t60")) c.t60 = v->real();
    if (auto v = get("rir", "pre_delay")) c.pre_delay = v->integer();
    if (auto v = get("rir", "file")) c.rir_file = v->text();

    if (auto v = get("seeds", "rir")) c.seeds.rir = v->integer();
    if (auto v = get("seeds", "excitation")) c.seeds.excitation = v->integer();
    if (auto v = get("seeds", "noise")) c.seeds.noise = v->integer();

    const bool speech = c.excitation != Excitation::white;
    if (sections.contains("em_nlms")) {
        EmNlmsParams p;
        if (auto v = get("em_nlms", "c_h0")) p.c_h0 = v->real();
        if (auto v = get("em_nlms", "c_w0")) p.c_w0 = v->real();
        if (auto v = get("em_nlms", "c_v0")) p.c_v0 = v->real();
        if (auto v = get("em_nlms", "eps")) p.eps = v->real();
        c.em = p;
    }
    if (sections.contains("adapt_nlms")) {
        AdaptNlmsParams p;
        if (auto v = get("adapt_nlms", "n_t")) p.n_t = v->integer();
        if (auto v = get("adapt_nlms", "eta")) p.eta = v->real();
        if (auto v = get("adapt_nlms", "e0_sq")) p.e0_sq = v->real();
        if (auto v = get("adapt_nlms", "eps")) p.eps = v->real();
        if (auto v = get("adapt_nlms", "delay")) p.delay = v->boolean();
        if (auto v = get("adapt_nlms", "warm_start_samples")) p.warm_start_samples = v->integer();
        auto cap = get("adapt_nlms", "lambda_cap");
        if (!cap || cap->text() == "auto") {
            if (speech) p.lambda_cap = 0.5;
        } else if (cap->text() != "none") {
            p.lambda_cap = cap->real();
        }
        c.adapt = p;
    }
    if (sections.contains("conv_nlms")) {
        ConvNlmsParams p;
        if (auto v = get("conv_nlms", "mu")) p.mu = v->real();
        if (auto v = get("conv_nlms", "eps")) p.eps = v->real();
        GateParams g;
        if (auto v = get("conv_nlms", "gate_factor")) g.factor = v->real();
        if (auto v = get("conv_nlms", "gate_window_s")) g.window_s = v->real();
        auto gate = get("conv_nlms", "gate");
        bool on = speech;
        if (gate && gate->text() != "auto") on = gate->boolean();
        if (on) p.gate = g;
        c.conv = p;
    }
    validate(c);
    return c;
}

inline ScenarioConfig parse_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError(ConfigError::Kind::missing_file, "cannot open config '" + path + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str(), path);
}

/// Apply `key=value` with key in {rir, excitation, noise}.
inline void apply_seed_override(ScenarioConfig& c, std::string_view spec) {
    const auto eq = spec.find('=');
    if (eq == std::string_view::npos)
        throw ConfigError(ConfigError::Kind::syntax, "seed override '" + std::string(spec) + "': expected key=value");
    const std::string key(detail::trim(spec.substr(0, eq)));
    const detail::ValueReader value("seed override " + key, std::string(detail::trim(spec.substr(eq + 1))));
    if (key == "rir") c.seeds.rir = value.integer();
    else if (key == "excitation") c.seeds.excitation = value.integer();
    else if (key == "noise") c.seeds.noise = value.integer();
    else throw ConfigError(ConfigError::Kind::unknown_key, "seed override: unknown seed '" + key + "'");
}

/// Every setting with defaults materialised, as ordered `section.key` / value pairs.
inline std::vector<std::pair<std::string, std::string>> resolved_entries(const ScenarioConfig& c) {
    std::vector<std::pair<std::string, std::string>> out;
    auto add = [&](std::string k, std::string v) { out.emplace_back(std::move(k), std::move(v)); };
    auto real = [](double v) { return std::isinf(v) ? std::string(v > 0 ? "inf" : "-inf") : format_real(v); };
    auto flag = [](bool b) { return std::string(b ? "true" : "false"); };

    switch (c.excitation) {
        case Excitation::white: add("scenario.excitation", "white"); break;
        case Excitation::speechlike: add("scenario.excitation", "speechlike"); break;
        case Excitation::wav: add("scenario.excitation", "wav:" + c.wav_path); break;
    }
    add("scenario.input_gain", real(c.input_gain));
    add("scenario.duration_s", real(c.duration_s));
    add("scenario.fs", real(c.fs));
    add("scenario.snr_db", real(c.snr_db));
    add("scenario.decimation", std::to_string(c.decimation));
    add("scenario.output", c.output);
    add("rir.taps", std::to_string(c.taps));
    add("rir.t60", real(c.t60));
    add("rir.pre_delay", std::to_string(c.pre_delay));
    add("rir.file", c.rir_file);
    add("seeds.rir", std::to_string(c.seeds.rir));
    add("seeds.excitation", std::to_string(c.seeds.excitation));
    add("seeds.noise", std::to_string(c.seeds.noise));
    if (c.em) {
        add("em_nlms.c_h0", real(c.em->c_h0));
        add("em_nlms.c_w0", real(c.em->c_w0));
        add("em_nlms.c_v0", real(c.em->c_v0));
        add("em_nlms.eps", real(c.em->eps));
    }
    if (c.adapt) {
        add("adapt_nlms.n_t", std::to_string(c.adapt->n_t));
        add("adapt_nlms.eta", real(c.adapt->eta));
        add("adapt_nlms.e0_sq", real(c.adapt->e0_sq));
        add("adapt_nlms.eps", real(c.adapt->eps));
        add("adapt_nlms.lambda_cap", c.adapt->lambda_cap ? real(*c.adapt->lambda_cap) : "none");
        add("adapt_nlms.delay", flag(c.adapt->delay));
        add("adapt_nlms.warm_start_samples", std::to_string(c.adapt->warm_start_samples));
    }
    if (c.conv) {
        add("conv_nlms.mu", real(c.conv->mu));
        add("conv_nlms.eps", real(c.conv->eps));
        add("conv_nlms.gate", flag(c.conv->gate.has_value()));
        const GateParams g = c.conv->gate.value_or(GateParams{});
        add("conv_nlms.gate_factor", real(g.factor));
        add("conv_nlms.gate_window_s", real(g.window_s));
    }
    return out;
}

}  // namespace emnlms

#endif  // EMNLMS_CONFIG_HPP
