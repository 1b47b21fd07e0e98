#ifndef EMNLMS_EXPERIMENT_HPP
#define EMNLMS_EXPERIMENT_HPP

// Scenario assembly and the per-sample loop shared by the CLI and the tests.
//
// All enabled algorithms are driven from one delay line, so at sample n every
// filter sees the same regressor and the same microphone sample.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <openssl/evp.h>

#include "emnlms/algorithms.hpp"
#include "emnlms/config.hpp"
#include "emnlms/delay_line.hpp"
#include "emnlms/metrics.hpp"
#include "emnlms/signals.hpp"
#include "emnlms/wav.hpp"

namespace emnlms {

struct Scenario {
    SignalStream x;
    Vector h;  // true echo path, including any prepended delay
    Microphone mic;
};

inline Scenario build_scenario(const ScenarioConfig& c) {
    validate(c);
    const std::size_t n = c.samples();
    Scenario s;
    switch (c.excitation) {
        case Excitation::white: s.x = gen_white_noise(n, c.seeds.excitation, c.fs); break;
        case Excitation::speechlike: {
            SpeechlikeParams p;
            p.fs = c.fs;
            s.x = gen_speechlike(n, c.seeds.excitation, p);
            break;
        }
        case Excitation::wav: {
            SignalStream w = read_wav(c.wav_path);
            if (w.fs != c.fs)
                throw InvalidArgument(c.wav_path + ": sample rate " + format_real(w.fs) + " differs from scenario.fs");
            if (w.size() < n) throw InvalidArgument(c.wav_path + ": shorter than scenario.duration_s");
            w.samples.resize(n);
            s.x = std::move(w);
            break;
        }
    }
    if (c.input_gain != 1.0)
        for (double& v : s.x.samples) v *= c.input_gain;
    if (c.rir_file.empty()) {
        s.h = synth_rir(RirSpec{c.taps, c.t60, c.fs, c.seeds.rir, c.total_pre_delay()});
    } else {
        s.h = prepend_delay(read_rir_csv(c.rir_file), c.total_pre_delay());
        if (c.adapt && c.adapt->n_t > s.h.size()) throw InvalidArgument("adapt_nlms.n_t exceeds the imported RIR length");
    }
    s.mic = simulate_microphone(s.x, s.h, c.snr_db, c.seeds.noise);
    return s;
}

struct AlgorithmResult {
    Algorithm algo;
    double final_delta_h_db = 0.0;
    Vector h_hat;
};

struct ExperimentResult {
    std::size_t samples = 0;
    std::vector<AlgorithmResult> algorithms;

    const AlgorithmResult& get(Algorithm a) const {
        for (const auto& r : algorithms)
            if (r.algo == a) return r;
        throw InvalidArgument("algorithm was not run");
    }
};

/// Run every enabled algorithm over the scenario. `observe(record, x_window)`
/// is called for every sample and algorithm, in sample order and, within a
/// sample, in the order em_nlms, adapt_nlms, conv_nlms.
template <class Observer>
ExperimentResult simulate(const ScenarioConfig& c, const Scenario& s, Observer&& observe) {
    const std::size_t m = s.h.size();
    std::optional<EmNlms> em;
    std::optional<AdaptNlms> adapt;
    std::optional<ConvNlms> conv;
    if (c.em) em.emplace(m, *c.em);
    if (c.adapt) adapt.emplace(m, *c.adapt);
    if (c.conv) conv.emplace(m, *c.conv, c.fs);

    DelayLine line(m);
    const Vector& d = s.mic.d.samples;
    TraceRecord rec;
    for (std::size_t n = 0; n < d.size(); ++n) {
        line.push(s.x.samples[n]);
        const auto x = line.window();
        rec.n = n;
        rec.t = static_cast<double>(n) / c.fs;
        rec.d = d[n];
        auto emit = [&](Algorithm a, const StepOutcome& out, std::span<const double> coeffs) {
            rec.algo = a;
            rec.e = out.e;
            rec.lambda = out.lambda;
            rec.alpha = out.alpha;
            rec.delta_h_db = system_distance_db(coeffs, s.h);
            observe(static_cast<const TraceRecord&>(rec), x);
        };
        if (em) {
            const StepOutcome out = em->process(x, d[n]);
            rec.c_h = em->state().c_h;
            rec.c_v = em->hyper().c_v;
            rec.c_w = em->hyper().c_w;
            rec.c_w_raw = em->c_w_raw();
            emit(Algorithm::em_nlms, out, em->coefficients());
            rec.c_h = rec.c_v = rec.c_w = rec.c_w_raw = std::nullopt;
        }
        if (adapt) emit(Algorithm::adapt_nlms, adapt->process(x, d[n]), adapt->coefficients());
        if (conv) emit(Algorithm::conv_nlms, conv->process(x, d[n]), conv->coefficients());
    }

    ExperimentResult res;
    res.samples = d.size();
    auto collect = [&](Algorithm a, std::span<const double> coeffs) {
        res.algorithms.push_back({a, system_distance_db(coeffs, s.h), Vector(coeffs.begin(), coeffs.end())});
    };
    if (em) collect(Algorithm::em_nlms, em->coefficients());
    if (adapt) collect(Algorithm::adapt_nlms, adapt->coefficients());
    if (conv) collect(Algorithm::conv_nlms, conv->coefficients());
    return res;
}

inline ExperimentResult simulate(const ScenarioConfig& c, const Scenario& s) {
    return simulate(c, s, [](const TraceRecord&, std::span<const double>) {});
}

/// Buffered file writer that keeps a running SHA-256 of everything written.
class HashingWriter {
public:
    explicit HashingWriter(const std::filesystem::path& path)
        : path_(path), os_(path, std::ios::binary), ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
        if (!os_) throw IoError("cannot open '" + path.string() + "' for writing");
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) throw Error("SHA-256 init failed");
    }

    std::ostringstream& buffer() { return buf_; }

    void flush_if_large() {
        if (buf_.tellp() > (1 << 16)) flush();
    }

    /// Flush, close and return the lowercase hex digest.
    std::string finish() {
        flush();
        os_.close();
        if (!os_) throw IoError("write failed: '" + path_.string() + "'");
        unsigned char md[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx_.get(), md, &len) != 1) throw Error("SHA-256 final failed");
        std::string hex;
        char b[3];
        for (unsigned int i = 0; i < len; ++i) {
            std::snprintf(b, sizeof b, "%02x", md[i]);
            hex += b;
        }
        return hex;
    }

private:
    void flush() {
        const std::string chunk = buf_.str();
        buf_.str({});
        EVP_DigestUpdate(ctx_.get(), chunk.data(), chunk.size());
        os_.write(chunk.data(), static_cast<std::streamsize>(chunk.size()));
        if (!os_) throw IoError("write failed: '" + path_.string() + "'");
    }

    std::filesystem::path path_;
    std::ofstream os_;
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
    std::ostringstream buf_;
};

struct RunOptions {
    std::string out_dir;  // overrides scenario.output when non-empty
    bool emit_plot_data = false;
};

struct RunSummary {
    std::filesystem::path out_dir;
    ExperimentResult result;
    std::vector<std::pair<Algorithm, std::string>> csv_sha256;

    const std::string& hash(Algorithm a) const {
        for (const auto& [algo, h] : csv_sha256)
            if (algo == a) return h;
        throw InvalidArgument("algorithm was not run");
    }
};

inline std::string trace_file_name(Algorithm a) { return "trace_" + std::string(algorithm_name(a)) + ".csv"; }

/// Build the scenario, run it and write trace_<algo>.csv, rir.csv and
/// summary.txt (plus plot_<algo>_{delta_h,alpha}.dat when requested).
inline RunSummary run_experiment(const ScenarioConfig& c, const RunOptions& opt = {}) {
    const Scenario s = build_scenario(c);
    RunSummary summary;
    summary.out_dir = opt.out_dir.empty() ? c.output : opt.out_dir;
    std::error_code ec;
    std::filesystem::create_directories(summary.out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + summary.out_dir.string() + "': " + ec.message());

    write_rir_csv((summary.out_dir / "rir.csv").string(), s.h);

    const auto algos = c.algorithms();
    std::vector<std::unique_ptr<HashingWriter>> traces;
    std::vector<std::unique_ptr<std::ofstream>> plot_dh, plot_alpha;
    auto slot = [&](Algorithm a) {
        for (std::size_t i = 0; i < algos.size(); ++i)
            if (algos[i] == a) return i;
        return std::size_t{0};
    };
    for (Algorithm a : algos) {
        traces.push_back(std::make_unique<HashingWriter>(summary.out_dir / trace_file_name(a)));
        traces.back()->buffer() << kTraceHeader << '\n';
        if (opt.emit_plot_data) {
            const std::string stem = "plot_" + std::string(algorithm_name(a));
            plot_dh.push_back(std::make_unique<std::ofstream>(summary.out_dir / (stem + "_delta_h.dat")));
            plot_alpha.push_back(std::make_unique<std::ofstream>(summary.out_dir / (stem + "_alpha.dat")));
            if (!*plot_dh.back() || !*plot_alpha.back()) throw IoError("cannot open plot data files");
        }
    }
    // 100 points per second for plotting
    const std::size_t plot_step = std::max<std::size_t>(1, static_cast<std::size_t>(c.fs / 100.0));

    summary.result = simulate(c, s, [&](const TraceRecord& r, std::span<const double>) {
        const std::size_t i = slot(r.algo);
        if (r.n % c.decimation == 0) {
            write_trace_row(traces[i]->buffer(), r);
            traces[i]->flush_if_large();
        }
        if (opt.emit_plot_data && r.n % plot_step == 0) {
            *plot_dh[i] << format_real(r.t) << ' ' << format_real(r.delta_h_db) << '\n';
            *plot_alpha[i] << format_real(r.t) << ' ' << format_real(r.alpha) << '\n';
        }
    });
    for (std::size_t i = 0; i < algos.size(); ++i) summary.csv_sha256.emplace_back(algos[i], traces[i]->finish());

    std::ofstream os(summary.out_dir / "summary.txt", std::ios::binary);
    if (!os) throw IoError("cannot write summary.txt");
    os << "samples=" << summary.result.samples << '\n';
    os << "taps=" << s.h.size() << '\n';
    for (const auto& r : summary.result.algorithms)
        os << "final_delta_h_db." << algorithm_name(r.algo) << '=' << format_real(r.final_delta_h_db) << '\n';
    for (const auto& [a, h] : summary.csv_sha256) os << "sha256." << trace_file_name(a) << '=' << h << '\n';
    for (const auto& [k, v] : resolved_entries(c)) os << "config." << k << '=' << v << '\n';
    if (!os) throw IoError("write failed: summary.txt");
    return summary;
}

}  // namespace emnlms

#endif  // EMNLMS_EXPERIMENT_HPP
