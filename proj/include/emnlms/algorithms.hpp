#ifndef EMNLMS_ALGORITHMS_HPP
#define EMNLMS_ALGORITHMS_HPP

// Stateful per-sample drivers around the pure kernels in filter_core.hpp.

#include <algorithm>
#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <string_view>

#include "emnlms/filter_core.hpp"

namespace emnlms {

enum class Algorithm { em_nlms, adapt_nlms, conv_nlms };

constexpr std::string_view algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::em_nlms: return "em_nlms";
        case Algorithm::adapt_nlms: return "adapt_nlms";
        case Algorithm::conv_nlms: return "conv_nlms";
    }
    return "?";
}

inline std::optional<Algorithm> parse_algorithm(std::string_view s) {
    for (auto a : {Algorithm::em_nlms, Algorithm::adapt_nlms, Algorithm::conv_nlms})
        if (algorithm_name(a) == s) return a;
    return std::nullopt;
}

struct EmNlmsParams {
    double c_h0 = 0.1;
    double c_w0 = 0.1;
    double c_v0 = 0.1;
    double eps = 0.01;
};

struct AdaptNlmsParams {
    std::size_t n_t = 5;
    double eta = 0.9;
    double e0_sq = 0.1;
    double eps = 0.01;
    std::optional<double> lambda_cap;
    bool delay = true;  // prepend n_t zero taps to the echo path
    // Conventional NLMS steps before switching to the delayed-coefficient
    // stepsize; while the first n_t taps are all zero the warm start continues.
    // 0 disables it. lambda_cap applies to these steps too.
    std::size_t warm_start_samples = 1;
    double warm_start_mu = 0.5;
};

struct GateParams {
    double factor = 1e-3;   // threshold relative to the running mean energy
    double window_s = 1.0;  // running-mean length
};

struct ConvNlmsParams {
    double mu = 0.5;
    double eps = 0.01;
    std::optional<GateParams> gate;
};

/// EM-NLMS: E step followed by M step on every sample.
class EmNlms {
public:
    EmNlms(std::size_t taps, const EmNlmsParams& p)
        : state_(FilterState::zeros(taps, p.c_h0)), hyper_{p.c_v0, p.c_w0, p.eps}, c_w_raw_(p.c_w0) {}

    StepOutcome process(std::span<const double> x, double d) {
        const double c_h_before = state_.c_h;
        auto [next, out] = em_nlms_e_step(std::move(state_), hyper_, x, d);
        state_ = std::move(next);
        const EmEstimate est = estimate_em_parameters(state_, c_h_before, h_energy_, x, d, hyper_);
        hyper_ = est.next;
        c_w_raw_ = est.c_w_raw;
        h_energy_ = est.h_energy;
        return out;
    }

    std::span<const double> coefficients() const { return state_.h_hat; }
    const FilterState& state() const { return state_; }
    /// Parameters for the next sample.
    const EmHyper& hyper() const { return hyper_; }
    double c_w_raw() const { return c_w_raw_; }

private:
    FilterState state_;
    EmHyper hyper_;
    double c_w_raw_;
    double h_energy_ = 0.0;
};

/// Delayed-coefficient NLMS. With a zero initial filter its stepsize numerator
/// stays zero forever, so it is bootstrapped with conventional NLMS steps.
class AdaptNlms {
public:
    AdaptNlms(std::size_t taps, const AdaptNlmsParams& p)
        : state_{Vector(taps, 0.0), p.e0_sq, p.n_t, p.eta, p.lambda_cap},
          eps_(p.eps),
          warm_samples_(p.warm_start_samples),
          warm_mu_(p.warm_start_mu) {}

    StepOutcome process(std::span<const double> x, double d) {
        if (warm_samples_ > 0 && (steps_++ < warm_samples_ || head_energy() == 0.0)) return warm_step(x, d);
        auto [next, out] = adapt_nlms_step(std::move(state_), x, d, eps_);
        state_ = std::move(next);
        return out;
    }

    std::span<const double> coefficients() const { return state_.h_hat; }
    const AdaptNlmsState& state() const { return state_; }

private:
    double head_energy() const { return energy(std::span<const double>(state_.h_hat).first(state_.n_t)); }

    StepOutcome warm_step(std::span<const double> x, double d) {
        detail::require_same_length(x.size(), state_.h_hat.size(), "AdaptNlms");
        const double ex = energy(x);
        const double e = error_signal(x, state_.h_hat, d);
        double lambda = warm_mu_ / (ex + eps_);
        if (state_.lambda_cap) lambda = std::min(lambda, *state_.lambda_cap);
        nlms_update(state_.h_hat, x, lambda, e);
        state_.err_power = (1.0 - state_.eta) * e * e + state_.eta * state_.err_power;
        return {e, lambda, lambda * ex};
    }

    AdaptNlmsState state_;
    double eps_;
    std::size_t warm_samples_;
    std::size_t steps_ = 0;
    double warm_mu_;
};

/// Running mean of the regressor energy over a fixed number of samples.
class EnergyGate {
public:
    EnergyGate(double factor, std::size_t window) : factor_(factor), window_(window == 0 ? 1 : window) {}

    /// Feed the current x^T x and return the adaptation threshold.
    double threshold(double frame_energy) {
        history_.push_back(frame_energy);
        sum_ += frame_energy;
        if (history_.size() > window_) {
            sum_ -= history_.front();
            history_.pop_front();
        }
        if (sum_ < 0.0) sum_ = 0.0;  // cancellation residue
        return factor_ * sum_ / static_cast<double>(history_.size());
    }

private:
    double factor_;
    std::size_t window_;
    std::deque<double> history_;
    double sum_ = 0.0;
};

class ConvNlms {
public:
    ConvNlms(std::size_t taps, const ConvNlmsParams& p, double fs)
        : state_{Vector(taps, 0.0), p.mu, std::nullopt}, eps_(p.eps) {
        if (p.gate) gate_.emplace(p.gate->factor, static_cast<std::size_t>(p.gate->window_s * fs + 0.5));
    }

    StepOutcome process(std::span<const double> x, double d) {
        if (gate_) state_.gate_threshold = gate_->threshold(energy(x));
        auto [next, out] = conv_nlms_step(std::move(state_), x, d, eps_);
        state_ = std::move(next);
        return out;
    }

    std::span<const double> coefficients() const { return state_.h_hat; }
    const ConvNlmsState& state() const { return state_; }

private:
    ConvNlmsState state_;
    double eps_;
    std::optional<EnergyGate> gate_;
};

}  // namespace emnlms

#endif  // EMNLMS_ALGORITHMS_HPP
