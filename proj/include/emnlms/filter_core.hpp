#ifndef EMNLMS_FILTER_CORE_HPP
#define EMNLMS_FILTER_CORE_HPP

// Per-sample update kernels for three NLMS variants:
//
//   EM-NLMS     stepsize from a scalar-covariance Kalman recursion whose noise
//               variances (C_v, C_w) are re-estimated every sample (E + M step)
//   Adapt. NLMS stepsize from the energy of the first N_T coefficients over a
//               recursively smoothed error power
//   Conv. NLMS  fixed numerator over regressor energy, optional energy gate
//
// All kernels are pure: state goes in by value and comes back updated, so a
// caller that moves its state in pays no copy. Every kernel shares the
// coefficient update  h <- h + lambda * x * e  with  e = d - x^T h.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "emnlms/error.hpp"

namespace emnlms {

using Vector = std::vector<double>;

namespace detail {

inline void require_same_length(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw DimensionError(std::string(what) + ": length mismatch (" + std::to_string(a) +
                             " vs " + std::to_string(b) + ")");
    }
}

inline void require_nonnegative(double v, const char* name) {
    if (!(v >= 0.0)) throw InvalidArgument(std::string(name) + " must be >= 0");
}

}  // namespace detail

inline double dot(std::span<const double> a, std::span<const double> b) {
    detail::require_same_length(a.size(), b.size(), "dot");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

/// x^T x, recomputed from scratch on every call.
inline double energy(std::span<const double> x) {
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return acc;
}

/// h += lambda * e * x
inline void nlms_update(std::span<double> h, std::span<const double> x, double lambda, double e) {
    detail::require_same_length(h.size(), x.size(), "nlms_update");
    const double g = lambda * e;
    for (std::size_t i = 0; i < h.size(); ++i) h[i] += g * x[i];
}

/// EM-NLMS filter state: coefficient estimate plus the scalar posterior variance C_h.
struct FilterState {
    Vector h_hat;
    double c_h = 0.1;

    static FilterState zeros(std::size_t taps, double c_h0 = 0.1) { return {Vector(taps, 0.0), c_h0}; }
};

/// Noise variances used by the E step; the M step produces the next set.
struct EmHyper {
    double c_v = 0.1;
    double c_w = 0.1;
    double eps = 0.01;
};

struct AdaptNlmsState {
    Vector h_hat;
    double err_power = 0.1;  // recursive estimate of E{e_{n-1}^2}
    std::size_t n_t = 5;
    double eta = 0.9;
    std::optional<double> lambda_cap;
};

struct ConvNlmsState {
    Vector h_hat;
    double mu = 0.5;
    std::optional<double> gate_threshold;  // freeze adaptation while x^T x is below this
};

struct StepOutcome {
    double e = 0.0;
    double lambda = 0.0;
    double alpha = 0.0;  // lambda * x^T x
};

/// Return d - x^T h_hat.
inline double error_signal(std::span<const double> x, std::span<const double> h_hat, double d) {
    detail::require_same_length(x.size(), h_hat.size(), "error_signal");
    return d - dot(x, h_hat);
}

/// Scalar EM-NLMS stepsize
///
///     lambda = (C_h + C_w) / (x^T x (C_h + C_w) + C_v + eps)
///
/// The result always satisfies 0 <= lambda * x^T x < 1. eps = 0 is accepted for
/// comparisons against the unregularised recursion; a zero prior variance
/// (C_h + C_w = 0) yields lambda = 0.
inline double lambda_em(double c_h_prev, double c_w, double c_v, double energy, double eps) {
    detail::require_nonnegative(c_h_prev, "c_h");
    detail::require_nonnegative(c_w, "c_w");
    detail::require_nonnegative(c_v, "c_v");
    detail::require_nonnegative(energy, "energy");
    detail::require_nonnegative(eps, "eps");
    const double prior = c_h_prev + c_w;
    if (prior == 0.0) return 0.0;
    const double denom = energy * prior + c_v + eps;
    if (!(denom > 0.0)) throw DegenerateError("lambda_em: zero denominator (no energy, no noise, eps = 0)");
    double lambda = prior / denom;
    // C_v + eps below one ulp of energy * prior rounds the product up to 1
    if (eps > 0.0 || c_v > 0.0)
        while (lambda * energy >= 1.0) lambda = std::nextafter(lambda, 0.0);
    return lambda;
}

/// E step: MMSE coefficient update with the scalar stepsize and the
/// trace-averaged posterior variance  C_h' = (1 - lambda x^T x / M)(C_h + C_w).
inline std::pair<FilterState, StepOutcome> em_nlms_e_step(FilterState state, const EmHyper& hyper,
                                                          std::span<const double> x, double d) {
    detail::require_same_length(x.size(), state.h_hat.size(), "em_nlms_e_step");
    const auto taps = static_cast<double>(x.size());
    const double ex = energy(x);
    const double e = error_signal(x, state.h_hat, d);
    const double lambda = lambda_em(state.c_h, hyper.c_w, hyper.c_v, ex, hyper.eps);
    nlms_update(state.h_hat, x, lambda, e);
    state.c_h = (1.0 - lambda * ex / taps) * (state.c_h + hyper.c_w);
    return {std::move(state), StepOutcome{e, lambda, lambda * ex}};
}

struct EmEstimate {
    EmHyper next;
    double c_w_raw = 0.0;   // before flooring at zero
    double h_energy = 0.0;  // h_n^T h_n, reusable as the next step's "before" value
};

/// M step from the post-update state and two scalars of the pre-update state.
///
///     C_v' = (d - x^T h_n)^2 + x^T x C_h,n
///     C_w' = C_h,n - C_h,n-1 + (h_n^T h_n - h_{n-1}^T h_{n-1}) / M,   floored at 0
inline EmEstimate estimate_em_parameters(const FilterState& after, double c_h_before,
                                         double h_energy_before, std::span<const double> x, double d,
                                         const EmHyper& hyper) {
    detail::require_same_length(x.size(), after.h_hat.size(), "em_nlms_m_step");
    const auto taps = static_cast<double>(x.size());
    const double e_post = error_signal(x, after.h_hat, d);
    EmEstimate out;
    out.next.eps = hyper.eps;
    out.next.c_v = e_post * e_post + energy(x) * after.c_h;
    out.h_energy = energy(after.h_hat);
    out.c_w_raw = after.c_h - c_h_before + (out.h_energy - h_energy_before) / taps;
    out.next.c_w = out.c_w_raw > 0.0 ? out.c_w_raw : 0.0;
    return out;
}

inline EmHyper em_nlms_m_step(const FilterState& after, const FilterState& before,
                              std::span<const double> x, double d, const EmHyper& hyper) {
    detail::require_same_length(after.h_hat.size(), before.h_hat.size(), "em_nlms_m_step");
    return estimate_em_parameters(after, before.c_h, energy(before.h_hat), x, d, hyper).next;
}

/// Stepsize of the delayed-coefficient NLMS:
///
///     lambda = (1/N_T) sum_{k<N_T} h_k^2 / ((1-eta) e^2 + eta E{e_{n-1}^2} + eps)
///
/// optionally capped at lambda_cap. The error power recursion uses the raw e.
inline std::pair<AdaptNlmsState, StepOutcome> adapt_nlms_step(AdaptNlmsState state,
                                                              std::span<const double> x, double d,
                                                              double eps) {
    detail::require_same_length(x.size(), state.h_hat.size(), "adapt_nlms_step");
    if (state.n_t < 1 || state.n_t > state.h_hat.size())
        throw InvalidArgument("adapt_nlms_step: n_t must lie in [1, M]");
    if (!(state.eta >= 0.0 && state.eta < 1.0)) throw InvalidArgument("adapt_nlms_step: eta must lie in [0, 1)");
    detail::require_nonnegative(state.err_power, "err_power");
    if (!(eps > 0.0)) throw InvalidArgument("adapt_nlms_step: eps must be > 0");

    const double e = error_signal(x, state.h_hat, d);
    const double smoothed = (1.0 - state.eta) * e * e + state.eta * state.err_power;
    const double head = energy(std::span<const double>(state.h_hat).first(state.n_t));
    double lambda = head / static_cast<double>(state.n_t) / (smoothed + eps);
    if (state.lambda_cap && lambda > *state.lambda_cap) lambda = *state.lambda_cap;
    nlms_update(state.h_hat, x, lambda, e);
    state.err_power = smoothed;
    return {std::move(state), StepOutcome{e, lambda, lambda * energy(x)}};
}

/// Conventional NLMS, lambda = mu / (x^T x + eps), or 0 when the energy gate is closed.
inline std::pair<ConvNlmsState, StepOutcome> conv_nlms_step(ConvNlmsState state, std::span<const double> x,
                                                            double d, double eps) {
    detail::require_same_length(x.size(), state.h_hat.size(), "conv_nlms_step");
    if (!(state.mu > 0.0)) throw InvalidArgument("conv_nlms_step: mu must be > 0");
    detail::require_nonnegative(eps, "eps");

    const double ex = energy(x);
    const double e = error_signal(x, state.h_hat, d);
    double lambda = 0.0;
    if (!(state.gate_threshold && ex < *state.gate_threshold)) {
        if (!(ex + eps > 0.0)) throw DegenerateError("conv_nlms_step: zero energy with eps = 0");
        lambda = state.mu / (ex + eps);
    }
    nlms_update(state.h_hat, x, lambda, e);
    return {std::move(state), StepOutcome{e, lambda, lambda * ex}};
}

}  // namespace emnlms

#endif  // EMNLMS_FILTER_CORE_HPP
