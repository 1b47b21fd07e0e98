#ifndef EMNLMS_METRICS_HPP
#define EMNLMS_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <span>
#include <string>

#include "emnlms/algorithms.hpp"
#include "emnlms/error.hpp"
#include "emnlms/filter_core.hpp"

namespace emnlms {

/// Reported for an exact match instead of -inf.
inline constexpr double kDistanceFloorDb = -300.0;

/// Normalised misalignment 10 log10(|h_hat - h|^2 / |h|^2) in dB.
inline double system_distance_db(std::span<const double> h_hat, std::span<const double> h_true) {
    detail::require_same_length(h_hat.size(), h_true.size(), "system_distance_db");
    double num = 0.0;
    double ref = 0.0;
    for (std::size_t i = 0; i < h_true.size(); ++i) {
        const double diff = h_hat[i] - h_true[i];
        num += diff * diff;
        ref += h_true[i] * h_true[i];
    }
    if (ref == 0.0) throw DegenerateError("system_distance_db: reference response has zero norm");
    if (num == 0.0) return kDistanceFloorDb;
    return std::max(10.0 * std::log10(num / ref), kDistanceFloorDb);
}

inline double normalized_alpha(double lambda, double energy) {
    detail::require_nonnegative(energy, "energy");
    return lambda * energy;
}

struct TraceRecord {
    std::size_t n = 0;
    double t = 0.0;
    Algorithm algo = Algorithm::em_nlms;
    double e = 0.0;
    double lambda = 0.0;
    double alpha = 0.0;
    double delta_h_db = 0.0;
    double d = 0.0;
    // EM-NLMS only
    std::optional<double> c_h;
    std::optional<double> c_v;
    std::optional<double> c_w;
    std::optional<double> c_w_raw;
};

inline constexpr const char* kTraceHeader = "n,t,algo,e,lambda,alpha,delta_h_db,d,c_h,c_v,c_w,c_w_raw";

/// Round-trippable text for a double: 17 significant digits.
inline std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_trace_row(std::ostream& os, const TraceRecord& r) {
    auto opt = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string(); };
    os << r.n << ',' << format_real(r.t) << ',' << algorithm_name(r.algo) << ',' << format_real(r.e) << ','
       << format_real(r.lambda) << ',' << format_real(r.alpha) << ',' << format_real(r.delta_h_db) << ','
       << format_real(r.d) << ',' << opt(r.c_h) << ',' << opt(r.c_v) << ',' << opt(r.c_w) << ','
       << opt(r.c_w_raw) << '\n';
}

}  // namespace emnlms

#endif  // EMNLMS_METRICS_HPP
