#ifndef EMNLMS_ORACLES_HPP
#define EMNLMS_ORACLES_HPP

// Slow reference implementations used to check the streaming kernels:
//
//  - the full-covariance Kalman recursion that the scalar EM-NLMS E step
//    collapses to when the covariance is isotropic,
//  - a Monte-Carlo estimator of the optimal NLMS stepsize
//        (1/M) E{|h_n - h_hat_{n-1}|^2} / E{e_n^2}
//    over an ensemble drawn from the random-walk state-space model,
//  - the mean-field scalar variance recursion it is compared against.
//
// O(M^2) per step; not meant for the streaming path.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "emnlms/error.hpp"
#include "emnlms/filter_core.hpp"

namespace emnlms::oracle {

struct FullKalmanState {
    Eigen::VectorXd h_hat;
    Eigen::MatrixXd cov;

    static FullKalmanState isotropic(std::span<const double> h_hat, double c) {
        const auto m = static_cast<Eigen::Index>(h_hat.size());
        FullKalmanState s{Eigen::Map<const Eigen::VectorXd>(h_hat.data(), m), c * Eigen::MatrixXd::Identity(m, m)};
        return s;
    }
};

/// One Kalman step for the random-walk model h_n = h_{n-1} + w_n, d_n = x^T h_n + v_n
/// with isotropic process noise:
///
///     P = C + c_w I,  Lambda = P / (x^T P x + c_v),
///     h' = h + Lambda x e,  C' = (I - Lambda x x^T) P   (then symmetrised)
inline FullKalmanState kalman_full_step(FullKalmanState s, std::span<const double> x, double d, double c_w, double c_v) {
    const auto m = s.h_hat.size();
    if (s.cov.rows() != m || s.cov.cols() != m) throw DimensionError("kalman_full_step: covariance shape");
    detail::require_same_length(x.size(), static_cast<std::size_t>(m), "kalman_full_step");
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), m);

    const Eigen::MatrixXd prior = s.cov + c_w * Eigen::MatrixXd::Identity(m, m);
    const double denom = xv.dot(prior * xv) + c_v;
    if (!(denom != 0.0)) throw DegenerateError("kalman_full_step: singular denominator x^T P x + c_v = 0");
    const Eigen::MatrixXd gain = prior / denom;
    const double e = d - xv.dot(s.h_hat);

    s.h_hat += gain * xv * e;
    Eigen::MatrixXd cov = (Eigen::MatrixXd::Identity(m, m) - gain * xv * xv.transpose()) * prior;
    s.cov = 0.5 * (cov + cov.transpose());
    return s;
}

/// Mean of the diagonal.
inline double trace_average(const Eigen::MatrixXd& cov) {
    if (cov.rows() != cov.cols()) throw DimensionError("trace_average: matrix is not square");
    if (cov.rows() == 0) throw DimensionError("trace_average: empty matrix");
    return cov.trace() / static_cast<double>(cov.rows());
}

struct GenerativeModel {
    std::size_t taps = 16;
    double c_w = 1e-4;
    double c_v = 1e-2;
    Vector h_init;  // prior mean of h_0; the filter starts here
    std::uint64_t seed = 1;
};

struct McFilterConstants {
    EmHyper hyper;      // variances used by the filter (held fixed, no M step)
    double c_h0 = 0.1;  // prior variance of h_0 around h_init
};

struct McEstimate {
    double ratio = 0.0;              // (1/M) mean|h_n - h_hat_{n-1}|^2 / mean e_n^2
    double mean_sq_deviation = 0.0;  // mean |h_n - h_hat_{n-1}|^2
    double mean_sq_error = 0.0;      // mean e_n^2
};

/// Ensemble estimate of the optimal stepsize at step `steps`.
///
/// Trial i draws from Rng(seed + i): h_0 ~ N(h_init, c_h0 I), then per step
/// x ~ N(0, I), w ~ N(0, c_w I), v ~ N(0, c_v), and runs the EM-NLMS E step
/// from h_hat_0 = h_init with the filter constants. Statistics are taken at
/// the final step and reduced in trial order.
inline McEstimate mc_optimal_stepsize(const GenerativeModel& model, const McFilterConstants& constants,
                                      std::size_t steps, std::size_t trials) {
    if (steps < 1 || trials < 1) throw InvalidArgument("mc_optimal_stepsize: steps and trials must be >= 1");
    if (model.taps < 1) throw InvalidArgument("mc_optimal_stepsize: taps must be >= 1");
    detail::require_same_length(model.h_init.size(), model.taps, "mc_optimal_stepsize");
    detail::require_nonnegative(model.c_w, "c_w");
    detail::require_nonnegative(model.c_v, "c_v");
    detail::require_nonnegative(constants.c_h0, "c_h0");

    const std::size_t m = model.taps;
    const double sd_h0 = std::sqrt(constants.c_h0);
    const double sd_w = std::sqrt(model.c_w);
    const double sd_v = std::sqrt(model.c_v);

    double sum_dev = 0.0;
    double sum_err = 0.0;
    Vector h(m), x(m);
    for (std::size_t trial = 0; trial < trials; ++trial) {
        std::mt19937_64 rng(model.seed + trial);
        std::normal_distribution<double> gauss;
        for (std::size_t k = 0; k < m; ++k) h[k] = model.h_init[k] + sd_h0 * gauss(rng);
        FilterState filt{model.h_init, constants.c_h0};

        double dev = 0.0;
        double err = 0.0;
        for (std::size_t n = 0; n < steps; ++n) {
            for (auto& v : x) v = gauss(rng);
            for (auto& v : h) v += sd_w * gauss(rng);
            const double d = dot(x, h) + sd_v * gauss(rng);
            if (n + 1 == steps) {
                dev = 0.0;
                for (std::size_t k = 0; k < m; ++k) dev += (h[k] - filt.h_hat[k]) * (h[k] - filt.h_hat[k]);
            }
            auto [next, out] = em_nlms_e_step(std::move(filt), constants.hyper, x, d);
            filt = std::move(next);
            err = out.e * out.e;
        }
        sum_dev += dev;
        sum_err += err;
    }
    McEstimate est;
    est.mean_sq_deviation = sum_dev / static_cast<double>(trials);
    est.mean_sq_error = sum_err / static_cast<double>(trials);
    if (!(est.mean_sq_error > 0.0)) throw DegenerateError("mc_optimal_stepsize: ensemble error power is zero");
    est.ratio = est.mean_sq_deviation / static_cast<double>(m) / est.mean_sq_error;
    return est;
}

/// Scalar recursion C_h,n = (1 - lambda_n E/M)(C_h,n-1 + c_w) evaluated at the
/// mean regressor energy E. Returns C_h,0 ... C_h,steps.
inline std::vector<double> mean_field_variance(double c_h0, double c_w, double c_v, double mean_energy,
                                               std::size_t taps, std::size_t steps) {
    std::vector<double> c{c_h0};
    c.reserve(steps + 1);
    for (std::size_t n = 0; n < steps; ++n) {
        const double lambda = lambda_em(c.back(), c_w, c_v, mean_energy, 0.0);
        c.push_back((1.0 - lambda * mean_energy / static_cast<double>(taps)) * (c.back() + c_w));
    }
    return c;
}

}  // namespace emnlms::oracle

#endif  // EMNLMS_ORACLES_HPP
