#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "emnlms/algorithms.hpp"
#include "emnlms/filter_core.hpp"
#include "test_util.hpp"

namespace emnlms {
namespace {

// Exact rationals from tests/oracles/scalar_chain.py
constexpr double kChainLambda = 0.39215686274509803;     // 20/51
constexpr double kChainH = 0.39215686274509803;          // 20/51
constexpr double kChainCh = 0.12156862745098039;         // 31/255
constexpr double kChainCv = 0.28965782391387929;         // 3767/13005
constexpr double kChainCwRaw = 0.17535563244905805;      // 4561/26010

TEST(LambdaEm, HandEvaluated) {
    EXPECT_NEAR(lambda_em(0.1, 0.1, 0.1, 0.0, 0.01), 1.8181818181818183, 1e-15);
    EXPECT_NEAR(lambda_em(0.1, 0.1, 0.1, 100.0, 0.01), 0.009945300845350573, 1e-17);
}

TEST(LambdaEm, ZeroPriorGivesZero) { EXPECT_EQ(lambda_em(0.0, 0.0, 0.1, 5.0, 0.01), 0.0); }

TEST(LambdaEm, RejectsNegativeVariance) {
    EXPECT_THROW(lambda_em(-0.1, 0.1, 0.1, 1.0, 0.01), InvalidArgument);
    EXPECT_THROW(lambda_em(0.1, 0.1, -1e-9, 1.0, 0.01), InvalidArgument);
}

TEST(LambdaEm, DegenerateWithoutNoiseOrEnergy) { EXPECT_THROW(lambda_em(0.1, 0.1, 0.0, 0.0, 0.0), DegenerateError); }

TEST(LambdaEm, NormalisedStepBelowOne) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> logu(-8.0, 4.0);
    for (int i = 0; i < 20000; ++i) {
        const double c_h = std::pow(10.0, logu(rng));
        const double c_w = i % 7 == 0 ? 0.0 : std::pow(10.0, logu(rng));
        const double c_v = i % 5 == 0 ? 0.0 : std::pow(10.0, logu(rng));
        const double ex = std::pow(10.0, logu(rng));
        const double a = lambda_em(c_h, c_w, c_v, ex, 0.01) * ex;
        ASSERT_GE(a, 0.0);
        ASSERT_LT(a, 1.0);
    }
}

TEST(LambdaEm, BoundHoldsWhenNoiseIsBelowRounding) {
    const double ex = 6.4e7;
    const double lambda = lambda_em(1e3, 0.0, 1e-12, ex, 1e-12);
    EXPECT_LT(lambda * ex, 1.0);
    EXPECT_GT(lambda * ex, 1.0 - 1e-15);
}

TEST(EmStep, ChainM2) {
    const Vector x{1.0, 1.0};
    const EmHyper hyper{0.1, 0.1, 0.01};
    const FilterState before = FilterState::zeros(2, 0.1);
    auto [after, out] = em_nlms_e_step(before, hyper, x, 1.0);
    EXPECT_NEAR(out.e, 1.0, 1e-15);
    EXPECT_NEAR(out.lambda, kChainLambda, 1e-12);
    EXPECT_NEAR(after.h_hat[0], kChainH, 1e-12);
    EXPECT_NEAR(after.h_hat[1], kChainH, 1e-12);
    EXPECT_NEAR(after.c_h, kChainCh, 1e-12);

    const EmEstimate est = estimate_em_parameters(after, before.c_h, 0.0, x, 1.0, hyper);
    EXPECT_NEAR(est.next.c_v, kChainCv, 1e-12);
    EXPECT_NEAR(est.c_w_raw, kChainCwRaw, 1e-12);
    EXPECT_NEAR(est.next.c_w, kChainCwRaw, 1e-12);
    EXPECT_EQ(est.next.eps, 0.01);

    const EmHyper via_states = em_nlms_m_step(after, before, x, 1.0, hyper);
    EXPECT_DOUBLE_EQ(via_states.c_v, est.next.c_v);
    EXPECT_DOUBLE_EQ(via_states.c_w, est.next.c_w);
}

TEST(EmStep, DriverMatchesKernels) {
    EmNlms filt(2, EmNlmsParams{});
    const Vector x{1.0, 1.0};
    const StepOutcome out = filt.process(x, 1.0);
    EXPECT_NEAR(out.lambda, kChainLambda, 1e-12);
    EXPECT_NEAR(filt.state().c_h, kChainCh, 1e-12);
    EXPECT_NEAR(filt.hyper().c_v, kChainCv, 1e-12);
    EXPECT_NEAR(filt.c_w_raw(), kChainCwRaw, 1e-12);
}

TEST(EmStep, NegativeProcessNoiseIsFloored) {
    // No change in h, shrinking C_h: the raw estimate is negative.
    const Vector x{0.0, 0.0};
    const FilterState after{{0.0, 0.0}, 0.05};
    const EmEstimate est = estimate_em_parameters(after, 0.1, 0.0, x, 0.0, EmHyper{});
    EXPECT_NEAR(est.c_w_raw, -0.05, 1e-15);
    EXPECT_EQ(est.next.c_w, 0.0);
}

TEST(EmStep, DimensionMismatch) {
    EXPECT_THROW(em_nlms_e_step(FilterState::zeros(3), EmHyper{}, Vector{1.0, 2.0}, 0.0), DimensionError);
}

TEST(EmStep, ContractionWithoutProcessNoise) {
    std::mt19937_64 rng(5);
    FilterState s = FilterState::zeros(8, 0.3);
    const EmHyper hyper{0.05, 0.0, 0.01};
    double prev = s.c_h;
    for (int n = 0; n < 500; ++n) {
        const Vector x = test::gaussian_vector(rng, 8, n % 3 == 0 ? 0.0 : 1.0);
        s = em_nlms_e_step(std::move(s), hyper, x, 0.3).first;
        ASSERT_LE(s.c_h, prev);
        ASSERT_GE(s.c_h, 0.0);
        prev = s.c_h;
    }
}

TEST(EmStep, VariancesStayNonnegativeAlongTrajectory) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g;
    EmNlms filt(16, EmNlmsParams{});
    for (int n = 0; n < 5000; ++n) {
        const Vector x = test::gaussian_vector(rng, 16, n < 2000 ? 1.0 : 0.01);
        filt.process(x, g(rng));
        ASSERT_GE(filt.state().c_h, 0.0);
        ASSERT_GE(filt.hyper().c_v, 0.0);
        ASSERT_GE(filt.hyper().c_w, 0.0);
    }
}

TEST(ZeroError, LeavesCoefficientsUnchanged) {
    std::mt19937_64 rng(3);
    const Vector h = test::gaussian_vector(rng, 6);
    const Vector x = test::gaussian_vector(rng, 6);
    const double d = dot(x, h);

    auto em = em_nlms_e_step(FilterState{h, 0.1}, EmHyper{}, x, d);
    EXPECT_EQ(em.second.e, 0.0);
    EXPECT_EQ(em.first.h_hat, h);

    auto ad = adapt_nlms_step(AdaptNlmsState{h, 0.1, 5, 0.9, std::nullopt}, x, d, 0.01);
    EXPECT_EQ(ad.first.h_hat, h);

    auto cv = conv_nlms_step(ConvNlmsState{h, 0.5, std::nullopt}, x, d, 0.01);
    EXPECT_EQ(cv.first.h_hat, h);
}

TEST(AdaptNlms, HandEvaluatedStepsize) {
    // First five taps carry 0.5 of energy.
    Vector h(8, 0.0);
    for (int k = 0; k < 5; ++k) h[k] = std::sqrt(0.1);
    Vector x(8, 0.0);
    const double d = 1.0;  // x = 0 so e = d
    auto [next, out] = adapt_nlms_step(AdaptNlmsState{h, 0.1, 5, 0.9, std::nullopt}, x, d, 0.01);
    EXPECT_DOUBLE_EQ(out.e, 1.0);
    EXPECT_NEAR(out.lambda, 0.5, 1e-14);
    EXPECT_NEAR(next.err_power, 0.1 + 0.09, 1e-15);
}

TEST(AdaptNlms, ZeroFilterNeverAdapts) {
    std::mt19937_64 rng(2);
    AdaptNlmsState s{Vector(10, 0.0), 0.1, 5, 0.9, std::nullopt};
    for (int n = 0; n < 50; ++n) {
        auto [next, out] = adapt_nlms_step(std::move(s), test::gaussian_vector(rng, 10), 1.0, 0.01);
        EXPECT_EQ(out.lambda, 0.0);
        s = std::move(next);
    }
    EXPECT_EQ(s.h_hat, Vector(10, 0.0));
}

TEST(AdaptNlms, CapIsApplied) {
    Vector h(5, 10.0);
    auto [next, out] = adapt_nlms_step(AdaptNlmsState{h, 0.1, 5, 0.9, 0.5}, Vector(5, 0.1), 0.0, 0.01);
    EXPECT_EQ(out.lambda, 0.5);
}

TEST(AdaptNlms, RejectsBadConstants) {
    EXPECT_THROW(adapt_nlms_step(AdaptNlmsState{Vector(3, 0.0), 0.1, 5, 0.9, {}}, Vector(3, 0.0), 0.0, 0.01),
                 InvalidArgument);
    EXPECT_THROW(adapt_nlms_step(AdaptNlmsState{Vector(8, 0.0), 0.1, 5, 1.0, {}}, Vector(8, 0.0), 0.0, 0.01),
                 InvalidArgument);
    EXPECT_THROW(adapt_nlms_step(AdaptNlmsState{Vector(8, 0.0), 0.1, 5, 0.9, {}}, Vector(7, 0.0), 0.0, 0.01),
                 DimensionError);
}

TEST(AdaptNlms, WarmStartBootstrapsAndRespectsCap) {
    std::mt19937_64 rng(9);
    AdaptNlmsParams p;
    p.lambda_cap = 0.5;
    AdaptNlms filt(12, p);
    // silent regressor first: the warm start waits for the head taps to move
    filt.process(Vector(12, 0.0), 0.0);
    for (int n = 0; n < 200; ++n) {
        Vector x = test::gaussian_vector(rng, 12, 0.05);
        const StepOutcome out = filt.process(x, 0.3 * x[0]);
        ASSERT_LE(out.lambda, 0.5);
    }
    EXPECT_GT(energy(std::span<const double>(filt.coefficients()).first(5)), 0.0);
}

TEST(ConvNlms, HandEvaluated) {
    Vector x(4, 0.0);
    x[0] = std::sqrt(99.99);
    auto [next, out] = conv_nlms_step(ConvNlmsState{Vector(4, 0.0), 0.5, std::nullopt}, x, 1.0, 0.01);
    EXPECT_NEAR(out.lambda, 0.005, 1e-17);
    EXPECT_NEAR(out.alpha, 0.49995, 1e-14);
}

TEST(ConvNlms, SilentFrameDoesNotMove) {
    auto [next, out] = conv_nlms_step(ConvNlmsState{Vector(4, 0.2), 0.5, std::nullopt}, Vector(4, 0.0), 1.0, 0.01);
    EXPECT_DOUBLE_EQ(out.lambda, 50.0);
    EXPECT_EQ(next.h_hat, Vector(4, 0.2));
}

TEST(ConvNlms, GateFreezes) {
    Vector x(2, 0.0);
    x[0] = std::sqrt(0.005);
    auto [next, out] = conv_nlms_step(ConvNlmsState{Vector(2, 0.1), 0.5, 0.01}, x, 3.0, 0.01);
    EXPECT_EQ(out.lambda, 0.0);
    EXPECT_EQ(out.alpha, 0.0);
    EXPECT_EQ(next.h_hat, Vector(2, 0.1));
}

TEST(ConvNlms, JointScalingLeavesUpdateInvariant) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> su(-50.0, 50.0);
    for (int i = 0; i < 200; ++i) {
        const Vector h = test::gaussian_vector(rng, 7);
        const Vector x = test::gaussian_vector(rng, 7);
        const double d = su(rng);
        double s = su(rng);
        if (s == 0.0) s = 1.0;
        Vector xs = x;
        for (double& v : xs) v *= s;
        const auto a = conv_nlms_step(ConvNlmsState{h, 0.5, std::nullopt}, x, d, 0.0);
        const auto b = conv_nlms_step(ConvNlmsState{h, 0.5, std::nullopt}, xs, s * d, 0.0);
        EXPECT_NEAR(b.second.e, s * a.second.e, 1e-9 * std::abs(s * a.second.e) + 1e-12);
        EXPECT_NEAR(b.second.lambda, a.second.lambda / (s * s), 1e-12 * a.second.lambda / (s * s));
        for (std::size_t k = 0; k < h.size(); ++k)
            EXPECT_NEAR(b.first.h_hat[k] - h[k], a.first.h_hat[k] - h[k], 1e-9 * (1.0 + std::abs(a.first.h_hat[k])));
    }
}

TEST(Alpha, EqualsLambdaTimesEnergyForEveryAlgorithm) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    EmNlms em(16, EmNlmsParams{});
    AdaptNlms ad(16, AdaptNlmsParams{});
    ConvNlmsParams cp;
    cp.gate = GateParams{};
    ConvNlms cv(16, cp, 100.0);
    for (int n = 0; n < 2000; ++n) {
        const Vector x = test::gaussian_vector(rng, 16, n % 400 < 100 ? 0.0 : 1.0);
        const double d = g(rng);
        const double ex = energy(x);
        for (const StepOutcome& o : {em.process(x, d), ad.process(x, d), cv.process(x, d)})
            ASSERT_EQ(o.alpha, o.lambda * ex);
    }
}

TEST(EnergyGate, RunningMeanThreshold) {
    EnergyGate gate(0.5, 2);
    EXPECT_DOUBLE_EQ(gate.threshold(4.0), 2.0);
    EXPECT_DOUBLE_EQ(gate.threshold(8.0), 3.0);
    EXPECT_DOUBLE_EQ(gate.threshold(0.0), 2.0);
}

}  // namespace
}  // namespace emnlms
