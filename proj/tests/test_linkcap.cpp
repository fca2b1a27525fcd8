#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "dsel/error.hpp"
#include "dsel/linkcap.hpp"
#include "dsel/rng.hpp"
#include "oracles.hpp"

using namespace dsel;

namespace {

ChannelMatrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
    ChannelMatrix h(r, c);
    for (Eigen::Index i = 0; i < h.size(); ++i) h(i) = rng.complex_gaussian(1.0);
    return h;
}

void expect_valid_svd(const ChannelMatrix& h, const SvdTriple& t) {
    const auto r = h.rows();
    const auto c = h.cols();
    ASSERT_EQ(t.u.rows(), r);
    ASSERT_EQ(t.u.cols(), r);
    ASSERT_EQ(t.v.rows(), c);
    ASSERT_EQ(t.v.cols(), c);
    ASSERT_EQ(t.sigma.size(), static_cast<std::size_t>(std::min(r, c)));
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(r, c);
    for (std::size_t i = 0; i < t.sigma.size(); ++i) {
        s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = t.sigma[i];
        EXPECT_GE(t.sigma[i], 0.0);
        if (i > 0) EXPECT_GE(t.sigma[i - 1], t.sigma[i]);
    }
    const double scale = std::max(h.norm(), 1e-300);
    EXPECT_LT((t.u * s * t.v.adjoint() - h).norm() / scale, 1e-10);
    EXPECT_LT((t.u.adjoint() * t.u - Eigen::MatrixXcd::Identity(r, r)).norm(), 1e-10);
    EXPECT_LT((t.v.adjoint() * t.v - Eigen::MatrixXcd::Identity(c, c)).norm(), 1e-10);
}

void expect_kkt(const std::vector<double>& sigma, const PowerAllocation& a, int n_t) {
    ASSERT_EQ(a.z2.size(), static_cast<std::size_t>(n_t));
    EXPECT_NEAR(std::accumulate(a.z2.begin(), a.z2.end(), 0.0), static_cast<double>(n_t), 1e-10);
    for (std::size_t i = 0; i < a.z2.size(); ++i) {
        const double g = i < sigma.size() ? sigma[i] * sigma[i] * a.a2_amp : 0.0;
        EXPECT_GE(a.z2[i], 0.0);
        if (a.z2[i] > 0.0) {
            EXPECT_NEAR(a.z2[i] + 1.0 / g, a.mu, 1e-10);
        } else {
            EXPECT_TRUE(g == 0.0 || g <= 1.0 / a.mu + 1e-12) << "inactive mode " << i;
        }
    }
}

}  // namespace

TEST(Svd, Examples) {
    const ChannelMatrix eye = ChannelMatrix::Identity(2, 2);
    auto t = svd_decompose(eye);
    EXPECT_NEAR(t.sigma[0], 1.0, 1e-15);
    EXPECT_NEAR(t.sigma[1], 1.0, 1e-15);
    ChannelMatrix d = ChannelMatrix::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 1.0;
    t = svd_decompose(d);
    EXPECT_NEAR(t.sigma[0], 2.0, 1e-15);
    EXPECT_NEAR(t.sigma[1], 1.0, 1e-15);
    expect_valid_svd(d, t);
}

TEST(Svd, RandomTwoByTwoAgainstCharacteristicPolynomial) {
    Rng rng(1);
    for (int trial = 0; trial < 1000; ++trial) {
        const ChannelMatrix h = random_matrix(rng, 2, 2);
        const auto t = svd_decompose(h);
        expect_valid_svd(h, t);
        const auto ref = oracle::singular_values_2x2(h);
        EXPECT_NEAR(t.sigma[0], ref[0], 1e-10);
        EXPECT_NEAR(t.sigma[1], ref[1], 1e-8);
    }
}

TEST(Svd, RandomShapesAndRankDeficiency) {
    Rng rng(2);
    for (int trial = 0; trial < 300; ++trial) {
        const auto r = static_cast<Eigen::Index>(1 + rng.uniform_index(5));
        const auto c = static_cast<Eigen::Index>(1 + rng.uniform_index(5));
        ChannelMatrix h = random_matrix(rng, r, c);
        if (trial % 3 == 0 && c > 1) h.col(c - 1) = h.col(0) * std::complex<double>{0.5, -1.0};
        const auto t = svd_decompose(h);
        expect_valid_svd(h, t);
        const Eigen::JacobiSVD<Eigen::MatrixXcd> ref(h);
        for (std::size_t i = 0; i < t.sigma.size(); ++i) {
            EXPECT_NEAR(t.sigma[i], ref.singularValues()[static_cast<Eigen::Index>(i)], 1e-10);
        }
    }
    const ChannelMatrix zero = ChannelMatrix::Zero(2, 3);
    const auto t = svd_decompose(zero);
    EXPECT_EQ(t.sigma[0], 0.0);
    EXPECT_LT((t.u.adjoint() * t.u - Eigen::MatrixXcd::Identity(2, 2)).norm(), 1e-10);
}

TEST(Waterfill, HandCases) {
    auto a = waterfill({1.0, 1.0}, 1.0);
    EXPECT_NEAR(a.z2[0], 1.0, 1e-15);
    EXPECT_NEAR(a.z2[1], 1.0, 1e-15);
    EXPECT_NEAR(a.mu, 2.0, 1e-15);
    a = waterfill({1.0, 0.1}, 1.0);
    EXPECT_EQ(a.z2[0], 2.0);
    EXPECT_EQ(a.z2[1], 0.0);
    EXPECT_EQ(a.mu, 3.0);
    a = waterfill({2.0, 1.0}, 1.0);
    EXPECT_EQ(a.z2[0], 1.375);
    EXPECT_EQ(a.z2[1], 0.625);
    EXPECT_EQ(a.mu, 1.625);
}

TEST(Waterfill, RandomChannelsSatisfyKktAndMatchBisection) {
    Rng rng(3);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto sv = svd_decompose(random_matrix(rng, 2, 2)).sigma;
        const double a2 = std::pow(10.0, (rng.uniform() * 40.0 - 20.0) / 10.0);
        const auto a = waterfill(sv, a2, 2);
        expect_kkt(sv, a, 2);
        std::vector<double> gains;
        for (double s : sv) gains.push_back(s * s * a2);
        const auto ref = oracle::waterfill_bisect(gains, 2.0);
        for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(a.z2[i], ref[i], 1e-9);
    }
}

TEST(Waterfill, WideAndDegenerateInputs) {
    const auto a = waterfill({1.0}, 2.0, 3);
    EXPECT_EQ(a.z2.size(), 3u);
    EXPECT_NEAR(a.z2[0], 3.0, 1e-15);
    expect_kkt({1.0}, a, 3);
    EXPECT_THROW(waterfill({0.0, 0.0}, 1.0), NoSignalError);
    EXPECT_THROW(waterfill({1.0, 0.5}, 0.0), DomainError);
    EXPECT_THROW(waterfill({1.0, 0.5, 0.1}, 1.0, 2), ShapeError);
}

TEST(EffectiveNoise, Examples) {
    const auto a = waterfill({1.0, 1.0}, 1.0);
    EXPECT_EQ(effective_noise(a, 0.0), 1.0);
    PowerAllocation b;
    b.z2 = {1.2, 0.8};
    b.a2_amp = snr_db_to_a2(5.0);
    EXPECT_NEAR(b.a2_amp, 3.16227766, 1e-8);
    EXPECT_NEAR(effective_noise(b, 0.025), 1.0 / b.a2_amp + 0.05, 1e-15);
    EXPECT_NEAR(effective_noise(b, 0.025), 0.36623, 1e-5);
    EXPECT_THROW(effective_noise(b, -0.1), DomainError);
}

TEST(EffectiveNoise, MonteCarloIdentity) {
    Rng rng(4);
    const double d = 0.025;
    const auto h = random_matrix(rng, 2, 2);
    const auto svd = svd_decompose(h);
    const auto alloc = waterfill(svd.sigma, snr_db_to_a2(5.0), 2);
    Eigen::Vector2cd z(std::sqrt(alloc.z2[0]), std::sqrt(alloc.z2[1]));
    Eigen::Matrix2cd acc = Eigen::Matrix2cd::Zero();
    const int draws = 100000;
    for (int s = 0; s < draws; ++s) {
        ChannelMatrix e(2, 2);
        for (Eigen::Index i = 0; i < 4; ++i) e(i) = rng.complex_gaussian(d);
        const Eigen::MatrixXcd je = e * svd.v * z.asDiagonal();
        acc += je * je.adjoint();
    }
    acc /= draws;
    const double target = effective_noise(alloc, d) - 1.0 / alloc.a2_amp;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const double expected = i == j ? target : 0.0;
            EXPECT_LT(std::abs(acc(i, j) - expected), 0.02 * target) << i << "," << j;
        }
    }
}

TEST(CapacityInstant, Examples) {
    EXPECT_NEAR(capacity_instant(ChannelMatrix::Identity(2, 2), 0.0, 1.0), 2.0, 1e-12);
    ChannelMatrix d = ChannelMatrix::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 1.0;
    EXPECT_NEAR(capacity_instant(d, 0.0, 1.0), std::log2(6.5) + std::log2(1.625), 1e-12);
    EXPECT_NEAR(capacity_instant(d, 0.0, 1.0), 3.4009, 1e-4);
    EXPECT_THROW(capacity_instant(d, -1.0, 1.0), DomainError);
    EXPECT_THROW(capacity_instant(ChannelMatrix::Zero(2, 2), 0.0, 1.0), NoSignalError);
}

TEST(CapacityInstant, MatchesIndependentWaterfillingAtZeroDistortion) {
    Rng rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        const auto r = static_cast<Eigen::Index>(1 + rng.uniform_index(4));
        const auto c = static_cast<Eigen::Index>(1 + rng.uniform_index(4));
        const auto h = random_matrix(rng, r, c);
        const double a2 = std::pow(10.0, rng.uniform() * 2.0 - 1.0);
        EXPECT_NEAR(capacity_instant(h, 0.0, a2), oracle::waterfill_capacity(h, a2), 1e-8);
    }
}

TEST(CapacityInstant, MonotoneInSnrWithoutDistortionAndInDistortion) {
    Rng rng(6);
    for (int trial = 0; trial < 100; ++trial) {
        const auto h = random_matrix(rng, 2, 2);
        double prev = -1.0;
        for (int k = -10; k <= 30; ++k) {
            const double c = capacity_instant(h, 0.0, snr_db_to_a2(k));
            EXPECT_GE(c, prev - 1e-12);
            prev = c;
        }
        for (double snr : {-5.0, 5.0, 15.0, 25.0}) {
            prev = std::numeric_limits<double>::infinity();
            for (int k = 0; k <= 20; ++k) {
                const double c = capacity_instant(h, 0.05 * k, snr_db_to_a2(snr));
                EXPECT_LE(c, prev + 1e-12);
                EXPECT_GE(c, 0.0);
                prev = c;
            }
        }
        EXPECT_LT(capacity_instant(h, 1.0, 2.0), capacity_instant(h, 0.0, 2.0));
    }
}

// powers are allocated for noise 1/A^2 while the loss is evaluated at 1/A^2 + d*N_t,
// so with d > 0 raising A^2 can shift power onto a weak mode and lower capacity
TEST(CapacityInstant, CanDecreaseInSnrUnderDistortion) {
    auto closed_form = [](double g1, double g2, double d, double a2) {
        const double a = g1 * g1;
        const double b = g2 * g2;
        const double x = 1.0 / a2;
        const double mu = (2.0 + x / a + x / b) / 2.0;
        const double f = x + 2.0 * d;
        if (mu - x / b <= 0.0) return std::log2(1.0 + a * 2.0 / f);
        return std::log2(1.0 + a * (mu - x / a) / f) + std::log2(1.0 + b * (mu - x / b) / f);
    };
    ChannelMatrix h = ChannelMatrix::Zero(2, 2);
    h(0, 0) = 1.0;
    h(1, 1) = 0.1;
    const double c15 = capacity_instant(h, 0.05, snr_db_to_a2(15.0));
    const double c20 = capacity_instant(h, 0.05, snr_db_to_a2(20.0));
    EXPECT_NEAR(c15, closed_form(1.0, 0.1, 0.05, snr_db_to_a2(15.0)), 1e-10);
    EXPECT_NEAR(c20, closed_form(1.0, 0.1, 0.05, snr_db_to_a2(20.0)), 1e-10);
    EXPECT_NEAR(c15, 4.0175, 1e-4);
    EXPECT_NEAR(c20, 3.9318, 1e-4);
    EXPECT_GT(c15, c20);
}
