#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "solarboost/capfilter.hpp"
#include "solarboost/core_model.hpp"

using namespace solarboost;
using namespace solarboost::capfilter;

namespace {

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index k, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Matrix a(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) a(i, j) = n(rng);
    }
    return a;
}

Vector random_vector(std::mt19937_64& rng, Eigen::Index k, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Vector v(k);
    for (Eigen::Index i = 0; i < k; ++i) v(i) = n(rng);
    return v;
}

// Per-step sensing rows for random symmetric roots and noisy observations of c_true.
std::vector<SensingStep> random_steps(std::mt19937_64& rng, std::size_t T, Eigen::Index k, const Vector& c_true,
                                      double noise) {
    std::vector<SensingStep> steps;
    for (std::size_t t = 0; t < T; ++t) {
        const Matrix a = random_matrix(rng, k);
        Matrix s = a * a.transpose();
        s.diagonal().array() += 0.05;
        const auto roots = sym_sqrt(s, 1e-9);
        steps.push_back({roots.root, roots.root * c_true + random_vector(rng, k, noise)});
    }
    return steps;
}

}  // namespace

TEST(KalmanStep, ScalarExample) {
    KalmanState s{Vector::Zero(1), Matrix::Ones(1, 1)};
    const auto next = kalman_step(s, Matrix::Ones(1, 1), Vector::Constant(1, 2.0), 0.0);
    EXPECT_DOUBLE_EQ(next.mean(0), 1.0);
    EXPECT_DOUBLE_EQ(next.cov(0, 0), 0.5);
}

TEST(KalmanStep, UninformativeObservation) {
    std::mt19937_64 rng(1);
    const Matrix a = random_matrix(rng, 3);
    KalmanState s{random_vector(rng, 3), a * a.transpose()};
    const auto next = kalman_step(s, Matrix::Zero(3, 3), random_vector(rng, 3), 0.25);
    EXPECT_TRUE(next.mean.isApprox(s.mean, 1e-15));
    Matrix expect = s.cov;
    expect.diagonal().array() += 0.25;
    EXPECT_LE((next.cov - expect).norm(), 1e-12);
}

TEST(KalmanStep, ZeroInnovationKeepsMean) {
    std::mt19937_64 rng(2);
    const Matrix a = random_matrix(rng, 4);
    KalmanState s{random_vector(rng, 4), a * a.transpose()};
    const Matrix h = random_matrix(rng, 4);
    const auto next = kalman_step(s, h, h * s.mean, 0.1);
    EXPECT_LE((next.mean - s.mean).norm(), 1e-10 * (1 + s.mean.norm()));
}

TEST(KalmanStep, CovarianceStaysSymmetricPsd) {
    std::mt19937_64 rng(3);
    const Eigen::Index k = 3;
    KalmanState s{Vector::Zero(k), Matrix::Identity(k, k)};
    for (int step = 0; step < 10000; ++step) {
        s = kalman_step(s, random_matrix(rng, k, 2.0), random_vector(rng, k), step % 7 == 0 ? 0.5 : 0.0);
        ASSERT_LE(linalg::max_asymmetry(s.cov), 1e-10);
        ASSERT_GE(linalg::min_eigenvalue(s.cov), -1e-8);
    }
    EXPECT_NO_THROW(s.validate());
}

TEST(ProjectCapacity, Examples) {
    const auto a = project_capacity(std::vector<double>{0.6, -0.2, 0.4}, 1.0);
    EXPECT_NEAR(a[0], 0.6, 1e-15);
    EXPECT_EQ(a[1], 0.0);
    EXPECT_NEAR(a[2], 0.4, 1e-15);
    EXPECT_EQ(project_capacity(std::vector<double>{2, 2}, 2.0), (std::vector<double>{1, 1}));
    EXPECT_EQ(project_capacity(std::vector<double>{0, 0}, 3.0), (std::vector<double>{1.5, 1.5}));
    EXPECT_THROW(project_capacity(std::vector<double>{std::nan("")}, 1.0), ValidationError);
    EXPECT_THROW(project_capacity(std::vector<double>{1.0}, 0.0), ValidationError);
}

TEST(ProjectCapacity, Idempotent) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> c(1 + rng() % 10);
        for (double& v : c) v = n(rng);
        const double total = 0.1 + std::abs(n(rng)) * 10;
        const auto once = project_capacity(c, total);
        EXPECT_EQ(project_capacity(once, total), once);
    }
}

TEST(BlockInformation, MatchesSequentialKalmanWithinBlock) {
    std::mt19937_64 rng(5);
    const Eigen::Index k = 3;
    const Vector truth = random_vector(rng, k);
    const auto steps = random_steps(rng, 8, k, truth, 0.3);
    const double lambda = 2.0;
    const std::vector<double> init{0.1, 0.2, 0.3};

    KalmanState s{Eigen::Map<const Vector>(init.data(), k), Matrix::Identity(k, k) / lambda};
    for (const auto& step : steps) s = kalman_step(s, step.root, step.eta, 0.0);

    const auto blocks = make_blocks(8, 8);
    const auto info = accumulate_blocks(steps, blocks);
    const auto means = filter_blocks(info, std::vector<double>{1.0}, init, {lambda, false});
    EXPECT_LE((means[0] - s.mean).norm(), 1e-10 * (1 + s.mean.norm()));
}

TEST(FilterBlocks, MatchesJointSolveOnFinalBlock) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index k = 1 + static_cast<Eigen::Index>(rng() % 3);
        const std::size_t nb = 1 + rng() % 6, s = 1 + rng() % 4;
        const Vector truth = random_vector(rng, k).cwiseAbs();
        const auto steps = random_steps(rng, nb * s, k, truth, 0.5);
        const auto blocks = make_blocks(nb * s, s);
        std::vector<double> init(static_cast<std::size_t>(k), 0.5);
        const double lambda = std::pow(10.0, std::uniform_real_distribution<double>(-1, 2)(rng));

        const auto filtered = filter_blocks(accumulate_blocks(steps, blocks), {}, init, {lambda, false});
        const auto joint = oracle::joint_penalized_solve(steps, blocks, lambda, init);
        const Vector& a = filtered.back();
        const Vector& b = joint.back();
        EXPECT_LE((a - b).norm() / b.norm(), 1e-8) << "trial " << trial;
    }
}

TEST(EstimateCapacities, UninformativeGivesUniform) {
    const Eigen::Index k = 3;
    std::vector<SensingStep> steps(6, SensingStep{Matrix::Zero(k, k), Vector::Zero(k)});
    const std::vector<double> totals{3, 3, 6, 6, 9, 9};
    const auto caps = estimate_capacities(steps, totals, make_blocks(6, 2), 10.0, std::vector<double>{1, 1, 1});
    for (std::size_t t = 0; t < 6; ++t) {
        for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(caps(t, i), totals[t] / 3.0, 1e-12);
    }
}

TEST(EstimateCapacities, SingleGridIsTotal) {
    std::mt19937_64 rng(7);
    const auto steps = random_steps(rng, 10, 1, Vector::Constant(1, -4.0), 1.0);
    std::vector<double> totals;
    for (int t = 0; t < 10; ++t) totals.push_back(1.0 + t);
    const auto caps = estimate_capacities(steps, totals, make_blocks(10, 3), 1.0, std::vector<double>{1.0});
    for (std::size_t t = 0; t < 10; ++t) EXPECT_DOUBLE_EQ(caps(t, 0), totals[t]);
}

TEST(EstimateCapacities, ConvergesAsLambdaShrinks) {
    std::mt19937_64 rng(8);
    const Eigen::Index k = 2;
    Vector truth(2);
    truth << 0.7, 0.3;
    const auto steps = random_steps(rng, 2, k, truth, 0.0);
    const std::vector<double> totals{1.0, 1.0};
    const auto blocks = make_blocks(2, 1);
    const std::vector<double> init{0.5, 0.5};
    const auto err = [&](double lambda) {
        const auto caps = estimate_capacities(steps, totals, blocks, lambda, init);
        return std::hypot(caps(1, 0) - truth(0), caps(1, 1) - truth(1));
    };
    EXPECT_LT(err(0.1), err(10.0));
    EXPECT_LT(err(1e-6), 1e-4);
}

TEST(EstimateCapacities, AlwaysValid) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::Index k = 1 + static_cast<Eigen::Index>(rng() % 5);
        const std::size_t T = 1 + rng() % 30;
        const auto steps = random_steps(rng, T, k, random_vector(rng, k, 5.0), 3.0);
        std::vector<double> totals(T);
        for (double& c : totals) c = 0.5 + std::abs(random_vector(rng, 1)(0));
        std::vector<double> init(static_cast<std::size_t>(k), totals[0] / static_cast<double>(k));
        EXPECT_NO_THROW(estimate_capacities(steps, totals, make_blocks(T, 1 + rng() % 5), 0.5, init));
    }
}

TEST(EstimateCapacities, Errors) {
    const std::vector<SensingStep> steps(2, SensingStep{Matrix::Identity(2, 2), Vector::Zero(2)});
    EXPECT_THROW(estimate_capacities(steps, std::vector<double>{1, 1}, make_blocks(2, 1), 0.0, std::vector<double>{0.5, 0.5}),
                 ValidationError);
    EXPECT_THROW(estimate_capacities(steps, std::vector<double>{1}, make_blocks(2, 1), 1.0, std::vector<double>{0.5, 0.5}),
                 ValidationError);
    EXPECT_THROW(estimate_capacities(steps, std::vector<double>{1, 1}, make_blocks(2, 1), 1.0, std::vector<double>{0.5}),
                 ValidationError);
}
