#pragma once

// Slow, direct reference implementations used to check the library.

#include <span>
#include <vector>

#include "solarboost/capfilter.hpp"
#include "solarboost/gbtree.hpp"

namespace oracle {

using solarboost::linalg::Matrix;
using solarboost::linalg::Vector;

/**
 * Minimizes, over block-constant capacities c_0..c_{B-1},
 *   sum_b sum_{t in b} |root_t c_b - eta_t|^2
 *   + lambda |c_0 - init|^2 + lambda sum_{b>=1} |c_b - c_{b-1}|^2
 * by forming and solving the dense (B*K) normal equations.
 * Returns every block's minimizer.
 */
std::vector<Vector> joint_penalized_solve(std::span<const solarboost::capfilter::SensingStep> steps,
                                          const solarboost::BlockStructure& blocks, double lambda,
                                          std::span<const double> init);

/// Best single split (or leaf) by brute-force enumeration over every threshold.
struct Stump {
    bool split = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double left = 0.0;
    double right = 0.0;
    double leaf = 0.0;

    double predict(std::span<const double> x) const { return !split ? leaf : (x[feature] <= threshold ? left : right); }
};

Stump fit_stump(const std::vector<std::vector<double>>& x, std::span<const double> g, std::span<const double> h,
                double reg);

/// Squared-error boosting with brute-force stumps. Returns training MSE after each round.
std::vector<double> stump_boost_mse(const std::vector<std::vector<double>>& x, std::span<const double> y,
                                    std::size_t rounds, double learning_rate, double reg);

}  // namespace oracle
