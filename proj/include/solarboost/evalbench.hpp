#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "solarboost/core_model.hpp"
#include "solarboost/synthgen.hpp"

namespace solarboost::evalbench {

/// sqrt(mean((truth - pred)^2))
double rmse(std::span<const double> truth, std::span<const double> pred);

/// Capacity shares c/C as a percentage-scale RMSE.
inline constexpr double kCapacityScale = 100.0;

/// RMSE over all (t, i) of truth and estimated shares c_{t,i}/C_t, times `scale`.
double capacity_rmse(const CapacityMatrix& truth, const CapacityMatrix& est, double scale = kCapacityScale);

struct MetricReport {
    double rmse = 0.0;
    double max = 0.0;
    double min = 0.0;
    double mean = 0.0;
};

/// RMSE plus the max/min/mean of the predictions.
MetricReport unit_output_report(std::span<const double> truth_unit, std::span<const double> pred_unit);

struct ScalingOutcome {
    double scaled = 0.0;     ///< (sum c_next / sum c_prev) * c_prev . f
    double true_next = 0.0;  ///< c_next . f
};

/// What rescaling the previous output by the total-capacity ratio predicts versus the truth.
ScalingOutcome scaling_counterexample(std::span<const double> c_prev, std::span<const double> c_next,
                                      std::span<const double> f_vals);

/**
 * Sample size beyond which grid-level modeling beats aggregate modeling:
 * K sc^2 M^2 / (r^2 K^2 (1+K)^2 eps^2 M^2 - C^2 sf^2).
 * Empty when the denominator is not positive.
 */
std::optional<double> thm1_sample_bound(double grids, double sigma_c, double m, double r, double epsilon,
                                        double total, double sigma_f);

/// Training length used by the experiments: the last T/15 steps are held out (26880 of 28800).
std::size_t default_train_len(std::size_t steps);

struct BenchmarkOptions {
    bool flatten_grid = true;
    bool ideal_fit = true;
    /// Grid whose unit output is scored.
    std::size_t unit_grid = 0;
};

/// Test-window scores of every method on one train/test split.
struct BenchmarkResult {
    double solarboost_rmse = 0.0;
    double average_grid_rmse = 0.0;
    std::optional<double> flatten_grid_rmse;
    std::optional<double> solarboost_capacity_rmse;
    std::optional<double> average_grid_capacity_rmse;
    std::optional<MetricReport> solarboost_unit;
    std::optional<MetricReport> average_grid_unit;
    std::optional<MetricReport> ideal_fit_unit;
    double solarboost_seconds = 0.0;
};

/**
 * Trains SolarBoost and the baselines on `train` and scores them on `test`.
 * SolarBoost forecasts with its last capacity row rescaled to the test totals.
 * Capacity and unit scores need the truth fields.
 */
BenchmarkResult benchmark(const Dataset& train, const Dataset& test, const HyperParams& hyper,
                          const BenchmarkOptions& options = {});

/// SolarBoost test RMSE alone.
double solarboost_test_rmse(const Dataset& train, const Dataset& test, const HyperParams& hyper);

struct DriftRow {
    double sigma = 0.0;
    std::uint64_t seed = 0;
    double solarboost_rmse = 0.0;
    double average_grid_rmse = 0.0;
    double gap = 0.0;  ///< average_grid_rmse - solarboost_rmse
};

/**
 * For every (sigma, seed): generate from `base` with that sigma and seed,
 * train SolarBoost and AverageGrid, and record the test RMSE gap.
 * Initial capacities are equal across grids, so sigma = 0 is the static,
 * uniform-capacity control where AverageGrid is correctly specified.
 */
std::vector<DriftRow> thm1_drift_experiment(const synthgen::GenSpec& base, std::span<const double> sigmas,
                                            std::span<const std::uint64_t> seeds, const HyperParams& hyper);

struct VarianceRow {
    double spread = 0.0;
    double noise = 0.0;
    std::uint64_t seed = 0;
    double clean_rmse = 0.0;
    double noisy_rmse = 0.0;
    double inflation = 0.0;  ///< noisy_rmse - clean_rmse
};

/**
 * Inputs are x_{t,i} = u_t + spread * (v_{t,i} - 0.5) with u, v ~ U(0,1), so
 * spread controls the variance across grids. True capacities come from
 * `spec`; each row is perturbed by zero-sum Gaussian noise with standard
 * deviation noise * C_t / K and Y is predicted with the true unit function.
 */
std::vector<VarianceRow> thm2_variance_experiment(const synthgen::GenSpec& spec, std::span<const double> noise_levels,
                                                  std::span<const double> spreads,
                                                  std::span<const std::uint64_t> seeds);

enum class SweepParam { grid_count, lambda };

std::string to_string(SweepParam p);
SweepParam parse_sweep_param(const std::string& s);

/**
 * Merges contiguous grids into `groups` groups: features are averaged,
 * truth capacities summed. Unit-output truth is dropped.
 */
Dataset regroup_grids(const Dataset& ds, std::size_t groups);

struct SweepRow {
    double value = 0.0;
    double rmse = 0.0;
};

/// One SolarBoost train + test evaluation per value, in input order.
std::vector<SweepRow> sweep(SweepParam param, std::span<const double> values, const Dataset& train,
                            const Dataset& test, const HyperParams& hyper);

enum class CurveShape { interior_minimum, flat_top, boundary_minimum };

std::string to_string(CurveShape shape);

/**
 * interior_minimum when the smallest RMSE is at neither end; otherwise
 * flat_top when the three lowest RMSEs lie within `flat_tol` of the lowest;
 * else boundary_minimum.
 */
CurveShape classify_curve(std::span<const SweepRow> rows, double flat_tol = 0.05);

/**
 * K = 2 dataset with constant total 1 whose capacity shares jump from
 * `before` to `after` at block change_block.
 */
struct ShiftSpec {
    std::size_t t_blocks = 60;
    std::size_t repeat = 96;
    std::size_t change_block = 30;
    double before = 0.8;  ///< share of grid 0 before the change
    double after = 0.2;
    std::uint64_t seed = 0;
};

Dataset two_grid_shift_dataset(const ShiftSpec& spec);

struct ShiftResult {
    double solarboost_rmse = 0.0;
    double rescaling_rmse = 0.0;
};

/**
 * SolarBoost versus the total-capacity rescaling predictor (flattened
 * features regressed on Y/C and multiplied back by C) on a shift dataset.
 */
ShiftResult observation2_experiment(const ShiftSpec& spec, const HyperParams& hyper);

}  // namespace solarboost::evalbench
