#pragma once

#include <span>
#include <vector>

#include "solarboost/core_model.hpp"
#include "solarboost/linalg.hpp"

namespace solarboost::capfilter {

using linalg::Matrix;
using linalg::Vector;
using linalg::sym_sqrt;

/// Filtered capacity mean and covariance.
struct KalmanState {
    Vector mean;
    Matrix cov;

    /// Throws ValidationError unless cov is symmetric (1e-10) and PSD (min eigenvalue >= -1e-10).
    void validate() const;
};

/**
 * One predict/update cycle for c_t = c_{t-1} + w, w ~ N(0, process_var I),
 * and eta_t = H c_t + v, v ~ N(0, I).
 */
KalmanState kalman_step(const KalmanState& state, const Matrix& h, const Vector& obs, double process_var);

/// Clamp negatives to zero and rescale to sum to total; all-zero input maps to total/K each.
/// Rows already summing to total within 1e-12 relative are returned as clamped, so projection is idempotent.
std::vector<double> project_capacity(std::span<const double> c, double total);

/// One sensing observation: root = Sigma_t^{1/2}, eta = Y_t Sigma_t^{-1/2} (delta_t + q_t).
struct SensingStep {
    Matrix root;
    Vector eta;
};

/**
 * What a block's observations say about its constant capacity, in
 * information form: precision = sum H^T H, shift = sum H^T eta.
 * Sequential Kalman updates without process noise between them reduce to
 * adding these sums.
 */
struct BlockInformation {
    Matrix precision;
    Vector shift;

    static BlockInformation zero(std::size_t grids);
    void add(const SensingStep& step);
};

std::vector<BlockInformation> accumulate_blocks(std::span<const SensingStep> steps, const BlockStructure& blocks);

struct FilterSettings {
    double lambda = 10.0;
    /// Clamp-and-rescale each block mean onto the capacity simplex and carry
    /// the projected mean forward as the next block's prior.
    bool project = true;
};

/**
 * Forward filter over blocks. The prior is (init, I/lambda); process noise
 * I/lambda enters at every block boundary. Returns one mean per block.
 * block_totals is only read when projecting.
 */
std::vector<Vector> filter_blocks(std::span<const BlockInformation> blocks, std::span<const double> block_totals,
                                  std::span<const double> init, const FilterSettings& settings);

/// Writes one capacity row per time step, rescaling each block's projected
/// shape to that step's total.
CapacityMatrix expand_block_means(std::span<const Vector> means, std::span<const double> totals,
                                  const BlockStructure& blocks);

/// Full pipeline: accumulate, filter with projection, expand.
CapacityMatrix estimate_capacities(std::span<const SensingStep> steps, std::span<const double> totals,
                                   const BlockStructure& blocks, double lambda, std::span<const double> init);

}  // namespace solarboost::capfilter
