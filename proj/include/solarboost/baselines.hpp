#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "solarboost/core_model.hpp"
#include "solarboost/gbtree.hpp"

namespace solarboost::baselines {

enum class BaselineKind { average_grid, flatten_grid, ideal_fit };

std::string to_string(BaselineKind kind);
BaselineKind parse_kind(const std::string& s);

/// What an aggregate-level baseline regresses on.
enum class TargetMode {
    raw,       ///< Y_t; predictions are used as-is
    per_unit,  ///< Y_t / C_t; predictions are multiplied by C_t
};

std::string to_string(TargetMode mode);
TargetMode parse_target(const std::string& s);

/// Owning (rows, cols) row-major matrix.
struct DenseRows {
    std::vector<double> values;
    std::size_t rows = 0;
    std::size_t cols = 0;

    gbtree::RowMatrixView view() const noexcept { return {values, rows, cols}; }
    std::span<const double> row(std::size_t r) const noexcept { return view().row(r); }
};

/// (T, D): row t is the mean over grids of x_{t,i}.
DenseRows average_features(const GridFeatureTensor& features);

/// (T, K*D): row t is x_{t,0}, x_{t,1}, ... concatenated (grid-major, feature-minor).
DenseRows flatten_features(const GridFeatureTensor& features);

/// Inverse of flatten_features.
GridFeatureTensor unflatten_features(const DenseRows& flat, std::size_t grids, std::size_t dims);

struct BaselineModel {
    BaselineKind kind = BaselineKind::average_grid;
    gbtree::RegressionTreeEnsemble ensemble;
    TargetMode target = TargetMode::per_unit;
    std::size_t grid_count = 0;
    std::size_t feature_dim = 0;  ///< D of the grid features

    /// Width of the rows the ensemble consumes: D, or K*D for flatten_grid.
    std::size_t input_width() const noexcept {
        return kind == BaselineKind::flatten_grid ? grid_count * feature_dim : feature_dim;
    }
    std::string layout() const;

    bool operator==(const BaselineModel&) const = default;
};

struct BaselineOptions {
    /// Unset: per_unit for average_grid, raw for flatten_grid. Ignored by ideal_fit.
    std::optional<TargetMode> target;
};

/**
 * Squared-error boosting with the tree settings of `hyper`.
 * average_grid fits mean features, flatten_grid the concatenated features,
 * ideal_fit the pooled (x_{t,i}, y_{t,i}) rows and so needs truth_unit.
 */
BaselineModel train_baseline(BaselineKind kind, const Dataset& ds, const HyperParams& hyper,
                             const BaselineOptions& options = {});

/**
 * Aggregate predictions. ideal_fit has no capacity model of its own and
 * needs `capacities`; the other kinds ignore them.
 */
std::vector<double> predict_baseline(const BaselineModel& model, const GridFeatureTensor& features,
                                     std::span<const double> totals,
                                     const CapacityMatrix* capacities = nullptr);

/**
 * Per-grid unit output estimates, row-major (T, K). average_grid applies its
 * per-unit function to each grid's own features; flatten_grid has no unit
 * function and throws.
 */
std::vector<double> predict_unit(const BaselineModel& model, const GridFeatureTensor& features);

/// The capacity estimate implied by average_grid: C_t / K everywhere.
CapacityMatrix uniform_capacities(std::span<const double> totals, std::size_t grids);

}  // namespace solarboost::baselines
