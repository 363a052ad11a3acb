#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "solarboost/core_model.hpp"
#include "solarboost/gbtree.hpp"

namespace solarboost {

/// Unit output function plus the capacities estimated over the training period.
struct SolarBoostModel {
    gbtree::RegressionTreeEnsemble ensemble;
    CapacityMatrix capacities;
    HyperParams hyper;
    std::size_t feature_dim = 0;
    std::size_t grid_count = 0;
    std::size_t training_steps = 0;

    /// Latest capacity row c_T.
    std::span<const double> latest_capacity() const { return capacities.row(capacities.steps() - 1); }

    bool operator==(const SolarBoostModel&) const = default;
};

/// State after a boosting round; round 0 is the initial model.
struct RoundReport {
    std::size_t round = 0;
    double true_objective = 0.0;  ///< sum_t (Y_t - c_t^T f_t)^2
    double train_rmse = 0.0;
};

using ProgressSink = std::function<void(const RoundReport&)>;

/**
 * Alternates one Newton tree on the surrogate gradients with one refresh
 * of the block-constant capacities by the forward filter. Capacities start
 * at C_t / K. Throws NumericalError naming the round if anything diverges.
 */
SolarBoostModel train(const Dataset& ds, const HyperParams& hyper, const ProgressSink& progress = {});

/// Per-grid unit output f(x_{t,i}), row-major (T, K).
std::vector<double> predict_unit(const SolarBoostModel& model, const GridFeatureTensor& features);

/// Capacities used for future steps: c_T, optionally rescaled per step to known totals.
CapacityMatrix forecast_capacities(const SolarBoostModel& model, std::size_t horizon,
                                   std::optional<std::span<const double>> totals = std::nullopt);

/// Y_hat_{T+h} = sum_i c_{T,i} f(x_{T+h,i}), c_T rescaled to totals[h] when given.
std::vector<double> predict(const SolarBoostModel& model, const GridFeatureTensor& features,
                            std::optional<std::span<const double>> totals = std::nullopt);

/// In-sample fit using the estimated training capacities.
std::vector<double> fitted(const SolarBoostModel& model, const GridFeatureTensor& training_features);

/// Collects RoundReports; pass sink() to train.
class TrainingCurve {
public:
    ProgressSink sink() {
        return [this](const RoundReport& r) { reports_.push_back(r); };
    }
    const std::vector<RoundReport>& reports() const noexcept { return reports_; }
    /// True-objective value per round, starting with the initial model.
    std::vector<double> objective() const;

private:
    std::vector<RoundReport> reports_;
};

std::vector<double> training_curve(std::span<const RoundReport> reports);

}  // namespace solarboost
