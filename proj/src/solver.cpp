#include "solarboost/solver.hpp"

#include <cmath>
#include <string>

#include "solarboost/capfilter.hpp"
#include "solarboost/surrogate.hpp"

namespace solarboost {

namespace {

gbtree::RowMatrixView row_view(const GridFeatureTensor& features) {
    return {features.values(), features.steps() * features.grids(), features.dims()};
}

RoundReport make_report(std::size_t round, const Dataset& ds, std::span<const double> capacity,
                        std::span<const double> unit) {
    const std::size_t K = ds.grids();
    double objective = 0.0;
    for (std::size_t t = 0; t < ds.steps(); ++t) {
        double fit = 0.0;
        for (std::size_t i = 0; i < K; ++i) fit += capacity[t * K + i] * unit[t * K + i];
        const double e = ds.outputs[t] - fit;
        objective += e * e;
    }
    if (!std::isfinite(objective)) throw NumericalError("training objective is not finite at round " + std::to_string(round));
    return {round, objective, std::sqrt(objective / static_cast<double>(ds.steps()))};
}

// Sum of floored Sigma_t and Y_t (delta_t + q_t) over each block.
std::vector<capfilter::BlockInformation> block_information(const Dataset& ds, const BlockStructure& blocks,
                                                           std::span<const double> unit,
                                                           std::span<const double> increment, double pd_floor_rel) {
    const std::size_t K = ds.grids();
    const auto k = static_cast<Eigen::Index>(K);
    std::vector<capfilter::BlockInformation> out;
    out.reserve(blocks.count());
    for (const BlockRange& range : blocks.ranges) {
        capfilter::BlockInformation info = capfilter::BlockInformation::zero(K);
        for (std::size_t t = range.begin; t < range.end; ++t) {
            const std::span<const double> q = unit.subspan(t * K, K);
            const std::span<const double> d = increment.subspan(t * K, K);
            const linalg::Matrix raw = surrogate::sigma_matrix_raw(q, d);
            info.precision += linalg::floor_spectrum(raw, surrogate::default_pd_floor(raw, pd_floor_rel));
            info.shift += ds.outputs[t] * (Eigen::Map<const linalg::Vector>(q.data(), k) +
                                           Eigen::Map<const linalg::Vector>(d.data(), k));
        }
        out.push_back(std::move(info));
    }
    return out;
}

}  // namespace

SolarBoostModel train(const Dataset& ds, const HyperParams& hyper, const ProgressSink& progress) {
    ds.validate();
    hyper.validate();
    const std::size_t T = ds.steps();
    const std::size_t K = ds.grids();
    const std::size_t D = ds.dims();
    if (hyper.grid_count != 0 && hyper.grid_count != K) {
        throw ValidationError("hyper grid_count " + std::to_string(hyper.grid_count) + " does not match dataset K=" +
                              std::to_string(K));
    }

    const BlockStructure blocks = make_blocks(T, hyper.block_len);
    std::vector<double> block_totals;
    for (const BlockRange& range : blocks.ranges) block_totals.push_back(ds.totals[range.begin]);
    const std::vector<double> init(K, ds.totals[0] / static_cast<double>(K));

    std::vector<double> capacity(T * K);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t i = 0; i < K; ++i) capacity[t * K + i] = ds.totals[t] / static_cast<double>(K);
    }

    SolarBoostModel model;
    model.ensemble = {{}, hyper.learning_rate, 0.0};
    model.hyper = hyper;
    model.feature_dim = D;
    model.grid_count = K;
    model.training_steps = T;

    std::vector<double> unit(T * K, model.ensemble.base_score);
    if (progress) progress(make_report(0, ds, capacity, unit));

    if (hyper.n_rounds > 0) {
        const gbtree::RowMatrixView rows = row_view(ds.features);
        const gbtree::PresortedColumns sorted(rows);
        const gbtree::TreeParams tree_params{hyper.max_depth, hyper.tree_reg, hyper.min_gain};
        gbtree::GradHessBatch gh{std::vector<double>(T * K), std::vector<double>(T * K)};
        std::vector<double> delta(T * K);
        std::vector<int> leaf_of_row;
        std::vector<double> increment(T * K);
        model.ensemble.trees.reserve(hyper.n_rounds);

        for (std::size_t round = 1; round <= hyper.n_rounds; ++round) {
            for (std::size_t t = 0; t < T; ++t) {
                const surrogate::StepContext ctx{std::span<const double>(capacity).subspan(t * K, K),
                                                 std::span<const double>(unit).subspan(t * K, K), ds.outputs[t]};
                surrogate::grad_hess_into(ctx, std::span<double>(gh.grads).subspan(t * K, K),
                                          std::span<double>(gh.hess).subspan(t * K, K));
            }
            gbtree::RegressionTree tree = gbtree::fit_tree(sorted, rows, gh, tree_params, nullptr, &leaf_of_row);
            for (std::size_t r = 0; r < T * K; ++r) {
                delta[r] = tree.nodes()[static_cast<std::size_t>(leaf_of_row[r])].weight;
                if (!std::isfinite(delta[r])) throw NumericalError("non-finite tree output at round " + std::to_string(round));
            }

            if (round % hyper.capacity_refresh_every == 0) {
                const double scale = hyper.increment == IncrementMode::raw ? 1.0 : hyper.learning_rate;
                for (std::size_t r = 0; r < T * K; ++r) increment[r] = scale * delta[r];
                const auto info = block_information(ds, blocks, unit, increment, hyper.pd_floor);
                std::vector<linalg::Vector> means;
                try {
                    means = capfilter::filter_blocks(info, block_totals, init, {hyper.lambda, true});
                } catch (const NumericalError& e) {
                    throw NumericalError(std::string(e.what()) + " (round " + std::to_string(round) + ")");
                }
                const CapacityMatrix refreshed = capfilter::expand_block_means(means, ds.totals, blocks);
                std::copy(refreshed.values().begin(), refreshed.values().end(), capacity.begin());
            }

            for (std::size_t r = 0; r < T * K; ++r) unit[r] += hyper.learning_rate * delta[r];
            model.ensemble.trees.push_back(std::move(tree));
            if (progress) {
                progress(make_report(round, ds, capacity, unit));
            } else if (!std::isfinite(unit.front())) {
                throw NumericalError("non-finite unit output at round " + std::to_string(round));
            }
        }
    }

    model.capacities = CapacityMatrix(T, K, std::move(capacity), ds.totals);
    return model;
}

std::vector<double> predict_unit(const SolarBoostModel& model, const GridFeatureTensor& features) {
    if (features.grids() != model.grid_count || features.dims() != model.feature_dim) {
        throw ValidationError("features do not match the model's grid count or feature dimension");
    }
    std::vector<double> out(features.steps() * features.grids());
    for (std::size_t t = 0; t < features.steps(); ++t) {
        for (std::size_t i = 0; i < features.grids(); ++i) {
            out[t * features.grids() + i] = model.ensemble.predict(features.cell(t, i));
        }
    }
    return out;
}

CapacityMatrix forecast_capacities(const SolarBoostModel& model, std::size_t horizon,
                                   std::optional<std::span<const double>> totals) {
    if (horizon == 0) throw ValidationError("forecast horizon must be positive");
    if (totals && totals->size() != horizon) throw ValidationError("totals length does not match horizon");
    const std::span<const double> latest = model.latest_capacity();
    double latest_total = 0.0;
    for (double c : latest) latest_total += c;
    const std::size_t K = model.grid_count;
    std::vector<double> values(horizon * K);
    for (std::size_t h = 0; h < horizon; ++h) {
        const double scale = totals ? (*totals)[h] / latest_total : 1.0;
        if (!(scale > 0.0) || !std::isfinite(scale)) throw ValidationError("future totals must be positive");
        for (std::size_t i = 0; i < K; ++i) values[h * K + i] = scale * latest[i];
    }
    return CapacityMatrix::from_rows(horizon, K, std::move(values));
}

std::vector<double> predict(const SolarBoostModel& model, const GridFeatureTensor& features,
                            std::optional<std::span<const double>> totals) {
    const std::vector<double> unit = predict_unit(model, features);
    const CapacityMatrix caps = forecast_capacities(model, features.steps(), totals);
    const std::size_t K = model.grid_count;
    std::vector<double> out(features.steps(), 0.0);
    for (std::size_t h = 0; h < features.steps(); ++h) {
        for (std::size_t i = 0; i < K; ++i) out[h] += caps(h, i) * unit[h * K + i];
    }
    return out;
}

std::vector<double> fitted(const SolarBoostModel& model, const GridFeatureTensor& training_features) {
    if (training_features.steps() != model.training_steps) {
        throw ValidationError("in-sample fit needs the full training period");
    }
    const std::vector<double> unit = predict_unit(model, training_features);
    const std::size_t K = model.grid_count;
    std::vector<double> out(training_features.steps(), 0.0);
    for (std::size_t t = 0; t < training_features.steps(); ++t) {
        for (std::size_t i = 0; i < K; ++i) out[t] += model.capacities(t, i) * unit[t * K + i];
    }
    return out;
}

std::vector<double> training_curve(std::span<const RoundReport> reports) {
    std::vector<double> out;
    out.reserve(reports.size());
    for (const RoundReport& r : reports) out.push_back(r.true_objective);
    return out;
}

std::vector<double> TrainingCurve::objective() const { return training_curve(reports_); }

}  // namespace solarboost
