#include "solarboost/baselines.hpp"

namespace solarboost::baselines {

std::string to_string(BaselineKind kind) {
    switch (kind) {
        case BaselineKind::average_grid: return "average_grid";
        case BaselineKind::flatten_grid: return "flatten_grid";
        case BaselineKind::ideal_fit: return "ideal_fit";
    }
    return "unknown";
}

BaselineKind parse_kind(const std::string& s) {
    if (s == "average_grid") return BaselineKind::average_grid;
    if (s == "flatten_grid") return BaselineKind::flatten_grid;
    if (s == "ideal_fit") return BaselineKind::ideal_fit;
    throw ValidationError("unknown baseline '" + s + "'");
}

std::string to_string(TargetMode mode) { return mode == TargetMode::raw ? "raw" : "per_unit"; }

TargetMode parse_target(const std::string& s) {
    if (s == "raw") return TargetMode::raw;
    if (s == "per_unit") return TargetMode::per_unit;
    throw ValidationError("unknown target mode '" + s + "' (expected raw or per_unit)");
}

DenseRows average_features(const GridFeatureTensor& features) {
    const std::size_t T = features.steps(), K = features.grids(), D = features.dims();
    DenseRows out{std::vector<double>(T * D, 0.0), T, D};
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t i = 0; i < K; ++i) {
            for (std::size_t d = 0; d < D; ++d) out.values[t * D + d] += features(t, i, d);
        }
        for (std::size_t d = 0; d < D; ++d) out.values[t * D + d] /= static_cast<double>(K);
    }
    return out;
}

DenseRows flatten_features(const GridFeatureTensor& features) {
    // The tensor is already stored grid-major within each step.
    return {std::vector<double>(features.values().begin(), features.values().end()), features.steps(),
            features.grids() * features.dims()};
}

GridFeatureTensor unflatten_features(const DenseRows& flat, std::size_t grids, std::size_t dims) {
    if (flat.cols != grids * dims) throw ValidationError("flattened width does not equal K*D");
    return {flat.rows, grids, dims, flat.values};
}

std::string BaselineModel::layout() const {
    switch (kind) {
        case BaselineKind::average_grid: return "grid-mean features (D=" + std::to_string(feature_dim) + ")";
        case BaselineKind::flatten_grid:
            return "grid-major flattened features (K*D=" + std::to_string(grid_count * feature_dim) + ")";
        case BaselineKind::ideal_fit: return "per-grid features (D=" + std::to_string(feature_dim) + ")";
    }
    return {};
}

namespace {

gbtree::BoostParams boost_params(const HyperParams& hyper) {
    return {hyper.n_rounds, hyper.learning_rate, {hyper.max_depth, hyper.tree_reg, hyper.min_gain}};
}

void check_layout(const BaselineModel& model, const GridFeatureTensor& features) {
    if (features.grids() != model.grid_count || features.dims() != model.feature_dim) {
        throw ValidationError("features (K=" + std::to_string(features.grids()) + ", D=" +
                              std::to_string(features.dims()) + ") do not match baseline layout " + model.layout());
    }
}

}  // namespace

BaselineModel train_baseline(BaselineKind kind, const Dataset& ds, const HyperParams& hyper,
                             const BaselineOptions& options) {
    ds.validate();
    hyper.validate();
    BaselineModel model;
    model.kind = kind;
    model.grid_count = ds.grids();
    model.feature_dim = ds.dims();
    const gbtree::BoostParams params = boost_params(hyper);

    if (kind == BaselineKind::ideal_fit) {
        if (!ds.truth_unit) throw ValidationError("ideal_fit needs truth unit outputs");
        model.target = TargetMode::raw;
        const gbtree::RowMatrixView rows{ds.features.values(), ds.steps() * ds.grids(), ds.dims()};
        model.ensemble = gbtree::boost_squared_error(rows, *ds.truth_unit, params);
        return model;
    }

    model.target = options.target.value_or(kind == BaselineKind::average_grid ? TargetMode::per_unit : TargetMode::raw);
    const DenseRows x = kind == BaselineKind::average_grid ? average_features(ds.features) : flatten_features(ds.features);
    std::vector<double> target = ds.outputs;
    if (model.target == TargetMode::per_unit) {
        for (std::size_t t = 0; t < target.size(); ++t) target[t] /= ds.totals[t];
    }
    model.ensemble = gbtree::boost_squared_error(x.view(), target, params);
    return model;
}

std::vector<double> predict_baseline(const BaselineModel& model, const GridFeatureTensor& features,
                                     std::span<const double> totals, const CapacityMatrix* capacities) {
    check_layout(model, features);
    const std::size_t T = features.steps();
    const std::size_t K = features.grids();
    std::vector<double> out(T, 0.0);

    if (model.kind == BaselineKind::ideal_fit) {
        if (!capacities) throw ValidationError("ideal_fit aggregate predictions need capacities");
        if (capacities->steps() != T || capacities->grids() != K) {
            throw ValidationError("capacities do not match the feature tensor");
        }
        for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t i = 0; i < K; ++i) out[t] += (*capacities)(t, i) * model.ensemble.predict(features.cell(t, i));
        }
        return out;
    }

    if (model.target == TargetMode::per_unit && totals.size() != T) {
        throw ValidationError("totals length does not match the feature tensor");
    }
    const DenseRows x =
        model.kind == BaselineKind::average_grid ? average_features(features) : flatten_features(features);
    for (std::size_t t = 0; t < T; ++t) {
        out[t] = model.ensemble.predict(x.row(t));
        if (model.target == TargetMode::per_unit) out[t] *= totals[t];
    }
    return out;
}

std::vector<double> predict_unit(const BaselineModel& model, const GridFeatureTensor& features) {
    check_layout(model, features);
    if (model.kind == BaselineKind::flatten_grid) throw ValidationError("flatten_grid has no unit output function");
    const std::size_t T = features.steps();
    const std::size_t K = features.grids();
    std::vector<double> out(T * K);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t i = 0; i < K; ++i) out[t * K + i] = model.ensemble.predict(features.cell(t, i));
    }
    return out;
}

CapacityMatrix uniform_capacities(std::span<const double> totals, std::size_t grids) {
    if (grids == 0) throw ValidationError("grid count must be positive");
    std::vector<double> values(totals.size() * grids);
    for (std::size_t t = 0; t < totals.size(); ++t) {
        for (std::size_t i = 0; i < grids; ++i) values[t * grids + i] = totals[t] / static_cast<double>(grids);
    }
    return {totals.size(), grids, std::move(values), {totals.begin(), totals.end()}};
}

}  // namespace solarboost::baselines
