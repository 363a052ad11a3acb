#include "solarboost/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace solarboost {

namespace {

bool all_finite(std::span<const double> xs) {
    return std::all_of(xs.begin(), xs.end(), [](double v) { return std::isfinite(v); });
}

template <typename T>
std::vector<T> slice_rows(const std::vector<T>& v, std::size_t width, std::size_t begin, std::size_t end) {
    return {v.begin() + static_cast<std::ptrdiff_t>(begin * width), v.begin() + static_cast<std::ptrdiff_t>(end * width)};
}

}  // namespace

GridFeatureTensor::GridFeatureTensor(std::size_t steps, std::size_t grids, std::size_t dims, std::vector<double> values)
    : steps_(steps), grids_(grids), dims_(dims), values_(std::move(values)) {
    if (steps == 0 || grids == 0 || dims == 0) {
        throw ValidationError("feature tensor dimensions must be positive");
    }
    if (values_.size() != steps * grids * dims) {
        throw ValidationError("feature tensor holds " + std::to_string(values_.size()) + " values, expected " +
                              std::to_string(steps * grids * dims));
    }
    for (std::size_t k = 0; k < values_.size(); ++k) {
        if (!std::isfinite(values_[k])) {
            const std::size_t t = k / (grids * dims);
            const std::size_t i = (k / dims) % grids;
            throw ValidationError("non-finite feature at t=" + std::to_string(t) + " i=" + std::to_string(i) +
                                  " d=" + std::to_string(k % dims));
        }
    }
}

double GridFeatureTensor::at(std::size_t t, std::size_t i, std::size_t d) const {
    if (t >= steps_ || i >= grids_ || d >= dims_) {
        throw std::out_of_range("feature index (" + std::to_string(t) + "," + std::to_string(i) + "," +
                                std::to_string(d) + ") out of range");
    }
    return (*this)(t, i, d);
}

GridFeatureTensor GridFeatureTensor::slice(std::size_t begin, std::size_t end) const {
    if (begin >= end || end > steps_) {
        throw ValidationError("invalid feature slice [" + std::to_string(begin) + "," + std::to_string(end) + ")");
    }
    return {end - begin, grids_, dims_, slice_rows(values_, grids_ * dims_, begin, end)};
}

CapacityMatrix::CapacityMatrix(std::size_t steps, std::size_t grids, std::vector<double> values,
                               std::vector<double> totals)
    : steps_(steps), grids_(grids), values_(std::move(values)), totals_(std::move(totals)) {
    if (steps == 0 || grids == 0) {
        throw ValidationError("capacity matrix dimensions must be positive");
    }
    if (values_.size() != steps * grids || totals_.size() != steps) {
        throw ValidationError("capacity matrix size mismatch");
    }
    for (std::size_t t = 0; t < steps; ++t) {
        const double total = totals_[t];
        if (!std::isfinite(total) || total <= 0.0) {
            throw ValidationError("capacity total at t=" + std::to_string(t) + " must be positive and finite");
        }
        double sum = 0.0;
        for (std::size_t i = 0; i < grids; ++i) {
            const double c = values_[t * grids + i];
            if (!std::isfinite(c) || c < 0.0) {
                throw ValidationError("capacity at t=" + std::to_string(t) + " i=" + std::to_string(i) +
                                      " is negative or non-finite");
            }
            sum += c;
        }
        if (std::abs(sum - total) > 1e-9 * std::max(1.0, total)) {
            throw ValidationError("capacity row t=" + std::to_string(t) + " sums to " + std::to_string(sum) +
                                  " but total is " + std::to_string(total));
        }
    }
}

CapacityMatrix CapacityMatrix::from_rows(std::size_t steps, std::size_t grids, std::vector<double> values) {
    if (values.size() != steps * grids) {
        throw ValidationError("capacity matrix size mismatch");
    }
    std::vector<double> totals(steps, 0.0);
    for (std::size_t t = 0; t < steps; ++t) {
        for (std::size_t i = 0; i < grids; ++i) {
            totals[t] += values[t * grids + i];
        }
    }
    return {steps, grids, std::move(values), std::move(totals)};
}

CapacityMatrix CapacityMatrix::slice(std::size_t begin, std::size_t end) const {
    if (begin >= end || end > steps_) {
        throw ValidationError("invalid capacity slice");
    }
    return {end - begin, grids_, slice_rows(values_, grids_, begin, end), slice_rows(totals_, 1, begin, end)};
}

BlockStructure make_blocks(std::size_t steps, std::size_t block_len) {
    if (steps == 0 || block_len == 0) {
        throw ValidationError("make_blocks requires T >= 1 and s >= 1");
    }
    BlockStructure blocks{block_len, steps, {}};
    blocks.ranges.reserve((steps + block_len - 1) / block_len);
    for (std::size_t begin = 0; begin < steps; begin += block_len) {
        blocks.ranges.push_back({begin, std::min(begin + block_len, steps)});
    }
    return blocks;
}

void HyperParams::validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("lambda must be positive");
    if (!(learning_rate >= 0.0 && learning_rate <= 1.0)) throw ValidationError("learning_rate must lie in [0, 1]");
    if (max_depth < 1) throw ValidationError("max_depth must be positive");
    if (!(tree_reg >= 0.0)) throw ValidationError("tree_reg must be nonnegative");
    if (!(min_gain >= 0.0)) throw ValidationError("min_gain must be nonnegative");
    if (block_len == 0) throw ValidationError("block_len must be positive");
    if (!(pd_floor > 0.0)) throw ValidationError("pd_floor must be positive");
    if (capacity_refresh_every == 0) throw ValidationError("capacity_refresh_every must be positive");
}

void Dataset::validate() const {
    const std::size_t T = features.steps();
    const std::size_t K = features.grids();
    if (T == 0) throw ValidationError("dataset has no time steps");
    if (outputs.size() != T) throw ValidationError("outputs length does not match feature steps");
    if (totals.size() != T) throw ValidationError("totals length does not match feature steps");
    for (std::size_t t = 0; t < T; ++t) {
        if (!std::isfinite(outputs[t])) throw ValidationError("non-finite output at t=" + std::to_string(t));
        if (!std::isfinite(totals[t]) || totals[t] <= 0.0) {
            throw ValidationError("total capacity at t=" + std::to_string(t) + " must be positive and finite");
        }
    }
    if (truth_capacities) {
        if (truth_capacities->steps() != T || truth_capacities->grids() != K) {
            throw ValidationError("truth capacities do not match dataset dimensions");
        }
        for (std::size_t t = 0; t < T; ++t) {
            if (std::abs(truth_capacities->totals()[t] - totals[t]) > 1e-9 * std::max(1.0, totals[t])) {
                throw ValidationError("truth capacity total differs from dataset total at t=" + std::to_string(t));
            }
        }
    }
    if (truth_unit) {
        if (truth_unit->size() != T * K) throw ValidationError("truth unit outputs do not match dataset dimensions");
        if (!all_finite(*truth_unit)) throw ValidationError("non-finite truth unit output");
    }
}

Dataset Dataset::slice(std::size_t begin, std::size_t end) const {
    Dataset out;
    out.features = features.slice(begin, end);
    out.outputs = slice_rows(outputs, 1, begin, end);
    out.totals = slice_rows(totals, 1, begin, end);
    if (truth_capacities) out.truth_capacities = truth_capacities->slice(begin, end);
    if (truth_unit) out.truth_unit = slice_rows(*truth_unit, grids(), begin, end);
    return out;
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, std::size_t train_len) {
    if (train_len == 0 || train_len >= ds.steps()) {
        throw ValidationError("train_len " + std::to_string(train_len) + " outside (0, " + std::to_string(ds.steps()) +
                              ")");
    }
    return {ds.slice(0, train_len), ds.slice(train_len, ds.steps())};
}

Dataset concat(const Dataset& head, const Dataset& tail) {
    if (head.grids() != tail.grids() || head.dims() != tail.dims()) {
        throw ValidationError("cannot concatenate datasets with different grid or feature dimensions");
    }
    if (head.truth_capacities.has_value() != tail.truth_capacities.has_value() ||
        head.truth_unit.has_value() != tail.truth_unit.has_value()) {
        throw ValidationError("cannot concatenate datasets with different truth fields");
    }
    const auto join = [](const auto& a, const auto& b) {
        auto out = std::vector<double>(a.begin(), a.end());
        out.insert(out.end(), b.begin(), b.end());
        return out;
    };
    Dataset out;
    const std::size_t T = head.steps() + tail.steps();
    out.features = GridFeatureTensor(T, head.grids(), head.dims(), join(head.features.values(), tail.features.values()));
    out.outputs = join(head.outputs, tail.outputs);
    out.totals = join(head.totals, tail.totals);
    if (head.truth_capacities) {
        out.truth_capacities = CapacityMatrix(T, head.grids(),
                                              join(head.truth_capacities->values(), tail.truth_capacities->values()),
                                              join(head.truth_capacities->totals(), tail.truth_capacities->totals()));
    }
    if (head.truth_unit) out.truth_unit = join(*head.truth_unit, *tail.truth_unit);
    return out;
}

}  // namespace solarboost
