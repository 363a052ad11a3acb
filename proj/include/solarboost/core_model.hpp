#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace solarboost {

/// Malformed input, broken invariant, or bad configuration.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// File could not be read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A computation produced a non-finite value.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Grid-level input features indexed (t, i, d).
 *
 * Storage is row-major with d fastest, so the block for fixed t is a
 * contiguous (K, D) matrix and the whole tensor doubles as a (T*K, D)
 * row matrix with row index t*K + i.
 */
class GridFeatureTensor {
public:
    GridFeatureTensor() = default;
    GridFeatureTensor(std::size_t steps, std::size_t grids, std::size_t dims, std::vector<double> values);

    std::size_t steps() const noexcept { return steps_; }
    std::size_t grids() const noexcept { return grids_; }
    std::size_t dims() const noexcept { return dims_; }

    /// Bounds-checked element access.
    double at(std::size_t t, std::size_t i, std::size_t d) const;

    double operator()(std::size_t t, std::size_t i, std::size_t d) const noexcept {
        return values_[(t * grids_ + i) * dims_ + d];
    }

    /// Feature vector x_{t,i}.
    std::span<const double> cell(std::size_t t, std::size_t i) const noexcept {
        return {values_.data() + (t * grids_ + i) * dims_, dims_};
    }

    std::span<const double> values() const noexcept { return values_; }

    /// Time steps [begin, end).
    GridFeatureTensor slice(std::size_t begin, std::size_t end) const;

    bool operator==(const GridFeatureTensor&) const = default;

private:
    std::size_t steps_ = 0;
    std::size_t grids_ = 0;
    std::size_t dims_ = 0;
    std::vector<double> values_;
};

/// Nonnegative (T, K) capacities whose rows sum to the known totals C_t.
class CapacityMatrix {
public:
    CapacityMatrix() = default;
    /// Validates nonnegativity and |row sum - total| <= 1e-9 * max(1, total).
    CapacityMatrix(std::size_t steps, std::size_t grids, std::vector<double> values, std::vector<double> totals);

    /// Totals are taken as the row sums.
    static CapacityMatrix from_rows(std::size_t steps, std::size_t grids, std::vector<double> values);

    std::size_t steps() const noexcept { return steps_; }
    std::size_t grids() const noexcept { return grids_; }

    double operator()(std::size_t t, std::size_t i) const noexcept { return values_[t * grids_ + i]; }
    std::span<const double> row(std::size_t t) const noexcept { return {values_.data() + t * grids_, grids_}; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<const double> totals() const noexcept { return totals_; }

    CapacityMatrix slice(std::size_t begin, std::size_t end) const;

    bool operator==(const CapacityMatrix&) const = default;

private:
    std::size_t steps_ = 0;
    std::size_t grids_ = 0;
    std::vector<double> values_;
    std::vector<double> totals_;
};

struct BlockRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end - begin; }
    bool operator==(const BlockRange&) const = default;
};

/// Half-open ranges of length block_len tiling [0, T); the last may be short.
struct BlockStructure {
    std::size_t block_len = 0;
    std::size_t steps = 0;
    std::vector<BlockRange> ranges;

    std::size_t count() const noexcept { return ranges.size(); }
    /// Index of the block containing step t.
    std::size_t block_of(std::size_t t) const noexcept { return t / block_len; }
};

BlockStructure make_blocks(std::size_t steps, std::size_t block_len);

/// Which quantity stands in for the new learner's increment when the
/// capacity filter builds its sensing matrix.
enum class IncrementMode {
    raw,     ///< the tree's unscaled output
    scaled,  ///< learning_rate * tree output, i.e. the change actually applied
};

struct HyperParams {
    double lambda = 10.0;
    std::size_t n_rounds = 1000;
    double learning_rate = 0.01;
    int max_depth = 3;
    double tree_reg = 1.0;
    double min_gain = 0.0;
    /// 0 means "take K from the dataset".
    std::size_t grid_count = 0;
    std::size_t block_len = 96;
    /// Relative eigenvalue floor: Sigma_t is floored at pd_floor * (1 + trace/K).
    double pd_floor = 1e-6;
    std::uint64_t seed = 0;
    /// Refresh capacities every m boosting rounds (1 = every round).
    std::size_t capacity_refresh_every = 1;
    IncrementMode increment = IncrementMode::raw;

    /// Throws ValidationError naming the offending field.
    void validate() const;

    bool operator==(const HyperParams&) const = default;
};

/// A forecasting dataset. Truth fields are present only for synthetic data.
struct Dataset {
    GridFeatureTensor features;
    std::vector<double> outputs;  ///< Y_t
    std::vector<double> totals;   ///< C_t
    std::optional<CapacityMatrix> truth_capacities;
    /// y_{t,i}, row-major (T, K).
    std::optional<std::vector<double>> truth_unit;

    std::size_t steps() const noexcept { return features.steps(); }
    std::size_t grids() const noexcept { return features.grids(); }
    std::size_t dims() const noexcept { return features.dims(); }

    /// Throws ValidationError on dimension mismatch or non-finite values.
    void validate() const;

    /// Time steps [begin, end) of every parallel field.
    Dataset slice(std::size_t begin, std::size_t end) const;

    bool operator==(const Dataset&) const = default;
};

std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, std::size_t train_len);

/// Inverse of split_train_test.
Dataset concat(const Dataset& head, const Dataset& tail);

}  // namespace solarboost
