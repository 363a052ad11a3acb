#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace solarboost::gbtree {

/// Read-only (rows, cols) row-major matrix view.
struct RowMatrixView {
    std::span<const double> data;
    std::size_t rows = 0;
    std::size_t cols = 0;

    std::span<const double> row(std::size_t r) const noexcept { return data.subspan(r * cols, cols); }
};

/// Internal node when feature >= 0, leaf otherwise.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double weight = 0.0;

    bool is_leaf() const noexcept { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

class RegressionTree {
public:
    RegressionTree() : nodes_{TreeNode{}} {}
    explicit RegressionTree(std::vector<TreeNode> nodes);

    static RegressionTree leaf(double weight) { return RegressionTree({TreeNode{.weight = weight}}); }

    /// Routes x[feature] <= threshold to the left child.
    double predict(std::span<const double> x) const;

    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    int depth() const;
    std::size_t leaf_count() const;

    bool operator==(const RegressionTree&) const = default;

private:
    std::vector<TreeNode> nodes_;
};

double predict_tree(const RegressionTree& tree, std::span<const double> x);

struct RegressionTreeEnsemble {
    std::vector<RegressionTree> trees;
    double learning_rate = 0.1;
    double base_score = 0.0;

    /// base_score + sum_j learning_rate * tree_j(x)
    double predict(std::span<const double> x) const;

    bool operator==(const RegressionTreeEnsemble&) const = default;
};

double predict_ensemble(const RegressionTreeEnsemble& ens, std::span<const double> x);

struct GradHessBatch {
    std::vector<double> grads;
    std::vector<double> hess;
};

struct TreeParams {
    int max_depth = 3;
    double reg = 1.0;
    double min_gain = 0.0;
};

/// Rows with less hessian mass than this on one side cannot form a split.
inline constexpr double kHessFloor = 1e-12;

/// Per-feature (value, row) order, built once and reused across rounds.
class PresortedColumns {
public:
    explicit PresortedColumns(RowMatrixView rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return columns_.size(); }
    std::span<const std::pair<double, std::size_t>> column(std::size_t d) const noexcept { return columns_[d]; }

private:
    std::size_t rows_;
    std::vector<std::vector<std::pair<double, std::size_t>>> columns_;
};

/// Sum of gradients and hessians that produced one trained leaf.
struct LeafAudit {
    int node = 0;
    double grad_sum = 0.0;
    double hess_sum = 0.0;
};

/**
 * Fits one Newton regression tree by exact greedy search.
 *
 * Every node is split on the (feature, threshold) maximizing
 * 0.5 * [GL^2/(HL+reg) + GR^2/(HR+reg) - G^2/(H+reg)] over midpoints of
 * adjacent distinct values, provided the gain exceeds min_gain and both
 * sides carry at least kHessFloor hessian. Ties go to the lower feature,
 * then the lower threshold. Leaves get -G/(H+reg).
 *
 * leaf_of_row, when given, receives the leaf node id of every training row.
 */
RegressionTree fit_tree(const PresortedColumns& sorted, RowMatrixView rows, const GradHessBatch& gh,
                        const TreeParams& params, std::vector<LeafAudit>* audit = nullptr,
                        std::vector<int>* leaf_of_row = nullptr);

RegressionTree fit_tree(RowMatrixView rows, const GradHessBatch& gh, const TreeParams& params);

struct BoostParams {
    std::size_t rounds = 1000;
    double learning_rate = 0.01;
    TreeParams tree;
};

/// Plain squared-error boosting (g = 2(pred - y), h = 2).
RegressionTreeEnsemble boost_squared_error(RowMatrixView rows, std::span<const double> targets,
                                           const BoostParams& params);

}  // namespace solarboost::gbtree
