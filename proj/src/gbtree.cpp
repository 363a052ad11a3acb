#include "solarboost/gbtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "solarboost/core_model.hpp"

namespace solarboost::gbtree {

RegressionTree::RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw ValidationError("a tree needs at least one node");
    std::vector<int> parents(nodes_.size(), 0);
    const int n = static_cast<int>(nodes_.size());
    for (int id = 0; id < n; ++id) {
        const TreeNode& node = nodes_[static_cast<std::size_t>(id)];
        if (node.is_leaf()) {
            if (!std::isfinite(node.weight)) throw ValidationError("non-finite leaf weight at node " + std::to_string(id));
            continue;
        }
        if (!std::isfinite(node.threshold)) throw ValidationError("non-finite threshold at node " + std::to_string(id));
        // Children strictly after their parent rules out cycles.
        for (int child : {node.left, node.right}) {
            if (child <= id || child >= n) {
                throw ValidationError("node " + std::to_string(id) + " has invalid child " + std::to_string(child));
            }
            if (++parents[static_cast<std::size_t>(child)] > 1) {
                throw ValidationError("node " + std::to_string(child) + " has more than one parent");
            }
        }
    }
    for (int id = 1; id < n; ++id) {
        if (parents[static_cast<std::size_t>(id)] != 1) {
            throw ValidationError("node " + std::to_string(id) + " is unreachable");
        }
    }
}

double RegressionTree::predict(std::span<const double> x) const {
    std::size_t id = 0;
    while (!nodes_[id].is_leaf()) {
        const TreeNode& node = nodes_[id];
        if (static_cast<std::size_t>(node.feature) >= x.size()) {
            throw ValidationError("tree splits on feature " + std::to_string(node.feature) + " but input has " +
                                  std::to_string(x.size()));
        }
        id = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                                                  : node.right);
    }
    return nodes_[id].weight;
}

int RegressionTree::depth() const {
    std::vector<int> level(nodes_.size(), 0);
    int deepest = 0;
    for (std::size_t id = 0; id < nodes_.size(); ++id) {
        deepest = std::max(deepest, level[id]);
        if (!nodes_[id].is_leaf()) {
            level[static_cast<std::size_t>(nodes_[id].left)] = level[id] + 1;
            level[static_cast<std::size_t>(nodes_[id].right)] = level[id] + 1;
        }
    }
    return deepest;
}

std::size_t RegressionTree::leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

double predict_tree(const RegressionTree& tree, std::span<const double> x) { return tree.predict(x); }

double RegressionTreeEnsemble::predict(std::span<const double> x) const {
    double sum = base_score;
    for (const RegressionTree& tree : trees) {
        sum += learning_rate * tree.predict(x);
    }
    return sum;
}

double predict_ensemble(const RegressionTreeEnsemble& ens, std::span<const double> x) { return ens.predict(x); }

PresortedColumns::PresortedColumns(RowMatrixView rows) : rows_(rows.rows), columns_(rows.cols) {
    for (std::size_t d = 0; d < rows.cols; ++d) {
        auto& column = columns_[d];
        column.reserve(rows.rows);
        for (std::size_t r = 0; r < rows.rows; ++r) {
            column.emplace_back(rows.data[r * rows.cols + d], r);
        }
        std::sort(column.begin(), column.end());
    }
}

namespace {

struct NodeSums {
    double grad = 0.0;
    double hess = 0.0;
};

struct SplitCandidate {
    double gain = -std::numeric_limits<double>::infinity();
    int feature = -1;
    double threshold = 0.0;
};

double leaf_weight(const NodeSums& s, double reg) {
    const double denom = s.hess + reg;
    return denom > 0.0 ? -s.grad / denom : 0.0;
}

double score(double g, double h, double reg) {
    const double denom = h + reg;
    return denom > 0.0 ? g * g / denom : 0.0;
}

// Midpoint that still separates lo from hi after rounding.
double separating_threshold(double lo, double hi) {
    const double mid = lo + (hi - lo) * 0.5;
    return (mid >= hi || mid < lo) ? lo : mid;
}

}  // namespace

RegressionTree fit_tree(const PresortedColumns& sorted, RowMatrixView rows, const GradHessBatch& gh,
                        const TreeParams& params, std::vector<LeafAudit>* audit, std::vector<int>* leaf_of_row) {
    const std::size_t M = rows.rows;
    if (M == 0) throw ValidationError("fit_tree needs at least one row");
    if (gh.grads.size() != M || gh.hess.size() != M) throw ValidationError("gradient batch does not match row count");
    if (sorted.rows() != M || sorted.cols() != rows.cols) throw ValidationError("presorted index does not match rows");
    if (params.max_depth < 0) throw ValidationError("max_depth must be nonnegative");
    for (std::size_t r = 0; r < M; ++r) {
        if (!std::isfinite(gh.grads[r]) || !std::isfinite(gh.hess[r]) || gh.hess[r] < 0.0) {
            throw NumericalError("invalid gradient/hessian at row " + std::to_string(r));
        }
    }

    const double reg = params.reg;
    std::vector<TreeNode> nodes(1);
    std::vector<NodeSums> sums(1);
    for (std::size_t r = 0; r < M; ++r) {
        sums[0].grad += gh.grads[r];
        sums[0].hess += gh.hess[r];
    }

    // position[r]: node holding row r. Rows whose node is final get slot -1.
    std::vector<int> position(M, 0);
    struct RowState {
        double grad;
        double hess;
        long slot;
    };
    std::vector<RowState> state(M);
    for (std::size_t r = 0; r < M; ++r) state[r] = {gh.grads[r], gh.hess[r], 0};
    std::vector<int> frontier{0};

    for (int depth = 0; depth < params.max_depth && !frontier.empty(); ++depth) {
        const std::size_t slots = frontier.size();
        if (depth > 0) {
            std::vector<long> slot_of_node(nodes.size(), -1);
            for (std::size_t s = 0; s < slots; ++s) slot_of_node[static_cast<std::size_t>(frontier[s])] = static_cast<long>(s);
            for (std::size_t r = 0; r < M; ++r) state[r].slot = slot_of_node[static_cast<std::size_t>(position[r])];
        }

        std::vector<double> parent_score(slots);
        for (std::size_t s = 0; s < slots; ++s) {
            const NodeSums& ns = sums[static_cast<std::size_t>(frontier[s])];
            parent_score[s] = score(ns.grad, ns.hess, reg);
        }

        std::vector<SplitCandidate> best(slots);
        std::vector<double> grad_left(slots), hess_left(slots), last_value(slots);
        std::vector<char> seen(slots);
        for (std::size_t d = 0; d < rows.cols; ++d) {
            std::fill(grad_left.begin(), grad_left.end(), 0.0);
            std::fill(hess_left.begin(), hess_left.end(), 0.0);
            std::fill(seen.begin(), seen.end(), 0);
            const auto column = sorted.column(d);
            constexpr std::size_t kLookahead = 16;
            for (std::size_t k = 0; k < column.size(); ++k) {
                if (k + kLookahead < column.size()) __builtin_prefetch(&state[column[k + kLookahead].second]);
                const auto& [value, row] = column[k];
                const RowState& rs = state[row];
                if (rs.slot < 0) continue;
                const auto s = static_cast<std::size_t>(rs.slot);
                if (seen[s] && value != last_value[s]) {
                    const NodeSums& total = sums[static_cast<std::size_t>(frontier[s])];
                    const double gr = total.grad - grad_left[s];
                    const double hr = total.hess - hess_left[s];
                    if (hess_left[s] >= kHessFloor && hr >= kHessFloor) {
                        const double gain =
                            0.5 * (score(grad_left[s], hess_left[s], reg) + score(gr, hr, reg) - parent_score[s]);
                        if (gain > best[s].gain) {
                            best[s] = {gain, static_cast<int>(d), separating_threshold(last_value[s], value)};
                        }
                    }
                }
                grad_left[s] += rs.grad;
                hess_left[s] += rs.hess;
                last_value[s] = value;
                seen[s] = 1;
            }
        }

        std::vector<int> next_frontier;
        for (std::size_t s = 0; s < slots; ++s) {
            if (best[s].feature < 0 || !(best[s].gain > params.min_gain)) continue;
            const auto id = static_cast<std::size_t>(frontier[s]);
            const int left = static_cast<int>(nodes.size());
            nodes[id].feature = best[s].feature;
            nodes[id].threshold = best[s].threshold;
            nodes[id].left = left;
            nodes[id].right = left + 1;
            nodes.emplace_back();
            nodes.emplace_back();
            sums.emplace_back();
            sums.emplace_back();
            next_frontier.push_back(left);
            next_frontier.push_back(left + 1);
        }
        if (next_frontier.empty()) break;

        for (std::size_t r = 0; r < M; ++r) {
            if (state[r].slot < 0) continue;
            const TreeNode& node = nodes[static_cast<std::size_t>(position[r])];
            if (node.is_leaf()) continue;
            const double v = rows.data[r * rows.cols + static_cast<std::size_t>(node.feature)];
            const int child = v <= node.threshold ? node.left : node.right;
            position[r] = child;
            sums[static_cast<std::size_t>(child)].grad += state[r].grad;
            sums[static_cast<std::size_t>(child)].hess += state[r].hess;
        }
        frontier = std::move(next_frontier);
    }

    for (std::size_t id = 0; id < nodes.size(); ++id) {
        if (!nodes[id].is_leaf()) continue;
        nodes[id].weight = leaf_weight(sums[id], reg);
        if (audit) audit->push_back({static_cast<int>(id), sums[id].grad, sums[id].hess});
    }
    if (leaf_of_row) *leaf_of_row = std::move(position);
    return RegressionTree(std::move(nodes));
}

RegressionTree fit_tree(RowMatrixView rows, const GradHessBatch& gh, const TreeParams& params) {
    return fit_tree(PresortedColumns(rows), rows, gh, params);
}

RegressionTreeEnsemble boost_squared_error(RowMatrixView rows, std::span<const double> targets,
                                           const BoostParams& params) {
    if (targets.size() != rows.rows) throw ValidationError("target length does not match row count");
    RegressionTreeEnsemble ens{{}, params.learning_rate, 0.0};
    if (params.rounds == 0) return ens;
    const PresortedColumns sorted(rows);
    std::vector<double> pred(rows.rows, ens.base_score);
    GradHessBatch gh{std::vector<double>(rows.rows), std::vector<double>(rows.rows, 2.0)};
    std::vector<int> leaf_of_row;
    ens.trees.reserve(params.rounds);
    for (std::size_t round = 0; round < params.rounds; ++round) {
        for (std::size_t r = 0; r < rows.rows; ++r) gh.grads[r] = 2.0 * (pred[r] - targets[r]);
        RegressionTree tree = fit_tree(sorted, rows, gh, params.tree, nullptr, &leaf_of_row);
        for (std::size_t r = 0; r < rows.rows; ++r) {
            pred[r] += params.learning_rate * tree.nodes()[static_cast<std::size_t>(leaf_of_row[r])].weight;
        }
        ens.trees.push_back(std::move(tree));
    }
    return ens;
}

}  // namespace solarboost::gbtree
