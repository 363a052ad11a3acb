#include "solarboost/capfilter.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace solarboost::capfilter {

void KalmanState::validate() const {
    if (cov.rows() != mean.size() || cov.cols() != mean.size()) throw ValidationError("state covariance has wrong shape");
    if (!mean.allFinite() || !cov.allFinite()) throw ValidationError("state is not finite");
    if (linalg::max_asymmetry(cov) > 1e-10 * std::max(1.0, cov.cwiseAbs().maxCoeff())) {
        throw ValidationError("state covariance is not symmetric");
    }
    if (mean.size() > 0 && linalg::min_eigenvalue(cov) < -1e-10) {
        throw ValidationError("state covariance is not positive semidefinite");
    }
}

KalmanState kalman_step(const KalmanState& state, const Matrix& h, const Vector& obs, double process_var) {
    const Eigen::Index k = state.mean.size();
    if (h.rows() != k || h.cols() != k || obs.size() != k) throw ValidationError("kalman_step dimension mismatch");
    if (!h.allFinite() || !obs.allFinite()) throw ValidationError("kalman_step needs finite observation");
    if (!(process_var >= 0.0)) throw ValidationError("process variance must be nonnegative");

    Matrix cov = state.cov;
    cov.diagonal().array() += process_var;

    Matrix innovation = h * cov * h.transpose();
    innovation.diagonal().array() += 1.0;
    const Eigen::LLT<Matrix> llt(innovation);
    if (llt.info() != Eigen::Success) throw NumericalError("singular innovation covariance");
    // gain = cov H^T S^{-1} = (S^{-1} H cov)^T since S and cov are symmetric.
    const Matrix gain = llt.solve(h * cov).transpose();

    KalmanState next;
    next.mean = state.mean + gain * (obs - h * state.mean);
    // Joseph form; equal to (I - gain H) cov but keeps the result PSD.
    const Matrix a = Matrix::Identity(k, k) - gain * h;
    next.cov = a * cov * a.transpose() + gain * gain.transpose();
    next.cov = 0.5 * (next.cov + next.cov.transpose());
    return next;
}

std::vector<double> project_capacity(std::span<const double> c, double total) {
    if (!(total > 0.0) || !std::isfinite(total)) throw ValidationError("capacity total must be positive");
    if (c.empty()) throw ValidationError("cannot project an empty capacity vector");
    std::vector<double> out(c.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (!std::isfinite(c[i])) throw ValidationError("non-finite capacity");
        out[i] = std::max(c[i], 0.0);
        sum += out[i];
    }
    // Already on the simplex up to rounding: unchanged.
    if (std::abs(sum - total) <= 1e-12 * total) return out;
    if (sum > 0.0) {
        const double scale = total / sum;
        for (double& v : out) v *= scale;
    } else {
        std::fill(out.begin(), out.end(), total / static_cast<double>(c.size()));
    }
    return out;
}

BlockInformation BlockInformation::zero(std::size_t grids) {
    const auto k = static_cast<Eigen::Index>(grids);
    return {Matrix::Zero(k, k), Vector::Zero(k)};
}

void BlockInformation::add(const SensingStep& step) {
    precision.noalias() += step.root.transpose() * step.root;
    shift.noalias() += step.root.transpose() * step.eta;
}

std::vector<BlockInformation> accumulate_blocks(std::span<const SensingStep> steps, const BlockStructure& blocks) {
    if (steps.size() != blocks.steps) throw ValidationError("sensing steps do not cover the block structure");
    if (steps.empty()) return {};
    const auto k = static_cast<std::size_t>(steps.front().eta.size());
    std::vector<BlockInformation> out;
    out.reserve(blocks.count());
    for (const BlockRange& range : blocks.ranges) {
        BlockInformation info = BlockInformation::zero(k);
        for (std::size_t t = range.begin; t < range.end; ++t) {
            if (static_cast<std::size_t>(steps[t].eta.size()) != k || steps[t].root.rows() != steps[t].eta.size() ||
                steps[t].root.cols() != steps[t].eta.size()) {
                throw ValidationError("sensing step " + std::to_string(t) + " has wrong dimensions");
            }
            info.add(steps[t]);
        }
        out.push_back(std::move(info));
    }
    return out;
}

std::vector<Vector> filter_blocks(std::span<const BlockInformation> blocks, std::span<const double> block_totals,
                                  std::span<const double> init, const FilterSettings& settings) {
    if (!(settings.lambda > 0.0)) throw ValidationError("lambda must be positive");
    if (settings.project && block_totals.size() != blocks.size()) throw ValidationError("need one total per block");
    const auto k = static_cast<Eigen::Index>(init.size());
    for (double v : init) {
        if (!std::isfinite(v) || v < 0.0) throw ValidationError("initial capacity must be finite and nonnegative");
    }
    const double process_var = 1.0 / settings.lambda;
    const Matrix identity = Matrix::Identity(k, k);

    Vector mean = Eigen::Map<const Vector>(init.data(), k);
    Matrix cov = process_var * identity;
    std::vector<Vector> means;
    means.reserve(blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const BlockInformation& info = blocks[b];
        if (info.precision.rows() != k || info.shift.size() != k) throw ValidationError("block information has wrong size");
        if (b > 0) cov.diagonal().array() += process_var;

        const Eigen::LLT<Matrix> prior(cov);
        if (prior.info() != Eigen::Success) throw NumericalError("prior covariance lost definiteness");
        Matrix posterior_precision = prior.solve(identity) + info.precision;
        posterior_precision = 0.5 * (posterior_precision + posterior_precision.transpose());
        const Eigen::LLT<Matrix> post(posterior_precision);
        if (post.info() != Eigen::Success) throw NumericalError("posterior precision is not positive definite");
        mean += post.solve(info.shift - info.precision * mean);
        cov = post.solve(identity);
        cov = 0.5 * (cov + cov.transpose());
        if (!mean.allFinite()) throw NumericalError("capacity filter diverged at block " + std::to_string(b));

        if (settings.project) {
            const std::vector<double> projected = project_capacity({mean.data(), static_cast<std::size_t>(k)}, block_totals[b]);
            mean = Eigen::Map<const Vector>(projected.data(), k);
        }
        means.push_back(mean);
    }
    return means;
}

CapacityMatrix expand_block_means(std::span<const Vector> means, std::span<const double> totals,
                                  const BlockStructure& blocks) {
    if (means.size() != blocks.count() || totals.size() != blocks.steps) {
        throw ValidationError("block means do not match block structure");
    }
    if (means.empty()) throw ValidationError("no blocks to expand");
    const auto k = static_cast<std::size_t>(means.front().size());
    std::vector<double> values(blocks.steps * k);
    for (std::size_t b = 0; b < blocks.count(); ++b) {
        const BlockRange& range = blocks.ranges[b];
        for (std::size_t t = range.begin; t < range.end; ++t) {
            const std::vector<double> row = project_capacity({means[b].data(), k}, totals[t]);
            std::copy(row.begin(), row.end(), values.begin() + static_cast<std::ptrdiff_t>(t * k));
        }
    }
    return {blocks.steps, k, std::move(values), std::vector<double>(totals.begin(), totals.end())};
}

CapacityMatrix estimate_capacities(std::span<const SensingStep> steps, std::span<const double> totals,
                                   const BlockStructure& blocks, double lambda, std::span<const double> init) {
    if (totals.size() != blocks.steps) throw ValidationError("totals do not cover the block structure");
    const std::vector<BlockInformation> info = accumulate_blocks(steps, blocks);
    if (!info.empty() && static_cast<std::size_t>(info.front().shift.size()) != init.size()) {
        throw ValidationError("initial capacity has wrong length");
    }
    std::vector<double> block_totals;
    block_totals.reserve(blocks.count());
    for (const BlockRange& range : blocks.ranges) block_totals.push_back(totals[range.begin]);
    const std::vector<Vector> means = filter_blocks(info, block_totals, init, {lambda, true});
    return expand_block_means(means, totals, blocks);
}

}  // namespace solarboost::capfilter
