#pragma once

#include <span>
#include <vector>

#include "solarboost/linalg.hpp"

namespace solarboost::surrogate {

/// One time step seen from the current model: capacities c_t, per-grid
/// predictions q_t of the ensemble so far, and the aggregate output Y_t.
struct StepContext {
    std::span<const double> capacity;
    std::span<const double> prediction;
    double output = 0.0;

    std::size_t grids() const noexcept { return capacity.size(); }
};

/// Throws ValidationError unless c >= 0 and both vectors are finite and equally long.
void validate(const StepContext& ctx);

/// c_t^T r_t = Y_t - c_t^T q_t
double residual_dot(const StepContext& ctx);

/// (c^T r - sum_i c_i delta_i)^2, the aggregate squared error after adding delta.
double true_objective(const StepContext& ctx, std::span<const double> delta);

/// (1/K) sum_i (-K c_i delta_i + c^T r)^2. Majorizes true_objective, tangent at delta = 0.
double surrogate_loss(const StepContext& ctx, std::span<const double> delta);

struct GradHess {
    std::vector<double> grad;
    std::vector<double> hess;
};

/**
 * Per-grid boosting derivatives at delta = 0:
 * grad_i = -2 c_i (c^T r), hess_i = 2 c_i^2.
 *
 * grad_i is the derivative of both the surrogate and the true objective.
 * hess_i is the diagonal curvature of the true objective; the surrogate's
 * own curvature in delta_i is K times larger.
 */
GradHess grad_hess(const StepContext& ctx);

/// Allocation-free variant writing into caller storage of length K.
void grad_hess_into(const StepContext& ctx, std::span<double> grad, std::span<double> hess);

/// K diag(delta^2) + q q^T + q delta^T + delta q^T, before any flooring.
linalg::Matrix sigma_matrix_raw(std::span<const double> prediction, std::span<const double> delta);

/// Scale-aware eigenvalue floor: rel * (1 + trace(sigma) / K).
double default_pd_floor(const linalg::Matrix& sigma, double rel = 1e-6);

/// sigma_matrix_raw with its spectrum floored at pd_floor.
linalg::Matrix sigma_matrix(const StepContext& ctx, std::span<const double> delta, double pd_floor);

}  // namespace solarboost::surrogate
