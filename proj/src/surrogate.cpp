#include "solarboost/surrogate.hpp"

#include <cmath>

#include "solarboost/core_model.hpp"

namespace solarboost::surrogate {

void validate(const StepContext& ctx) {
    if (ctx.capacity.size() != ctx.prediction.size()) throw ValidationError("capacity and prediction lengths differ");
    if (!std::isfinite(ctx.output)) throw ValidationError("non-finite output");
    for (std::size_t i = 0; i < ctx.capacity.size(); ++i) {
        if (!std::isfinite(ctx.capacity[i]) || ctx.capacity[i] < 0.0) {
            throw ValidationError("capacity must be finite and nonnegative");
        }
        if (!std::isfinite(ctx.prediction[i])) throw ValidationError("non-finite prediction");
    }
}

double residual_dot(const StepContext& ctx) {
    double fitted = 0.0;
    for (std::size_t i = 0; i < ctx.capacity.size(); ++i) fitted += ctx.capacity[i] * ctx.prediction[i];
    return ctx.output - fitted;
}

namespace {

void check_delta(const StepContext& ctx, std::span<const double> delta) {
    if (delta.size() != ctx.grids()) throw ValidationError("increment length does not match grid count");
}

}  // namespace

double true_objective(const StepContext& ctx, std::span<const double> delta) {
    check_delta(ctx, delta);
    double e = residual_dot(ctx);
    for (std::size_t i = 0; i < delta.size(); ++i) e -= ctx.capacity[i] * delta[i];
    return e * e;
}

double surrogate_loss(const StepContext& ctx, std::span<const double> delta) {
    // Evaluated as (R - sum a)^2 + sum_{i<j} (a_i - a_j)^2, a_i = c_i delta_i.
    const double base = true_objective(ctx, delta);
    double spread = 0.0;
    for (std::size_t i = 0; i < delta.size(); ++i) {
        const double ai = ctx.capacity[i] * delta[i];
        for (std::size_t j = i + 1; j < delta.size(); ++j) {
            const double d = ai - ctx.capacity[j] * delta[j];
            spread += d * d;
        }
    }
    return base + spread;
}

void grad_hess_into(const StepContext& ctx, std::span<double> grad, std::span<double> hess) {
    const double r = residual_dot(ctx);
    for (std::size_t i = 0; i < ctx.capacity.size(); ++i) {
        const double c = ctx.capacity[i];
        grad[i] = -2.0 * c * r;
        hess[i] = 2.0 * c * c;
    }
}

GradHess grad_hess(const StepContext& ctx) {
    GradHess out{std::vector<double>(ctx.grids()), std::vector<double>(ctx.grids())};
    grad_hess_into(ctx, out.grad, out.hess);
    return out;
}

linalg::Matrix sigma_matrix_raw(std::span<const double> prediction, std::span<const double> delta) {
    if (prediction.size() != delta.size()) throw ValidationError("prediction and increment lengths differ");
    const auto k = static_cast<Eigen::Index>(prediction.size());
    const Eigen::Map<const linalg::Vector> q(prediction.data(), k);
    const Eigen::Map<const linalg::Vector> d(delta.data(), k);
    linalg::Matrix sigma = q * q.transpose() + q * d.transpose() + d * q.transpose();
    sigma.diagonal() += static_cast<double>(k) * d.cwiseAbs2();
    return sigma;
}

double default_pd_floor(const linalg::Matrix& sigma, double rel) {
    return rel * (1.0 + sigma.trace() / static_cast<double>(sigma.rows()));
}

linalg::Matrix sigma_matrix(const StepContext& ctx, std::span<const double> delta, double pd_floor) {
    check_delta(ctx, delta);
    return linalg::floor_spectrum(sigma_matrix_raw(ctx.prediction, delta), pd_floor);
}

}  // namespace solarboost::surrogate
