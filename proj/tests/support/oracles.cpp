#include "oracles.hpp"

#include <cmath>
#include <limits>

namespace oracle {

std::vector<Vector> joint_penalized_solve(std::span<const solarboost::capfilter::SensingStep> steps,
                                          const solarboost::BlockStructure& blocks, double lambda,
                                          std::span<const double> init) {
    const auto k = static_cast<Eigen::Index>(init.size());
    const auto nb = static_cast<Eigen::Index>(blocks.count());
    Matrix a = Matrix::Zero(nb * k, nb * k);
    Vector rhs = Vector::Zero(nb * k);
    const Matrix eye = Matrix::Identity(k, k);

    for (Eigen::Index b = 0; b < nb; ++b) {
        const auto& range = blocks.ranges[static_cast<std::size_t>(b)];
        for (std::size_t t = range.begin; t < range.end; ++t) {
            a.block(b * k, b * k, k, k) += steps[t].root.transpose() * steps[t].root;
            rhs.segment(b * k, k) += steps[t].root.transpose() * steps[t].eta;
        }
    }
    a.block(0, 0, k, k) += lambda * eye;
    rhs.segment(0, k) += lambda * Eigen::Map<const Vector>(init.data(), k);
    for (Eigen::Index b = 1; b < nb; ++b) {
        a.block(b * k, b * k, k, k) += lambda * eye;
        a.block((b - 1) * k, (b - 1) * k, k, k) += lambda * eye;
        a.block(b * k, (b - 1) * k, k, k) -= lambda * eye;
        a.block((b - 1) * k, b * k, k, k) -= lambda * eye;
    }
    const Vector c = a.ldlt().solve(rhs);
    std::vector<Vector> out;
    for (Eigen::Index b = 0; b < nb; ++b) out.push_back(c.segment(b * k, k));
    return out;
}

Stump fit_stump(const std::vector<std::vector<double>>& x, std::span<const double> g, std::span<const double> h,
                double reg) {
    double gs = 0.0, hs = 0.0;
    for (std::size_t r = 0; r < x.size(); ++r) {
        gs += g[r];
        hs += h[r];
    }
    Stump best;
    best.leaf = -gs / (hs + reg);
    double best_gain = 0.0;
    const double parent = gs * gs / (hs + reg);
    for (std::size_t d = 0; d < x.front().size(); ++d) {
        for (std::size_t a = 0; a < x.size(); ++a) {
            // Candidate: midpoint between x[a][d] and the next larger value.
            double next = std::numeric_limits<double>::infinity();
            for (const auto& row : x) {
                if (row[d] > x[a][d]) next = std::min(next, row[d]);
            }
            if (!std::isfinite(next)) continue;
            const double thr = 0.5 * (x[a][d] + next);
            double gl = 0.0, hl = 0.0;
            for (std::size_t r = 0; r < x.size(); ++r) {
                if (x[r][d] <= thr) {
                    gl += g[r];
                    hl += h[r];
                }
            }
            const double gr = gs - gl, hr = hs - hl;
            const double gain = 0.5 * (gl * gl / (hl + reg) + gr * gr / (hr + reg) - parent);
            const bool better = gain > best_gain ||
                                (best.split && gain == best_gain && (d < best.feature || (d == best.feature && thr < best.threshold)));
            if (better && gain > 0.0) {
                best_gain = gain;
                best.split = true;
                best.feature = d;
                best.threshold = thr;
                best.left = -gl / (hl + reg);
                best.right = -gr / (hr + reg);
            }
        }
    }
    return best;
}

std::vector<double> stump_boost_mse(const std::vector<std::vector<double>>& x, std::span<const double> y,
                                    std::size_t rounds, double learning_rate, double reg) {
    std::vector<double> pred(x.size(), 0.0), g(x.size()), h(x.size(), 2.0), mse;
    for (std::size_t round = 0; round < rounds; ++round) {
        for (std::size_t r = 0; r < x.size(); ++r) g[r] = 2.0 * (pred[r] - y[r]);
        const Stump s = fit_stump(x, g, h, reg);
        double sum = 0.0;
        for (std::size_t r = 0; r < x.size(); ++r) {
            pred[r] += learning_rate * s.predict(x[r]);
            sum += (pred[r] - y[r]) * (pred[r] - y[r]);
        }
        mse.push_back(sum / static_cast<double>(x.size()));
    }
    return mse;
}

}  // namespace oracle
