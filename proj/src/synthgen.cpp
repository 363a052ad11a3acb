#include "solarboost/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace solarboost::synthgen {

void GenSpec::validate() const {
    if (t_blocks == 0 || repeat == 0 || grids == 0 || dims == 0) throw ValidationError("generator counts must be positive");
    if (dims < 3) throw ValidationError("the unit response needs at least 3 feature dimensions");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ValidationError("sigma must be nonnegative");
}

std::string to_string(CapacityProcess p) { return p == CapacityProcess::ar1 ? "ar1" : "kalman"; }

CapacityProcess parse_process(const std::string& s) {
    if (s == "ar1" || s == "ar") return CapacityProcess::ar1;
    if (s == "kalman") return CapacityProcess::kalman;
    throw ValidationError("unknown capacity process '" + s + "' (expected ar1 or kalman)");
}

// Only raw engine words are used; their sequence is fixed by the standard.
Rng::Rng(std::uint64_t seed) : engine_(seed) {}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {

constexpr std::uint64_t kInputStream = 1;
constexpr std::uint64_t kCapacityStream = 2;

std::vector<double> initial_capacities(const GenSpec& spec, Rng& rng) {
    std::vector<double> c(spec.grids, 0.5);
    if (spec.initial == InitialCapacity::uniform_random) {
        for (double& v : c) v = rng.uniform();
    }
    return c;
}

// Repeats each block row `repeat` times.
CapacityMatrix expand(const GenSpec& spec, const std::vector<double>& block_rows) {
    const std::size_t K = spec.grids;
    std::vector<double> values;
    values.reserve(spec.steps() * K);
    for (std::size_t b = 0; b < spec.t_blocks; ++b) {
        for (std::size_t r = 0; r < spec.repeat; ++r) {
            values.insert(values.end(), block_rows.begin() + static_cast<std::ptrdiff_t>(b * K),
                          block_rows.begin() + static_cast<std::ptrdiff_t>((b + 1) * K));
        }
    }
    return CapacityMatrix::from_rows(spec.steps(), K, std::move(values));
}

}  // namespace

GridFeatureTensor gen_inputs(const GenSpec& spec) {
    spec.validate();
    Rng rng(stream_seed(spec.seed, kInputStream));
    std::vector<double> values(spec.steps() * spec.grids * spec.dims);
    for (double& v : values) v = rng.uniform();
    return {spec.steps(), spec.grids, spec.dims, std::move(values)};
}

CapacityMatrix gen_capacity_ar1(const GenSpec& spec) {
    spec.validate();
    const std::size_t K = spec.grids;
    Rng rng(stream_seed(spec.seed, kCapacityStream));
    std::vector<double> state = initial_capacities(spec, rng);
    std::vector<double> coefficient(K);
    for (double& phi : coefficient) phi = 1.0 + spec.sigma * rng.normal();

    std::vector<double> rows;
    rows.reserve(spec.t_blocks * K);
    rows.insert(rows.end(), state.begin(), state.end());
    for (std::size_t b = 1; b < spec.t_blocks; ++b) {
        for (std::size_t i = 0; i < K; ++i) {
            state[i] = std::max(0.0, coefficient[i] * state[i] + spec.sigma * rng.normal());
        }
        rows.insert(rows.end(), state.begin(), state.end());
    }
    return expand(spec, rows);
}

linalg::Matrix kalman_process_cov(std::size_t grids, double sigma) {
    const auto k = static_cast<Eigen::Index>(grids);
    linalg::Matrix q(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
            q(i, j) = sigma * sigma * std::pow(0.9, static_cast<double>(std::abs(i - j)));
        }
    }
    return q;
}

CapacityMatrix gen_capacity_kalman(const GenSpec& spec) {
    spec.validate();
    const std::size_t K = spec.grids;
    const auto k = static_cast<Eigen::Index>(K);
    Rng rng(stream_seed(spec.seed, kCapacityStream));
    std::vector<double> state = initial_capacities(spec, rng);

    // Unit-scale factor so sigma = 0 needs no special case.
    const Eigen::LLT<linalg::Matrix> llt(kalman_process_cov(K, 1.0));
    if (llt.info() != Eigen::Success) throw NumericalError("process covariance factorization failed");
    const linalg::Matrix factor = spec.sigma * linalg::Matrix(llt.matrixL());

    // The measurement channel (identity observation, noise 0.1 sigma^2) is
    // not simulated: the state itself is the capacity truth.
    std::vector<double> rows;
    rows.reserve(spec.t_blocks * K);
    rows.insert(rows.end(), state.begin(), state.end());
    linalg::Vector z(k);
    for (std::size_t b = 1; b < spec.t_blocks; ++b) {
        for (Eigen::Index i = 0; i < k; ++i) z(i) = rng.normal();
        const linalg::Vector w = factor * z;
        for (std::size_t i = 0; i < K; ++i) state[i] = std::max(0.0, state[i] + w(static_cast<Eigen::Index>(i)));
        rows.insert(rows.end(), state.begin(), state.end());
    }
    return expand(spec, rows);
}

CapacityMatrix gen_capacity(const GenSpec& spec) {
    return spec.process == CapacityProcess::ar1 ? gen_capacity_ar1(spec) : gen_capacity_kalman(spec);
}

double unit_response(std::span<const double> x) {
    if (x.size() != 3) throw ValidationError("unit_response takes exactly 3 features");
    return std::sin(x[0]) + x[1] + x[2] * x[2];
}

Dataset assemble(const GridFeatureTensor& features, const CapacityMatrix& capacities) {
    if (features.steps() != capacities.steps() || features.grids() != capacities.grids()) {
        throw ValidationError("features and capacities disagree on T or K");
    }
    if (features.dims() < 3) throw ValidationError("the unit response needs at least 3 feature dimensions");
    const std::size_t T = features.steps();
    const std::size_t K = features.grids();
    Dataset ds;
    ds.features = features;
    ds.truth_capacities = capacities;
    ds.totals.assign(capacities.totals().begin(), capacities.totals().end());
    ds.outputs.assign(T, 0.0);
    std::vector<double> unit(T * K);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t i = 0; i < K; ++i) {
            unit[t * K + i] = unit_response(features.cell(t, i).first(3));
            ds.outputs[t] += capacities(t, i) * unit[t * K + i];
        }
    }
    ds.truth_unit = std::move(unit);
    return ds;
}

Dataset generate(const GenSpec& spec) { return assemble(gen_inputs(spec), gen_capacity(spec)); }

}  // namespace solarboost::synthgen
