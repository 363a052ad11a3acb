#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>

#include "solarboost/core_model.hpp"
#include "solarboost/linalg.hpp"

namespace solarboost::synthgen {

enum class CapacityProcess { ar1, kalman };

/// How the per-grid starting capacities are drawn.
enum class InitialCapacity {
    uniform_random,  ///< i.i.d. U(0,1)
    equal,           ///< 0.5 for every grid
};

struct GenSpec {
    std::size_t t_blocks = 300;
    std::size_t repeat = 96;
    std::size_t grids = 15;
    std::size_t dims = 3;
    double sigma = 0.01;
    CapacityProcess process = CapacityProcess::ar1;
    std::uint64_t seed = 0;
    InitialCapacity initial = InitialCapacity::uniform_random;

    std::size_t steps() const noexcept { return t_blocks * repeat; }
    void validate() const;
};

std::string to_string(CapacityProcess p);
CapacityProcess parse_process(const std::string& s);

// The generator is pinned so datasets are reproducible across platforms:
// std::mt19937_64 words, 53-bit uniforms, Box-Muller normals. None of the
// implementation-defined <random> distributions are used.
inline constexpr const char* kGeneratorName = "mt19937_64+u53+box-muller";
inline constexpr int kGeneratorVersion = 1;

class Rng {
public:
    explicit Rng(std::uint64_t seed);

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Standard normal.
    double normal();

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// splitmix64 mix of (seed, stream); independent streams for inputs and capacities.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);

/// i.i.d. U(0,1) features of shape (t_blocks * repeat, K, D).
GridFeatureTensor gen_inputs(const GenSpec& spec);

/// Independent AR(1) per grid with coefficient ~ N(1, sigma^2) and noise ~ N(0, sigma^2), clamped at 0.
CapacityMatrix gen_capacity_ar1(const GenSpec& spec);

/// Random walk with process covariance sigma^2 * 0.9^|i-j|, clamped at 0.
CapacityMatrix gen_capacity_kalman(const GenSpec& spec);

CapacityMatrix gen_capacity(const GenSpec& spec);

linalg::Matrix kalman_process_cov(std::size_t grids, double sigma);

/// sin(x0) + x1 + x2^2
double unit_response(std::span<const double> x);

/// Y_t = sum_i c_{t,i} y_{t,i} with y from the first three features of each cell.
Dataset assemble(const GridFeatureTensor& features, const CapacityMatrix& capacities);

Dataset generate(const GenSpec& spec);

}  // namespace solarboost::synthgen
