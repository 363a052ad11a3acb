#include "solarboost/evalbench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "solarboost/baselines.hpp"
#include "solarboost/solver.hpp"

namespace solarboost::evalbench {

double rmse(std::span<const double> truth, std::span<const double> pred) {
    if (truth.size() != pred.size()) throw ValidationError("rmse: length mismatch");
    if (truth.empty()) throw ValidationError("rmse: empty input");
    double sum = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k) {
        const double e = truth[k] - pred[k];
        sum += e * e;
    }
    return std::sqrt(sum / static_cast<double>(truth.size()));
}

double capacity_rmse(const CapacityMatrix& truth, const CapacityMatrix& est, double scale) {
    if (truth.steps() != est.steps() || truth.grids() != est.grids()) {
        throw ValidationError("capacity_rmse: dimension mismatch");
    }
    const std::size_t K = truth.grids();
    double sum = 0.0;
    for (std::size_t t = 0; t < truth.steps(); ++t) {
        for (std::size_t i = 0; i < K; ++i) {
            const double e = truth(t, i) / truth.totals()[t] - est(t, i) / est.totals()[t];
            sum += e * e;
        }
    }
    return scale * std::sqrt(sum / static_cast<double>(truth.steps() * K));
}

MetricReport unit_output_report(std::span<const double> truth_unit, std::span<const double> pred_unit) {
    MetricReport report;
    report.rmse = rmse(truth_unit, pred_unit);
    const auto [lo, hi] = std::minmax_element(pred_unit.begin(), pred_unit.end());
    report.min = *lo;
    report.max = *hi;
    report.mean = std::accumulate(pred_unit.begin(), pred_unit.end(), 0.0) / static_cast<double>(pred_unit.size());
    return report;
}

ScalingOutcome scaling_counterexample(std::span<const double> c_prev, std::span<const double> c_next,
                                      std::span<const double> f_vals) {
    if (c_prev.size() != c_next.size() || c_prev.size() != f_vals.size()) {
        throw ValidationError("scaling_counterexample: length mismatch");
    }
    const double prev_total = std::accumulate(c_prev.begin(), c_prev.end(), 0.0);
    const double next_total = std::accumulate(c_next.begin(), c_next.end(), 0.0);
    if (!(prev_total > 0.0)) throw ValidationError("scaling_counterexample: previous total capacity must be positive");
    const double prev_out = std::inner_product(c_prev.begin(), c_prev.end(), f_vals.begin(), 0.0);
    const double next_out = std::inner_product(c_next.begin(), c_next.end(), f_vals.begin(), 0.0);
    return {next_total / prev_total * prev_out, next_out};
}

std::optional<double> thm1_sample_bound(double grids, double sigma_c, double m, double r, double epsilon,
                                        double total, double sigma_f) {
    const double k = grids;
    const double denom = r * r * k * k * (1.0 + k) * (1.0 + k) * epsilon * epsilon * m * m - total * total * sigma_f * sigma_f;
    if (!(denom > 0.0)) return std::nullopt;
    return k * sigma_c * sigma_c * m * m / denom;
}

std::size_t default_train_len(std::size_t steps) {
    if (steps < 2) throw ValidationError("need at least two steps to split");
    return steps - std::max<std::size_t>(1, steps / 15);
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<double> grid_column(std::span<const double> values, std::size_t grids, std::size_t grid) {
    std::vector<double> out;
    out.reserve(values.size() / grids);
    for (std::size_t k = grid; k < values.size(); k += grids) out.push_back(values[k]);
    return out;
}

}  // namespace

BenchmarkResult benchmark(const Dataset& train, const Dataset& test, const HyperParams& hyper,
                          const BenchmarkOptions& options) {
    using baselines::BaselineKind;
    BenchmarkResult result;
    const std::size_t K = train.grids();
    if (options.unit_grid >= K) throw ValidationError("unit_grid out of range");

    const auto start = std::chrono::steady_clock::now();
    const SolarBoostModel model = solarboost::train(train, hyper);
    result.solarboost_seconds = seconds_since(start);
    result.solarboost_rmse = rmse(test.outputs, predict(model, test.features, test.totals));

    const auto average = baselines::train_baseline(BaselineKind::average_grid, train, hyper);
    result.average_grid_rmse = rmse(test.outputs, baselines::predict_baseline(average, test.features, test.totals));

    if (options.flatten_grid) {
        const auto flatten = baselines::train_baseline(BaselineKind::flatten_grid, train, hyper);
        result.flatten_grid_rmse = rmse(test.outputs, baselines::predict_baseline(flatten, test.features, test.totals));
    }

    if (test.truth_capacities) {
        result.solarboost_capacity_rmse =
            capacity_rmse(*test.truth_capacities, forecast_capacities(model, test.steps(), test.totals));
        result.average_grid_capacity_rmse =
            capacity_rmse(*test.truth_capacities, baselines::uniform_capacities(test.totals, K));
    }

    if (test.truth_unit) {
        const auto truth = grid_column(*test.truth_unit, K, options.unit_grid);
        result.solarboost_unit =
            unit_output_report(truth, grid_column(predict_unit(model, test.features), K, options.unit_grid));
        result.average_grid_unit =
            unit_output_report(truth, grid_column(baselines::predict_unit(average, test.features), K, options.unit_grid));
        if (options.ideal_fit && train.truth_unit) {
            const auto ideal = baselines::train_baseline(BaselineKind::ideal_fit, train, hyper);
            result.ideal_fit_unit =
                unit_output_report(truth, grid_column(baselines::predict_unit(ideal, test.features), K, options.unit_grid));
        }
    }
    return result;
}

double solarboost_test_rmse(const Dataset& train, const Dataset& test, const HyperParams& hyper) {
    const SolarBoostModel model = solarboost::train(train, hyper);
    return rmse(test.outputs, predict(model, test.features, test.totals));
}

std::vector<DriftRow> thm1_drift_experiment(const synthgen::GenSpec& base, std::span<const double> sigmas,
                                            std::span<const std::uint64_t> seeds, const HyperParams& hyper) {
    if (sigmas.size() < 2) throw ValidationError("the drift experiment needs at least two sigma values");
    if (seeds.empty()) throw ValidationError("the drift experiment needs at least one seed");
    std::vector<DriftRow> rows;
    for (double sigma : sigmas) {
        for (std::uint64_t seed : seeds) {
            synthgen::GenSpec spec = base;
            spec.sigma = sigma;
            spec.seed = seed;
            spec.initial = synthgen::InitialCapacity::equal;
            const Dataset ds = synthgen::generate(spec);
            const auto [train, test] = split_train_test(ds, default_train_len(ds.steps()));
            const double sb = solarboost_test_rmse(train, test, hyper);
            const auto average = baselines::train_baseline(baselines::BaselineKind::average_grid, train, hyper);
            const double avg = rmse(test.outputs, baselines::predict_baseline(average, test.features, test.totals));
            rows.push_back({sigma, seed, sb, avg, avg - sb});
        }
    }
    return rows;
}

std::vector<VarianceRow> thm2_variance_experiment(const synthgen::GenSpec& spec, std::span<const double> noise_levels,
                                                  std::span<const double> spreads,
                                                  std::span<const std::uint64_t> seeds) {
    if (noise_levels.empty() || spreads.empty() || seeds.empty()) {
        throw ValidationError("the variance experiment needs noise levels, spreads and seeds");
    }
    constexpr std::uint64_t kInputStream = 11;
    constexpr std::uint64_t kNoiseStream = 12;
    std::vector<VarianceRow> rows;
    for (double spread : spreads) {
        if (!(spread >= 0.0)) throw ValidationError("input spread must be nonnegative");
        for (double noise : noise_levels) {
            if (!(noise >= 0.0)) throw ValidationError("noise level must be nonnegative");
            for (std::uint64_t seed : seeds) {
                synthgen::GenSpec s = spec;
                s.seed = seed;
                const CapacityMatrix caps = synthgen::gen_capacity(s);
                const std::size_t T = caps.steps();
                const std::size_t K = caps.grids();

                synthgen::Rng input_rng(synthgen::stream_seed(seed, kInputStream));
                synthgen::Rng noise_rng(synthgen::stream_seed(seed, kNoiseStream));
                std::vector<double> y(T, 0.0), y_noisy(T, 0.0), unit(K), eps(K);
                double x[3];
                for (std::size_t t = 0; t < T; ++t) {
                    double common[3];
                    for (double& u : common) u = input_rng.uniform();
                    for (std::size_t i = 0; i < K; ++i) {
                        for (int d = 0; d < 3; ++d) x[d] = common[d] + spread * (input_rng.uniform() - 0.5);
                        unit[i] = synthgen::unit_response(x);
                    }
                    double mean_eps = 0.0;
                    for (std::size_t i = 0; i < K; ++i) {
                        eps[i] = noise * caps.totals()[t] / static_cast<double>(K) * noise_rng.normal();
                        mean_eps += eps[i] / static_cast<double>(K);
                    }
                    for (std::size_t i = 0; i < K; ++i) {
                        y[t] += caps(t, i) * unit[i];
                        y_noisy[t] += (caps(t, i) + eps[i] - mean_eps) * unit[i];
                    }
                }
                // The true unit function with true capacities reproduces Y exactly.
                const double clean = rmse(y, y);
                const double noisy = rmse(y, y_noisy);
                rows.push_back({spread, noise, seed, clean, noisy, noisy - clean});
            }
        }
    }
    return rows;
}

std::string to_string(SweepParam p) { return p == SweepParam::lambda ? "lambda" : "grid_count"; }

SweepParam parse_sweep_param(const std::string& s) {
    if (s == "lambda") return SweepParam::lambda;
    if (s == "grid_count" || s == "k" || s == "K") return SweepParam::grid_count;
    throw ValidationError("unknown sweep parameter '" + s + "' (expected lambda or grid_count)");
}

Dataset regroup_grids(const Dataset& ds, std::size_t groups) {
    const std::size_t K = ds.grids();
    if (groups == 0 || groups > K) {
        throw ValidationError("group count " + std::to_string(groups) + " outside [1, " + std::to_string(K) + "]");
    }
    const std::size_t T = ds.steps();
    const std::size_t D = ds.dims();
    std::vector<std::size_t> group_of(K);
    for (std::size_t g = 0; g < groups; ++g) {
        for (std::size_t i = g * K / groups; i < (g + 1) * K / groups; ++i) group_of[i] = g;
    }
    std::vector<double> members(groups, 0.0);
    for (std::size_t i = 0; i < K; ++i) members[group_of[i]] += 1.0;

    std::vector<double> features(T * groups * D, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t i = 0; i < K; ++i) {
            const std::size_t g = group_of[i];
            for (std::size_t d = 0; d < D; ++d) features[(t * groups + g) * D + d] += ds.features(t, i, d) / members[g];
        }
    }
    Dataset out;
    out.features = GridFeatureTensor(T, groups, D, std::move(features));
    out.outputs = ds.outputs;
    out.totals = ds.totals;
    if (ds.truth_capacities) {
        std::vector<double> caps(T * groups, 0.0);
        for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t i = 0; i < K; ++i) caps[t * groups + group_of[i]] += (*ds.truth_capacities)(t, i);
        }
        out.truth_capacities = CapacityMatrix(T, groups, std::move(caps), ds.totals);
    }
    return out;
}

std::vector<SweepRow> sweep(SweepParam param, std::span<const double> values, const Dataset& train,
                            const Dataset& test, const HyperParams& hyper) {
    if (values.empty()) throw ValidationError("sweep needs at least one value");
    std::vector<SweepRow> rows;
    for (double value : values) {
        HyperParams h = hyper;
        double score = 0.0;
        if (param == SweepParam::lambda) {
            h.lambda = value;
            score = solarboost_test_rmse(train, test, h);
        } else {
            if (!(value >= 1.0) || value != std::floor(value)) {
                throw ValidationError("grid counts must be positive integers");
            }
            const auto groups = static_cast<std::size_t>(value);
            h.grid_count = 0;
            score = solarboost_test_rmse(regroup_grids(train, groups), regroup_grids(test, groups), h);
        }
        rows.push_back({value, score});
    }
    return rows;
}

std::string to_string(CurveShape shape) {
    switch (shape) {
        case CurveShape::interior_minimum: return "interior_minimum";
        case CurveShape::flat_top: return "flat_top";
        case CurveShape::boundary_minimum: return "boundary_minimum";
    }
    return "unknown";
}

CurveShape classify_curve(std::span<const SweepRow> rows, double flat_tol) {
    if (rows.empty()) throw ValidationError("cannot classify an empty curve");
    const auto best = std::min_element(rows.begin(), rows.end(),
                                       [](const SweepRow& a, const SweepRow& b) { return a.rmse < b.rmse; });
    const auto index = static_cast<std::size_t>(best - rows.begin());
    if (index != 0 && index + 1 != rows.size()) return CurveShape::interior_minimum;
    if (rows.size() >= 3) {
        std::vector<double> sorted;
        for (const SweepRow& r : rows) sorted.push_back(r.rmse);
        std::sort(sorted.begin(), sorted.end());
        if (sorted[2] <= (1.0 + flat_tol) * sorted[0]) return CurveShape::flat_top;
    }
    return CurveShape::boundary_minimum;
}

Dataset two_grid_shift_dataset(const ShiftSpec& spec) {
    if (spec.t_blocks < 2 || spec.repeat == 0) throw ValidationError("shift dataset needs at least two blocks");
    if (spec.change_block == 0 || spec.change_block >= spec.t_blocks) {
        throw ValidationError("change_block must fall strictly inside the series");
    }
    for (double share : {spec.before, spec.after}) {
        if (!(share >= 0.0 && share <= 1.0)) throw ValidationError("capacity shares must lie in [0, 1]");
    }
    synthgen::GenSpec gen;
    gen.t_blocks = spec.t_blocks;
    gen.repeat = spec.repeat;
    gen.grids = 2;
    gen.dims = 3;
    gen.seed = spec.seed;
    const GridFeatureTensor features = synthgen::gen_inputs(gen);
    std::vector<double> values;
    values.reserve(gen.steps() * 2);
    for (std::size_t t = 0; t < gen.steps(); ++t) {
        const double share = t / spec.repeat < spec.change_block ? spec.before : spec.after;
        values.push_back(share);
        values.push_back(1.0 - share);
    }
    return synthgen::assemble(features, CapacityMatrix(gen.steps(), 2, std::move(values), std::vector<double>(gen.steps(), 1.0)));
}

ShiftResult observation2_experiment(const ShiftSpec& spec, const HyperParams& hyper) {
    const Dataset ds = two_grid_shift_dataset(spec);
    const auto [train, test] = split_train_test(ds, default_train_len(ds.steps()));
    if (train.steps() <= spec.change_block * spec.repeat) {
        throw ValidationError("the capacity change must happen inside the training period");
    }
    ShiftResult result;
    result.solarboost_rmse = solarboost_test_rmse(train, test, hyper);
    const auto rescaling = baselines::train_baseline(baselines::BaselineKind::flatten_grid, train, hyper,
                                                     {baselines::TargetMode::per_unit});
    result.rescaling_rmse = rmse(test.outputs, baselines::predict_baseline(rescaling, test.features, test.totals));
    return result;
}

}  // namespace solarboost::evalbench
