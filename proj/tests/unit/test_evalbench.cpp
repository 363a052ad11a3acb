#include <gtest/gtest.h>

#include <cmath>

#include "solarboost/evalbench.hpp"
#include "solarboost/solver.hpp"

using namespace solarboost;
using namespace solarboost::evalbench;

namespace {

synthgen::GenSpec tiny_spec(std::uint64_t seed = 0) {
    synthgen::GenSpec s;
    s.t_blocks = 8;
    s.repeat = 16;
    s.grids = 3;
    s.seed = seed;
    return s;
}

HyperParams tiny_hyper() {
    HyperParams h;
    h.n_rounds = 10;
    h.learning_rate = 0.1;
    h.block_len = 16;
    return h;
}

}  // namespace

TEST(Rmse, Examples) {
    const std::vector<double> a{1, 2, 3};
    EXPECT_EQ(rmse(a, a), 0.0);
    EXPECT_NEAR(rmse(std::vector<double>{0, 0}, std::vector<double>{3, 4}), 3.53553, 1e-5);
    EXPECT_DOUBLE_EQ(rmse(std::vector<double>{1.5}, std::vector<double>{-0.25}), 1.75);
    EXPECT_THROW(rmse(a, std::vector<double>{1}), ValidationError);
    EXPECT_THROW(rmse(std::vector<double>{}, std::vector<double>{}), ValidationError);
}

TEST(CapacityRmse, Examples) {
    const auto truth = CapacityMatrix::from_rows(1, 2, {0.75, 0.25});
    EXPECT_EQ(capacity_rmse(truth, truth), 0.0);
    EXPECT_DOUBLE_EQ(capacity_rmse(truth, CapacityMatrix::from_rows(1, 2, {0.5, 0.5})), 25.0);
    const auto drifting = CapacityMatrix::from_rows(2, 2, {1, 1, 5, 5});
    const auto uniform = CapacityMatrix::from_rows(2, 2, {2, 2, 3, 3});
    EXPECT_EQ(capacity_rmse(drifting, uniform), 0.0);
    EXPECT_THROW(capacity_rmse(truth, drifting), ValidationError);
}

TEST(UnitOutputReport, Examples) {
    const std::vector<double> t{1, 2, 3};
    const auto r = unit_output_report(t, t);
    EXPECT_EQ(r.rmse, 0.0);
    EXPECT_EQ(r.max, 3.0);
    EXPECT_EQ(r.min, 1.0);
    EXPECT_EQ(r.mean, 2.0);
    EXPECT_EQ(unit_output_report(t, std::vector<double>(3, 1.29)).mean, 1.29);
}

TEST(ScalingCounterexample, Examples) {
    const auto s = scaling_counterexample(std::vector<double>{1, 1}, std::vector<double>{2, 0}, std::vector<double>{1, 2});
    EXPECT_EQ(s.scaled, 3.0);
    EXPECT_EQ(s.true_next, 2.0);
    const auto p = scaling_counterexample(std::vector<double>{1, 3}, std::vector<double>{2, 6}, std::vector<double>{0.7, 0.2});
    EXPECT_DOUBLE_EQ(p.scaled, p.true_next);
    const auto c = scaling_counterexample(std::vector<double>{1, 3}, std::vector<double>{4, 0.5}, std::vector<double>{2, 2});
    EXPECT_DOUBLE_EQ(c.scaled, c.true_next);
}

TEST(Thm1SampleBound, Examples) {
    const auto b = thm1_sample_bound(1, 1, 1, 1, 1, 1, 1);
    ASSERT_TRUE(b);
    EXPECT_DOUBLE_EQ(*b, 1.0 / 3.0);
    EXPECT_FALSE(thm1_sample_bound(1, 1, 1, 1, 0, 1, 1));
    EXPECT_EQ(thm1_sample_bound(4, 0, 1, 1, 1, 1, 1), 0.0);
}

TEST(Thm1SampleBound, MatchesDirectFormula) {
    const double K = 15, sc = 0.01, M = 2.5, r = 0.3, eps = 0.02, C = 7.5, sf = 0.4;
    const double num = K * sc * sc * M * M;
    const double den = r * r * K * K * (1 + K) * (1 + K) * eps * eps * M * M - C * C * sf * sf;
    ASSERT_GT(den, 0.0);
    EXPECT_NEAR(*thm1_sample_bound(K, sc, M, r, eps, C, sf), num / den, 1e-12 * num / den);
}

TEST(DefaultTrainLen, HoldsOutFifteenth) {
    EXPECT_EQ(default_train_len(28800), 26880u);
    EXPECT_EQ(default_train_len(10), 9u);
}

TEST(Benchmark, ProducesEveryScore) {
    const auto ds = synthgen::generate(tiny_spec());
    const auto [train, test] = split_train_test(ds, default_train_len(ds.steps()));
    const auto r = benchmark(train, test, tiny_hyper());
    EXPECT_GT(r.solarboost_rmse, 0.0);
    EXPECT_GT(r.average_grid_rmse, 0.0);
    EXPECT_TRUE(r.flatten_grid_rmse && r.solarboost_capacity_rmse && r.average_grid_capacity_rmse);
    EXPECT_TRUE(r.solarboost_unit && r.average_grid_unit && r.ideal_fit_unit);
    EXPECT_DOUBLE_EQ(r.solarboost_rmse, solarboost_test_rmse(train, test, tiny_hyper()));

    BenchmarkOptions opts;
    opts.flatten_grid = false;
    opts.ideal_fit = false;
    const auto lean = benchmark(train, test, tiny_hyper(), opts);
    EXPECT_FALSE(lean.flatten_grid_rmse);
    EXPECT_FALSE(lean.ideal_fit_unit);
}

TEST(Sweep, SingleValueMatchesDirectRun) {
    const auto ds = synthgen::generate(tiny_spec(1));
    const auto [train, test] = split_train_test(ds, 112);
    const std::vector<double> lambdas{3.0};
    const auto rows = sweep(SweepParam::lambda, lambdas, train, test, tiny_hyper());
    ASSERT_EQ(rows.size(), 1u);
    HyperParams h = tiny_hyper();
    h.lambda = 3.0;
    EXPECT_EQ(rows[0].value, 3.0);
    EXPECT_EQ(rows[0].rmse, solarboost_test_rmse(train, test, h));

    const std::vector<double> groups{1.0, 3.0};
    const auto by_k = sweep(SweepParam::grid_count, groups, train, test, tiny_hyper());
    ASSERT_EQ(by_k.size(), 2u);
    EXPECT_EQ(by_k[1].rmse, solarboost_test_rmse(train, test, tiny_hyper()));
}

TEST(SweepParam, Names) {
    EXPECT_EQ(parse_sweep_param("lambda"), SweepParam::lambda);
    EXPECT_EQ(parse_sweep_param(to_string(SweepParam::grid_count)), SweepParam::grid_count);
    EXPECT_THROW(parse_sweep_param("depth"), ValidationError);
}

TEST(RegroupGrids, AveragesFeaturesSumsCapacities) {
    const auto ds = synthgen::generate(tiny_spec(2));
    const auto g = regroup_grids(ds, 2);
    EXPECT_EQ(g.grids(), 2u);
    EXPECT_FALSE(g.truth_unit);
    EXPECT_EQ(g.outputs, ds.outputs);
    EXPECT_EQ(g.features(5, 0, 2), ds.features(5, 0, 2));
    EXPECT_DOUBLE_EQ(g.features(5, 1, 1), (ds.features(5, 1, 1) + ds.features(5, 2, 1)) / 2.0);
    EXPECT_DOUBLE_EQ((*g.truth_capacities)(5, 1), (*ds.truth_capacities)(5, 1) + (*ds.truth_capacities)(5, 2));
    EXPECT_EQ(regroup_grids(ds, 3).features, ds.features);
    EXPECT_THROW(regroup_grids(ds, 4), ValidationError);
    EXPECT_THROW(regroup_grids(ds, 0), ValidationError);
}

TEST(ClassifyCurve, Cases) {
    const std::vector<SweepRow> interior{{1, 3}, {2, 1}, {3, 2}};
    const std::vector<SweepRow> flat{{1, 1.0}, {2, 1.01}, {3, 1.03}, {4, 2}};
    const std::vector<SweepRow> boundary{{1, 1.0}, {2, 1.5}, {3, 2}};
    EXPECT_EQ(classify_curve(interior), CurveShape::interior_minimum);
    EXPECT_EQ(classify_curve(flat), CurveShape::flat_top);
    EXPECT_EQ(classify_curve(boundary), CurveShape::boundary_minimum);
}

TEST(TwoGridShift, SharesAndTotals) {
    ShiftSpec spec;
    spec.t_blocks = 6;
    spec.repeat = 3;
    spec.change_block = 2;
    const auto ds = two_grid_shift_dataset(spec);
    EXPECT_EQ(ds.steps(), 18u);
    EXPECT_EQ(ds.grids(), 2u);
    EXPECT_DOUBLE_EQ((*ds.truth_capacities)(5, 0), 0.8);
    EXPECT_DOUBLE_EQ((*ds.truth_capacities)(6, 0), 0.2);
    for (double c : ds.totals) EXPECT_DOUBLE_EQ(c, 1.0);
}

TEST(Thm1Drift, RowsPerSigmaAndSeed) {
    const std::vector<double> sigmas{0.0, 0.02};
    const std::vector<std::uint64_t> seeds{0, 1};
    const auto rows = thm1_drift_experiment(tiny_spec(), sigmas, seeds, tiny_hyper());
    ASSERT_EQ(rows.size(), 4u);
    for (const auto& r : rows) EXPECT_DOUBLE_EQ(r.gap, r.average_grid_rmse - r.solarboost_rmse);
    EXPECT_THROW(thm1_drift_experiment(tiny_spec(), std::vector<double>{0.0}, seeds, tiny_hyper()), ValidationError);
}

TEST(Thm2Variance, ZeroNoiseZeroInflation) {
    const std::vector<double> noise{0.0, 0.2};
    const std::vector<double> spreads{0.1, 1.0};
    const std::vector<std::uint64_t> seeds{0};
    const auto rows = thm2_variance_experiment(tiny_spec(), noise, spreads, seeds);
    ASSERT_EQ(rows.size(), 4u);
    for (const auto& r : rows) {
        if (r.noise == 0.0) EXPECT_EQ(r.inflation, 0.0);
        else EXPECT_GT(r.inflation, 0.0);
    }
}
