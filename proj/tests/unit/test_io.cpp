#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "solarboost/io.hpp"

using namespace solarboost;
using namespace solarboost::io;

namespace {

class TempDir : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("solarboost_io_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path dir_;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

synthgen::GenSpec micro() {
    synthgen::GenSpec s;
    s.t_blocks = 4;
    s.repeat = 6;
    s.grids = 3;
    s.seed = 5;
    return s;
}

HyperParams quick() {
    HyperParams h;
    h.n_rounds = 8;
    h.learning_rate = 0.3;
    h.block_len = 6;
    return h;
}

}  // namespace

TEST(Numbers, RoundTripExactly) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int k = 0; k < 10000; ++k) {
        const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
        EXPECT_EQ(parse_number(format_number(v), "v"), v);
    }
    for (double v : {0.0, -0.0, 0.1, 1e-300, std::numeric_limits<double>::denorm_min(), std::numeric_limits<double>::max()}) {
        EXPECT_EQ(parse_number(format_number(v), "v"), v);
    }
    EXPECT_THROW(parse_number("1.5x", "v"), ValidationError);
    EXPECT_THROW(parse_number("", "v"), ValidationError);
}

TEST(Config, Parsing) {
    const auto cfg = parse_config("# comment\nseed = 7\n\nlambda=100 # trailing\n", "test");
    EXPECT_EQ(cfg.at("seed"), "7");
    EXPECT_EQ(cfg.at("lambda"), "100");
    EXPECT_THROW(parse_config("seed=1\nseed=2\n", "test"), ValidationError);
    EXPECT_THROW(parse_config("just words\n", "test"), ValidationError);
    EXPECT_THROW(parse_config("=3\n", "test"), ValidationError);
}

TEST_F(TempDir, CsvRoundTrip) {
    write_csv(dir_ / "a.csv", {"x", "y"}, {{"1", "2"}, {"3", "4"}});
    const auto t = read_csv(dir_ / "a.csv");
    EXPECT_EQ(t.header, (std::vector<std::string>{"x", "y"}));
    EXPECT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.rows[1][0], "3");
    EXPECT_THROW(read_csv(dir_ / "missing.csv"), IoError);
}

TEST_F(TempDir, DatasetRoundTripIsExact) {
    const auto spec = micro();
    const auto ds = synthgen::generate(spec);
    write_dataset(dir_, ds, synth_manifest(spec, ds));
    const auto back = read_dataset(dir_);
    EXPECT_EQ(back, ds);
}

TEST_F(TempDir, DatasetWithoutTruth) {
    auto ds = synthgen::generate(micro());
    ds.truth_capacities.reset();
    ds.truth_unit.reset();
    write_dataset(dir_, ds, Json::object());
    EXPECT_FALSE(fs::exists(dir_ / "capacities.csv"));
    EXPECT_EQ(read_dataset(dir_), ds);
}

TEST_F(TempDir, DatasetFilesAreDeterministic) {
    const auto spec = micro();
    const auto a = dir_ / "a", b = dir_ / "b";
    write_dataset(a, synthgen::generate(spec), synth_manifest(spec, synthgen::generate(spec)));
    write_dataset(b, synthgen::generate(spec), synth_manifest(spec, synthgen::generate(spec)));
    for (const char* f : {"features.csv", "outputs.csv", "capacities.csv", "manifest.json"}) {
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
}

TEST_F(TempDir, DatasetRejectsCorruption) {
    const auto spec = micro();
    const auto ds = synthgen::generate(spec);
    write_dataset(dir_, ds, synth_manifest(spec, ds));
    std::ofstream(dir_ / "outputs.csv", std::ios::app) << "99,1,1\n";
    EXPECT_THROW(read_dataset(dir_), ValidationError);
    fs::remove(dir_ / "manifest.json");
    EXPECT_THROW(read_dataset(dir_), IoError);
}

TEST_F(TempDir, ManifestRecordsGenerator) {
    const auto spec = micro();
    const auto m = synth_manifest(spec, synthgen::generate(spec));
    EXPECT_EQ(m["generator"]["name"], synthgen::kGeneratorName);
    EXPECT_EQ(m["generator"]["version"], synthgen::kGeneratorVersion);
    EXPECT_EQ(m["seed"], 5);
}

TEST(HyperJson, RoundTrip) {
    HyperParams h = quick();
    h.lambda = 123.456;
    h.seed = 99;
    h.increment = IncrementMode::scaled;
    const auto back = hyper_from_json(to_json(h));
    EXPECT_EQ(to_json(back), to_json(h));
    EXPECT_EQ(back.lambda, h.lambda);
    EXPECT_EQ(back.increment, IncrementMode::scaled);
}

TEST_F(TempDir, SolarBoostModelRoundTripPreservesPredictions) {
    const auto ds = synthgen::generate(micro());
    const auto model = train(ds, quick());
    save_model(dir_ / "model.json", model);
    const auto loaded = load_model(dir_ / "model.json");
    ASSERT_TRUE(std::holds_alternative<SolarBoostModel>(loaded));
    const auto& back = std::get<SolarBoostModel>(loaded);
    EXPECT_EQ(back, model);
    EXPECT_EQ(predict(back, ds.features), predict(model, ds.features));
    EXPECT_EQ(model_kind(loaded), "solarboost");

    save_model(dir_ / "again.json", back);
    EXPECT_EQ(slurp(dir_ / "model.json"), slurp(dir_ / "again.json"));
}

TEST_F(TempDir, BaselineModelRoundTrip) {
    const auto ds = synthgen::generate(micro());
    for (auto kind : {baselines::BaselineKind::average_grid, baselines::BaselineKind::flatten_grid,
                      baselines::BaselineKind::ideal_fit}) {
        const auto model = baselines::train_baseline(kind, ds, quick());
        save_model(dir_ / "b.json", model);
        const auto loaded = load_model(dir_ / "b.json");
        ASSERT_TRUE(std::holds_alternative<baselines::BaselineModel>(loaded));
        EXPECT_EQ(std::get<baselines::BaselineModel>(loaded), model);
        EXPECT_EQ(model_kind(loaded), baselines::to_string(kind));
    }
}

TEST(ModelJson, RejectsBadInput) {
    EXPECT_THROW(model_from_json(Json::object()), ValidationError);
    const auto ds = synthgen::generate(micro());
    auto j = model_to_json(train(ds, quick()));
    j["schema_version"] = 2;
    EXPECT_THROW(model_from_json(j), ValidationError);
    j = model_to_json(train(ds, quick()));
    j["kind"] = "forest";
    EXPECT_THROW(model_from_json(j), ValidationError);
    j = model_to_json(train(ds, quick()));
    j["trees"][0]["nodes"][0]["left"] = 0;
    EXPECT_THROW(model_from_json(j), ValidationError);
}
