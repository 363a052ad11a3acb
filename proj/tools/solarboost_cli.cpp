// Command-line front end: synth, train, predict, eval, sweep, thm.

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "solarboost/baselines.hpp"
#include "solarboost/evalbench.hpp"
#include "solarboost/io.hpp"
#include "solarboost/solver.hpp"
#include "solarboost/synthgen.hpp"

namespace {

using namespace solarboost;
namespace fs = std::filesystem;
using io::format_number;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitIo = 2;

std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(io::parse_number(item, what));
    }
    if (out.empty()) throw ValidationError(what + ": empty list");
    return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> out;
    for (double v : parse_list(text, "--seeds")) {
        if (v < 0 || v != static_cast<double>(static_cast<std::uint64_t>(v))) {
            throw ValidationError("--seeds: seeds must be nonnegative integers");
        }
        out.push_back(static_cast<std::uint64_t>(v));
    }
    return out;
}

struct GenOptions {
    synthgen::GenSpec spec;
    std::string process = "ar1";
    std::string initial = "uniform_random";

    void attach(CLI::App* app) {
        app->add_option("--T-blocks", spec.t_blocks, "number of capacity blocks")->capture_default_str();
        app->add_option("--repeat", spec.repeat, "steps per block")->capture_default_str();
        app->add_option("--K", spec.grids, "number of grids")->capture_default_str();
        app->add_option("--D", spec.dims, "feature dimension (>= 3)")->capture_default_str();
        app->add_option("--sigma", spec.sigma, "capacity noise scale")->capture_default_str();
        app->add_option("--process", process, "capacity process: ar1 or kalman")->capture_default_str();
        app->add_option("--initial", initial, "initial capacities: uniform_random or equal")->capture_default_str();
    }

    synthgen::GenSpec resolve(std::uint64_t seed) const {
        synthgen::GenSpec s = spec;
        s.seed = seed;
        s.process = synthgen::parse_process(process);
        if (initial == "equal") {
            s.initial = synthgen::InitialCapacity::equal;
        } else if (initial == "uniform_random") {
            s.initial = synthgen::InitialCapacity::uniform_random;
        } else {
            throw ValidationError("--initial must be uniform_random or equal");
        }
        s.validate();
        return s;
    }
};

struct HyperOptions {
    HyperParams hyper;
    std::string increment = "raw";

    void attach(CLI::App* app) {
        app->add_option("--rounds", hyper.n_rounds, "boosting rounds N")->capture_default_str();
        app->add_option("--learning-rate", hyper.learning_rate, "shrinkage eta")->capture_default_str();
        app->add_option("--lambda", hyper.lambda, "capacity smoothness weight")->capture_default_str();
        app->add_option("--max-depth", hyper.max_depth, "tree depth")->capture_default_str();
        app->add_option("--tree-reg", hyper.tree_reg, "leaf L2 regularization")->capture_default_str();
        app->add_option("--min-gain", hyper.min_gain, "minimum split gain")->capture_default_str();
        app->add_option("--block-len", hyper.block_len, "steps per constant-capacity block")->capture_default_str();
        app->add_option("--pd-floor", hyper.pd_floor, "relative eigenvalue floor")->capture_default_str();
        app->add_option("--refresh-every", hyper.capacity_refresh_every, "capacity refresh period in rounds")
            ->capture_default_str();
        app->add_option("--increment", increment, "sensing increment: raw or scaled")->capture_default_str();
    }

    HyperParams resolve(std::uint64_t seed) const {
        HyperParams h = hyper;
        h.seed = seed;
        if (increment == "raw") {
            h.increment = IncrementMode::raw;
        } else if (increment == "scaled") {
            h.increment = IncrementMode::scaled;
        } else {
            throw ValidationError("--increment must be raw or scaled");
        }
        h.validate();
        return h;
    }
};

struct Common {
    std::uint64_t seed = 0;
    std::string out = ".";
    std::string config;

    void attach(CLI::App* app) {
        app->add_option("--config", config, "key=value configuration file");
        app->add_option("--seed", seed, "random seed")->capture_default_str();
        app->add_option("--out", out, "output directory")->capture_default_str();
    }
};

fs::path prepare_out(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
    return dir;
}

Dataset window(const Dataset& ds, std::size_t begin, std::size_t end) {
    if (begin >= end || end > ds.steps()) {
        throw ValidationError("step window [" + std::to_string(begin) + ", " + std::to_string(end) +
                              ") is outside the dataset of " + std::to_string(ds.steps()) + " steps");
    }
    return ds.slice(begin, end);
}

// SolarBoost capacities for absolute steps [begin, end): fitted rows inside
// the training period, the rescaled last row beyond it.
CapacityMatrix solarboost_capacities(const SolarBoostModel& model, const Dataset& part, std::size_t begin) {
    const std::size_t K = model.grid_count;
    std::vector<double> values(part.steps() * K);
    const CapacityMatrix future = forecast_capacities(model, part.steps(), part.totals);
    for (std::size_t h = 0; h < part.steps(); ++h) {
        const std::size_t t = begin + h;
        double sum = 0.0;
        if (t < model.training_steps) {
            for (std::size_t i = 0; i < K; ++i) sum += model.capacities(t, i);
        }
        for (std::size_t i = 0; i < K; ++i) {
            values[h * K + i] =
                t < model.training_steps ? model.capacities(t, i) * part.totals[h] / sum : future(h, i);
        }
    }
    return CapacityMatrix::from_rows(part.steps(), K, std::move(values));
}

std::vector<double> aggregate(const CapacityMatrix& caps, std::span<const double> unit) {
    const std::size_t K = caps.grids();
    std::vector<double> out(caps.steps(), 0.0);
    for (std::size_t t = 0; t < caps.steps(); ++t) {
        for (std::size_t i = 0; i < K; ++i) out[t] += caps(t, i) * unit[t * K + i];
    }
    return out;
}

struct Predictions {
    std::vector<double> aggregate;
    std::optional<std::vector<double>> unit;
    std::optional<CapacityMatrix> capacities;
};

Predictions predict_window(const io::AnyModel& any, const Dataset& part, std::size_t begin) {
    Predictions p;
    if (const auto* m = std::get_if<SolarBoostModel>(&any)) {
        p.unit = predict_unit(*m, part.features);
        p.capacities = solarboost_capacities(*m, part, begin);
        p.aggregate = aggregate(*p.capacities, *p.unit);
        return p;
    }
    const auto& b = std::get<baselines::BaselineModel>(any);
    switch (b.kind) {
        case baselines::BaselineKind::average_grid:
            p.aggregate = baselines::predict_baseline(b, part.features, part.totals);
            p.unit = baselines::predict_unit(b, part.features);
            p.capacities = baselines::uniform_capacities(part.totals, part.grids());
            break;
        case baselines::BaselineKind::flatten_grid:
            p.aggregate = baselines::predict_baseline(b, part.features, part.totals);
            break;
        case baselines::BaselineKind::ideal_fit:
            p.unit = baselines::predict_unit(b, part.features);
            if (part.truth_capacities) p.aggregate = aggregate(*part.truth_capacities, *p.unit);
            break;
    }
    return p;
}

int cmd_synth(const Common& common, const GenOptions& gen) {
    const synthgen::GenSpec spec = gen.resolve(common.seed);
    const Dataset ds = synthgen::generate(spec);
    io::write_dataset(common.out, ds, io::synth_manifest(spec, ds));
    std::cout << "wrote " << ds.steps() << " steps x " << ds.grids() << " grids to " << common.out << '\n';
    return kExitOk;
}

struct TrainOptions {
    std::string data;
    std::string method = "solarboost";
    std::string target;
    std::size_t train_len = 0;
};

int cmd_train(const Common& common, const HyperOptions& hopt, const TrainOptions& opt) {
    const HyperParams hyper = hopt.resolve(common.seed);
    Dataset ds = io::read_dataset(opt.data);
    if (opt.train_len != 0) ds = window(ds, 0, opt.train_len);
    const fs::path out = prepare_out(common.out);

    std::vector<std::vector<std::string>> log;
    io::AnyModel model;
    if (opt.method == "solarboost") {
        TrainingCurve curve;
        model = train(ds, hyper, curve.sink());
        for (const RoundReport& r : curve.reports()) {
            log.push_back({std::to_string(r.round), format_number(r.true_objective), format_number(r.train_rmse)});
        }
    } else {
        baselines::BaselineOptions bopt;
        if (!opt.target.empty()) bopt.target = baselines::parse_target(opt.target);
        const auto b = baselines::train_baseline(baselines::parse_kind(opt.method), ds, hyper, bopt);
        model = b;
        const Predictions p = predict_window(model, ds, 0);
        if (!p.aggregate.empty()) {
            const double r = evalbench::rmse(ds.outputs, p.aggregate);
            log.push_back({std::to_string(b.ensemble.trees.size()),
                           format_number(r * r * static_cast<double>(ds.steps())), format_number(r)});
        }
    }
    io::save_model(out / "model.json", model);
    io::write_csv(out / "training_log.csv", {"round", "true_objective", "train_rmse"}, log);
    std::cout << "trained " << io::model_kind(model) << " on " << ds.steps() << " steps; model written to "
              << (out / "model.json").string() << '\n';
    return kExitOk;
}

struct EvalOptions {
    std::string data;
    std::string model;
    std::size_t test_start = 0;
    std::size_t unit_grid = 0;
};

int cmd_predict(const Common& common, const EvalOptions& opt) {
    const io::AnyModel model = io::load_model(opt.model);
    const Dataset ds = io::read_dataset(opt.data);
    const Dataset part = window(ds, opt.test_start, ds.steps());
    const Predictions p = predict_window(model, part, opt.test_start);
    if (p.aggregate.empty()) throw ValidationError("ideal_fit needs truth capacities to predict aggregate output");
    std::vector<std::vector<std::string>> rows;
    for (std::size_t h = 0; h < part.steps(); ++h) {
        rows.push_back({std::to_string(opt.test_start + h), format_number(p.aggregate[h])});
    }
    const fs::path out = prepare_out(common.out);
    io::write_csv(out / "predictions.csv", {"t", "Y_hat"}, rows);
    std::cout << "wrote " << rows.size() << " predictions\n";
    return kExitOk;
}

int cmd_eval(const Common& common, const EvalOptions& opt) {
    const io::AnyModel model = io::load_model(opt.model);
    const Dataset ds = io::read_dataset(opt.data);
    const Dataset part = window(ds, opt.test_start, ds.steps());
    const Predictions p = predict_window(model, part, opt.test_start);

    std::vector<std::vector<std::string>> rows;
    const auto emit = [&rows](const std::string& name, double v) {
        rows.push_back({name, format_number(v)});
        std::cout << name << ' ' << format_number(v) << '\n';
    };
    if (!p.aggregate.empty()) emit("aggregate_rmse", evalbench::rmse(part.outputs, p.aggregate));
    if (part.truth_capacities && p.capacities) {
        emit("capacity_rmse", evalbench::capacity_rmse(*part.truth_capacities, *p.capacities));
        emit("capacity_rmse_raw", evalbench::capacity_rmse(*part.truth_capacities, *p.capacities, 1.0));
    }
    if (part.truth_unit && p.unit) {
        const std::size_t K = part.grids();
        if (opt.unit_grid >= K) throw ValidationError("--unit-grid out of range");
        std::vector<double> truth, pred;
        for (std::size_t h = 0; h < part.steps(); ++h) {
            truth.push_back((*part.truth_unit)[h * K + opt.unit_grid]);
            pred.push_back((*p.unit)[h * K + opt.unit_grid]);
        }
        const evalbench::MetricReport r = evalbench::unit_output_report(truth, pred);
        emit("unit_rmse", r.rmse);
        emit("unit_max", r.max);
        emit("unit_min", r.min);
        emit("unit_mean", r.mean);
    }
    const fs::path out = prepare_out(common.out);
    io::write_csv(out / "metrics.csv", {"metric", "value"}, rows);
    return kExitOk;
}

struct SweepOptions {
    std::string data;
    std::string param = "lambda";
    std::string values = "10,100,1000,10000,100000";
};

Dataset load_or_generate(const std::string& data, const GenOptions& gen, std::uint64_t seed) {
    if (!data.empty()) return io::read_dataset(data);
    return synthgen::generate(gen.resolve(seed));
}

int cmd_sweep(const Common& common, const GenOptions& gen, const HyperOptions& hopt, const SweepOptions& opt) {
    const evalbench::SweepParam param = evalbench::parse_sweep_param(opt.param);
    const std::vector<double> values = parse_list(opt.values, "--values");
    const HyperParams hyper = hopt.resolve(common.seed);
    const Dataset ds = load_or_generate(opt.data, gen, common.seed);
    const auto [train, test] = split_train_test(ds, evalbench::default_train_len(ds.steps()));
    const auto table = evalbench::sweep(param, values, train, test, hyper);

    std::vector<std::vector<std::string>> rows;
    for (const auto& r : table) {
        rows.push_back({evalbench::to_string(param), format_number(r.value), format_number(r.rmse),
                        std::to_string(common.seed)});
        std::cout << evalbench::to_string(param) << '=' << format_number(r.value) << " rmse " << format_number(r.rmse)
                  << '\n';
    }
    const fs::path out = prepare_out(common.out);
    io::write_csv(out / ("sweep_" + evalbench::to_string(param) + ".csv"), {"param", "value", "test_rmse", "seed"}, rows);
    if (param == evalbench::SweepParam::lambda) {
        std::cout << "curve shape: " << evalbench::to_string(evalbench::classify_curve(table)) << '\n';
    }
    return kExitOk;
}

struct BoundOptions {
    double grids = 1, sigma_c = 1, m = 1, r = 1, epsilon = 1, total = 1, sigma_f = 1;
};

int cmd_thm_bound(const BoundOptions& b) {
    const auto bound = evalbench::thm1_sample_bound(b.grids, b.sigma_c, b.m, b.r, b.epsilon, b.total, b.sigma_f);
    std::cout << (bound ? format_number(*bound) : std::string("undefined")) << '\n';
    return kExitOk;
}

struct DriftOptions {
    std::string sigmas = "0,0.01,0.02";
    std::string seeds = "0,1,2";
};

int cmd_thm_drift(const Common& common, const GenOptions& gen, const HyperOptions& hopt, const DriftOptions& opt) {
    const auto sigmas = parse_list(opt.sigmas, "--sigmas");
    const auto seeds = parse_seeds(opt.seeds);
    const auto table = evalbench::thm1_drift_experiment(gen.resolve(0), sigmas, seeds, hopt.resolve(common.seed));
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : table) {
        rows.push_back({format_number(r.sigma), std::to_string(r.seed), format_number(r.solarboost_rmse),
                        format_number(r.average_grid_rmse), format_number(r.gap)});
        std::cout << "sigma=" << format_number(r.sigma) << " seed=" << r.seed << " gap " << format_number(r.gap) << '\n';
    }
    const fs::path out = prepare_out(common.out);
    io::write_csv(out / "thm1_drift.csv", {"sigma", "seed", "solarboost_rmse", "average_grid_rmse", "gap"}, rows);
    return kExitOk;
}

struct VarianceOptions {
    std::string noise = "0,0.1,0.3";
    std::string spreads = "0.1,0.5,1";
    std::string seeds = "0,1,2";
};

int cmd_thm_variance(const Common& common, const GenOptions& gen, const VarianceOptions& opt) {
    const auto noise = parse_list(opt.noise, "--noise");
    const auto spreads = parse_list(opt.spreads, "--spreads");
    const auto seeds = parse_seeds(opt.seeds);
    const auto table = evalbench::thm2_variance_experiment(gen.resolve(0), noise, spreads, seeds);
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : table) {
        rows.push_back({format_number(r.spread), format_number(r.noise), std::to_string(r.seed),
                        format_number(r.clean_rmse), format_number(r.noisy_rmse), format_number(r.inflation)});
    }
    const fs::path out = prepare_out(common.out);
    io::write_csv(out / "thm2_variance.csv", {"spread", "noise", "seed", "clean_rmse", "noisy_rmse", "inflation"}, rows);
    std::cout << "wrote " << rows.size() << " rows\n";
    return kExitOk;
}

// Config values become leading "--key value" arguments so that explicit
// flags, which come later, win under the take-last policy.
std::vector<std::string> with_config(CLI::App& root, std::vector<std::string> args) {
    if (args.empty()) return args;
    const std::string name = args.front();
    CLI::App* sub = nullptr;
    for (CLI::App* candidate : root.get_subcommands({})) {
        if (candidate->check_name(name)) sub = candidate;
    }
    if (!sub) return args;
    std::size_t depth = 1;
    if (args.size() > 1) {
        for (CLI::App* nested : sub->get_subcommands({})) {
            if (nested->check_name(args[1])) {
                sub = nested;
                depth = 2;
            }
        }
    }
    std::optional<std::string> path;
    for (std::size_t k = depth; k < args.size(); ++k) {
        if (args[k] == "--config" && k + 1 < args.size()) path = args[k + 1];
        if (args[k].rfind("--config=", 0) == 0) path = args[k].substr(9);
    }
    if (!path) return args;
    std::vector<std::string> injected;
    for (const auto& [key, value] : io::read_config(*path)) {
        if (key == "config") throw ValidationError("config files cannot include other config files");
        if (sub->get_option_no_throw("--" + key) == nullptr) {
            throw ValidationError(*path + ": unknown key '" + key + "' for '" + sub->get_name() + "'");
        }
        injected.push_back("--" + key);
        injected.push_back(value);
    }
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(depth), injected.begin(), injected.end());
    return args;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grid-level solar output forecasting with latent capacities"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    Common common;
    GenOptions gen;
    HyperOptions hopt;
    TrainOptions topt;
    EvalOptions eopt;
    SweepOptions sopt;
    BoundOptions bopt;
    DriftOptions dopt;
    VarianceOptions vopt;
    std::function<int()> run;

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    common.attach(synth);
    gen.attach(synth);
    synth->callback([&] { run = [&] { return cmd_synth(common, gen); }; });

    CLI::App* train_cmd = app.add_subcommand("train", "train SolarBoost or a baseline");
    common.attach(train_cmd);
    hopt.attach(train_cmd);
    train_cmd->add_option("--data", topt.data, "dataset directory")->required();
    train_cmd->add_option("--method", topt.method, "solarboost, average_grid, flatten_grid or ideal_fit")
        ->capture_default_str();
    train_cmd->add_option("--target", topt.target, "baseline target: raw or per_unit");
    train_cmd->add_option("--train-len", topt.train_len, "train on the first N steps (0 = all)")->capture_default_str();
    train_cmd->callback([&] { run = [&] { return cmd_train(common, hopt, topt); }; });

    const auto attach_eval = [&](CLI::App* sub) {
        common.attach(sub);
        sub->add_option("--data", eopt.data, "dataset directory")->required();
        sub->add_option("--model", eopt.model, "model.json")->required();
        sub->add_option("--test-start", eopt.test_start, "first step of the evaluation window")->capture_default_str();
    };
    CLI::App* predict_cmd = app.add_subcommand("predict", "write aggregate predictions");
    attach_eval(predict_cmd);
    predict_cmd->callback([&] { run = [&] { return cmd_predict(common, eopt); }; });

    CLI::App* eval_cmd = app.add_subcommand("eval", "write metrics.csv for a model on a dataset");
    attach_eval(eval_cmd);
    eval_cmd->add_option("--unit-grid", eopt.unit_grid, "grid scored for unit output")->capture_default_str();
    eval_cmd->callback([&] { run = [&] { return cmd_eval(common, eopt); }; });

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "RMSE over lambda or grid count");
    common.attach(sweep_cmd);
    gen.attach(sweep_cmd);
    hopt.attach(sweep_cmd);
    sweep_cmd->add_option("--data", sopt.data, "dataset directory (default: generate one)");
    sweep_cmd->add_option("--param", sopt.param, "lambda or grid_count")->capture_default_str();
    sweep_cmd->add_option("--values", sopt.values, "comma-separated values")->capture_default_str();
    sweep_cmd->callback([&] { run = [&] { return cmd_sweep(common, gen, hopt, sopt); }; });

    CLI::App* thm = app.add_subcommand("thm", "grid-level modeling experiments");
    thm->require_subcommand(1);
    CLI::App* bound = thm->add_subcommand("bound", "sample-size bound for grid-level modeling");
    bound->add_option("--K", bopt.grids)->capture_default_str();
    bound->add_option("--sigma-c", bopt.sigma_c)->capture_default_str();
    bound->add_option("--M", bopt.m)->capture_default_str();
    bound->add_option("--r", bopt.r)->capture_default_str();
    bound->add_option("--epsilon", bopt.epsilon)->capture_default_str();
    bound->add_option("--C", bopt.total)->capture_default_str();
    bound->add_option("--sigma-f", bopt.sigma_f)->capture_default_str();
    bound->add_option("--config", common.config, "key=value configuration file");
    bound->callback([&] { run = [&] { return cmd_thm_bound(bopt); }; });

    CLI::App* drift = thm->add_subcommand("drift", "RMSE gap versus capacity drift");
    common.attach(drift);
    gen.attach(drift);
    hopt.attach(drift);
    drift->add_option("--sigmas", dopt.sigmas, "comma-separated sigma values")->capture_default_str();
    drift->add_option("--seeds", dopt.seeds, "comma-separated seeds")->capture_default_str();
    drift->callback([&] { run = [&] { return cmd_thm_drift(common, gen, hopt, dopt); }; });

    CLI::App* variance = thm->add_subcommand("variance", "RMSE inflation versus input spread");
    common.attach(variance);
    gen.attach(variance);
    variance->add_option("--noise", vopt.noise, "comma-separated capacity noise levels")->capture_default_str();
    variance->add_option("--spreads", vopt.spreads, "comma-separated input spreads")->capture_default_str();
    variance->add_option("--seeds", vopt.seeds, "comma-separated seeds")->capture_default_str();
    variance->callback([&] { run = [&] { return cmd_thm_variance(common, gen, vopt); }; });

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = with_config(app, std::move(args));
        std::reverse(args.begin(), args.end());
        app.parse(args);
        return run ? run() : kExitOk;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalid;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    }
}
