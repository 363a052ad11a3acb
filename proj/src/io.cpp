#include "solarboost/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace solarboost::io {

std::string format_number(double v) {
    char buf[40];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    return {buf, static_cast<std::size_t>(n)};
}

double parse_number(const std::string& text, const std::string& what) {
    double v = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    if (begin != end && *begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || begin == end) {
        throw ValidationError(what + ": cannot parse '" + text + "' as a number");
    }
    return v;
}

namespace {

std::size_t parse_index(const std::string& text, const std::string& what) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        throw ValidationError(what + ": cannot parse '" + text + "' as an index");
    }
    return v;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        cells.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return cells;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

void close_out(std::ofstream& out, const fs::path& path) {
    out.close();
    if (!out) throw IoError("failed writing " + path.string());
}

std::string where(const fs::path& path, std::size_t line) { return path.filename().string() + " line " + std::to_string(line); }

void expect_header(const CsvTable& table, const std::vector<std::string>& expected, const fs::path& path) {
    if (table.header != expected) {
        std::string want;
        for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
        throw ValidationError(path.filename().string() + ": header must be " + want);
    }
}

std::vector<std::string> numbered(const std::string& prefix, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t k = 0; k < n; ++k) out.push_back(prefix + std::to_string(k));
    return out;
}

constexpr const char* kUnitResponseName = "sin(x0)+x1+x2^2";

}  // namespace

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out = open_out(path);
    for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << row[k];
        out << '\n';
    }
    close_out(out, path);
}

CsvTable read_csv(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw ValidationError(path.filename().string() + ": missing header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    table.header = split_line(line);
    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (cells.size() != table.header.size()) {
            throw ValidationError(where(path, number) + ": expected " + std::to_string(table.header.size()) +
                                  " columns, found " + std::to_string(cells.size()));
        }
        table.rows.push_back(std::move(cells));
    }
    if (in.bad()) throw IoError("failed reading " + path.string());
    return table;
}

void write_json(const fs::path& path, const Json& j) {
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
    close_out(out, path);
}

Json read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ValidationError(path.filename().string() + ": " + e.what());
    }
}

void write_dataset(const fs::path& dir, const Dataset& ds, const Json& manifest) {
    ds.validate();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
    const std::size_t T = ds.steps(), K = ds.grids(), D = ds.dims();

    {
        const fs::path path = dir / "features.csv";
        std::ofstream out = open_out(path);
        out << "t,i";
        for (std::size_t d = 0; d < D; ++d) out << ",d" << d;
        out << '\n';
        for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t i = 0; i < K; ++i) {
                out << t << ',' << i;
                for (double v : ds.features.cell(t, i)) out << ',' << format_number(v);
                out << '\n';
            }
        }
        close_out(out, path);
    }
    {
        const fs::path path = dir / "outputs.csv";
        std::ofstream out = open_out(path);
        out << "t,Y,C_total\n";
        for (std::size_t t = 0; t < T; ++t) {
            out << t << ',' << format_number(ds.outputs[t]) << ',' << format_number(ds.totals[t]) << '\n';
        }
        close_out(out, path);
    }
    const fs::path caps_path = dir / "capacities.csv";
    if (ds.truth_capacities) {
        std::ofstream out = open_out(caps_path);
        out << 't';
        for (std::size_t i = 0; i < K; ++i) out << ",c" << i;
        out << '\n';
        for (std::size_t t = 0; t < T; ++t) {
            out << t;
            for (double c : ds.truth_capacities->row(t)) out << ',' << format_number(c);
            out << '\n';
        }
        close_out(out, caps_path);
    } else {
        fs::remove(caps_path, ec);
    }

    Json m = manifest;
    m["steps"] = T;
    m["grids"] = K;
    m["dims"] = D;
    m["has_capacities"] = ds.truth_capacities.has_value();
    write_json(dir / "manifest.json", m);
}

Dataset read_dataset(const fs::path& dir) {
    const fs::path manifest_path = dir / "manifest.json";
    if (!fs::exists(manifest_path)) throw IoError("missing " + manifest_path.string());
    const Json manifest = read_json(manifest_path);
    std::size_t T = 0, K = 0, D = 0;
    try {
        T = manifest.at("steps").get<std::size_t>();
        K = manifest.at("grids").get<std::size_t>();
        D = manifest.at("dims").get<std::size_t>();
    } catch (const Json::exception& e) {
        throw ValidationError("manifest.json: " + std::string(e.what()));
    }
    if (T == 0 || K == 0 || D == 0) throw ValidationError("manifest.json: dimensions must be positive");

    Dataset ds;
    {
        const fs::path path = dir / "features.csv";
        const CsvTable table = read_csv(path);
        std::vector<std::string> header{"t", "i"};
        for (auto& h : numbered("d", D)) header.push_back(h);
        expect_header(table, header, path);
        if (table.rows.size() != T * K) {
            throw ValidationError("features.csv: expected " + std::to_string(T * K) + " rows, found " +
                                  std::to_string(table.rows.size()));
        }
        std::vector<double> values(T * K * D);
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            const auto& row = table.rows[r];
            const std::string at = where(path, r + 2);
            if (parse_index(row[0], at + " column t") != r / K || parse_index(row[1], at + " column i") != r % K) {
                throw ValidationError(at + ": rows must be ordered by t then i");
            }
            for (std::size_t d = 0; d < D; ++d) values[r * D + d] = parse_number(row[2 + d], at + " column d" + std::to_string(d));
        }
        ds.features = GridFeatureTensor(T, K, D, std::move(values));
    }
    {
        const fs::path path = dir / "outputs.csv";
        const CsvTable table = read_csv(path);
        expect_header(table, {"t", "Y", "C_total"}, path);
        if (table.rows.size() != T) {
            throw ValidationError("outputs.csv: expected " + std::to_string(T) + " rows, found " +
                                  std::to_string(table.rows.size()));
        }
        for (std::size_t t = 0; t < T; ++t) {
            const std::string at = where(path, t + 2);
            if (parse_index(table.rows[t][0], at + " column t") != t) throw ValidationError(at + ": rows must be ordered by t");
            ds.outputs.push_back(parse_number(table.rows[t][1], at + " column Y"));
            ds.totals.push_back(parse_number(table.rows[t][2], at + " column C_total"));
        }
    }
    const fs::path caps_path = dir / "capacities.csv";
    if (fs::exists(caps_path)) {
        const CsvTable table = read_csv(caps_path);
        std::vector<std::string> header{"t"};
        for (auto& h : numbered("c", K)) header.push_back(h);
        expect_header(table, header, caps_path);
        if (table.rows.size() != T) throw ValidationError("capacities.csv: expected " + std::to_string(T) + " rows");
        std::vector<double> values(T * K);
        for (std::size_t t = 0; t < T; ++t) {
            const std::string at = where(caps_path, t + 2);
            if (parse_index(table.rows[t][0], at + " column t") != t) throw ValidationError(at + ": rows must be ordered by t");
            for (std::size_t i = 0; i < K; ++i) values[t * K + i] = parse_number(table.rows[t][1 + i], at + " column c" + std::to_string(i));
        }
        ds.truth_capacities = CapacityMatrix(T, K, std::move(values), ds.totals);
    }
    if (manifest.value("unit_response", std::string()) == kUnitResponseName && D >= 3) {
        std::vector<double> unit(T * K);
        for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t i = 0; i < K; ++i) unit[t * K + i] = synthgen::unit_response(ds.features.cell(t, i).first(3));
        }
        ds.truth_unit = std::move(unit);
    }
    ds.validate();
    return ds;
}

Json to_json(const synthgen::GenSpec& spec) {
    return {{"t_blocks", spec.t_blocks},
            {"repeat", spec.repeat},
            {"grids", spec.grids},
            {"dims", spec.dims},
            {"sigma", spec.sigma},
            {"process", synthgen::to_string(spec.process)},
            {"seed", spec.seed},
            {"initial", spec.initial == synthgen::InitialCapacity::equal ? "equal" : "uniform_random"}};
}

Json synth_manifest(const synthgen::GenSpec& spec, const Dataset& ds) {
    (void)ds;
    return {{"generator", {{"name", synthgen::kGeneratorName}, {"version", synthgen::kGeneratorVersion}}},
            {"spec", to_json(spec)},
            {"seed", spec.seed},
            {"unit_response", kUnitResponseName}};
}

Json to_json(const HyperParams& h) {
    return {{"lambda", h.lambda},
            {"n_rounds", h.n_rounds},
            {"learning_rate", h.learning_rate},
            {"max_depth", h.max_depth},
            {"tree_reg", h.tree_reg},
            {"min_gain", h.min_gain},
            {"grid_count", h.grid_count},
            {"block_len", h.block_len},
            {"pd_floor", h.pd_floor},
            {"seed", h.seed},
            {"capacity_refresh_every", h.capacity_refresh_every},
            {"increment", h.increment == IncrementMode::raw ? "raw" : "scaled"}};
}

HyperParams hyper_from_json(const Json& j) {
    HyperParams h;
    h.lambda = j.at("lambda").get<double>();
    h.n_rounds = j.at("n_rounds").get<std::size_t>();
    h.learning_rate = j.at("learning_rate").get<double>();
    h.max_depth = j.at("max_depth").get<int>();
    h.tree_reg = j.at("tree_reg").get<double>();
    h.min_gain = j.at("min_gain").get<double>();
    h.grid_count = j.at("grid_count").get<std::size_t>();
    h.block_len = j.at("block_len").get<std::size_t>();
    h.pd_floor = j.at("pd_floor").get<double>();
    h.seed = j.at("seed").get<std::uint64_t>();
    h.capacity_refresh_every = j.at("capacity_refresh_every").get<std::size_t>();
    const std::string inc = j.at("increment").get<std::string>();
    if (inc != "raw" && inc != "scaled") throw ValidationError("hyper.increment must be raw or scaled");
    h.increment = inc == "raw" ? IncrementMode::raw : IncrementMode::scaled;
    h.validate();
    return h;
}

namespace {

Json trees_to_json(const gbtree::RegressionTreeEnsemble& ens) {
    Json trees = Json::array();
    for (const auto& tree : ens.trees) {
        Json nodes = Json::array();
        for (const auto& n : tree.nodes()) {
            if (n.is_leaf()) {
                nodes.push_back({{"weight", n.weight}});
            } else {
                nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
            }
        }
        trees.push_back({{"nodes", std::move(nodes)}});
    }
    return trees;
}

gbtree::RegressionTreeEnsemble ensemble_from_json(const Json& j) {
    gbtree::RegressionTreeEnsemble ens;
    ens.learning_rate = j.at("learning_rate").get<double>();
    ens.base_score = j.value("base_score", 0.0);
    for (const Json& tree : j.at("trees")) {
        std::vector<gbtree::TreeNode> nodes;
        for (const Json& n : tree.at("nodes")) {
            gbtree::TreeNode node;
            if (n.contains("weight")) {
                node.weight = n.at("weight").get<double>();
            } else {
                node.feature = n.at("feature").get<int>();
                if (node.feature < 0) throw ValidationError("model.json: split feature must be nonnegative");
                node.threshold = n.at("threshold").get<double>();
                node.left = n.at("left").get<int>();
                node.right = n.at("right").get<int>();
            }
            nodes.push_back(node);
        }
        ens.trees.emplace_back(std::move(nodes));
    }
    return ens;
}

}  // namespace

std::string model_kind(const AnyModel& model) {
    if (const auto* b = std::get_if<baselines::BaselineModel>(&model)) return baselines::to_string(b->kind);
    return "solarboost";
}

Json model_to_json(const AnyModel& model) {
    Json j;
    j["schema_version"] = kModelSchemaVersion;
    j["kind"] = model_kind(model);
    if (const auto* m = std::get_if<SolarBoostModel>(&model)) {
        j["hyper"] = to_json(m->hyper);
        j["feature_dim"] = m->feature_dim;
        j["grid_count"] = m->grid_count;
        j["training_T"] = m->training_steps;
        j["learning_rate"] = m->ensemble.learning_rate;
        j["base_score"] = m->ensemble.base_score;
        j["trees"] = trees_to_json(m->ensemble);
        Json rows = Json::array();
        for (std::size_t t = 0; t < m->capacities.steps(); ++t) {
            const auto row = m->capacities.row(t);
            rows.push_back(std::vector<double>(row.begin(), row.end()));
        }
        const auto totals = m->capacities.totals();
        j["capacities"] = {{"totals", std::vector<double>(totals.begin(), totals.end())}, {"rows", std::move(rows)}};
    } else {
        const auto& b = std::get<baselines::BaselineModel>(model);
        j["target"] = baselines::to_string(b.target);
        j["feature_dim"] = b.feature_dim;
        j["grid_count"] = b.grid_count;
        j["learning_rate"] = b.ensemble.learning_rate;
        j["base_score"] = b.ensemble.base_score;
        j["trees"] = trees_to_json(b.ensemble);
    }
    return j;
}

AnyModel model_from_json(const Json& j) {
    try {
        const int version = j.at("schema_version").get<int>();
        if (version != kModelSchemaVersion) {
            throw ValidationError("model.json: unsupported schema_version " + std::to_string(version));
        }
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "solarboost") {
            SolarBoostModel m;
            m.hyper = hyper_from_json(j.at("hyper"));
            m.feature_dim = j.at("feature_dim").get<std::size_t>();
            m.grid_count = j.at("grid_count").get<std::size_t>();
            m.training_steps = j.at("training_T").get<std::size_t>();
            m.ensemble = ensemble_from_json(j);
            const Json& caps = j.at("capacities");
            std::vector<double> totals = caps.at("totals").get<std::vector<double>>();
            std::vector<double> values;
            for (const Json& row : caps.at("rows")) {
                const auto r = row.get<std::vector<double>>();
                if (r.size() != m.grid_count) throw ValidationError("model.json: capacity row width differs from grid_count");
                values.insert(values.end(), r.begin(), r.end());
            }
            if (totals.size() != m.training_steps) throw ValidationError("model.json: capacity rows differ from training_T");
            m.capacities = CapacityMatrix(m.training_steps, m.grid_count, std::move(values), std::move(totals));
            if (m.ensemble.trees.size() > m.hyper.n_rounds) throw ValidationError("model.json: more trees than n_rounds");
            return m;
        }
        baselines::BaselineModel b;
        b.kind = baselines::parse_kind(kind);
        b.target = baselines::parse_target(j.at("target").get<std::string>());
        b.feature_dim = j.at("feature_dim").get<std::size_t>();
        b.grid_count = j.at("grid_count").get<std::size_t>();
        b.ensemble = ensemble_from_json(j);
        return b;
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("model.json: ") + e.what());
    }
}

void save_model(const fs::path& path, const AnyModel& model) { write_json(path, model_to_json(model)); }

AnyModel load_model(const fs::path& path) { return model_from_json(read_json(path)); }

std::map<std::string, std::string> parse_config(const std::string& text, const std::string& origin) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    std::size_t number = 0;
    const auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError(origin + " line " + std::to_string(number) + ": expected key=value");
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ValidationError(origin + " line " + std::to_string(number) + ": empty key");
        if (!out.emplace(key, trim(line.substr(eq + 1))).second) {
            throw ValidationError(origin + " line " + std::to_string(number) + ": duplicate key '" + key + "'");
        }
    }
    return out;
}

std::map<std::string, std::string> read_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.filename().string());
}

}  // namespace solarboost::io
