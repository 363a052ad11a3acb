#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "solarboost/baselines.hpp"
#include "solarboost/core_model.hpp"
#include "solarboost/solver.hpp"
#include "solarboost/synthgen.hpp"

namespace solarboost::io {

namespace fs = std::filesystem;
using Json = nlohmann::json;

inline constexpr int kModelSchemaVersion = 1;

/// Shortest-exact "%.17g" rendering used in every CSV file.
std::string format_number(double v);

/// Strict decimal parse; throws ValidationError naming `what` on failure.
double parse_number(const std::string& text, const std::string& what);

/**
 * Dataset directory layout:
 *   features.csv    t,i,d0..d{D-1}   one row per (t, i), t-major
 *   outputs.csv     t,Y,C_total
 *   capacities.csv  t,c0..c{K-1}     only when truth capacities are known
 *   manifest.json   dimensions, generator and its settings
 * When the manifest names the synthetic unit response, unit-output truth is
 * recomputed from the features on load.
 */
void write_dataset(const fs::path& dir, const Dataset& ds, const Json& manifest);
Dataset read_dataset(const fs::path& dir);

/// Manifest for a generated dataset (generator name and version, spec, seed).
Json synth_manifest(const synthgen::GenSpec& spec, const Dataset& ds);

Json to_json(const HyperParams& h);
HyperParams hyper_from_json(const Json& j);
Json to_json(const synthgen::GenSpec& spec);

using AnyModel = std::variant<SolarBoostModel, baselines::BaselineModel>;

/// "solarboost" or the baseline kind.
std::string model_kind(const AnyModel& model);

Json model_to_json(const AnyModel& model);
AnyModel model_from_json(const Json& j);

void save_model(const fs::path& path, const AnyModel& model);
AnyModel load_model(const fs::path& path);

void write_json(const fs::path& path, const Json& j);
Json read_json(const fs::path& path);

/// Writes header plus rows; cells already formatted.
void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// Header and rows of a CSV file with a mandatory header line.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};
CsvTable read_csv(const fs::path& path);

/// key=value lines, '#' starts a comment, blank lines ignored. Duplicate keys are errors.
std::map<std::string, std::string> parse_config(const std::string& text, const std::string& origin);
std::map<std::string, std::string> read_config(const fs::path& path);

}  // namespace solarboost::io
