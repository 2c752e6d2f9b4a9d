#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gmclab/config.hpp"

namespace gmclab {

enum class ExperimentId {
  gff_expectations,
  gff_theorem1,
  cascade_theorem1,
  cascade_sh,
  rooted_equivalence,
  moment_bounds,
  walk_lemma,
  meander_tables,
};

std::string to_string(ExperimentId id);
ExperimentId parse_experiment_id(const std::string& s);  // ConfigError on unknown ids
const std::vector<ExperimentId>& all_experiments();

// One recorded statistic. Acceptance rows carry a verdict against a pinned
// threshold; the others are informational.
struct StatRow {
  std::string name;
  double estimate = 0.0;
  double dispersion = 0.0;  // standard error, IQR or test statistic, see detail
  std::uint64_t n = 0;
  std::uint64_t excluded = 0;
  std::string threshold;  // the criterion in words
  bool pass = true;
  bool acceptance = false;
  std::string detail;
};

struct RunResult {
  static constexpr int kSchemaVersion = 1;
  int schema_version = kSchemaVersion;
  std::string experiment;
  std::uint64_t seed = 0;
  int workers = 1;
  Config config;
  std::vector<StatRow> rows;
  std::vector<std::string> rejected;  // parameter sets refused before running
  std::map<std::string, std::string> csv_digests;  // file name -> FNV-1a 64 hex
  nlohmann::ordered_json tables = nlohmann::ordered_json::object();
  double wall_clock_seconds = 0.0;
  bool failed = false;
  std::string error;

  bool acceptance_passed() const;
  const StatRow* find(const std::string& name) const;
};

nlohmann::ordered_json to_json(const RunResult& r);
RunResult result_from_json(const nlohmann::ordered_json& j);

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<int> workers;
};

// Parses the common keys (experiment, seed, workers, output_dir), runs the
// pipeline, writes <out>/<experiment>.json and <out>/<experiment>_<table>.csv.
// ConfigError for invalid configurations (nothing is written). Other errors
// during the run are recorded in the result (failed = true) with the CSVs
// written so far.
RunResult run_experiment(const Config& config, const RunOptions& options = {});

std::string fnv1a_hex(std::string_view bytes);

struct RunSummary {
  std::size_t runs = 0;
  std::size_t acceptance_rows = 0;
  std::vector<std::string> failing;  // "<experiment>: <row>"
  std::vector<std::string> failed_runs;
  nlohmann::ordered_json digest;
  std::string text;
  bool all_passed() const { return failing.empty() && failed_runs.empty(); }
};

// Reads every *.json run result under dir (recursively). Error if none.
RunSummary summarize_runs(const std::filesystem::path& dir);

}  // namespace gmclab
