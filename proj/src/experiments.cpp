#include "gmclab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "gmclab/error.hpp"
#include "pipelines.hpp"

namespace gmclab {

namespace {

struct Entry {
  ExperimentId id;
  const char* name;
  void (*run)(const Config&, detail::Context&);
};

const Entry kEntries[] = {
    {ExperimentId::gff_expectations, "gff_expectations", detail::run_gff_expectations},
    {ExperimentId::gff_theorem1, "gff_theorem1", detail::run_gff_theorem1},
    {ExperimentId::cascade_theorem1, "cascade_theorem1", detail::run_cascade_theorem1},
    {ExperimentId::cascade_sh, "cascade_sh", detail::run_cascade_sh},
    {ExperimentId::rooted_equivalence, "rooted_equivalence", detail::run_rooted_equivalence},
    {ExperimentId::moment_bounds, "moment_bounds", detail::run_moment_bounds},
    {ExperimentId::walk_lemma, "walk_lemma", detail::run_walk_lemma},
    {ExperimentId::meander_tables, "meander_tables", detail::run_meander_tables},
};

const Entry& entry(ExperimentId id) {
  for (const auto& e : kEntries) {
    if (e.id == id) return e;
  }
  throw InvalidArgument("unknown experiment id");
}

nlohmann::ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

double number_from(const nlohmann::ordered_json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

std::string to_string(ExperimentId id) { return entry(id).name; }

ExperimentId parse_experiment_id(const std::string& s) {
  for (const auto& e : kEntries) {
    if (s == e.name) return e.id;
  }
  throw ConfigError("unknown experiment '" + s + "'");
}

const std::vector<ExperimentId>& all_experiments() {
  static const std::vector<ExperimentId> ids = [] {
    std::vector<ExperimentId> v;
    for (const auto& e : kEntries) v.push_back(e.id);
    return v;
  }();
  return ids;
}

bool RunResult::acceptance_passed() const {
  if (failed) return false;
  return std::all_of(rows.begin(), rows.end(), [](const StatRow& r) { return !r.acceptance || r.pass; });
}

const StatRow* RunResult::find(const std::string& name) const {
  for (const auto& r : rows) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

nlohmann::ordered_json to_json(const RunResult& r) {
  nlohmann::ordered_json j;
  j["schema_version"] = r.schema_version;
  j["experiment"] = r.experiment;
  j["seed"] = r.seed;
  j["workers"] = r.workers;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.config.entries()) cfg[k] = v;
  j["config"] = cfg;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& s : r.rows) {
    rows.push_back({{"name", s.name},
                    {"estimate", number(s.estimate)},
                    {"dispersion", number(s.dispersion)},
                    {"n", s.n},
                    {"excluded", s.excluded},
                    {"threshold", s.threshold},
                    {"pass", s.pass},
                    {"acceptance", s.acceptance},
                    {"detail", s.detail}});
  }
  j["rows"] = rows;
  j["rejected"] = r.rejected;
  j["csv_digests"] = r.csv_digests;
  j["tables"] = r.tables;
  j["wall_clock_seconds"] = r.wall_clock_seconds;
  j["failed"] = r.failed;
  j["error"] = r.error;
  return j;
}

RunResult result_from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object() || !j.contains("schema_version")) throw Error("run result lacks schema_version");
  RunResult r;
  r.schema_version = j.at("schema_version").get<int>();
  if (r.schema_version != RunResult::kSchemaVersion) {
    throw Error("unsupported run result schema_version " + std::to_string(r.schema_version));
  }
  r.experiment = j.at("experiment").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.workers = j.at("workers").get<int>();
  for (const auto& [k, v] : j.at("config").items()) r.config.set(k, v.get<std::string>());
  for (const auto& s : j.at("rows")) {
    StatRow row;
    row.name = s.at("name").get<std::string>();
    row.estimate = number_from(s.at("estimate"));
    row.dispersion = number_from(s.at("dispersion"));
    row.n = s.at("n").get<std::uint64_t>();
    row.excluded = s.at("excluded").get<std::uint64_t>();
    row.threshold = s.at("threshold").get<std::string>();
    row.pass = s.at("pass").get<bool>();
    row.acceptance = s.at("acceptance").get<bool>();
    row.detail = s.at("detail").get<std::string>();
    r.rows.push_back(row);
  }
  r.rejected = j.at("rejected").get<std::vector<std::string>>();
  r.csv_digests = j.at("csv_digests").get<std::map<std::string, std::string>>();
  r.tables = j.at("tables");
  r.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
  r.failed = j.at("failed").get<bool>();
  r.error = j.at("error").get<std::string>();
  return r;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

void Context::write_csv(const std::string& table, const std::string& content) {
  const std::string name = result->experiment + "_" + table + ".csv";
  std::filesystem::create_directories(out);
  std::ofstream f(out / name, std::ios::binary);
  if (!f) throw Error("cannot write " + (out / name).string());
  f << content;
  result->csv_digests[name] = fnv1a_hex(content);
}

void Context::add(StatRow row) { result->rows.push_back(std::move(row)); }

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

StatRow info_row(std::string name, double estimate, double dispersion, std::uint64_t n, std::string detail) {
  StatRow r;
  r.name = std::move(name);
  r.estimate = estimate;
  r.dispersion = dispersion;
  r.n = n;
  r.detail = std::move(detail);
  return r;
}

StatRow acceptance_row(std::string name, double estimate, double dispersion, std::uint64_t n, std::string threshold,
                       bool pass, std::string detail) {
  StatRow r = info_row(std::move(name), estimate, dispersion, n, std::move(detail));
  r.threshold = std::move(threshold);
  r.pass = pass;
  r.acceptance = true;
  return r;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace detail

RunResult run_experiment(const Config& config, const RunOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult result;
  result.config = config;
  const ExperimentId id = parse_experiment_id(config.require_string("experiment"));
  result.experiment = to_string(id);
  // The common keys are always read so that they count as used.
  const std::uint64_t cfg_seed = config.get_uint("seed", 1);
  const std::int64_t cfg_workers = config.get_int("workers", 1);
  const std::string cfg_out = config.get_string("output_dir", "runs/" + result.experiment);
  result.seed = options.seed ? *options.seed : cfg_seed;
  const std::int64_t workers = options.workers ? *options.workers : cfg_workers;
  if (workers < 1 || workers > 1024) throw ConfigError("workers must lie in [1, 1024]");
  result.workers = static_cast<int>(workers);
  const std::filesystem::path out = options.out ? *options.out : std::filesystem::path(cfg_out);

  detail::Context ctx;
  ctx.seed = result.seed;
  ctx.workers = result.workers;
  ctx.out = out;
  ctx.result = &result;

  try {
    entry(id).run(config, ctx);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    result.failed = true;
    result.error = e.what();
  }
  result.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::filesystem::create_directories(out);
  std::ofstream f(out / (result.experiment + ".json"));
  if (!f) throw Error("cannot write run result to " + out.string());
  f << to_json(result).dump(2) << "\n";
  return result;
}

RunSummary summarize_runs(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  RunSummary s;
  s.digest = nlohmann::ordered_json::object();
  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  std::ostringstream text;
  for (const auto& p : files) {
    std::ifstream in(p);
    nlohmann::ordered_json j;
    try {
      j = nlohmann::ordered_json::parse(in);
    } catch (const std::exception&) {
      continue;  // not a run result
    }
    if (!j.is_object() || !j.contains("schema_version")) continue;
    const RunResult r = result_from_json(j);
    ++s.runs;
    nlohmann::ordered_json rj;
    rj["experiment"] = r.experiment;
    rj["file"] = std::filesystem::relative(p, dir).string();
    rj["seed"] = r.seed;
    rj["failed"] = r.failed;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    text << r.experiment << " (" << rj["file"].get<std::string>() << ")" << (r.failed ? " FAILED: " + r.error : "")
         << "\n";
    if (r.failed) s.failed_runs.push_back(r.experiment + ": " + r.error);
    for (const auto& row : r.rows) {
      if (!row.acceptance) continue;
      ++s.acceptance_rows;
      if (!row.pass) s.failing.push_back(r.experiment + ": " + row.name);
      text << "  " << (row.pass ? "PASS " : "FAIL ") << row.name << "  estimate=" << row.estimate << "  ["
           << row.threshold << "]\n";
      rows.push_back({{"name", row.name}, {"pass", row.pass}, {"estimate", number(row.estimate)}});
    }
    rj["acceptance"] = rows;
    runs.push_back(rj);
  }
  if (s.runs == 0) throw Error("no run results found under " + dir.string());
  text << s.runs << " run(s), " << s.acceptance_rows << " acceptance row(s), " << s.failing.size() << " failing\n";
  for (const auto& f : s.failing) text << "failing: " << f << "\n";
  s.digest["runs"] = runs;
  s.digest["acceptance_rows"] = s.acceptance_rows;
  s.digest["failing"] = s.failing;
  s.digest["all_passed"] = s.all_passed();
  s.text = text.str();
  return s;
}

}  // namespace gmclab
