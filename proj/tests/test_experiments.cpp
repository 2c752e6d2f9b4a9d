#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "gmclab/config.hpp"
#include "gmclab/error.hpp"
#include "gmclab/experiments.hpp"

using namespace gmclab;
namespace fs = std::filesystem;

namespace {

Config parse(const std::string& text) {
  std::istringstream in(text);
  return Config::parse(in, "test");
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("gmclab_test_" + name + "_" + std::to_string(std::random_device{}()));
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("config parses values, comments and lists") {
  const auto c = parse("# header\nexperiment = walk_lemma\n\n  ps = 1, 2 ,4  # trailing\nflag = true\nn = -3\n");
  CHECK(c.require_string("experiment") == "walk_lemma");
  CHECK(c.get_double_list("ps", {}) == std::vector<double>{1, 2, 4});
  CHECK(c.get_bool("flag", false));
  CHECK(c.get_int("n", 0) == -3);
  CHECK(c.get_double("missing", 2.5) == 2.5);
  c.require_all_used();
}

TEST_CASE("config round-trips through its text form") {
  const auto c = parse("experiment = meander_tables\nsplit_table_Cs = 1, 2, 3\nmgf_step = 0.25\n");
  const auto again = parse(c.to_text());
  CHECK(again == c);
  CHECK(again.to_text() == c.to_text());
}

TEST_CASE("config errors name the offending key or line") {
  CHECK_THROWS_WITH_AS(parse("a = 1\nbroken line\n"), doctest::Contains("2"), ConfigError);
  CHECK_THROWS_AS(parse("a = 1\na = 2\n"), ConfigError);
  const auto c = parse("m = sixty\nk = 1.5\nextra = 1\n");
  CHECK_THROWS_WITH_AS(c.get_int("m", 0), doctest::Contains("m"), ConfigError);
  CHECK_THROWS_AS(c.get_int("k", 0), ConfigError);
  CHECK_THROWS_WITH_AS(c.require_all_used(), doctest::Contains("extra"), ConfigError);
  CHECK_THROWS_AS(c.require_string("absent"), ConfigError);
}

TEST_CASE("experiment ids round-trip") {
  CHECK(all_experiments().size() == 8);
  for (auto id : all_experiments()) CHECK(parse_experiment_id(to_string(id)) == id);
  CHECK_THROWS_AS(parse_experiment_id("nope"), ConfigError);
}

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("invalid gamma is rejected before anything is written") {
  const auto out = scratch("bad_gamma");
  auto c = parse("experiment = gff_expectations\ngammas = 0.5, 2.5\nm = 16\neps_cells = 2\nreplicas = 4\n");
  RunOptions o;
  o.out = out;
  CHECK_THROWS_WITH_AS(run_experiment(c, o), doctest::Contains("2.5"), ConfigError);
  CHECK_FALSE(fs::exists(out));
  CHECK_THROWS_AS(run_experiment(parse("experiment = walk_lemma\nbogus = 1\n"), o), ConfigError);
  CHECK_THROWS_AS(run_experiment(parse("experiment = rooted_equivalence\nm = 64\n"), o), ConfigError);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("run writes JSON and CSVs that round-trip and reproduce") {
  const auto out = scratch("walk");
  const auto c = parse("experiment = walk_lemma\nseed = 5\nns = 4, 6, 8, 10\n");
  RunOptions o;
  o.out = out;
  const auto r = run_experiment(c, o);
  CHECK_FALSE(r.failed);
  CHECK(r.acceptance_passed());
  REQUIRE(r.csv_digests.count("walk_lemma_grid.csv") == 1);
  std::ifstream csv(out / "walk_lemma_grid.csv", std::ios::binary);
  const std::string body((std::istreambuf_iterator<char>(csv)), std::istreambuf_iterator<char>());
  CHECK(fnv1a_hex(body) == r.csv_digests.at("walk_lemma_grid.csv"));
  CHECK(body.rfind("n,p,a,law_id,lhs,ratio,method,stderr\n", 0) == 0);

  std::ifstream js(out / "walk_lemma.json");
  const auto j = nlohmann::ordered_json::parse(js);
  CHECK(j.at("schema_version") == 1);
  const auto back = result_from_json(j);
  CHECK(back.experiment == r.experiment);
  CHECK(back.config == c);
  CHECK(back.rows.size() == r.rows.size());
  CHECK(back.rows[0].name == r.rows[0].name);
  CHECK(back.rows[0].estimate == r.rows[0].estimate);
  CHECK(back.csv_digests == r.csv_digests);
  CHECK(to_json(back).dump() == to_json(r).dump());

  o.workers = 2;
  o.out = out / "again";
  const auto r2 = run_experiment(c, o);
  CHECK(r2.csv_digests == r.csv_digests);
  fs::remove_all(out);
}

TEST_CASE("cascade pairs beyond the depth are rejected up front") {
  const auto out = scratch("rejected");
  const auto c = parse(
      "experiment = cascade_theorem1\ndepth = 30\ntrees = 4\nCs = 1, 4\ngammas = 1.5, 1.9\n"
      "martingale_trees = 10\nmartingale_depth = 3\nspine_draws = 100\ntilt_draws = 100\n");
  RunOptions o;
  o.out = out;
  const auto r = run_experiment(c, o);
  CHECK_FALSE(r.failed);
  // (1, 1.9) -> 100, (4, 1.5) -> 64, (4, 1.9) -> 1600 all exceed depth 30.
  CHECK(r.rejected.size() == 3);
  CHECK(r.find("ratio_median C=1 gamma=1.5") != nullptr);
  CHECK(r.find("ratio_sanity C=4 gamma=0") != nullptr);
  CHECK(r.find("ratio_band C=2 gamma=1.9") == nullptr);
  fs::remove_all(out);
}

TEST_CASE("summarize aggregates acceptance rows") {
  const auto dir = scratch("summary");
  CHECK_THROWS_AS(summarize_runs(dir), Error);
  fs::create_directories(dir);
  CHECK_THROWS_AS(summarize_runs(dir), Error);

  RunOptions o;
  o.out = dir / "walk";
  run_experiment(parse("experiment = walk_lemma\nns = 4, 6, 8, 10\n"), o);
  const auto ok = summarize_runs(dir);
  CHECK(ok.runs == 1);
  CHECK(ok.acceptance_rows == 2);
  CHECK(ok.all_passed());

  // A run whose acceptance row fails: the split at small C is far from its asymptote.
  o.out = dir / "meander";
  run_experiment(parse("experiment = meander_tables\nsplit_C = 2\n"), o);
  const auto bad = summarize_runs(dir);
  CHECK(bad.runs == 2);
  CHECK_FALSE(bad.all_passed());
  REQUIRE(bad.failing.size() == 2);
  CHECK(bad.failing[0] == "meander_tables: split_lower C=2");
  CHECK(bad.text.find("FAIL split_upper C=2") != std::string::npos);
  CHECK(bad.digest.at("all_passed") == false);
  fs::remove_all(dir);
}

TEST_CASE("small pipelines are reproducible across worker counts") {
  const auto out = scratch("repro");
  const std::vector<std::string> cfgs = {
      "experiment = gff_expectations\nm = 16\neps_cells = 2\nreplicas = 6\n",
      "experiment = gff_theorem1\nm = 16\neps_cells = 2\nreplicas = 6\n",
      "experiment = rooted_equivalence\nm = 16\neps_cells = 2\nreplicas = 30\ngammas = 1\n",
      "experiment = moment_bounds\nm = 16\neps_cells = 2\nreplicas = 30\ngammas = 1.5\n",
      "experiment = cascade_sh\ndepth = 20\ntrees = 3\nsign_depths = 10, 20\n",
  };
  for (const auto& text : cfgs) {
    const auto c = parse(text);
    RunOptions a, b;
    a.out = out / "a";
    b.out = out / "b";
    a.workers = 1;
    b.workers = 3;
    const auto ra = run_experiment(c, a);
    const auto rb = run_experiment(c, b);
    INFO(ra.experiment, " ", ra.error);
    CHECK_FALSE(ra.failed);
    CHECK_FALSE(ra.csv_digests.empty());
    CHECK(ra.csv_digests == rb.csv_digests);
  }
  fs::remove_all(out);
}
