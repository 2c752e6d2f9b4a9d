// Runs every experiment config and prints one PASS/FAIL line per acceptance
// criterion. Exit 0 when every criterion passes, or when the only failures
// are criteria named with --expect-fail.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "gmclab/csv.hpp"
#include "gmclab/experiments.hpp"

#ifndef GMCLAB_CONFIG_DIR
#define GMCLAB_CONFIG_DIR "configs"
#endif

namespace {

using gmclab::Config;
using gmclab::RunResult;

struct Part {
  std::string experiment;
  std::string prefix;  // acceptance rows whose name starts with this
};

struct Criterion {
  std::string id;
  std::string text;
  std::vector<Part> parts;
  double target_seconds;
  std::vector<std::string> timers;  // "<experiment>" for the whole run, "<experiment>:<row>" for a timing row
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list = {
      {"expectation_identity", "mean total mass within 4 SE + 5% of pi/(1+gamma^2/2), gamma in {0.5,1,1.5}",
       {{"gff_expectations", "expected_mass gamma="}}, 300, {"gff_expectations"}},
      {"derivative_expectation", "mean derivative mass within 4 SE + 5% of 2 pi/9",
       {{"gff_expectations", "expected_derivative"}}, 300, {"gff_expectations"}},
      {"cascade_martingale", "E M_n^gamma = 1 within 4 SE, gamma in {0.5,1,1.5,2}, n <= 8, 1e4 trees",
       {{"cascade_theorem1", "martingale "}}, 120, {"cascade_theorem1:seconds martingale"}},
      {"spine_walk", "spine step mean 0 (4 SE), variance gamma a (5%), min >= -gamma a, 1e5 draws",
       {{"cascade_theorem1", "spine_"}}, 60, {"cascade_theorem1:seconds spine"}},
      {"walk_lemma", "bound ratio finite, growth < 10% from n=8 to n=12, two laws",
       {{"walk_lemma", "plateau"}}, 120, {"walk_lemma"}},
      {"meander_analytics", "mgf closed form vs quadrature 1e-10 on [0,5]; asymptotic ratio at 5 within 1e-3",
       {{"meander_tables", "mgf_identity"}, {"meander_tables", "asymptotic_ratio"}}, 1, {"meander_tables"}},
      {"rooted_equivalence", "KS p > 0.01 for gamma in {0.5,1,1.5}, m=32, N=5000",
       {{"rooted_equivalence", "ks "}}, 300, {"rooted_equivalence"}},
      {"cascade_ratio", "median r in [0.5,2] at (2,1.9); |median-1| decreases from (1,1.8) to (2,1.9)",
       {{"cascade_theorem1", "ratio_band"}, {"cascade_theorem1", "ratio_trend"}}, 1800,
       {"cascade_theorem1:seconds ensemble"}},
      {"mgf_split_halves", "each half of the split mgf within 5% of half the asymptotic mgf at C=6",
       {{"meander_tables", "split_lower"}, {"meander_tables", "split_upper"}}, 1, {"meander_tables"}},
      {"derivative_sign_trend", "mean minus share of D at n=400 below half its value at n=100",
       {{"cascade_sh", "sign_trend"}}, 0, {}},
      {"seneta_heyde_crosscheck", "sqrt(a) median(sqrt(n) M_n^2/D_n) at n=400 pairwise within 15%, b in {2,3,4}",
       {{"cascade_sh", "sh_pairwise"}}, 0, {}},
  };
  return list;
}

bool starts_with(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }

// Reduced-size variant of each config, used for the rerun comparison.
Config small_variant(Config c) {
  const std::string id = c.require_string("experiment");
  auto set = [&](const std::string& k, const std::string& v) { c.set(k, v); };
  if (id == "gff_expectations") {
    set("m", "32");
    set("replicas", "40");
  } else if (id == "gff_theorem1") {
    set("m", "32");
    set("eps_cells", "8, 4");
    set("replicas", "20");
  } else if (id == "cascade_theorem1") {
    set("depth", "100");
    set("trees", "12");
    set("martingale_trees", "60");
    set("martingale_depth", "5");
    set("spine_draws", "2000");
    set("tilt_draws", "2000");
  } else if (id == "cascade_sh") {
    set("depth", "100");
    set("trees", "8");
    set("sign_depths", "50, 100");
  } else if (id == "rooted_equivalence") {
    set("replicas", "150");
  } else if (id == "moment_bounds") {
    set("replicas", "150");
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  std::string config_dir = GMCLAB_CONFIG_DIR;
  std::string out = "acceptance_runs";
  int workers = 1;
  std::vector<std::string> expect_fail;
  bool skip_determinism = false;
  app.add_option("--configs", config_dir, "Directory of experiment configs");
  app.add_option("--out", out, "Output directory");
  app.add_option("--workers", workers, "Worker threads");
  app.add_option("--expect-fail", expect_fail, "Criterion id whose failure is known and tolerated");
  app.add_flag("--skip-determinism", skip_determinism, "Skip the rerun comparison");
  CLI11_PARSE(app, argc, argv);

  const std::set<std::string> tolerated(expect_fail.begin(), expect_fail.end());
  for (const auto& id : tolerated) {
    bool known = false;
    for (const auto& c : criteria()) known = known || c.id == id;
    if (!known) {
      std::cerr << "unknown criterion '" << id << "'\n";
      return 2;
    }
  }

  std::map<std::string, RunResult> runs;
  std::map<std::string, Config> configs;
  try {
    for (const auto id : gmclab::all_experiments()) {
      const std::string name = gmclab::to_string(id);
      const auto path = std::filesystem::path(config_dir) / (name + ".cfg");
      configs.emplace(name, Config::load(path));
      gmclab::RunOptions opts;
      opts.out = std::filesystem::path(out) / name;
      opts.workers = workers;
      std::cerr << "running " << name << " ..." << std::endl;
      runs.emplace(name, gmclab::run_experiment(configs.at(name), opts));
      std::cerr << "  " << runs.at(name).wall_clock_seconds << " s" << std::endl;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  int unexpected = 0;
  auto report = [&](const std::string& id, bool pass, const std::string& text, const std::string& detail) {
    const bool tolerated_fail = !pass && tolerated.count(id) > 0;
    std::printf("%s %-26s %s\n", pass ? "PASS" : (tolerated_fail ? "FAIL (expected)" : "FAIL"), id.c_str(),
                text.c_str());
    if (!detail.empty()) std::printf("%s", detail.c_str());
    if (!pass && !tolerated_fail) ++unexpected;
  };

  for (const auto& c : criteria()) {
    bool pass = true;
    std::size_t matched = 0;
    std::string detail;
    for (const auto& part : c.parts) {
      const auto& r = runs.at(part.experiment);
      if (r.failed) {
        pass = false;
        detail += "    " + part.experiment + " failed: " + r.error + "\n";
      }
      for (const auto& row : r.rows) {
        if (!row.acceptance || !starts_with(row.name, part.prefix)) continue;
        ++matched;
        pass = pass && row.pass;
        detail += std::string("    ") + (row.pass ? "ok   " : "FAIL ") + row.name +
                  "  estimate=" + gmclab::format_double(row.estimate) + "\n";
      }
    }
    if (matched == 0) {
      pass = false;
      detail += "    no acceptance rows recorded\n";
    }
    for (const auto& t : c.timers) {
      const auto colon = t.find(':');
      const auto& r = runs.at(t.substr(0, colon));
      double secs = r.wall_clock_seconds;
      if (colon != std::string::npos) {
        const auto* row = r.find(t.substr(colon + 1));
        secs = row ? row->estimate : -1.0;
      }
      const bool ok = secs >= 0.0 && secs < c.target_seconds;
      pass = pass && ok;
      detail += std::string("    ") + (ok ? "ok   " : "FAIL ") + "runtime " + gmclab::format_double(secs) +
                " s (target < " + gmclab::format_double(c.target_seconds) + " s)\n";
    }
    report(c.id, pass, c.text, detail);
  }

  if (!skip_determinism) {
    bool same = true;
    std::string detail;
    for (const auto& [name, cfg] : configs) {
      const Config small = small_variant(cfg);
      gmclab::RunOptions a, b;
      a.out = std::filesystem::path(out) / "rerun_a" / name;
      a.workers = 1;
      b.out = std::filesystem::path(out) / "rerun_b" / name;
      b.workers = 2;
      try {
        const auto ra = gmclab::run_experiment(small, a);
        const auto rb = gmclab::run_experiment(small, b);
        const bool eq = !ra.csv_digests.empty() && ra.csv_digests == rb.csv_digests && !ra.failed && !rb.failed;
        same = same && eq;
        detail += std::string("    ") + (eq ? "ok   " : "FAIL ") + name + " (" +
                  std::to_string(ra.csv_digests.size()) + " csv)\n";
      } catch (const std::exception& e) {
        same = false;
        detail += "    FAIL " + name + ": " + e.what() + "\n";
      }
    }
    report("determinism", same, "identical config and seed reproduce byte-identical CSVs (1 vs 2 workers)", detail);
  }

  return unexpected == 0 ? 0 : 1;
}
