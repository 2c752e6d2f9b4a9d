#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "gmclab/cascade.hpp"
#include "gmclab/chaos_measures.hpp"
#include "gmclab/csv.hpp"
#include "gmclab/error.hpp"
#include "gmclab/experiments.hpp"
#include "gmclab/random.hpp"
#include "gmclab/walk_meander.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kAcceptanceFailure = 1;
constexpr int kConfigError = 2;

int cmd_run(const std::string& path, const gmclab::RunOptions& opts) {
  const auto config = gmclab::Config::load(path);
  const auto result = gmclab::run_experiment(config, opts);
  std::cout << result.experiment << ": " << result.rows.size() << " rows, " << result.wall_clock_seconds << " s\n";
  for (const auto& r : result.rows) {
    if (!r.acceptance) continue;
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << "  estimate=" << gmclab::format_double(r.estimate) << "  ["
              << r.threshold << "]\n";
  }
  for (const auto& r : result.rejected) std::cout << "rejected: " << r << "\n";
  if (result.failed) {
    std::cerr << "run failed: " << result.error << "\n";
    return kAcceptanceFailure;
  }
  return result.acceptance_passed() ? kOk : kAcceptanceFailure;
}

int cmd_summarize(const std::string& dir, const std::string& json_out) {
  const auto s = gmclab::summarize_runs(dir);
  std::cout << s.text;
  if (!json_out.empty()) {
    std::ofstream f(json_out);
    if (!f) throw gmclab::Error("cannot write " + json_out);
    f << s.digest.dump(2) << "\n";
  }
  return s.all_passed() ? kOk : kAcceptanceFailure;
}

void print(double v) { std::cout << gmclab::format_double(v) << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian multiplicative chaos experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> workers;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("--seed", seed, "Master seed (overrides the config)");
  run->add_option("--out", out, "Output directory (overrides the config)");
  run->add_option("--workers", workers, "Worker threads (overrides the config)");

  std::string dir, json_out;
  auto* summarize = app.add_subcommand("summarize", "Aggregate acceptance rows of every run under a directory");
  summarize->add_option("dir", dir, "Run directory")->required();
  summarize->add_option("--json", json_out, "Write the JSON digest to this file");

  auto* oracle = app.add_subcommand("oracle", "Evaluate a reference quantity");
  oracle->require_subcommand(1);

  std::string shape = "unit_disk";
  int m = 64;
  double gamma = 1.0;
  auto* em = oracle->add_subcommand("expected_mass", "Lattice sum of CR^{gamma^2/2} h^2 over the domain");
  em->add_option("gamma", gamma)->required();
  em->add_option("--shape", shape);
  em->add_option("--m", m);

  auto* ed = oracle->add_subcommand("expected_derivative", "Lattice sum of 2 log(1/CR) CR^2 h^2 over the domain");
  ed->add_option("--shape", shape);
  ed->add_option("--m", m);

  double mgf_m = 0.0;
  auto* mgf = oracle->add_subcommand("meander_mgf", "E exp(m R_1) for the meander endpoint R_1");
  mgf->add_option("m", mgf_m)->required();

  double C = 1.0;
  auto* sched = oracle->add_subcommand("schedule_n", "floor((C / (2 - gamma))^2)");
  sched->add_option("C", C)->required();
  sched->add_option("gamma", gamma)->required();

  int branching = 4;
  double level = 0.0;
  auto* crit = oracle->add_subcommand("critical_gamma", "2 log b / a");
  crit->add_option("b", branching)->required();
  crit->add_option("a", level)->required();

  std::uint64_t master = 0, index = 0;
  auto* ss = oracle->add_subcommand("seed_stream", "Seed of substream index of a master seed");
  ss->add_option("master", master)->required();
  ss->add_option("index", index)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) {
      gmclab::RunOptions opts;
      opts.seed = seed;
      if (out) opts.out = *out;
      opts.workers = workers;
      return cmd_run(config_path, opts);
    }
    if (*summarize) return cmd_summarize(dir, json_out);
    if (*em || *ed) {
      const auto d = gmclab::LatticeDomain::build(gmclab::parse_shape(shape), m, {.dense_green = false});
      print(*em ? gmclab::expected_mass_oracle(*d, gamma, gmclab::regions::whole())
                : gmclab::expected_derivative_oracle(*d, gmclab::regions::whole()));
    } else if (*mgf) {
      print(gmclab::meander_mgf(mgf_m));
    } else if (*sched) {
      std::cout << gmclab::schedule_n(C, gamma) << "\n";
    } else if (*crit) {
      gmclab::CascadeParams p;
      p.branching = branching;
      p.level_height = level;
      gmclab::validate(p);
      print(gmclab::critical_gamma(p));
    } else if (*ss) {
      std::cout << gmclab::seed_stream(master, index) << "\n";
    }
    return kOk;
  } catch (const gmclab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const gmclab::InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
}
