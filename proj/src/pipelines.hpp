#pragma once

#include <cstdint>
#include <filesystem>
#include <sstream>
#include <string>

#include "gmclab/experiments.hpp"

namespace gmclab::detail {

struct Context {
  std::uint64_t seed = 0;
  int workers = 1;
  std::filesystem::path out;
  RunResult* result = nullptr;

  // Writes <out>/<experiment>_<table>.csv and records its digest.
  void write_csv(const std::string& table, const std::string& content);
  void add(StatRow row);
};

// "%g" rendering for row names.
std::string label(double v);

StatRow info_row(std::string name, double estimate, double dispersion, std::uint64_t n, std::string detail = {});
StatRow acceptance_row(std::string name, double estimate, double dispersion, std::uint64_t n, std::string threshold,
                       bool pass, std::string detail = {});

// ConfigError with msg unless ok.
void require(bool ok, const std::string& msg);

// Each pipeline reads all of its keys first and calls require_all_used()
// before doing any work, so configuration errors never leave partial output.
void run_gff_expectations(const Config& c, Context& ctx);
void run_gff_theorem1(const Config& c, Context& ctx);
void run_cascade_theorem1(const Config& c, Context& ctx);
void run_cascade_sh(const Config& c, Context& ctx);
void run_rooted_equivalence(const Config& c, Context& ctx);
void run_moment_bounds(const Config& c, Context& ctx);
void run_walk_lemma(const Config& c, Context& ctx);
void run_meander_tables(const Config& c, Context& ctx);

}  // namespace gmclab::detail
