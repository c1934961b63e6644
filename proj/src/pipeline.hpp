#pragma once

#include "interp.hpp"
#include "pairsfile.hpp"

namespace polyinv {

struct RunConfig {
  int n = 0;        // 0 = derive from the annotated targets
  int d = 0;        // 0 = derive
  int upsilon = 0;  // 0 = d
  bool nonstrict = false;
  std::optional<Rat> bound;
  bool pin_target = false;
  bool force_recursive = false;  // summaries are automatic when calls exist
  SolverConfig solver;
  long empirical_trials = 10000;
  bool run_empirical = true;
};

struct Timings {
  double encode = 0, solve = 0, verify = 0, empirical = 0, total = 0;
};

// Everything the pipeline produced; later stages may be absent when an
// earlier one failed (see exit_code).
struct PipelineResult {
  // exit codes: 0 ok, 2 input error, 3 solver failed, 4 verification failed,
  // 5 empirical counterexample
  int exit_code = 0;
  std::string error;

  Program program;
  Cfg cfg;
  Annotations ann;
  TemplateMap templates;
  std::vector<ConstraintPair> pairs;
  QuadSystem sys;
  Objective objective;
  Solution sol;
  Certificate cert;
  InvariantReport inv;
  EmpiricalResult emp;
  bool emp_ran = false;

  int n = 1, d = 1, upsilon = 1;
  bool recursive = false;
  bool from_pairs = false;
  Timings time;

  bool verified() const { return exit_code == 0; }
};

// Parse / label / annotate / inject; throws on bad input.
struct LoadedProgram {
  Program program;
  Cfg cfg;
  Annotations ann;
};
LoadedProgram load_program(const std::string& source, const std::optional<Rat>& bound);

// n, d derived from the annotated targets per the experimental convention
// (n = most atoms requested at one site, d = highest requested degree).
void derive_parameters(const Annotations& ann, RunConfig& rc);

Objective build_objective(const Program& p, const Annotations& ann, const TemplateMap& tm,
                          bool recursive);

// Full pipeline on a `.poly` program (encode + solve + exact verify +
// empirical check). `solve_and_verify=false` stops after encoding.
PipelineResult run_pipeline(const std::string& source, const RunConfig& rc,
                            bool solve_and_verify = true);

// Same stages on a standalone pairs file.
PipelineResult run_pairs_pipeline(const std::string& text, const RunConfig& rc,
                                  bool solve_and_verify = true);

// Machine-readable report (stable key order). Embeds the input and solution
// so exact verification can be replayed losslessly.
std::string report_json(const PipelineResult& r, const std::string& input_text,
                        const RunConfig& rc);

std::string report_text(const PipelineResult& r);

// Re-run exact verification from a report produced by report_json.
PipelineResult reverify_report(const std::string& json_text);

struct BenchRow {
  std::string name;
  int n = 0, d = 0, nvars = 0;
  long size = 0;
  double seconds = 0;
  std::string verdict;
};

std::vector<BenchRow> bench_dir(const std::string& dir, const RunConfig& rc, int jobs);
std::string bench_table(const std::vector<BenchRow>& rows);

}  // namespace polyinv
