#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "pipeline.hpp"
#include "sysio.hpp"

using namespace polyinv;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

struct CommonOpts {
  RunConfig rc;
  std::string input;
  bool pairs = false;
  std::string export_path, report_path;
  double bound = 0;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_solver) {
  cmd->add_option("file", o.input, "input program (.poly) or pairs file")->required();
  cmd->add_option("-n,--size", o.rc.n, "assertions per label (default: derived from targets)")
      ->envname("POLYINV_SIZE");
  cmd->add_option("-d,--degree", o.rc.d, "template degree (default: derived from targets)")
      ->envname("POLYINV_DEGREE");
  cmd->add_option("--upsilon", o.rc.upsilon, "degree cap of the SOS multipliers (default: d)")
      ->envname("POLYINV_UPSILON");
  cmd->add_flag("--nonstrict", o.rc.nonstrict,
                "synthesize non-strict invariants (no positivity witnesses)")
      ->envname("POLYINV_NONSTRICT");
  cmd->add_option("--bound", o.bound, "bounded-reals mode: confine variables to [-c, c]")
      ->envname("POLYINV_BOUND");
  cmd->add_flag("--pin-target", o.rc.pin_target,
                "pin targeted template coefficients with hard equality constraints")
      ->envname("POLYINV_PIN_TARGET");
  cmd->add_flag("--pairs", o.pairs, "treat the input as a standalone pairs file")
      ->envname("POLYINV_PAIRS");
  cmd->add_option("--export", o.export_path,
                  "write the quadratic system (canonical text; .mod for AMPL)")
      ->envname("POLYINV_EXPORT");
  cmd->add_option("--report", o.report_path, "write the JSON report")
      ->envname("POLYINV_REPORT");
  cmd->add_flag("-q,--quiet", o.quiet, "suppress the text report");
  if (with_solver) {
    cmd->add_option("--starts", o.rc.solver.starts, "number of solver starts")
        ->envname("POLYINV_STARTS");
    cmd->add_option("--seed", o.rc.solver.seed, "random seed")->envname("POLYINV_SEED");
    cmd->add_option("--timeout", o.rc.solver.timeout_sec, "solver time limit in seconds")
        ->envname("POLYINV_TIMEOUT");
    cmd->add_option("--iters", o.rc.solver.max_iters, "iteration cap per continuation round")
        ->envname("POLYINV_ITERS");
    cmd->add_option("--threads", o.rc.solver.threads, "solver threads (0 = hardware)")
        ->envname("POLYINV_THREADS");
    cmd->add_option("--trials", o.rc.empirical_trials, "empirical check trials")
        ->envname("POLYINV_TRIALS");
    cmd->add_flag("!--no-empirical", o.rc.run_empirical, "skip the empirical check");
  }
}

void finish_opts(CommonOpts& o) {
  if (o.bound > 0) o.rc.bound = rat_from_decimal(std::to_string(o.bound));
}

int emit(const PipelineResult& r, const CommonOpts& o, const std::string& input_text) {
  if (!o.export_path.empty()) {
    if (o.export_path.size() > 4 &&
        o.export_path.substr(o.export_path.size() - 4) == ".mod")
      spit(o.export_path, export_ampl(r.sys, r.objective, 1e-9));
    else
      spit(o.export_path, export_canonical(r.sys, r.objective));
  }
  if (!o.report_path.empty()) spit(o.report_path, report_json(r, input_text, o.rc));
  if (!o.quiet) std::cout << report_text(r);
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polyinv: polynomial inductive invariant synthesis"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value configuration file");

  CommonOpts synth_o, enc_o;
  std::string verify_cert;
  bool verify_quiet = false;
  std::string bench_dir_path, bench_report;
  RunConfig bench_rc;
  int bench_jobs = 1;

  CLI::App* synth = app.add_subcommand("synthesize", "run the full pipeline");
  add_common(synth, synth_o, true);

  CLI::App* enc = app.add_subcommand("encode", "generate the quadratic system only");
  add_common(enc, enc_o, false);

  CLI::App* ver = app.add_subcommand("verify", "exact re-check of a stored report");
  ver->add_option("--certificate", verify_cert, "report JSON produced by synthesize")
      ->required();
  ver->add_flag("-q,--quiet", verify_quiet, "only set the exit code");

  CLI::App* ben = app.add_subcommand("bench", "run a directory of .poly benchmarks");
  ben->add_option("dir", bench_dir_path, "benchmark directory")->required();
  ben->add_option("--jobs", bench_jobs, "parallel benchmark processes");
  ben->add_option("--starts", bench_rc.solver.starts, "number of solver starts");
  ben->add_option("--seed", bench_rc.solver.seed, "random seed");
  ben->add_option("--timeout", bench_rc.solver.timeout_sec, "per-file time limit (seconds)");
  ben->add_option("--trials", bench_rc.empirical_trials, "empirical check trials");
  ben->add_option("--report", bench_report, "write the table to a file as well");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 2 : 0;
  }

  try {
    if (synth->parsed()) {
      finish_opts(synth_o);
      std::string text = slurp(synth_o.input);
      PipelineResult r = synth_o.pairs ? run_pairs_pipeline(text, synth_o.rc)
                                       : run_pipeline(text, synth_o.rc);
      return emit(r, synth_o, text);
    }
    if (enc->parsed()) {
      finish_opts(enc_o);
      std::string text = slurp(enc_o.input);
      PipelineResult r = enc_o.pairs ? run_pairs_pipeline(text, enc_o.rc, false)
                                     : run_pipeline(text, enc_o.rc, false);
      if (r.exit_code != 0) {
        std::cerr << "error: " << r.error << "\n";
        return r.exit_code;
      }
      if (enc_o.export_path.empty())
        std::cout << export_canonical(r.sys, r.objective);
      else if (enc_o.export_path.size() > 4 &&
               enc_o.export_path.substr(enc_o.export_path.size() - 4) == ".mod")
        spit(enc_o.export_path, export_ampl(r.sys, r.objective, 1e-9));
      else
        spit(enc_o.export_path, export_canonical(r.sys, r.objective));
      if (!enc_o.report_path.empty()) spit(enc_o.report_path, report_json(r, text, enc_o.rc));
      if (!enc_o.quiet)
        std::cerr << "|S| = " << r.sys.size() << " (" << r.pairs.size() << " pairs, "
                  << r.sys.unknowns.size() << " unknowns)\n";
      return 0;
    }
    if (ver->parsed()) {
      PipelineResult r = reverify_report(slurp(verify_cert));
      if (!verify_quiet) {
        for (auto& v : r.cert.pairs)
          std::cout << "pair " << v.pair_id << " " << v.origin << ": "
                    << (v.pass ? "PASS" : "FAIL")
                    << " residual=" << rat_to_sci(v.max_residual)
                    << (r.sys.strict ? " eps=" + rat_to_sci(v.eps) : "")
                    << (v.detail.empty() ? "" : " (" + v.detail + ")") << "\n";
        std::cout << (r.cert.pass ? "certificate PASS" : "certificate FAIL") << "\n";
      }
      return r.exit_code;
    }
    if (ben->parsed()) {
      auto rows = bench_dir(bench_dir_path, bench_rc, bench_jobs);
      std::string table = bench_table(rows);
      std::cout << table;
      if (!bench_report.empty()) spit(bench_report, table);
      return 0;
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 0;
}
