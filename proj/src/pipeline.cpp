#include "pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace polyinv {

namespace {

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int max_target_degree(const Annotations& ann) {
  int d = 0;
  for (auto& [l, atoms] : ann.targets)
    for (auto& a : atoms) d = std::max(d, a.poly.pdegree());
  return d;
}

int max_target_count(const Annotations& ann) {
  int n = 0;
  for (auto& [l, atoms] : ann.targets) n = std::max(n, static_cast<int>(atoms.size()));
  return n;
}

}  // namespace

LoadedProgram load_program(const std::string& source, const std::optional<Rat>& bound) {
  LoadedProgram lp;
  lp.program = parse_program(source);
  assign_labels(lp.program);
  lp.cfg = build_cfg(lp.program);
  lp.ann = collect_annotations(lp.program);
  inject_implicit_pre(lp.ann, lp.program, bound);
  return lp;
}

void derive_parameters(const Annotations& ann, RunConfig& rc) {
  if (rc.n == 0) rc.n = std::max(1, max_target_count(ann));
  if (rc.d == 0) rc.d = std::max(1, max_target_degree(ann));
  if (rc.upsilon == 0) rc.upsilon = rc.d;
}

Objective build_objective(const Program& p, const Annotations& ann, const TemplateMap& tm,
                          bool recursive) {
  Objective obj;
  std::ostringstream desc;
  for (auto& [label, atoms] : ann.targets) {
    int fi = p.func_of_label(label);
    const Function& fn = p.funcs[fi];
    bool use_mu = recursive && label == fn.lout;
    const std::vector<Monomial>& monos =
        use_mu ? tm.fn_monomials.at(fi) : tm.label_monomials.at(label);
    const std::vector<std::vector<int>>& svars =
        use_mu ? tm.mu_svars.at(fi) : tm.eta_svars.at(label);
    if (static_cast<int>(atoms.size()) > tm.n)
      throw semantic_error("more target atoms than template conjuncts at label " +
                           std::to_string(label));
    for (size_t ai = 0; ai < atoms.size(); ++ai) {
      RPoly want = atoms[ai].poly.eval_unknowns({});
      Rat scale = want.max_abs_coef();
      if (scale == 0) throw semantic_error("zero target polynomial");
      RPoly norm = want.scaled(1 / scale);
      std::map<Monomial, Rat> rest(norm.terms.begin(), norm.terms.end());
      for (size_t j = 0; j < monos.size(); ++j) {
        Rat c = 0;
        auto it = rest.find(monos[j]);
        if (it != rest.end()) {
          c = it->second;
          rest.erase(it);
        }
        int u = svars[ai][j];
        obj.targets.push_back({u, rat_to_double(c)});
        CoefExpr dist = CoefExpr::unknown(u) - CoefExpr::constant(c);
        obj.expr += dist * dist;
      }
      if (!rest.empty())
        throw semantic_error(
            "target at label " + std::to_string(label) +
            " uses a monomial outside the template support (degree too small?)");
      if (!desc.str().empty()) desc << ", ";
      desc << "distance to target at " << (use_mu ? "post(" + fn.name + ")" : "label " + std::to_string(label));
    }
  }
  obj.desc = desc.str();
  return obj;
}

namespace {

void append_pins(QuadSystem& sys, const Objective& obj) {
  for (auto& [u, c] : obj.targets) {
    QuadConstraint qc;
    qc.kind = QuadConstraint::Eq;
    qc.expr = CoefExpr::unknown(u) - CoefExpr::constant(rat_from_double(c));
    qc.pair_id = -1;
    qc.tag = "pin";
    sys.constraints.push_back(std::move(qc));
  }
}

void claimed_labels_of(const Program& p, const Annotations& ann, bool recursive,
                       InvariantReport& inv) {
  for (int l = 1; l <= p.label_count(); ++l) {
    const Function& fn = p.funcs[p.func_of_label(l)];
    bool suppressed =
        recursive && l == fn.lout && !ann.targets_at(fn.lout).empty();
    if (!suppressed) inv.claimed_labels.push_back(l);
  }
  // drop unclaimed assertions so reports and checks only show what is proved
  std::set<int> keep(inv.claimed_labels.begin(), inv.claimed_labels.end());
  for (auto it = inv.label_assertions.begin(); it != inv.label_assertions.end();) {
    if (!keep.count(it->first))
      it = inv.label_assertions.erase(it);
    else
      ++it;
  }
}

void solve_verify_stage(PipelineResult& r, const RunConfig& rc,
                        const std::vector<ConstraintPair>& pairs) {
  Clock::time_point t0 = Clock::now();
  r.sol = solve(r.sys, r.objective, rc.solver);
  r.time.solve = seconds_since(t0);
  if (!r.sol.ok) {
    r.exit_code = 3;
    r.error = "solver: " + r.sol.message;
    return;
  }

  t0 = Clock::now();
  std::vector<Rat> sigma = to_exact(r.sol.x);
  r.cert = verify(pairs, r.sys, sigma);
  r.time.verify = seconds_since(t0);
  if (!r.from_pairs) {
    r.inv = instantiate(r.templates, sigma);
    r.inv.strict = r.sys.strict;
  }
  if (!r.cert.pass) {
    r.exit_code = 4;
    r.error = "exact verification failed: worst residual " +
              rat_to_sci(r.cert.worst_residual);
    return;
  }
}

}  // namespace

PipelineResult run_pipeline(const std::string& source, const RunConfig& rc_in,
                            bool solve_and_verify) {
  RunConfig rc = rc_in;
  PipelineResult r;
  Clock::time_point total0 = Clock::now();
  try {
    LoadedProgram lp = load_program(source, rc.bound);
    r.program = std::move(lp.program);
    r.cfg = std::move(lp.cfg);
    r.ann = std::move(lp.ann);

    derive_parameters(r.ann, rc);
    r.n = rc.n;
    r.d = rc.d;
    r.upsilon = rc.upsilon;
    r.recursive = rc.force_recursive || r.program.has_calls;

    Clock::time_point t0 = Clock::now();
    UnknownTable unknowns;
    r.templates = make_invariant_templates(r.program, unknowns, rc.n, rc.d);
    if (r.recursive) make_post_templates(r.program, unknowns, r.templates);

    PairGenConfig pg;
    pg.recursive_mode = r.recursive;
    r.pairs = generate_pairs(r.program, r.cfg, r.ann, r.templates, pg);
    r.sys = assemble_system(r.pairs, rc.upsilon, !rc.nonstrict, r.program.vars,
                            std::move(unknowns));
    r.objective = build_objective(r.program, r.ann, r.templates, r.recursive);
    if (rc.pin_target) append_pins(r.sys, r.objective);
    r.time.encode = seconds_since(t0);

    if (solve_and_verify) {
      solve_verify_stage(r, rc, r.pairs);
      if (r.exit_code == 0) {
        claimed_labels_of(r.program, r.ann, r.recursive, r.inv);
        if (rc.run_empirical) {
          t0 = Clock::now();
          EmpiricalConfig ec;
          ec.trials = rc.empirical_trials;
          ec.seed = rc.solver.seed;
          r.emp = empirical_check(r.program, r.cfg, r.ann, r.inv, ec);
          r.emp_ran = true;
          r.time.empirical = seconds_since(t0);
          if (!r.emp.pass && !r.emp.inconclusive) {
            r.exit_code = 5;
            r.error = "empirical counterexample: " + r.emp.detail;
          }
        }
      }
    }
  } catch (const std::exception& ex) {
    r.exit_code = 2;
    r.error = ex.what();
  }
  r.time.total = seconds_since(total0);
  return r;
}

PipelineResult run_pairs_pipeline(const std::string& text, const RunConfig& rc_in,
                                  bool solve_and_verify) {
  RunConfig rc = rc_in;
  PipelineResult r;
  r.from_pairs = true;
  Clock::time_point total0 = Clock::now();
  try {
    PairsFile pf = parse_pairs_file(text);
    if (rc.upsilon == 0) rc.upsilon = rc.d > 0 ? rc.d : 2;
    bool strict = !rc.nonstrict;
    if (pf.strict_mode) strict = *pf.strict_mode;
    r.n = rc.n > 0 ? rc.n : 1;
    r.d = rc.d > 0 ? rc.d : 2;
    r.upsilon = rc.upsilon;

    Clock::time_point t0 = Clock::now();
    r.pairs = pf.pairs;
    r.sys = assemble_system(r.pairs, rc.upsilon, strict, pf.vars, std::move(pf.unknowns));
    r.objective = pf.objective;
    if (rc.pin_target) append_pins(r.sys, r.objective);
    r.program.vars = std::move(pf.vars);
    r.time.encode = seconds_since(t0);

    if (solve_and_verify) solve_verify_stage(r, rc, r.pairs);
  } catch (const std::exception& ex) {
    r.exit_code = 2;
    r.error = ex.what();
  }
  r.time.total = seconds_since(total0);
  return r;
}

// ---- reporting ----

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt_double(double v) {
  char buf[64];
  snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ordered_json rat_json(const Rat& q) {
  ordered_json j;
  j["exact"] = rat_to_string(q);
  j["approx"] = rat_to_double(q);
  return j;
}

}  // namespace

std::string report_json(const PipelineResult& r, const std::string& input_text,
                        const RunConfig& rc) {
  ordered_json j;
  j["tool"] = "polyinv";
  j["input"] = ordered_json{{"kind", r.from_pairs ? "pairs" : "poly"}, {"source", input_text}};
  ordered_json cfg;
  cfg["n"] = r.n;
  cfg["d"] = r.d;
  cfg["upsilon"] = r.upsilon;
  cfg["mode"] = r.sys.strict ? "strict" : "nonstrict";
  cfg["recursive"] = r.recursive;
  cfg["bound"] = rc.bound ? rat_to_string(*rc.bound) : "";
  cfg["pin_target"] = rc.pin_target;
  cfg["starts"] = rc.solver.starts;
  cfg["seed"] = rc.solver.seed;
  cfg["eps_min"] = rc.solver.eps_min;
  cfg["tau_res"] = rc.solver.tau_res;
  j["config"] = cfg;
  j["exit_code"] = r.exit_code;
  j["error"] = r.error;

  if (!r.from_pairs && r.program.labeled) {
    ordered_json prog;
    for (auto& fn : r.program.funcs) {
      ordered_json f;
      f["name"] = fn.name;
      f["lin"] = fn.lin;
      f["lout"] = fn.lout;
      ordered_json vars = ordered_json::array();
      for (int v : fn.vars) vars.push_back(r.program.vars.name(v));
      f["vars"] = vars;
      prog.push_back(f);
    }
    j["functions"] = prog;
  }

  j["system"] = ordered_json{{"size", r.sys.size()},
                             {"unknowns", r.sys.unknowns.size()},
                             {"pairs", r.pairs.size()}};

  ordered_json sol;
  sol["ok"] = r.sol.ok;
  sol["feas_residual"] = r.sol.feas;
  sol["max_eq_residual"] = r.sol.max_eq_residual;
  sol["objective"] = r.sol.obj;
  sol["start"] = r.sol.start;
  sol["iterations"] = r.sol.total_iters;
  sol["message"] = r.sol.message;
  ordered_json xs = ordered_json::array();
  for (double v : r.sol.x) xs.push_back(fmt_double(v));
  sol["x"] = xs;
  j["solver"] = sol;

  ordered_json cert;
  cert["pass"] = r.cert.pass;
  cert["worst_residual"] = rat_json(r.cert.worst_residual);
  ordered_json pv = ordered_json::array();
  for (auto& v : r.cert.pairs) {
    ordered_json pj;
    pj["pair"] = v.pair_id;
    pj["origin"] = v.origin;
    pj["pass"] = v.pass;
    pj["max_residual"] = rat_json(v.max_residual);
    if (r.sys.strict) pj["eps"] = rat_json(v.eps);
    if (!v.detail.empty()) pj["detail"] = v.detail;
    pv.push_back(pj);
  }
  cert["pairs"] = pv;
  j["certificate"] = cert;

  if (!r.from_pairs) {
    ordered_json inv;
    ordered_json labels;
    for (auto& [l, conj] : r.inv.label_assertions) {
      ordered_json arr = ordered_json::array();
      for (auto& q : conj)
        arr.push_back(q.str(r.program.vars, true) + (r.inv.strict ? " > 0" : " >= 0"));
      labels[std::to_string(l)] = arr;
    }
    inv["labels"] = labels;
    ordered_json posts;
    for (auto& [fi, conj] : r.inv.post_conditions) {
      ordered_json arr = ordered_json::array();
      for (auto& q : conj)
        arr.push_back(q.str(r.program.vars, true) + (r.inv.strict ? " > 0" : " >= 0"));
      posts[r.program.funcs[fi].name] = arr;
    }
    inv["posts"] = posts;
    j["invariant"] = inv;
  }

  if (r.emp_ran) {
    ordered_json emp;
    emp["pass"] = r.emp.pass;
    emp["inconclusive"] = r.emp.inconclusive;
    emp["checked"] = r.emp.checked;
    emp["starved"] = r.emp.starved;
    emp["detail"] = r.emp.detail;
    j["empirical"] = emp;
  }

  j["timing"] = ordered_json{{"encode", r.time.encode},
                             {"solve", r.time.solve},
                             {"verify", r.time.verify},
                             {"empirical", r.time.empirical},
                             {"total", r.time.total}};
  return j.dump(2) + "\n";
}

std::string report_text(const PipelineResult& r) {
  std::ostringstream os;
  os << "mode=" << (r.sys.strict ? "strict" : "nonstrict") << " n=" << r.n << " d=" << r.d
     << " upsilon=" << r.upsilon << (r.recursive ? " recursive" : "") << "\n";
  os << "pairs=" << r.pairs.size() << " |S|=" << r.sys.size()
     << " unknowns=" << r.sys.unknowns.size() << "\n";
  if (r.exit_code == 2) {
    os << "error: " << r.error << "\n";
    return os.str();
  }
  os << "solver: " << r.sol.message << " (residual " << r.sol.feas << ", max eq "
     << r.sol.max_eq_residual << ", start " << r.sol.start << ", " << r.sol.total_iters
     << " iterations)\n";
  os << "certificate: " << (r.cert.pass ? "PASS" : "FAIL") << " worst residual "
     << rat_to_sci(r.cert.worst_residual) << "\n";
  if (!r.from_pairs && r.cert.pass) {
    for (auto& [l, conj] : r.inv.label_assertions) {
      os << "  " << l << ": ";
      for (size_t i = 0; i < conj.size(); ++i) {
        if (i) os << "  and  ";
        os << conj[i].str(r.program.vars, true) << (r.inv.strict ? " > 0" : " >= 0");
      }
      os << "\n";
    }
    for (auto& [fi, conj] : r.inv.post_conditions) {
      os << "  post " << r.program.funcs[fi].name << ": ";
      for (size_t i = 0; i < conj.size(); ++i) {
        if (i) os << "  and  ";
        os << conj[i].str(r.program.vars, true) << (r.inv.strict ? " > 0" : " >= 0");
      }
      os << "\n";
    }
  }
  if (r.emp_ran)
    os << "empirical: "
       << (r.emp.pass ? "PASS" : (r.emp.inconclusive ? "INCONCLUSIVE" : "FAIL")) << " ("
       << r.emp.checked << " unit paths)" << (r.emp.detail.empty() ? "" : " " + r.emp.detail)
       << "\n";
  if (!r.error.empty() && r.exit_code != 0) os << "error: " << r.error << "\n";
  char buf[160];
  snprintf(buf, sizeof buf, "time: encode %.2fs solve %.2fs verify %.2fs empirical %.2fs",
           r.time.encode, r.time.solve, r.time.verify, r.time.empirical);
  os << buf << "\n";
  return os.str();
}

PipelineResult reverify_report(const std::string& json_text) {
  ordered_json j = ordered_json::parse(json_text);
  RunConfig rc;
  rc.n = j["config"]["n"].get<int>();
  rc.d = j["config"]["d"].get<int>();
  rc.upsilon = j["config"]["upsilon"].get<int>();
  rc.nonstrict = j["config"]["mode"].get<std::string>() == "nonstrict";
  std::string bound = j["config"]["bound"].get<std::string>();
  if (!bound.empty()) {
    Rat b(bound);
    b.canonicalize();
    rc.bound = b;
  }
  std::string kind = j["input"]["kind"].get<std::string>();
  std::string source = j["input"]["source"].get<std::string>();

  PipelineResult r = kind == "pairs" ? run_pairs_pipeline(source, rc, false)
                                     : run_pipeline(source, rc, false);
  if (r.exit_code != 0) return r;

  std::vector<double> x;
  for (auto& s : j["solver"]["x"]) x.push_back(std::stod(s.get<std::string>()));
  if (static_cast<int>(x.size()) != r.sys.unknowns.size()) {
    r.exit_code = 2;
    r.error = "solution size does not match the reconstructed system";
    return r;
  }
  r.sol.x = x;
  r.sol.ok = true;
  std::vector<Rat> sigma = to_exact(x);
  r.cert = verify(r.pairs, r.sys, sigma);
  if (!r.from_pairs) {
    r.inv = instantiate(r.templates, sigma);
    r.inv.strict = r.sys.strict;
    claimed_labels_of(r.program, r.ann, r.recursive, r.inv);
  }
  if (!r.cert.pass) {
    r.exit_code = 4;
    r.error = "exact verification failed";
  }
  return r;
}

std::vector<BenchRow> bench_dir(const std::string& dir, const RunConfig& rc, int jobs) {
  namespace fs = std::filesystem;
  std::vector<std::string> files;
  for (auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".poly")
      files.push_back(e.path().string());
  std::sort(files.begin(), files.end());

  std::vector<BenchRow> rows(files.size());
  auto run_one = [&](size_t i) {
    BenchRow row;
    row.name = fs::path(files[i]).stem().string();
    std::ifstream in(files[i]);
    std::stringstream ss;
    ss << in.rdbuf();
    Clock::time_point t0 = Clock::now();
    PipelineResult r = run_pipeline(ss.str(), rc);
    row.seconds = seconds_since(t0);
    row.n = r.n;
    row.d = r.d;
    row.size = r.sys.size();
    int nv = 0;
    for (auto& fn : r.program.funcs) nv = std::max(nv, static_cast<int>(fn.vars.size()));
    row.nvars = nv;
    switch (r.exit_code) {
      case 0: row.verdict = "verified"; break;
      case 2: row.verdict = "input-error"; break;
      case 3: row.verdict = r.sol.timed_out ? "timeout" : "solver-failed"; break;
      case 4: row.verdict = "verify-failed"; break;
      case 5: row.verdict = "empirical-failed"; break;
      default: row.verdict = "unknown"; break;
    }
    rows[i] = std::move(row);
  };

  int threads = jobs > 0 ? jobs : 1;
  threads = std::max(1, std::min<int>(threads, static_cast<int>(files.size())));
  if (threads <= 1) {
    for (size_t i = 0; i < files.size(); ++i) run_one(i);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        size_t i;
        while ((i = next.fetch_add(1)) < files.size()) run_one(i);
      });
    for (auto& th : pool) th.join();
  }
  return rows;
}

std::string bench_table(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << "name                      n  d  |V|    |S|      time  verdict\n";
  for (auto& r : rows) {
    char buf[160];
    snprintf(buf, sizeof buf, "%-24s %2d %2d %4d %7ld %8.2fs  %s\n", r.name.c_str(), r.n, r.d,
             r.nvars, r.size, r.seconds, r.verdict.c_str());
    os << buf;
  }
  return os.str();
}

}  // namespace polyinv
