#include <doctest.h>


#include <cmath>
#include "pipeline.hpp"
#include "sysio.hpp"

using namespace polyinv;

namespace {

QuadSystem tiny_system(std::vector<CoefExpr> eqs, int nu, bool strict = false) {
  QuadSystem sys;
  sys.strict = strict;
  sys.upsilon = 2;
  for (int i = 0; i < nu; ++i) sys.unknowns.add(UnknownKind::STemplate, "u" + std::to_string(i));
  for (auto& e : eqs) {
    QuadConstraint qc;
    qc.kind = QuadConstraint::Eq;
    qc.expr = e;
    qc.pair_id = 0;
    qc.tag = "t";
    sys.constraints.push_back(qc);
  }
  return sys;
}

}  // namespace

TEST_CASE("x^2 = 0 drives x to zero within sqrt(tau)") {
  // u0^2 = 0
  CoefExpr e = CoefExpr::unknown(0) * CoefExpr::unknown(0);
  QuadSystem sys = tiny_system({e}, 1);
  SolverConfig cfg;
  cfg.starts = 2;
  cfg.threads = 1;
  Solution sol = solve(sys, Objective{}, cfg);
  CHECK(sol.ok);
  CHECK(std::fabs(sol.x[0]) <= 1e-3);  // |x| <= sqrt(tau_res)
}

TEST_CASE("simple bilinear system solves to the residual floor") {
  // u0*u1 - 6 = 0, u0 + u1 - 5 = 0  (solutions {2,3}/{3,2})
  CoefExpr prod = CoefExpr::unknown(0) * CoefExpr::unknown(1) - CoefExpr::constant(6);
  CoefExpr sum = CoefExpr::unknown(0) + CoefExpr::unknown(1) - CoefExpr::constant(5);
  QuadSystem sys = tiny_system({prod, sum}, 2);
  SolverConfig cfg;
  cfg.starts = 4;
  cfg.threads = 1;
  Solution sol = solve(sys, Objective{}, cfg);
  CHECK(sol.ok);
  CHECK(sol.max_eq_residual < 1e-9);
}

TEST_CASE("planted-solution recovery on random feasible quadratic systems") {
  // acceptance criterion: >= 90% of 50 instances recovered to tau_res
  int recovered = 0;
  const int instances = 50;
  for (int inst = 0; inst < instances; ++inst) {
    SplitMix rng(1234 + inst);
    auto coef = [&]() { return static_cast<double>(static_cast<long>(rng.below(9)) - 4); };
    int nu = 14, ne = 10;
    std::vector<double> planted(nu);
    for (auto& v : planted) v = rng.uniform() * 2 - 1;
    std::vector<CoefExpr> eqs;
    for (int e = 0; e < ne; ++e) {
      CoefExpr expr;
      for (int t = 0; t < 4; ++t) {
        double k = coef();
        if (k != 0)
          expr += CoefExpr::unknown(static_cast<int>(rng.below(nu)),
                                    rat_from_double(k));
      }
      for (int t = 0; t < 3; ++t) {
        double k = coef();
        int a = static_cast<int>(rng.below(nu));
        int b = static_cast<int>(rng.below(nu));
        if (k != 0)
          expr += CoefExpr::unknown(a) * CoefExpr::unknown(b, rat_from_double(k));
      }
      // set the constant so the planted point satisfies the equation exactly
      std::vector<double> xs(planted);
      double v = expr.eval_d(xs);
      expr += CoefExpr::constant(rat_from_double(-v));
      eqs.push_back(expr);
    }
    QuadSystem sys = tiny_system(eqs, nu);
    SolverConfig cfg;
    cfg.starts = 16;
    cfg.threads = 2;
    cfg.seed = inst;
    cfg.max_iters = 150;
    Solution sol = solve(sys, Objective{}, cfg);
    if (sol.ok) ++recovered;
  }
  INFO("recovered ", recovered, " of ", instances);
  CHECK(recovered >= 45);
}

TEST_CASE("penalty trace is monotone within each accepted phase") {
  CoefExpr prod = CoefExpr::unknown(0) * CoefExpr::unknown(1) - CoefExpr::constant(2);
  CoefExpr lin = CoefExpr::unknown(0) - CoefExpr::unknown(1);
  QuadSystem sys = tiny_system({prod, lin}, 2);
  SolverConfig cfg;
  cfg.starts = 1;
  cfg.threads = 1;
  Solution sol = solve(sys, Objective{}, cfg);
  REQUIRE(!sol.penalty_trace.empty());
  for (auto& phase : sol.penalty_trace)
    for (size_t i = 1; i < phase.size(); ++i) CHECK(phase[i] <= phase[i - 1] * (1 + 1e-12));
}

TEST_CASE("determinism: same seed gives identical solutions") {
  CoefExpr prod = CoefExpr::unknown(0) * CoefExpr::unknown(1) - CoefExpr::constant(6);
  CoefExpr sum = CoefExpr::unknown(0) + CoefExpr::unknown(1) - CoefExpr::constant(5);
  QuadSystem sys = tiny_system({prod, sum}, 2);
  SolverConfig cfg;
  cfg.starts = 4;
  cfg.threads = 2;
  cfg.seed = 7;
  Solution a = solve(sys, Objective{}, cfg);
  Solution b = solve(sys, Objective{}, cfg);
  REQUIRE(a.x.size() == b.x.size());
  for (size_t i = 0; i < a.x.size(); ++i) CHECK(a.x[i] == b.x[i]);
}

TEST_CASE("objective pulls the solution toward the requested coefficients") {
  // u0 free, u1 = u0 (one equality), target u0 -> 3
  CoefExpr lin = CoefExpr::unknown(0) - CoefExpr::unknown(1);
  QuadSystem sys = tiny_system({lin}, 2);
  Objective obj;
  obj.targets = {{0, 3.0}};
  obj.expr = (CoefExpr::unknown(0) - CoefExpr::constant(3)) *
             (CoefExpr::unknown(0) - CoefExpr::constant(3));
  SolverConfig cfg;
  cfg.starts = 2;
  cfg.threads = 1;
  Solution sol = solve(sys, obj, cfg);
  CHECK(sol.ok);
  CHECK(sol.x[0] == doctest::Approx(3.0).epsilon(1e-3));
  CHECK(sol.x[1] == doctest::Approx(3.0).epsilon(1e-3));
}

TEST_CASE("export canonical round-trips structurally") {
  CoefExpr prod = CoefExpr::unknown(0) * CoefExpr::unknown(1, Rat(1, 2)) - CoefExpr::constant(6);
  CoefExpr lin = CoefExpr::unknown(0, Rat(-2, 3)) + CoefExpr::constant(Rat(1, 7));
  QuadSystem sys = tiny_system({prod, lin}, 2, true);
  Objective obj;
  obj.targets = {{0, 1.5}};
  obj.expr = (CoefExpr::unknown(0) - CoefExpr::constant(Rat(3, 2))) *
             (CoefExpr::unknown(0) - CoefExpr::constant(Rat(3, 2)));
  std::string once = export_canonical(sys, obj);
  ImportedSystem imp = import_canonical(once);
  std::string twice = export_canonical(imp.sys, imp.obj);
  CHECK(once == twice);
  REQUIRE(imp.sys.constraints.size() == sys.constraints.size());
  for (size_t i = 0; i < sys.constraints.size(); ++i)
    CHECK(imp.sys.constraints[i].expr == sys.constraints[i].expr);
}

TEST_CASE("export is byte-identical across runs") {
  CoefExpr e = CoefExpr::unknown(0) * CoefExpr::unknown(0) - CoefExpr::constant(2);
  QuadSystem sys = tiny_system({e}, 1);
  CHECK(export_canonical(sys, Objective{}) == export_canonical(sys, Objective{}));
}
