#include "solver.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

namespace polyinv {

namespace {

struct Rng {
  SplitMix mix;
  explicit Rng(unsigned long long seed) : mix(seed) {}
  double uniform() { return mix.uniform(); }
  double gauss() {
    double u1 = uniform(), u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }
};

struct Row {
  double c = 0;
  int pair = -1;
  std::vector<std::pair<int, double>> lin;
  std::vector<std::tuple<int, int, double>> quad;
};

struct Compiled {
  int nu = 0;
  std::vector<Row> rows;  // equality rows
  std::vector<int> row_constraint;  // index into sys.constraints
  std::vector<double> lb;
  std::vector<char> has_lb;
  std::vector<std::pair<int, double>> obj_targets;
  std::vector<char> is_s;                 // template coefficients
  std::vector<char> is_t, is_l;
  std::vector<std::vector<int>> by_pair;  // pair id -> row indices (pins at -1 excluded)
  // t = sum scale*l_a*l_b per multiplier coefficient (the Gram expansion)
  std::vector<std::vector<std::tuple<int, int, double>>> tchain;
  std::vector<int> reduced_rows;  // equality rows free of l entries
};

Compiled compile(const QuadSystem& sys, const Objective& obj, double eps_min) {
  Compiled cp;
  cp.nu = sys.unknowns.size();
  cp.lb.assign(cp.nu, 0.0);
  cp.has_lb.assign(cp.nu, 0);
  cp.is_s.assign(cp.nu, 0);
  cp.is_t.assign(cp.nu, 0);
  cp.is_l.assign(cp.nu, 0);
  for (int i = 0; i < cp.nu; ++i) {
    const UnknownInfo& ui = sys.unknowns.info(i);
    if (ui.bounded_below && ui.kind == UnknownKind::Eps) {
      cp.has_lb[i] = 1;
      cp.lb[i] = eps_min;
    }
    if (ui.kind == UnknownKind::STemplate || ui.kind == UnknownKind::SPost) cp.is_s[i] = 1;
    if (ui.kind == UnknownKind::T) cp.is_t[i] = 1;
    if (ui.kind == UnknownKind::L) cp.is_l[i] = 1;
  }
  cp.tchain.assign(cp.nu, {});
  for (auto& d : sys.decomps) {
    std::map<Monomial, int> hindex;
    for (size_t j = 0; j < d.hmonos.size(); ++j) hindex[d.hmonos[j]] = static_cast<int>(j);
    int ydim = static_cast<int>(d.ymonos.size());
    for (auto& blk : d.blocks) {
      auto lid = [&](int r, int cc) { return blk.l_ids[r * (r + 1) / 2 + cc]; };
      for (int r = 0; r < ydim; ++r)
        for (int cc = 0; cc <= r; ++cc) {
          auto it = hindex.find(d.ymonos[r].times(d.ymonos[cc]));
          if (it == hindex.end()) continue;
          int tid = blk.t_ids[it->second];
          double scale = r == cc ? 1.0 : 2.0;
          for (int k = 0; k <= cc; ++k)
            cp.tchain[tid].push_back({lid(r, k), lid(cc, k), scale});
        }
    }
  }
  int max_pair = -1;
  for (auto& qc : sys.constraints) max_pair = std::max(max_pair, qc.pair_id);
  cp.by_pair.assign(max_pair + 1, {});
  for (auto& qc : sys.constraints) {
    if (qc.kind == QuadConstraint::Nonneg) continue;  // handled by projection
    Row r;
    r.c = rat_to_double(qc.expr.c);
    r.pair = qc.pair_id;
    for (auto& [id, k] : qc.expr.lin) r.lin.push_back({id, rat_to_double(k)});
    for (auto& [a, b, k] : qc.expr.quad) r.quad.push_back({a, b, rat_to_double(k)});
    if (r.pair >= 0) cp.by_pair[r.pair].push_back(static_cast<int>(cp.rows.size()));
    bool has_l = false;
    for (auto& [id, k] : r.lin) has_l = has_l || cp.is_l[id];
    for (auto& [a, b, k] : r.quad) has_l = has_l || cp.is_l[a] || cp.is_l[b];
    if (!has_l) cp.reduced_rows.push_back(static_cast<int>(cp.rows.size()));
    cp.row_constraint.push_back(static_cast<int>(&qc - sys.constraints.data()));
    cp.rows.push_back(std::move(r));
  }
  cp.obj_targets = obj.targets;
  return cp;
}

double eval_row(const Row& r, const std::vector<double>& x) {
  double v = r.c;
  for (auto& [i, k] : r.lin) v += k * x[i];
  for (auto& [a, b, k] : r.quad) v += k * x[a] * x[b];
  return v;
}

double feas_of(const Compiled& cp, const std::vector<double>& x) {
  double f = 0;
  for (auto& r : cp.rows) {
    double v = eval_row(r, x);
    f += v * v;
  }
  for (int i = 0; i < cp.nu; ++i)
    if (cp.has_lb[i] && x[i] < cp.lb[i]) {
      double v = cp.lb[i] - x[i];
      f += v * v;
    }
  return f;
}

double max_abs_row(const Compiled& cp, const std::vector<double>& x) {
  double m = 0;
  for (auto& r : cp.rows) m = std::max(m, std::fabs(eval_row(r, x)));
  return m;
}

double obj_of(const Compiled& cp, const std::vector<double>& x) {
  double f = 0;
  for (auto& [i, c] : cp.obj_targets) {
    double v = x[i] - c;
    f += v * v;
  }
  return f;
}

void refresh_t(const Compiled& cp, std::vector<double>& x);

void project(const Compiled& cp, std::vector<double>& x) {
  for (int i = 0; i < cp.nu; ++i)
    if (cp.has_lb[i] && x[i] < cp.lb[i]) x[i] = cp.lb[i];
}

struct StartResult {
  std::vector<double> x;
  double feas = std::numeric_limits<double>::infinity();
  double obj = std::numeric_limits<double>::infinity();
  int start = -1;
  long iters = 0;
  bool converged = false;
  bool aborted = false;
  bool timed_out = false;
  std::vector<std::vector<double>> trace;
};

// One multi-phase local solve: damped Gauss-Newton over all unknowns,
// interleaved with exact linear refits of the template block and per-pair
// refits of the multiplier blocks (the system is bilinear, so both
// subproblems are far better conditioned than the joint one).
class LocalSolver {
 public:
  LocalSolver(const Compiled& cp, std::chrono::steady_clock::time_point deadline)
      : cp_(cp), deadline_(deadline) {
    nrows_ = static_cast<int>(cp.rows.size());
    nobj_ = static_cast<int>(cp.obj_targets.size());
    frozen_.assign(cp_.nu, 0);
    for (int i = 0; i < cp_.nu; ++i)
      if (cp_.is_s[i]) scols_.push_back(i);
    analyzed_ = false;
  }

  bool out_of_time() const { return std::chrono::steady_clock::now() > deadline_; }

  void set_frozen(std::vector<char> frozen) { frozen_ = std::move(frozen); }
  void clear_frozen() { frozen_.assign(cp_.nu, 0); }

  double penalty(const std::vector<double>& x, double rho) const {
    return feas_of(cp_, x) + rho * obj_of(cp_, x);
  }

  // --- joint damped least-squares ---
  void lm(std::vector<double>& x, double rho, int max_iters, double stop_max_resid,
          StartResult& sr, std::vector<double>& trace) {
    double lambda = 1e-3;
    double F = penalty(x, rho);
    trace.push_back(F);
    int stall = 0;
    for (int it = 0; it < max_iters; ++it) {
      if (out_of_time()) {
        sr.timed_out = true;
        return;
      }
      if (!std::isfinite(F)) {
        sr.aborted = true;
        return;
      }
      if (max_abs_row(cp_, x) <= stop_max_resid) return;

      build_normal_equations(x, rho);
      bool stepped = false;
      for (int tries = 0; tries < 60; ++tries) {
        Eigen::VectorXd dx = solve_damped(lambda);
        if (!dx.allFinite()) {
          lambda *= 4;
          if (lambda > 1e14) break;
          continue;
        }
        std::vector<double> xn(x);
        for (int i = 0; i < cp_.nu; ++i) xn[i] += dx[i];
        project(cp_, xn);
        double Fn = penalty(xn, rho);
        if (std::isfinite(Fn) && Fn <= F) {
          double drop = F - Fn;
          x.swap(xn);
          F = Fn;
          trace.push_back(F);
          lambda = std::max(lambda * 0.25, 1e-12);
          stepped = true;
          ++sr.iters;
          stall = drop <= 1e-6 * F + 1e-32 ? stall + 1 : 0;
          break;
        }
        lambda *= 4;
        if (lambda > 1e14) break;
      }
      if (!stepped || stall > 50) return;
    }
  }

  double reduced_feas(const std::vector<double>& x) const {
    double f = 0;
    for (int ri : cp_.reduced_rows) {
      double v = eval_row(cp_.rows[ri], x);
      f += v * v;
    }
    for (int i = 0; i < cp_.nu; ++i)
      if (cp_.has_lb[i] && x[i] < cp_.lb[i]) {
        double v = cp_.lb[i] - x[i];
        f += v * v;
      }
    return f;
  }

  double reduced_max(const std::vector<double>& x) const {
    double m = 0;
    for (int ri : cp_.reduced_rows) m = std::max(m, std::fabs(eval_row(cp_.rows[ri], x)));
    return m;
  }

  // --- endgame on the reduced system: multiplier coefficients stay exactly
  // at their Gram expansions while (s, l, eps) move, so the residual rows are
  // exactly the decomposition defects the exact re-check will see ---
  void reduced_lm(std::vector<double>& x, int max_iters, double stop_max_resid,
                  StartResult& sr, std::vector<double>& trace) {
    std::vector<int> cols;
    std::vector<int> col_of(cp_.nu, -1);
    for (int i = 0; i < cp_.nu; ++i)
      if (!cp_.is_t[i]) {
        col_of[i] = static_cast<int>(cols.size());
        cols.push_back(i);
      }
    int nc = static_cast<int>(cols.size());
    int nr = static_cast<int>(cp_.reduced_rows.size());
    refresh_t(cp_, x);
    double F = reduced_feas(x);
    trace.push_back(F);
    double lambda = 1e-5;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    bool analyzed = false;
    int stall = 0;
    for (int it = 0; it < max_iters; ++it) {
      if (out_of_time()) {
        sr.timed_out = true;
        return;
      }
      if (!std::isfinite(F)) {
        sr.aborted = true;
        return;
      }
      if (reduced_max(x) <= stop_max_resid) return;

      std::vector<Eigen::Triplet<double>> trips;
      std::vector<Eigen::Triplet<double>> htrips;
      Eigen::VectorXd rv(nr);
      auto add_t_grad = [&](int row, int tid, double w) {
        for (auto& [a, b, scale] : cp_.tchain[tid]) {
          if (a == b) {
            trips.emplace_back(row, col_of[a], w * scale * 2 * x[a]);
          } else {
            trips.emplace_back(row, col_of[a], w * scale * x[b]);
            trips.emplace_back(row, col_of[b], w * scale * x[a]);
          }
        }
      };
      // residual-weighted curvature of t(l) and t(l)*s terms; without it the
      // product valleys around vanishing coefficients are quartically flat
      auto add_t_hess = [&](int tid, double w) {
        for (auto& [a, b, scale] : cp_.tchain[tid]) {
          if (a == b) {
            htrips.emplace_back(col_of[a], col_of[a], 2 * scale * w);
          } else {
            htrips.emplace_back(col_of[a], col_of[b], scale * w);
            htrips.emplace_back(col_of[b], col_of[a], scale * w);
          }
        }
      };
      auto add_t_cross = [&](int tid, int scol, double w) {
        for (auto& [a, b, scale] : cp_.tchain[tid]) {
          if (a == b) {
            htrips.emplace_back(col_of[a], scol, 2 * scale * x[a] * w);
            htrips.emplace_back(scol, col_of[a], 2 * scale * x[a] * w);
          } else {
            htrips.emplace_back(col_of[a], scol, scale * x[b] * w);
            htrips.emplace_back(scol, col_of[a], scale * x[b] * w);
            htrips.emplace_back(col_of[b], scol, scale * x[a] * w);
            htrips.emplace_back(scol, col_of[b], scale * x[a] * w);
          }
        }
      };
      for (int rr = 0; rr < nr; ++rr) {
        const Row& r = cp_.rows[cp_.reduced_rows[rr]];
        rv[rr] = eval_row(r, x);
        double w = rv[rr];
        for (auto& [i, k] : r.lin) {
          if (cp_.is_t[i]) {
            add_t_grad(rr, i, k);
            add_t_hess(i, k * w);
          } else {
            trips.emplace_back(rr, col_of[i], k);
          }
        }
        for (auto& [a, b, k] : r.quad) {
          if (cp_.is_t[a] && !cp_.is_t[b]) {
            trips.emplace_back(rr, col_of[b], k * x[a]);
            add_t_grad(rr, a, k * x[b]);
            add_t_hess(a, k * x[b] * w);
            add_t_cross(a, col_of[b], k * w);
          } else if (cp_.is_t[b] && !cp_.is_t[a]) {
            trips.emplace_back(rr, col_of[a], k * x[b]);
            add_t_grad(rr, b, k * x[a]);
            add_t_hess(b, k * x[a] * w);
            add_t_cross(b, col_of[a], k * w);
          } else if (!cp_.is_t[a] && !cp_.is_t[b]) {
            if (a == b) {
              trips.emplace_back(rr, col_of[a], 2 * k * x[a]);
              htrips.emplace_back(col_of[a], col_of[a], 2 * k * w);
            } else {
              trips.emplace_back(rr, col_of[a], k * x[b]);
              trips.emplace_back(rr, col_of[b], k * x[a]);
              htrips.emplace_back(col_of[a], col_of[b], k * w);
              htrips.emplace_back(col_of[b], col_of[a], k * w);
            }
          } else {
            // t*t never occurs in the encoding
            add_t_grad(rr, a, k * x[b]);
            add_t_grad(rr, b, k * x[a]);
          }
        }
      }
      Eigen::SparseMatrix<double> J(nr, nc);
      J.setFromTriplets(trips.begin(), trips.end());
      Eigen::SparseMatrix<double> H2(nc, nc);
      H2.setFromTriplets(htrips.begin(), htrips.end());
      Eigen::SparseMatrix<double> A = Eigen::SparseMatrix<double>(J.transpose()) * J;
      Eigen::VectorXd g = J.transpose() * rv;
      Eigen::VectorXd D = A.diagonal();
      for (int k = 0; k < nc; ++k) D[k] += 1e-6;
      for (int k = 0; k < nc; ++k)
        if (frozen_[cols[k]]) D[k] = 1e18;
      if (!analyzed) {
        Eigen::SparseMatrix<double> A0 = A + H2;
        add_diagonal(A0, Eigen::VectorXd::Ones(nc));
        ldlt.analyzePattern(A0);
        analyzed = true;
      }
      bool stepped = false;
      for (int tries = 0; tries < 60; ++tries) {
        Eigen::SparseMatrix<double> Ad = A;
        if (lambda < 1.0) Ad += H2;
        add_diagonal(Ad, lambda * D);
        ldlt.factorize(Ad);
        Eigen::VectorXd dx;
        if (ldlt.info() == Eigen::Success)
          dx = ldlt.solve(-g);
        else
          dx = Eigen::VectorXd::Constant(nc, std::numeric_limits<double>::quiet_NaN());
        if (!dx.allFinite()) {
          lambda *= 4;
          if (lambda > 1e14) break;
          continue;
        }
        std::vector<double> xn(x);
        for (int k = 0; k < nc; ++k) xn[cols[k]] += dx[k];
        project(cp_, xn);
        refresh_t(cp_, xn);
        double Fn = reduced_feas(xn);
        if (std::isfinite(Fn) && Fn <= F) {
          double drop = F - Fn;
          x.swap(xn);
          F = Fn;
          trace.push_back(F);
          lambda = std::max(lambda * 0.25, 1e-12);
          stepped = true;
          ++sr.iters;
          stall = drop <= 1e-6 * F + 1e-32 ? stall + 1 : 0;
          break;
        }
        lambda *= 4;
        if (lambda > 1e14) break;
      }
      if (!stepped || stall > 50) return;
    }
  }

  // --- exact refit of the template coefficients (rows are linear in them
  // once the multipliers are frozen); never increases the penalty ---
  void s_step(std::vector<double>& x, double rho, std::vector<double>& trace) {
    int ns = static_cast<int>(scols_.size());
    if (ns == 0) return;
    std::vector<int> col_of(cp_.nu, -1);
    for (int k = 0; k < ns; ++k) col_of[scols_[k]] = k;

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(ns, ns);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(ns);
    std::vector<double> coef(ns);
    std::vector<int> touched;
    for (auto& r : cp_.rows) {
      touched.clear();
      double base = r.c;
      for (auto& [i, k] : r.lin) {
        int ci = col_of[i];
        if (ci >= 0) {
          if (coef[ci] == 0 && std::find(touched.begin(), touched.end(), ci) == touched.end())
            touched.push_back(ci);
          coef[ci] += k;
        } else {
          base += k * x[i];
        }
      }
      for (auto& [a, bq, k] : r.quad) {
        int ca = col_of[a], cb = col_of[bq];
        if (ca >= 0 && cb >= 0) {
          // template coefficients never multiply each other in this system,
          // but freeze one side if they ever do
          base += k * x[a] * x[bq];
        } else if (ca >= 0) {
          if (coef[ca] == 0 && std::find(touched.begin(), touched.end(), ca) == touched.end())
            touched.push_back(ca);
          coef[ca] += k * x[bq];
        } else if (cb >= 0) {
          if (coef[cb] == 0 && std::find(touched.begin(), touched.end(), cb) == touched.end())
            touched.push_back(cb);
          coef[cb] += k * x[a];
        } else {
          base += k * x[a] * x[bq];
        }
      }
      for (int ci : touched) {
        b[ci] += coef[ci] * base;
        for (int cj : touched) A(ci, cj) += coef[ci] * coef[cj];
      }
      for (int ci : touched) coef[ci] = 0;
    }
    for (auto& [i, c] : cp_.obj_targets) {
      int ci = col_of[i];
      if (ci < 0) continue;
      A(ci, ci) += rho;
      b[ci] += rho * (x[i] - c);
    }
    for (int k = 0; k < ns; ++k) A(k, k) += 1e-10;
    for (int k = 0; k < ns; ++k)
      if (frozen_[scols_[k]]) A(k, k) += 1e18;

    Eigen::VectorXd ds = A.ldlt().solve(-b);
    if (!ds.allFinite()) return;
    std::vector<double> xn(x);
    for (int k = 0; k < ns; ++k) xn[scols_[k]] += ds[k];
    project(cp_, xn);
    double F0 = penalty(x, rho), F1 = penalty(xn, rho);
    if (F1 <= F0) {
      x.swap(xn);
      trace.push_back(F1);
    }
  }

  // --- independent dense refits of each pair's multipliers ---
  void pair_step(std::vector<double>& x, double rho, int iters, StartResult& sr,
                 std::vector<double>& trace) {
    double F = penalty(x, rho);
    for (auto& rows : cp_.by_pair) {
      if (rows.empty()) continue;
      if (out_of_time()) {
        sr.timed_out = true;
        return;
      }
      // unknowns of this pair = non-template unknowns in its rows
      std::vector<int> cols;
      std::vector<int> col_of(cp_.nu, -1);
      for (int ri : rows) {
        const Row& r = cp_.rows[ri];
        auto touch = [&](int i) {
          if (!cp_.is_s[i] && col_of[i] < 0) {
            col_of[i] = static_cast<int>(cols.size());
            cols.push_back(i);
          }
        };
        for (auto& [i, k] : r.lin) touch(i);
        for (auto& [a, b, k] : r.quad) {
          touch(a);
          touch(b);
        }
      }
      if (cols.empty()) continue;
      int nc = static_cast<int>(cols.size());
      int nr = static_cast<int>(rows.size());
      Eigen::MatrixXd J(nr, nc);
      Eigen::VectorXd rv(nr);
      double before = 0;
      for (int a = 0; a < nr; ++a) before += std::pow(eval_row(cp_.rows[rows[a]], x), 2);
      double local = before;
      double lambda = 1e-3;
      for (int it = 0; it < iters; ++it) {
        J.setZero();
        for (int a = 0; a < nr; ++a) {
          const Row& r = cp_.rows[rows[a]];
          rv[a] = eval_row(r, x);
          for (auto& [i, k] : r.lin)
            if (col_of[i] >= 0) J(a, col_of[i]) += k;
          for (auto& [i, j, k] : r.quad) {
            if (col_of[i] >= 0) J(a, col_of[i]) += k * x[j];
            if (col_of[j] >= 0) J(a, col_of[j]) += k * x[i];
          }
        }
        if (local <= 1e-28 * nr) break;
        Eigen::MatrixXd A = J.transpose() * J;
        Eigen::MatrixXd H2 = Eigen::MatrixXd::Zero(nc, nc);
        for (int a = 0; a < nr; ++a) {
          const Row& r = cp_.rows[rows[a]];
          for (auto& [i, j, k] : r.quad) {
            int ci = col_of[i], cj = col_of[j];
            if (ci < 0 || cj < 0) continue;
            if (ci == cj) {
              H2(ci, ci) += 2 * k * rv[a];
            } else {
              H2(ci, cj) += k * rv[a];
              H2(cj, ci) += k * rv[a];
            }
          }
        }
        Eigen::VectorXd g = J.transpose() * rv;
        bool stepped = false;
        for (int tries = 0; tries < 40; ++tries) {
          Eigen::MatrixXd Ad = A;
          if (lambda < 1.0) Ad += H2;
          for (int k = 0; k < nc; ++k) Ad(k, k) += lambda * (A(k, k) + 1e-8);
          for (int k = 0; k < nc; ++k)
            if (frozen_[cols[k]]) Ad(k, k) += 1e18;
          Eigen::VectorXd dx = Ad.ldlt().solve(-g);
          if (!dx.allFinite()) {
            lambda *= 4;
            if (lambda > 1e14) break;
            continue;
          }
          std::vector<double> xn(x);
          for (int k = 0; k < nc; ++k) xn[cols[k]] += dx[k];
          project(cp_, xn);
          double after = 0;
          for (int ri : rows) after += std::pow(eval_row(cp_.rows[ri], x), 2);
          double after_n = 0;
          for (int ri : rows) after_n += std::pow(eval_row(cp_.rows[ri], xn), 2);
          (void)after;
          if (std::isfinite(after_n) && after_n <= local) {
            x.swap(xn);
            local = after_n;
            lambda = std::max(lambda * 0.25, 1e-12);
            stepped = true;
            ++sr.iters;
            break;
          }
          lambda *= 4;
          if (lambda > 1e14) break;
        }
        if (!stepped) break;
      }
      F -= before - local;
      trace.push_back(F);
    }
  }

 private:
  const Compiled& cp_;
  std::chrono::steady_clock::time_point deadline_;
  int nrows_, nobj_;
  std::vector<char> frozen_;
  std::vector<int> scols_;
  bool analyzed_;
  Eigen::SparseMatrix<double> JtJ_;
  Eigen::SparseMatrix<double> H2_;  // sum of residual-weighted constraint Hessians
  Eigen::VectorXd g_, Dscale_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;

  void build_normal_equations(const std::vector<double>& x, double rho) {
    std::vector<Eigen::Triplet<double>> trips;
    std::vector<Eigen::Triplet<double>> htrips;
    Eigen::SparseMatrix<double> J(nrows_ + nobj_, cp_.nu);
    g_ = Eigen::VectorXd::Zero(cp_.nu);
    for (int k = 0; k < nrows_; ++k) {
      const Row& r = cp_.rows[k];
      double rv = eval_row(r, x);
      for (auto& [i, c] : r.lin) {
        trips.emplace_back(k, i, c);
        g_[i] += c * rv;
      }
      for (auto& [a, b, c] : r.quad) {
        if (a == b) {
          trips.emplace_back(k, a, 2 * c * x[a]);
          g_[a] += 2 * c * x[a] * rv;
          htrips.emplace_back(a, a, 2 * c * rv);
        } else {
          trips.emplace_back(k, a, c * x[b]);
          trips.emplace_back(k, b, c * x[a]);
          g_[a] += c * x[b] * rv;
          g_[b] += c * x[a] * rv;
          htrips.emplace_back(a, b, c * rv);
          htrips.emplace_back(b, a, c * rv);
        }
      }
    }
    H2_.resize(cp_.nu, cp_.nu);
    H2_.setFromTriplets(htrips.begin(), htrips.end());
    double srho = std::sqrt(rho);
    for (int k = 0; k < nobj_; ++k) {
      auto& [i, c] = cp_.obj_targets[k];
      trips.emplace_back(nrows_ + k, i, srho);
      g_[i] += rho * (x[i] - c);
    }
    J.setFromTriplets(trips.begin(), trips.end());
    JtJ_ = Eigen::SparseMatrix<double>(J.transpose()) * J;
    Dscale_ = JtJ_.diagonal();
    for (int i = 0; i < cp_.nu; ++i) Dscale_[i] += 1e-4;
    for (int i = 0; i < cp_.nu; ++i)
      if (frozen_[i]) Dscale_[i] = 1e18;
    if (!analyzed_) {
      Eigen::SparseMatrix<double> A = JtJ_ + H2_;
      add_diagonal(A, Eigen::VectorXd::Ones(cp_.nu));
      ldlt_.analyzePattern(A);
      analyzed_ = true;
    }
  }

  static void add_diagonal(Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& d) {
    Eigen::SparseMatrix<double> D(d.size(), d.size());
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(d.size());
    for (int i = 0; i < d.size(); ++i) trips.emplace_back(i, i, d[i]);
    D.setFromTriplets(trips.begin(), trips.end());
    A += D;
  }

  Eigen::VectorXd solve_damped(double lambda) {
    // Newton model of the squared residual: J^T J plus the residual-weighted
    // constraint curvature, which rescues the bilinear flat valleys where
    // pure Gauss-Newton stalls. Heavier damping falls back toward GN.
    Eigen::SparseMatrix<double> A = JtJ_;
    if (lambda < 1.0) A += H2_;
    add_diagonal(A, lambda * Dscale_);
    ldlt_.factorize(A);
    if (ldlt_.info() != Eigen::Success)
      return Eigen::VectorXd::Constant(cp_.nu, std::numeric_limits<double>::quiet_NaN());
    return ldlt_.solve(-g_);
  }
};

// Negating a column of L leaves L L^T (hence every constraint) unchanged, so
// non-negative diagonals are a gauge choice applied after the solve.
void fix_cholesky_signs(const QuadSystem& sys, std::vector<double>& x) {
  for (auto& d : sys.decomps) {
    for (auto& blk : d.blocks) {
      int ydim = blk.ydim;
      auto idx = [&](int r, int c) { return blk.l_ids[r * (r + 1) / 2 + c]; };
      for (int k = 0; k < ydim; ++k) {
        if (x[idx(k, k)] < 0)
          for (int r = k; r < ydim; ++r) x[idx(r, k)] = -x[idx(r, k)];
      }
    }
  }
}

void refresh_t(const Compiled& cp, std::vector<double>& x) {
  for (int i = 0; i < cp.nu; ++i) {
    if (!cp.is_t[i]) continue;
    double v = 0;
    for (auto& [a, b, scale] : cp.tchain[i]) v += scale * x[a] * x[b];
    x[i] = v;
  }
}

// h_i coefficients consistent with an l-assignment, so SOS rows start exactly
// satisfied.
void seed_t_from_l(const QuadSystem& sys, std::vector<double>& x) {
  for (auto& d : sys.decomps) {
    std::map<Monomial, int> hindex;
    for (size_t j = 0; j < d.hmonos.size(); ++j) hindex[d.hmonos[j]] = static_cast<int>(j);
    int ydim = static_cast<int>(d.ymonos.size());
    for (auto& blk : d.blocks) {
      std::vector<double> tvals(d.hmonos.size(), 0.0);
      auto lv = [&](int r, int c) { return x[blk.l_ids[r * (r + 1) / 2 + c]]; };
      for (int r = 0; r < ydim; ++r)
        for (int c = 0; c <= r; ++c) {
          double q = 0;
          for (int k = 0; k <= c; ++k) q += lv(r, k) * lv(c, k);
          if (r != c) q *= 2;
          auto it = hindex.find(d.ymonos[r].times(d.ymonos[c]));
          if (it != hindex.end()) tvals[it->second] += q;
        }
      for (size_t j = 0; j < blk.t_ids.size(); ++j) x[blk.t_ids[j]] = tvals[j];
    }
  }
}

std::vector<double> initial_point(const QuadSystem& sys, const Compiled& cp,
                                  const SolverConfig& cfg, int start) {
  Rng rng(cfg.seed * 1000003ULL + static_cast<unsigned long long>(start) * 7919ULL + 1);
  std::vector<double> x(cp.nu, 0.0);
  std::vector<char> targeted(cp.nu, 0);
  std::vector<double> target_val(cp.nu, 0.0);
  for (auto& [i, c] : cp.obj_targets) {
    targeted[i] = 1;
    target_val[i] = c;
  }
  double spread = start == 0 ? 0.0 : 0.02 * (1 + start % 6);
  for (int i = 0; i < cp.nu; ++i) {
    const UnknownInfo& ui = sys.unknowns.info(i);
    switch (ui.kind) {
      case UnknownKind::STemplate:
      case UnknownKind::SPost:
        if (targeted[i])
          x[i] = target_val[i];  // phase A holds these anyway
        else if (ui.unit_hint)
          x[i] = 1.0 + spread * rng.gauss();  // the constant-true template
        else
          x[i] = spread * rng.gauss();
        break;
      case UnknownKind::L:
        x[i] = start == 0 ? 0.0 : 0.5 * spread * rng.gauss();
        break;
      case UnknownKind::T:
        x[i] = 0;  // overwritten from l below
        break;
      case UnknownKind::Eps:
        x[i] = 1e-3;
        break;
    }
  }
  // h_0 starts near the constant polynomial 1
  for (auto& d : sys.decomps)
    if (!d.blocks.empty() && !d.blocks[0].l_ids.empty()) x[d.blocks[0].l_ids[0]] = 1.0;
  seed_t_from_l(sys, x);
  project(cp, x);
  return x;
}

}  // namespace

double feas_residual(const QuadSystem& sys, const std::vector<double>& x, double eps_min) {
  Objective none;
  Compiled cp = compile(sys, none, eps_min);
  return feas_of(cp, x);
}

Solution solve(const QuadSystem& sys, const Objective& obj, const SolverConfig& cfg) {
  Compiled cp = compile(sys, obj, cfg.eps_min);
  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      std::chrono::duration<double>(cfg.timeout_sec));

  struct Round {
    double rho;
    double stop;  // on max |e_k|
  };
  std::vector<Round> rounds;
  if (cp.obj_targets.empty())
    rounds = {{0.0, 1e-13}};
  else
    rounds = {{1.0, 1e-8}, {1e-2, 1e-9}, {1e-4, 1e-10}, {1e-6, 1e-11}, {0.0, 1e-13}};

  int nstarts = std::max(1, cfg.starts);
  std::vector<StartResult> results(nstarts);
  auto run_start = [&](int s) {
    StartResult sr;
    sr.start = s;
    sr.x = initial_point(sys, cp, cfg, s);
    LocalSolver ls(cp, deadline);
    const bool debug = std::getenv("POLYINV_DEBUG") != nullptr;
    auto phase_t0 = std::chrono::steady_clock::now();
    auto phase_secs = [&phase_t0] {
      auto now = std::chrono::steady_clock::now();
      double sec = std::chrono::duration<double>(now - phase_t0).count();
      phase_t0 = now;
      return sec;
    };

    // Phase A: hold the targeted coefficients at their requested values and
    // grind pure feasibility; the interior templates form around the request.
    if (!cp.obj_targets.empty()) {
      std::vector<char> frozen(cp.nu, 0);
      for (auto& [i, cval] : cp.obj_targets) {
        frozen[i] = 1;
        sr.x[i] = cval;
      }
      ls.set_frozen(std::move(frozen));
      std::vector<double>& trace = sr.trace.emplace_back();
      ls.lm(sr.x, 0.0, cfg.max_iters / 2, 1e-13, sr, trace);
      double prev = ls.penalty(sr.x, 0.0);
      auto als_t0 = std::chrono::steady_clock::now();
      for (int als = 0; als < 10 && !sr.timed_out && !sr.aborted; ++als) {
        if (max_abs_row(cp, sr.x) <= 1e-13 || ls.out_of_time()) break;
        if (std::chrono::duration<double>(std::chrono::steady_clock::now() - als_t0).count() >
            8.0)
          break;
        ls.s_step(sr.x, 0.0, trace);
        ls.pair_step(sr.x, 0.0, 10, sr, trace);
        double now = ls.penalty(sr.x, 0.0);
        if (now > 0.9 * prev && als >= 2) break;
        prev = now;
      }
      if (!sr.timed_out && !sr.aborted) ls.lm(sr.x, 0.0, cfg.max_iters, 1e-13, sr, trace);
      if (!sr.timed_out && !sr.aborted) {
        std::vector<double> xr = sr.x;
        ls.reduced_lm(xr, cfg.max_iters, 1e-13, sr, trace);
        if (feas_of(cp, xr) < feas_of(cp, sr.x)) sr.x = xr;
      }
      ls.clear_frozen();
      if (debug)
        fprintf(stderr, "[start %d pinned] feas=%.3e max=%.3e (%.1fs)\n", s,
                feas_of(cp, sr.x), max_abs_row(cp, sr.x), phase_secs());
    }

    // Phase B: the support of the request stays pinned; the off-support
    // coefficients of the targeted conjuncts relax under the continuation.
    std::vector<char> support_frozen(cp.nu, 0);
    for (auto& [i, cval] : cp.obj_targets)
      if (cval != 0.0) support_frozen[i] = 1;
    ls.set_frozen(support_frozen);
    for (size_t ri = 0; ri < rounds.size() && !sr.aborted && !sr.timed_out; ++ri) {
      auto& rd = rounds[ri];
      std::vector<double>& trace = sr.trace.emplace_back();
      bool final_round = ri + 1 == rounds.size();
      int budget = final_round ? cfg.max_iters : cfg.max_iters / 4;
      ls.lm(sr.x, rd.rho, budget / 2, rd.stop, sr, trace);
      if (sr.aborted || sr.timed_out) break;
      double prev = ls.penalty(sr.x, rd.rho);
      int als_budget = final_round ? 12 : 5;
      auto als_t0 = std::chrono::steady_clock::now();
      for (int als = 0; als < als_budget; ++als) {
        if (max_abs_row(cp, sr.x) <= rd.stop || ls.out_of_time()) break;
        if (std::chrono::duration<double>(std::chrono::steady_clock::now() - als_t0).count() >
            (final_round ? 10.0 : 5.0))
          break;
        ls.s_step(sr.x, rd.rho, trace);
        ls.pair_step(sr.x, rd.rho, 10, sr, trace);
        if (sr.timed_out) break;
        double now = ls.penalty(sr.x, rd.rho);
        if (now > 0.9 * prev && als >= 2) break;
        prev = now;
      }
      if (sr.aborted || sr.timed_out) break;
      ls.lm(sr.x, rd.rho, budget, rd.stop, sr, trace);
      if (debug)
        fprintf(stderr,
                "[start %d round %zu rho=%g] feas=%.3e max=%.3e obj=%.3e iters=%ld (%.1fs)\n",
                s, ri, rd.rho, feas_of(cp, sr.x), max_abs_row(cp, sr.x), obj_of(cp, sr.x),
                sr.iters, phase_secs());
    }

    // Phase C: exactness endgame.
    if (!sr.aborted && !sr.timed_out && max_abs_row(cp, sr.x) > 1e-13) {
      std::vector<double>& trace = sr.trace.emplace_back();
      std::vector<double> xr = sr.x;
      ls.reduced_lm(xr, 2 * cfg.max_iters, 1e-13, sr, trace);
      if (feas_of(cp, xr) < feas_of(cp, sr.x)) sr.x = xr;
      if (debug)
        fprintf(stderr, "[start %d reduced] feas=%.3e max=%.3e (%.1fs)\n", s,
                feas_of(cp, sr.x), max_abs_row(cp, sr.x), phase_secs());
    }
    // near-zero template coefficients often must vanish exactly; snapping
    // and freezing them while the rest repolishes escapes the associated
    // quartic valleys
    if (!sr.aborted && !sr.timed_out && max_abs_row(cp, sr.x) > 1e-12) {
      for (double thresh : {1e-4, 1e-3, 5e-3, 2e-2}) {
        std::vector<double> xz = sr.x;
        std::vector<char> frozen(cp.nu, 0);
        int snapped = 0;
        for (int i = 0; i < cp.nu; ++i)
          if (cp.is_s[i] && std::fabs(xz[i]) < thresh) {
            xz[i] = 0.0;
            frozen[i] = 1;
            ++snapped;
          }
        if (!snapped) continue;
        ls.set_frozen(std::move(frozen));
        std::vector<double>& trace = sr.trace.emplace_back();
        for (int als = 0; als < 6; ++als) {
          ls.pair_step(xz, 0.0, 12, sr, trace);
          ls.s_step(xz, 0.0, trace);
          if (max_abs_row(cp, xz) <= 1e-13 || ls.out_of_time()) break;
        }
        ls.reduced_lm(xz, 2 * cfg.max_iters, 1e-13, sr, trace);
        ls.clear_frozen();
        if (feas_of(cp, xz) < feas_of(cp, sr.x)) sr.x = xz;
        if (debug)
          fprintf(stderr, "[start %d snap<%g] froze %d -> feas=%.3e (%.1fs)\n", s, thresh,
                  snapped, feas_of(cp, xz), phase_secs());
        if (max_abs_row(cp, sr.x) <= 1e-12) break;
        if (sr.timed_out) break;
      }
    }
    // drive toward coefficientwise exactness; the verifier checks every
    // residual coefficient, not the aggregate
    Rng kick_rng(cfg.seed * 7778777ULL + static_cast<unsigned long long>(s) + 13);
    for (int attempt = 0; attempt < 2; ++attempt) {
      if (sr.aborted || sr.timed_out) break;
      std::vector<double>& trace = sr.trace.emplace_back();
      double prev_m = max_abs_row(cp, sr.x);
      for (int rep = 0; rep < 15 && prev_m > 1e-13; ++rep) {
        ls.pair_step(sr.x, 0.0, 12, sr, trace);
        ls.s_step(sr.x, 0.0, trace);
        std::vector<double> xr = sr.x;
        ls.reduced_lm(xr, 2 * cfg.max_iters, 1e-13, sr, trace);
        if (feas_of(cp, xr) < feas_of(cp, sr.x)) sr.x = xr;
        if (sr.timed_out) break;
        double m = max_abs_row(cp, sr.x);
        if (m > 0.85 * prev_m) break;
        prev_m = m;
      }
      if (max_abs_row(cp, sr.x) <= 1e-12 || sr.timed_out) break;
      // deterministic kick off a boundary-pinned basin, kept only if it wins
      std::vector<double> xk = sr.x;
      for (int i = 0; i < cp.nu; ++i)
        if (cp.is_s[i]) xk[i] += 2e-3 * kick_rng.gauss();
      std::vector<double>& ktrace = sr.trace.emplace_back();
      ls.pair_step(xk, 0.0, 12, sr, ktrace);
      ls.reduced_lm(xk, cfg.max_iters, 1e-13, sr, ktrace);
      if (feas_of(cp, xk) < feas_of(cp, sr.x)) sr.x = xk;
    }
    // fall back to a fully free polish when the pinned support blocks
    // exactness; a drifted objective is preferable to no certificate
    if (!sr.aborted && !sr.timed_out && max_abs_row(cp, sr.x) > 1e-12) {
      std::vector<double> xf = sr.x;
      ls.clear_frozen();
      std::vector<double>& trace = sr.trace.emplace_back();
      for (int rep = 0; rep < 10; ++rep) {
        ls.pair_step(xf, 0.0, 12, sr, trace);
        ls.s_step(xf, 0.0, trace);
        ls.reduced_lm(xf, 2 * cfg.max_iters, 1e-13, sr, trace);
        if (sr.timed_out || max_abs_row(cp, xf) <= 1e-13) break;
      }
      if (feas_of(cp, xf) < feas_of(cp, sr.x)) sr.x = xf;
      if (debug)
        fprintf(stderr, "[start %d freepolish] feas=%.3e max=%.3e obj=%.3e\n", s,
                feas_of(cp, sr.x), max_abs_row(cp, sr.x), obj_of(cp, sr.x));
    }
    ls.clear_frozen();
    if (debug) {
      std::vector<std::pair<double, int>> worst;
      for (size_t k = 0; k < cp.rows.size(); ++k)
        worst.push_back({-std::fabs(eval_row(cp.rows[k], sr.x)), static_cast<int>(k)});
      std::sort(worst.begin(), worst.end());
      for (int k = 0; k < 8 && k < static_cast<int>(worst.size()); ++k) {
        const QuadConstraint& qc = sys.constraints[cp.row_constraint[worst[k].second]];
        fprintf(stderr, "[start %d worst] |e|=%.3e pair=%d tag=%s\n", s, -worst[k].first,
                qc.pair_id, qc.tag.c_str());
      }
    }
    fix_cholesky_signs(sys, sr.x);
    sr.feas = feas_of(cp, sr.x);
    sr.obj = obj_of(cp, sr.x);
    sr.converged = !sr.aborted && sr.feas <= cfg.tau_res;
    results[s] = std::move(sr);
  };

  int threads = cfg.threads > 0 ? cfg.threads
                                : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, nstarts));
  // batches of `threads` starts; later batches are skipped once a start has
  // reached the exactness floor (deterministic for a fixed thread count)
  for (int base = 0; base < nstarts; base += threads) {
    int count = std::min(threads, nstarts - base);
    if (count == 1) {
      run_start(base);
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < count; ++t) pool.emplace_back([&, t] { run_start(base + t); });
      for (auto& th : pool) th.join();
    }
    bool done = false;
    for (int s = base; s < base + count; ++s)
      done = done || (results[s].converged &&
                      max_abs_row(cp, results[s].x) <= 1e-12);
    bool timed_out_any = false;
    for (int s = base; s < base + count; ++s) timed_out_any |= results[s].timed_out;
    if (done || timed_out_any) break;
  }

  // deterministic selection: converged first, then residual, objective, index
  int best = 0;
  for (int s = 1; s < nstarts; ++s) {
    auto key = [](const StartResult& r) {
      return std::make_tuple(r.converged ? 0 : 1, r.feas, r.obj, r.start);
    };
    if (key(results[s]) < key(results[best])) best = s;
  }

  Solution sol;
  StartResult& w = results[best];
  sol.ok = w.converged;
  sol.x = w.x;
  sol.feas = w.feas;
  sol.max_eq_residual = max_abs_row(cp, w.x);
  sol.obj = w.obj;
  sol.start = w.start;
  sol.penalty_trace = w.trace;
  for (auto& r : results) sol.total_iters += r.iters;
  for (auto& r : results) sol.timed_out = sol.timed_out || r.timed_out;
  sol.message = sol.ok ? "converged"
                       : (sol.timed_out ? "timeout: best residual " + std::to_string(sol.feas)
                                        : "no start reached the residual tolerance");
  return sol;
}

}  // namespace polyinv
