#include "interp.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace polyinv {

namespace {

using Valuation = std::map<int, Rat>;

struct Sampler {
  SplitMix rng;
  const EmpiricalConfig& cfg;
  Sampler(unsigned long long seed, const EmpiricalConfig& c) : rng(seed), cfg(c) {}
  Rat grid_value() {
    long span = 2L * cfg.grid_halfwidth + 1;
    long k = static_cast<long>(rng.below(static_cast<unsigned long long>(span))) -
             cfg.grid_halfwidth;
    Rat q(k, cfg.grid_denom);
    q.canonicalize();
    return q;
  }
  bool coin() { return rng.below(2) == 1; }
};

bool atoms_hold(const std::vector<Atom>& atoms, const Valuation& nu) {
  static const std::vector<Rat> no_sigma;
  for (auto& a : atoms) {
    Rat v = a.poly.eval_point(nu, no_sigma);
    if (a.strict ? !(v > 0) : !(v >= 0)) return false;
  }
  return true;
}

bool assertion_holds(const std::vector<RPoly>& conj, const Valuation& nu, bool strict) {
  for (auto& p : conj) {
    Rat v = p.eval(nu);
    if (strict ? !(v > 0) : !(v >= 0)) return false;
  }
  return true;
}

bool guard_holds(const Pred& g, const Valuation& nu) {
  static const std::vector<Rat> no_sigma;
  return pred_holds(g, nu, no_sigma);
}

}  // namespace

std::string describe_counterexample(const Counterexample& cex, const Program& p) {
  std::ostringstream os;
  os << cex.what << " on step " << cex.from_label << " -> " << cex.to_label << " with ";
  bool first = true;
  for (auto& [v, q] : cex.before) {
    if (!first) os << ", ";
    first = false;
    os << p.vars.name(v) << "=" << rat_to_string(q);
  }
  return os.str();
}

EmpiricalResult empirical_check(const Program& p, const Cfg& cfg, const Annotations& ann,
                                const InvariantReport& inv, const EmpiricalConfig& ecfg) {
  EmpiricalResult res;
  Sampler sampler(ecfg.seed, ecfg);

  std::set<int> claimed(inv.claimed_labels.begin(), inv.claimed_labels.end());
  auto claims = [&](int l) { return claimed.empty() || claimed.count(l) > 0; };

  std::vector<int> source_labels;
  for (int l = 1; l <= p.label_count(); ++l)
    if (p.label(l).kind != LabelKind::E) source_labels.push_back(l);
  if (source_labels.empty()) {
    res.pass = true;
    return res;
  }

  auto sample_at = [&](int label, Valuation& nu) -> bool {
    const Function& fn = p.funcs[p.func_of_label(label)];
    for (int attempt = 0; attempt < ecfg.rejection_cap; ++attempt) {
      nu.clear();
      if (label == fn.lin) {
        // zero-initialized locals, frozen copies tied to parameters
        for (int v : fn.vars) nu[v] = 0;
        for (size_t i = 0; i < fn.params.size(); ++i) {
          Rat val = sampler.grid_value();
          nu[fn.params[i]] = val;
          nu[fn.bars[i]] = val;
        }
      } else {
        for (int v : fn.vars) nu[v] = sampler.grid_value();
      }
      if (atoms_hold(ann.pre_at(label), nu)) return true;
    }
    return false;
  };

  long attempts_left = ecfg.trials * 40;
  while (res.checked < ecfg.trials && attempts_left-- > 0) {
    int l0 = source_labels[sampler.rng.below(source_labels.size())];
    const Function& fn = p.funcs[p.func_of_label(l0)];
    Valuation nu0;
    if (!sample_at(l0, nu0)) {
      ++res.starved;
      continue;
    }

    // initiation
    if (l0 == fn.lin && claims(l0)) {
      auto it = inv.label_assertions.find(l0);
      if (it != inv.label_assertions.end() &&
          !assertion_holds(it->second, nu0, inv.strict)) {
        res.cex = Counterexample{l0, l0, nu0, nu0, "initiation violated"};
        res.detail = describe_counterexample(*res.cex, p);
        return res;
      }
    }

    // consecution only matters when the invariant holds before the step
    auto it0 = inv.label_assertions.find(l0);
    if (it0 == inv.label_assertions.end() || !assertion_holds(it0->second, nu0, inv.strict)) {
      ++res.checked;
      continue;
    }

    // choose the successor the semantics allows
    const std::vector<int>& outs = cfg.out_edges[l0];
    std::vector<int> enabled;
    for (int ei : outs) {
      const Edge& e = cfg.edges[ei];
      if (e.kind == Edge::Guard) {
        if (guard_holds(e.guard, nu0)) enabled.push_back(ei);
      } else {
        enabled.push_back(ei);
      }
    }
    if (enabled.empty()) {
      ++res.checked;
      continue;
    }
    int ei = enabled[sampler.rng.below(enabled.size())];  // seeded coin for stars
    const Edge& e = cfg.edges[ei];

    Valuation nu1 = nu0;
    bool valid = true;
    if (e.kind == Edge::Update) {
      static const std::vector<Rat> no_sigma;
      Valuation upd;
      for (auto& [v, rhs] : e.update) upd[v] = rhs.eval_point(nu0, no_sigma);
      for (auto& [v, q] : upd) nu1[v] = q;
    } else if (e.kind == Edge::Bot) {
      const Stmt* call = e.call;
      const Function& callee = p.funcs[call->callee];
      // callee entry condition over its interface, expressed on caller values
      Valuation entry;
      for (size_t i = 0; i < callee.params.size(); ++i) {
        entry[callee.params[i]] = nu0.at(call->args[i]);
        entry[callee.bars[i]] = nu0.at(call->args[i]);
      }
      std::set<int> iface(callee.params.begin(), callee.params.end());
      iface.insert(callee.bars.begin(), callee.bars.end());
      for (auto& a : ann.pre_at(callee.lin)) {
        auto av = a.poly.vars();
        if (!std::all_of(av.begin(), av.end(), [&](int v) { return iface.count(v) > 0; }))
          continue;
        static const std::vector<Rat> no_sigma;
        if (a.poly.eval_point(entry, no_sigma) < 0) {
          valid = false;
          break;
        }
      }
      if (valid) {
        // abstract return value constrained by the callee's summary
        auto post_it = inv.post_conditions.find(call->callee);
        bool found = false;
        for (int attempt = 0; attempt < ecfg.rejection_cap && !found; ++attempt) {
          Rat rv = sampler.grid_value();
          Valuation post_nu = entry;
          post_nu[callee.ret] = rv;
          bool ok = true;
          if (post_it != inv.post_conditions.end())
            ok = assertion_holds(post_it->second, post_nu, inv.strict);
          if (ok) {
            nu1[call->lhs] = rv;
            found = true;
          }
        }
        if (!found) {
          ++res.starved;
          valid = false;
        }
      }
    }
    if (!valid) continue;
    if (!atoms_hold(ann.pre_at(e.dst), nu1)) continue;  // invalid unit path

    ++res.checked;

    if (claims(e.dst)) {
      auto it1 = inv.label_assertions.find(e.dst);
      if (it1 != inv.label_assertions.end() &&
          !assertion_holds(it1->second, nu1, inv.strict)) {
        res.cex = Counterexample{l0, e.dst, nu0, nu1, "consecution violated"};
        res.detail = describe_counterexample(*res.cex, p);
        return res;
      }
    }
    if (e.dst == fn.lout) {
      auto pit = inv.post_conditions.find(p.func_of_label(l0));
      if (pit != inv.post_conditions.end() &&
          !assertion_holds(pit->second, nu1, inv.strict)) {
        res.cex = Counterexample{l0, e.dst, nu0, nu1, "post-condition consecution violated"};
        res.detail = describe_counterexample(*res.cex, p);
        return res;
      }
    }
  }

  if (res.checked < ecfg.trials) {
    res.inconclusive = true;
    res.detail = "sampling starvation: only " + std::to_string(res.checked) + " of " +
                 std::to_string(ecfg.trials) + " trials completed";
    return res;
  }
  res.pass = true;
  return res;
}

}  // namespace polyinv
