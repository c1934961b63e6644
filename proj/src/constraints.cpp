#include "constraints.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace polyinv {

namespace {

void finish_pair(ConstraintPair& pr) {
  if (pr.gamma.empty()) pr.gamma.push_back(TPoly::constant(1));
  std::set<int> vs;
  auto gv = pr.g.vars();
  vs.insert(gv.begin(), gv.end());
  for (auto& a : pr.gamma) {
    auto av = a.vars();
    vs.insert(av.begin(), av.end());
  }
  pr.vars.assign(vs.begin(), vs.end());
}

void append_pre(std::vector<TPoly>& gamma, const std::vector<Atom>& atoms) {
  for (auto& a : atoms) gamma.push_back(a.poly);
}

void append_pre_subst(std::vector<TPoly>& gamma, const std::vector<Atom>& atoms,
                      const std::map<int, TPoly>& alpha) {
  for (auto& a : atoms) gamma.push_back(a.poly.substitute(alpha));
}

bool trivially_true(const TPoly& t) {
  if (t.is_zero()) return true;
  if (t.terms.size() != 1) return false;
  auto& [m, ce] = *t.terms.begin();
  return m.is_one() && ce.is_constant() && ce.c >= 0;
}

}  // namespace

std::vector<ConstraintPair> generate_pairs(Program& p, const Cfg& cfg, const Annotations& ann,
                                           const TemplateMap& tm, const PairGenConfig& cfgen) {
  std::vector<ConstraintPair> out;
  int next_id = 0;

  auto eta_of = [&](int label) -> const std::vector<TPoly>& { return tm.eta.at(label); };

  auto suppress_eta_out = [&](int fi) {
    // endpoint targets are expressed through the post-condition template
    return cfgen.recursive_mode && !ann.targets_at(p.funcs[fi].lout).empty();
  };

  for (auto& e : cfg.edges) {
    int fi = p.func_of_label(e.src);
    const Function& fn = p.funcs[fi];
    std::string ename = "edge(" + std::to_string(e.src) + "->" + std::to_string(e.dst) + ")";

    switch (e.kind) {
      case Edge::Update: {
        bool into_endpoint = e.dst == fn.lout;
        bool post_pairs = cfgen.recursive_mode && into_endpoint;
        bool eta_pairs = !(into_endpoint && suppress_eta_out(fi));
        if (eta_pairs) {
          const auto& conj = eta_of(e.dst);
          for (size_t ci = 0; ci < conj.size(); ++ci) {
            ConstraintPair pr;
            pr.id = next_id++;
            pr.origin = ename;
            pr.conjunct = static_cast<int>(ci) + 1;
            append_pre(pr.gamma, ann.pre_at(e.src));
            for (auto& h : eta_of(e.src)) pr.gamma.push_back(h);
            append_pre_subst(pr.gamma, ann.pre_at(e.dst), e.update);
            pr.g = conj[ci].substitute(e.update);
            finish_pair(pr);
            out.push_back(std::move(pr));
          }
        }
        if (post_pairs) {
          const auto& conj = tm.mu.at(fi);
          for (size_t ci = 0; ci < conj.size(); ++ci) {
            ConstraintPair pr;
            pr.id = next_id++;
            pr.origin = "post(" + std::to_string(e.src) + "->" + std::to_string(e.dst) + ")";
            pr.conjunct = static_cast<int>(ci) + 1;
            append_pre(pr.gamma, ann.pre_at(e.src));
            for (auto& h : eta_of(e.src)) pr.gamma.push_back(h);
            append_pre_subst(pr.gamma, ann.pre_at(e.dst), e.update);
            pr.g = conj[ci].substitute(e.update);
            finish_pair(pr);
            out.push_back(std::move(pr));
          }
        }
        break;
      }

      case Edge::Guard: {
        auto disjuncts = normalize_predicate(e.guard);
        const auto& conj = eta_of(e.dst);
        for (size_t di = 0; di < disjuncts.size(); ++di) {
          for (size_t ci = 0; ci < conj.size(); ++ci) {
            ConstraintPair pr;
            pr.id = next_id++;
            pr.origin = ename;
            pr.conjunct = static_cast<int>(ci) + 1;
            pr.disjunct = static_cast<int>(di) + 1;
            append_pre(pr.gamma, ann.pre_at(e.src));
            for (auto& h : eta_of(e.src)) pr.gamma.push_back(h);
            append_pre(pr.gamma, ann.pre_at(e.dst));
            for (auto& a : disjuncts[di].atoms) pr.gamma.push_back(a);
            pr.g = conj[ci];
            finish_pair(pr);
            out.push_back(std::move(pr));
          }
        }
        break;
      }

      case Edge::Star: {
        const auto& conj = eta_of(e.dst);
        for (size_t ci = 0; ci < conj.size(); ++ci) {
          ConstraintPair pr;
          pr.id = next_id++;
          pr.origin = ename;
          pr.conjunct = static_cast<int>(ci) + 1;
          append_pre(pr.gamma, ann.pre_at(e.src));
          for (auto& h : eta_of(e.src)) pr.gamma.push_back(h);
          append_pre(pr.gamma, ann.pre_at(e.dst));
          pr.g = conj[ci];
          finish_pair(pr);
          out.push_back(std::move(pr));
        }
        break;
      }

      case Edge::Bot: {
        if (!cfgen.recursive_mode)
          throw semantic_error("program contains calls; run in recursive mode");
        const Stmt* call = e.call;
        const Function& callee = p.funcs[call->callee];
        const auto& conj = eta_of(e.dst);

        // parameter/copy renaming into caller variables
        std::map<int, TPoly> entry_subst;
        for (size_t i = 0; i < callee.params.size(); ++i) {
          entry_subst[callee.params[i]] = TPoly::var(call->args[i]);
          entry_subst[callee.bars[i]] = TPoly::var(call->args[i]);
        }
        std::set<int> callee_iface(callee.params.begin(), callee.params.end());
        callee_iface.insert(callee.bars.begin(), callee.bars.end());

        for (size_t ci = 0; ci < conj.size(); ++ci) {
          ConstraintPair pr;
          pr.id = next_id++;
          pr.origin = "call(" + std::to_string(e.src) + "->" + std::to_string(e.dst) + ")";
          pr.conjunct = static_cast<int>(ci) + 1;

          int vstar = p.vars.add(p.vars.name(call->lhs) + "*");
          std::map<int, TPoly> ret_subst;  // for the callee summary
          for (size_t i = 0; i < callee.params.size(); ++i)
            ret_subst[callee.bars[i]] = TPoly::var(call->args[i]);
          ret_subst[callee.ret] = TPoly::var(vstar);
          std::map<int, TPoly> lhs_subst;  // for Pre(l') and the consequent
          lhs_subst[call->lhs] = TPoly::var(vstar);

          append_pre(pr.gamma, ann.pre_at(e.src));
          for (auto& h : eta_of(e.src)) pr.gamma.push_back(h);
          // callee entry condition over its interface variables only; the
          // zero-initialization facts concern the callee's own locals, which
          // have no caller-side meaning on an abstract step
          for (auto& a : ann.pre_at(callee.lin)) {
            auto av = a.poly.vars();
            bool iface_only = std::all_of(av.begin(), av.end(),
                                          [&](int v) { return callee_iface.count(v) > 0; });
            if (!iface_only) continue;
            TPoly sub = a.poly.substitute(entry_subst);
            if (!trivially_true(sub)) pr.gamma.push_back(sub);
          }
          if (tm.mu.find(call->callee) == tm.mu.end())
            throw semantic_error("no post-condition template for callee '" + callee.name + "'");
          for (auto& m : tm.mu.at(call->callee)) pr.gamma.push_back(m.substitute(ret_subst));
          append_pre_subst(pr.gamma, ann.pre_at(e.dst), lhs_subst);
          pr.g = conj[ci].substitute(lhs_subst);
          finish_pair(pr);
          out.push_back(std::move(pr));
        }
        break;
      }
    }
  }

  // initiation
  for (size_t fi = 0; fi < p.funcs.size(); ++fi) {
    const Function& fn = p.funcs[fi];
    const auto& conj = eta_of(fn.lin);
    for (size_t ci = 0; ci < conj.size(); ++ci) {
      ConstraintPair pr;
      pr.id = next_id++;
      pr.origin = "init(" + fn.name + ")";
      pr.conjunct = static_cast<int>(ci) + 1;
      append_pre(pr.gamma, ann.pre_at(fn.lin));
      pr.g = conj[ci];
      finish_pair(pr);
      out.push_back(std::move(pr));
    }
  }

  return out;
}

std::string dump_pairs(const std::vector<ConstraintPair>& pairs, const Program& p,
                       const UnknownTable& u) {
  std::ostringstream os;
  for (auto& pr : pairs) {
    os << "pair " << pr.id << " " << pr.origin << " conjunct=" << pr.conjunct
       << " disjunct=" << pr.disjunct << "\n";
    for (auto& a : pr.gamma) os << a.str(p.vars, u) << "\n";
    os << "|-\n" << pr.g.str(p.vars, u) << "\n\n";
  }
  return os.str();
}

}  // namespace polyinv
