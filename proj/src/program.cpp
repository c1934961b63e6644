#include <sstream>

#include "frontend.hpp"

namespace polyinv {

namespace {

// Polynomials print in graded-lex term order with exact decimal scalars, so
// a reparse reproduces the same canonical form.
std::string poly_src(const TPoly& p, const VarTable& vars) {
  if (p.terms.empty()) return "0";
  std::string s;
  bool first = true;
  for (auto& [m, ce] : p.terms) {
    Rat k = ce.c;  // source polynomials have constant coefficients
    bool neg = k < 0;
    if (neg) k = -k;
    s += first ? (neg ? "-" : "") : (neg ? " - " : " + ");
    first = false;
    std::string mono;
    for (auto& [v, e] : m.exps) {
      if (!mono.empty()) mono += "*";
      mono += vars.name(v);
      if (e > 1) mono += "^" + std::to_string(e);
    }
    if (mono.empty())
      s += rat_to_decimal(k);
    else if (k == 1)
      s += mono;
    else
      s += rat_to_decimal(k) + "*" + mono;
  }
  return s;
}

std::string atom_src(const Atom& a, const VarTable& vars) {
  return poly_src(a.poly, vars) + (a.strict ? " > 0" : " >= 0");
}

std::string pred_src(const Pred& p, const VarTable& vars) {
  switch (p.kind) {
    case Pred::ATOM:
      return atom_src(p.atom, vars);
    case Pred::NOT:
      return "not (" + pred_src(p.kids[0], vars) + ")";
    case Pred::AND:
    case Pred::OR: {
      std::string op = p.kind == Pred::AND ? " and " : " or ";
      std::string s;
      for (size_t i = 0; i < p.kids.size(); ++i) {
        if (i) s += op;
        bool paren = p.kids[i].kind == Pred::AND || p.kids[i].kind == Pred::OR;
        s += paren ? "(" + pred_src(p.kids[i], vars) + ")" : pred_src(p.kids[i], vars);
      }
      return s;
    }
  }
  return "";
}

void print_annotations(std::ostringstream& os, const Stmt& s, const VarTable& vars,
                       const std::string& indent) {
  if (!s.pre_atoms.empty()) {
    os << indent << "# ";
    for (size_t i = 0; i < s.pre_atoms.size(); ++i) {
      if (i) os << " and ";
      os << atom_src(s.pre_atoms[i], vars);
    }
    os << " #\n";
  }
  if (!s.target_atoms.empty()) {
    os << indent << "[ ";
    for (size_t i = 0; i < s.target_atoms.size(); ++i) {
      if (i) os << " and ";
      os << atom_src(s.target_atoms[i], vars);
    }
    os << " ]\n";
  }
}

void print_body(std::ostringstream& os, const std::vector<Stmt>& body, const VarTable& vars,
                const Program& p, int depth) {
  std::string indent(static_cast<size_t>(depth) * 2, ' ');
  for (size_t i = 0; i < body.size(); ++i) {
    const Stmt& s = body[i];
    print_annotations(os, s, vars, indent);
    switch (s.kind) {
      case Stmt::Skip:
        os << indent << "skip";
        break;
      case Stmt::Assign:
        os << indent << vars.name(s.lhs) << " := " << poly_src(s.rhs, vars);
        break;
      case Stmt::Return:
        os << indent << "return " << poly_src(s.rhs, vars);
        break;
      case Stmt::Call: {
        os << indent << vars.name(s.lhs) << " := " << s.callee_name << "(";
        for (size_t a = 0; a < s.args.size(); ++a) {
          if (a) os << ", ";
          os << vars.name(s.args[a]);
        }
        os << ")";
        break;
      }
      case Stmt::If:
      case Stmt::IfStar:
        os << indent << "if " << (s.kind == Stmt::IfStar ? "*" : pred_src(s.guard, vars))
           << " then\n";
        print_body(os, s.body1, vars, p, depth + 1);
        os << indent << "else\n";
        print_body(os, s.body2, vars, p, depth + 1);
        os << indent << "fi";
        break;
      case Stmt::While:
        os << indent << "while " << pred_src(s.guard, vars) << " do\n";
        print_body(os, s.body1, vars, p, depth + 1);
        os << indent << "od";
        break;
    }
    if (i + 1 < body.size()) os << ";";
    os << "\n";
  }
}

}  // namespace

std::string pretty_print(const Program& p) {
  std::ostringstream os;
  for (size_t fi = 0; fi < p.funcs.size(); ++fi) {
    const Function& fn = p.funcs[fi];
    if (fi) os << "\n";
    os << fn.name << "(";
    for (size_t i = 0; i < fn.params.size(); ++i) {
      if (i) os << ", ";
      os << p.vars.name(fn.params[i]);
    }
    os << ") {\n";
    print_body(os, fn.body, p.vars, p, 1);
    if (!fn.end_pre.empty()) {
      os << "  # ";
      for (size_t i = 0; i < fn.end_pre.size(); ++i) {
        if (i) os << " and ";
        os << atom_src(fn.end_pre[i], p.vars);
      }
      os << " #\n";
    }
    if (!fn.end_targets.empty()) {
      os << "  [ ";
      for (size_t i = 0; i < fn.end_targets.size(); ++i) {
        if (i) os << " and ";
        os << atom_src(fn.end_targets[i], p.vars);
      }
      os << " ]\n";
    }
    os << "}\n";
  }
  return os.str();
}

namespace {

bool atoms_equal(const std::vector<Atom>& a, const std::vector<Atom>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!(a[i].poly == b[i].poly && a[i].strict == b[i].strict)) return false;
  return true;
}

}  // namespace

bool stmt_equal(const Stmt& a, const Stmt& b) {
  if (a.kind != b.kind || a.lhs != b.lhs || a.args != b.args ||
      a.callee_name != b.callee_name)
    return false;
  if (!(a.rhs == b.rhs) || !(a.guard == b.guard)) return false;
  if (!atoms_equal(a.pre_atoms, b.pre_atoms) || !atoms_equal(a.target_atoms, b.target_atoms))
    return false;
  if (a.body1.size() != b.body1.size() || a.body2.size() != b.body2.size()) return false;
  for (size_t i = 0; i < a.body1.size(); ++i)
    if (!stmt_equal(a.body1[i], b.body1[i])) return false;
  for (size_t i = 0; i < a.body2.size(); ++i)
    if (!stmt_equal(a.body2[i], b.body2[i])) return false;
  return true;
}

bool program_equal(const Program& a, const Program& b) {
  if (a.funcs.size() != b.funcs.size()) return false;
  for (size_t i = 0; i < a.funcs.size(); ++i) {
    const Function& fa = a.funcs[i];
    const Function& fb = b.funcs[i];
    if (fa.name != fb.name || fa.params != fb.params || fa.bars != fb.bars ||
        fa.ret != fb.ret || fa.vars != fb.vars)
      return false;
    if (fa.body.size() != fb.body.size()) return false;
    for (size_t j = 0; j < fa.body.size(); ++j)
      if (!stmt_equal(fa.body[j], fb.body[j])) return false;
    if (!atoms_equal(fa.end_pre, fb.end_pre) || !atoms_equal(fa.end_targets, fb.end_targets))
      return false;
  }
  return true;
}

std::string dump_cfg(const Program& p, const Cfg& cfg) {
  std::ostringstream os;
  UnknownTable dummy;
  for (size_t fi = 0; fi < p.funcs.size(); ++fi) {
    const Function& fn = p.funcs[fi];
    os << "function " << fn.name << " in=" << fn.lin << " out=" << fn.lout << " vars=[";
    for (size_t i = 0; i < fn.vars.size(); ++i) {
      if (i) os << ", ";
      os << p.vars.name(fn.vars[i]);
    }
    os << "]\n";
  }
  for (int l = 1; l <= p.label_count(); ++l) {
    os << l << label_kind_char(p.label(l).kind) << ":\n";
    for (int ei : cfg.out_edges[l]) {
      const Edge& e = cfg.edges[ei];
      os << "  -> " << e.dst << " ";
      switch (e.kind) {
        case Edge::Update: {
          os << "[";
          bool first = true;
          for (auto& [v, rhs] : e.update) {
            if (!first) os << ", ";
            first = false;
            os << p.vars.name(v) << " <- " << rhs.str(p.vars, dummy);
          }
          os << "]";
          break;
        }
        case Edge::Guard:
          os << "guard " << e.guard.str(p.vars, dummy);
          break;
        case Edge::Bot:
          os << "bot call " << e.call->callee_name;
          break;
        case Edge::Star:
          os << "star";
          break;
      }
      os << "\n";
    }
  }
  return os.str();
}

}  // namespace polyinv
