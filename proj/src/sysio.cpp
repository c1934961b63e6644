#include "sysio.hpp"

#include <sstream>

namespace polyinv {

namespace {

char kind_char(UnknownKind k) {
  switch (k) {
    case UnknownKind::STemplate: return 's';
    case UnknownKind::SPost: return 'p';
    case UnknownKind::T: return 't';
    case UnknownKind::L: return 'l';
    case UnknownKind::Eps: return 'e';
  }
  return '?';
}

UnknownKind kind_of(char c) {
  switch (c) {
    case 's': return UnknownKind::STemplate;
    case 'p': return UnknownKind::SPost;
    case 't': return UnknownKind::T;
    case 'l': return UnknownKind::L;
    case 'e': return UnknownKind::Eps;
  }
  throw std::runtime_error("bad unknown kind in system file");
}

Rat parse_scalar(const std::string& s) {
  auto slash = s.find('/');
  if (slash == std::string::npos) return Rat(mpz_class(s, 10));
  Rat q(mpz_class(s.substr(0, slash), 10), mpz_class(s.substr(slash + 1), 10));
  q.canonicalize();
  return q;
}

// one term of CoefExpr::str: scalar, name, scalar*name, name*name, name^2,
// scalar*name*name, scalar*name^2
void add_term(CoefExpr& e, const std::string& term, const std::map<std::string, int>& ids,
              bool negate) {
  std::vector<std::string> parts;
  size_t start = 0;
  for (size_t i = 0; i <= term.size(); ++i) {
    if (i == term.size() || term[i] == '*') {
      parts.push_back(term.substr(start, i - start));
      start = i + 1;
    }
  }
  Rat k = 1;
  std::vector<int> us;
  for (auto& p : parts) {
    if (p.empty()) throw std::runtime_error("bad term: " + term);
    if ((p[0] >= '0' && p[0] <= '9') || p[0] == '-' || p[0] == '/') {
      k *= parse_scalar(p);
    } else if (p.size() > 2 && p.substr(p.size() - 2) == "^2") {
      int id = ids.at(p.substr(0, p.size() - 2));
      us.push_back(id);
      us.push_back(id);
    } else {
      us.push_back(ids.at(p));
    }
  }
  if (negate) k = -k;
  CoefExpr t;
  if (us.empty())
    t = CoefExpr::constant(k);
  else if (us.size() == 1)
    t = CoefExpr::unknown(us[0], k);
  else if (us.size() == 2)
    t = CoefExpr::unknown(us[0]) * CoefExpr::unknown(us[1], k);
  else
    throw std::runtime_error("term degree > 2: " + term);
  e += t;
}

CoefExpr parse_expr(const std::string& s, const std::map<std::string, int>& ids) {
  CoefExpr e;
  size_t i = 0;
  bool neg = false;
  if (i < s.size() && s[i] == '-') {
    neg = true;
    ++i;
  }
  std::string cur;
  auto flush = [&]() {
    if (!cur.empty()) add_term(e, cur, ids, neg);
    cur.clear();
  };
  while (i < s.size()) {
    if (i + 2 < s.size() && s[i] == ' ' && (s[i + 1] == '+' || s[i + 1] == '-') &&
        s[i + 2] == ' ') {
      flush();
      neg = s[i + 1] == '-';
      i += 3;
      continue;
    }
    cur.push_back(s[i++]);
  }
  flush();
  return e;
}

}  // namespace

std::string export_canonical(const QuadSystem& sys, const Objective& obj) {
  std::ostringstream os;
  os << "quadsys strict=" << (sys.strict ? 1 : 0) << " upsilon=" << sys.upsilon
     << " unknowns=" << sys.unknowns.size() << " constraints=" << sys.size() << "\n";
  for (int i = 0; i < sys.unknowns.size(); ++i) {
    const UnknownInfo& ui = sys.unknowns.info(i);
    os << "U " << i << " " << kind_char(ui.kind) << " " << (ui.bounded_below ? 1 : 0) << " "
       << (ui.unit_hint ? 1 : 0) << " " << ui.name << "\n";
  }
  for (auto& qc : sys.constraints) {
    os << (qc.kind == QuadConstraint::Eq ? "E" : "N") << "[" << qc.pair_id << ":" << qc.tag
       << "]: " << qc.expr.str(sys.unknowns)
       << (qc.kind == QuadConstraint::Eq ? " = 0" : " >= 0") << "\n";
  }
  if (!obj.expr.is_zero()) os << "O: " << obj.expr.str(sys.unknowns) << "\n";
  for (auto& [id, v] : obj.targets) {
    char buf[64];
    snprintf(buf, sizeof buf, "%.17g", v);
    os << "T: " << sys.unknowns.name(id) << " " << buf << "\n";
  }
  return os.str();
}

ImportedSystem import_canonical(const std::string& text) {
  ImportedSystem out;
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line.rfind("quadsys ", 0) != 0)
    throw std::runtime_error("not a canonical system file");
  {
    std::istringstream hs(line.substr(8));
    std::string kv;
    while (hs >> kv) {
      auto eq = kv.find('=');
      std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
      if (k == "strict") out.sys.strict = v == "1";
      if (k == "upsilon") out.sys.upsilon = std::stoi(v);
    }
  }
  std::map<std::string, int> ids;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == 'U') {
      std::istringstream ls(line.substr(2));
      int id;
      char kc;
      int bb, hint;
      std::string name;
      ls >> id >> kc >> bb >> hint >> name;
      int got = out.sys.unknowns.add(kind_of(kc), name, bb != 0, hint != 0);
      if (got != id) throw std::runtime_error("unknown ids out of order in system file");
      ids[name] = id;
    } else if (line[0] == 'E' || line[0] == 'N') {
      bool eq = line[0] == 'E';
      auto lb = line.find('[');
      auto colon = line.find(':', lb);
      auto rb = line.find("]: ", colon);
      if (lb == std::string::npos || colon == std::string::npos || rb == std::string::npos)
        throw std::runtime_error("bad constraint line: " + line);
      QuadConstraint qc;
      qc.kind = eq ? QuadConstraint::Eq : QuadConstraint::Nonneg;
      qc.pair_id = std::stoi(line.substr(lb + 1, colon - lb - 1));
      qc.tag = line.substr(colon + 1, rb - colon - 1);
      std::string rest = line.substr(rb + 3);
      std::string suffix = eq ? " = 0" : " >= 0";
      if (rest.size() < suffix.size() ||
          rest.substr(rest.size() - suffix.size()) != suffix)
        throw std::runtime_error("bad constraint line: " + line);
      qc.expr = parse_expr(rest.substr(0, rest.size() - suffix.size()), ids);
      out.sys.constraints.push_back(std::move(qc));
    } else if (line[0] == 'O') {
      out.obj.expr = parse_expr(line.substr(3), ids);
    } else if (line[0] == 'T') {
      std::istringstream ls(line.substr(3));
      std::string name;
      double v;
      ls >> name >> v;
      out.obj.targets.push_back({ids.at(name), v});
    }
  }
  return out;
}

std::string export_ampl(const QuadSystem& sys, const Objective& obj, double eps_min) {
  std::ostringstream os;
  os << "# quadratic feasibility system, " << sys.size() << " constraints\n";
  for (int i = 0; i < sys.unknowns.size(); ++i) {
    const UnknownInfo& ui = sys.unknowns.info(i);
    os << "var " << ui.name;
    if (ui.bounded_below) {
      if (ui.kind == UnknownKind::Eps) {
        char buf[64];
        snprintf(buf, sizeof buf, "%.17g", eps_min);
        os << " >= " << buf;
      } else {
        os << " >= 0";
      }
    }
    os << ";\n";
  }
  if (obj.expr.is_zero())
    os << "minimize obj: 0;\n";
  else
    os << "minimize obj: " << obj.expr.str(sys.unknowns) << ";\n";
  int k = 0;
  for (auto& qc : sys.constraints) {
    os << "subject to c" << k++ << ": " << qc.expr.str(sys.unknowns)
       << (qc.kind == QuadConstraint::Eq ? " = 0" : " >= 0") << ";\n";
  }
  return os.str();
}

}  // namespace polyinv
