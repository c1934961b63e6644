#include "pairsfile.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace polyinv {

namespace {

// minimal polynomial expression parser: + - * ^ ( ) numbers identifiers
struct PolyParser {
  const std::string& s;
  size_t i = 0;
  PairsFile& pf;

  PolyParser(const std::string& text, PairsFile& f) : s(text), pf(f) {}

  [[noreturn]] void fail(const std::string& msg) {
    throw std::runtime_error("pairs file: " + msg + " in '" + s + "'");
  }
  void skip_ws() {
    while (i < s.size() && isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool eat(char c) {
    skip_ws();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }

  TPoly parse() {
    TPoly e = parse_expr();
    skip_ws();
    if (i != s.size()) fail("trailing input");
    return e;
  }

  TPoly parse_expr() {
    TPoly e = parse_term();
    while (true) {
      skip_ws();
      if (eat('+'))
        e += parse_term();
      else if (eat('-'))
        e += parse_term().scaled(-1);
      else
        return e;
    }
  }

  TPoly parse_term() {
    TPoly e = parse_factor();
    while (true) {
      skip_ws();
      if (eat('*'))
        e = e * parse_factor();
      else
        return e;
    }
  }

  TPoly parse_factor() {
    TPoly base = parse_primary();
    skip_ws();
    if (eat('^')) {
      skip_ws();
      size_t j = i;
      while (j < s.size() && isdigit(static_cast<unsigned char>(s[j]))) ++j;
      if (j == i) fail("expected integer exponent");
      int e = std::stoi(s.substr(i, j - i));
      i = j;
      TPoly acc = TPoly::constant(1);
      for (int k = 0; k < e; ++k) acc = acc * base;
      return acc;
    }
    return base;
  }

  TPoly parse_primary() {
    skip_ws();
    if (i >= s.size()) fail("unexpected end");
    char c = s[i];
    if (c == '(') {
      ++i;
      TPoly e = parse_expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (c == '-') {
      ++i;
      return parse_factor().scaled(-1);
    }
    if (isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t j = i;
      while (j < s.size() &&
             (isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.'))
        ++j;
      Rat q = rat_from_decimal(s.substr(i, j - i));
      i = j;
      return TPoly::constant(q);
    }
    if (isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < s.size() &&
             (isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_'))
        ++j;
      std::string name = s.substr(i, j - i);
      i = j;
      auto uit = pf.unknown_ids.find(name);
      if (uit != pf.unknown_ids.end())
        return TPoly::from_coef(Monomial::one(), CoefExpr::unknown(uit->second));
      // program variable, registered on first use
      for (int v = 0; v < pf.vars.size(); ++v)
        if (pf.vars.name(v) == name) return TPoly::var(v);
      return TPoly::var(pf.vars.add(name));
    }
    fail("unexpected character");
  }
};

void finish(ConstraintPair& pr) {
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

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

PairsFile parse_pairs_file(const std::string& text) {
  PairsFile pf;
  std::istringstream is(text);
  std::string raw;
  ConstraintPair cur;
  bool in_pair = false, after_turnstile = false;
  int next_id = 0;
  std::vector<std::pair<std::string, double>> targets;

  auto flush = [&]() {
    if (!in_pair) return;
    if (!after_turnstile || cur.g.is_zero())
      throw std::runtime_error("pairs file: pair '" + cur.origin + "' has no consequent");
    finish(cur);
    cur.id = next_id++;
    pf.pairs.push_back(std::move(cur));
    cur = ConstraintPair{};
    in_pair = false;
    after_turnstile = false;
  };

  while (std::getline(is, raw)) {
    std::string line = trim(raw);
    if (!line.empty() && line[0] == '#') continue;
    if (line.rfind("//", 0) == 0) continue;
    if (line.empty()) {
      flush();
      continue;
    }
    if (line.rfind("unknowns:", 0) == 0) {
      std::istringstream ls(line.substr(9));
      std::string name;
      while (ls >> name)
        pf.unknown_ids[name] = pf.unknowns.add(UnknownKind::STemplate, name);
      continue;
    }
    if (line.rfind("mode:", 0) == 0) {
      std::string m = trim(line.substr(5));
      if (m == "strict")
        pf.strict_mode = true;
      else if (m == "nonstrict")
        pf.strict_mode = false;
      else
        throw std::runtime_error("pairs file: unknown mode '" + m + "'");
      continue;
    }
    if (line.rfind("target:", 0) == 0) {
      std::istringstream ls(line.substr(7));
      std::string name;
      double v;
      if (!(ls >> name >> v))
        throw std::runtime_error("pairs file: bad target line '" + line + "'");
      targets.push_back({name, v});
      continue;
    }
    if (line.rfind("pair", 0) == 0) {
      flush();
      in_pair = true;
      cur.origin = trim(line.substr(4));
      if (cur.origin.empty()) cur.origin = "pair" + std::to_string(next_id);
      continue;
    }
    if (line == "|-") {
      if (!in_pair) throw std::runtime_error("pairs file: '|-' outside a pair");
      after_turnstile = true;
      continue;
    }
    if (!in_pair) throw std::runtime_error("pairs file: polynomial outside a pair: " + line);
    PolyParser pp(line, pf);
    TPoly poly = pp.parse();
    if (after_turnstile) {
      if (!cur.g.is_zero())
        throw std::runtime_error("pairs file: multiple consequents in '" + cur.origin + "'");
      cur.g = std::move(poly);
    } else {
      cur.gamma.push_back(std::move(poly));
    }
  }
  flush();

  for (auto& [name, v] : targets) {
    auto it = pf.unknown_ids.find(name);
    if (it == pf.unknown_ids.end())
      throw std::runtime_error("pairs file: target for undeclared unknown '" + name + "'");
    pf.objective.targets.push_back({it->second, v});
    Rat c = rat_from_double(v);
    CoefExpr sq = (CoefExpr::unknown(it->second) - CoefExpr::constant(c)) *
                  (CoefExpr::unknown(it->second) - CoefExpr::constant(c));
    pf.objective.expr += sq;
  }
  if (!targets.empty()) pf.objective.desc = "distance to requested coefficients";
  return pf;
}

}  // namespace polyinv
