#include <cassert>
#include <functional>

#include "frontend.hpp"

namespace polyinv {

namespace {

enum class Tok {
  Ident,
  Number,
  LParen,
  RParen,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  Comma,
  Semi,
  Assign,  // :=
  Lt,
  Le,
  Ge,
  Gt,
  Plus,
  Minus,
  Star,
  Caret,
  Hash,
  And,
  Or,
  Not,
  KwSkip,
  KwIf,
  KwThen,
  KwElse,
  KwFi,
  KwWhile,
  KwDo,
  KwOd,
  KwReturn,
  KwTrue,
  KwFalse,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  int line, col;
};

struct Lexer {
  const std::string& src;
  size_t pos = 0;
  int line = 1, col = 1;
  std::vector<Token> tokens;

  explicit Lexer(const std::string& s) : src(s) {}

  [[noreturn]] void fail(const std::string& msg) { throw syntax_error(msg, line, col); }

  void advance(size_t n = 1) {
    for (size_t i = 0; i < n && pos < src.size(); ++i, ++pos) {
      if (src[pos] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  }

  void run() {
    static const std::map<std::string, Tok> keywords = {
        {"skip", Tok::KwSkip},   {"if", Tok::KwIf},     {"then", Tok::KwThen},
        {"else", Tok::KwElse},   {"fi", Tok::KwFi},     {"while", Tok::KwWhile},
        {"do", Tok::KwDo},       {"od", Tok::KwOd},     {"return", Tok::KwReturn},
        {"and", Tok::And},       {"or", Tok::Or},       {"not", Tok::Not},
        {"true", Tok::KwTrue},   {"false", Tok::KwFalse},
    };
    while (pos < src.size()) {
      char c = src[pos];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
        continue;
      }
      if (c == '/' && pos + 1 < src.size() && src[pos + 1] == '/') {
        while (pos < src.size() && src[pos] != '\n') advance();
        continue;
      }
      int tl = line, tc = col;
      auto push = [&](Tok k, std::string text, size_t len) {
        tokens.push_back({k, std::move(text), tl, tc});
        advance(len);
      };
      if (isalpha(static_cast<unsigned char>(c)) || c == '_') {
        size_t j = pos;
        while (j < src.size() &&
               (isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
          ++j;
        std::string word = src.substr(pos, j - pos);
        auto it = keywords.find(word);
        push(it == keywords.end() ? Tok::Ident : it->second, word, j - pos);
        continue;
      }
      if (isdigit(static_cast<unsigned char>(c)) ||
          (c == '.' && pos + 1 < src.size() && isdigit(static_cast<unsigned char>(src[pos + 1])))) {
        size_t j = pos;
        bool dot = false;
        while (j < src.size() &&
               (isdigit(static_cast<unsigned char>(src[j])) || (src[j] == '.' && !dot))) {
          if (src[j] == '.') dot = true;
          ++j;
        }
        push(Tok::Number, src.substr(pos, j - pos), j - pos);
        continue;
      }
      switch (c) {
        case '(': push(Tok::LParen, "(", 1); continue;
        case ')': push(Tok::RParen, ")", 1); continue;
        case '{': push(Tok::LBrace, "{", 1); continue;
        case '}': push(Tok::RBrace, "}", 1); continue;
        case '[': push(Tok::LBracket, "[", 1); continue;
        case ']': push(Tok::RBracket, "]", 1); continue;
        case ',': push(Tok::Comma, ",", 1); continue;
        case ';': push(Tok::Semi, ";", 1); continue;
        case '+': push(Tok::Plus, "+", 1); continue;
        case '-': push(Tok::Minus, "-", 1); continue;
        case '*': push(Tok::Star, "*", 1); continue;
        case '^': push(Tok::Caret, "^", 1); continue;
        case '#': push(Tok::Hash, "#", 1); continue;
        case ':':
          if (pos + 1 < src.size() && src[pos + 1] == '=') {
            push(Tok::Assign, ":=", 2);
            continue;
          }
          fail("expected ':='");
        case '<':
          if (pos + 1 < src.size() && src[pos + 1] == '=') {
            push(Tok::Le, "<=", 2);
          } else {
            push(Tok::Lt, "<", 1);
          }
          continue;
        case '>':
          if (pos + 1 < src.size() && src[pos + 1] == '=') {
            push(Tok::Ge, ">=", 2);
          } else {
            push(Tok::Gt, ">", 1);
          }
          continue;
        case '&':
          if (pos + 1 < src.size() && src[pos + 1] == '&') {
            push(Tok::And, "&&", 2);
            continue;
          }
          fail("stray '&'");
        case '|':
          if (pos + 1 < src.size() && src[pos + 1] == '|') {
            push(Tok::Or, "||", 2);
            continue;
          }
          fail("stray '|'");
        case '!': push(Tok::Not, "!", 1); continue;
        default:
          fail(std::string("unexpected character '") + c + "'");
      }
    }
    tokens.push_back({Tok::End, "", line, col});
  }
};

// Raw expression tree; identifiers resolved after the whole function is known
// (annotations may mention ret / bar_* which get their ids late).
struct RawExpr {
  enum K { Num, Id, Add, Sub, Mul, Pow, Neg } k = Num;
  Rat num;
  std::string id;
  int expo = 1;
  std::vector<RawExpr> kids;
  int line = 0, col = 0;
};

struct RawAtom {
  RawExpr lhs, rhs;
  enum Op { Lt, Le, Ge, Gt } op = Ge;
};

struct RawPred {
  enum K { AtomK, TrueK, FalseK, AndK, OrK, NotK } k = TrueK;
  RawAtom atom;
  std::vector<RawPred> kids;
};

struct RawStmt {
  Stmt::Kind kind = Stmt::Skip;
  std::string lhs;
  RawExpr rhs;
  RawPred guard;
  std::vector<RawStmt> body1, body2;
  std::string callee;
  std::vector<std::string> args;
  bool synthetic = false;
  std::vector<std::pair<RawAtom, bool>> pre_raw;     // bool unused
  std::vector<RawAtom> target_raw;
  int line = 0, col = 0;
};

struct RawFunction {
  std::string name;
  std::vector<std::string> params;
  std::vector<RawStmt> body;
  std::vector<RawAtom> end_pre;
  std::vector<RawAtom> end_targets;
  int line = 0, col = 0;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : lex_(text) {
    lex_.run();
    toks_ = &lex_.tokens;
  }

  std::vector<RawFunction> parse() {
    std::vector<RawFunction> fns;
    while (peek().kind != Tok::End) fns.push_back(parse_function());
    if (fns.empty()) fail("empty program");
    return fns;
  }

 private:
  Lexer lex_;
  const std::vector<Token>* toks_;
  size_t i_ = 0;

  const Token& peek(size_t ahead = 0) const {
    size_t j = i_ + ahead;
    return j < toks_->size() ? (*toks_)[j] : toks_->back();
  }
  const Token& next() { return (*toks_)[i_ < toks_->size() - 1 ? i_++ : i_]; }
  [[noreturn]] void fail(const std::string& msg) const {
    throw syntax_error(msg, peek().line, peek().col);
  }
  const Token& expect(Tok k, const std::string& what) {
    if (peek().kind != k) fail("expected " + what);
    return next();
  }

  RawFunction parse_function() {
    RawFunction fn;
    fn.line = peek().line;
    fn.col = peek().col;
    fn.name = expect(Tok::Ident, "function name").text;
    expect(Tok::LParen, "'('");
    if (peek().kind != Tok::RParen) {
      fn.params.push_back(expect(Tok::Ident, "parameter").text);
      while (peek().kind == Tok::Comma) {
        next();
        fn.params.push_back(expect(Tok::Ident, "parameter").text);
      }
    }
    expect(Tok::RParen, "')'");
    expect(Tok::LBrace, "'{'");
    parse_stmtlist(fn.body, true, &fn);
    expect(Tok::RBrace, "'}'");
    return fn;
  }

  bool starts_stmt(Tok k) const {
    return k == Tok::KwSkip || k == Tok::KwIf || k == Tok::KwWhile || k == Tok::KwReturn ||
           k == Tok::Ident;
  }

  // Parses `stmt (';' stmt)*`; at function level trailing annotation blocks
  // attach to the endpoint.
  void parse_stmtlist(std::vector<RawStmt>& out, bool fn_level, RawFunction* fn) {
    while (true) {
      std::vector<RawAtom> pre, targets;
      while (peek().kind == Tok::Hash || peek().kind == Tok::LBracket) {
        if (peek().kind == Tok::Hash) {
          next();
          parse_atom_conj(pre, Tok::Hash);
          expect(Tok::Hash, "closing '#'");
        } else {
          next();
          parse_atom_conj(targets, Tok::RBracket);
          expect(Tok::RBracket, "closing ']'");
        }
      }
      if (!starts_stmt(peek().kind)) {
        if (!pre.empty() || !targets.empty()) {
          if (!fn_level)
            fail("annotation must precede a statement");
          fn->end_pre.insert(fn->end_pre.end(), pre.begin(), pre.end());
          fn->end_targets.insert(fn->end_targets.end(), targets.begin(), targets.end());
        }
        if (out.empty() && !fn_level) fail("expected statement");
        return;
      }
      RawStmt s = parse_stmt();
      for (auto& a : pre) s.pre_raw.push_back({a, false});
      s.target_raw = std::move(targets);
      out.push_back(std::move(s));
      if (peek().kind == Tok::Semi) {
        next();
        continue;
      }
      // allow trailing annotations at function level without a ';'
      if (fn_level && (peek().kind == Tok::Hash || peek().kind == Tok::LBracket)) continue;
      return;
    }
  }

  void parse_atom_conj(std::vector<RawAtom>& out, Tok closer) {
    out.push_back(parse_atom());
    while (peek().kind == Tok::And) {
      next();
      out.push_back(parse_atom());
    }
    (void)closer;
  }

  RawAtom parse_atom() {
    RawAtom a;
    a.lhs = parse_expr();
    switch (peek().kind) {
      case Tok::Lt: a.op = RawAtom::Lt; break;
      case Tok::Le: a.op = RawAtom::Le; break;
      case Tok::Ge: a.op = RawAtom::Ge; break;
      case Tok::Gt: a.op = RawAtom::Gt; break;
      default: fail("expected comparison operator");
    }
    next();
    a.rhs = parse_expr();
    return a;
  }

  RawStmt parse_stmt() {
    RawStmt s;
    s.line = peek().line;
    s.col = peek().col;
    switch (peek().kind) {
      case Tok::KwSkip:
        next();
        s.kind = Stmt::Skip;
        return s;
      case Tok::KwReturn:
        next();
        s.kind = Stmt::Return;
        s.rhs = parse_expr();
        return s;
      case Tok::KwWhile: {
        next();
        s.kind = Stmt::While;
        s.guard = parse_bexpr();
        expect(Tok::KwDo, "'do'");
        parse_stmtlist(s.body1, false, nullptr);
        expect(Tok::KwOd, "'od'");
        return s;
      }
      case Tok::KwIf: {
        next();
        if (peek().kind == Tok::Star) {
          next();
          s.kind = Stmt::IfStar;
        } else {
          s.kind = Stmt::If;
          s.guard = parse_bexpr();
        }
        expect(Tok::KwThen, "'then'");
        parse_stmtlist(s.body1, false, nullptr);
        expect(Tok::KwElse, "'else'");
        parse_stmtlist(s.body2, false, nullptr);
        expect(Tok::KwFi, "'fi'");
        return s;
      }
      case Tok::Ident: {
        s.lhs = next().text;
        expect(Tok::Assign, "':='");
        if (peek().kind == Tok::Ident && peek(1).kind == Tok::LParen) {
          s.kind = Stmt::Call;
          s.callee = next().text;
          next();  // '('
          if (peek().kind != Tok::RParen) {
            s.args.push_back(expect(Tok::Ident, "argument variable").text);
            while (peek().kind == Tok::Comma) {
              next();
              s.args.push_back(expect(Tok::Ident, "argument variable").text);
            }
          }
          expect(Tok::RParen, "')'");
        } else {
          s.kind = Stmt::Assign;
          s.rhs = parse_expr();
        }
        return s;
      }
      default:
        fail("expected statement");
    }
  }

  // Boolean expressions: or < and < not; '(' disambiguated by scanning for a
  // comparison operator after the matching ')'.
  RawPred parse_bexpr() {
    RawPred p = parse_bterm();
    while (peek().kind == Tok::Or) {
      next();
      RawPred q;
      q.k = RawPred::OrK;
      q.kids.push_back(std::move(p));
      q.kids.push_back(parse_bterm());
      p = std::move(q);
    }
    return p;
  }

  RawPred parse_bterm() {
    RawPred p = parse_bfactor();
    while (peek().kind == Tok::And) {
      next();
      RawPred q;
      q.k = RawPred::AndK;
      q.kids.push_back(std::move(p));
      q.kids.push_back(parse_bfactor());
      p = std::move(q);
    }
    return p;
  }

  bool paren_wraps_bexpr() const {
    // at '(' -- find matching ')' and look at the following token
    assert(peek().kind == Tok::LParen);
    int depth = 0;
    size_t j = i_;
    while (j < toks_->size()) {
      Tok k = (*toks_)[j].kind;
      if (k == Tok::LParen) ++depth;
      if (k == Tok::RParen) {
        --depth;
        if (depth == 0) break;
      }
      if (k == Tok::End) break;
      ++j;
    }
    if (j >= toks_->size() || (*toks_)[j].kind != Tok::RParen) return false;
    Tok after = j + 1 < toks_->size() ? (*toks_)[j + 1].kind : Tok::End;
    // `( expr ) cmp expr` is a literal, anything else is a grouped bexpr;
    // `( expr ) * ...` etc. is an expression context, also a literal start.
    return !(after == Tok::Lt || after == Tok::Le || after == Tok::Ge || after == Tok::Gt ||
             after == Tok::Plus || after == Tok::Minus || after == Tok::Star ||
             after == Tok::Caret);
  }

  RawPred parse_bfactor() {
    if (peek().kind == Tok::Not) {
      next();
      RawPred p;
      p.k = RawPred::NotK;
      p.kids.push_back(parse_bfactor());
      return p;
    }
    if (peek().kind == Tok::KwTrue) {
      next();
      RawPred p;
      p.k = RawPred::TrueK;
      return p;
    }
    if (peek().kind == Tok::KwFalse) {
      next();
      RawPred p;
      p.k = RawPred::FalseK;
      return p;
    }
    if (peek().kind == Tok::LParen && paren_wraps_bexpr()) {
      next();
      RawPred p = parse_bexpr();
      expect(Tok::RParen, "')'");
      return p;
    }
    RawPred p;
    p.k = RawPred::AtomK;
    p.atom = parse_atom();
    return p;
  }

  RawExpr parse_expr() {
    RawExpr e = parse_term();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      bool plus = next().kind == Tok::Plus;
      RawExpr r;
      r.k = plus ? RawExpr::Add : RawExpr::Sub;
      r.kids.push_back(std::move(e));
      r.kids.push_back(parse_term());
      e = std::move(r);
    }
    return e;
  }

  RawExpr parse_term() {
    RawExpr e = parse_factor();
    while (peek().kind == Tok::Star) {
      next();
      RawExpr r;
      r.k = RawExpr::Mul;
      r.kids.push_back(std::move(e));
      r.kids.push_back(parse_factor());
      e = std::move(r);
    }
    return e;
  }

  RawExpr parse_factor() {
    RawExpr e = parse_primary();
    if (peek().kind == Tok::Caret) {
      next();
      const Token& t = expect(Tok::Number, "integer exponent");
      if (t.text.find('.') != std::string::npos)
        throw syntax_error("exponent must be a non-negative integer", t.line, t.col);
      RawExpr r;
      r.k = RawExpr::Pow;
      r.expo = std::stoi(t.text);
      r.kids.push_back(std::move(e));
      return r;
    }
    return e;
  }

  RawExpr parse_primary() {
    const Token& t = peek();
    if (t.kind == Tok::Number) {
      RawExpr e;
      e.k = RawExpr::Num;
      e.num = rat_from_decimal(t.text);
      e.line = t.line;
      e.col = t.col;
      next();
      return e;
    }
    if (t.kind == Tok::Ident) {
      RawExpr e;
      e.k = RawExpr::Id;
      e.id = t.text;
      e.line = t.line;
      e.col = t.col;
      next();
      return e;
    }
    if (t.kind == Tok::Minus) {
      next();
      RawExpr e;
      e.k = RawExpr::Neg;
      e.kids.push_back(parse_factor());
      return e;
    }
    if (t.kind == Tok::LParen) {
      next();
      RawExpr e = parse_expr();
      expect(Tok::RParen, "')'");
      return e;
    }
    fail("expected expression");
  }
};

// ---- resolution ----

struct FnScope {
  std::map<std::string, int> names;  // source name -> var id
  Function* fn = nullptr;
  Program* prog = nullptr;
};

TPoly lower_expr(const RawExpr& e, FnScope& sc, bool allow_declare, bool annotation) {
  switch (e.k) {
    case RawExpr::Num:
      return TPoly::constant(e.num);
    case RawExpr::Id: {
      auto it = sc.names.find(e.id);
      if (it != sc.names.end()) return TPoly::var(it->second);
      if (annotation) {
        if (e.id == "ret" && sc.fn->ret >= 0) return TPoly::var(sc.fn->ret);
        if (e.id.rfind("bar_", 0) == 0) {
          std::string base = e.id.substr(4);
          for (size_t i = 0; i < sc.fn->params.size(); ++i) {
            if (sc.prog->vars.name(sc.fn->params[i]) == base)
              return TPoly::var(sc.fn->bars[i]);
          }
        }
        throw syntax_error("unknown variable '" + e.id + "' in annotation", e.line, e.col);
      }
      if (!allow_declare)
        throw syntax_error("unknown variable '" + e.id + "'", e.line, e.col);
      int id = sc.prog->vars.add(e.id);
      sc.names[e.id] = id;
      sc.fn->vars.push_back(id);
      return TPoly::var(id);
    }
    case RawExpr::Add:
      return lower_expr(e.kids[0], sc, allow_declare, annotation) +
             lower_expr(e.kids[1], sc, allow_declare, annotation);
    case RawExpr::Sub:
      return lower_expr(e.kids[0], sc, allow_declare, annotation) -
             lower_expr(e.kids[1], sc, allow_declare, annotation);
    case RawExpr::Mul:
      return lower_expr(e.kids[0], sc, allow_declare, annotation) *
             lower_expr(e.kids[1], sc, allow_declare, annotation);
    case RawExpr::Neg:
      return lower_expr(e.kids[0], sc, allow_declare, annotation).scaled(-1);
    case RawExpr::Pow: {
      TPoly base = lower_expr(e.kids[0], sc, allow_declare, annotation);
      TPoly acc = TPoly::constant(1);
      for (int i = 0; i < e.expo; ++i) acc = acc * base;
      return acc;
    }
  }
  throw std::logic_error("lower_expr");
}

Atom lower_atom(const RawAtom& ra, FnScope& sc, bool allow_declare, bool annotation) {
  TPoly l = lower_expr(ra.lhs, sc, allow_declare, annotation);
  TPoly r = lower_expr(ra.rhs, sc, allow_declare, annotation);
  Atom a;
  switch (ra.op) {
    case RawAtom::Lt: a.poly = r - l; a.strict = true; break;
    case RawAtom::Le: a.poly = r - l; a.strict = false; break;
    case RawAtom::Ge: a.poly = l - r; a.strict = false; break;
    case RawAtom::Gt: a.poly = l - r; a.strict = true; break;
  }
  return a;
}

Pred lower_pred(const RawPred& rp, FnScope& sc) {
  switch (rp.k) {
    case RawPred::AtomK:
      return Pred::make_atom(lower_atom(rp.atom, sc, true, false));
    case RawPred::TrueK: {
      Atom a;
      a.poly = TPoly::constant(1);
      return Pred::make_atom(a);
    }
    case RawPred::FalseK: {
      Atom a;
      a.poly = TPoly::constant(-1);
      return Pred::make_atom(a);
    }
    case RawPred::NotK: {
      std::vector<Pred> kids;
      kids.push_back(lower_pred(rp.kids[0], sc));
      return Pred::make(Pred::NOT, std::move(kids));
    }
    case RawPred::AndK:
    case RawPred::OrK: {
      std::vector<Pred> kids;
      for (auto& k : rp.kids) kids.push_back(lower_pred(k, sc));
      return Pred::make(rp.k == RawPred::AndK ? Pred::AND : Pred::OR, std::move(kids));
    }
  }
  throw std::logic_error("lower_pred");
}

bool always_returns(const std::vector<RawStmt>& body) {
  if (body.empty()) return false;
  const RawStmt& last = body.back();
  if (last.kind == Stmt::Return) return true;
  if (last.kind == Stmt::If || last.kind == Stmt::IfStar)
    return always_returns(last.body1) && always_returns(last.body2);
  return false;
}

struct PendingAnnotations {
  // resolved after ret/bar ids exist
  std::vector<std::tuple<Stmt*, RawAtom, bool>> atoms;  // stmt, atom, is_target
};

Stmt lower_stmt(const RawStmt& rs, FnScope& sc, Program& prog,
                std::vector<std::pair<Stmt*, const RawStmt*>>& annot_queue);

void lower_body(const std::vector<RawStmt>& in, std::vector<Stmt>& out, FnScope& sc,
                Program& prog, std::vector<std::pair<Stmt*, const RawStmt*>>& annot_queue) {
  out.reserve(in.size());
  for (auto& rs : in) out.push_back(lower_stmt(rs, sc, prog, annot_queue));
  // record pointers only after the vector stops growing
  for (size_t i = 0; i < in.size(); ++i)
    if (!in[i].pre_raw.empty() || !in[i].target_raw.empty())
      annot_queue.push_back({&out[i], &in[i]});
}

Stmt lower_stmt(const RawStmt& rs, FnScope& sc, Program& prog,
                std::vector<std::pair<Stmt*, const RawStmt*>>& annot_queue) {
  Stmt s;
  s.kind = rs.kind;
  s.synthetic = rs.synthetic;
  switch (rs.kind) {
    case Stmt::Skip:
      break;
    case Stmt::Assign: {
      TPoly rhs = lower_expr(rs.rhs, sc, true, false);
      auto it = sc.names.find(rs.lhs);
      int lhs = it != sc.names.end() ? it->second : -1;
      if (lhs < 0) {
        lhs = prog.vars.add(rs.lhs);
        sc.names[rs.lhs] = lhs;
        sc.fn->vars.push_back(lhs);
      }
      s.lhs = lhs;
      s.rhs = std::move(rhs);
      break;
    }
    case Stmt::Return:
      s.rhs = lower_expr(rs.rhs, sc, true, false);
      break;
    case Stmt::If:
    case Stmt::While:
      s.guard = lower_pred(rs.guard, sc);
      lower_body(rs.body1, s.body1, sc, prog, annot_queue);
      if (rs.kind == Stmt::If) lower_body(rs.body2, s.body2, sc, prog, annot_queue);
      break;
    case Stmt::IfStar:
      lower_body(rs.body1, s.body1, sc, prog, annot_queue);
      lower_body(rs.body2, s.body2, sc, prog, annot_queue);
      break;
    case Stmt::Call: {
      s.callee_name = rs.callee;
      for (auto& an : rs.args) {
        auto it = sc.names.find(an);
        int id;
        if (it != sc.names.end()) {
          id = it->second;
        } else {
          id = prog.vars.add(an);
          sc.names[an] = id;
          sc.fn->vars.push_back(id);
        }
        s.args.push_back(id);
      }
      auto it = sc.names.find(rs.lhs);
      int lhs = it != sc.names.end() ? it->second : -1;
      if (lhs < 0) {
        lhs = prog.vars.add(rs.lhs);
        sc.names[rs.lhs] = lhs;
        sc.fn->vars.push_back(lhs);
      }
      s.lhs = lhs;
      for (int a : s.args)
        if (a == s.lhs)
          throw semantic_error("variable '" + rs.lhs +
                               "' appears on both sides of a call");
      break;
    }
  }
  return s;
}

}  // namespace

Program parse_program(const std::string& text) {
  Parser parser(text);
  std::vector<RawFunction> raw = parser.parse();

  // return assumption: a body that can fall through gets `return 0`
  for (auto& fn : raw) {
    if (!always_returns(fn.body)) {
      RawStmt r;
      r.kind = Stmt::Return;
      r.rhs.k = RawExpr::Num;
      r.rhs.num = 0;
      r.synthetic = true;
      fn.body.push_back(std::move(r));
    }
  }

  Program prog;
  for (auto& fn : raw) {
    if (prog.func_index.count(fn.name))
      throw semantic_error("function '" + fn.name + "' defined more than once");
    prog.func_index[fn.name] = static_cast<int>(prog.funcs.size());
    prog.funcs.emplace_back();
  }

  for (size_t fi = 0; fi < raw.size(); ++fi) {
    RawFunction& rf = raw[fi];
    Function& fn = prog.funcs[fi];
    fn.name = rf.name;
    FnScope sc;
    sc.fn = &fn;
    sc.prog = &prog;
    for (auto& pn : rf.params) {
      if (sc.names.count(pn))
        throw semantic_error("duplicate parameter '" + pn + "' in " + fn.name);
      int id = prog.vars.add(pn);
      sc.names[pn] = id;
      fn.params.push_back(id);
      fn.vars.push_back(id);
    }
    for (auto& pn : rf.params) {
      int id = prog.vars.add("bar_" + pn);
      fn.bars.push_back(id);
      fn.vars.push_back(id);
    }
    std::vector<std::pair<Stmt*, const RawStmt*>> annot_queue;
    lower_body(rf.body, fn.body, sc, prog, annot_queue);
    fn.ret = prog.vars.add("ret_" + fn.name);
    fn.vars.push_back(fn.ret);

    for (auto& [stmt, rs] : annot_queue) {
      for (auto& [ra, dummy] : rs->pre_raw) {
        Atom a = lower_atom(ra, sc, false, true);
        a.strict = false;  // pre-conditions are non-strict
        stmt->pre_atoms.push_back(std::move(a));
      }
      for (auto& ra : rs->target_raw)
        stmt->target_atoms.push_back(lower_atom(ra, sc, false, true));
    }
    for (auto& ra : rf.end_pre) {
      Atom a = lower_atom(ra, sc, false, true);
      a.strict = false;
      fn.end_pre.push_back(std::move(a));
    }
    for (auto& ra : rf.end_targets) fn.end_targets.push_back(lower_atom(ra, sc, false, true));
  }

  // resolve calls
  std::function<void(Program&, std::vector<Stmt>&)> link = [&](Program& p,
                                                               std::vector<Stmt>& body) {
    for (auto& s : body) {
      if (s.kind == Stmt::Call) {
        auto it = p.func_index.find(s.callee_name);
        if (it == p.func_index.end())
          throw semantic_error("call to undefined function '" + s.callee_name + "'");
        s.callee = it->second;
        const Function& callee = p.funcs[s.callee];
        if (callee.params.size() != s.args.size())
          throw semantic_error("call to '" + s.callee_name + "' passes " +
                               std::to_string(s.args.size()) + " arguments, expected " +
                               std::to_string(callee.params.size()));
        p.has_calls = true;
      }
      link(p, s.body1);
      link(p, s.body2);
    }
  };
  for (auto& fn : prog.funcs) link(prog, fn.body);
  return prog;
}

namespace {

void label_body(std::vector<Stmt>& body, int func, int& next, std::vector<LabelInfo>& labels) {
  for (auto& s : body) {
    s.label = next++;
    LabelKind k = LabelKind::A;
    switch (s.kind) {
      case Stmt::Skip:
      case Stmt::Assign:
      case Stmt::Return: k = LabelKind::A; break;
      case Stmt::If:
      case Stmt::While: k = LabelKind::B; break;
      case Stmt::Call: k = LabelKind::C; break;
      case Stmt::IfStar: k = LabelKind::D; break;
    }
    labels.push_back({k, func, &s});
    label_body(s.body1, func, next, labels);
    label_body(s.body2, func, next, labels);
  }
}

}  // namespace

void assign_labels(Program& p) {
  p.labels.clear();
  p.labels.push_back({});  // slot 0 unused
  int next = 1;
  for (size_t fi = 0; fi < p.funcs.size(); ++fi) {
    Function& fn = p.funcs[fi];
    fn.lin = next;
    label_body(fn.body, static_cast<int>(fi), next, p.labels);
    fn.lout = next++;
    p.labels.push_back({LabelKind::E, static_cast<int>(fi), nullptr});
  }
  p.labeled = true;
}

Cfg build_cfg(const Program& p) {
  if (!p.labeled) throw std::logic_error("build_cfg: program not labeled");
  Cfg cfg;

  std::function<void(const Function&, const std::vector<Stmt>&, int)> walk =
      [&](const Function& fn, const std::vector<Stmt>& body, int cont) {
        for (size_t i = 0; i < body.size(); ++i) {
          const Stmt& s = body[i];
          int next = i + 1 < body.size() ? body[i + 1].label : cont;
          switch (s.kind) {
            case Stmt::Skip: {
              Edge e;
              e.src = s.label;
              e.dst = next;
              e.kind = Edge::Update;
              cfg.edges.push_back(std::move(e));
              break;
            }
            case Stmt::Assign: {
              Edge e;
              e.src = s.label;
              e.dst = next;
              e.kind = Edge::Update;
              e.update[s.lhs] = s.rhs;
              cfg.edges.push_back(std::move(e));
              break;
            }
            case Stmt::Return: {
              Edge e;
              e.src = s.label;
              e.dst = fn.lout;
              e.kind = Edge::Update;
              e.update[fn.ret] = s.rhs;
              cfg.edges.push_back(std::move(e));
              break;
            }
            case Stmt::If: {
              Edge t;
              t.src = s.label;
              t.dst = s.body1.front().label;
              t.kind = Edge::Guard;
              t.guard = s.guard;
              cfg.edges.push_back(std::move(t));
              Edge f;
              f.src = s.label;
              f.dst = s.body2.front().label;
              f.kind = Edge::Guard;
              f.guard = Pred::make(Pred::NOT, {s.guard});
              cfg.edges.push_back(std::move(f));
              walk(fn, s.body1, next);
              walk(fn, s.body2, next);
              break;
            }
            case Stmt::IfStar: {
              Edge t;
              t.src = s.label;
              t.dst = s.body1.front().label;
              t.kind = Edge::Star;
              cfg.edges.push_back(std::move(t));
              Edge f;
              f.src = s.label;
              f.dst = s.body2.front().label;
              f.kind = Edge::Star;
              cfg.edges.push_back(std::move(f));
              walk(fn, s.body1, next);
              walk(fn, s.body2, next);
              break;
            }
            case Stmt::While: {
              Edge t;
              t.src = s.label;
              t.dst = s.body1.front().label;
              t.kind = Edge::Guard;
              t.guard = s.guard;
              cfg.edges.push_back(std::move(t));
              Edge f;
              f.src = s.label;
              f.dst = next;
              f.kind = Edge::Guard;
              f.guard = Pred::make(Pred::NOT, {s.guard});
              cfg.edges.push_back(std::move(f));
              walk(fn, s.body1, s.label);
              break;
            }
            case Stmt::Call: {
              Edge e;
              e.src = s.label;
              e.dst = next;
              e.kind = Edge::Bot;
              e.call = &s;
              cfg.edges.push_back(std::move(e));
              break;
            }
          }
        }
      };

  for (auto& fn : p.funcs) walk(fn, fn.body, fn.lout);

  std::stable_sort(cfg.edges.begin(), cfg.edges.end(),
                   [](const Edge& a, const Edge& b) { return a.src < b.src; });
  cfg.out_edges.assign(p.labels.size(), {});
  for (size_t i = 0; i < cfg.edges.size(); ++i)
    cfg.out_edges[cfg.edges[i].src].push_back(static_cast<int>(i));
  return cfg;
}

}  // namespace polyinv
