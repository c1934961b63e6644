#pragma once

#include "tpoly.hpp"

namespace polyinv {

enum class LabelKind { A, B, C, D, E };

inline char label_kind_char(LabelKind k) {
  switch (k) {
    case LabelKind::A: return 'a';
    case LabelKind::B: return 'b';
    case LabelKind::C: return 'c';
    case LabelKind::D: return 'd';
    case LabelKind::E: return 'e';
  }
  return '?';
}

struct Stmt {
  enum Kind { Skip, Assign, If, IfStar, While, Call, Return } kind = Skip;
  int label = -1;
  int lhs = -1;   // Assign / Call
  TPoly rhs;      // Assign / Return
  Pred guard;     // If / While
  std::vector<Stmt> body1, body2;  // then/else, while body in body1
  int callee = -1;
  std::string callee_name;
  std::vector<int> args;
  bool synthetic = false;  // inserted `return 0`
  std::vector<Atom> pre_atoms;     // inline `# ... #` on this label
  std::vector<Atom> target_atoms;  // inline `[ ... ]` on this label
};

struct Function {
  std::string name;
  std::vector<int> params;
  std::vector<int> bars;  // frozen copies of parameters, same order
  int ret = -1;
  std::vector<int> vars;  // canonical order: params, bars, locals, ret
  std::vector<Stmt> body;
  int lin = -1, lout = -1;
  std::vector<Atom> end_pre;      // `# ... #` at end of body -> endpoint label
  std::vector<Atom> end_targets;  // `[ ... ]` at end of body -> endpoint label
};

struct LabelInfo {
  LabelKind kind = LabelKind::E;
  int func = -1;
  Stmt* stmt = nullptr;  // null for endpoints
};

struct Program {
  VarTable vars;
  std::vector<Function> funcs;
  std::map<std::string, int> func_index;
  int main_index = 0;
  bool has_calls = false;

  bool labeled = false;
  std::vector<LabelInfo> labels;  // index = label id; slot 0 unused

  Program() = default;
  Program(const Program&) = delete;
  Program& operator=(const Program&) = delete;
  Program(Program&&) = default;
  Program& operator=(Program&&) = default;

  int label_count() const { return static_cast<int>(labels.size()) - 1; }
  const LabelInfo& label(int l) const { return labels.at(l); }
  int func_of_label(int l) const { return labels.at(l).func; }
};

// Parse + resolve + return-assumption normalization. Labels not yet assigned.
Program parse_program(const std::string& text);

// Deterministic pre-order labeling, 1-based, endpoint label last per function.
void assign_labels(Program& p);

// Canonical re-serialization (stable across runs; reparses to the same AST).
std::string pretty_print(const Program& p);

bool stmt_equal(const Stmt& a, const Stmt& b);
bool program_equal(const Program& a, const Program& b);

struct Edge {
  int src = -1, dst = -1;
  enum Kind { Update, Guard, Bot, Star } kind = Update;
  std::map<int, TPoly> update;  // Update edges; identity outside the map
  Pred guard;                   // Guard edges (strictness preserved)
  const Stmt* call = nullptr;   // Bot edges
};

struct Cfg {
  std::vector<Edge> edges;                  // ordered by source label, then form
  std::vector<std::vector<int>> out_edges;  // label -> edge indices
};

Cfg build_cfg(const Program& p);

std::string dump_cfg(const Program& p, const Cfg& cfg);

}  // namespace polyinv
