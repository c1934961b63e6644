#pragma once

#include "frontend.hpp"

namespace polyinv {

struct Annotations {
  std::map<int, std::vector<Atom>> pre;      // label -> non-strict atoms
  std::map<int, std::vector<Atom>> targets;  // label -> desired atoms
  std::optional<Rat> bound;

  // atoms of Pre(l); empty vector means true
  const std::vector<Atom>& pre_at(int label) const {
    static const std::vector<Atom> kEmpty;
    auto it = pre.find(label);
    return it == pre.end() ? kEmpty : it->second;
  }
  const std::vector<Atom>& targets_at(int label) const {
    static const std::vector<Atom> kEmpty;
    auto it = targets.find(label);
    return it == targets.end() ? kEmpty : it->second;
  }
};

// Gather the inline/endpoint annotation attachments of a labeled program.
Annotations collect_annotations(const Program& p);

// Add the implicit facts: zero-initialization of non-parameter variables and
// parameter/frozen-copy equality at each function entry, plus per-variable
// and norm-ball bounds at every label in bounded mode.
void inject_implicit_pre(Annotations& a, const Program& p, std::optional<Rat> bound);

std::string dump_annotations(const Annotations& a, const Program& p);

}  // namespace polyinv
