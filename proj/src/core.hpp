#pragma once

#include <gmpxx.h>

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace polyinv {

using Rat = mpq_class;

// "0.5" -> 1/2, "-3" -> -3, "12.250" -> 49/4. Throws on malformed input.
Rat rat_from_decimal(const std::string& text);

// Exact value of the binary float, no rounding. Throws on NaN/Inf.
Rat rat_from_double(double d);

double rat_to_double(const Rat& q);

// "p/q" with q omitted when 1.
std::string rat_to_string(const Rat& q);

// Exact decimal ("1/2" -> "0.5") when the denominator is 2^a*5^b,
// otherwise falls back to "p/q".
std::string rat_to_decimal(const Rat& q);

// Short approximate rendering for logs ("5.67e-07").
std::string rat_to_sci(const Rat& q);

struct syntax_error : std::runtime_error {
  int line, col;
  syntax_error(const std::string& msg, int line_, int col_)
      : std::runtime_error(msg + " (line " + std::to_string(line_) + ", col " +
                           std::to_string(col_) + ")"),
        line(line_),
        col(col_) {}
};

struct semantic_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Program variables. Ids are global; each function keeps its own ordered
// slice, so names may repeat across functions.
class VarTable {
 public:
  int add(const std::string& name) {
    names_.push_back(name);
    return static_cast<int>(names_.size()) - 1;
  }
  const std::string& name(int id) const { return names_.at(id); }
  int size() const { return static_cast<int>(names_.size()); }

 private:
  std::vector<std::string> names_;
};

// Deterministic across platforms (no std:: distribution involved).
struct SplitMix {
  unsigned long long s;
  explicit SplitMix(unsigned long long seed) : s(seed + 0x9e3779b97f4a7c15ULL) {}
  unsigned long long next() {
    unsigned long long z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  unsigned long long below(unsigned long long n) { return n ? next() % n : 0; }
};

enum class UnknownKind { STemplate, SPost, T, L, Eps };

struct UnknownInfo {
  UnknownKind kind;
  std::string name;
  bool bounded_below = false;  // diagonal l's and eps's
  bool unit_hint = false;      // constant template coefficients start near 1
};

class UnknownTable {
 public:
  int add(UnknownKind kind, std::string name, bool bounded_below = false,
          bool unit_hint = false) {
    infos_.push_back({kind, std::move(name), bounded_below, unit_hint});
    return static_cast<int>(infos_.size()) - 1;
  }
  const UnknownInfo& info(int id) const { return infos_.at(id); }
  const std::string& name(int id) const { return infos_.at(id).name; }
  int size() const { return static_cast<int>(infos_.size()); }

 private:
  std::vector<UnknownInfo> infos_;
};

}  // namespace polyinv
