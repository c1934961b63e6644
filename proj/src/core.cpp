#include "core.hpp"

#include <cmath>
#include <cstdio>

namespace polyinv {

Rat rat_from_decimal(const std::string& text) {
  std::string s = text;
  bool neg = false;
  size_t pos = 0;
  if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
    neg = s[pos] == '-';
    ++pos;
  }
  std::string digits;
  size_t frac_len = 0;
  bool seen_dot = false, seen_digit = false;
  for (; pos < s.size(); ++pos) {
    char c = s[pos];
    if (c == '.') {
      if (seen_dot) throw std::runtime_error("malformed number: " + text);
      seen_dot = true;
    } else if (c >= '0' && c <= '9') {
      digits.push_back(c);
      seen_digit = true;
      if (seen_dot) ++frac_len;
    } else {
      throw std::runtime_error("malformed number: " + text);
    }
  }
  if (!seen_digit) throw std::runtime_error("malformed number: " + text);
  mpz_class num(digits.empty() ? "0" : digits, 10);
  mpz_class den = 1;
  for (size_t i = 0; i < frac_len; ++i) den *= 10;
  Rat q(num, den);
  q.canonicalize();
  if (neg) q = -q;
  return q;
}

Rat rat_from_double(double d) {
  if (!std::isfinite(d)) throw std::runtime_error("non-finite value in solution");
  return Rat(d);  // exact binary expansion
}

double rat_to_double(const Rat& q) { return q.get_d(); }

std::string rat_to_string(const Rat& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

std::string rat_to_sci(const Rat& q) {
  char buf[64];
  snprintf(buf, sizeof buf, "%.6g", q.get_d());
  return buf;
}

std::string rat_to_decimal(const Rat& q) {
  mpz_class den = q.get_den();
  int twos = 0, fives = 0;
  mpz_class d = den;
  while (mpz_divisible_ui_p(d.get_mpz_t(), 2)) {
    d /= 2;
    ++twos;
  }
  while (mpz_divisible_ui_p(d.get_mpz_t(), 5)) {
    d /= 5;
    ++fives;
  }
  if (d != 1) return rat_to_string(q);
  int k = std::max(twos, fives);
  mpz_class scale = 1;
  for (int i = 0; i < k; ++i) scale *= 10;
  mpz_class num = q.get_num() * (scale / den);
  bool neg = num < 0;
  if (neg) num = -num;
  std::string s = num.get_str();
  std::string out;
  if (k == 0) {
    out = s;
  } else {
    while (static_cast<int>(s.size()) <= k) s.insert(s.begin(), '0');
    out = s.substr(0, s.size() - k) + "." + s.substr(s.size() - k);
    while (out.back() == '0') out.pop_back();
    if (out.back() == '.') out.pop_back();
  }
  return neg ? "-" + out : out;
}

}  // namespace polyinv
