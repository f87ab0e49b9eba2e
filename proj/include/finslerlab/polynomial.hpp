#pragma once

/// \file
/// Sparse real polynomials in variables x1..xn (or u1..um), parsed from
/// strings such as "1 + 0.5*x1^2*x2 - (x1 - x2)^2". Used for coefficient
/// fields in scenario files and for hypersurface maps.

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "finslerlab/error.hpp"

namespace finslerlab {

class Polynomial {
 public:
  using Exponents = std::vector<int>;

  Polynomial() = default;
  explicit Polynomial(int nvars) : nvars_(nvars) {}

  static Polynomial constant(int nvars, double c) {
    Polynomial p(nvars);
    if (c != 0.0) p.terms_[Exponents(static_cast<std::size_t>(nvars), 0)] = c;
    return p;
  }

  /// The coordinate polynomial for variable `var` (0-based).
  static Polynomial variable(int nvars, int var) {
    Polynomial p(nvars);
    Exponents e(static_cast<std::size_t>(nvars), 0);
    e[static_cast<std::size_t>(var)] = 1;
    p.terms_[e] = 1.0;
    return p;
  }

  /// Parses `text` over `nvars` variables named `<prefix>1`..`<prefix>n`.
  /// Supports + - * ^ (nonnegative integer exponents), parentheses and
  /// decimal or scientific literals.
  static Polynomial parse(std::string_view text, int nvars, char prefix = 'x') {
    Parser parser{text, 0, nvars, prefix};
    Polynomial p = parser.expression();
    parser.skip_space();
    if (parser.pos != text.size()) parser.fail("unexpected character");
    return p;
  }

  [[nodiscard]] int variables() const { return nvars_; }
  [[nodiscard]] bool is_zero() const { return terms_.empty(); }
  [[nodiscard]] const std::map<Exponents, double>& terms() const { return terms_; }

  [[nodiscard]] int degree() const {
    int d = 0;
    for (const auto& [e, c] : terms_) {
      int s = 0;
      for (int k : e) s += k;
      d = std::max(d, s);
    }
    return d;
  }

  /// Evaluates at `x` using the arithmetic of T; `one` fixes the type and
  /// context (a unit jet, or 1.0).
  template <class T>
  T evaluate(const std::vector<T>& x, const T& one) const {
    if (static_cast<int>(x.size()) != nvars_) {
      throw DimensionMismatchError("polynomial evaluated with wrong variable count");
    }
    T acc = one * 0.0;
    for (const auto& [e, c] : terms_) {
      T term = one * c;
      for (int v = 0; v < nvars_; ++v) {
        for (int k = 0; k < e[static_cast<std::size_t>(v)]; ++k) term = term * x[static_cast<std::size_t>(v)];
      }
      acc = acc + term;
    }
    return acc;
  }

  double operator()(const std::vector<double>& x) const { return evaluate<double>(x, 1.0); }

  [[nodiscard]] Polynomial derivative(int var) const {
    Polynomial d(nvars_);
    for (const auto& [e, c] : terms_) {
      const int k = e[static_cast<std::size_t>(var)];
      if (k == 0) continue;
      Exponents f = e;
      --f[static_cast<std::size_t>(var)];
      d.terms_[f] += c * k;
    }
    d.prune();
    return d;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) {
    a.check_compatible(b);
    for (const auto& [e, c] : b.terms_) a.terms_[e] += c;
    a.prune();
    return a;
  }

  friend Polynomial operator-(const Polynomial& a) {
    Polynomial r = a;
    for (auto& [e, c] : r.terms_) c = -c;
    return r;
  }

  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-b); }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    a.check_compatible(b);
    Polynomial r(a.nvars_);
    for (const auto& [ea, ca] : a.terms_) {
      for (const auto& [eb, cb] : b.terms_) {
        Exponents e = ea;
        for (std::size_t v = 0; v < e.size(); ++v) e[v] += eb[v];
        r.terms_[e] += ca * cb;
      }
    }
    r.prune();
    return r;
  }

  [[nodiscard]] Polynomial pow(int k) const {
    Polynomial r = constant(nvars_, 1.0);
    for (int i = 0; i < k; ++i) r = r * *this;
    return r;
  }

  [[nodiscard]] std::string to_string(char prefix = 'x') const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    os.precision(17);
    bool first = true;
    for (const auto& [e, c] : terms_) {
      if (!first) os << (c < 0 ? " - " : " + ");
      else if (c < 0) os << "-";
      first = false;
      os << std::abs(c);
      for (int v = 0; v < nvars_; ++v) {
        const int k = e[static_cast<std::size_t>(v)];
        if (k == 0) continue;
        os << "*" << prefix << (v + 1);
        if (k > 1) os << "^" << k;
      }
    }
    return os.str();
  }

 private:
  struct Parser {
    std::string_view s;
    std::size_t pos;
    int nvars;
    char prefix;

    [[noreturn]] void fail(const std::string& what) const {
      throw ConfigError("polynomial \"" + std::string(s) + "\": " + what + " at column " +
                        std::to_string(pos + 1));
    }

    void skip_space() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }

    bool accept(char c) {
      skip_space();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }

    Polynomial expression() {
      Polynomial acc(nvars);
      bool negate = false;
      if (accept('-')) negate = true;
      else accept('+');
      Polynomial t = term();
      acc = negate ? -t : t;
      while (true) {
        if (accept('+')) acc = acc + term();
        else if (accept('-')) acc = acc - term();
        else break;
      }
      return acc;
    }

    Polynomial term() {
      Polynomial acc = power();
      while (accept('*')) acc = acc * power();
      return acc;
    }

    Polynomial power() {
      Polynomial base = atom();
      if (accept('^')) {
        skip_space();
        const std::size_t start = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (start == pos) fail("expected a nonnegative integer exponent");
        base = base.pow(std::stoi(std::string(s.substr(start, pos - start))));
      }
      return base;
    }

    Polynomial atom() {
      skip_space();
      if (pos >= s.size()) fail("unexpected end of input");
      if (accept('(')) {
        Polynomial p = expression();
        if (!accept(')')) fail("expected ')'");
        return p;
      }
      if (accept('-')) return -power();
      if (s[pos] == prefix) {
        ++pos;
        const std::size_t start = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (start == pos) fail("expected a variable index");
        const int idx = std::stoi(std::string(s.substr(start, pos - start)));
        if (idx < 1 || idx > nvars) {
          pos = start;
          fail("variable " + std::string(1, prefix) + std::to_string(idx) + " out of range 1.." +
               std::to_string(nvars));
        }
        return variable(nvars, idx - 1);
      }
      const std::string rest(s.substr(pos));
      char* end = nullptr;
      const double v = std::strtod(rest.c_str(), &end);
      if (end == rest.c_str()) fail("expected a number, variable or '('");
      pos += static_cast<std::size_t>(end - rest.c_str());
      return constant(nvars, v).with_vars(nvars);
    }
  };

  Polynomial with_vars(int n) const {
    Polynomial r = *this;
    r.nvars_ = n;
    return r;
  }

  void check_compatible(const Polynomial& o) const {
    if (nvars_ != o.nvars_) throw DimensionMismatchError("polynomials over different variable counts");
  }

  void prune() {
    for (auto it = terms_.begin(); it != terms_.end();) {
      if (it->second == 0.0) it = terms_.erase(it);
      else ++it;
    }
  }

  int nvars_ = 0;
  std::map<Exponents, double> terms_;
};

}  // namespace finslerlab
