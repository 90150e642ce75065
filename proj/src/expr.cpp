#include "bsde/expr.hpp"

#include <cctype>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

namespace bsde::expr {

namespace {

struct Node {
  virtual ~Node() = default;
  virtual double eval(double t, std::span<const double> b, double y,
                      std::span<const double> z) const = 0;
};

using NodePtr = std::shared_ptr<const Node>;

struct Const final : Node {
  double value;
  explicit Const(double v) : value(v) {}
  double eval(double, std::span<const double>, double,
              std::span<const double>) const override {
    return value;
  }
};

enum class Var { T, Y, B, Z, NormB, NormZ };

struct VarNode final : Node {
  Var which;
  int index;  // component for B/Z, zero-based
  VarNode(Var w, int i) : which(w), index(i) {}
  double eval(double t, std::span<const double> b, double y,
              std::span<const double> z) const override {
    switch (which) {
      case Var::T: return t;
      case Var::Y: return y;
      case Var::B: return b[static_cast<std::size_t>(index)];
      case Var::Z: return z[static_cast<std::size_t>(index)];
      case Var::NormB: {
        double s = 0;
        for (double x : b) s += x * x;
        return std::sqrt(s);
      }
      case Var::NormZ: {
        double s = 0;
        for (double x : z) s += x * x;
        return std::sqrt(s);
      }
    }
    return 0.0;
  }
};

struct Unary final : Node {
  double (*fn)(double);
  NodePtr arg;
  Unary(double (*f)(double), NodePtr a) : fn(f), arg(std::move(a)) {}
  double eval(double t, std::span<const double> b, double y,
              std::span<const double> z) const override {
    return fn(arg->eval(t, b, y, z));
  }
};

struct Binary final : Node {
  double (*fn)(double, double);
  NodePtr lhs, rhs;
  Binary(double (*f)(double, double), NodePtr l, NodePtr r)
      : fn(f), lhs(std::move(l)), rhs(std::move(r)) {}
  double eval(double t, std::span<const double> b, double y,
              std::span<const double> z) const override {
    return fn(lhs->eval(t, b, y, z), rhs->eval(t, b, y, z));
  }
};

double add(double a, double b) { return a + b; }
double sub(double a, double b) { return a - b; }
double mul(double a, double b) { return a * b; }
double divide(double a, double b) { return a / b; }
double neg(double a) { return -a; }
double sign_fn(double a) { return a > 0 ? 1.0 : (a < 0 ? -1.0 : 0.0); }
double lt(double a, double b) { return a < b ? 1.0 : 0.0; }
double le(double a, double b) { return a <= b ? 1.0 : 0.0; }
double gt(double a, double b) { return a > b ? 1.0 : 0.0; }
double ge(double a, double b) { return a >= b ? 1.0 : 0.0; }
double eq(double a, double b) { return a == b ? 1.0 : 0.0; }
double ne(double a, double b) { return a != b ? 1.0 : 0.0; }
double min_fn(double a, double b) { return std::fmin(a, b); }
double max_fn(double a, double b) { return std::fmax(a, b); }

class Parser {
 public:
  Parser(const std::string& src, int d) : src_(src), d_(d) {}

  NodePtr run() {
    NodePtr e = comparison();
    skip_ws();
    if (pos_ != src_.size()) fail("trailing input");
    return e;
  }

 private:
  const std::string& src_;
  int d_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("expr: " + what + " at position " +
                                std::to_string(pos_) + " in \"" + src_ + "\"");
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool accept(const char* s) {
    skip_ws();
    std::size_t n = 0;
    while (s[n]) ++n;
    if (src_.compare(pos_, n, s) == 0) {
      pos_ += n;
      return true;
    }
    return false;
  }

  NodePtr comparison() {
    NodePtr lhs = sum();
    skip_ws();
    if (accept("<=")) return std::make_shared<Binary>(le, lhs, sum());
    if (accept(">=")) return std::make_shared<Binary>(ge, lhs, sum());
    if (accept("==")) return std::make_shared<Binary>(eq, lhs, sum());
    if (accept("!=")) return std::make_shared<Binary>(ne, lhs, sum());
    if (accept('<')) return std::make_shared<Binary>(lt, lhs, sum());
    if (accept('>')) return std::make_shared<Binary>(gt, lhs, sum());
    return lhs;
  }

  NodePtr sum() {
    NodePtr e = product();
    for (;;) {
      if (accept('+')) e = std::make_shared<Binary>(add, e, product());
      else if (accept('-')) e = std::make_shared<Binary>(sub, e, product());
      else return e;
    }
  }

  NodePtr product() {
    NodePtr e = unary();
    for (;;) {
      if (accept('*')) e = std::make_shared<Binary>(mul, e, unary());
      else if (accept('/')) e = std::make_shared<Binary>(divide, e, unary());
      else return e;
    }
  }

  NodePtr unary() {
    if (accept('-')) return std::make_shared<Unary>(neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (accept('^')) {
      double (*pw)(double, double) = [](double a, double b) {
        return std::pow(a, b);
      };
      return std::make_shared<Binary>(pw, base, unary());
    }
    return base;
  }

  NodePtr atom() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    if (accept('(')) {
      NodePtr e = comparison();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    fail("unexpected character");
  }

  NodePtr number() {
    std::size_t consumed = 0;
    double v = std::stod(src_.substr(pos_), &consumed);
    pos_ += consumed;
    return std::make_shared<Const>(v);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string name = src_.substr(start, pos_ - start);

    if (name == "t") return std::make_shared<VarNode>(Var::T, 0);
    if (name == "y") return std::make_shared<VarNode>(Var::Y, 0);
    if (name == "pi") return std::make_shared<Const>(3.14159265358979323846);
    if (name == "normb") return std::make_shared<VarNode>(Var::NormB, 0);
    if (name == "normz") return std::make_shared<VarNode>(Var::NormZ, 0);
    if ((name[0] == 'b' || name[0] == 'z') && name.size() >= 2 &&
        std::isdigit(static_cast<unsigned char>(name[1]))) {
      const int idx = std::stoi(name.substr(1)) - 1;
      if (idx < 0 || idx >= d_) fail("component index out of range for d=" + std::to_string(d_));
      return std::make_shared<VarNode>(name[0] == 'b' ? Var::B : Var::Z, idx);
    }

    struct Fn1 { const char* name; double (*fn)(double); };
    static constexpr Fn1 unary_fns[] = {
        {"abs", std::fabs}, {"exp", std::exp}, {"sin", std::sin},
        {"cos", std::cos},  {"ln", std::log},  {"sqrt", std::sqrt},
        {"cbrt", std::cbrt}, {"sign", sign_fn},
    };
    struct Fn2 { const char* name; double (*fn)(double, double); };
    static constexpr Fn2 binary_fns[] = {
        {"min", min_fn}, {"max", max_fn}, {"pow", std::pow},
    };

    if (!accept('(')) fail("unknown variable '" + name + "'");
    for (const auto& f : unary_fns) {
      if (name == f.name) {
        NodePtr a = comparison();
        if (!accept(')')) fail("expected ')'");
        return std::make_shared<Unary>(f.fn, a);
      }
    }
    for (const auto& f : binary_fns) {
      if (name == f.name) {
        NodePtr a = comparison();
        if (!accept(',')) fail("expected ','");
        NodePtr b = comparison();
        if (!accept(')')) fail("expected ')'");
        return std::make_shared<Binary>(f.fn, a, b);
      }
    }
    fail("unknown function '" + name + "'");
  }
};

}  // namespace

Evaluator parse(const std::string& source, int d) {
  if (d < 1) throw std::invalid_argument("expr: d must be at least 1");
  NodePtr root = Parser(source, d).run();
  return [root](double t, std::span<const double> b, double y,
                std::span<const double> z) { return root->eval(t, b, y, z); };
}

}  // namespace bsde::expr
