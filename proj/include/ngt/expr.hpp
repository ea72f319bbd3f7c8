#pragma once

// Scalar expression language: parsing, pretty-printing, evaluation and
// symbolic differentiation. One AST type carries g(t), f(x,t), b(x) and the
// manufactured solutions u(x).
//
// Grammar (conventional precedence, '^' binds tighter than unary minus):
//   expr  := term (("+"|"-") term)*
//   term  := unary (("*"|"/") unary)*
//   unary := "-" unary | power
//   power := atom ("^" unary)?          right associative
//   atom  := number | ident | ident "(" expr ("," expr)* ")" | "(" expr ")"
// Functions: exp ln sin cos abs sqrt step (unary), pow (binary), min max (n-ary).
// step(z) is the Heaviside function with step(0) = 1; it is what derivatives of
// abs/min/max are written in terms of.

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ngt/error.hpp"

namespace ngt {

enum class Op : std::uint8_t {
  constant,
  variable,
  neg,
  add,
  sub,
  mul,
  div,
  pow,
  exp,
  ln,
  sin,
  cos,
  abs,
  sqrt,
  step,
  min,
  max,
};

namespace detail {
struct Node;
}

/// Immutable expression tree. Copies share structure.
class Expr {
 public:
  Expr();

  static Expr constant(double v);
  static Expr variable(std::string name);
  /// Builds a node without any simplification. Arity is validated.
  static Expr make(Op op, std::vector<Expr> args);

  Op op() const noexcept;
  double value() const noexcept;
  const std::string& name() const noexcept;
  const std::vector<Expr>& args() const noexcept;

  bool is_constant() const noexcept { return op() == Op::constant; }
  bool is_constant(double v) const noexcept { return is_constant() && value() == v; }

  const void* identity() const noexcept { return node_.get(); }

 private:
  explicit Expr(std::shared_ptr<const detail::Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const detail::Node> node_;
};

namespace detail {

struct Node {
  Op op = Op::constant;
  double value = 0.0;
  std::string name;
  std::vector<Expr> args;
};

inline const char* op_name(Op op) {
  switch (op) {
    case Op::constant: return "const";
    case Op::variable: return "var";
    case Op::neg: return "-";
    case Op::add: return "+";
    case Op::sub: return "-";
    case Op::mul: return "*";
    case Op::div: return "/";
    case Op::pow: return "^";
    case Op::exp: return "exp";
    case Op::ln: return "ln";
    case Op::sin: return "sin";
    case Op::cos: return "cos";
    case Op::abs: return "abs";
    case Op::sqrt: return "sqrt";
    case Op::step: return "step";
    case Op::min: return "min";
    case Op::max: return "max";
  }
  return "?";
}

inline bool is_unary(Op op) {
  switch (op) {
    case Op::neg:
    case Op::exp:
    case Op::ln:
    case Op::sin:
    case Op::cos:
    case Op::abs:
    case Op::sqrt:
    case Op::step: return true;
    default: return false;
  }
}

inline bool is_binary(Op op) {
  return op == Op::add || op == Op::sub || op == Op::mul || op == Op::div || op == Op::pow;
}

inline std::string shortest(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

inline double apply_unary(Op op, double a) {
  double r = 0.0;
  switch (op) {
    case Op::neg: r = -a; break;
    case Op::exp: r = std::exp(a); break;
    case Op::ln:
      if (!(a > 0.0)) throw EvalError("domain error: ln of non-positive value " + shortest(a));
      r = std::log(a);
      break;
    case Op::sin: r = std::sin(a); break;
    case Op::cos: r = std::cos(a); break;
    case Op::abs: r = std::fabs(a); break;
    case Op::sqrt:
      if (a < 0.0) throw EvalError("domain error: sqrt of negative value " + shortest(a));
      r = std::sqrt(a);
      break;
    case Op::step: r = a >= 0.0 ? 1.0 : 0.0; break;
    default: throw EvalError("internal: not a unary operator");
  }
  if (std::isnan(r)) throw EvalError(std::string("domain error in ") + op_name(op));
  return r;
}

inline double apply_binary(Op op, double a, double b) {
  double r = 0.0;
  switch (op) {
    case Op::add: r = a + b; break;
    case Op::sub: r = a - b; break;
    case Op::mul: r = a * b; break;
    case Op::div:
      if (b == 0.0) throw EvalError("domain error: division by zero");
      r = a / b;
      break;
    case Op::pow:
      if (a == 0.0 && b < 0.0) throw EvalError("domain error: 0 raised to a negative power");
      if (a < 0.0 && b != std::trunc(b))
        throw EvalError("domain error: negative base " + shortest(a) + " with non-integer exponent");
      r = std::pow(a, b);
      break;
    default: throw EvalError("internal: not a binary operator");
  }
  if (std::isnan(r)) throw EvalError(std::string("domain error in '") + op_name(op) + "'");
  return r;
}

inline double apply_nary(Op op, std::span<const double> xs) {
  double r = xs[0];
  for (std::size_t i = 1; i < xs.size(); ++i) r = (op == Op::min) ? std::min(r, xs[i]) : std::max(r, xs[i]);
  return r;
}

}  // namespace detail

inline Expr::Expr() : Expr(constant(0.0)) {}

inline Expr Expr::constant(double v) {
  auto n = std::make_shared<detail::Node>();
  n->op = Op::constant;
  n->value = v;
  return Expr(std::move(n));
}

inline Expr Expr::variable(std::string name) {
  auto n = std::make_shared<detail::Node>();
  n->op = Op::variable;
  n->name = std::move(name);
  return Expr(std::move(n));
}

inline Expr Expr::make(Op op, std::vector<Expr> args) {
  if (op == Op::constant || op == Op::variable) throw Error("Expr::make: leaf ops need constant()/variable()");
  const std::size_t k = args.size();
  if ((detail::is_unary(op) && k != 1) || (detail::is_binary(op) && k != 2) ||
      ((op == Op::min || op == Op::max) && k < 1))
    throw Error(std::string("Expr::make: wrong arity for '") + detail::op_name(op) + "'");
  auto n = std::make_shared<detail::Node>();
  n->op = op;
  n->args = std::move(args);
  return Expr(std::move(n));
}

inline Op Expr::op() const noexcept { return node_->op; }
inline double Expr::value() const noexcept { return node_->value; }
inline const std::string& Expr::name() const noexcept { return node_->name; }
inline const std::vector<Expr>& Expr::args() const noexcept { return node_->args; }

// ---------------------------------------------------------------------------
// Pretty printing. Fully parenthesized so that parse(to_string(e)) rebuilds
// the same tree; numbers use the shortest round-trip representation.

namespace detail {

inline void print(const Expr& e, std::string& out) {
  switch (e.op()) {
    case Op::constant:
      if (std::signbit(e.value())) {
        out += "(-";
        out += shortest(-e.value());
        out += ')';
      } else {
        out += shortest(e.value());
      }
      return;
    case Op::variable: out += e.name(); return;
    case Op::neg:
      out += "(-";
      if (e.args()[0].is_constant()) {
        out += '(';
        print(e.args()[0], out);
        out += ')';
      } else {
        print(e.args()[0], out);
      }
      out += ')';
      return;
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div:
    case Op::pow:
      out += '(';
      print(e.args()[0], out);
      out += op_name(e.op());
      print(e.args()[1], out);
      out += ')';
      return;
    default:
      out += op_name(e.op());
      out += '(';
      for (std::size_t i = 0; i < e.args().size(); ++i) {
        if (i) out += ',';
        print(e.args()[i], out);
      }
      out += ')';
      return;
  }
}

}  // namespace detail

inline std::string to_string(const Expr& e) {
  std::string s;
  detail::print(e, s);
  return s;
}

// ---------------------------------------------------------------------------
// Parser

namespace detail {

struct FunctionInfo {
  std::string_view name;
  Op op;
  int min_args;
  int max_args;  // -1 for unbounded
};

inline constexpr std::array<FunctionInfo, 10> kFunctions{{
    {"exp", Op::exp, 1, 1},
    {"ln", Op::ln, 1, 1},
    {"sin", Op::sin, 1, 1},
    {"cos", Op::cos, 1, 1},
    {"abs", Op::abs, 1, 1},
    {"sqrt", Op::sqrt, 1, 1},
    {"step", Op::step, 1, 1},
    {"pow", Op::pow, 2, 2},
    {"min", Op::min, 1, -1},
    {"max", Op::max, 1, -1},
}};

inline const FunctionInfo* find_function(std::string_view name) {
  for (const auto& f : kFunctions)
    if (f.name == name) return &f;
  return nullptr;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Expr parse_all() {
    Expr e = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) fail("operator or end of input");
    return e;
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
                                  src_[pos_] == '\r'))
      ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  std::string found() const {
    if (pos_ >= src_.size()) return "end of input";
    return std::string("'") + src_[pos_] + "'";
  }

  [[noreturn]] void fail(const std::string& expected) const { throw ParseError(pos_, expected, found()); }

  void expect(char c) {
    if (peek() != c) fail(std::string("'") + c + "'");
    ++pos_;
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    for (;;) {
      char c = peek();
      if (c != '+' && c != '-') return lhs;
      ++pos_;
      Expr rhs = parse_term();
      lhs = Expr::make(c == '+' ? Op::add : Op::sub, {lhs, rhs});
    }
  }

  Expr parse_term() {
    Expr lhs = parse_unary();
    for (;;) {
      char c = peek();
      if (c != '*' && c != '/') return lhs;
      ++pos_;
      Expr rhs = parse_unary();
      lhs = Expr::make(c == '*' ? Op::mul : Op::div, {lhs, rhs});
    }
  }

  Expr parse_unary() {
    if (peek() == '-') {
      ++pos_;
      const char next = peek();
      Expr operand = parse_unary();
      // a bare literal after '-' is a negative constant, so printed constants re-parse as constants
      if ((digit(next) || next == '.') && operand.is_constant()) return Expr::constant(-operand.value());
      return Expr::make(Op::neg, {operand});
    }
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_atom();
    if (peek() == '^') {
      ++pos_;
      Expr exponent = parse_unary();
      return Expr::make(Op::pow, {base, exponent});
    }
    return base;
  }

  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
  static bool digit(char c) { return c >= '0' && c <= '9'; }

  Expr parse_number() {
    const std::size_t start = pos_;
    std::size_t i = pos_;
    while (i < src_.size() && digit(src_[i])) ++i;
    if (i < src_.size() && src_[i] == '.') {
      ++i;
      while (i < src_.size() && digit(src_[i])) ++i;
    }
    if (i == start + 1 && src_[start] == '.') fail("digit");
    if (i < src_.size() && (src_[i] == 'e' || src_[i] == 'E')) {
      std::size_t j = i + 1;
      if (j < src_.size() && (src_[j] == '+' || src_[j] == '-')) ++j;
      if (j >= src_.size() || !digit(src_[j])) {
        pos_ = j;
        fail("exponent digits");
      }
      while (j < src_.size() && digit(src_[j])) ++j;
      i = j;
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + i, v);
    if (ec != std::errc() || ptr != src_.data() + i || !std::isfinite(v)) fail("finite number");
    pos_ = i;
    return Expr::constant(v);
  }

  Expr parse_atom() {
    char c = peek();
    if (digit(c) || c == '.') return parse_number();
    if (c == '(') {
      ++pos_;
      Expr e = parse_expr();
      expect(')');
      return e;
    }
    if (ident_start(c)) {
      const std::size_t start = pos_;
      while (pos_ < src_.size() && ident_char(src_[pos_])) ++pos_;
      std::string name(src_.substr(start, pos_ - start));
      const FunctionInfo* fn = find_function(name);
      if (fn == nullptr) {
        if (peek() == '(') {
          pos_ = start;
          fail("known function (exp, ln, sin, cos, abs, sqrt, step, pow, min, max)");
        }
        return Expr::variable(std::move(name));
      }
      expect('(');
      std::vector<Expr> args;
      args.push_back(parse_expr());
      while (peek() == ',') {
        ++pos_;
        args.push_back(parse_expr());
      }
      const int n = static_cast<int>(args.size());
      if (n < fn->min_args || (fn->max_args >= 0 && n > fn->max_args)) {
        fail(fn->max_args == 1 ? std::string("')'") : std::string("',' or ')'"));
      }
      expect(')');
      return Expr::make(fn->op, std::move(args));
    }
    fail("number, identifier, '-' or '('");
  }
};

}  // namespace detail

/// Parses source text into an AST. Throws ParseError with the byte offset.
inline Expr parse(std::string_view source) { return detail::Parser(source).parse_all(); }

// ---------------------------------------------------------------------------
// Structural queries

inline bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.identity() == b.identity()) return true;
  if (a.op() != b.op()) return false;
  switch (a.op()) {
    case Op::constant: return std::bit_cast<std::uint64_t>(a.value()) == std::bit_cast<std::uint64_t>(b.value());
    case Op::variable: return a.name() == b.name();
    default:
      if (a.args().size() != b.args().size()) return false;
      for (std::size_t i = 0; i < a.args().size(); ++i)
        if (!structurally_equal(a.args()[i], b.args()[i])) return false;
      return true;
  }
}

inline void collect_variables(const Expr& e, std::set<std::string>& out) {
  if (e.op() == Op::variable) {
    out.insert(e.name());
    return;
  }
  for (const auto& a : e.args()) collect_variables(a, out);
}

inline std::set<std::string> free_variables(const Expr& e) {
  std::set<std::string> out;
  collect_variables(e, out);
  return out;
}

inline bool depends_on(const Expr& e, std::string_view var) {
  if (e.op() == Op::variable) return e.name() == var;
  return std::any_of(e.args().begin(), e.args().end(), [&](const Expr& a) { return depends_on(a, var); });
}

// ---------------------------------------------------------------------------
// Evaluation

using Bindings = std::map<std::string, double, std::less<>>;

inline double eval(const Expr& e, const Bindings& bindings) {
  switch (e.op()) {
    case Op::constant: return e.value();
    case Op::variable: {
      auto it = bindings.find(e.name());
      if (it == bindings.end()) throw EvalError("unbound variable '" + e.name() + "'");
      return it->second;
    }
    case Op::min:
    case Op::max: {
      std::vector<double> xs;
      xs.reserve(e.args().size());
      for (const auto& a : e.args()) xs.push_back(eval(a, bindings));
      return detail::apply_nary(e.op(), xs);
    }
    default:
      if (detail::is_unary(e.op())) return detail::apply_unary(e.op(), eval(e.args()[0], bindings));
      return detail::apply_binary(e.op(), eval(e.args()[0], bindings), eval(e.args()[1], bindings));
  }
}

/// Expression flattened to a postfix program with variables resolved to slots.
/// This is the fast path used inside solvers and samplers; identifiers not in
/// the slot list are rejected when the program is built.
class CompiledExpr {
 public:
  CompiledExpr() = default;

  CompiledExpr(const Expr& e, std::vector<std::string> slots) : slots_(std::move(slots)) {
    int depth = 0;
    emit(e, depth);
  }

  const std::vector<std::string>& slots() const noexcept { return slots_; }

  double operator()(std::span<const double> values) const {
    if (values.size() < slots_.size()) throw EvalError("CompiledExpr: too few values for bound slots");
    if (max_depth_ <= kInlineStack) {
      std::array<double, kInlineStack> stack;
      return run(values, stack.data());
    }
    std::vector<double> stack(static_cast<std::size_t>(max_depth_));
    return run(values, stack.data());
  }

  double operator()(std::initializer_list<double> values) const {
    return (*this)(std::span<const double>(values.begin(), values.size()));
  }

 private:
  static constexpr int kInlineStack = 48;

  struct Instr {
    Op op;
    std::uint32_t arg;  // slot index for variables, arity for n-ary ops
    double value;
  };

  std::vector<std::string> slots_;
  std::vector<Instr> code_;
  int max_depth_ = 0;

  void emit(const Expr& e, int& depth) {
    switch (e.op()) {
      case Op::constant:
        code_.push_back({Op::constant, 0, e.value()});
        bump(depth, 1);
        return;
      case Op::variable: {
        auto it = std::find(slots_.begin(), slots_.end(), e.name());
        if (it == slots_.end()) throw EvalError("unbound variable '" + e.name() + "'");
        code_.push_back({Op::variable, static_cast<std::uint32_t>(it - slots_.begin()), 0.0});
        bump(depth, 1);
        return;
      }
      default:
        for (const auto& a : e.args()) emit(a, depth);
        code_.push_back({e.op(), static_cast<std::uint32_t>(e.args().size()), 0.0});
        depth -= static_cast<int>(e.args().size()) - 1;
        return;
    }
  }

  void bump(int& depth, int by) {
    depth += by;
    max_depth_ = std::max(max_depth_, depth);
  }

  double run(std::span<const double> values, double* stack) const {
    int sp = 0;
    for (const Instr& in : code_) {
      switch (in.op) {
        case Op::constant: stack[sp++] = in.value; break;
        case Op::variable: stack[sp++] = values[in.arg]; break;
        case Op::min:
        case Op::max:
          sp -= static_cast<int>(in.arg);
          stack[sp] = detail::apply_nary(in.op, std::span<const double>(stack + sp, in.arg));
          ++sp;
          break;
        default:
          if (detail::is_unary(in.op)) {
            stack[sp - 1] = detail::apply_unary(in.op, stack[sp - 1]);
          } else {
            --sp;
            stack[sp - 1] = detail::apply_binary(in.op, stack[sp - 1], stack[sp]);
          }
      }
    }
    return stack[0];
  }
};

// ---------------------------------------------------------------------------
// Folding constructors. These do constant folding and drop additive zeros and
// multiplicative ones; nothing more.

namespace sym {

inline Expr fold(Op op, std::vector<Expr> args) {
  const bool all_const = std::all_of(args.begin(), args.end(), [](const Expr& a) { return a.is_constant(); });
  if (all_const) {
    try {
      double v = 0.0;
      if (op == Op::min || op == Op::max) {
        std::vector<double> xs;
        for (const auto& a : args) xs.push_back(a.value());
        v = detail::apply_nary(op, xs);
      } else if (detail::is_unary(op)) {
        v = detail::apply_unary(op, args[0].value());
      } else {
        v = detail::apply_binary(op, args[0].value(), args[1].value());
      }
      if (std::isfinite(v)) return Expr::constant(v);
    } catch (const EvalError&) {
      // leave the node unevaluated; the error surfaces at evaluation time
    }
  }
  return Expr::make(op, std::move(args));
}

inline Expr neg(const Expr& a) {
  if (a.op() == Op::neg) return a.args()[0];
  return fold(Op::neg, {a});
}

inline Expr add(const Expr& a, const Expr& b) {
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  return fold(Op::add, {a, b});
}

inline Expr sub(const Expr& a, const Expr& b) {
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return neg(b);
  return fold(Op::sub, {a, b});
}

inline Expr mul(const Expr& a, const Expr& b) {
  if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(-1.0)) return neg(b);
  if (b.is_constant(-1.0)) return neg(a);
  return fold(Op::mul, {a, b});
}

inline Expr div(const Expr& a, const Expr& b) {
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(0.0) && !b.is_constant(0.0)) return Expr::constant(0.0);
  return fold(Op::div, {a, b});
}

inline Expr pow(const Expr& a, const Expr& b) {
  if (b.is_constant(1.0)) return a;
  if (b.is_constant(0.0)) return Expr::constant(1.0);
  return fold(Op::pow, {a, b});
}

inline Expr call(Op op, const Expr& a) { return fold(op, {a}); }
inline Expr exp(const Expr& a) { return call(Op::exp, a); }
inline Expr ln(const Expr& a) { return call(Op::ln, a); }
inline Expr sin(const Expr& a) { return call(Op::sin, a); }
inline Expr cos(const Expr& a) { return call(Op::cos, a); }
inline Expr sqrt(const Expr& a) { return call(Op::sqrt, a); }
inline Expr step(const Expr& a) { return call(Op::step, a); }
inline Expr c(double v) { return Expr::constant(v); }

}  // namespace sym

inline Expr operator+(const Expr& a, const Expr& b) { return sym::add(a, b); }
inline Expr operator-(const Expr& a, const Expr& b) { return sym::sub(a, b); }
inline Expr operator*(const Expr& a, const Expr& b) { return sym::mul(a, b); }
inline Expr operator/(const Expr& a, const Expr& b) { return sym::div(a, b); }
inline Expr operator-(const Expr& a) { return sym::neg(a); }

// ---------------------------------------------------------------------------
// Differentiation

namespace detail {

class Differentiator {
 public:
  explicit Differentiator(std::string_view var) : var_(var) {}

  Expr d(const Expr& e) {
    auto it = memo_.find(e.identity());
    if (it != memo_.end()) return it->second.second;
    Expr r = compute(e);
    memo_.emplace(e.identity(), std::make_pair(e, r));
    return r;
  }

 private:
  std::string var_;
  // keeps the key expression alive so node addresses are not recycled
  std::unordered_map<const void*, std::pair<Expr, Expr>> memo_;

  // a.e. derivative of max(a, b) preferring a at ties; min mirrors it
  Expr select_derivative(Op op, const Expr& a, const Expr& da, const Expr& b, const Expr& db) {
    Expr first_wins = (op == Op::max) ? sym::step(a - b) : sym::step(b - a);
    return db + first_wins * (da - db);
  }

  Expr compute(const Expr& e) {
    using namespace sym;
    const auto& a = e.args();
    switch (e.op()) {
      case Op::constant: return c(0.0);
      case Op::variable: return c(e.name() == var_ ? 1.0 : 0.0);
      case Op::neg: return neg(d(a[0]));
      case Op::add: return d(a[0]) + d(a[1]);
      case Op::sub: return d(a[0]) - d(a[1]);
      case Op::mul: return d(a[0]) * a[1] + a[0] * d(a[1]);
      case Op::div: {
        Expr du = d(a[0]);
        Expr dv = d(a[1]);
        return du / a[1] - a[0] * dv / pow(a[1], c(2.0));
      }
      case Op::pow: {
        Expr du = d(a[0]);
        Expr dv = d(a[1]);
        if (dv.is_constant(0.0)) return a[1] * pow(a[0], a[1] - c(1.0)) * du;
        if (du.is_constant(0.0)) return e * ln(a[0]) * dv;
        return e * (dv * ln(a[0]) + a[1] * du / a[0]);
      }
      case Op::exp: return e * d(a[0]);
      case Op::ln: return d(a[0]) / a[0];
      case Op::sin: return cos(a[0]) * d(a[0]);
      case Op::cos: return neg(sin(a[0])) * d(a[0]);
      case Op::abs: {
        // abs(z) = max(z, -z); the tie z = 0 takes the first branch
        Expr du = d(a[0]);
        if (du.is_constant(0.0)) return c(0.0);
        return (c(2.0) * step(a[0]) - c(1.0)) * du;
      }
      case Op::sqrt: return d(a[0]) / (c(2.0) * e);
      case Op::step: return c(0.0);
      case Op::min:
      case Op::max: {
        Expr prefix = a[0];
        Expr dprefix = d(a[0]);
        for (std::size_t k = 1; k < a.size(); ++k) {
          Expr dk = d(a[k]);
          if (!(dprefix.is_constant(0.0) && dk.is_constant(0.0)))
            dprefix = select_derivative(e.op(), prefix, dprefix, a[k], dk);
          prefix = Expr::make(e.op(), std::vector<Expr>(a.begin(), a.begin() + static_cast<long>(k) + 1));
        }
        return dprefix;
      }
    }
    return c(0.0);
  }
};

}  // namespace detail

/// Symbolic partial derivative d e / d var.
inline Expr differentiate(const Expr& e, std::string_view var) { return detail::Differentiator(var).d(e); }

/// Replaces every occurrence of variable `var` with `replacement`.
inline Expr substitute(const Expr& e, std::string_view var, const Expr& replacement) {
  switch (e.op()) {
    case Op::constant: return e;
    case Op::variable: return e.name() == var ? replacement : e;
    default: {
      std::vector<Expr> args;
      args.reserve(e.args().size());
      for (const auto& a : e.args()) args.push_back(substitute(a, var, replacement));
      return Expr::make(e.op(), std::move(args));
    }
  }
}

}  // namespace ngt
