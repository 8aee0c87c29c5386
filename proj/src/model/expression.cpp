#include "csgame/model/expression.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "csgame/error.hpp"

namespace csgame {

namespace {

enum class Op : std::uint8_t {
  kConst,
  kVar,
  kNeg,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kPow,
  kExp,
  kLog,
  kSin,
  kCos,
  kSqrt,
  kAbs,
  kTanh,
  kMin,
  kMax,
};

struct FunctionInfo {
  std::string_view name;
  Op op;
  int arity;
};

constexpr std::array<FunctionInfo, 9> kFunctions{{
    {"exp", Op::kExp, 1},
    {"log", Op::kLog, 1},
    {"sin", Op::kSin, 1},
    {"cos", Op::kCos, 1},
    {"sqrt", Op::kSqrt, 1},
    {"abs", Op::kAbs, 1},
    {"tanh", Op::kTanh, 1},
    {"min", Op::kMin, 2},
    {"max", Op::kMax, 2},
}};

std::string_view function_name(Op op) {
  for (const auto& f : kFunctions) {
    if (f.op == op) return f.name;
  }
  return "?";
}

[[noreturn]] void domain_error(const char* what) {
  throw ExpressionError(ExpressionError::Kind::kDomain, 0, what);
}

}  // namespace

struct Expression::Node {
  Op op = Op::kConst;
  double value = 0.0;  // kConst
  int var = 0;         // kVar: 0 = t, i = x_i
  std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr make_const(double v) {
  auto n = std::make_shared<Expression::Node>();
  n->op = Op::kConst;
  n->value = v;
  return n;
}

NodePtr make_node(Op op, std::vector<NodePtr> args) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->args = std::move(args);
  return n;
}

class Parser {
 public:
  Parser(std::string_view src, int dim) : src_(src), dim_(dim) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected character '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, ExpressionError::Kind kind =
                                                     ExpressionError::Kind::kSyntax) const {
    throw ExpressionError(kind, pos_, fmt::format("{} at offset {} in \"{}\"", msg, pos_, src_));
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

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make_node(Op::kAdd, {lhs, term()});
      } else if (accept('-')) {
        lhs = make_node(Op::kSub, {lhs, term()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make_node(Op::kMul, {lhs, unary()});
      } else if (accept('/')) {
        lhs = make_node(Op::kDiv, {lhs, unary()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make_node(Op::kNeg, {unary()});
    if (accept('+')) return unary();
    return power();
  }

  // '^' binds tighter than unary minus on its left, and its exponent may
  // itself carry a sign: -x^2 = -(x^2), 2^-1 = 0.5, a^b^c = a^(b^c).
  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make_node(Op::kPow, {base, unary()});
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) {
      ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
        pos_ = look;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
    }
    double v = 0.0;
    const auto* first = src_.data() + start;
    const auto* last = src_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
      pos_ = start;
      fail("malformed number");
    }
    return make_const(v);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = src_.substr(start, pos_ - start);

    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == '(') {
      for (const auto& f : kFunctions) {
        if (f.name != name) continue;
        ++pos_;
        std::vector<NodePtr> args;
        if (!accept(')')) {
          do {
            args.push_back(expr());
          } while (accept(','));
          if (!accept(')')) fail("expected ')' after function arguments");
        }
        if (static_cast<int>(args.size()) != f.arity) {
          pos_ = start;
          fail(fmt::format("function '{}' takes {} argument(s), got {}", name, f.arity,
                           args.size()),
               ExpressionError::Kind::kArity);
        }
        return make_node(f.op, std::move(args));
      }
      pos_ = start;
      fail(fmt::format("unknown function '{}'", name), ExpressionError::Kind::kUnknownIdentifier);
    }

    if (name == "t") return var(0);
    if (name == "pi") return make_const(std::numbers::pi);
    if (name.size() >= 2 && name[0] == 'x') {
      int idx = 0;
      auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
      if (ec == std::errc() && ptr == name.data() + name.size() && idx >= 1 && idx <= dim_) {
        return var(idx);
      }
    }
    pos_ = start;
    fail(fmt::format("unknown identifier '{}'", name), ExpressionError::Kind::kUnknownIdentifier);
  }

  static NodePtr var(int idx) {
    auto n = std::make_shared<Expression::Node>();
    n->op = Op::kVar;
    n->var = idx;
    return n;
  }

  std::string_view src_;
  int dim_;
  std::size_t pos_ = 0;
};

void print_node(const Expression::Node& n, std::string& out) {
  switch (n.op) {
    case Op::kConst:
      out += fmt::format("{:.17g}", n.value);
      return;
    case Op::kVar:
      out += n.var == 0 ? std::string("t") : fmt::format("x{}", n.var);
      return;
    case Op::kNeg:
      out += "(-";
      print_node(*n.args[0], out);
      out += ")";
      return;
    case Op::kAdd:
    case Op::kSub:
    case Op::kMul:
    case Op::kDiv:
    case Op::kPow: {
      static constexpr std::string_view kSym = "+-*/^";
      out += "(";
      print_node(*n.args[0], out);
      out += ' ';
      out += kSym[static_cast<int>(n.op) - static_cast<int>(Op::kAdd)];
      out += ' ';
      print_node(*n.args[1], out);
      out += ")";
      return;
    }
    default:
      out += function_name(n.op);
      out += "(";
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ", ";
        print_node(*n.args[i], out);
      }
      out += ")";
      return;
  }
}

void emit(const Expression::Node& n, std::vector<Expression::Instr>& code, int depth,
          int& max_depth) {
  int d = depth;
  for (const auto& a : n.args) {
    emit(*a, code, d, max_depth);
    ++d;
  }
  max_depth = std::max(max_depth, depth + 1);
  code.push_back({static_cast<std::uint8_t>(n.op), n.value, n.var});
}

bool any_node(const Expression::Node& n, Op op, int var) {
  if (n.op == op && (op != Op::kVar || n.var == var)) return true;
  for (const auto& a : n.args) {
    if (any_node(*a, op, var)) return true;
  }
  return false;
}

bool has_variable(const Expression::Node& n) {
  if (n.op == Op::kVar) return true;
  for (const auto& a : n.args) {
    if (has_variable(*a)) return true;
  }
  return false;
}

}  // namespace

Expression::Expression(int dim) : Expression(make_const(0.0), dim) {}

Expression::Expression(std::shared_ptr<const Node> root, int dim)
    : root_(std::move(root)), dim_(dim) {
  compile();
}

Expression Expression::parse(std::string_view src, int dim) {
  return Expression(Parser(src, dim).parse(), dim);
}

Expression Expression::constant(double value, int dim) { return Expression(make_const(value), dim); }

void Expression::compile() {
  code_.clear();
  max_stack_ = 0;
  emit(*root_, code_, 0, max_stack_);
}

std::string Expression::print() const {
  std::string out;
  print_node(*root_, out);
  return out;
}

bool Expression::is_constant() const noexcept { return !has_variable(*root_); }

bool Expression::depends_on_time() const noexcept { return any_node(*root_, Op::kVar, 0); }

double Expression::eval(double t, std::span<const double> x) const {
  constexpr int kInline = 32;
  std::array<double, kInline> small{};
  std::vector<double> big;
  double* stack = small.data();
  if (max_stack_ > kInline) {
    big.resize(static_cast<std::size_t>(max_stack_));
    stack = big.data();
  }
  int sp = 0;
  for (const Instr& in : code_) {
    switch (static_cast<Op>(in.op)) {
      case Op::kConst:
        stack[sp++] = in.value;
        break;
      case Op::kVar:
        stack[sp++] = in.var == 0 ? t : x[static_cast<std::size_t>(in.var - 1)];
        break;
      case Op::kNeg:
        stack[sp - 1] = -stack[sp - 1];
        break;
      case Op::kAdd:
        --sp;
        stack[sp - 1] += stack[sp];
        break;
      case Op::kSub:
        --sp;
        stack[sp - 1] -= stack[sp];
        break;
      case Op::kMul:
        --sp;
        stack[sp - 1] *= stack[sp];
        break;
      case Op::kDiv:
        --sp;
        if (stack[sp] == 0.0) domain_error("division by zero");
        stack[sp - 1] /= stack[sp];
        break;
      case Op::kPow: {
        --sp;
        const double e = stack[sp];
        const double b = stack[sp - 1];
        double r;
        if (e == 2.0) {
          r = b * b;
        } else {
          r = std::pow(b, e);
        }
        if (std::isnan(r)) domain_error("power of a negative base with non-integer exponent");
        stack[sp - 1] = r;
        break;
      }
      case Op::kExp:
        stack[sp - 1] = std::exp(stack[sp - 1]);
        break;
      case Op::kLog:
        if (stack[sp - 1] <= 0.0) domain_error("log of a non-positive argument");
        stack[sp - 1] = std::log(stack[sp - 1]);
        break;
      case Op::kSin:
        stack[sp - 1] = std::sin(stack[sp - 1]);
        break;
      case Op::kCos:
        stack[sp - 1] = std::cos(stack[sp - 1]);
        break;
      case Op::kSqrt:
        if (stack[sp - 1] < 0.0) domain_error("sqrt of a negative argument");
        stack[sp - 1] = std::sqrt(stack[sp - 1]);
        break;
      case Op::kAbs:
        stack[sp - 1] = std::abs(stack[sp - 1]);
        break;
      case Op::kTanh:
        stack[sp - 1] = std::tanh(stack[sp - 1]);
        break;
      case Op::kMin:
        --sp;
        stack[sp - 1] = std::min(stack[sp - 1], stack[sp]);
        break;
      case Op::kMax:
        --sp;
        stack[sp - 1] = std::max(stack[sp - 1], stack[sp]);
        break;
    }
  }
  const double r = stack[0];
  if (!std::isfinite(r)) domain_error("non-finite result");
  return r;
}

Derivatives eval_with_derivatives(const Expression& e, double t, std::span<const double> x,
                                  int order, double fd_step) {
  const std::size_t d = x.size();
  Derivatives out;
  out.value = e.eval(t, x);
  if (order < 1) return out;

  std::vector<double> p(x.begin(), x.end());
  std::vector<double> h(d);
  for (std::size_t i = 0; i < d; ++i) h[i] = fd_step * std::max(1.0, std::abs(x[i]));

  auto at = [&](std::size_t i, double di, std::size_t j, double dj) {
    p[i] += di;
    p[j] += dj;
    const double v = e.eval(t, p);
    p[i] = x[i];
    p[j] = x[j];
    return v;
  };

  out.gradient.assign(d, 0.0);
  std::vector<double> plus(d), minus(d);
  for (std::size_t i = 0; i < d; ++i) {
    plus[i] = at(i, h[i], i, 0.0);
    minus[i] = at(i, -h[i], i, 0.0);
    out.gradient[i] = (plus[i] - minus[i]) / (2.0 * h[i]);
  }
  if (order < 2) return out;

  out.hessian.assign(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    out.hessian[i * d + i] = (plus[i] - 2.0 * out.value + minus[i]) / (h[i] * h[i]);
    for (std::size_t j = i + 1; j < d; ++j) {
      const double pp = at(i, h[i], j, h[j]);
      const double pm = at(i, h[i], j, -h[j]);
      const double mp = at(i, -h[i], j, h[j]);
      const double mm = at(i, -h[i], j, -h[j]);
      const double v = (pp - pm - mp + mm) / (4.0 * h[i] * h[j]);
      out.hessian[i * d + j] = v;
      out.hessian[j * d + i] = v;
    }
  }
  return out;
}

double time_derivative(const Expression& e, double t, std::span<const double> x, double horizon,
                       double fd_step) {
  if (!e.depends_on_time()) return 0.0;
  const double h = fd_step * std::max(1.0, std::abs(t));
  const double lo = std::max(0.0, t - h);
  const double hi = std::min(horizon, t + h);
  if (hi <= lo) return 0.0;
  return (e.eval(hi, x) - e.eval(lo, x)) / (hi - lo);
}

}  // namespace csgame
