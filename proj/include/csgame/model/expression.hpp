#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace csgame {

/// Arithmetic formula over the variables t, x1..xd.
///
/// Grammar (loosest to tightest): `+ -`, `* /`, unary minus, `^` (right
/// associative). Functions: exp log sin cos sqrt abs tanh (one argument),
/// min max (two arguments). The constant `pi` is predefined.
///
/// Parsing builds an immutable tree and compiles it to a small postfix
/// program; evaluation only touches a local stack, so a single Expression may
/// be evaluated from many threads at once. Domain errors (division by zero,
/// log or sqrt outside their domain, any non-finite intermediate) raise
/// ExpressionError rather than returning NaN.
class Expression {
 public:
  /// The zero constant in dimension `dim`.
  explicit Expression(int dim = 1);

  static Expression parse(std::string_view src, int dim);
  static Expression constant(double value, int dim);

  double eval(double t, std::span<const double> x) const;

  /// Canonical, fully parenthesised text. Constants are printed with 17
  /// significant digits so that parse(print()) evaluates bit-identically.
  std::string print() const;

  int dim() const noexcept { return dim_; }
  bool is_constant() const noexcept;
  bool depends_on_time() const noexcept;

  struct Node;
  struct Instr {
    std::uint8_t op;
    double value;
    int var;
  };

 private:
  Expression(std::shared_ptr<const Node> root, int dim);
  void compile();

  std::shared_ptr<const Node> root_;
  std::vector<Instr> code_;
  int max_stack_ = 0;
  int dim_ = 1;
};

/// Free-function form used throughout the code base.
inline Expression parse_expression(std::string_view src, int dim) {
  return Expression::parse(src, dim);
}

/// Value, spatial gradient and spatial Hessian (row-major, d×d).
struct Derivatives {
  double value = 0.0;
  std::vector<double> gradient;
  std::vector<double> hessian;
};

/// Central finite differences with per-axis step fd_step·max(1,|x_i|).
/// `order` is 0, 1 or 2; the Hessian is symmetrised by averaging.
Derivatives eval_with_derivatives(const Expression& e, double t, std::span<const double> x,
                                  int order, double fd_step = 1e-5);

/// ∂_t e at (t,x): central where [t-h, t+h] ⊂ [0, horizon], one-sided otherwise.
double time_derivative(const Expression& e, double t, std::span<const double> x, double horizon,
                       double fd_step = 1e-5);

}  // namespace csgame
