#pragma once
// Expression language for the transformation functions u, v, w: a small
// recursive-descent parser, evaluation at a point, and exact partial
// differentiation with forward-mode dual numbers.
//
// Grammar (see docs/expression_grammar.ebnf):
//   expr    = term { ("+"|"-") term }
//   term    = unary { ("*"|"/") unary }
//   unary   = ("-"|"+") unary | postfix
//   postfix = primary [ "^" [ "-" ] digits ]
//   primary = number | variable | function "(" expr ")" | "(" expr ")"
// Variables are x0 .. x{d-1}; functions are sin cos arctan ln exp sqrt.
// Numeric literals are decimal; "p/q" is plain division, which folds to an
// exact rational constant.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "acbm/base.hpp"

namespace acbm {

enum class UnaryFn : std::uint8_t { Neg, Sin, Cos, Arctan, Ln, Exp, Sqrt };
enum class BinOp : std::uint8_t { Add, Sub, Mul, Div };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

// Immutable AST node. Constants are exact rationals; decimal literals are
// converted losslessly at parse time.
struct ExprNode {
  enum class Kind : std::uint8_t { Constant, Variable, Binary, Unary, Power };

  Kind kind;
  Rational value;     // Constant
  int var_index = 0;  // Variable
  BinOp op{};         // Binary
  UnaryFn fn{};       // Unary
  long exponent = 0;  // Power
  ExprPtr lhs, rhs;
};

class Expression {
 public:
  Expression() = default;

  // Throws SyntaxError (with byte offset) on malformed input or a variable
  // index >= dim.
  static Expression parse(std::string_view text, int dim);

  static Expression constant(const Rational& value, int dim);
  static Expression variable(int index, int dim);

  int dim() const { return dim_; }
  const ExprPtr& root() const { return root_; }

  // True when no transcendental node (sin/cos/arctan/ln/exp/sqrt) occurs;
  // such expressions evaluate and differentiate exactly over rationals.
  bool is_exact() const;

  // Round-trippable text form: parse(str()) compares equal.
  std::string str() const;
  bool operator==(const Expression& o) const;

  double eval(std::span<const double> point) const;
  Rational eval_exact(std::span<const Rational> point) const;

  // Exact rational when the AST is rational-only, double otherwise.
  std::variant<Rational, double> eval_scalar(
      std::span<const Rational> point) const;

  // d(expr)/dx_var at the point, via a dual-number pass.
  double partial(int var, std::span<const double> point) const;
  Rational partial_exact(int var, std::span<const Rational> point) const;

  // All d partials as a covector.
  Covector<double> differential(std::span<const double> point) const;

  // Minimum over the guard quantities that must stay away from zero for the
  // point to be regular: |divisors|, ln/sqrt arguments, |bases| of negative
  // powers. +inf when the expression is total. Never throws.
  double regularity_margin(std::span<const double> point) const;

 private:
  Expression(ExprPtr root, int dim) : root_(std::move(root)), dim_(dim) {}

  ExprPtr root_;
  int dim_ = 0;
};

struct SampleOptions {
  std::int64_t range = 6;    // coordinates drawn from [-range, range]
  double min_margin = 1e-6;  // regularity threshold on every expression
  // coordinate index -> pinned value, applied after drawing
  std::vector<std::pair<int, double>> fixed;
};

// Rejection sampling on integer lattice points: a draw is kept only when
// every expression's regularity margin clears opts.min_margin. Deterministic
// for a given seed. Throws Error if the acceptance rate is hopeless.
std::vector<Point<double>> sample_regular_points(
    std::span<const Expression> exprs, int dim, int count, std::uint64_t seed,
    const SampleOptions& opts = {});

}  // namespace acbm
