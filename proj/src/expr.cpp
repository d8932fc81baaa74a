#include "acbm/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace acbm {

namespace {

// ---------------------------------------------------------------------------
// AST construction with constant folding

ExprPtr make_const(Rational v) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Constant;
  n->value = std::move(v);
  return n;
}

ExprPtr make_var(int index) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Variable;
  n->var_index = index;
  return n;
}

template <class S>
S int_pow_value(S base, long k) {
  bool invert = false;
  if (k < 0) {
    if (scalar_is_zero(base, 0.0))
      throw SingularPointError("zero raised to a negative power");
    invert = true;
    k = -k;
  }
  S r(1);
  S b = std::move(base);
  while (k > 0) {
    if (k & 1) r *= b;
    b *= b;
    k >>= 1;
  }
  return invert ? S(S(1) / r) : r;
}

ExprPtr make_binary(BinOp op, ExprPtr l, ExprPtr r) {
  if (l->kind == ExprNode::Kind::Constant &&
      r->kind == ExprNode::Kind::Constant) {
    switch (op) {
      case BinOp::Add:
        return make_const(l->value + r->value);
      case BinOp::Sub:
        return make_const(l->value - r->value);
      case BinOp::Mul:
        return make_const(l->value * r->value);
      case BinOp::Div:
        if (!r->value.is_zero()) return make_const(l->value / r->value);
        break;  // keep the node; evaluation reports the singularity
    }
  }
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Binary;
  n->op = op;
  n->lhs = std::move(l);
  n->rhs = std::move(r);
  return n;
}

ExprPtr make_unary(UnaryFn fn, ExprPtr c) {
  if (fn == UnaryFn::Neg && c->kind == ExprNode::Kind::Constant)
    return make_const(-c->value);
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Unary;
  n->fn = fn;
  n->lhs = std::move(c);
  return n;
}

ExprPtr make_power(ExprPtr base, long k) {
  if (base->kind == ExprNode::Kind::Constant &&
      (k >= 0 || !base->value.is_zero()))
    return make_const(int_pow_value(base->value, k));
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Power;
  n->exponent = k;
  n->lhs = std::move(base);
  return n;
}

// ---------------------------------------------------------------------------
// Lexer

struct Token {
  enum class Kind {
    Number,
    Ident,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End
  };
  Kind kind = Kind::End;
  std::size_t offset = 0;
  Rational number;
  std::string ident;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    tok_ = Token{};
    tok_.offset = pos_;
    if (pos_ >= text_.size()) {
      tok_.kind = Token::Kind::End;
      return;
    }
    const char c = text_[pos_];
    switch (c) {
      case '+': tok_.kind = Token::Kind::Plus; ++pos_; return;
      case '-': tok_.kind = Token::Kind::Minus; ++pos_; return;
      case '*': tok_.kind = Token::Kind::Star; ++pos_; return;
      case '/': tok_.kind = Token::Kind::Slash; ++pos_; return;
      case '^': tok_.kind = Token::Kind::Caret; ++pos_; return;
      case '(': tok_.kind = Token::Kind::LParen; ++pos_; return;
      case ')': tok_.kind = Token::Kind::RParen; ++pos_; return;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_])))
        ++pos_;
      if (pos_ < text_.size() && text_[pos_] == '.') {
        ++pos_;
        if (pos_ >= text_.size() ||
            !std::isdigit(static_cast<unsigned char>(text_[pos_])))
          throw SyntaxError("expected digits after decimal point", pos_);
        while (pos_ < text_.size() &&
               std::isdigit(static_cast<unsigned char>(text_[pos_])))
          ++pos_;
      }
      tok_.kind = Token::Kind::Number;
      tok_.number =
          rational_from_string(text_.substr(start, pos_ - start));
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_'))
        ++pos_;
      tok_.kind = Token::Kind::Ident;
      tok_.ident = std::string(text_.substr(start, pos_ - start));
      return;
    }
    throw SyntaxError(std::string("unexpected character '") + c + "'", pos_);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  Token tok_;
};

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  Parser(std::string_view text, int dim) : lex_(text), dim_(dim) {}

  ExprPtr run() {
    ExprPtr e = expr();
    if (lex_.peek().kind != Token::Kind::End)
      throw SyntaxError("unexpected trailing input", lex_.peek().offset);
    return e;
  }

 private:
  ExprPtr expr() {
    ExprPtr lhs = term();
    for (;;) {
      const auto k = lex_.peek().kind;
      if (k == Token::Kind::Plus)
        lhs = (lex_.take(), make_binary(BinOp::Add, lhs, term()));
      else if (k == Token::Kind::Minus)
        lhs = (lex_.take(), make_binary(BinOp::Sub, lhs, term()));
      else
        return lhs;
    }
  }

  ExprPtr term() {
    ExprPtr lhs = unary();
    for (;;) {
      const auto k = lex_.peek().kind;
      if (k == Token::Kind::Star)
        lhs = (lex_.take(), make_binary(BinOp::Mul, lhs, unary()));
      else if (k == Token::Kind::Slash)
        lhs = (lex_.take(), make_binary(BinOp::Div, lhs, unary()));
      else
        return lhs;
    }
  }

  ExprPtr unary() {
    const auto k = lex_.peek().kind;
    if (k == Token::Kind::Minus) {
      lex_.take();
      return make_unary(UnaryFn::Neg, unary());
    }
    if (k == Token::Kind::Plus) {
      lex_.take();
      return unary();
    }
    return postfix();
  }

  ExprPtr postfix() {
    ExprPtr base = primary();
    if (lex_.peek().kind != Token::Kind::Caret) return base;
    lex_.take();
    bool neg = false;
    if (lex_.peek().kind == Token::Kind::Minus) {
      neg = true;
      lex_.take();
    }
    const Token t = lex_.take();
    if (t.kind != Token::Kind::Number ||
        boost::multiprecision::denominator(t.number) != 1)
      throw SyntaxError("exponent must be an integer", t.offset);
    const auto num = boost::multiprecision::numerator(t.number);
    if (num > std::numeric_limits<long>::max())
      throw SyntaxError("exponent out of range", t.offset);
    long k = num.convert_to<long>();
    return make_power(base, neg ? -k : k);
  }

  ExprPtr primary() {
    const Token t = lex_.take();
    switch (t.kind) {
      case Token::Kind::Number:
        return make_const(t.number);
      case Token::Kind::LParen: {
        ExprPtr e = expr();
        expect(Token::Kind::RParen, "expected ')'");
        return e;
      }
      case Token::Kind::Ident:
        return ident(t);
      default:
        throw SyntaxError("expected a number, variable, function or '('",
                          t.offset);
    }
  }

  ExprPtr ident(const Token& t) {
    const std::string& s = t.ident;
    if (s.size() >= 2 && s[0] == 'x' &&
        std::all_of(s.begin() + 1, s.end(), [](char c) {
          return std::isdigit(static_cast<unsigned char>(c));
        })) {
      const long idx = std::stol(s.substr(1));
      if (idx >= dim_)
        throw SyntaxError("variable index " + std::to_string(idx) +
                              " out of range for dimension " +
                              std::to_string(dim_),
                          t.offset);
      return make_var(static_cast<int>(idx));
    }
    UnaryFn fn;
    if (s == "sin")
      fn = UnaryFn::Sin;
    else if (s == "cos")
      fn = UnaryFn::Cos;
    else if (s == "arctan")
      fn = UnaryFn::Arctan;
    else if (s == "ln")
      fn = UnaryFn::Ln;
    else if (s == "exp")
      fn = UnaryFn::Exp;
    else if (s == "sqrt")
      fn = UnaryFn::Sqrt;
    else
      throw SyntaxError("unknown identifier '" + s + "'", t.offset);
    expect(Token::Kind::LParen, "expected '(' after function name");
    ExprPtr arg = expr();
    expect(Token::Kind::RParen, "expected ')'");
    return make_unary(fn, arg);
  }

  void expect(Token::Kind k, const char* msg) {
    const Token t = lex_.take();
    if (t.kind != k) throw SyntaxError(msg, t.offset);
  }

  Lexer lex_;
  int dim_;
};

// ---------------------------------------------------------------------------
// Evaluation

template <class S>
S eval_node(const ExprNode& n, std::span<const S> p) {
  using Kind = ExprNode::Kind;
  switch (n.kind) {
    case Kind::Constant:
      if constexpr (std::is_same_v<S, double>)
        return to_double(n.value);
      else
        return n.value;
    case Kind::Variable:
      return p[static_cast<std::size_t>(n.var_index)];
    case Kind::Binary: {
      const S l = eval_node(*n.lhs, p);
      const S r = eval_node(*n.rhs, p);
      switch (n.op) {
        case BinOp::Add: return S(l + r);
        case BinOp::Sub: return S(l - r);
        case BinOp::Mul: return S(l * r);
        case BinOp::Div:
          if (scalar_is_zero(r, 0.0))
            throw SingularPointError("division by zero");
          return S(l / r);
      }
      break;
    }
    case Kind::Power:
      return int_pow_value(eval_node(*n.lhs, p), n.exponent);
    case Kind::Unary: {
      const S c = eval_node(*n.lhs, p);
      if (n.fn == UnaryFn::Neg) return S(-c);
      if constexpr (std::is_same_v<S, double>) {
        switch (n.fn) {
          case UnaryFn::Sin: return std::sin(c);
          case UnaryFn::Cos: return std::cos(c);
          case UnaryFn::Arctan: return std::atan(c);
          case UnaryFn::Ln:
            if (c <= 0)
              throw SingularPointError("ln of a non-positive value");
            return std::log(c);
          case UnaryFn::Exp: return std::exp(c);
          case UnaryFn::Sqrt:
            if (c < 0) throw SingularPointError("sqrt of a negative value");
            return std::sqrt(c);
          default: break;
        }
      } else {
        throw Error("exact evaluation of a transcendental node");
      }
      break;
    }
  }
  throw Error("malformed expression node");
}

template <class S>
struct Dual {
  S v{0};
  S d{0};
};

template <class S>
Dual<S> dual_node(const ExprNode& n, std::span<const S> p, int seed) {
  using Kind = ExprNode::Kind;
  switch (n.kind) {
    case Kind::Constant:
      if constexpr (std::is_same_v<S, double>)
        return {to_double(n.value), 0.0};
      else
        return {n.value, S(0)};
    case Kind::Variable:
      return {p[static_cast<std::size_t>(n.var_index)],
              S(n.var_index == seed ? 1 : 0)};
    case Kind::Binary: {
      const Dual<S> l = dual_node(*n.lhs, p, seed);
      const Dual<S> r = dual_node(*n.rhs, p, seed);
      switch (n.op) {
        case BinOp::Add: return {S(l.v + r.v), S(l.d + r.d)};
        case BinOp::Sub: return {S(l.v - r.v), S(l.d - r.d)};
        case BinOp::Mul: return {S(l.v * r.v), S(l.d * r.v + l.v * r.d)};
        case BinOp::Div:
          if (scalar_is_zero(r.v, 0.0))
            throw SingularPointError("division by zero");
          return {S(l.v / r.v), S((l.d * r.v - l.v * r.d) / (r.v * r.v))};
      }
      break;
    }
    case Kind::Power: {
      const Dual<S> c = dual_node(*n.lhs, p, seed);
      const long k = n.exponent;
      const S val = int_pow_value(c.v, k);
      if (k == 0) return {val, S(0)};
      // d(v^k) = k v^{k-1} v'
      const S dv = S(k) * int_pow_value(c.v, k - 1) * c.d;
      return {val, dv};
    }
    case Kind::Unary: {
      const Dual<S> c = dual_node(*n.lhs, p, seed);
      if (n.fn == UnaryFn::Neg) return {S(-c.v), S(-c.d)};
      if constexpr (std::is_same_v<S, double>) {
        switch (n.fn) {
          case UnaryFn::Sin: return {std::sin(c.v), std::cos(c.v) * c.d};
          case UnaryFn::Cos: return {std::cos(c.v), -std::sin(c.v) * c.d};
          case UnaryFn::Arctan:
            return {std::atan(c.v), c.d / (1.0 + c.v * c.v)};
          case UnaryFn::Ln:
            if (c.v <= 0)
              throw SingularPointError("ln of a non-positive value");
            return {std::log(c.v), c.d / c.v};
          case UnaryFn::Exp: {
            const double e = std::exp(c.v);
            return {e, e * c.d};
          }
          case UnaryFn::Sqrt: {
            if (c.v <= 0)
              throw SingularPointError(
                  "derivative of sqrt at a non-positive value");
            const double s = std::sqrt(c.v);
            return {s, c.d / (2.0 * s)};
          }
          default: break;
        }
      } else {
        throw Error("exact differentiation of a transcendental node");
      }
      break;
    }
  }
  throw Error("malformed expression node");
}

// Non-throwing value+margin pass used for regular-point sampling.
struct MarginValue {
  double v = 0;
  double m = std::numeric_limits<double>::infinity();
};

MarginValue margin_node(const ExprNode& n, std::span<const double> p) {
  using Kind = ExprNode::Kind;
  auto guard = [](MarginValue mv) {
    if (!std::isfinite(mv.v)) mv.m = -std::numeric_limits<double>::infinity();
    return mv;
  };
  switch (n.kind) {
    case Kind::Constant:
      return {to_double(n.value), std::numeric_limits<double>::infinity()};
    case Kind::Variable:
      return {p[static_cast<std::size_t>(n.var_index)],
              std::numeric_limits<double>::infinity()};
    case Kind::Binary: {
      const MarginValue l = margin_node(*n.lhs, p);
      const MarginValue r = margin_node(*n.rhs, p);
      double m = std::min(l.m, r.m);
      double v = 0;
      switch (n.op) {
        case BinOp::Add: v = l.v + r.v; break;
        case BinOp::Sub: v = l.v - r.v; break;
        case BinOp::Mul: v = l.v * r.v; break;
        case BinOp::Div:
          m = std::min(m, std::fabs(r.v));
          v = l.v / r.v;
          break;
      }
      return guard({v, m});
    }
    case Kind::Power: {
      const MarginValue c = margin_node(*n.lhs, p);
      double m = c.m;
      if (n.exponent < 0) m = std::min(m, std::fabs(c.v));
      double v;
      try {
        v = int_pow_value(c.v, n.exponent);
      } catch (const SingularPointError&) {
        return {0.0, -std::numeric_limits<double>::infinity()};
      }
      return guard({v, m});
    }
    case Kind::Unary: {
      const MarginValue c = margin_node(*n.lhs, p);
      switch (n.fn) {
        case UnaryFn::Neg: return {-c.v, c.m};
        case UnaryFn::Sin: return guard({std::sin(c.v), c.m});
        case UnaryFn::Cos: return guard({std::cos(c.v), c.m});
        case UnaryFn::Arctan: return guard({std::atan(c.v), c.m});
        case UnaryFn::Ln:
          return guard({std::log(c.v), std::min(c.m, c.v)});
        case UnaryFn::Exp: return guard({std::exp(c.v), c.m});
        case UnaryFn::Sqrt:
          return guard({std::sqrt(c.v), std::min(c.m, c.v)});
      }
      break;
    }
  }
  return {0.0, -std::numeric_limits<double>::infinity()};
}

// ---------------------------------------------------------------------------
// Printing

int prec(const ExprNode& n) {
  switch (n.kind) {
    case ExprNode::Kind::Constant:
      return n.value < 0 ? 3 : 5;
    case ExprNode::Kind::Variable:
      return 5;
    case ExprNode::Kind::Binary:
      return (n.op == BinOp::Add || n.op == BinOp::Sub) ? 1 : 2;
    case ExprNode::Kind::Unary:
      return n.fn == UnaryFn::Neg ? 3 : 5;
    case ExprNode::Kind::Power:
      return 4;
  }
  return 5;
}

void print_node(const ExprNode& n, int ctx, std::string& out) {
  const bool parens = prec(n) < ctx;
  if (parens) out += '(';
  switch (n.kind) {
    case ExprNode::Kind::Constant:
      out += rational_to_string(n.value);
      break;
    case ExprNode::Kind::Variable:
      out += 'x';
      out += std::to_string(n.var_index);
      break;
    case ExprNode::Kind::Binary: {
      const int base = prec(n);
      print_node(*n.lhs, base, out);
      switch (n.op) {
        case BinOp::Add: out += " + "; break;
        case BinOp::Sub: out += " - "; break;
        case BinOp::Mul: out += "*"; break;
        case BinOp::Div: out += "/"; break;
      }
      print_node(*n.rhs, base + 1, out);
      break;
    }
    case ExprNode::Kind::Unary: {
      switch (n.fn) {
        case UnaryFn::Neg:
          out += '-';
          print_node(*n.lhs, 4, out);
          break;
        case UnaryFn::Sin: out += "sin("; break;
        case UnaryFn::Cos: out += "cos("; break;
        case UnaryFn::Arctan: out += "arctan("; break;
        case UnaryFn::Ln: out += "ln("; break;
        case UnaryFn::Exp: out += "exp("; break;
        case UnaryFn::Sqrt: out += "sqrt("; break;
      }
      if (n.fn != UnaryFn::Neg) {
        print_node(*n.lhs, 0, out);
        out += ')';
      }
      break;
    }
    case ExprNode::Kind::Power:
      print_node(*n.lhs, 5, out);
      out += '^';
      out += std::to_string(n.exponent);
      break;
  }
  if (parens) out += ')';
}

bool nodes_equal(const ExprNode& a, const ExprNode& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExprNode::Kind::Constant:
      return a.value == b.value;
    case ExprNode::Kind::Variable:
      return a.var_index == b.var_index;
    case ExprNode::Kind::Binary:
      return a.op == b.op && nodes_equal(*a.lhs, *b.lhs) &&
             nodes_equal(*a.rhs, *b.rhs);
    case ExprNode::Kind::Unary:
      return a.fn == b.fn && nodes_equal(*a.lhs, *b.lhs);
    case ExprNode::Kind::Power:
      return a.exponent == b.exponent && nodes_equal(*a.lhs, *b.lhs);
  }
  return false;
}

bool node_exact(const ExprNode& n) {
  switch (n.kind) {
    case ExprNode::Kind::Constant:
    case ExprNode::Kind::Variable:
      return true;
    case ExprNode::Kind::Binary:
      return node_exact(*n.lhs) && node_exact(*n.rhs);
    case ExprNode::Kind::Power:
      return node_exact(*n.lhs);
    case ExprNode::Kind::Unary:
      return n.fn == UnaryFn::Neg && node_exact(*n.lhs);
  }
  return false;
}

void check_point_size(std::size_t got, int dim) {
  if (got != static_cast<std::size_t>(dim))
    throw Error("point has " + std::to_string(got) +
                " coordinates, expected " + std::to_string(dim));
}

}  // namespace

// ---------------------------------------------------------------------------
// Expression

Expression Expression::parse(std::string_view text, int dim) {
  if (dim <= 0) throw Error("dimension must be positive");
  return Expression(Parser(text, dim).run(), dim);
}

Expression Expression::constant(const Rational& value, int dim) {
  return Expression(make_const(value), dim);
}

Expression Expression::variable(int index, int dim) {
  if (index < 0 || index >= dim) throw Error("variable index out of range");
  return Expression(make_var(index), dim);
}

bool Expression::is_exact() const { return root_ && node_exact(*root_); }

std::string Expression::str() const {
  std::string out;
  if (root_) print_node(*root_, 0, out);
  return out;
}

bool Expression::operator==(const Expression& o) const {
  if (!root_ || !o.root_) return root_ == o.root_;
  return dim_ == o.dim_ && nodes_equal(*root_, *o.root_);
}

double Expression::eval(std::span<const double> point) const {
  check_point_size(point.size(), dim_);
  return eval_node<double>(*root_, point);
}

Rational Expression::eval_exact(std::span<const Rational> point) const {
  check_point_size(point.size(), dim_);
  if (!is_exact())
    throw Error("expression contains transcendental nodes; exact evaluation "
                "is not available");
  return eval_node<Rational>(*root_, point);
}

std::variant<Rational, double> Expression::eval_scalar(
    std::span<const Rational> point) const {
  if (is_exact()) return eval_exact(point);
  std::vector<double> p(point.size());
  for (std::size_t i = 0; i < point.size(); ++i) p[i] = to_double(point[i]);
  return eval(p);
}

double Expression::partial(int var, std::span<const double> point) const {
  check_point_size(point.size(), dim_);
  if (var < 0 || var >= dim_) throw Error("variable index out of range");
  return dual_node<double>(*root_, point, var).d;
}

Rational Expression::partial_exact(int var,
                                   std::span<const Rational> point) const {
  check_point_size(point.size(), dim_);
  if (var < 0 || var >= dim_) throw Error("variable index out of range");
  if (!is_exact())
    throw Error("expression contains transcendental nodes; exact "
                "differentiation is not available");
  return dual_node<Rational>(*root_, point, var).d;
}

Covector<double> Expression::differential(
    std::span<const double> point) const {
  Covector<double> out(static_cast<std::size_t>(dim_));
  for (int i = 0; i < dim_; ++i) out[i] = partial(i, point);
  return out;
}

double Expression::regularity_margin(std::span<const double> point) const {
  check_point_size(point.size(), dim_);
  return margin_node(*root_, point).m;
}

// ---------------------------------------------------------------------------
// Regular-point sampling

std::vector<Point<double>> sample_regular_points(
    std::span<const Expression> exprs, int dim, int count, std::uint64_t seed,
    const SampleOptions& opts) {
  std::mt19937_64 rng(seed);
  std::vector<Point<double>> out;
  out.reserve(static_cast<std::size_t>(count));
  const long max_attempts = 10000L * std::max(count, 1);
  Point<double> p(static_cast<std::size_t>(dim));
  for (long attempt = 0; attempt < max_attempts &&
                         out.size() < static_cast<std::size_t>(count);
       ++attempt) {
    for (int i = 0; i < dim; ++i)
      p[static_cast<std::size_t>(i)] =
          static_cast<double>(draw_int(rng, -opts.range, opts.range));
    for (const auto& [idx, val] : opts.fixed)
      p[static_cast<std::size_t>(idx)] = val;
    bool ok = true;
    for (const Expression& e : exprs)
      if (!(e.regularity_margin(p) > opts.min_margin)) {
        ok = false;
        break;
      }
    if (ok) out.push_back(p);
  }
  if (out.size() < static_cast<std::size_t>(count))
    throw Error("could not sample enough regular points");
  return out;
}

}  // namespace acbm
