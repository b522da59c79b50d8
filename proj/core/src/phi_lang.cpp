#include "gexp/phi_lang.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <string>
#include <utility>

#include "gexp/errors.hpp"

namespace gexp {
namespace phi {
namespace {

struct FnInfo {
  std::string_view name;
  Op op;
  int min_args;
  int max_args;  // -1: unbounded
};

constexpr FnInfo kFunctions[] = {
    {"cos", Op::Cos, 1, 1},  {"sin", Op::Sin, 1, 1},  {"exp", Op::Exp, 1, 1},
    {"abs", Op::Abs, 1, 1},  {"min", Op::Min, 2, -1}, {"max", Op::Max, 2, -1},
    {"clip", Op::Clip, 3, 3},
};

const FnInfo* find_function(std::string_view name) {
  for (const auto& fn : kFunctions) {
    if (fn.name == name) return &fn;
  }
  return nullptr;
}

std::string_view function_name(Op op) {
  for (const auto& fn : kFunctions) {
    if (fn.op == op) return fn.name;
  }
  return "?";
}

class Parser {
 public:
  Parser(std::string_view text, int arity) : text_(text), arity_(arity) {}

  Node parse_all() {
    Node root = expr();
    skip_space();
    if (pos_ != text_.size()) {
      throw ParseError("unexpected '" + std::string(1, text_[pos_]) + "'", pos_);
    }
    return root;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  char peek() {
    skip_space();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  void expect(char c) {
    if (peek() != c) {
      if (pos_ >= text_.size()) {
        throw ParseError(std::string("expected '") + c + "' but input ended", pos_);
      }
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
    ++pos_;
  }

  Node expr() {
    Node lhs = term();
    for (char c = peek(); c == '+' || c == '-'; c = peek()) {
      ++pos_;
      Node rhs = term();
      Node n;
      n.op = c == '+' ? Op::Add : Op::Sub;
      n.args.push_back(std::move(lhs));
      n.args.push_back(std::move(rhs));
      lhs = std::move(n);
    }
    return lhs;
  }

  Node term() {
    Node lhs = factor();
    while (peek() == '*') {
      ++pos_;
      Node rhs = factor();
      Node n;
      n.op = Op::Mul;
      n.args.push_back(std::move(lhs));
      n.args.push_back(std::move(rhs));
      lhs = std::move(n);
    }
    return lhs;
  }

  Node factor() {
    const char c = peek();
    const std::size_t start = pos_;
    if (c == '\0') throw ParseError("unexpected end of input", pos_);
    if (c == '-') {
      ++pos_;
      Node n;
      n.op = Op::Neg;
      n.args.push_back(factor());
      return n;
    }
    if (c == '(') {
      ++pos_;
      Node inner = expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::string ident;
      while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) {
        ident += text_[pos_++];
      }
      if (ident.size() > 1 && ident[0] == 'x' &&
          std::all_of(ident.begin() + 1, ident.end(),
                      [](char d) { return std::isdigit(static_cast<unsigned char>(d)); })) {
        const long k = std::strtol(ident.c_str() + 1, nullptr, 10);
        if (k < 1 || k > arity_) {
          throw ParseError("variable " + ident + " out of range for arity " +
                               std::to_string(arity_),
                           start);
        }
        Node n;
        n.op = Op::Var;
        n.var = static_cast<int>(k);
        return n;
      }
      const FnInfo* fn = find_function(ident);
      if (fn == nullptr) throw ParseError("unknown identifier '" + ident + "'", start);
      expect('(');
      Node n;
      n.op = fn->op;
      n.args.push_back(expr());
      while (peek() == ',') {
        ++pos_;
        n.args.push_back(expr());
      }
      expect(')');
      const int count = static_cast<int>(n.args.size());
      if (count < fn->min_args || (fn->max_args >= 0 && count > fn->max_args)) {
        std::string wanted = std::to_string(fn->min_args);
        if (fn->max_args < 0) {
          wanted = "at least " + wanted;
        }
        throw ParseError(std::string(fn->name) + " expects " + wanted + " argument(s), got " +
                             std::to_string(count),
                         start);
      }
      return n;
    }
    throw ParseError("unexpected '" + std::string(1, c) + "'", pos_);
  }

  Node number() {
    const std::size_t start = pos_;
    const std::string rest(text_.substr(pos_));
    char* end = nullptr;
    const double value = std::strtod(rest.c_str(), &end);
    if (end == rest.c_str()) throw ParseError("malformed number", start);
    pos_ += static_cast<std::size_t>(end - rest.c_str());
    if (!std::isfinite(value)) throw ParseError("number out of range", start);
    Node n;
    n.op = Op::Number;
    n.number = value;
    return n;
  }

  std::string_view text_;
  int arity_;
  std::size_t pos_ = 0;
};

double evaluate(const Node& n, std::span<const double> x) {
  switch (n.op) {
    case Op::Number:
      return n.number;
    case Op::Var:
      return x[static_cast<std::size_t>(n.var - 1)];
    case Op::Neg:
      return -evaluate(n.args[0], x);
    case Op::Add:
      return evaluate(n.args[0], x) + evaluate(n.args[1], x);
    case Op::Sub:
      return evaluate(n.args[0], x) - evaluate(n.args[1], x);
    case Op::Mul:
      return evaluate(n.args[0], x) * evaluate(n.args[1], x);
    case Op::Cos:
      return std::cos(evaluate(n.args[0], x));
    case Op::Sin:
      return std::sin(evaluate(n.args[0], x));
    case Op::Exp:
      return std::exp(evaluate(n.args[0], x));
    case Op::Abs:
      return std::abs(evaluate(n.args[0], x));
    case Op::Min: {
      double v = evaluate(n.args[0], x);
      for (std::size_t i = 1; i < n.args.size(); ++i) v = std::min(v, evaluate(n.args[i], x));
      return v;
    }
    case Op::Max: {
      double v = evaluate(n.args[0], x);
      for (std::size_t i = 1; i < n.args.size(); ++i) v = std::max(v, evaluate(n.args[i], x));
      return v;
    }
    case Op::Clip: {
      const double v = evaluate(n.args[0], x);
      const double lo = evaluate(n.args[1], x);
      const double hi = evaluate(n.args[2], x);
      return std::min(std::max(v, lo), hi);
    }
  }
  return 0.0;
}

// Range of a node over a box, plus an l1-Lipschitz bound on that box.
struct Bound {
  double lo;
  double hi;
  double lip;
};

Bound analyse(const Node& n, double radius) {
  switch (n.op) {
    case Op::Number:
      return {n.number, n.number, 0.0};
    case Op::Var:
      return {-radius, radius, 1.0};
    case Op::Neg: {
      const Bound a = analyse(n.args[0], radius);
      return {-a.hi, -a.lo, a.lip};
    }
    case Op::Add:
    case Op::Sub: {
      const Bound a = analyse(n.args[0], radius);
      const Bound b = analyse(n.args[1], radius);
      if (n.op == Op::Add) return {a.lo + b.lo, a.hi + b.hi, a.lip + b.lip};
      return {a.lo - b.hi, a.hi - b.lo, a.lip + b.lip};
    }
    case Op::Mul: {
      const Bound a = analyse(n.args[0], radius);
      const Bound b = analyse(n.args[1], radius);
      const double c[] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
      const double amax = std::max(std::abs(a.lo), std::abs(a.hi));
      const double bmax = std::max(std::abs(b.lo), std::abs(b.hi));
      return {*std::min_element(std::begin(c), std::end(c)),
              *std::max_element(std::begin(c), std::end(c)), amax * b.lip + bmax * a.lip};
    }
    case Op::Cos:
    case Op::Sin: {
      const Bound a = analyse(n.args[0], radius);
      return {-1.0, 1.0, a.lip};
    }
    case Op::Exp: {
      const Bound a = analyse(n.args[0], radius);
      return {std::exp(a.lo), std::exp(a.hi), std::exp(a.hi) * a.lip};
    }
    case Op::Abs: {
      const Bound a = analyse(n.args[0], radius);
      const double lo = (a.lo <= 0.0 && a.hi >= 0.0) ? 0.0 : std::min(std::abs(a.lo), std::abs(a.hi));
      return {lo, std::max(std::abs(a.lo), std::abs(a.hi)), a.lip};
    }
    case Op::Min:
    case Op::Max: {
      Bound acc = analyse(n.args[0], radius);
      for (std::size_t i = 1; i < n.args.size(); ++i) {
        const Bound b = analyse(n.args[i], radius);
        if (n.op == Op::Min) {
          acc = {std::min(acc.lo, b.lo), std::min(acc.hi, b.hi), std::max(acc.lip, b.lip)};
        } else {
          acc = {std::max(acc.lo, b.lo), std::max(acc.hi, b.hi), std::max(acc.lip, b.lip)};
        }
      }
      return acc;
    }
    case Op::Clip: {
      const Bound v = analyse(n.args[0], radius);
      const Bound lo = analyse(n.args[1], radius);
      const Bound hi = analyse(n.args[2], radius);
      const double l = std::min(std::max(v.lo, lo.lo), hi.lo);
      const double h = std::min(std::max(v.hi, lo.hi), hi.hi);
      return {l, h, std::max({v.lip, lo.lip, hi.lip})};
    }
  }
  return {0.0, 0.0, 0.0};
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string render(const Node& n) {
  switch (n.op) {
    case Op::Number:
      // Negative literals only arise from constructed trees; keep them parseable.
      return n.number < 0.0 ? "(-" + format_number(-n.number) + ")" : format_number(n.number);
    case Op::Var:
      return "x" + std::to_string(n.var);
    case Op::Neg:
      return "(-" + render(n.args[0]) + ")";
    case Op::Add:
      return "(" + render(n.args[0]) + " + " + render(n.args[1]) + ")";
    case Op::Sub:
      return "(" + render(n.args[0]) + " - " + render(n.args[1]) + ")";
    case Op::Mul:
      return "(" + render(n.args[0]) + " * " + render(n.args[1]) + ")";
    default: {
      std::string out(function_name(n.op));
      out += '(';
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i > 0) out += ", ";
        out += render(n.args[i]);
      }
      out += ')';
      return out;
    }
  }
}

}  // namespace phi

namespace {

void check_shape(int arity, double bound) {
  if (arity < 1) throw InvalidArgument("functional arity must be >= 1");
  if (!(bound > 0.0) || !std::isfinite(bound)) {
    throw InvalidArgument("functional bound must be a finite positive number");
  }
}

int max_var(const phi::Node& n) {
  int k = n.op == phi::Op::Var ? n.var : 0;
  for (const auto& a : n.args) k = std::max(k, max_var(a));
  return k;
}

void substitute_var(phi::Node& n, int var) {
  if (n.op == phi::Op::Var) n.var = var;
  for (auto& a : n.args) substitute_var(a, var);
}

}  // namespace

double Functional::operator()(std::span<const double> x) const {
  const double v = phi::evaluate(*root_, x);
  return std::min(std::max(v, -bound_), bound_);
}

Functional parse(std::string_view source, int arity, double bound) {
  check_shape(arity, bound);
  phi::Parser parser(source, arity);
  Functional f;
  f.root_ = std::make_shared<const phi::Node>(parser.parse_all());
  f.source_ = std::string(source);
  f.arity_ = arity;
  f.bound_ = bound;
  return f;
}

Functional from_tree(phi::Node root, int arity, double bound) {
  check_shape(arity, bound);
  if (max_var(root) > arity) throw InvalidArgument("tree references a coordinate beyond arity");
  Functional f;
  f.source_ = phi::render(root);
  f.root_ = std::make_shared<const phi::Node>(std::move(root));
  f.arity_ = arity;
  f.bound_ = bound;
  return f;
}

double eval(const Functional& f, std::span<const double> x) {
  if (static_cast<int>(x.size()) != f.arity()) {
    throw InvalidArgument("functional expects " + std::to_string(f.arity()) +
                          " coordinate(s), got " + std::to_string(x.size()));
  }
  return f(x);
}

double lipschitz_bound(const Functional& f, double radius) {
  if (!(radius >= 0.0)) throw InvalidArgument("lipschitz_bound: radius must be >= 0");
  return phi::analyse(f.tree(), radius).lip;
}

std::optional<Functional> catalog(std::string_view name) {
  if (name == "cos1") return parse("cos(x1)", 1, 1.0);
  if (name == "sq") return parse("x1*x1", 1, 25.0);
  if (name == "lin") return parse("x1", 1, 10.0);
  return std::nullopt;
}

std::vector<std::string> catalog_names() { return {"cos1", "sq", "lin"}; }

Functional resolve_functional(std::string_view name_or_expr, int arity, double bound) {
  if (auto f = catalog(name_or_expr)) return *f;
  return parse(name_or_expr, arity, bound);
}

Functional mean_lift(const Functional& f, int n) {
  if (f.arity() != 1) throw InvalidArgument("mean_lift needs an arity-1 functional");
  if (n < 1) throw InvalidArgument("mean_lift needs n >= 1");
  if (n == 1) return f;

  phi::Node lo;
  lo.number = -f.bound();
  phi::Node hi;
  hi.number = f.bound();

  phi::Node sum;
  for (int i = 1; i <= n; ++i) {
    phi::Node term;
    term.op = phi::Op::Clip;
    term.args.push_back(f.tree());
    substitute_var(term.args[0], i);
    term.args.push_back(lo);
    term.args.push_back(hi);
    if (i == 1) {
      sum = std::move(term);
    } else {
      phi::Node add;
      add.op = phi::Op::Add;
      add.args.push_back(std::move(sum));
      add.args.push_back(std::move(term));
      sum = std::move(add);
    }
  }
  phi::Node scale;
  scale.number = 1.0 / n;
  phi::Node mean;
  mean.op = phi::Op::Mul;
  mean.args.push_back(std::move(scale));
  mean.args.push_back(std::move(sum));
  return from_tree(std::move(mean), n, f.bound());
}

}  // namespace gexp
