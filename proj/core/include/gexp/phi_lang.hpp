#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gexp {

/// Grammar (no division, so every expression is Lipschitz on compacts):
///
///   expr   := term (('+' | '-') term)*
///   term   := factor ('*' factor)*
///   factor := number | 'x'k | fn '(' expr {',' expr} ')' | '(' expr ')' | '-' factor
///   fn     := cos | sin | exp | abs | min | max | clip
///
/// cos/sin/exp/abs take one argument, min/max two or more, clip(e, lo, hi)
/// exactly three.
namespace phi {

enum class Op { Number, Var, Neg, Add, Sub, Mul, Cos, Sin, Exp, Abs, Min, Max, Clip };

struct Node {
  Op op = Op::Number;
  double number = 0.0;
  int var = 0;  // 1-based coordinate index for Op::Var
  std::vector<Node> args;

  friend bool operator==(const Node&, const Node&) = default;
};

/// Fully parenthesised rendering; parses back to the same tree.
[[nodiscard]] std::string render(const Node& node);

}  // namespace phi

/// A bounded, Lipschitz test function of `arity` path coordinates. Evaluation
/// is always clipped to [-bound, bound].
class Functional {
 public:
  [[nodiscard]] double operator()(std::span<const double> x) const;

  [[nodiscard]] const std::string& source() const noexcept { return source_; }
  [[nodiscard]] int arity() const noexcept { return arity_; }
  [[nodiscard]] double bound() const noexcept { return bound_; }
  [[nodiscard]] const phi::Node& tree() const noexcept { return *root_; }

  /// Re-render of the (unclipped) expression.
  [[nodiscard]] std::string pretty() const { return phi::render(*root_); }

 private:
  friend Functional parse(std::string_view, int, double);
  friend Functional from_tree(phi::Node, int, double);

  std::string source_;
  int arity_ = 1;
  double bound_ = 1.0;
  std::shared_ptr<const phi::Node> root_;
};

/// Throws ParseError (with position) on syntax errors, unknown functions,
/// wrong function arity, or x_k with k outside 1..arity. Throws
/// InvalidArgument for arity < 1 or bound <= 0.
[[nodiscard]] Functional parse(std::string_view source, int arity, double bound);

[[nodiscard]] Functional from_tree(phi::Node root, int arity, double bound);

/// Throws InvalidArgument on arity mismatch.
[[nodiscard]] double eval(const Functional& f, std::span<const double> x);

/// Upper bound on the Lipschitz constant of f, with respect to the max norm on coordinates,
/// over the box [-radius, radius]^n. Composed node by node with interval ranges; includes the outer clip.
[[nodiscard]] double lipschitz_bound(const Functional& f, double radius);

/// Built-in catalog: cos1 = clip(cos(x1), +-1), sq = clip(x1*x1, +-25),
/// lin = clip(x1, +-10).
[[nodiscard]] std::optional<Functional> catalog(std::string_view name);
[[nodiscard]] std::vector<std::string> catalog_names();

/// Catalog name or expression. Catalog entries ignore arity/bound.
[[nodiscard]] Functional resolve_functional(std::string_view name_or_expr, int arity,
                                            double bound);

/// (1/n) sum_i f(x_i) for an arity-1 f, with f's own clip applied per term.
[[nodiscard]] Functional mean_lift(const Functional& f, int n);

}  // namespace gexp
