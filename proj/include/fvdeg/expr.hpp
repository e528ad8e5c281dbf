#pragma once

// Small closed-form expression language used for model data (f, phi, u0, g).
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?
//   primary := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//
// Variables: u, x, y. Constants: pi. Functions: max, min, abs, pos (positive
// part), ind(a, lo, hi) (indicator of lo <= a <= hi), exp, log, sqrt, sin, cos.

#include <array>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace fvdeg {

enum class Var : int { U = 0, X = 1, Y = 2 };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

class Expression {
 public:
  using Vars = std::array<double, 3>;

  Expression();  // the constant 0
  static Expression parse(std::string_view source);
  static Expression constant(double value);

  double eval(const Vars& vars) const;
  double operator()(double u) const { return eval({u, 0.0, 0.0}); }
  double at(double x, double y = 0.0) const { return eval({0.0, x, y}); }

  /// Symbolic derivative. At kinks of max/min/abs the right derivative is used.
  Expression derivative(Var var = Var::U) const;

  bool depends_on(Var var) const;
  bool is_constant() const { return !depends_on(Var::U) && !depends_on(Var::X) && !depends_on(Var::Y); }
  const std::string& source() const { return source_; }

 private:
  struct Instr {
    int op;
    double value;
  };
  explicit Expression(ExprPtr root, std::string source);
  void compile();

  ExprPtr root_;
  std::string source_;
  std::vector<Instr> program_;
  int stack_depth_ = 1;
};

}  // namespace fvdeg
