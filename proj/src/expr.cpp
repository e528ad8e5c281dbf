#include "fvdeg/expr.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fvdeg/errors.hpp"

namespace fvdeg {

enum class Op : int {
  Const,
  Var,
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  Pow,
  Max,
  Min,
  Abs,
  Ind,
  Exp,
  Log,
  Sqrt,
  Sin,
  Cos,
  // Derivative selectors: args (a, b, da, db) for max/min, (a, da) for abs.
  DMax,
  DMin,
  DAbs,
};

struct ExprNode {
  Op op;
  double value = 0.0;
  int var = 0;
  std::vector<ExprPtr> args;
};

namespace {

ExprPtr make_const(double v) { return std::make_shared<ExprNode>(ExprNode{Op::Const, v, 0, {}}); }
ExprPtr make_var(Var v) { return std::make_shared<ExprNode>(ExprNode{Op::Var, 0.0, static_cast<int>(v), {}}); }
ExprPtr make_op(Op op, std::vector<ExprPtr> args) {
  return std::make_shared<ExprNode>(ExprNode{op, 0.0, 0, std::move(args)});
}

bool is_const(const ExprPtr& e, double v) { return e->op == Op::Const && e->value == v; }

int arity(Op op) {
  switch (op) {
    case Op::Const:
    case Op::Var:
      return 0;
    case Op::Neg:
    case Op::Abs:
    case Op::Exp:
    case Op::Log:
    case Op::Sqrt:
    case Op::Sin:
    case Op::Cos:
      return 1;
    case Op::Ind:
      return 3;
    case Op::DMax:
    case Op::DMin:
      return 4;
    case Op::DAbs:
      return 2;
    default:
      return 2;
  }
}

double apply(Op op, const double* a) {
  switch (op) {
    case Op::Add: return a[0] + a[1];
    case Op::Sub: return a[0] - a[1];
    case Op::Mul: return a[0] * a[1];
    case Op::Div: return a[0] / a[1];
    case Op::Neg: return -a[0];
    case Op::Pow: {
      // integer exponents keep negative bases well defined
      const double e = a[1];
      if (e == std::round(e) && std::abs(e) <= 64.0) {
        const int n = static_cast<int>(e);
        double r = 1.0, b = a[0];
        for (int k = std::abs(n); k > 0; --k) r *= b;
        return n >= 0 ? r : 1.0 / r;
      }
      return std::pow(a[0], e);
    }
    case Op::Max: return a[0] >= a[1] ? a[0] : a[1];
    case Op::Min: return a[0] <= a[1] ? a[0] : a[1];
    case Op::Abs: return std::abs(a[0]);
    case Op::Ind: return (a[0] >= a[1] && a[0] <= a[2]) ? 1.0 : 0.0;
    case Op::Exp: return std::exp(a[0]);
    case Op::Log: return std::log(a[0]);
    case Op::Sqrt: return std::sqrt(a[0]);
    case Op::Sin: return std::sin(a[0]);
    case Op::Cos: return std::cos(a[0]);
    case Op::DMax:
      if (a[0] > a[1]) return a[2];
      if (a[0] < a[1]) return a[3];
      return std::max(a[2], a[3]);
    case Op::DMin:
      if (a[0] < a[1]) return a[2];
      if (a[0] > a[1]) return a[3];
      return std::min(a[2], a[3]);
    case Op::DAbs:
      if (a[0] > 0.0) return a[1];
      if (a[0] < 0.0) return -a[1];
      return std::abs(a[1]);
    default: return 0.0;
  }
}

// Builders with light constant folding so derivative trees stay small.
ExprPtr fold(Op op, std::vector<ExprPtr> args) {
  bool all_const = true;
  for (const auto& a : args) all_const = all_const && a->op == Op::Const;
  if (all_const && !args.empty()) {
    double vals[4];
    for (std::size_t i = 0; i < args.size(); ++i) vals[i] = args[i]->value;
    return make_const(apply(op, vals));
  }
  switch (op) {
    case Op::Add:
      if (is_const(args[0], 0.0)) return args[1];
      if (is_const(args[1], 0.0)) return args[0];
      break;
    case Op::Sub:
      if (is_const(args[1], 0.0)) return args[0];
      if (is_const(args[0], 0.0)) return fold(Op::Neg, {args[1]});
      break;
    case Op::Mul:
      if (is_const(args[0], 0.0) || is_const(args[1], 0.0)) return make_const(0.0);
      if (is_const(args[0], 1.0)) return args[1];
      if (is_const(args[1], 1.0)) return args[0];
      break;
    case Op::Div:
      if (is_const(args[0], 0.0)) return make_const(0.0);
      if (is_const(args[1], 1.0)) return args[0];
      break;
    case Op::DMax:
    case Op::DMin:
      if (args[2]->op == Op::Const && args[3]->op == Op::Const && args[2]->value == args[3]->value)
        return args[2];
      break;
    default:
      break;
  }
  return make_op(op, std::move(args));
}

ExprPtr differentiate(const ExprPtr& e, int var) {
  const auto& a = e->args;
  auto d = [&](int i) { return differentiate(a[i], var); };
  switch (e->op) {
    case Op::Const:
    case Op::Ind:
      return make_const(0.0);
    case Op::Var:
      return make_const(e->var == var ? 1.0 : 0.0);
    case Op::Add: return fold(Op::Add, {d(0), d(1)});
    case Op::Sub: return fold(Op::Sub, {d(0), d(1)});
    case Op::Neg: return fold(Op::Neg, {d(0)});
    case Op::Mul:
      return fold(Op::Add, {fold(Op::Mul, {d(0), a[1]}), fold(Op::Mul, {a[0], d(1)})});
    case Op::Div:
      return fold(Op::Div, {fold(Op::Sub, {fold(Op::Mul, {d(0), a[1]}), fold(Op::Mul, {a[0], d(1)})}),
                            fold(Op::Mul, {a[1], a[1]})});
    case Op::Pow: {
      auto da = d(0);
      auto db = d(1);
      if (db->op == Op::Const && db->value == 0.0) {
        // c * a^(c-1) * a'
        auto c = a[1];
        return fold(Op::Mul, {fold(Op::Mul, {c, fold(Op::Pow, {a[0], fold(Op::Sub, {c, make_const(1.0)})})}), da});
      }
      auto lhs = fold(Op::Mul, {db, fold(Op::Log, {a[0]})});
      auto rhs = fold(Op::Div, {fold(Op::Mul, {a[1], da}), a[0]});
      return fold(Op::Mul, {e, fold(Op::Add, {lhs, rhs})});
    }
    case Op::Max: return fold(Op::DMax, {a[0], a[1], d(0), d(1)});
    case Op::Min: return fold(Op::DMin, {a[0], a[1], d(0), d(1)});
    case Op::Abs: return fold(Op::DAbs, {a[0], d(0)});
    case Op::Exp: return fold(Op::Mul, {e, d(0)});
    case Op::Log: return fold(Op::Div, {d(0), a[0]});
    case Op::Sqrt: return fold(Op::Div, {d(0), fold(Op::Mul, {make_const(2.0), e})});
    case Op::Sin: return fold(Op::Mul, {fold(Op::Cos, {a[0]}), d(0)});
    case Op::Cos: return fold(Op::Neg, {fold(Op::Mul, {fold(Op::Sin, {a[0]}), d(0)})});
    case Op::DMax:
    case Op::DMin:
    case Op::DAbs:
      // second derivative across a selector: differentiate the selected branch
      if (e->op == Op::DAbs) return fold(Op::DAbs, {a[0], d(1)});
      return fold(e->op, {a[0], a[1], d(2), d(3)});
  }
  return make_const(0.0);
}

bool depends(const ExprPtr& e, int var) {
  if (e->op == Op::Var) return e->var == var;
  for (const auto& a : e->args)
    if (depends(a, var)) return true;
  return false;
}

std::string print(const ExprPtr& e) {
  static const char* var_names[] = {"u", "x", "y"};
  const auto& a = e->args;
  std::ostringstream os;
  os.precision(17);
  auto bin = [&](const char* sym) { os << '(' << print(a[0]) << ' ' << sym << ' ' << print(a[1]) << ')'; };
  auto fn = [&](const char* name) {
    os << name << '(';
    for (std::size_t i = 0; i < a.size(); ++i) os << (i ? ", " : "") << print(a[i]);
    os << ')';
  };
  switch (e->op) {
    case Op::Const: os << e->value; break;
    case Op::Var: os << var_names[e->var]; break;
    case Op::Add: bin("+"); break;
    case Op::Sub: bin("-"); break;
    case Op::Mul: bin("*"); break;
    case Op::Div: bin("/"); break;
    case Op::Pow: bin("^"); break;
    case Op::Neg: os << "(-" << print(a[0]) << ')'; break;
    case Op::Max: fn("max"); break;
    case Op::Min: fn("min"); break;
    case Op::Abs: fn("abs"); break;
    case Op::Ind: fn("ind"); break;
    case Op::Exp: fn("exp"); break;
    case Op::Log: fn("log"); break;
    case Op::Sqrt: fn("sqrt"); break;
    case Op::Sin: fn("sin"); break;
    case Op::Cos: fn("cos"); break;
    case Op::DMax: fn("dmax"); break;
    case Op::DMin: fn("dmin"); break;
    case Op::DAbs: fn("dabs"); break;
  }
  return os.str();
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  ExprPtr parse_all() {
    auto e = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected character '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorKind::Parse,
                "expression '" + std::string(src_) + "' at column " + std::to_string(pos_ + 1) + ": " + msg);
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

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  ExprPtr parse_expr() {
    auto lhs = parse_term();
    for (;;) {
      if (accept('+')) lhs = fold(Op::Add, {lhs, parse_term()});
      else if (accept('-')) lhs = fold(Op::Sub, {lhs, parse_term()});
      else return lhs;
    }
  }

  ExprPtr parse_term() {
    auto lhs = parse_unary();
    for (;;) {
      if (accept('*')) lhs = fold(Op::Mul, {lhs, parse_unary()});
      else if (accept('/')) lhs = fold(Op::Div, {lhs, parse_unary()});
      else return lhs;
    }
  }

  ExprPtr parse_unary() {
    if (accept('-')) return fold(Op::Neg, {parse_unary()});
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  ExprPtr parse_power() {
    auto base = parse_primary();
    if (accept('^')) return fold(Op::Pow, {base, parse_unary()});
    return base;
  }

  ExprPtr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (accept('(')) {
      auto e = parse_expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
    fail(std::string("unexpected character '") + c + "'");
  }

  ExprPtr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
      if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
        pos_ = p;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
    }
    const std::string text(src_.substr(start, pos_ - start));
    try {
      std::size_t used = 0;
      const double v = std::stod(text, &used);
      if (used != text.size()) fail("malformed number '" + text + "'");
      return make_const(v);
    } catch (const std::logic_error&) {
      fail("malformed number '" + text + "'");
    }
  }

  ExprPtr parse_name() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
    const std::string name(src_.substr(start, pos_ - start));
    if (name == "u") return make_var(Var::U);
    if (name == "x") return make_var(Var::X);
    if (name == "y") return make_var(Var::Y);
    if (name == "pi") return make_const(std::numbers::pi);

    struct Fn {
      const char* name;
      Op op;
      int nargs;
    };
    static const Fn fns[] = {{"max", Op::Max, 2},   {"min", Op::Min, 2},   {"abs", Op::Abs, 1},
                             {"pos", Op::Max, 1},   {"ind", Op::Ind, 3},   {"exp", Op::Exp, 1},
                             {"log", Op::Log, 1},   {"sqrt", Op::Sqrt, 1}, {"sin", Op::Sin, 1},
                             {"cos", Op::Cos, 1}};
    for (const auto& fn : fns) {
      if (name != fn.name) continue;
      expect('(');
      std::vector<ExprPtr> args{parse_expr()};
      while (accept(',')) args.push_back(parse_expr());
      expect(')');
      if (static_cast<int>(args.size()) != fn.nargs)
        fail("function '" + name + "' takes " + std::to_string(fn.nargs) + " argument(s)");
      if (name == "pos") args.push_back(make_const(0.0));
      return fold(fn.op, std::move(args));
    }
    fail("unknown name '" + name + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression() : Expression(make_const(0.0), "0") {}

Expression::Expression(ExprPtr root, std::string source) : root_(std::move(root)), source_(std::move(source)) {
  compile();
}

Expression Expression::parse(std::string_view source) {
  Parser p(source);
  return Expression(p.parse_all(), std::string(source));
}

Expression Expression::constant(double value) {
  std::ostringstream os;
  os.precision(17);
  os << value;
  return Expression(make_const(value), os.str());
}

Expression Expression::derivative(Var var) const {
  auto d = differentiate(root_, static_cast<int>(var));
  return Expression(d, print(d));
}

bool Expression::depends_on(Var var) const { return depends(root_, static_cast<int>(var)); }

void Expression::compile() {
  program_.clear();
  int depth = 0;
  int max_depth = 1;
  // post-order emission
  auto emit = [&](auto&& self, const ExprPtr& e) -> void {
    for (const auto& a : e->args) self(self, a);
    if (e->op == Op::Const) {
      program_.push_back({static_cast<int>(Op::Const), e->value});
      ++depth;
    } else if (e->op == Op::Var) {
      program_.push_back({static_cast<int>(Op::Var), static_cast<double>(e->var)});
      ++depth;
    } else {
      program_.push_back({static_cast<int>(e->op), 0.0});
      depth -= arity(e->op) - 1;
    }
    max_depth = std::max(max_depth, depth);
  };
  emit(emit, root_);
  stack_depth_ = max_depth;
}

double Expression::eval(const Vars& vars) const {
  constexpr int kInline = 32;
  double inline_stack[kInline];
  inline_stack[0] = 0.0;
  std::vector<double> heap;
  double* stack = inline_stack;
  if (stack_depth_ > kInline) {
    heap.resize(static_cast<std::size_t>(stack_depth_));
    stack = heap.data();
  }
  int sp = 0;
  for (const auto& ins : program_) {
    const Op op = static_cast<Op>(ins.op);
    if (op == Op::Const) {
      stack[sp++] = ins.value;
    } else if (op == Op::Var) {
      stack[sp++] = vars[static_cast<std::size_t>(ins.value)];
    } else {
      const int n = arity(op);
      sp -= n;
      stack[sp] = apply(op, stack + sp);
      ++sp;
    }
  }
  return stack[0];
}

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidMesh: return "invalid-mesh";
    case ErrorKind::InvalidModel: return "invalid-model";
    case ErrorKind::InvalidData: return "invalid-data";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::Convergence: return "convergence";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Io: return "io";
    case ErrorKind::Verification: return "verification";
  }
  return "unknown";
}

}  // namespace fvdeg
