#include "hyptimes/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "hyptimes/errors.hpp"

namespace hyptimes {

namespace {

[[noreturn]] void fail(const std::string& what, std::size_t pos) {
  throw InputError("expression parse error at position " + std::to_string(pos) +
                   ": " + what);
}

}  // namespace

class ExprParser {
 public:
  ExprParser(Expression& out, const std::vector<std::string>& variables,
             const std::map<std::string, double>& constants)
      : e_(out), vars_(variables), consts_(constants) {}

  void run() {
    pos_ = 0;
    e_.root_ = parse_expr();
    skip_ws();
    if (pos_ != e_.text_.size()) fail("unexpected trailing input", pos_);
  }

 private:
  Expression& e_;
  const std::vector<std::string>& vars_;
  const std::map<std::string, double>& consts_;
  std::size_t pos_ = 0;

  const std::string& s() const { return e_.text_; }

  void skip_ws() {
    while (pos_ < s().size() && std::isspace(static_cast<unsigned char>(s()[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < s().size() && s()[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < s().size() ? s()[pos_] : '\0';
  }

  int add(Expression::Node n) {
    e_.nodes_.push_back(n);
    return static_cast<int>(e_.nodes_.size()) - 1;
  }

  int parse_expr() {
    int lhs = parse_term();
    for (;;) {
      if (eat('+')) {
        int rhs = parse_term();
        lhs = add({Expression::Op::kAdd, 0.0, -1, lhs, rhs});
      } else if (eat('-')) {
        int rhs = parse_term();
        lhs = add({Expression::Op::kSub, 0.0, -1, lhs, rhs});
      } else {
        return lhs;
      }
    }
  }

  int parse_term() {
    int lhs = parse_unary();
    for (;;) {
      if (eat('*')) {
        int rhs = parse_unary();
        lhs = add({Expression::Op::kMul, 0.0, -1, lhs, rhs});
      } else if (eat('/')) {
        int rhs = parse_unary();
        lhs = add({Expression::Op::kDiv, 0.0, -1, lhs, rhs});
      } else {
        return lhs;
      }
    }
  }

  int parse_unary() {
    if (eat('-')) {
      int a = parse_unary();
      return add({Expression::Op::kNeg, 0.0, -1, a, -1});
    }
    return parse_power();
  }

  int parse_power() {
    int base = parse_primary();
    if (eat('^')) {
      int exp = parse_unary();  // right-associative, binds unary minus in exponent
      return add({Expression::Op::kPow, 0.0, -1, base, exp});
    }
    return base;
  }

  int parse_primary() {
    skip_ws();
    if (pos_ >= s().size()) fail("unexpected end of input", pos_);
    const char c = s()[pos_];
    if (c == '(') {
      ++pos_;
      int inner = parse_expr();
      if (!eat(')')) fail("expected ')'", pos_);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
    fail(std::string("unexpected character '") + c + "'", pos_);
  }

  int parse_number() {
    const char* begin = s().c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("malformed number", pos_);
    pos_ += static_cast<std::size_t>(end - begin);
    return add({Expression::Op::kConst, v, -1, -1, -1});
  }

  int parse_ident() {
    const std::size_t start = pos_;
    while (pos_ < s().size() &&
           (std::isalnum(static_cast<unsigned char>(s()[pos_])) || s()[pos_] == '_')) {
      ++pos_;
    }
    const std::string name = s().substr(start, pos_ - start);
    if (peek() == '(') {
      ++pos_;  // consume '('
      if (name == "pow") {
        int a = parse_expr();
        if (!eat(',')) fail("pow expects two arguments", pos_);
        int b = parse_expr();
        if (!eat(')')) fail("expected ')'", pos_);
        return add({Expression::Op::kPow, 0.0, -1, a, b});
      }
      Expression::Op op;
      if (name == "sin") {
        op = Expression::Op::kSin;
      } else if (name == "cos") {
        op = Expression::Op::kCos;
      } else if (name == "exp") {
        op = Expression::Op::kExp;
      } else if (name == "log") {
        op = Expression::Op::kLog;
      } else {
        fail("unknown function '" + name + "'", start);
      }
      int a = parse_expr();
      if (!eat(')')) fail("expected ')'", pos_);
      return add({op, 0.0, -1, a, -1});
    }
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i] == name) {
        return add({Expression::Op::kVar, 0.0, static_cast<int>(i), -1, -1});
      }
    }
    if (auto it = consts_.find(name); it != consts_.end()) {
      return add({Expression::Op::kConst, it->second, -1, -1, -1});
    }
    throw InputError("undefined symbol '" + name + "' at position " +
                     std::to_string(start));
  }
};

Expression Expression::parse(const std::string& text,
                             const std::vector<std::string>& variables,
                             const std::map<std::string, double>& constants) {
  Expression e;
  e.text_ = text;
  e.arity_ = static_cast<int>(variables.size());
  // pi and e are always available; explicit constants and variables shadow them.
  std::map<std::string, double> all = {{"pi", 3.14159265358979323846},
                                       {"e", 2.71828182845904523536}};
  for (const auto& [name, value] : constants) all[name] = value;
  for (const std::string& v : variables) all.erase(v);
  ExprParser p(e, variables, all);
  p.run();
  return e;
}

double Expression::eval_node(int idx, const Vec& vars) const {
  const Node& n = nodes_[static_cast<std::size_t>(idx)];
  switch (n.op) {
    case Op::kConst:
      return n.value;
    case Op::kVar:
      return vars[n.var];
    case Op::kAdd:
      return eval_node(n.a, vars) + eval_node(n.b, vars);
    case Op::kSub:
      return eval_node(n.a, vars) - eval_node(n.b, vars);
    case Op::kMul:
      return eval_node(n.a, vars) * eval_node(n.b, vars);
    case Op::kDiv:
      return eval_node(n.a, vars) / eval_node(n.b, vars);
    case Op::kNeg:
      return -eval_node(n.a, vars);
    case Op::kPow:
      return std::pow(eval_node(n.a, vars), eval_node(n.b, vars));
    case Op::kSin:
      return std::sin(eval_node(n.a, vars));
    case Op::kCos:
      return std::cos(eval_node(n.a, vars));
    case Op::kExp:
      return std::exp(eval_node(n.a, vars));
    case Op::kLog:
      return std::log(eval_node(n.a, vars));
  }
  return 0.0;
}

double Expression::eval(const Vec& vars) const {
  if (vars.size() != arity_) {
    throw InputError("expression arity mismatch: expected " +
                     std::to_string(arity_) + " variables, got " +
                     std::to_string(vars.size()));
  }
  return eval_node(root_, vars);
}

}  // namespace hyptimes
