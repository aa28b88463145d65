#pragma once

#include <map>
#include <string>
#include <vector>

#include "hyptimes/smallmat.hpp"

namespace hyptimes {

// Arithmetic expression over named variables: +, -, *, /, ^, unary minus,
// parentheses, numeric literals, and the functions sin, cos, exp, log, pow.
// Parsed once against a fixed variable list; evaluation is allocation-free.
class Expression {
 public:
  static Expression parse(const std::string& text,
                          const std::vector<std::string>& variables,
                          const std::map<std::string, double>& constants = {});

  double eval(const Vec& vars) const;
  const std::string& text() const { return text_; }

 private:
  enum class Op : std::uint8_t {
    kConst,
    kVar,
    kAdd,
    kSub,
    kMul,
    kDiv,
    kNeg,
    kPow,
    kSin,
    kCos,
    kExp,
    kLog,
  };
  struct Node {
    Op op;
    double value = 0.0;  // kConst
    int var = -1;        // kVar
    int a = -1;
    int b = -1;
  };
  std::string text_;
  std::vector<Node> nodes_;
  int root_ = -1;
  int arity_ = 0;

  double eval_node(int idx, const Vec& vars) const;
  friend class ExprParser;
};

}  // namespace hyptimes
