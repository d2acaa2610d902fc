#include "sve/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "sve/error.hpp"

namespace sve {

struct Expression::Node {
  enum class Op { constant, var_t, var_x, add, sub, mul, div, pow, neg, abs, sqrt, exp, sin, min, max };
  Op op = Op::constant;
  double value = 0.0;
  std::vector<std::shared_ptr<const Node>> args;

  double eval(double t, double x) const {
    switch (op) {
      case Op::constant: return value;
      case Op::var_t: return t;
      case Op::var_x: return x;
      case Op::add: return args[0]->eval(t, x) + args[1]->eval(t, x);
      case Op::sub: return args[0]->eval(t, x) - args[1]->eval(t, x);
      case Op::mul: return args[0]->eval(t, x) * args[1]->eval(t, x);
      case Op::div: return args[0]->eval(t, x) / args[1]->eval(t, x);
      case Op::pow: return std::pow(args[0]->eval(t, x), args[1]->eval(t, x));
      case Op::neg: return -args[0]->eval(t, x);
      case Op::abs: return std::abs(args[0]->eval(t, x));
      case Op::sqrt: return std::sqrt(args[0]->eval(t, x));
      case Op::exp: return std::exp(args[0]->eval(t, x));
      case Op::sin: return std::sin(args[0]->eval(t, x));
      case Op::min: return std::fmin(args[0]->eval(t, x), args[1]->eval(t, x));
      case Op::max: return std::fmax(args[0]->eval(t, x), args[1]->eval(t, x));
    }
    return 0.0;
  }
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make(Node::Op op, std::vector<NodePtr> args = {}, double value = 0.0) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->value = value;
  n->args = std::move(args);
  return n;
}

class Parser {
 public:
  Parser(std::string_view text, std::string_view first, std::string_view second)
      : text_(text), first_(first), second_(second) {}

  NodePtr parse_all() {
    NodePtr root = expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::syntax,
                "expression \"" + std::string(text_) + "\": " + what + " at column " + std::to_string(pos_ + 1));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(std::string_view token) {
    skip_space();
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view token) {
    if (!accept(token)) fail("expected '" + std::string(token) + "'");
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept("+")) {
        lhs = make(Node::Op::add, {lhs, term()});
      } else if (accept("-")) {
        lhs = make(Node::Op::sub, {lhs, term()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept("*") || accept("×")) {
        lhs = make(Node::Op::mul, {lhs, unary()});
      } else if (accept("/") || accept("÷")) {
        lhs = make(Node::Op::div, {lhs, unary()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept("-")) return make(Node::Op::neg, {unary()});
    if (accept("+")) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept("^")) return make(Node::Op::pow, {base, unary()});
    return base;
  }

  NodePtr primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (accept("(")) {
      NodePtr inner = expr();
      expect(")");
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      const std::string_view word = text_.substr(start, pos_ - start);
      if (word == first_) return make(Node::Op::var_t);
      if (word == second_) return make(Node::Op::var_x);
      struct Fn { std::string_view name; Node::Op op; int arity; };
      static constexpr Fn kFns[] = {
          {"abs", Node::Op::abs, 1}, {"sqrt", Node::Op::sqrt, 1}, {"exp", Node::Op::exp, 1},
          {"sin", Node::Op::sin, 1}, {"min", Node::Op::min, 2},   {"max", Node::Op::max, 2},
      };
      for (const Fn& fn : kFns) {
        if (fn.name != word) continue;
        expect("(");
        std::vector<NodePtr> args{expr()};
        if (fn.arity == 2) {
          expect(",");
          args.push_back(expr());
        }
        expect(")");
        return make(fn.op, std::move(args));
      }
      pos_ = start;
      fail("unknown identifier '" + std::string(word) + "' (variables: " + std::string(first_) + ", " +
           std::string(second_) + "; functions: abs sqrt exp sin min max)");
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr number() {
    const std::string rest(text_.substr(pos_));
    char* end = nullptr;
    const double v = std::strtod(rest.c_str(), &end);
    if (end == rest.c_str()) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - rest.c_str());
    return make(Node::Op::constant, {}, v);
  }

  std::string_view text_;
  std::string_view first_;
  std::string_view second_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(std::string_view text, std::string_view first, std::string_view second) {
  Expression e;
  e.root_ = Parser(text, first, second).parse_all();
  e.source_ = std::string(text);
  return e;
}

double Expression::operator()(double t, double x) const { return root_->eval(t, x); }

}  // namespace sve
