#include "strictlyap/expression.hpp"

#include <fmt/format.h>

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>

namespace strictlyap {

ExpressionError::ExpressionError(const std::string& message, std::size_t position)
    : std::invalid_argument(fmt::format("expression: {} at position {}", message, position)), position_(position) {}

struct Expression::Node {
  enum class Kind { constant, variable, neg, add, sub, mul, div, pow, func };
  enum class Func { sin, cos, tanh, atan, exp, ln, abs };

  Kind kind = Kind::constant;
  double value = 0.0;
  std::size_t index = 0;
  Func func = Func::sin;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;

  double eval(std::span<const double> v) const {
    switch (kind) {
      case Kind::constant: return value;
      case Kind::variable: return v[index];
      case Kind::neg: return -lhs->eval(v);
      case Kind::add: return lhs->eval(v) + rhs->eval(v);
      case Kind::sub: return lhs->eval(v) - rhs->eval(v);
      case Kind::mul: return lhs->eval(v) * rhs->eval(v);
      case Kind::div: return lhs->eval(v) / rhs->eval(v);
      case Kind::pow: return std::pow(lhs->eval(v), rhs->eval(v));
      case Kind::func: {
        const double a = lhs->eval(v);
        switch (func) {
          case Func::sin: return std::sin(a);
          case Func::cos: return std::cos(a);
          case Func::tanh: return std::tanh(a);
          case Func::atan: return std::atan(a);
          case Func::exp: return std::exp(a);
          case Func::ln: return std::log(a);
          case Func::abs: return std::abs(a);
        }
      }
    }
    return std::nan("");
  }
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make_constant(double v) {
  auto n = std::make_shared<Node>();
  n->value = v;
  return n;
}

NodePtr make_binary(Node::Kind k, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

class Parser {
 public:
  Parser(const std::string& s, const std::vector<std::string>& vars) : s_(s), vars_(vars) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip();
    if (pos_ != s_.size()) throw ExpressionError(fmt::format("unexpected '{}'", s_[pos_]), pos_);
    return e;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      throw ExpressionError(pos_ < s_.size() ? fmt::format("expected '{}' but found '{}'", c, s_[pos_])
                                             : fmt::format("expected '{}' at end of input", c),
                            pos_);
    }
  }

  NodePtr expr() {
    NodePtr e = term();
    for (;;) {
      if (accept('+')) {
        e = make_binary(Node::Kind::add, e, term());
      } else if (accept('-')) {
        e = make_binary(Node::Kind::sub, e, term());
      } else {
        return e;
      }
    }
  }

  NodePtr term() {
    NodePtr e = unary();
    for (;;) {
      if (accept('*')) {
        e = make_binary(Node::Kind::mul, e, unary());
      } else if (accept('/')) {
        e = make_binary(Node::Kind::div, e, unary());
      } else {
        return e;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) {
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::neg;
      n->lhs = unary();
      return n;
    }
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make_binary(Node::Kind::pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) throw ExpressionError("unexpected end of input", pos_);
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
    throw ExpressionError(fmt::format("unexpected '{}'", c), pos_);
  }

  NodePtr number() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
      if (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) {
        pos_ = p;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      }
    }
    const std::string text = s_.substr(start, pos_ - start);
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size()) throw ExpressionError(fmt::format("bad number '{}'", text), start);
    return make_constant(v);
  }

  NodePtr name() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    const std::string id = s_.substr(start, pos_ - start);
    static const std::pair<const char*, Node::Func> funcs[] = {
        {"sin", Node::Func::sin}, {"cos", Node::Func::cos}, {"tanh", Node::Func::tanh}, {"atan", Node::Func::atan},
        {"exp", Node::Func::exp}, {"ln", Node::Func::ln},   {"abs", Node::Func::abs}};
    for (const auto& [fname, f] : funcs) {
      if (id == fname) {
        expect('(');
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::func;
        n->func = f;
        n->lhs = expr();
        expect(')');
        return n;
      }
    }
    if (id == "pi") return make_constant(std::numbers::pi);
    std::string key = id;
    // x_3 and x3 name the same component
    if (key.size() > 2 && key[0] == 'x' && key[1] == '_') key.erase(1, 1);
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i] == key) {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::variable;
        n->index = i;
        return n;
      }
    }
    throw ExpressionError(fmt::format("unknown name '{}'", id), start);
  }

  const std::string& s_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression(const std::string& source, const std::vector<std::string>& variables)
    : source_(source), n_vars_(variables.size()), root_(Parser(source_, variables).parse()) {}

double Expression::operator()(std::span<const double> values) const {
  if (values.size() < n_vars_) throw std::invalid_argument("expression: too few variable values");
  return root_->eval(values);
}

std::vector<std::string> state_variables(int dim, bool with_tau) {
  std::vector<std::string> v;
  for (int i = 1; i <= dim; ++i) v.push_back(fmt::format("x{}", i));
  v.push_back("t");
  if (with_tau) v.push_back("tau");
  return v;
}

}  // namespace strictlyap
