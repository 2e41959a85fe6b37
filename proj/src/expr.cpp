#include "hviheat/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace hviheat {

double Polynomial::eval(double x) const {
  double acc = 0.0;
  for (size_t k = coeffs.size(); k-- > 0;) acc = acc * x + coeffs[k];
  return acc;
}

Polynomial Polynomial::antiderivative() const {
  Polynomial out;
  out.coeffs.assign(coeffs.size() + 1, 0.0);
  for (size_t k = 0; k < coeffs.size(); ++k) out.coeffs[k + 1] = coeffs[k] / double(k + 1);
  return out;
}

namespace {

enum class Fn { sin, cos, exp, tanh, abs, sign };

double apply_fn(Fn f, double x) {
  switch (f) {
    case Fn::sin: return std::sin(x);
    case Fn::cos: return std::cos(x);
    case Fn::exp: return std::exp(x);
    case Fn::tanh: return std::tanh(x);
    case Fn::abs: return std::fabs(x);
    case Fn::sign: return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0);
  }
  return 0.0;
}

}  // namespace

struct Expr::Node {
  enum class Kind { number, variable, neg, add, sub, mul, div, pow, call } kind;
  double value = 0.0;  // number
  int var = 0;         // variable index
  Fn fn = Fn::sin;     // call
  std::shared_ptr<const Node> a, b;

  double eval(std::span<const double> args) const {
    switch (kind) {
      case Kind::number: return value;
      case Kind::variable: return args[size_t(var)];
      case Kind::neg: return -a->eval(args);
      case Kind::add: return a->eval(args) + b->eval(args);
      case Kind::sub: return a->eval(args) - b->eval(args);
      case Kind::mul: return a->eval(args) * b->eval(args);
      case Kind::div: return a->eval(args) / b->eval(args);
      case Kind::pow: return std::pow(a->eval(args), b->eval(args));
      case Kind::call: return apply_fn(fn, a->eval(args));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;
using Kind = Expr::Node::Kind;

NodePtr make(Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodePtr make_num(double v) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = Kind::number;
  n->value = v;
  return n;
}

class Parser {
public:
  Parser(std::string_view text, std::span<const std::string_view> vars)
      : text_(text), vars_(vars) {}

  NodePtr run() {
    NodePtr e = expression();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

private:
  std::string_view text_;
  std::span<const std::string_view> vars_;
  size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, int(pos_) + 1);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  NodePtr expression() {
    NodePtr lhs = term();
    for (;;) {
      if (consume('+')) {
        lhs = make(Kind::add, lhs, term());
      } else if (consume('-')) {
        lhs = make(Kind::sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (consume('*')) {
        lhs = make(Kind::mul, lhs, unary());
      } else if (consume('/')) {
        lhs = make(Kind::div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (consume('-')) return make(Kind::neg, unary());
    if (consume('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (consume('^')) return make(Kind::pow, base, unary());  // right assoc
    return base;
  }

  NodePtr atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    if (c == '(') {
      ++pos_;
      NodePtr e = expression();
      if (!consume(')')) fail("expected ')'");
      return e;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr number() {
    const char* begin = text_.data() + pos_;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) fail("invalid number");
    pos_ += size_t(end - begin);
    return make_num(v);
  }

  NodePtr identifier() {
    size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    std::string_view name = text_.substr(start, pos_ - start);

    if (name == "pi") return make_num(3.14159265358979323846);
    if (name == "e") return make_num(2.71828182845904523536);

    for (size_t i = 0; i < vars_.size(); ++i) {
      if (name == vars_[i]) {
        auto n = std::make_shared<Expr::Node>();
        n->kind = Kind::variable;
        n->var = int(i);
        return n;
      }
    }

    static const std::pair<std::string_view, Fn> fns[] = {
        {"sin", Fn::sin}, {"cos", Fn::cos}, {"exp", Fn::exp},
        {"tanh", Fn::tanh}, {"abs", Fn::abs}, {"sign", Fn::sign}};
    for (const auto& [fname, fk] : fns) {
      if (name == fname) {
        if (!consume('(')) fail(std::string(name) + " expects '('");
        NodePtr arg = expression();
        if (!consume(')')) fail("expected ')'");
        auto n = std::make_shared<Expr::Node>();
        n->kind = Kind::call;
        n->fn = fk;
        n->a = arg;
        return n;
      }
    }
    pos_ = start;
    fail("unknown identifier '" + std::string(name) + "'");
  }
};

constexpr int kMaxPolyDegree = 40;

std::optional<Polynomial> poly_of(const NodePtr& n) {
  using K = Kind;
  if (!n) return std::nullopt;
  switch (n->kind) {
    case K::number: return Polynomial{{n->value}};
    case K::variable: return Polynomial{{0.0, 1.0}};
    case K::neg: {
      auto p = poly_of(n->a);
      if (!p) return std::nullopt;
      for (double& c : p->coeffs) c = -c;
      return p;
    }
    case K::add:
    case K::sub: {
      auto p = poly_of(n->a), q = poly_of(n->b);
      if (!p || !q) return std::nullopt;
      if (q->coeffs.size() > p->coeffs.size()) p->coeffs.resize(q->coeffs.size(), 0.0);
      for (size_t k = 0; k < q->coeffs.size(); ++k)
        p->coeffs[k] += (n->kind == K::add ? q->coeffs[k] : -q->coeffs[k]);
      return p;
    }
    case K::mul: {
      auto p = poly_of(n->a), q = poly_of(n->b);
      if (!p || !q) return std::nullopt;
      if (p->degree() + q->degree() > kMaxPolyDegree) return std::nullopt;
      Polynomial r;
      r.coeffs.assign(p->coeffs.size() + q->coeffs.size() - 1, 0.0);
      for (size_t i = 0; i < p->coeffs.size(); ++i)
        for (size_t j = 0; j < q->coeffs.size(); ++j) r.coeffs[i + j] += p->coeffs[i] * q->coeffs[j];
      return r;
    }
    case K::div: {
      auto p = poly_of(n->a);
      if (!p || n->b->kind != K::number || n->b->value == 0.0) return std::nullopt;
      for (double& c : p->coeffs) c /= n->b->value;
      return p;
    }
    case K::pow: {
      auto p = poly_of(n->a);
      if (!p || n->b->kind != K::number) return std::nullopt;
      double ev = n->b->value;
      if (ev < 0 || ev != std::floor(ev) || ev > kMaxPolyDegree) return std::nullopt;
      int m = int(ev);
      if (p->degree() * m > kMaxPolyDegree) return std::nullopt;
      Polynomial r{{1.0}};
      for (int k = 0; k < m; ++k) {
        Polynomial s;
        s.coeffs.assign(r.coeffs.size() + p->coeffs.size() - 1, 0.0);
        for (size_t i = 0; i < r.coeffs.size(); ++i)
          for (size_t j = 0; j < p->coeffs.size(); ++j) s.coeffs[i + j] += r.coeffs[i] * p->coeffs[j];
        r = std::move(s);
      }
      return r;
    }
    case K::call: return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

Expr Expr::parse(std::string_view text, std::span<const std::string_view> variables) {
  Parser p(text, variables);
  Expr e;
  e.root_ = p.run();
  e.source_ = std::string(text);
  e.nvars_ = variables.size();
  return e;
}

double Expr::eval(std::span<const double> args) const {
  if (!root_) throw std::logic_error("eval of empty expression");
  return root_->eval(args);
}

std::optional<Polynomial> Expr::as_polynomial() const {
  if (!root_ || nvars_ > 1) return std::nullopt;
  auto p = poly_of(root_);
  if (p) {
    while (p->coeffs.size() > 1 && p->coeffs.back() == 0.0) p->coeffs.pop_back();
    if (p->coeffs.empty()) p->coeffs.push_back(0.0);
  }
  return p;
}

}  // namespace hviheat
