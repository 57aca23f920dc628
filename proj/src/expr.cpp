#include "crossings/expr.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <sstream>

#include "crossings/error.hpp"

namespace crossings::expr {
namespace {

struct Parser {
  std::string_view text;
  std::string_view var;
  std::size_t pos = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::Parse,
                "parse error at position " + std::to_string(pos) + ": " + what);
  }

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  bool consume(char c) {
    if (peek() == c) {
      ++pos;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!consume(c)) fail(std::string("expected '") + c + "'");
  }

  NodePtr make(Node::Kind k, NodePtr l = nullptr, NodePtr r = nullptr) {
    auto n = std::make_unique<Node>();
    n->kind = k;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
  }

  NodePtr parse_expr() {
    NodePtr n = parse_term();
    for (;;) {
      if (consume('+'))
        n = make(Node::Kind::Add, std::move(n), parse_term());
      else if (consume('-'))
        n = make(Node::Kind::Sub, std::move(n), parse_term());
      else
        return n;
    }
  }

  NodePtr parse_term() {
    NodePtr n = parse_factor();
    for (;;) {
      if (consume('*'))
        n = make(Node::Kind::Mul, std::move(n), parse_factor());
      else if (consume('/'))
        n = make(Node::Kind::Div, std::move(n), parse_factor());
      else
        return n;
    }
  }

  // Unary minus binds the whole power: -tau^2 reads as -(tau^2), so that
  // exp(-tau^2/2) is the Gaussian bell and not exp(+tau^2/2).
  NodePtr parse_factor() {
    if (consume('-')) return make(Node::Kind::Neg, parse_factor());
    NodePtr base = parse_atom();
    if (consume('^')) {
      NodePtr expo = consume('-') ? make(Node::Kind::Neg, parse_atom()) : parse_atom();
      return make(Node::Kind::Pow, std::move(base), std::move(expo));
    }
    return base;
  }

  NodePtr parse_atom() {
    char c = peek();
    if (c == '(') {
      ++pos;
      NodePtr n = parse_expr();
      expect(')');
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
    fail("expected a number, identifier or '('");
  }

  NodePtr parse_number() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size() &&
           (std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '.'))
      ++pos;
    if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
      std::size_t mark = pos++;
      if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) ++pos;
      if (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
      } else {
        pos = mark;  // bare 'e' belongs to the next token, not this number
      }
    }
    std::string token(text.substr(start, pos - start));
    char* end = nullptr;
    double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size()) {
      pos = start;
      fail("malformed number '" + token + "'");
    }
    auto n = std::make_unique<Node>();
    n->kind = Node::Kind::Number;
    n->number = v;
    return n;
  }

  NodePtr parse_ident() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
      ++pos;
    std::string_view name = text.substr(start, pos - start);
    if (name == var) {
      auto n = std::make_unique<Node>();
      n->kind = Node::Kind::Var;
      return n;
    }
    Func f;
    if (name == "exp") f = Func::Exp;
    else if (name == "log") f = Func::Log;
    else if (name == "sin") f = Func::Sin;
    else if (name == "cos") f = Func::Cos;
    else if (name == "sqrt") f = Func::Sqrt;
    else {
      pos = start;
      fail("unknown identifier '" + std::string(name) + "'");
    }
    expect('(');
    NodePtr arg = parse_expr();
    expect(')');
    auto n = std::make_unique<Node>();
    n->kind = Node::Kind::Call;
    n->func = f;
    n->lhs = std::move(arg);
    return n;
  }
};

int precedence(Node::Kind k) {
  switch (k) {
    case Node::Kind::Add:
    case Node::Kind::Sub: return 1;
    case Node::Kind::Mul:
    case Node::Kind::Div: return 2;
    case Node::Kind::Neg: return 3;
    case Node::Kind::Pow: return 4;
    default: return 5;
  }
}

const char* func_name(Func f) {
  switch (f) {
    case Func::Exp: return "exp";
    case Func::Log: return "log";
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Sqrt: return "sqrt";
  }
  return "?";
}

void print(std::ostream& os, const Node& n, int parent_prec, std::string_view var) {
  int prec = precedence(n.kind);
  bool parens = prec < parent_prec;
  if (parens) os << '(';
  switch (n.kind) {
    case Node::Kind::Number: {
      std::ostringstream tmp;
      tmp.precision(17);
      tmp << n.number;
      os << tmp.str();
      break;
    }
    case Node::Kind::Var: os << var; break;
    case Node::Kind::Add:
      print(os, *n.lhs, prec, var);
      os << "+";
      print(os, *n.rhs, prec + 1, var);
      break;
    case Node::Kind::Sub:
      print(os, *n.lhs, prec, var);
      os << "-";
      print(os, *n.rhs, prec + 1, var);
      break;
    case Node::Kind::Mul:
      print(os, *n.lhs, prec, var);
      os << "*";
      print(os, *n.rhs, prec, var);
      break;
    case Node::Kind::Div:
      print(os, *n.lhs, prec, var);
      os << "/";
      print(os, *n.rhs, prec + 1, var);
      break;
    case Node::Kind::Neg:
      os << "-";
      print(os, *n.lhs, prec, var);
      break;
    case Node::Kind::Pow:
      print(os, *n.lhs, prec + 1, var);
      os << "^";
      print(os, *n.rhs, prec + 1, var);
      break;
    case Node::Kind::Call:
      os << func_name(n.func) << '(';
      print(os, *n.lhs, 0, var);
      os << ')';
      break;
  }
  if (parens) os << ')';
}

}  // namespace

NodePtr parse(std::string_view text, std::string_view var) {
  Parser p{text, var};
  NodePtr n = p.parse_expr();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("unexpected trailing input");
  return n;
}

std::string to_string(const Node& n, std::string_view var) {
  std::ostringstream os;
  print(os, n, 0, var);
  return os.str();
}

NodePtr clone(const Node& n) {
  auto c = std::make_unique<Node>();
  c->kind = n.kind;
  c->number = n.number;
  c->func = n.func;
  if (n.lhs) c->lhs = clone(*n.lhs);
  if (n.rhs) c->rhs = clone(*n.rhs);
  return c;
}

NodePtr scale_variable(const Node& n, double scale) {
  if (n.kind == Node::Kind::Var) {
    auto num = std::make_unique<Node>();
    num->kind = Node::Kind::Number;
    num->number = scale;
    auto v = std::make_unique<Node>();
    v->kind = Node::Kind::Var;
    auto mul = std::make_unique<Node>();
    mul->kind = Node::Kind::Mul;
    mul->lhs = std::move(num);
    mul->rhs = std::move(v);
    return mul;
  }
  auto c = std::make_unique<Node>();
  c->kind = n.kind;
  c->number = n.number;
  c->func = n.func;
  if (n.lhs) c->lhs = scale_variable(*n.lhs, scale);
  if (n.rhs) c->rhs = scale_variable(*n.rhs, scale);
  return c;
}

bool is_constant(const Node& n) {
  if (n.kind == Node::Kind::Var) return false;
  if (n.lhs && !is_constant(*n.lhs)) return false;
  if (n.rhs && !is_constant(*n.rhs)) return false;
  return true;
}

}  // namespace crossings::expr
