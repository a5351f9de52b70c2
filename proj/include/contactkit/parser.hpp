#pragma once

// Expression grammar:
//   identifiers [a-zA-Z_][a-zA-Z0-9_]*
//   reserved variables t, x, u, u_t, u_x, u_xx, u_3..u_8, u_tx, u_tt
//   operators + - * / ^ with standard precedence, unary minus
//   functions exp, ln, sin, cos, tan, sec, arctan, arctanh, sqrt
//   opaque application name(arg, ...), derivative pd(name;k1,...,km)(arg, ...)
//   rational literals 3, 1/2, -2/3; any other identifier is a parameter
//   unless declared opaque in the symbol context.

#include <cctype>
#include <map>
#include <string>
#include <vector>

#include "expr.hpp"

namespace ck {

struct ParseError : std::runtime_error {
  size_t pos;
  ParseError(const std::string& msg, size_t p)
      : std::runtime_error(msg + " (at position " + std::to_string(p) + ")"), pos(p) {}
};

struct OpaqueSymbol {
  std::string name;
  int arity = 1;
  std::vector<Expr> constraints;  // expressions asserted nonzero
};

// Symbol table threaded through parsing, probing and catalog verification.
struct SymbolContext {
  std::map<std::string, OpaqueSymbol> opaques;
  bool auto_declare = false;  // ad-hoc CLI mode: first application sight declares

  void declare(const std::string& name, int arity) {
    if (arity < 1) throw std::runtime_error("opaque '" + name + "': arity must be >= 1");
    auto it = opaques.find(name);
    if (it != opaques.end() && it->second.arity != arity)
      throw std::runtime_error("opaque '" + name + "' redeclared with different arity");
    if (it == opaques.end()) opaques[name] = OpaqueSymbol{name, arity, {}};
  }
  const OpaqueSymbol* find(const std::string& name) const {
    auto it = opaques.find(name);
    return it == opaques.end() ? nullptr : &it->second;
  }
};

namespace detail {

class Parser {
 public:
  Parser(std::string text, SymbolContext& ctx) : text_(std::move(text)), ctx_(ctx) {}

  Expr parse() {
    Expr e = expression(0);
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("unexpected trailing input", pos_);
    return e;
  }

 private:
  std::string text_;
  SymbolContext& ctx_;
  size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }
  bool eat(char c) {
    if (peek() == c) { ++pos_; return true; }
    return false;
  }
  void expect(char c) {
    if (!eat(c)) throw ParseError(std::string("expected '") + c + "'", pos_);
  }

  static int lbp(char op) {
    switch (op) {
      case '+': case '-': return 10;
      case '*': case '/': return 20;
      case '^': return 30;
      default: return 0;
    }
  }

  Expr expression(int rbp) {
    Expr left = nud();
    while (true) {
      char op = peek();
      int bp = lbp(op);
      if (bp <= rbp) break;
      ++pos_;
      // '^' is right-associative
      Expr right = expression(op == '^' ? bp - 1 : bp);
      switch (op) {
        case '+': left = left + right; break;
        case '-': left = left - right; break;
        case '*': left = left * right; break;
        case '/': left = left / right; break;
        case '^': left = make_pow(left, right); break;
      }
    }
    return left;
  }

  Expr nud() {
    char c = peek();
    if (c == '-') {
      ++pos_;
      // unary minus binds looser than '^': -u^2 == -(u^2)
      return -expression(25);
    }
    if (c == '+') { ++pos_; return expression(25); }
    if (c == '(') {
      ++pos_;
      Expr e = expression(0);
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ParseError("expected expression", pos_);
  }

  Expr number() {
    skip_ws();
    size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return num(Rat(BigInt(text_.substr(start, pos_ - start))));
  }

  std::string ident() {
    skip_ws();
    size_t start = pos_;
    if (pos_ >= text_.size() ||
        !(std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      throw ParseError("expected identifier", pos_);
    ++pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    return text_.substr(start, pos_ - start);
  }

  std::vector<Expr> arg_list() {
    expect('(');
    std::vector<Expr> args;
    if (peek() != ')') {
      args.push_back(expression(0));
      while (eat(',')) args.push_back(expression(0));
    }
    expect(')');
    return args;
  }

  Expr identifier() {
    size_t at = pos_;
    std::string name = ident();

    if (name == "pd") {
      expect('(');
      std::string sym = ident();
      expect(';');
      std::vector<int> deriv;
      deriv.push_back(index_entry());
      while (eat(',')) deriv.push_back(index_entry());
      expect(')');
      std::vector<Expr> args = arg_list();
      check_opaque(sym, args.size(), at);
      if (deriv.size() != args.size())
        throw ParseError("pd(" + sym + "): index length != argument count", at);
      return make_opaque(sym, std::move(deriv), std::move(args));
    }

    if (peek() == '(') {
      if (auto ek = elem_from_name(name)) {
        std::vector<Expr> args = arg_list();
        if (args.size() != 1) throw ParseError(name + " takes one argument", at);
        return make_elem(*ek, args[0]);
      }
      if (name == "sqrt") {
        std::vector<Expr> args = arg_list();
        if (args.size() != 1) throw ParseError("sqrt takes one argument", at);
        return make_pow(args[0], num(1, 2));
      }
      std::vector<Expr> args = arg_list();
      check_opaque(name, args.size(), at);
      std::vector<int> deriv(args.size(), 0);
      return make_opaque(name, std::move(deriv), std::move(args));
    }

    if (auto j = jet_from_name(name)) return var(*j);
    if (ctx_.find(name))
      throw ParseError("opaque symbol '" + name + "' used without arguments", at);
    return param(name);
  }

  int index_entry() {
    skip_ws();
    size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == start) throw ParseError("expected derivative index", pos_);
    return std::stoi(text_.substr(start, pos_ - start));
  }

  void check_opaque(const std::string& name, size_t nargs, size_t at) {
    if (jet_from_name(name)) throw ParseError("'" + name + "' is a reserved variable", at);
    const OpaqueSymbol* s = ctx_.find(name);
    if (!s) {
      if (!ctx_.auto_declare)
        throw ParseError("unknown opaque symbol '" + name + "'", at);
      ctx_.declare(name, static_cast<int>(nargs));
      s = ctx_.find(name);
    }
    if (static_cast<size_t>(s->arity) != nargs)
      throw ParseError("opaque '" + name + "' expects " + std::to_string(s->arity) +
                           " argument(s), got " + std::to_string(nargs),
                       at);
  }
};

}  // namespace detail

inline Expr parse(const std::string& text, SymbolContext& ctx) {
  return detail::Parser(text, ctx).parse();
}

inline Expr parse(const std::string& text) {
  SymbolContext ctx;
  ctx.auto_declare = true;
  return detail::Parser(text, ctx).parse();
}

}  // namespace ck
