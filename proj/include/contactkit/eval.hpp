#pragma once

// Point evaluation: exact rational when the instantiated expression is
// rational, double precision otherwise.  Opaque symbols evaluate through a
// polynomial instantiation whose derivatives are taken analytically.

#include <cmath>
#include <optional>

#include "expr.hpp"

namespace ck {

struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// dense multivariate polynomial with rational coefficients
struct PolyInstance {
  int arity = 1;
  std::vector<std::pair<std::vector<int>, Rat>> terms;  // exponent tuple -> coeff

  template <typename T>
  T eval_deriv(const std::vector<int>& k, const std::vector<T>& args) const {
    T total{};
    for (const auto& [e, c] : terms) {
      Rat factor = c;
      bool dead = false;
      for (int i = 0; i < arity; ++i) {
        if (e[i] < k[i]) { dead = true; break; }
        for (int j = 0; j < k[i]; ++j) factor *= (e[i] - j);
      }
      if (dead || factor == 0) continue;
      T term = convert<T>(factor);
      for (int i = 0; i < arity; ++i)
        for (int j = 0; j < e[i] - k[i]; ++j) term = term * args[i];
      total = total + term;
    }
    return total;
  }

  std::string text() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& [e, c] : terms) {
      if (!first) os << " + ";
      os << "(" << rat_num(c).str();
      if (!rat_is_int(c)) os << "/" << rat_den(c).str();
      os << ")";
      for (int i = 0; i < arity; ++i)
        if (e[i]) os << "*y" << i + 1 << "^" << e[i];
      first = false;
    }
    if (first) os << "0";
    return os.str();
  }

 private:
  template <typename T>
  static T convert(const Rat& r);
};

template <>
inline Rat PolyInstance::convert<Rat>(const Rat& r) { return r; }
template <>
inline double PolyInstance::convert<double>(const Rat& r) {
  return r.convert_to<double>();
}

struct EvalEnv {
  std::map<std::string, Rat> values;                 // variables and parameters
  const std::map<std::string, PolyInstance>* fns = nullptr;  // opaque instantiations

  const Rat& lookup(const std::string& name) const {
    auto it = values.find(name);
    if (it == values.end()) throw std::runtime_error("eval: unbound symbol '" + name + "'");
    return it->second;
  }
  const PolyInstance& fn(const std::string& name) const {
    if (fns) {
      auto it = fns->find(name);
      if (it != fns->end()) return it->second;
    }
    throw std::runtime_error("eval: opaque symbol '" + name + "' not instantiated");
  }
};

// an instantiated expression evaluates exactly over Q iff it has no
// elementary kernels and every power exponent is an integer literal
inline bool exactly_evaluable(const Expr& e) {
  bool ok = true;
  visit(e, [&](const Expr& n) {
    if (n.is(NodeKind::Elem)) ok = false;
    if (n.is(NodeKind::Power)) {
      const Expr& ex = n.kids()[1];
      if (!(ex.is_num() && rat_is_int(ex.num()))) ok = false;
    }
  });
  return ok;
}

inline Rat eval_exact(const Expr& e, const EvalEnv& env) {
  switch (e.kind()) {
    case NodeKind::Num:
      return e.num();
    case NodeKind::Param:
    case NodeKind::Var:
      return env.lookup(e.name());
    case NodeKind::Sum: {
      Rat s(0);
      for (const auto& k : e.kids()) s += eval_exact(k, env);
      return s;
    }
    case NodeKind::Product: {
      Rat p(1);
      for (const auto& k : e.kids()) {
        p *= eval_exact(k, env);
        if (p == 0) {
          // keep scanning: later factors may raise a domain error
        }
      }
      return p;
    }
    case NodeKind::Power: {
      const Expr& ex = e.kids()[1];
      if (!(ex.is_num() && rat_is_int(ex.num())))
        throw std::runtime_error("eval_exact: non-integer exponent");
      Rat b = eval_exact(e.kids()[0], env);
      BigInt n = rat_num(ex.num());
      if (b == 0 && n < 0) throw DomainError("division by zero");
      return detail::rat_pow_int(b, n);
    }
    case NodeKind::Elem:
      throw std::runtime_error("eval_exact: elementary kernel");
    case NodeKind::Opaque: {
      const PolyInstance& f = env.fn(e.name());
      std::vector<Rat> args;
      args.reserve(e.kids().size());
      for (const auto& a : e.kids()) args.push_back(eval_exact(a, env));
      return f.eval_deriv<Rat>(e.node().deriv, args);
    }
  }
  return Rat(0);
}

inline double eval_double(const Expr& e, const EvalEnv& env) {
  switch (e.kind()) {
    case NodeKind::Num:
      return e.num().convert_to<double>();
    case NodeKind::Param:
    case NodeKind::Var:
      return env.lookup(e.name()).convert_to<double>();
    case NodeKind::Sum: {
      double s = 0;
      for (const auto& k : e.kids()) s += eval_double(k, env);
      return s;
    }
    case NodeKind::Product: {
      double p = 1;
      for (const auto& k : e.kids()) p *= eval_double(k, env);
      return p;
    }
    case NodeKind::Power: {
      double b = eval_double(e.kids()[0], env);
      double ex = eval_double(e.kids()[1], env);
      if (b == 0 && ex < 0) throw DomainError("division by zero");
      if (b < 0) {
        double r = std::round(ex);
        if (std::abs(ex - r) < 1e-9 && std::abs(r) < 1e6)
          return std::pow(b, r);
        throw DomainError("fractional power of a negative base");
      }
      double v = std::pow(b, ex);
      if (!std::isfinite(v)) throw DomainError("power overflow");
      return v;
    }
    case NodeKind::Elem: {
      double a = eval_double(e.kids()[0], env);
      switch (e.node().elem) {
        case ElemKind::Exp: {
          double v = std::exp(a);
          if (!std::isfinite(v)) throw DomainError("exp overflow");
          return v;
        }
        case ElemKind::Ln:
          if (a <= 0) throw DomainError("ln of a non-positive value");
          return std::log(a);
        case ElemKind::Sin: return std::sin(a);
        case ElemKind::Cos: return std::cos(a);
        case ElemKind::Tan: {
          double c = std::cos(a);
          if (std::abs(c) < 1e-9) throw DomainError("tan near a pole");
          return std::sin(a) / c;
        }
        case ElemKind::Sec: {
          double c = std::cos(a);
          if (std::abs(c) < 1e-9) throw DomainError("sec near a pole");
          return 1.0 / c;
        }
        case ElemKind::Arctan: return std::atan(a);
        case ElemKind::Arctanh:
          if (a <= -1 || a >= 1) throw DomainError("arctanh outside (-1,1)");
          return std::atanh(a);
      }
      return 0;
    }
    case NodeKind::Opaque: {
      const PolyInstance& f = env.fn(e.name());
      std::vector<double> args;
      args.reserve(e.kids().size());
      for (const auto& a : e.kids()) args.push_back(eval_double(a, env));
      return f.eval_deriv<double>(e.node().deriv, args);
    }
  }
  return 0;
}

}  // namespace ck
