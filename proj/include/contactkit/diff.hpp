#pragma once

// Partial differentiation on expression trees.  Opaque applications
// differentiate by the chain rule into higher multi-index applications.

#include "expr.hpp"

namespace ck {

inline Expr diff(const Expr& e, const Expr& v);

namespace detail {

inline Expr elem_deriv(ElemKind k, const Expr& a) {
  switch (k) {
    case ElemKind::Exp: return make_elem(ElemKind::Exp, a);
    case ElemKind::Ln: return make_pow(a, num(-1));
    case ElemKind::Sin: return make_elem(ElemKind::Cos, a);
    case ElemKind::Cos: return -make_elem(ElemKind::Sin, a);
    case ElemKind::Tan: return num(1) + make_pow(make_elem(ElemKind::Tan, a), num(2));
    case ElemKind::Sec: return make_elem(ElemKind::Sec, a) * make_elem(ElemKind::Tan, a);
    case ElemKind::Arctan: return make_pow(num(1) + make_pow(a, num(2)), num(-1));
    case ElemKind::Arctanh: return make_pow(num(1) - make_pow(a, num(2)), num(-1));
  }
  return num(0);
}

}  // namespace detail

inline Expr diff(const Expr& e, const Expr& v) {
  if (!(v.is(NodeKind::Var) || v.is(NodeKind::Param)))
    throw std::runtime_error("diff: differentiation variable must be a Var or Parameter");
  switch (e.kind()) {
    case NodeKind::Num:
      return num(0);
    case NodeKind::Param:
    case NodeKind::Var:
      return equal(e, v) ? num(1) : num(0);
    case NodeKind::Sum: {
      std::vector<Expr> ts;
      ts.reserve(e.kids().size());
      for (const auto& t : e.kids()) ts.push_back(diff(t, v));
      return make_sum(std::move(ts));
    }
    case NodeKind::Product: {
      std::vector<Expr> out;
      const auto& fs = e.kids();
      for (size_t i = 0; i < fs.size(); ++i) {
        Expr d = diff(fs[i], v);
        if (d.is_zero()) continue;
        std::vector<Expr> term = fs;
        term[i] = d;
        out.push_back(make_prod(std::move(term)));
      }
      return make_sum(std::move(out));
    }
    case NodeKind::Power: {
      const Expr& b = e.kids()[0];
      const Expr& p = e.kids()[1];
      Expr db = diff(b, v);
      Expr dp = diff(p, v);
      std::vector<Expr> parts;
      if (!db.is_zero())
        parts.push_back(p * make_pow(b, p - num(1)) * db);
      if (!dp.is_zero())
        parts.push_back(make_pow(b, p) * make_elem(ElemKind::Ln, b) * dp);
      return make_sum(std::move(parts));
    }
    case NodeKind::Elem: {
      const Expr& a = e.kids()[0];
      Expr da = diff(a, v);
      if (da.is_zero()) return num(0);
      return detail::elem_deriv(e.node().elem, a) * da;
    }
    case NodeKind::Opaque: {
      std::vector<Expr> parts;
      for (size_t i = 0; i < e.kids().size(); ++i) {
        Expr da = diff(e.kids()[i], v);
        if (da.is_zero()) continue;
        std::vector<int> k = e.node().deriv;
        ++k[i];
        parts.push_back(make_opaque(e.name(), std::move(k), e.kids()) * da);
      }
      return make_sum(std::move(parts));
    }
  }
  return num(0);
}

inline Expr diff(const Expr& e, JetVar v) { return diff(e, var(v)); }

inline Expr diff(const Expr& e, const Expr& v, int n) {
  Expr r = e;
  for (int i = 0; i < n; ++i) r = diff(r, v);
  return r;
}

}  // namespace ck
