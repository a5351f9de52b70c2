#pragma once

// Coefficient-wise decomposition of an expression by its opaque-derivative
// monomials.  Residuals of invariance checks are (Laurent-)polynomial in the
// derivatives of arbitrary functions; the identity holds for every function
// choice iff each coefficient vanishes, which pinpoints failures and lets the
// zero test work on opaque-free pieces.

#include "simplify.hpp"

namespace ck {

struct NotPolynomial : std::runtime_error {
  explicit NotPolynomial(const std::string& what) : std::runtime_error(what) {}
};

// key: canonical product of opaque-derivative kernel powers (1 for the
// opaque-free part); value: coefficient expression
using OpaqueCollect = std::map<Expr, Expr, ExprLess>;

inline OpaqueCollect collect_opaque(const Expr& e) {
  nf::RF r = nf::to_rf(e, RewriteMode::Standard);
  nf::rf_reduce(r);

  std::vector<Expr> den_parts;
  for (const auto& df : r.den)
    den_parts.push_back(make_pow(nf::poly_to_expr(df.p), num(static_cast<long>(df.mult))));
  Expr den = make_prod(std::move(den_parts));
  std::map<Expr, nf::Poly, ExprLess> buckets;
  for (const auto& [m, c] : r.num.t) {
    nf::Mono opaque_part, rest;
    for (const auto& f : m.fs) {
      bool base_is_opaque = f.base.is(NodeKind::Opaque);
      bool contains_opaque = has_opaque(f.base) || has_opaque(f.expo);
      if (base_is_opaque) {
        opaque_part.fs.push_back(f);
      } else if (contains_opaque) {
        throw NotPolynomial("opaque application nested inside kernel: " + to_string(f.base));
      } else {
        rest.fs.push_back(f);
      }
    }
    Expr key = opaque_part.fs.empty() ? num(1) : nf::mono_to_expr(opaque_part, Rat(1));
    nf::poly_add_term(buckets[key], rest, c);
  }

  OpaqueCollect out;
  for (auto& [key, poly] : buckets) {
    Expr coeff = nf::poly_to_expr(poly);
    if (!(den.is_num() && den.num() == 1)) coeff = coeff / den;
    out.emplace(key, simplify(coeff));
  }
  return out;
}

}  // namespace ck
