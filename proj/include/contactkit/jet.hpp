#pragma once

// Jet-space bookkeeping: unrestricted total derivatives D_t, D_x, the x-only
// restricted derivative D on (t,x,u,u_1,u_2,...), and on-shell restriction
// u_t := F with its differential consequences.
//
// Only the mixed derivatives u_tx, u_tt are representable; that is all the
// invariance criterion for second-order evolution equations needs.  Anything
// beyond the order bound raises OrderOverflow.

#include "diff.hpp"
#include "simplify.hpp"

namespace ck {

struct OrderOverflow : std::runtime_error {
  explicit OrderOverflow(const std::string& what) : std::runtime_error(what) {}
};

// D_x = d_x + u_x d_u + u_tx d_{u_t} + u_xx d_{u_x} + u_3 d_{u_xx} + ...
inline Expr total_x(const Expr& e) {
  std::vector<Expr> parts;
  parts.push_back(diff(e, JetVar::x));
  if (depends_on(e, JetVar::u_tx) || depends_on(e, JetVar::u_tt))
    throw OrderOverflow("total_x: input depends on a mixed derivative beyond the representable jet");
  parts.push_back(var(JetVar::u_x) * diff(e, JetVar::u));
  parts.push_back(var(JetVar::u_tx) * diff(e, JetVar::u_t));
  for (int k = 1; k <= 8; ++k) {
    Expr d = diff(e, jet_of_x_order(k));
    if (d.is_zero()) continue;
    if (k == 8) throw OrderOverflow("total_x: would exceed jet order 8");
    parts.push_back(var(jet_of_x_order(k + 1)) * d);
  }
  return make_sum(std::move(parts));
}

// D_t = d_t + u_t d_u + u_tt d_{u_t} + u_tx d_{u_x}
inline Expr total_t(const Expr& e) {
  for (JetVar v : {JetVar::u_xx, JetVar::u_3, JetVar::u_4, JetVar::u_5, JetVar::u_6,
                   JetVar::u_7, JetVar::u_8, JetVar::u_tx, JetVar::u_tt})
    if (depends_on(e, v))
      throw OrderOverflow(std::string("total_t: t-derivative of ") + jet_name(v) +
                          " is not representable");
  return diff(e, JetVar::t) + var(JetVar::u_t) * diff(e, JetVar::u) +
         var(JetVar::u_tt) * diff(e, JetVar::u_t) + var(JetVar::u_tx) * diff(e, JetVar::u_x);
}

// D = d_x + sum_i u_{i+1} d_{u_i}  on expressions free of t-derivatives
inline Expr restricted_x(const Expr& e) {
  for (JetVar v : {JetVar::u_t, JetVar::u_tx, JetVar::u_tt})
    if (depends_on(e, v))
      throw OrderOverflow(std::string("restricted_x: input depends on ") + jet_name(v));
  std::vector<Expr> parts;
  parts.push_back(diff(e, JetVar::x));
  for (int k = 0; k <= 8; ++k) {
    Expr d = diff(e, jet_of_x_order(k));
    if (d.is_zero()) continue;
    if (k == 8) throw OrderOverflow("restricted_x: would exceed jet order 8");
    parts.push_back(var(jet_of_x_order(k + 1)) * d);
  }
  return make_sum(std::move(parts));
}

inline void require_rhs_shape(const Expr& F) {
  for (JetVar v : {JetVar::u_t, JetVar::u_tx, JetVar::u_tt, JetVar::u_3, JetVar::u_4,
                   JetVar::u_5, JetVar::u_6, JetVar::u_7, JetVar::u_8})
    if (depends_on(F, v))
      throw std::invalid_argument(std::string("right-hand side depends on ") + jet_name(v) +
                                  "; F must be F(t,x,u,u_x,u_xx)");
}

// substitute u_t -> F together with its differential consequences
// u_tx -> D(F), u_tt -> F_t + F_u F + F_{u_x} D(F) + F_{u_xx} D^2(F)
inline Expr on_shell(const Expr& e, const Expr& F) {
  require_rhs_shape(F);
  Bindings b;
  b.emplace(var(JetVar::u_t), F);
  if (depends_on(e, JetVar::u_tx) || depends_on(e, JetVar::u_tt)) {
    Expr dF = restricted_x(F);
    b.emplace(var(JetVar::u_tx), dF);
    if (depends_on(e, JetVar::u_tt)) {
      Expr d2F = restricted_x(dF);
      Expr u_tt = diff(F, JetVar::t) + diff(F, JetVar::u) * F + diff(F, JetVar::u_x) * dF +
                  diff(F, JetVar::u_xx) * d2F;
      b.emplace(var(JetVar::u_tt), u_tt);
    }
  }
  return substitute(e, b);
}

// t-derivative along solutions: on_shell . total_t extended to inputs that
// already live on the solution manifold (no u_t, arbitrary x-order)
inline Expr restricted_t(const Expr& e, const Expr& F) {
  require_rhs_shape(F);
  Expr os = on_shell(e, F);
  int top = max_pure_x_order(os);
  std::vector<Expr> parts;
  parts.push_back(diff(os, JetVar::t));
  Expr dkF = F;  // D^k(F), advanced incrementally
  for (int k = 0; k <= top; ++k) {
    if (k > 0) dkF = restricted_x(dkF);
    Expr d = diff(os, jet_of_x_order(k));
    if (!d.is_zero()) parts.push_back(dkF * d);
  }
  return make_sum(std::move(parts));
}

}  // namespace ck
