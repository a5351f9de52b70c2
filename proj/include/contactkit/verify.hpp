#pragma once

// Invariance residuals and the classifying equation.
//
// u_t = F(t,x,u,u_x,u_xx) is invariant under the contact field of g iff
//   [ g F_u + D_x g F_{u_x} + D_x^2 g F_{u_xx} - D_t g ]_{u_t = F} = 0.
// Restriction to the solution manifold commutes with total derivatives, so
// the residual is built with restricted derivatives of the on-shell g.

#include "collect.hpp"
#include "contact.hpp"

namespace ck {

inline Expr invariance_residual(const Expr& F, const GeneratingFunction& g) {
  require_rhs_shape(F);
  Expr F_u = diff(F, JetVar::u);
  Expr F_ux = diff(F, JetVar::u_x);
  Expr F_uxx = diff(F, JetVar::u_xx);
  Expr g0 = simplify(on_shell(g.expr(), F));
  Expr g1 = simplify(restricted_x(g0));
  Expr g2 = simplify(restricted_x(g1));
  Expr gt = simplify(restricted_t(g.expr(), F));
  return simplify(g0 * F_u + g1 * F_ux + g2 * F_uxx - gt);
}

struct InvarianceReport {
  Expr residual;
  ZeroVerdict verdict;
  // per opaque-derivative-monomial coefficient verdicts, when available
  std::vector<std::pair<Expr, ZeroVerdict>> breakdown;
  bool coefficientwise = false;
};

inline InvarianceReport check_invariance(const Expr& F, const GeneratingFunction& g,
                                         const ProbeConfig& cfg, const ProbeContext& ctx_in = {},
                                         std::uint64_t task_id = 0) {
  ProbeContext ctx = ctx_in;
  ctx.domain_guards.push_back(F);
  ctx.domain_guards.push_back(g.expr());
  InvarianceReport rep;
  rep.residual = invariance_residual(F, g);
  try {
    OpaqueCollect parts = collect_opaque(rep.residual);
    rep.coefficientwise = true;
    ZeroVerdict agg;
    agg.kind = Verdict::ProvenZero;
    int i = 0;
    for (const auto& [key, coeff] : parts) {
      ZeroVerdict v = is_zero(coeff, cfg, ctx, task_id ^ rnd::task_hash("coeff" + std::to_string(i++)));
      rep.breakdown.emplace_back(key, v);
      // aggregate: any nonzero dominates, then inconclusive, then weakest zero
      if (v.kind == Verdict::ProvenNonzero) agg = v;
      else if (agg.kind != Verdict::ProvenNonzero) {
        if (v.kind == Verdict::Inconclusive) agg.kind = Verdict::Inconclusive;
        else if (agg.kind != Verdict::Inconclusive && static_cast<int>(v.kind) > static_cast<int>(agg.kind))
          agg.kind = v.kind;
        agg.samples = std::max(agg.samples, v.samples);
        agg.max_residual = std::max(agg.max_residual, v.max_residual);
      }
    }
    if (parts.empty()) agg.kind = Verdict::ProvenZero;
    rep.verdict = agg;
  } catch (const NotPolynomial&) {
    rep.coefficientwise = false;
    rep.verdict = is_zero(rep.residual, cfg, ctx, task_id);
  }
  return rep;
}

// literal transcription of the classifying equation for g = alpha(t) u_t + G:
//   -G_{u_x}F_u u_x + F_{u_xx}G_u u_xx + 2F_{u_xx}G_{u_x x}u_xx + 2F_{u_xx}G_{ux}u_x
//   + F_{u_x}G_u u_x + F_{u_xx}G_{uu}u_x^2 + F_{u_xx}G_{u_xu_x}u_xx^2
//   + 2F_{u_xx}u_xG_{u_xu}u_xx + F_uG + F_{u_xx}G_{xx} - G_{u_x}F_x + F_{u_x}G_x
//   - alpha F_t - FG_u - alpha_t F - G_t = 0
inline Expr classifying_residual(const Expr& F, const Expr& alpha, const Expr& G) {
  require_rhs_shape(F);
  for (JetVar v : {JetVar::x, JetVar::u, JetVar::u_x, JetVar::u_t})
    if (depends_on(alpha, v))
      throw std::invalid_argument("classifying_residual: alpha must depend on t only");
  for (JetVar v : {JetVar::u_t, JetVar::u_xx})
    if (depends_on(G, v))
      throw std::invalid_argument("classifying_residual: G must depend on (t,x,u,u_x) only");
  Expr ux = var(JetVar::u_x), uxx = var(JetVar::u_xx);
  Expr F_u = diff(F, JetVar::u), F_x = diff(F, JetVar::x), F_t = diff(F, JetVar::t);
  Expr F_ux = diff(F, JetVar::u_x), F_uxx = diff(F, JetVar::u_xx);
  Expr G_u = diff(G, JetVar::u), G_x = diff(G, JetVar::x), G_t = diff(G, JetVar::t);
  Expr G_ux = diff(G, JetVar::u_x);
  Expr G_xx = diff(diff(G, JetVar::x), JetVar::x);
  Expr G_uu = diff(diff(G, JetVar::u), JetVar::u);
  Expr G_uxux = diff(diff(G, JetVar::u_x), JetVar::u_x);
  Expr G_ux_x = diff(diff(G, JetVar::u_x), JetVar::x);
  Expr G_u_x = diff(diff(G, JetVar::u), JetVar::x);
  Expr G_ux_u = diff(diff(G, JetVar::u_x), JetVar::u);
  Expr alpha_t = diff(alpha, JetVar::t);
  return simplify(-G_ux * F_u * ux + F_uxx * G_u * uxx + num(2) * F_uxx * G_ux_x * uxx +
                  num(2) * F_uxx * G_u_x * ux + F_ux * G_u * ux + F_uxx * G_uu * ux * ux +
                  F_uxx * G_uxux * uxx * uxx + num(2) * F_uxx * ux * G_ux_u * uxx + F_u * G +
                  F_uxx * G_xx - G_ux * F_x + F_ux * G_x - alpha * F_t - F * G_u -
                  alpha_t * F - G_t);
}

// probe classifying_residual(F, alpha, G) == invariance_residual(F, alpha u_t + G)
// over random instantiations; doubles as a transcription audit
inline ZeroVerdict classifying_equation_consistency(const ProbeConfig& cfg,
                                                    bool flip_sign_mutation = false) {
  SymbolContext ctx;
  ctx.declare("F", 5);
  ctx.declare("alpha", 1);
  ctx.declare("G", 4);
  Expr F = parse("F(t,x,u,u_x,u_xx)", ctx);
  Expr alpha = parse("alpha(t)", ctx);
  Expr G = parse("G(t,x,u,u_x)", ctx);
  Expr ce = classifying_residual(F, alpha, G);
  if (flip_sign_mutation) {
    // deliberately corrupt one term: -alpha F_t -> +alpha F_t
    ce = simplify(ce + num(2) * alpha * diff(F, JetVar::t));
  }
  Expr inv = invariance_residual(F, gf(alpha * var(JetVar::u_t) + G));
  ProbeContext pctx;
  pctx.symbols = ctx;
  return is_zero(ce - inv, cfg, pctx, rnd::task_hash("ce-consistency"));
}

}  // namespace ck
