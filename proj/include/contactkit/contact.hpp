#pragma once

// Contact geometry layer: the contact vector field of a generating function,
// the contact bracket (closed form and via total derivatives), symmetry-kind
// classification, and contact equivalence transformations.

#include <array>

#include "jet.hpp"
#include "probe.hpp"

namespace ck {

// g(t,x,u,u_t,u_x); also called characteristic function or contact Hamiltonian
class GeneratingFunction {
 public:
  GeneratingFunction() : e_(num(0)) {}
  explicit GeneratingFunction(Expr e) : e_(std::move(e)) {
    for (JetVar v : {JetVar::u_xx, JetVar::u_3, JetVar::u_4, JetVar::u_5, JetVar::u_6,
                     JetVar::u_7, JetVar::u_8, JetVar::u_tx, JetVar::u_tt})
      if (depends_on(e_, v))
        throw std::invalid_argument(
            std::string("generating function depends on ") + jet_name(v) +
            "; only t, x, u, u_t, u_x are allowed");
  }
  const Expr& expr() const { return e_; }

 private:
  Expr e_;
};

inline GeneratingFunction gf(const Expr& e) { return GeneratingFunction(e); }

// coefficients of d_t, d_x, d_u, d_{u_x}, d_{u_t}
struct ContactField {
  Expr coef_t, coef_x, coef_u, coef_ux, coef_ut;

  std::array<Expr, 5> coeffs() const { return {coef_t, coef_x, coef_u, coef_ux, coef_ut}; }
};

// V_g = -g_{u_t} d_t - g_{u_x} d_x + (g - u_t g_{u_t} - u_x g_{u_x}) d_u
//       + (g_x + u_x g_u) d_{u_x} + (g_t + u_t g_u) d_{u_t}
inline ContactField vector_field(const GeneratingFunction& g) {
  const Expr& e = g.expr();
  Expr g_t = diff(e, JetVar::t), g_x = diff(e, JetVar::x), g_u = diff(e, JetVar::u);
  Expr g_ut = diff(e, JetVar::u_t), g_ux = diff(e, JetVar::u_x);
  ContactField f;
  f.coef_t = simplify(-g_ut);
  f.coef_x = simplify(-g_ux);
  f.coef_u = simplify(e - var(JetVar::u_t) * g_ut - var(JetVar::u_x) * g_ux);
  f.coef_ux = simplify(g_x + var(JetVar::u_x) * g_u);
  f.coef_ut = simplify(g_t + var(JetVar::u_t) * g_u);
  return f;
}

// closed-form contact bracket:
// [f,g] = (g_{u_t}f_u - f_{u_t}g_u) u_t + (g_{u_x}f_u - f_{u_x}g_u) u_x
//         + g_{u_t}f_t - f_{u_t}g_t + g_{u_x}f_x - f_{u_x}g_x + f g_u - g f_u
inline GeneratingFunction bracket(const GeneratingFunction& fg, const GeneratingFunction& gg) {
  const Expr& f = fg.expr();
  const Expr& g = gg.expr();
  Expr f_t = diff(f, JetVar::t), f_x = diff(f, JetVar::x), f_u = diff(f, JetVar::u);
  Expr f_ut = diff(f, JetVar::u_t), f_ux = diff(f, JetVar::u_x);
  Expr g_t = diff(g, JetVar::t), g_x = diff(g, JetVar::x), g_u = diff(g, JetVar::u);
  Expr g_ut = diff(g, JetVar::u_t), g_ux = diff(g, JetVar::u_x);
  Expr r = (g_ut * f_u - f_ut * g_u) * var(JetVar::u_t) +
           (g_ux * f_u - f_ux * g_u) * var(JetVar::u_x) + g_ut * f_t - f_ut * g_t +
           g_ux * f_x - f_ux * g_x + f * g_u - g * f_u;
  return GeneratingFunction(simplify(r));
}

// f_*(g) = f_{u_t} D_t g + f_u g + f_{u_x} D_x g;  [f,g] = g_*(f) - f_*(g).
// The result may transiently involve u_xx, u_tx, u_tt; they cancel.
inline Expr bracket_via_star(const GeneratingFunction& fg, const GeneratingFunction& gg) {
  const Expr& f = fg.expr();
  const Expr& g = gg.expr();
  auto star = [](const Expr& a, const Expr& b) {
    return diff(a, JetVar::u_t) * total_t(b) + diff(a, JetVar::u) * b +
           diff(a, JetVar::u_x) * total_x(b);
  };
  return simplify(star(g, f) - star(f, g));
}

// commutator of V_f and V_g on the 5-dimensional space (t,x,u,u_t,u_x)
inline ContactField field_commutator(const GeneratingFunction& fg, const GeneratingFunction& gg) {
  ContactField vf = vector_field(fg);
  ContactField vg = vector_field(gg);
  const std::array<JetVar, 5> coords = {JetVar::t, JetVar::x, JetVar::u, JetVar::u_x,
                                        JetVar::u_t};
  auto apply = [&](const ContactField& v, const Expr& h) {
    std::array<Expr, 5> c = {v.coef_t, v.coef_x, v.coef_u, v.coef_ux, v.coef_ut};
    std::vector<Expr> parts;
    for (size_t i = 0; i < 5; ++i) parts.push_back(c[i] * diff(h, coords[i]));
    return make_sum(std::move(parts));
  };
  ContactField r;
  r.coef_t = simplify(apply(vf, vg.coef_t) - apply(vg, vf.coef_t));
  r.coef_x = simplify(apply(vf, vg.coef_x) - apply(vg, vf.coef_x));
  r.coef_u = simplify(apply(vf, vg.coef_u) - apply(vg, vf.coef_u));
  r.coef_ux = simplify(apply(vf, vg.coef_ux) - apply(vg, vf.coef_ux));
  r.coef_ut = simplify(apply(vf, vg.coef_ut) - apply(vg, vf.coef_ut));
  return r;
}

struct SymmetryKind {
  bool point = false;      // g_{u_t u_t} = g_{u_t u_x} = g_{u_x u_x} = 0
  bool evolution = false;  // g_{u_t} = 0

  const char* label() const {
    if (point) return evolution ? "point+evolution" : "point";
    if (evolution) return "evolution";
    return "general-contact";
  }
};

inline SymmetryKind classify_kind(const GeneratingFunction& g) {
  const Expr& e = g.expr();
  SymmetryKind k;
  Expr g_ut = diff(e, JetVar::u_t);
  k.evolution = proven_zero_symbolic(g_ut);
  k.point = proven_zero_symbolic(diff(g_ut, JetVar::u_t)) &&
            proven_zero_symbolic(diff(g_ut, JetVar::u_x)) &&
            proven_zero_symbolic(diff(diff(e, JetVar::u_x), JetVar::u_x));
  return k;
}

// ---------------------------------------------------------------------------
// Contact equivalence transformations
//   t~ = T(t),  x~ = X(t,x,u,u_x),  u~ = U(t,x,u,u_x)
// with the contact condition X_{u_x}(u_x U_u + U_x) = U_{u_x}(u_x X_u + X_x).

struct ContactTransformation {
  Expr T, X, U;
  Expr DX, DU, J;           // cached D(X), D(U), J = D(X) U_u - D(U) X_u
  Expr Tdot;
  Expr cc_residual;         // X_{u_x}(u_x U_u + U_x) - U_{u_x}(u_x X_u + X_x)
  bool cc_proven = false;   // contact condition symbolically zero

  ContactTransformation(Expr T_, Expr X_, Expr U_) : T(std::move(T_)), X(std::move(X_)), U(std::move(U_)) {
    for (JetVar v : {JetVar::x, JetVar::u, JetVar::u_t, JetVar::u_x, JetVar::u_xx})
      if (depends_on(T, v))
        throw std::invalid_argument("contact transformation: T must depend on t only");
    for (const Expr* e : {&X, &U})
      for (JetVar v : {JetVar::u_t, JetVar::u_xx, JetVar::u_tx, JetVar::u_tt})
        if (depends_on(*e, v))
          throw std::invalid_argument(
              "contact transformation: X, U must depend on (t,x,u,u_x) only");
    DX = simplify(restricted_x(X));
    DU = simplify(restricted_x(U));
    J = simplify(DX * diff(U, JetVar::u) - DU * diff(X, JetVar::u));
    Tdot = simplify(diff(T, JetVar::t));
    if (proven_zero_symbolic(J)) throw std::invalid_argument("contact transformation: J == 0");
    if (proven_zero_symbolic(Tdot))
      throw std::invalid_argument("contact transformation: T'(t) == 0");
    Expr ux = var(JetVar::u_x);
    cc_residual = simplify(diff(X, JetVar::u_x) * (ux * diff(U, JetVar::u) + diff(U, JetVar::x)) -
                           diff(U, JetVar::u_x) * (ux * diff(X, JetVar::u) + diff(X, JetVar::x)));
    cc_proven = proven_zero_symbolic(cc_residual);
  }

  static ContactTransformation identity() {
    return ContactTransformation(var(JetVar::t), var(JetVar::x), var(JetVar::u));
  }

  const Expr& contact_condition_residual() const { return cc_residual; }

  // first and second transformed slopes
  Expr slope() const { return simplify(DU / DX); }
  Expr second_slope() const {
    Expr D2U = restricted_x(DU);
    Expr D2X = restricted_x(DX);
    return simplify((DX * D2U - DU * D2X) / pow(DX, 3));
  }
};

inline ZeroVerdict check_contact_condition(const ContactTransformation& tr,
                                           const ProbeConfig& cfg,
                                           const ProbeContext& ctx_in = {},
                                           std::uint64_t task_id = 0) {
  if (tr.cc_proven) {
    ZeroVerdict v;
    v.kind = Verdict::ProvenZero;
    return v;
  }
  ProbeContext ctx = ctx_in;
  ctx.domain_guards.push_back(tr.X);
  ctx.domain_guards.push_back(tr.U);
  return is_zero(tr.contact_condition_residual(), cfg, ctx, task_id);
}

namespace detail_contact {

// substitute tilde coordinates (t,x,u,u_x) -> (T, X, U, DU/DX) plus u_xx
inline Bindings tilde_bindings(const ContactTransformation& tr, bool with_uxx) {
  Bindings b;
  b.emplace(var(JetVar::t), tr.T);
  b.emplace(var(JetVar::x), tr.X);
  b.emplace(var(JetVar::u), tr.U);
  b.emplace(var(JetVar::u_x), tr.slope());
  if (with_uxx) b.emplace(var(JetVar::u_xx), tr.second_slope());
  return b;
}

}  // namespace detail_contact

// split of a generating function written in tilde coordinates into the
// admissible-symmetry shape:
// g~ = alpha~(t~) u_t~ + G~(t~,x~,u~,u_x~)
struct AnsatzSplit {
  Expr alpha;  // function of t only
  Expr G;      // free of u_t
};

inline AnsatzSplit ansatz_split(const GeneratingFunction& g) {
  Expr alpha = simplify(diff(g.expr(), JetVar::u_t));
  for (JetVar v : {JetVar::x, JetVar::u, JetVar::u_x, JetVar::u_t})
    if (depends_on(alpha, v))
      throw std::invalid_argument(
          "generating function is not of the form alpha(t) u_t + G(t,x,u,u_x)");
  Expr G = simplify(g.expr() - alpha * var(JetVar::u_t));
  return {alpha, G};
}

// new generating function of the transformed equation:
// g = alpha~(T)/T' u_t + D(X)/J [ (D(X)U_t - D(U)X_t)/(D(X)T') alpha~(T)
//                                 + G~(T, X, U, D(U)/D(X)) ]
inline GeneratingFunction transform_generating_function(const ContactTransformation& tr,
                                                        const GeneratingFunction& g_tilde) {
  AnsatzSplit s = ansatz_split(g_tilde);
  Bindings t_only;
  t_only.emplace(var(JetVar::t), tr.T);
  Expr alpha_T = substitute(s.alpha, t_only);
  Expr G_sub = substitute(s.G, detail_contact::tilde_bindings(tr, false));
  Expr X_t = diff(tr.X, JetVar::t), U_t = diff(tr.U, JetVar::t);
  Expr g = alpha_T / tr.Tdot * var(JetVar::u_t) +
           tr.DX / tr.J *
               ((tr.DX * U_t - tr.DU * X_t) / (tr.DX * tr.Tdot) * alpha_T + G_sub);
  return GeneratingFunction(simplify(g));
}

// transformed right-hand side:
// u_t = D(X)/J [ T' F~(T,X,U,u_x~,u_xx~) + X_t u_x~ - U_t ]
inline Expr transform_equation(const ContactTransformation& tr, const Expr& F_tilde) {
  require_rhs_shape(F_tilde);
  Expr F_sub = substitute(F_tilde, detail_contact::tilde_bindings(tr, true));
  Expr X_t = diff(tr.X, JetVar::t), U_t = diff(tr.U, JetVar::t);
  Expr rhs = tr.DX / tr.J * (tr.Tdot * F_sub + X_t * tr.slope() - U_t);
  return simplify(rhs);
}

}  // namespace ck
