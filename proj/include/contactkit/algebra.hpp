#pragma once

// Abstract Lie algebra tables (structure constants, possibly parameterized),
// Jacobi checking, sum constructors, and verification that generating
// functions realize a table under the contact bracket.

#include "contact.hpp"

namespace ck {

struct StructureConstants {
  std::string name;
  int dim = 0;
  // c[i][j][k] with [g_i, g_j] = sum_k c[i][j][k] g_k; antisymmetric in (i,j)
  std::vector<std::vector<std::vector<Expr>>> c;
  std::vector<std::string> parameters;
  std::vector<RangeConstraint> ranges;
  std::vector<Expr> exclusions;  // expressions required nonzero

  const Expr& at(int i, int j, int k) const { return c[i][j][k]; }

  Expr bracket_combo(int i, int j, const std::vector<Expr>& gens) const {
    std::vector<Expr> parts;
    for (int k = 0; k < dim; ++k)
      if (!c[i][j][k].is_zero()) parts.push_back(c[i][j][k] * gens[k]);
    return make_sum(std::move(parts));
  }

  StructureConstants bind(const Bindings& b) const {
    StructureConstants r = *this;
    if (b.empty()) return r;
    for (auto& plane : r.c)
      for (auto& row : plane)
        for (auto& e : row) e = simplify(substitute(e, b));
    r.parameters.clear();
    for (const auto& p : parameters)
      if (b.find(param(p)) == b.end()) r.parameters.push_back(p);
    for (auto& rc : r.ranges) rc.expr = substitute(rc.expr, b);
    for (auto& ex : r.exclusions) ex = substitute(ex, b);
    return r;
  }
};

struct TableEntry {
  int i, j, k;  // 1-based, i < j
  Expr coeff;
};

inline StructureConstants make_table(std::string name, int dim, std::vector<TableEntry> entries,
                                     std::vector<std::string> parameters = {},
                                     std::vector<RangeConstraint> ranges = {},
                                     std::vector<Expr> exclusions = {}) {
  StructureConstants sc;
  sc.name = std::move(name);
  sc.dim = dim;
  sc.c.assign(dim, std::vector<std::vector<Expr>>(dim, std::vector<Expr>(dim, num(0))));
  for (const auto& e : entries) {
    if (e.i < 1 || e.j < 1 || e.k < 1 || e.i > dim || e.j > dim || e.k > dim || e.i == e.j)
      throw std::invalid_argument("make_table: bad index in " + sc.name);
    sc.c[e.i - 1][e.j - 1][e.k - 1] = e.coeff;
    sc.c[e.j - 1][e.i - 1][e.k - 1] = simplify(-e.coeff);
  }
  sc.parameters = std::move(parameters);
  sc.ranges = std::move(ranges);
  sc.exclusions = std::move(exclusions);
  return sc;
}

// ---------------------------------------------------------------------------
// Jacobi identity

struct JacobiReport {
  struct Triple {
    int i, j, k;  // 0-based
    ZeroVerdict verdict;
  };
  std::vector<Triple> triples;
  bool pass = true;
};

inline Expr jacobi_residual(const StructureConstants& sc, int i, int j, int k, int l) {
  std::vector<Expr> parts;
  for (int m = 0; m < sc.dim; ++m) {
    parts.push_back(sc.at(i, j, m) * sc.at(m, k, l));
    parts.push_back(sc.at(j, k, m) * sc.at(m, i, l));
    parts.push_back(sc.at(k, i, m) * sc.at(m, j, l));
  }
  return make_sum(std::move(parts));
}

inline JacobiReport jacobi_check(const StructureConstants& sc, const ProbeConfig& cfg) {
  JacobiReport rep;
  ProbeContext ctx;
  ctx.ranges = sc.ranges;
  for (const auto& e : sc.exclusions) ctx.nonzero.push_back(e);
  for (int i = 0; i < sc.dim; ++i)
    for (int j = i + 1; j < sc.dim; ++j)
      for (int k = j + 1; k < sc.dim; ++k) {
        ZeroVerdict worst;
        worst.kind = Verdict::ProvenZero;
        for (int l = 0; l < sc.dim; ++l) {
          Expr r = jacobi_residual(sc, i, j, k, l);
          ZeroVerdict v;
          if (proven_zero_symbolic(r)) {
            v.kind = Verdict::ProvenZero;
          } else {
            v = is_zero(r, cfg, ctx,
                        rnd::task_hash(sc.name + ":jacobi:" + std::to_string(i) + "," +
                                       std::to_string(j) + "," + std::to_string(k) + "," +
                                       std::to_string(l)));
          }
          if (!v.zero_class()) {
            worst = v;
            break;
          }
          if (static_cast<int>(v.kind) > static_cast<int>(worst.kind)) worst = v;
        }
        rep.pass = rep.pass && worst.zero_class();
        rep.triples.push_back({i, j, k, worst});
      }
  return rep;
}

// ---------------------------------------------------------------------------
// Sum constructors

inline StructureConstants direct_sum(const StructureConstants& a, const StructureConstants& b,
                                     std::string name = {}) {
  StructureConstants sc;
  sc.name = name.empty() ? a.name + "+" + b.name : std::move(name);
  sc.dim = a.dim + b.dim;
  sc.c.assign(sc.dim, std::vector<std::vector<Expr>>(sc.dim, std::vector<Expr>(sc.dim, num(0))));
  for (int i = 0; i < a.dim; ++i)
    for (int j = 0; j < a.dim; ++j)
      for (int k = 0; k < a.dim; ++k) sc.c[i][j][k] = a.c[i][j][k];
  for (int i = 0; i < b.dim; ++i)
    for (int j = 0; j < b.dim; ++j)
      for (int k = 0; k < b.dim; ++k) sc.c[a.dim + i][a.dim + j][a.dim + k] = b.c[i][j][k];
  sc.parameters = a.parameters;
  for (const auto& p : b.parameters)
    if (std::find(sc.parameters.begin(), sc.parameters.end(), p) == sc.parameters.end())
      sc.parameters.push_back(p);
  sc.ranges = a.ranges;
  sc.ranges.insert(sc.ranges.end(), b.ranges.begin(), b.ranges.end());
  sc.exclusions = a.exclusions;
  sc.exclusions.insert(sc.exclusions.end(), b.exclusions.begin(), b.exclusions.end());
  return sc;
}

struct ActionEntry {
  int levi, rad, out;  // 1-based: [levi_i, radical_j] = sum coeff * radical_out
  Expr coeff;
};

inline StructureConstants semidirect(const StructureConstants& levi,
                                     const StructureConstants& radical,
                                     const std::vector<ActionEntry>& action,
                                     std::string name = {}) {
  StructureConstants sc = direct_sum(levi, radical,
                                     name.empty() ? levi.name + "|x" + radical.name : name);
  for (const auto& a : action) {
    if (a.levi < 1 || a.levi > levi.dim || a.rad < 1 || a.rad > radical.dim || a.out < 1 ||
        a.out > radical.dim)
      throw std::invalid_argument("semidirect: bad action index in " + sc.name);
    int i = a.levi - 1, j = levi.dim + a.rad - 1, k = levi.dim + a.out - 1;
    sc.c[i][j][k] = a.coeff;
    sc.c[j][i][k] = simplify(-a.coeff);
  }
  // Jacobi re-check: a bad action table must not slip through
  for (int i = 0; i < sc.dim; ++i)
    for (int j = i + 1; j < sc.dim; ++j)
      for (int k = j + 1; k < sc.dim; ++k)
        for (int l = 0; l < sc.dim; ++l)
          if (!proven_zero_symbolic(jacobi_residual(sc, i, j, k, l)))
            throw std::invalid_argument("semidirect: Jacobi identity fails for " + sc.name);
  return sc;
}

// ---------------------------------------------------------------------------
// Built-in structure-constant tables used by the classification catalog

namespace tables {

inline Expr P(const char* s) { return param(s); }

inline std::map<std::string, StructureConstants> build_registry() {
  std::map<std::string, StructureConstants> reg;
  auto add = [&](StructureConstants sc) { reg[sc.name] = std::move(sc); };
  Expr one = num(1);
  Expr q = P("q"), p = P("p");

  add(make_table("A1", 1, {}));
  add(make_table("A2.1", 2, {}));
  add(make_table("A2.2", 2, {{1, 2, 2, one}}));
  // A2.2 in the swapped basis ([g1,g2] = g1); several listings use this order
  add(make_table("A2.2r", 2, {{1, 2, 1, one}}));

  add(make_table("sl2R", 3, {{1, 2, 1, one}, {1, 3, 2, num(2)}, {2, 3, 3, one}}));
  add(make_table("so3", 3, {{1, 2, 3, one}, {1, 3, 2, num(-1)}, {2, 3, 1, one}}));

  add(make_table("A3.1", 3, {}));
  add(make_table("A3.2", 3, {{1, 2, 2, one}}));
  add(make_table("A3.3", 3, {{2, 3, 1, one}}));
  add(make_table("A3.4", 3, {{1, 3, 1, one}, {2, 3, 1, one}, {2, 3, 2, one}}));
  add(make_table("A3.5", 3, {{1, 3, 1, one}, {2, 3, 2, one}}));
  add(make_table("A3.6", 3, {{1, 3, 1, one}, {2, 3, 2, num(-1)}}));
  add(make_table("A3.7", 3, {{1, 3, 1, one}, {2, 3, 2, q}}, {"q"},
                 {{P("q"), Rat(-1), Rat(1)}}, {P("q")}));
  add(make_table("A3.8", 3, {{1, 3, 2, num(-1)}, {2, 3, 1, one}}));
  add(make_table("A3.9", 3, {{1, 3, 1, q}, {1, 3, 2, num(-1)}, {2, 3, 1, one}, {2, 3, 2, q}},
                 {"q"}, {{P("q"), Rat(0), Rat(3)}}, {}));

  add(make_table("A4.1", 4, {{2, 4, 1, one}, {3, 4, 2, one}}));
  add(make_table("A4.2", 4,
                 {{1, 4, 1, q}, {2, 4, 2, one}, {3, 4, 2, one}, {3, 4, 3, one}}, {"q"}, {},
                 {P("q")}));
  add(make_table("A4.3", 4, {{1, 4, 1, one}, {3, 4, 2, one}}));
  add(make_table("A4.4", 4,
                 {{1, 4, 1, one}, {2, 4, 1, one}, {2, 4, 2, one}, {3, 4, 2, one}, {3, 4, 3, one}}));
  add(make_table("A4.5", 4, {{1, 4, 1, one}, {2, 4, 2, q}, {3, 4, 3, p}}, {"q", "p"},
                 {{P("q"), Rat(-1), Rat(1)}, {P("p"), Rat(-1), Rat(1)}},
                 {simplify(P("p") * P("q"))}));
  add(make_table("A4.6", 4,
                 {{1, 4, 1, q}, {2, 4, 2, p}, {2, 4, 3, num(-1)}, {3, 4, 2, one}, {3, 4, 3, p}},
                 {"q", "p"}, {{P("p"), Rat(0), Rat(3)}}, {P("q")}));
  add(make_table("A4.7", 4,
                 {{2, 3, 1, one}, {1, 4, 1, num(2)}, {2, 4, 2, one}, {3, 4, 2, one}, {3, 4, 3, one}}));
  add(make_table("A4.8", 4,
                 {{2, 3, 1, one}, {1, 4, 1, simplify(one + q)}, {2, 4, 2, one}, {3, 4, 3, q}},
                 {"q"}, {{P("q"), Rat(-1), Rat(1)}}, {}));
  add(make_table("A4.9", 4,
                 {{2, 3, 1, one},
                  {1, 4, 1, simplify(num(2) * q)},
                  {2, 4, 2, q},
                  {2, 4, 3, num(-1)},
                  {3, 4, 2, one},
                  {3, 4, 3, q}},
                 {"q"}, {{P("q"), Rat(0), Rat(3)}}, {}));
  add(make_table("A4.10", 4,
                 {{1, 3, 1, one}, {2, 3, 2, one}, {1, 4, 2, num(-1)}, {2, 4, 1, one}}));

  // composites used by the catalog
  add(direct_sum(reg.at("A2.2"), reg.at("A2.2"), "2A2.2"));
  for (int i = 1; i <= 9; ++i) {
    std::string n = "A3." + std::to_string(i);
    add(direct_sum(reg.at(n), reg.at("A1"), n + "+A1"));
  }
  add(direct_sum(reg.at("sl2R"), reg.at("sl2R"), "so22"));
  add(direct_sum(reg.at("sl2R"), reg.at("A1"), "sl2R+A1"));
  add(direct_sum(reg.at("sl2R"), reg.at("A2.2r"), "sl2R+A2.2r"));
  add(direct_sum(reg.at("so3"), reg.at("A1"), "so3+A1"));

  // semidirect tables printed in the Levi-decomposition section
  Expr half = num(1, 2);
  add(semidirect(reg.at("sl2R"), reg.at("A2.1"),
                 {{1, 2, 1, one}, {2, 1, 1, simplify(-half)}, {2, 2, 2, half}, {3, 1, 2, num(-1)}},
                 "sl2RxA2.1"));
  add(semidirect(reg.at("so3"), reg.at("A3.1"),
                 {{1, 2, 3, one},
                  {1, 3, 2, num(-1)},
                  {2, 1, 3, num(-1)},
                  {2, 3, 1, one},
                  {3, 1, 2, one},
                  {3, 2, 1, num(-1)}},
                 "so3xA3.1"));
  // maximal algebra of the sl(2,R) |x A2.1 invariant equation with F = 1:
  // sl2R acting on <g4,g5>, and <g6,g7> with [g6,g7] = 4/3 g6
  {
    StructureConstants sc = make_table(
        "sleq7", 7,
        {{1, 2, 1, one},
         {1, 3, 2, num(2)},
         {2, 3, 3, one},
         {1, 5, 4, one},
         {2, 4, 4, simplify(-half)},
         {2, 5, 5, half},
         {3, 4, 5, num(-1)},
         {4, 7, 4, one},
         {5, 7, 5, one},
         {6, 7, 6, num(4, 3)}});
    add(sc);
  }
  return reg;
}

}  // namespace tables

inline const std::map<std::string, StructureConstants>& table_registry() {
  static const std::map<std::string, StructureConstants> reg = tables::build_registry();
  return reg;
}

inline const StructureConstants& builtin_table(const std::string& name) {
  const auto& reg = table_registry();
  auto it = reg.find(name);
  if (it == reg.end()) throw std::invalid_argument("unknown algebra table '" + name + "'");
  return it->second;
}

// ---------------------------------------------------------------------------
// Realizations

struct Realization {
  StructureConstants table;  // parameters already bound where applicable
  std::vector<GeneratingFunction> generators;

  Realization(StructureConstants t, std::vector<GeneratingFunction> g)
      : table(std::move(t)), generators(std::move(g)) {
    if (static_cast<int>(generators.size()) != table.dim)
      throw std::invalid_argument("realization of " + table.name + ": generator count " +
                                  std::to_string(generators.size()) + " != dim " +
                                  std::to_string(table.dim));
  }
};

struct PairReport {
  int i, j;  // 0-based
  ZeroVerdict verdict;
  Expr residual;
};

struct RealizationReport {
  std::vector<PairReport> pairs;
  bool pass = true;
};

inline RealizationReport check_realization(const Realization& r, const ProbeConfig& cfg,
                                           ProbeContext ctx = {},
                                           const std::string& label = {}) {
  RealizationReport rep;
  ctx.ranges.insert(ctx.ranges.end(), r.table.ranges.begin(), r.table.ranges.end());
  for (const auto& e : r.table.exclusions) ctx.nonzero.push_back(e);
  std::vector<Expr> gens;
  gens.reserve(r.generators.size());
  for (const auto& g : r.generators) {
    gens.push_back(g.expr());
    ctx.domain_guards.push_back(g.expr());
  }
  for (int i = 0; i < r.table.dim; ++i)
    for (int j = i + 1; j < r.table.dim; ++j) {
      Expr lhs = bracket(r.generators[i], r.generators[j]).expr();
      Expr rhs = r.table.bracket_combo(i, j, gens);
      Expr residual = simplify(lhs - rhs);
      ZeroVerdict v = is_zero(residual, cfg, ctx,
                              rnd::task_hash(label + ":closure:" + std::to_string(i) + "," +
                                             std::to_string(j)));
      rep.pass = rep.pass && v.zero_class();
      rep.pairs.push_back({i, j, v, residual});
    }
  return rep;
}

// ---------------------------------------------------------------------------
// Structure recovery: probe bracket values, solve for constants, confirm

struct NotClosed {
  int i = -1, j = -1;  // offending pair (0-based)
  std::string reason;
};

struct MatchResult {
  bool closed = false;
  StructureConstants table;
  NotClosed failure;
};

namespace detail_match {

inline std::optional<Rat> rationalize(double x, long max_den = 64, double tol = 1e-6) {
  // continued fractions
  double v = x;
  long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  for (int iter = 0; iter < 40; ++iter) {
    double fl = std::floor(v);
    if (fl > 1e15 || fl < -1e15) return std::nullopt;
    long a = static_cast<long>(fl);
    long p2 = a * p1 + p0, q2 = a * q1 + q0;
    if (q2 > max_den) break;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    double approx = static_cast<double>(p1) / q1;
    if (std::abs(approx - x) < tol) return Rat(p1) / q1;
    double frac = v - fl;
    if (frac < 1e-12) break;
    v = 1.0 / frac;
  }
  if (q1 != 0 && std::abs(static_cast<double>(p1) / q1 - x) < tol) return Rat(p1) / q1;
  return std::nullopt;
}

}  // namespace detail_match

inline MatchResult match_structure(const std::vector<GeneratingFunction>& gens,
                                   const ProbeConfig& cfg, const ProbeContext& ctx = {},
                                   const std::string& label = {}) {
  MatchResult out;
  const int n = static_cast<int>(gens.size());
  const int S = 2 * n + 6;  // sample points
  rnd::Stream rng(rnd::splitmix64(cfg.seed) ^ rnd::task_hash(label + ":match"));

  std::set<std::string> vars, params;
  std::map<std::string, int> opaques;
  for (const auto& g : gens) detail_probe::collect_symbols(g.expr(), vars, params, opaques);

  // sample evaluation matrix A[s][k] = g_k(point_s)
  std::vector<std::vector<double>> A;
  std::vector<EvalEnv> envs;
  std::vector<std::map<std::string, PolyInstance>> fns_store;
  fns_store.reserve(S);
  int guard = 0;
  while (static_cast<int>(A.size()) < S && guard++ < cfg.max_domain_retries * S) {
    fns_store.emplace_back();
    auto& fns = fns_store.back();
    for (const auto& [name, arity] : opaques) {
      int a = arity;
      if (const OpaqueSymbol* sym = ctx.symbols.find(name)) a = std::max(a, sym->arity);
      fns[name] = rnd::draw_poly(rng, a, cfg.opaque_poly_degree);
    }
    EvalEnv env;
    env.fns = &fns;
    for (const auto& p : params) env.values[p] = rnd::draw_nonzero(rng, Rat(-3), Rat(3));
    for (const auto& v : vars) env.values[v] = rnd::draw_nonzero(rng, Rat(-3), Rat(3));
    try {
      std::vector<double> row;
      row.reserve(n);
      for (const auto& g : gens) row.push_back(eval_double(g.expr(), env));
      A.push_back(std::move(row));
      envs.push_back(std::move(env));
    } catch (const DomainError&) {
      fns_store.pop_back();
    }
  }
  if (static_cast<int>(A.size()) < S)
    throw std::runtime_error("match_structure: domain sampling exhausted");

  // Gram test for linear independence
  std::vector<std::vector<double>> G(n, std::vector<double>(n, 0.0));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int s = 0; s < S; ++s) G[a][b] += A[s][a] * A[s][b];
  // determinant by elimination
  {
    auto M = G;
    double det = 1;
    for (int c = 0; c < n; ++c) {
      int piv = c;
      for (int r = c + 1; r < n; ++r)
        if (std::abs(M[r][c]) > std::abs(M[piv][c])) piv = r;
      if (std::abs(M[piv][c]) < 1e-9) {
        throw std::runtime_error("match_structure: generators numerically dependent (degenerate sampling)");
      }
      std::swap(M[c], M[piv]);
      det *= M[c][c];
      for (int r = c + 1; r < n; ++r) {
        double f = M[r][c] / M[c][c];
        for (int k = c; k < n; ++k) M[r][k] -= f * M[c][k];
      }
    }
    (void)det;
  }

  std::vector<TableEntry> entries;
  ProbeContext vctx = ctx;
  for (int i = 0; i < n && out.failure.i < 0; ++i)
    for (int j = i + 1; j < n; ++j) {
      Expr br = bracket(gens[i], gens[j]).expr();
      // least squares: minimize || A c - b ||
      std::vector<double> b(S);
      bool ok = true;
      for (int s = 0; s < S; ++s) {
        try {
          b[s] = eval_double(br, envs[s]);
        } catch (const DomainError&) {
          ok = false;
          break;
        }
      }
      if (!ok) {
        out.failure = {i, j, "bracket not evaluable at sample points"};
        break;
      }
      // normal equations
      std::vector<std::vector<double>> M = G;
      std::vector<double> rhs(n, 0.0);
      for (int k = 0; k < n; ++k)
        for (int s = 0; s < S; ++s) rhs[k] += A[s][k] * b[s];
      // solve M x = rhs (Gaussian elimination)
      std::vector<double> x(n, 0.0);
      {
        auto MM = M;
        auto rr = rhs;
        for (int c = 0; c < n; ++c) {
          int piv = c;
          for (int r = c + 1; r < n; ++r)
            if (std::abs(MM[r][c]) > std::abs(MM[piv][c])) piv = r;
          std::swap(MM[c], MM[piv]);
          std::swap(rr[c], rr[piv]);
          for (int r = c + 1; r < n; ++r) {
            double f = MM[r][c] / MM[c][c];
            for (int k = c; k < n; ++k) MM[r][k] -= f * MM[c][k];
            rr[r] -= f * rr[c];
          }
        }
        for (int c = n - 1; c >= 0; --c) {
          double s = rr[c];
          for (int k = c + 1; k < n; ++k) s -= MM[c][k] * x[k];
          x[c] = s / MM[c][c];
        }
      }
      // rationalize and confirm symbolically
      std::vector<Expr> terms;
      bool rational_ok = true;
      std::vector<Rat> cs(n);
      for (int k = 0; k < n; ++k) {
        auto r = detail_match::rationalize(x[k]);
        if (!r) {
          rational_ok = false;
          break;
        }
        cs[k] = *r;
        if (*r != 0) terms.push_back(num(*r) * gens[k].expr());
      }
      if (!rational_ok) {
        out.failure = {i, j, "bracket coefficients not small rationals"};
        break;
      }
      Expr residual = simplify(br - make_sum(std::move(terms)));
      ZeroVerdict v = is_zero(residual, cfg, vctx,
                              rnd::task_hash(label + ":match:" + std::to_string(i) + "," +
                                             std::to_string(j)));
      if (!v.zero_class()) {
        out.failure = {i, j, "bracket does not close over the span (verdict " +
                               std::string(verdict_name(v.kind)) + ")"};
        break;
      }
      for (int k = 0; k < n; ++k)
        if (cs[k] != 0) entries.push_back({i + 1, j + 1, k + 1, num(cs[k])});
    }

  if (out.failure.i >= 0) {
    out.closed = false;
    return out;
  }
  out.closed = true;
  out.table = make_table(label.empty() ? "recovered" : label, n, std::move(entries));
  return out;
}

}  // namespace ck
