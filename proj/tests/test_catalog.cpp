#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "contactkit/contactkit.hpp"

using namespace ck;

TEST_CASE("shipped catalog loads and validates") {
  auto entries = load_catalog(CONTACTKIT_CATALOG);
  CHECK(entries.size() == 140);

  std::map<std::string, int> counted;
  int supplementary = 0;
  for (const auto& e : entries) {
    if (e.counted && !e.closure_only) ++counted[e.section];
    else ++supplementary;
  }
  CHECK(counted["1d"] == 2);
  CHECK(counted["semisimple"] == 4);
  CHECK(counted["2d"] == 5);
  CHECK(counted["3d"] == 26);
  CHECK(counted["4d"] == 88);
  CHECK(counted["levi"] == 11);
  CHECK(supplementary == 4);  // three so(2,2) closure fixtures + the 7-dim algebra

  // every stored expression round-trips through the grammar
  for (const auto& e : entries) {
    SymbolContext ctx = e.symbols;
    for (const auto& g : e.generators) CHECK(equal(parse(to_string(g), ctx), g));
    if (e.rhs) CHECK(equal(parse(to_string(*e.rhs), ctx), *e.rhs));
  }
}

TEST_CASE("loader rejects malformed files") {
  {
    std::istringstream empty("");
    CHECK(load_catalog(empty).empty());
  }
  {
    std::istringstream dup("[entry]\nid=a\nsection=s\nalgebra=A1\ng1 = u\nrhs = u_xx\n"
                           "[entry]\nid=a\nsection=s\nalgebra=A1\ng1 = u\nrhs = u_xx\n");
    CHECK_THROWS_AS(load_catalog(dup), CatalogError);
  }
  {
    std::istringstream mismatch(
        "[entry]\nid=a\nsection=s\nalgebra=A3.5\ng1 = 1\ng2 = u_x\nrhs = u_xx\n");
    CHECK_THROWS_AS(load_catalog(mismatch), CatalogError);
  }
  {
    std::istringstream badrhs("[entry]\nid=a\nsection=s\nalgebra=A1\ng1 = u\nrhs = u_tx\n");
    CHECK_THROWS_AS(load_catalog(badrhs), CatalogError);
  }
  {
    std::istringstream norhs("[entry]\nid=a\nsection=s\nalgebra=A1\ng1 = u\n");
    CHECK_THROWS_AS(load_catalog(norhs), CatalogError);
  }
}

TEST_CASE("verify_entry on representative entries") {
  auto entries = load_catalog(CONTACTKIT_CATALOG);
  ProbeConfig cfg;
  cfg.samples = 8;
  int hit = 0;
  for (const auto& e : entries) {
    if (e.id == "A_1^2" || e.id == "A_2.2^3" || e.id == "sl^3(2,R)" || e.id == "A_3.5^2" ||
        e.id == "so(2,2)^1") {
      EntryReport rep = verify_entry(e, cfg);
      INFO(e.id);
      CHECK(rep.pass);
      if (e.id == "so(2,2)^1") {
        for (const auto& c : rep.checks) CHECK(c.kind == "closure");
      }
      ++hit;
    }
  }
  CHECK(hit == 5);
}

TEST_CASE("a corrupted entry fails exactly where corrupted") {
  auto entries = load_catalog(CONTACTKIT_CATALOG);
  ProbeConfig cfg;
  cfg.samples = 8;
  // drop the e^-t factor from A_3.5^2's right-hand side
  bool patched = false;
  for (auto& e : entries) {
    if (e.id != "A_3.5^2") continue;
    SymbolContext ctx = e.symbols;
    e.rhs = parse("F(u_x, exp(-t)*u_xx)", ctx);
    patched = true;
    EntryReport rep = verify_entry(e, cfg);
    CHECK(rep.failed);
  }
  REQUIRE(patched);
  // its neighbours still pass
  for (auto& e : entries)
    if (e.id == "A_3.5^1" || e.id == "A_3.5^3") CHECK(verify_entry(e, cfg).pass);
}

TEST_CASE("negative controls: heat equation non-symmetries") {
  ProbeConfig cfg;
  Expr heat = var(JetVar::u_xx);
  InvarianceReport a = check_invariance(heat, gf(parse("u^2")), cfg);
  CHECK(a.verdict.kind == Verdict::ProvenNonzero);
  InvarianceReport b = check_invariance(heat, gf(parse("u*u_x")), cfg);
  CHECK(b.verdict.kind == Verdict::ProvenNonzero);
  // and a classical symmetry passes
  InvarianceReport c = check_invariance(heat, gf(parse("-2*t*u_t - x*u_x")), cfg);
  CHECK(c.verdict.kind == Verdict::ProvenZero);
}

TEST_CASE("invariance residual fixtures") {
  SymbolContext ctx;
  ctx.declare("F", 4);
  // A_1^2: F(t,x,u_x,u_xx) with g = 1 forces only F_u = 0
  Expr F = parse("F(t,x,u_x,u_xx)", ctx);
  Expr r = invariance_residual(F, gf(num(1)));
  CHECK(proven_zero_symbolic(r));
  // classifying equation slices
  SymbolContext c2;
  c2.declare("F", 5);
  Expr F5 = parse("F(t,x,u,u_x,u_xx)", c2);
  Expr ce = classifying_residual(F5, num(0), num(1));
  CHECK(proven_zero_symbolic(ce - diff(F5, JetVar::u)));
  Expr ce2 = classifying_residual(F5, num(1), num(0));
  CHECK(proven_zero_symbolic(ce2 + diff(F5, JetVar::t)));
}

TEST_CASE("invariance residual is linear in the generator") {
  ProbeConfig cfg;
  cfg.samples = 8;
  SymbolContext ctx;
  ctx.declare("F", 3);
  Expr F = parse("F(u,u_x,u_xx)", ctx);
  Expr g1 = parse("u*u_x", ctx), g2 = parse("u_t + x^2", ctx);
  Expr lhs = invariance_residual(F, gf(num(3) * g1 - num(2) * g2));
  Expr rhs = num(3) * invariance_residual(F, gf(g1)) - num(2) * invariance_residual(F, gf(g2));
  ProbeContext pctx;
  pctx.symbols = ctx;
  CHECK(is_zero(lhs - rhs, cfg, pctx, 7).zero_class());
}

TEST_CASE("residual construction is expansion-order independent") {
  SymbolContext ctx;
  ctx.declare("F", 5);
  ctx.declare("g", 5);
  Expr F = parse("F(t,x,u,u_x,u_xx)", ctx);
  Expr g = parse("g(t,x,u,u_t,u_x)", ctx);
  // path A: restricted derivatives of the on-shell generator (implementation)
  Expr a = invariance_residual(F, gf(g));
  // path B: unrestricted totals first, on-shell afterwards, order by order
  Expr g0 = on_shell(g, F);
  Expr b = simplify(g0 * diff(F, JetVar::u) +
                    on_shell(total_x(g), F) * diff(F, JetVar::u_x) +
                    restricted_x(on_shell(total_x(g), F)) * diff(F, JetVar::u_xx) -
                    on_shell(total_t(g), F));
  CHECK(proven_zero_symbolic(a - b));
}

TEST_CASE("classifying-equation consistency and its mutation control") {
  ProbeConfig cfg;
  cfg.samples = 12;
  ZeroVerdict ok = classifying_equation_consistency(cfg);
  CHECK(ok.zero_class());
  ZeroVerdict bad = classifying_equation_consistency(cfg, true);
  CHECK(bad.kind == Verdict::ProvenNonzero);
}

TEST_CASE("verify_all is deterministic and seed-stable") {
  auto entries = load_catalog(CONTACTKIT_CATALOG);
  std::vector<CatalogEntry> subset;
  for (const auto& e : entries)
    if (e.section == "2d" || e.section == "1d" || e.id == "A_3.1^2") subset.push_back(e);
  ProbeConfig cfg;
  cfg.samples = 8;
  Summary s1 = verify_all(subset, cfg, 2);
  Summary s2 = verify_all(subset, cfg, 4);  // different parallelism, same seed
  REQUIRE(s1.reports.size() == s2.reports.size());
  for (size_t i = 0; i < s1.reports.size(); ++i) {
    REQUIRE(s1.reports[i].checks.size() == s2.reports[i].checks.size());
    for (size_t j = 0; j < s1.reports[i].checks.size(); ++j) {
      CHECK(s1.reports[i].checks[j].verdict.kind == s2.reports[i].checks[j].verdict.kind);
      CHECK(s1.reports[i].checks[j].verdict.max_residual ==
            s2.reports[i].checks[j].verdict.max_residual);
    }
  }
  ProbeConfig cfg2 = cfg;
  cfg2.seed = 12345;
  Summary s3 = verify_all(subset, cfg2, 2);
  for (size_t i = 0; i < s1.reports.size(); ++i) {
    CHECK(s1.reports[i].failed == s3.reports[i].failed);
    CHECK(s1.reports[i].inconclusive == s3.reports[i].inconclusive);
  }
}
