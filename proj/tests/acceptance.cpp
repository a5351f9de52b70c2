// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion.  Exit code 0 iff all pass.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "contactkit/contactkit.hpp"
#include "sampler.hpp"

using namespace ck;

namespace {

int failures = 0;

void report(int idx, const std::string& name, bool pass, const std::string& detail = "") {
  std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << idx << ": " << name;
  if (!detail.empty()) std::cout << "  [" << detail << "]";
  std::cout << "\n" << std::flush;
  if (!pass) ++failures;
}

std::string records_output(const Summary& sum) {
  std::ostringstream os;
  for (const auto& rep : sum.reports)
    for (const auto& c : rep.checks) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.3e", c.verdict.max_residual);
      os << "CHECK " << rep.id << " " << c.kind << " " << c.what << " "
         << verdict_name(c.verdict.kind) << " "
         << (c.verdict.kind == Verdict::ProvenZero || c.verdict.kind == Verdict::ExactProbeZero
                 ? "0"
                 : buf)
         << "\n";
    }
  return os.str();
}

// --------------------------------------------------------------------------
// 1. catalog regression at default config, with section tallies

void criterion1(const std::vector<CatalogEntry>& entries, Summary& out_summary) {
  ProbeConfig cfg;  // seed 7, 32 samples, tol 1e-8
  auto t0 = std::chrono::steady_clock::now();
  out_summary = verify_all(entries, cfg, 4);
  auto t1 = std::chrono::steady_clock::now();
  double secs = std::chrono::duration<double>(t1 - t0).count();

  const Summary& sum = out_summary;
  bool zero_failures = sum.fail == 0 && sum.inconclusive == 0;

  static const std::pair<const char*, int> claimed[] = {
      {"1d", 2}, {"semisimple", 4}, {"2d", 5}, {"3d", 26}, {"4d", 88}, {"levi", 11}};
  bool counts_ok = true;
  std::ostringstream tally;
  for (auto [s, n] : claimed) {
    int got = sum.section_counts.count(s) ? sum.section_counts.at(s) : 0;
    tally << s << "=" << got << (got == n ? "" : "!") << " ";
    counts_ok = counts_ok && got == n;
  }
  std::cout << "  section tallies: " << tally.str() << "(claimed 2,4,5,26,88,11)\n";
  std::cout << "  note: the 88 four-dimensional displays carry 82 distinct labels; six\n"
               "  labels cover two displays each (ids disambiguated with .a/.b)\n";
  char d[64];
  std::snprintf(d, sizeof(d), "pass=%d fail=%d inconclusive=%d %.1fs", sum.pass, sum.fail,
                sum.inconclusive, secs);
  report(1, "catalog regression, zero failures, tallies, <= 60 s at 4 jobs",
         zero_failures && counts_ok && secs <= 60.0, d);
}

// --------------------------------------------------------------------------
// 2. bracket algebra suite

void criterion2() {
  rnd::Stream rng(rnd::splitmix64(7) ^ rnd::task_hash("acceptance-bracket"));
  bool anti_ok = true;
  for (int i = 0; i < 200; ++i) {
    GeneratingFunction f = gf(cktest::sample_gf(rng));
    GeneratingFunction g = gf(cktest::sample_gf(rng));
    if (!simplify(bracket(f, g).expr() + bracket(g, f).expr()).is_zero()) anti_ok = false;
  }

  ProbeConfig cfg;
  cfg.samples = 12;
  bool jacobi_ok = true;
  for (int i = 0; i < 100; ++i) {
    GeneratingFunction f = gf(cktest::sample_gf(rng, 2));
    GeneratingFunction g = gf(cktest::sample_gf(rng, 2));
    GeneratingFunction h = gf(cktest::sample_gf(rng, 2));
    Expr j = bracket(f, bracket(g, h)).expr() + bracket(g, bracket(h, f)).expr() +
             bracket(h, bracket(f, g)).expr();
    if (!is_zero(j, cfg, {}, rnd::task_hash("acc-jacobi" + std::to_string(i))).zero_class())
      jacobi_ok = false;
  }

  bool star_ok = true;
  for (int i = 0; i < 100; ++i) {
    GeneratingFunction f = gf(cktest::sample_gf(rng, 2));
    GeneratingFunction g = gf(cktest::sample_gf(rng, 2));
    Expr star = bracket_via_star(f, g);
    if (!is_zero(star - bracket(f, g).expr(), cfg, {},
                 rnd::task_hash("acc-star" + std::to_string(i)))
             .zero_class())
      star_ok = false;
    Expr s = simplify(star);
    if (depends_on(s, JetVar::u_xx) || depends_on(s, JetVar::u_tx) || depends_on(s, JetVar::u_tt))
      star_ok = false;
  }
  report(2, "bracket suite: antisymmetry(200), Jacobi(100), star form(100)",
         anti_ok && jacobi_ok && star_ok);
}

// --------------------------------------------------------------------------
// 3. field correspondence [V_f, V_g] = V_[f,g]

void criterion3() {
  rnd::Stream rng(rnd::splitmix64(7) ^ rnd::task_hash("acceptance-field"));
  ProbeConfig cfg;
  cfg.samples = 12;
  bool ok = true;
  for (int i = 0; i < 50; ++i) {
    GeneratingFunction f = gf(cktest::sample_gf(rng, 2));
    GeneratingFunction g = gf(cktest::sample_gf(rng, 2));
    ContactField lhs = field_commutator(f, g);
    ContactField rhs = vector_field(bracket(f, g));
    auto lc = lhs.coeffs();
    auto rc = rhs.coeffs();
    for (size_t k = 0; k < 5; ++k)
      if (!is_zero(lc[k] - rc[k], cfg, {},
                   rnd::task_hash("acc-fc" + std::to_string(i * 5 + k)))
               .zero_class())
        ok = false;
  }
  report(3, "field correspondence [V_f,V_g] = V_[f,g] (50 pairs, componentwise)", ok);
}

// --------------------------------------------------------------------------
// 4. classifying-equation consistency + mutation control

void criterion4() {
  ProbeConfig cfg;
  cfg.samples = 50;
  ZeroVerdict ok = classifying_equation_consistency(cfg);
  ZeroVerdict mut = classifying_equation_consistency(cfg, true);
  report(4, "classifying equation == invariance residual (50 samples) + mutation caught",
         ok.zero_class() && mut.kind == Verdict::ProvenNonzero,
         std::string(verdict_name(ok.kind)) + " / " + verdict_name(mut.kind));
}

// --------------------------------------------------------------------------
// 5. transformation fixtures

void criterion5() {
  ProbeConfig cfg;
  Expr t = var(JetVar::t), x = var(JetVar::x), u = var(JetVar::u), ux = var(JetVar::u_x);
  bool ok = true;

  ContactTransformation legendre(t, ux, u - x * ux);
  ok = ok && check_contact_condition(legendre, cfg).kind == Verdict::ProvenZero;
  ok = ok && equal(transform_generating_function(legendre, gf(x)).expr(), ux);

  ContactTransformation ex2(t, num(2) * x * sqrt(ux), u + x * ux);
  ok = ok && check_contact_condition(ex2, cfg).kind == Verdict::ProvenZero;
  ok = ok && equal(transform_generating_function(ex2, gf(ux * ux)).expr(), ux);

  ContactTransformation id = ContactTransformation::identity();
  SymbolContext ctx;
  ctx.declare("alpha", 1);
  ctx.declare("G", 4);
  Expr g = parse("alpha(t)*u_t + G(t,x,u,u_x)", ctx);
  ok = ok && proven_zero_symbolic(transform_generating_function(id, gf(g)).expr() - g);
  ctx.declare("F", 5);
  Expr F = parse("F(t,x,u,u_x,u_xx)", ctx);
  ok = ok && proven_zero_symbolic(transform_equation(id, F) - F);

  report(5, "transformation fixtures: Legendre, Example 2, identity fixed point", ok);
}

// --------------------------------------------------------------------------
// 6. structure tables

void criterion6() {
  ProbeConfig cfg;
  cfg.samples = 12;
  bool ok = true;
  std::string bad_table;
  for (const auto& [name, sc] : table_registry()) {
    JacobiReport rep = jacobi_check(sc, cfg);
    for (const auto& tr : rep.triples)
      if (tr.verdict.kind != Verdict::ProvenZero) {
        ok = false;
        bad_table = name;
      }
  }
  // negative control: corrupt sl(2,R) so the Jacobi identity genuinely fails
  // (adding c_12^1 to the two-dimensional A2.2 cannot fail: no triples exist)
  StructureConstants bad = builtin_table("sl2R");
  bad.name = "sl2R-corrupt";
  bad.c[0][1][0] = num(0);
  bad.c[1][0][0] = num(0);
  bad.c[0][1][2] = num(1);
  bad.c[1][0][2] = num(-1);
  bool control = !jacobi_check(bad, cfg).pass;
  report(6, "all builtin tables pass Jacobi symbolically; corrupted control fails",
         ok && control, bad_table.empty() ? "" : "failed: " + bad_table);
}

// --------------------------------------------------------------------------
// 7. negative controls

void criterion7(const std::vector<CatalogEntry>& entries) {
  ProbeConfig cfg;
  Expr heat = var(JetVar::u_xx);
  InvarianceReport a = check_invariance(heat, gf(parse("u^2")), cfg, {}, rnd::task_hash("neg-a"));
  InvarianceReport b =
      check_invariance(heat, gf(parse("u*u_x")), cfg, {}, rnd::task_hash("neg-b"));
  bool heat_ok = a.verdict.kind == Verdict::ProvenNonzero && a.verdict.witness.has_value() &&
                 b.verdict.kind == Verdict::ProvenNonzero && b.verdict.witness.has_value();

  // corrupt one catalog entry (drop the e^-t factor of A_3.5^2); exactly that
  // entry must fail, its section siblings must keep passing
  bool corrupt_ok = true;
  for (auto e : entries) {
    if (e.id == "A_3.5^2") {
      SymbolContext ctx = e.symbols;
      e.rhs = parse("F(u_x, exp(-t)*u_xx)", ctx);
      corrupt_ok = corrupt_ok && verify_entry(e, cfg).failed;
    } else if (e.id == "A_3.5^1" || e.id == "A_3.5^3") {
      corrupt_ok = corrupt_ok && verify_entry(e, cfg).pass;
    }
  }
  report(7, "negative controls: heat non-symmetries with witnesses; corrupted entry fails",
         heat_ok && corrupt_ok);
}

// --------------------------------------------------------------------------
// 8. determinism

void criterion8(const std::vector<CatalogEntry>& entries, const Summary& first_run) {
  ProbeConfig cfg;  // seed 7 again
  Summary again = verify_all(entries, cfg, 4);
  bool identical = records_output(first_run) == records_output(again);

  ProbeConfig other = cfg;
  other.seed = 8675309;
  Summary different = verify_all(entries, other, 4);
  bool same_class = different.reports.size() == first_run.reports.size();
  for (size_t i = 0; same_class && i < first_run.reports.size(); ++i)
    same_class = first_run.reports[i].failed == different.reports[i].failed &&
                 first_run.reports[i].inconclusive == different.reports[i].inconclusive;

  report(8, "same seed -> byte-identical records; different seed -> same classification",
         identical && same_class);
}

}  // namespace

int main() {
  std::cout << "contactkit acceptance suite (seed 7, 32 samples, tol 1e-8)\n";
  auto entries = load_catalog(CONTACTKIT_CATALOG);
  std::cout << "catalog: " << entries.size() << " entries\n";

  Summary first_run;
  criterion1(entries, first_run);
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7(entries);
  criterion8(entries, first_run);

  std::cout << (failures == 0 ? "all criteria passed\n"
                              : std::to_string(failures) + " criteria failed\n");
  return failures == 0 ? 0 : 1;
}
