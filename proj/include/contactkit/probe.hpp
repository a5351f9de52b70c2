#pragma once

// Randomized zero testing.  An identity in opaque symbols holds for arbitrary
// smooth functions iff it holds for random polynomial instantiations at random
// points (Schwartz-Zippel style confidence); exact rational evaluation is used
// whenever the instantiated expression is rational.

#include <cstdint>
#include <functional>

#include "eval.hpp"
#include "parser.hpp"
#include "simplify.hpp"

namespace ck {

struct ProbeConfig {
  std::uint64_t seed = 7;
  int samples = 32;
  int opaque_poly_degree = 4;
  double tol_rel = 1e-8;
  int max_domain_retries = 200;
};

enum class Verdict { ProvenZero, ExactProbeZero, NumericZero, ProvenNonzero, Inconclusive };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::ProvenZero: return "proven-zero";
    case Verdict::ExactProbeZero: return "exact-probe-zero";
    case Verdict::NumericZero: return "numeric-zero";
    case Verdict::ProvenNonzero: return "proven-nonzero";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct Witness {
  std::map<std::string, Rat> assignment;
  std::map<std::string, std::string> instantiation;
  double residual = 0.0;

  std::string text() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, v] : assignment) {
      if (!first) os << ", ";
      os << k << "=" << rat_num(v).str();
      if (!rat_is_int(v)) os << "/" << rat_den(v).str();
      first = false;
    }
    for (const auto& [k, v] : instantiation) {
      if (!first) os << ", ";
      os << k << " := " << v;
      first = false;
    }
    return os.str();
  }
};

struct ZeroVerdict {
  Verdict kind = Verdict::Inconclusive;
  int samples = 0;
  double max_residual = 0.0;
  std::optional<Witness> witness;
  std::string note;

  bool zero_class() const {
    return kind == Verdict::ProvenZero || kind == Verdict::ExactProbeZero ||
           kind == Verdict::NumericZero;
  }
};

// range constraint lo < expr < hi (expression over parameters)
struct RangeConstraint {
  Expr expr;
  Rat lo;
  Rat hi;
};

struct ProbeContext {
  SymbolContext symbols;
  std::vector<Expr> nonzero;          // expressions required != 0 at samples
  std::vector<RangeConstraint> ranges;
  // Normalization merges kernel powers, so a normal form can be evaluable at
  // points outside the original expression's domain (where it no longer
  // represents the same function).  Samples are accepted only where every
  // guard expression evaluates.
  std::vector<Expr> domain_guards;

  void add_symbol_constraints() {
    for (const auto& [name, sym] : symbols.opaques)
      for (const auto& c : sym.constraints) nonzero.push_back(c);
  }
};

namespace rnd {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

struct Stream {
  std::uint64_t state;
  explicit Stream(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ull;
    return splitmix64(state);
  }
  // uniform in [0, n)
  std::uint64_t below(std::uint64_t n) { return next() % n; }
  long range(long lo, long hi) {  // inclusive
    return lo + static_cast<long>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }
};

inline std::uint64_t task_hash(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// rational strictly inside (lo, hi)
inline Rat draw_rat(Stream& rng, const Rat& lo, const Rat& hi) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    long d = rng.range(3, 12);
    Rat lod = lo * d, hid = hi * d;
    BigInt nlo = rat_num(lod) / rat_den(lod) + 1;  // floor+1 toward interior
    if (lod < 0 && !rat_is_int(lod)) nlo -= 1;
    BigInt nhi = rat_num(hid) / rat_den(hid);
    if (hid < 0 && !rat_is_int(hid)) nhi -= 1;
    if (hid > 0 && rat_is_int(hid)) nhi -= 1;
    if (nhi < nlo) continue;
    BigInt span = nhi - nlo + 1;
    BigInt pick = nlo + BigInt(rng.below(span.convert_to<std::uint64_t>()));
    Rat v = Rat(pick) / d;
    if (v > lo && v < hi) return v;
  }
  return (lo + hi) / 2;
}

inline Rat draw_nonzero(Stream& rng, const Rat& lo, const Rat& hi) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    Rat v = draw_rat(rng, lo, hi);
    if (v != 0) return v;
  }
  return Rat(1);
}

inline PolyInstance draw_poly(Stream& rng, int arity, int degree) {
  PolyInstance p;
  p.arity = arity;
  std::vector<int> e(arity, 0);
  // enumerate all exponent tuples with total degree <= degree
  std::function<void(int, int)> rec = [&](int idx, int remaining) {
    if (idx == arity) {
      Rat c(rng.range(-6, 6));
      if (c == 0) c = Rat(rng.range(1, 5));
      c /= rng.range(1, 3);
      p.terms.emplace_back(e, c);
      return;
    }
    for (int k = 0; k <= remaining; ++k) {
      e[idx] = k;
      rec(idx + 1, remaining - k);
    }
    e[idx] = 0;
  };
  rec(0, degree);
  return p;
}

}  // namespace rnd

namespace detail_probe {

inline void collect_symbols(const Expr& e, std::set<std::string>& vars,
                            std::set<std::string>& params,
                            std::map<std::string, int>& opaques) {
  visit(e, [&](const Expr& n) {
    if (n.is(NodeKind::Var)) vars.insert(n.name());
    else if (n.is(NodeKind::Param)) params.insert(n.name());
    else if (n.is(NodeKind::Opaque)) opaques[n.name()] = static_cast<int>(n.kids().size());
  });
}

}  // namespace detail_probe

inline ZeroVerdict is_zero(const Expr& e, const ProbeConfig& cfg, const ProbeContext& ctx,
                           std::uint64_t task_id = 0) {
  ZeroVerdict out;
  if (proven_zero_symbolic(e)) {
    out.kind = Verdict::ProvenZero;
    return out;
  }
  Expr se = simplify(e, RewriteMode::ZeroTest);
  if (se.is_zero()) {  // paranoid: simplify found zero but to_rf path did not
    out.kind = Verdict::ProvenZero;
    return out;
  }

  std::set<std::string> vars, params;
  std::map<std::string, int> opaques;
  detail_probe::collect_symbols(se, vars, params, opaques);
  for (const auto& c : ctx.nonzero) detail_probe::collect_symbols(c, vars, params, opaques);
  for (const auto& rc : ctx.ranges) detail_probe::collect_symbols(rc.expr, vars, params, opaques);
  for (const auto& dg : ctx.domain_guards) detail_probe::collect_symbols(dg, vars, params, opaques);
  for (auto& [name, arity] : opaques) {
    if (const OpaqueSymbol* s = ctx.symbols.find(name)) arity = std::max(arity, s->arity);
  }

  bool exact = exactly_evaluable(se);
  for (const auto& c : ctx.nonzero) exact = exact && exactly_evaluable(c);

  // Top-level additive terms define the residual scale.  Canonical forms are
  // often Product(sum, den^-1, ...); distribute over the sum factor so the
  // scale reflects the magnitudes that actually cancel.
  std::vector<Expr> terms;
  if (se.is(NodeKind::Sum)) {
    terms = se.kids();
  } else if (se.is(NodeKind::Product)) {
    const Expr* sum_kid = nullptr;
    int sums = 0;
    for (const auto& k : se.kids())
      if (k.is(NodeKind::Sum)) {
        ++sums;
        sum_kid = &k;
      }
    if (sums == 1) {
      std::vector<Expr> cof;
      for (const auto& k : se.kids())
        if (&k != sum_kid) cof.push_back(k);
      for (const auto& t : sum_kid->kids()) {
        std::vector<Expr> fs = cof;
        fs.push_back(t);
        terms.push_back(make_prod(std::move(fs)));
      }
    }
  }
  if (terms.empty()) terms.push_back(se);

  rnd::Stream rng(rnd::splitmix64(cfg.seed) ^ task_id);
  int accepted = 0;
  bool ambiguous = false;
  double max_rel = 0.0;

  for (int s = 0; s < cfg.samples; ++s) {
    bool sample_done = false;
    for (int attempt = 0; attempt < cfg.max_domain_retries && !sample_done; ++attempt) {
      // instantiate opaques
      std::map<std::string, PolyInstance> fns;
      for (const auto& [name, arity] : opaques)
        fns[name] = rnd::draw_poly(rng, arity, cfg.opaque_poly_degree);
      // sample parameters within ranges, then variables
      EvalEnv env;
      env.fns = &fns;
      bool ok = true;
      for (const auto& p : params) {
        // a range constraint on the bare parameter shapes its sampling window
        Rat lo(-3), hi(3);
        for (const auto& rc : ctx.ranges)
          if (rc.expr.is(NodeKind::Param) && rc.expr.name() == p) {
            lo = std::max(lo, rc.lo);
            hi = std::min(hi, rc.hi);
          }
        if (!(lo < hi)) { ok = false; break; }
        env.values[p] = rnd::draw_rat(rng, lo, hi);
      }
      if (!ok) continue;
      for (const auto& v : vars) env.values[v] = rnd::draw_nonzero(rng, Rat(-3), Rat(3));
      // compound range constraints reject by evaluation
      for (const auto& rc : ctx.ranges) {
        if (rc.expr.is(NodeKind::Param)) continue;
        try {
          Rat val = eval_exact(rc.expr, env);
          if (!(val > rc.lo && val < rc.hi)) ok = false;
        } catch (const std::exception&) {
          ok = false;
        }
        if (!ok) break;
      }
      if (!ok) continue;
      // domain guards: the sample must lie in the original expression's domain
      for (const auto& dg : ctx.domain_guards) {
        try {
          (void)eval_double(dg, env);
        } catch (const DomainError&) {
          ok = false;
        }
        if (!ok) break;
      }
      if (!ok) continue;
      // nonzero constraints
      for (const auto& c : ctx.nonzero) {
        try {
          if (exactly_evaluable(c)) {
            if (eval_exact(c, env) == 0) ok = false;
          } else {
            if (std::abs(eval_double(c, env)) < 1e-7) ok = false;
          }
        } catch (const DomainError&) {
          ok = false;
        }
        if (!ok) break;
      }
      if (!ok) continue;

      try {
        if (exact) {
          Rat val = eval_exact(se, env);
          if (val != 0) {
            out.kind = Verdict::ProvenNonzero;
            Witness w;
            w.assignment = env.values;
            for (const auto& [n, f] : fns) w.instantiation[n] = f.text();
            w.residual = val.convert_to<double>();
            out.witness = std::move(w);
            out.samples = accepted + 1;
            return out;
          }
          sample_done = true;
          ++accepted;
        } else {
          double scale = 0.0, total = 0.0;
          for (const auto& t : terms) {
            double v = eval_double(t, env);
            scale = std::max(scale, std::abs(v));
            total += v;
          }
          if (!std::isfinite(total)) throw DomainError("non-finite value");
          double threshold = cfg.tol_rel * std::max(scale, 1.0);
          double r = std::abs(total);
          if (r <= threshold) {
            max_rel = std::max(max_rel, r / std::max(scale, 1.0));
            sample_done = true;
            ++accepted;
          } else if (r > 1e3 * threshold) {
            out.kind = Verdict::ProvenNonzero;
            Witness w;
            w.assignment = env.values;
            for (const auto& [n, f] : fns) w.instantiation[n] = f.text();
            w.residual = total;
            out.witness = std::move(w);
            out.samples = accepted + 1;
            return out;
          } else {
            ambiguous = true;
            sample_done = true;  // counted, but blocks a zero verdict
            ++accepted;
          }
        }
      } catch (const DomainError&) {
        // resample
      }
    }
    if (!sample_done) {
      out.kind = Verdict::Inconclusive;
      out.samples = accepted;
      out.note = "domain sampling exhausted";
      return out;
    }
  }

  if (ambiguous) {
    out.kind = Verdict::Inconclusive;
    out.samples = accepted;
    out.max_residual = max_rel;
    out.note = "residual between zero and nonzero thresholds";
    return out;
  }
  out.kind = exact ? Verdict::ExactProbeZero : Verdict::NumericZero;
  out.samples = accepted;
  out.max_residual = max_rel;
  return out;
}

inline ZeroVerdict is_zero(const Expr& e, const ProbeConfig& cfg) {
  ProbeContext ctx;
  return is_zero(e, cfg, ctx, 0);
}

}  // namespace ck
