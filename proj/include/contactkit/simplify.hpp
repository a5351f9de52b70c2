#pragma once

// Rational-function normalization over kernels.
//
// An expression is flattened into a numerator polynomial over a factored
// denominator.  Kernels are variables, parameters, elementary applications,
// opaque applications, and powers with non-integer or symbolic exponents.
// exp is folded into a single pseudo-kernel so exp(a)*exp(b) merges to
// exp(a+b).  Rewrites applied during normalization:
//   cos(a)^2 -> 1 - sin(a)^2   (hence sin^2 + cos^2 -> 1)
//   ln(exp(a)) -> a
//   sign normalization of odd/even elementary kernels
// In zero-test mode additionally tan(a) -> sin(a)/cos(a), sec(a) -> 1/cos(a).
//
// Denominators stay factored as built, so cancellation is exact trial
// division of the numerator by each factor; monomial (Laurent) content is
// tracked inside numerator slots.  Fractional powers distribute over
// products; bases are kept positive by domain sampling elsewhere.

#include <cassert>
#include <numeric>
#include <unordered_map>

#include "diff.hpp"
#include "expr.hpp"

namespace ck {

enum class RewriteMode { Standard, ZeroTest };

Expr simplify(const Expr& e);
Expr simplify(const Expr& e, RewriteMode mode);

namespace nf {

struct TooLarge : std::runtime_error {
  TooLarge() : std::runtime_error("expression too large to normalize") {}
};

inline const Expr& exp_marker() {
  static Expr m = param("%exp");
  return m;
}

struct Factor {
  Expr base;
  Expr expo;
};

inline int compare(const Factor& a, const Factor& b) {
  if (int c = ck::compare(a.base, b.base)) return c;
  return ck::compare(a.expo, b.expo);
}

struct Mono {
  std::vector<Factor> fs;  // sorted by base; bases unique; expo never 0
};

inline int compare(const Mono& a, const Mono& b) {
  size_t n = std::min(a.fs.size(), b.fs.size());
  for (size_t i = 0; i < n; ++i)
    if (int c = compare(a.fs[i], b.fs[i])) return c;
  return a.fs.size() < b.fs.size() ? -1 : a.fs.size() > b.fs.size() ? 1 : 0;
}

struct MonoLess {
  bool operator()(const Mono& a, const Mono& b) const { return compare(a, b) < 0; }
};

struct Poly {
  std::map<Mono, Rat, MonoLess> t;

  bool zero() const { return t.empty(); }
  bool is_const() const { return t.empty() || (t.size() == 1 && t.begin()->first.fs.empty()); }
  Rat const_value() const {
    if (t.empty()) return Rat(0);
    return t.begin()->second;
  }
};

inline Poly poly_const(const Rat& c) {
  Poly p;
  if (c != 0) p.t[Mono{}] = c;
  return p;
}

inline Poly poly_one() { return poly_const(Rat(1)); }

inline void poly_add_term(Poly& p, const Mono& m, const Rat& c) {
  if (c == 0) return;
  auto it = p.t.find(m);
  if (it == p.t.end()) {
    p.t.emplace(m, c);
  } else {
    it->second += c;
    if (it->second == 0) p.t.erase(it);
  }
}

inline Poly poly_add(const Poly& a, const Poly& b) {
  Poly r = a;
  for (const auto& [m, c] : b.t) poly_add_term(r, m, c);
  return r;
}

inline Poly poly_scale(const Poly& a, const Rat& s) {
  if (s == 0) return Poly{};
  Poly r = a;
  for (auto& [m, c] : r.t) c *= s;
  return r;
}

inline int poly_compare(const Poly& a, const Poly& b) {
  auto i = a.t.begin();
  auto j = b.t.begin();
  for (; i != a.t.end() && j != b.t.end(); ++i, ++j) {
    if (int c = compare(i->first, j->first)) return c;
    if (i->second != j->second) return i->second < j->second ? -1 : 1;
  }
  if (i != a.t.end()) return 1;
  if (j != b.t.end()) return -1;
  return 0;
}

inline bool poly_equal(const Poly& a, const Poly& b) { return poly_compare(a, b) == 0; }

constexpr size_t kPolyTermLimit = 60000;

// ---------------------------------------------------------------------------
// Monomial multiplication with rewrite-aware absorption.
//
// Multiplying monomials adds exponents of equal bases.  The result may need
// expansion: a sum-base kernel whose exponent became a positive integer is
// expanded into the polynomial ring; cos(a)^n with n >= 2 reduces modulo
// cos^2 = 1 - sin^2.  term_mul therefore returns a small polynomial.

Poly poly_mul(const Poly& a, const Poly& b);
Poly poly_pow(const Poly& a, long n);
Expr norm_exponent(const Expr& e);

inline bool is_int(const Expr& e, long& out) {
  if (!e.is_num() || !rat_is_int(e.num())) return false;
  BigInt n = rat_num(e.num());
  if (n > 1000000 || n < -1000000) return false;
  out = static_cast<long>(n);
  return true;
}

inline Poly term_to_poly(const Rat& coeff, std::vector<Factor> fs);

inline Poly term_mul(const Mono& a, const Rat& ca, const Mono& b, const Rat& cb) {
  Rat c = ca * cb;
  std::vector<Factor> fs;
  fs.reserve(a.fs.size() + b.fs.size());
  size_t i = 0, j = 0;
  while (i < a.fs.size() || j < b.fs.size()) {
    if (j >= b.fs.size() || (i < a.fs.size() && ck::compare(a.fs[i].base, b.fs[j].base) < 0)) {
      fs.push_back(a.fs[i++]);
    } else if (i >= a.fs.size() || ck::compare(a.fs[i].base, b.fs[j].base) > 0) {
      fs.push_back(b.fs[j++]);
    } else {
      Expr expo = norm_exponent(make_sum({a.fs[i].expo, b.fs[j].expo}));
      if (!expo.is_zero()) fs.push_back(Factor{a.fs[i].base, expo});
      ++i;
      ++j;
    }
  }
  return term_to_poly(c, std::move(fs));
}

// distribute a monomial (as factor list) into canonical polynomial form,
// expanding integer powers of sum bases and reducing cos powers
inline Poly term_to_poly(const Rat& coeff, std::vector<Factor> fs) {
  std::vector<Factor> plain;
  std::vector<std::pair<Poly, long>> expansions;  // (poly, positive power)
  for (auto& f : fs) {
    long n = 0;
    bool intexp = is_int(f.expo, n);
    bool is_cos = f.base.is(NodeKind::Elem) && f.base.node().elem == ElemKind::Cos;
    if (intexp && is_cos && n >= 2) {
      // cos^n = (1 - sin^2)^(n/2) * cos^(n mod 2)
      Expr s = make_elem(ElemKind::Sin, f.base.kids()[0]);
      Poly reduce;
      poly_add_term(reduce, Mono{}, Rat(1));
      poly_add_term(reduce, Mono{{Factor{s, num(2)}}}, Rat(-1));
      expansions.emplace_back(reduce, n / 2);
      if (n % 2) plain.push_back(Factor{f.base, num(1)});
      continue;
    }
    if (intexp && n > 0 && f.base.is(NodeKind::Sum)) {
      // sum-base kernel whose exponent became a positive integer: expand.
      // The base is canonical (a sum of coefficient*product-of-powers terms),
      // so a structural conversion suffices.
      Poly bp;
      for (const auto& tterm : f.base.kids()) {
        auto [tc, tcore] = detail::coeff_split(tterm);
        std::vector<Factor> tfs;
        if (!tcore.is_one()) {
          const auto& parts =
              tcore.is(NodeKind::Product) ? tcore.kids() : std::vector<Expr>{tcore};
          for (const auto& part : parts) {
            auto [pb, pe] = detail::pow_split(part);
            tfs.push_back(Factor{pb, pe});
          }
        }
        std::sort(tfs.begin(), tfs.end(),
                  [](const Factor& x, const Factor& y) { return compare(x, y) < 0; });
        bp = poly_add(bp, term_to_poly(tc, std::move(tfs)));
      }
      expansions.emplace_back(std::move(bp), n);
      continue;
    }
    plain.push_back(f);
  }
  Poly r;
  Mono m{std::move(plain)};
  poly_add_term(r, m, coeff);
  for (auto& [bp, n] : expansions) r = poly_mul(r, poly_pow(bp, n));
  return r;
}

inline Poly poly_mul(const Poly& a, const Poly& b) {
  Poly r;
  for (const auto& [ma, ca] : a.t)
    for (const auto& [mb, cb] : b.t) {
      Poly part = term_mul(ma, ca, mb, cb);
      for (const auto& [m, c] : part.t) poly_add_term(r, m, c);
      if (r.t.size() > kPolyTermLimit) throw TooLarge{};
    }
  return r;
}

inline Poly poly_pow(const Poly& a, long n) {
  if (n < 0) throw std::runtime_error("poly_pow: negative exponent");
  Poly r = poly_one();
  Poly base = a;
  while (n > 0) {
    if (n & 1) r = poly_mul(r, base);
    n >>= 1;
    if (n) base = poly_mul(base, base);
  }
  return r;
}

inline Mono mono_invert(const Mono& m) {
  Mono r;
  r.fs.reserve(m.fs.size());
  for (const auto& f : m.fs)
    r.fs.push_back(Factor{f.base, norm_exponent(make_prod({num(-1), f.expo}))});
  return r;
}

inline Poly poly_mul_mono(const Poly& p, const Mono& m, const Rat& c) {
  Poly r;
  for (const auto& [pm, pc] : p.t) {
    Poly part = term_mul(pm, pc, m, c);
    for (const auto& [m2, c2] : part.t) poly_add_term(r, m2, c2);
  }
  return r;
}

// Monomial content of a polynomial.  For a base whose exponents are all
// numeric, the content exponent is the minimum over terms (absent = 0), so
// extraction both pulls out classic content and clears negative (Laurent)
// exponents.  A base carried by every term with one identical symbolic
// exponent is extracted verbatim; mixed symbolic exponents are left alone.
inline Mono poly_content_mono(const Poly& p) {
  Mono content;
  if (p.t.empty()) return content;
  std::map<Expr, std::vector<Expr>, ExprLess> seen;  // base -> expo per occurrence
  size_t nterms = p.t.size();
  for (const auto& [m, c] : p.t)
    for (const auto& f : m.fs) seen[f.base].push_back(f.expo);
  for (auto& [base, expos] : seen) {
    bool everywhere = expos.size() == nterms;
    bool all_num = true;
    for (const auto& e : expos) all_num = all_num && e.is_num();
    if (all_num) {
      Rat mn = expos[0].num();
      for (const auto& e : expos) mn = std::min(mn, e.num());
      if (!everywhere) mn = std::min(mn, Rat(0));
      if (mn != 0) content.fs.push_back(Factor{base, num(mn)});
    } else if (everywhere) {
      bool all_same = true;
      for (const auto& e : expos) all_same = all_same && equal(e, expos[0]);
      if (all_same) content.fs.push_back(Factor{base, expos[0]});
    }
  }
  return content;
}

// ---------------------------------------------------------------------------
// Exact trial division (numerator by a denominator factor).  Works on an
// integer-exponent projection: every (base, exponent-class) pair becomes a
// variable; fractional exponents are scaled by the lcm of their denominators.

struct GMono {
  std::vector<int> e;
  bool operator==(const GMono& o) const { return e == o.e; }
};
struct GLexGreater {
  bool operator()(const GMono& a, const GMono& b) const {
    return std::lexicographical_compare(b.e.begin(), b.e.end(), a.e.begin(), a.e.end());
  }
};
struct GPoly {
  std::map<GMono, Rat, GLexGreater> t;  // leading term first
  bool zero() const { return t.empty(); }
};

inline GPoly g_add(const GPoly& a, const GPoly& b) {
  GPoly r = a;
  for (const auto& [m, c] : b.t) {
    auto it = r.t.find(m);
    if (it == r.t.end()) r.t.emplace(m, c);
    else {
      it->second += c;
      if (it->second == 0) r.t.erase(it);
    }
  }
  return r;
}

inline GPoly g_scale(const GPoly& a, const Rat& s) {
  GPoly r;
  if (s == 0) return r;
  r = a;
  for (auto& [m, c] : r.t) c *= s;
  return r;
}

inline GPoly g_mul(const GPoly& a, const GPoly& b) {
  GPoly r;
  for (const auto& [ma, ca] : a.t)
    for (const auto& [mb, cb] : b.t) {
      GMono m;
      m.e.resize(ma.e.size());
      for (size_t i = 0; i < m.e.size(); ++i) m.e[i] = ma.e[i] + mb.e[i];
      auto it = r.t.find(m);
      Rat c = ca * cb;
      if (it == r.t.end()) r.t.emplace(std::move(m), c);
      else {
        it->second += c;
        if (it->second == 0) r.t.erase(it);
      }
    }
  return r;
}

// exact division; returns false if not divisible
inline bool g_divexact(const GPoly& a, const GPoly& b, GPoly& q) {
  if (b.zero()) return false;
  GPoly rem = a;
  q = GPoly{};
  const auto& [lbm, lbc] = *b.t.begin();
  size_t guard = 0;
  while (!rem.zero()) {
    const auto& [lam, lac] = *rem.t.begin();
    GMono qm;
    qm.e.resize(lam.e.size());
    for (size_t i = 0; i < qm.e.size(); ++i) {
      qm.e[i] = lam.e[i] - lbm.e[i];
      if (qm.e[i] < 0) return false;
    }
    Rat qc = lac / lbc;
    GPoly qt;
    qt.t.emplace(qm, qc);
    q = g_add(q, qt);
    rem = g_add(rem, g_scale(g_mul(qt, b), Rat(-1)));
    if (++guard > kPolyTermLimit) return false;
  }
  return true;
}

// Bridge Poly <-> GPoly.  Bases whose exponents are all numeric are scaled by
// the lcm of the exponent denominators; a factor with a symbolic exponent
// becomes its own variable (it can only cancel verbatim).
struct GcdBridge {
  std::vector<std::pair<Expr, long>> scaled;  // (base, denominator scale)
  std::vector<Factor> passengers;             // symbolic-exponent factors
  bool ok = true;

  static long lcm_l(long a, long b) { return a / std::gcd(a, b) * b; }

  void scan(const Poly& p) {
    for (const auto& [m, c] : p.t)
      for (const auto& f : m.fs) {
        if (f.expo.is_num()) {
          BigInt d = rat_den(f.expo.num());
          if (d > 12) { ok = false; return; }
          long dl = static_cast<long>(d);
          bool found = false;
          for (auto& [b, s] : scaled)
            if (equal(b, f.base)) { s = lcm_l(s, dl); found = true; }
          if (!found) scaled.emplace_back(f.base, dl);
        } else {
          bool found = false;
          for (auto& pf : passengers)
            if (equal(pf.base, f.base) && equal(pf.expo, f.expo)) found = true;
          if (!found) passengers.push_back(Factor{f.base, f.expo});
        }
      }
  }

  size_t nvars() const { return scaled.size() + passengers.size(); }

  bool to_gpoly(const Poly& p, GPoly& out) const {
    out = GPoly{};
    for (const auto& [m, c] : p.t) {
      GMono gm;
      gm.e.assign(nvars(), 0);
      for (const auto& f : m.fs) {
        bool placed = false;
        for (size_t i = 0; i < scaled.size(); ++i)
          if (f.expo.is_num() && equal(scaled[i].first, f.base)) {
            Rat scaled_e = f.expo.num() * scaled[i].second;
            if (!rat_is_int(scaled_e)) return false;
            BigInt ei = rat_num(scaled_e);
            if (ei < 0 || ei > 4000) return false;
            gm.e[i] = static_cast<int>(ei);
            placed = true;
            break;
          }
        if (!placed) {
          for (size_t i = 0; i < passengers.size(); ++i)
            if (equal(passengers[i].base, f.base) && equal(passengers[i].expo, f.expo)) {
              gm.e[scaled.size() + i] = 1;
              placed = true;
              break;
            }
        }
        if (!placed) return false;
      }
      auto it = out.t.find(gm);
      if (it == out.t.end()) out.t.emplace(std::move(gm), c);
      else {
        it->second += c;
        if (it->second == 0) out.t.erase(it);
      }
    }
    return true;
  }

  Poly from_gpoly(const GPoly& g) const {
    Poly p;
    for (const auto& [gm, c] : g.t) {
      std::vector<Factor> fs;
      for (size_t i = 0; i < scaled.size(); ++i)
        if (gm.e[i] != 0)
          fs.push_back(Factor{scaled[i].first, num(Rat(gm.e[i]) / scaled[i].second)});
      for (size_t i = 0; i < passengers.size(); ++i)
        if (gm.e[scaled.size() + i] != 0) fs.push_back(passengers[i]);
      std::sort(fs.begin(), fs.end(),
                [](const Factor& a, const Factor& b) { return compare(a, b) < 0; });
      Poly part = term_to_poly(c, std::move(fs));
      p = poly_add(p, part);
    }
    return p;
  }
};

// divide a (content-stripped) numerator by a denominator factor, exactly
inline bool poly_trial_divide(const Poly& numer, const Poly& factor, Poly& quotient) {
  GcdBridge bridge;
  bridge.scan(numer);
  bridge.scan(factor);
  if (!bridge.ok || bridge.nvars() == 0 || bridge.nvars() > 40) return false;
  GPoly gn, gf, gq;
  if (!bridge.to_gpoly(numer, gn) || !bridge.to_gpoly(factor, gf)) return false;
  if (!g_divexact(gn, gf, gq)) return false;
  quotient = bridge.from_gpoly(gq);
  return true;
}

// ---------------------------------------------------------------------------
// Rational functions with factored denominators

struct DenFactor {
  Poly p;   // monic-leading, content-free, at least two terms
  int mult;
};

struct RF {
  Poly num;
  std::vector<DenFactor> den;  // sorted by poly_compare
};

inline RF rf_const(const Rat& c) { return RF{poly_const(c), {}}; }

inline void rf_push_factor(RF& r, Poly f, int mult);

// multiply the numerator by a (possibly non-normalized) denominator factor^-mult
inline void rf_apply_den(RF& r, Poly f, int mult) {
  if (f.zero()) throw std::runtime_error("division by zero in normalization");
  // extract rational + monomial content, fold into the numerator
  if (f.is_const()) {
    Rat c = f.const_value();
    if (c != 1) r.num = poly_scale(r.num, detail::rat_pow_int(Rat(1) / c, mult));
    return;
  }
  Mono content = poly_content_mono(f);
  Rat lead(0);
  if (!content.fs.empty()) f = poly_mul_mono(f, mono_invert(content), Rat(1));
  lead = f.t.rbegin()->second;  // leading (largest) coefficient -> 1
  if (lead != 1) f = poly_scale(f, Rat(1) / lead);
  // numerator picks up content^-mult and lead^-mult
  Rat scale = detail::rat_pow_int(Rat(1) / lead, mult);
  if (!content.fs.empty()) {
    Mono inv = mono_invert(content);
    for (int i = 0; i < mult; ++i) r.num = poly_mul_mono(r.num, inv, Rat(1));
  }
  if (scale != 1) r.num = poly_scale(r.num, scale);
  if (f.is_const()) return;  // factor collapsed to 1
  if (f.t.size() == 1) {
    // single monomial: fold straight into the numerator
    Mono m = f.t.begin()->first;
    Rat c = f.t.begin()->second;
    Mono inv = mono_invert(m);
    for (int i = 0; i < mult; ++i) r.num = poly_mul_mono(r.num, inv, Rat(1) / c);
    return;
  }
  rf_push_factor(r, std::move(f), mult);
}

inline void rf_push_factor(RF& r, Poly f, int mult) {
  for (auto& df : r.den)
    if (poly_equal(df.p, f)) {
      df.mult += mult;
      return;
    }
  DenFactor df{std::move(f), mult};
  auto pos = std::lower_bound(r.den.begin(), r.den.end(), df,
                              [](const DenFactor& a, const DenFactor& b) {
                                return poly_compare(a.p, b.p) < 0;
                              });
  r.den.insert(pos, std::move(df));
}

inline RF rf_mul(const RF& a, const RF& b) {
  RF r;
  r.num = poly_mul(a.num, b.num);
  r.den = a.den;
  for (const auto& df : b.den) rf_push_factor(r, df.p, df.mult);
  return r;
}

inline RF rf_add(const RF& a, const RF& b) {
  RF r;
  // union denominator
  r.den = a.den;
  for (const auto& df : b.den) {
    bool found = false;
    for (auto& rf_ : r.den)
      if (poly_equal(rf_.p, df.p)) {
        rf_.mult = std::max(rf_.mult, df.mult);
        found = true;
      }
    if (!found) rf_push_factor(r, df.p, df.mult);
  }
  auto complement = [&](const RF& x) {
    Poly n = x.num;
    for (const auto& df : r.den) {
      int have = 0;
      for (const auto& xf : x.den)
        if (poly_equal(xf.p, df.p)) have = xf.mult;
      for (int i = have; i < df.mult; ++i) n = poly_mul(n, df.p);
    }
    return n;
  };
  r.num = poly_add(complement(a), complement(b));
  if (r.num.zero()) r.den.clear();
  return r;
}

inline RF rf_pow_int(const RF& a, long n) {
  if (n == 0) return rf_const(Rat(1));
  if (n > 0) {
    RF r;
    r.num = poly_pow(a.num, n);
    r.den = a.den;
    for (auto& df : r.den) df.mult = static_cast<int>(df.mult * n);
    return r;
  }
  // inversion: expand the denominator product into the new numerator
  if (a.num.zero()) throw std::runtime_error("division by zero in normalization");
  RF r;
  r.num = poly_one();
  for (const auto& df : a.den)
    for (int i = 0; i < df.mult; ++i) r.num = poly_mul(r.num, df.p);
  rf_apply_den(r, a.num, 1);
  return rf_pow_int(r, -n);
}

// trial-divide the numerator by denominator factors (exact cancellation)
inline void rf_reduce(RF& r) {
  if (r.num.zero()) {
    r.den.clear();
    return;
  }
  Mono content = poly_content_mono(r.num);
  Poly core = r.num;
  bool stripped = !content.fs.empty();
  if (stripped) core = poly_mul_mono(core, mono_invert(content), Rat(1));
  if (core.zero()) {
    // content extraction re-applied a rewrite (e.g. cos^2) and collapsed it
    r.num = Poly{};
    r.den.clear();
    return;
  }
  if (r.den.empty()) return;
  bool changed = false;
  for (auto& df : r.den) {
    while (df.mult > 0) {
      Poly q;
      if (!poly_trial_divide(core, df.p, q)) break;
      core = std::move(q);
      --df.mult;
      changed = true;
    }
  }
  if (changed) {
    r.num = stripped ? poly_mul_mono(core, content, Rat(1)) : core;
    r.den.erase(std::remove_if(r.den.begin(), r.den.end(),
                               [](const DenFactor& d) { return d.mult == 0; }),
                r.den.end());
  }
}

// ---------------------------------------------------------------------------
// Expr -> RF conversion with rewrites

Expr from_rf(const RF& r);
RF to_rf(const Expr& e, RewriteMode mode);
Expr norm_expr(const Expr& e, RewriteMode mode);

// sign section with canonical_sign(-e) == -canonical_sign(e): for sums, the
// coefficient sign of the largest term core (cores are negation-invariant)
inline int canonical_sign(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Num:
      return e.num() < 0 ? -1 : 1;
    case NodeKind::Product:
      return detail::coeff_split(e).first < 0 ? -1 : 1;
    case NodeKind::Sum: {
      bool have = false;
      Expr best_core;
      Rat best_coeff(1);
      for (const auto& t : e.kids()) {
        auto [c, core] = detail::coeff_split(t);
        if (!have || ck::compare(core, best_core) > 0) {
          best_core = core;
          best_coeff = c;
          have = true;
        }
      }
      return best_coeff < 0 ? -1 : 1;
    }
    default:
      return 1;
  }
}

inline RF rf_kernel(const Expr& k) {
  RF r;
  poly_add_term(r.num, Mono{{Factor{k, num(1)}}}, Rat(1));
  return r;
}

inline RF rf_mono_factor(const Expr& base, const Expr& expo) {
  RF r;
  poly_add_term(r.num, Mono{{Factor{base, expo}}}, Rat(1));
  return r;
}

// decompose base^expo (expo normalized, non-integer) into kernel factors
inline RF rf_kernel_power(const Expr& base, const Expr& expo, RewriteMode mode) {
  if (expo.is_zero()) return rf_const(Rat(1));
  long n = 0;
  if (is_int(expo, n)) return rf_pow_int(to_rf(base, mode), n);
  if (base.is_num()) {
    if (expo.is_num()) {
      if (auto v = detail::rat_pow_exact(base.num(), expo.num())) return rf_const(*v);
    }
    if (base.num() == 1) return rf_const(Rat(1));
  }
  if (base.is(NodeKind::Power))
    return rf_kernel_power(base.kids()[0], norm_exponent(make_prod({base.kids()[1], expo})),
                           mode);
  if (base.is(NodeKind::Product)) {
    auto [c, core] = detail::coeff_split(base);
    if (c > 0) {
      // factors stay positive by domain sampling: distribute
      RF r = rf_const(Rat(1));
      if (c != 1) r = rf_mul(r, rf_kernel_power(num(c), expo, mode));
      const auto& fs = core.is(NodeKind::Product) ? core.kids() : std::vector<Expr>{core};
      for (const auto& f : fs) {
        auto [fb, fe] = detail::pow_split(f);
        r = rf_mul(r, rf_kernel_power(fb, norm_exponent(make_prod({fe, expo})), mode));
      }
      return r;
    }
    // negative coefficient: keep the whole base as one kernel
  }
  if (base.is(NodeKind::Elem) && base.node().elem == ElemKind::Exp) {
    Expr slot = norm_expr(make_prod({base.kids()[0], expo}), mode);
    if (slot.is_zero()) return rf_const(Rat(1));
    return rf_mono_factor(exp_marker(), slot);
  }
  return rf_mono_factor(base, expo);
}

inline RF rf_elem(ElemKind kind, const Expr& raw_arg, RewriteMode mode) {
  Expr a = norm_expr(raw_arg, mode);
  switch (kind) {
    case ElemKind::Exp: {
      if (a.is_zero()) return rf_const(Rat(1));
      return rf_mono_factor(exp_marker(), a);
    }
    case ElemKind::Ln:
      if (a.is(NodeKind::Elem) && a.node().elem == ElemKind::Exp) return to_rf(a.kids()[0], mode);
      if (a.is_one()) return rf_const(Rat(0));
      return rf_kernel(make_elem(ElemKind::Ln, a));
    case ElemKind::Sec: {
      if (canonical_sign(a) < 0) a = norm_expr(make_prod({num(-1), a}), mode);
      if (mode == RewriteMode::ZeroTest)
        return rf_mono_factor(make_elem(ElemKind::Cos, a), num(-1));
      return rf_kernel(make_elem(ElemKind::Sec, a));
    }
    case ElemKind::Tan: {
      int s = canonical_sign(a);
      if (s < 0) a = norm_expr(make_prod({num(-1), a}), mode);
      if (mode == RewriteMode::ZeroTest) {
        std::vector<Factor> fs = {Factor{make_elem(ElemKind::Sin, a), num(1)},
                                  Factor{make_elem(ElemKind::Cos, a), num(-1)}};
        std::sort(fs.begin(), fs.end(),
                  [](const Factor& x, const Factor& y) { return compare(x, y) < 0; });
        RF r;
        poly_add_term(r.num, Mono{std::move(fs)}, Rat(s));
        return r;
      }
      RF r = rf_kernel(make_elem(ElemKind::Tan, a));
      if (s < 0) r.num = poly_scale(r.num, Rat(-1));
      return r;
    }
    case ElemKind::Sin:
    case ElemKind::Arctan:
    case ElemKind::Arctanh: {
      int s = canonical_sign(a);
      if (s < 0) a = norm_expr(make_prod({num(-1), a}), mode);
      RF r = rf_kernel(make_elem(kind, a));
      if (s < 0) r.num = poly_scale(r.num, Rat(-1));
      return r;
    }
    case ElemKind::Cos: {
      if (canonical_sign(a) < 0) a = norm_expr(make_prod({num(-1), a}), mode);
      return rf_kernel(make_elem(ElemKind::Cos, a));
    }
  }
  return rf_kernel(make_elem(kind, a));
}

inline RF to_rf(const Expr& e, RewriteMode mode) {
  switch (e.kind()) {
    case NodeKind::Num:
      return rf_const(e.num());
    case NodeKind::Param:
    case NodeKind::Var:
      return rf_kernel(e);
    case NodeKind::Sum: {
      RF r = rf_const(Rat(0));
      for (const auto& k : e.kids()) r = rf_add(r, to_rf(k, mode));
      return r;
    }
    case NodeKind::Product: {
      RF r = rf_const(Rat(1));
      for (const auto& k : e.kids()) r = rf_mul(r, to_rf(k, mode));
      return r;
    }
    case NodeKind::Power: {
      Expr en = norm_exponent(e.kids()[1]);
      long n = 0;
      if (is_int(en, n)) return rf_pow_int(to_rf(e.kids()[0], mode), n);
      Expr bn = norm_expr(e.kids()[0], mode);
      return rf_kernel_power(bn, en, mode);
    }
    case NodeKind::Elem:
      return rf_elem(e.node().elem, e.kids()[0], mode);
    case NodeKind::Opaque: {
      std::vector<Expr> args;
      args.reserve(e.kids().size());
      for (const auto& a : e.kids()) args.push_back(norm_expr(a, mode));
      return rf_kernel(make_opaque(e.name(), e.node().deriv, std::move(args)));
    }
  }
  return rf_const(Rat(0));
}

inline Expr mono_to_expr(const Mono& m, const Rat& c) {
  std::vector<Expr> fs;
  fs.push_back(num(c));
  for (const auto& f : m.fs) {
    if (equal(f.base, exp_marker())) fs.push_back(make_elem(ElemKind::Exp, f.expo));
    else fs.push_back(make_pow(f.base, f.expo));
  }
  return make_prod(std::move(fs));
}

inline Expr poly_to_expr(const Poly& p) {
  std::vector<Expr> ts;
  ts.reserve(p.t.size());
  for (const auto& [m, c] : p.t) ts.push_back(mono_to_expr(m, c));
  return make_sum(std::move(ts));
}

inline Expr from_rf(const RF& r) {
  std::vector<Expr> fs;
  fs.push_back(poly_to_expr(r.num));
  for (const auto& df : r.den)
    fs.push_back(make_pow(poly_to_expr(df.p), num(-static_cast<long>(df.mult))));
  if (fs.size() == 1) return fs[0];
  return make_prod(std::move(fs));
}

struct NormCache {
  // keeps the key expression alive so node addresses cannot be recycled
  std::unordered_map<const ExprNode*, std::pair<Expr, Expr>> memo[2];
};

inline NormCache& norm_cache() {
  thread_local NormCache c;
  return c;
}

inline Expr norm_expr(const Expr& e, RewriteMode mode) {
  auto& memo = norm_cache().memo[static_cast<int>(mode)];
  auto it = memo.find(e.ptr().get());
  if (it != memo.end()) return it->second.second;
  RF r = to_rf(e, mode);
  rf_reduce(r);
  Expr out = from_rf(r);
  if (memo.size() < 200000) memo.emplace(e.ptr().get(), std::make_pair(e, out));
  return out;
}

inline Expr norm_exponent(const Expr& e) {
  if (e.is_num()) return e;
  return norm_expr(e, RewriteMode::Standard);
}

}  // namespace nf

// ---------------------------------------------------------------------------
// Public interface

inline Expr simplify(const Expr& e, RewriteMode mode) {
  try {
    return nf::norm_expr(e, mode);
  } catch (const nf::TooLarge&) {
    return e;  // construction-level canonical form
  }
}

inline Expr simplify(const Expr& e) { return simplify(e, RewriteMode::Standard); }

// symbolic zero decision (sound: only reports true when the normal form is 0)
inline bool proven_zero_symbolic(const Expr& e) {
  try {
    nf::RF r = nf::to_rf(e, RewriteMode::ZeroTest);
    nf::rf_reduce(r);
    return r.num.zero();
  } catch (const nf::TooLarge&) {
    return false;
  } catch (const std::runtime_error&) {
    return false;
  }
}

}  // namespace ck
