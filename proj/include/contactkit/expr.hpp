#pragma once

// Expression core: immutable tree nodes over jet variables, free parameters,
// elementary kernels and opaque function symbols with derivative multi-indices.
// Construction helpers keep trees in a light canonical form (flattened, sorted,
// numeric folding, like-term/like-factor merging); full rational normalization
// lives in simplify.hpp.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace ck {

using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline BigInt rat_num(const Rat& r) { return boost::multiprecision::numerator(r); }
inline BigInt rat_den(const Rat& r) { return boost::multiprecision::denominator(r); }
inline bool rat_is_int(const Rat& r) { return rat_den(r) == 1; }

// ---------------------------------------------------------------------------
// Jet variables

enum class JetVar : int {
  t = 0, x, u, u_t, u_x, u_xx, u_3, u_4, u_5, u_6, u_7, u_8, u_tx, u_tt,
};

inline constexpr int kJetCount = 14;

inline const char* jet_name(JetVar v) {
  static const char* names[kJetCount] = {"t", "x", "u", "u_t", "u_x", "u_xx",
                                         "u_3", "u_4", "u_5", "u_6", "u_7", "u_8",
                                         "u_tx", "u_tt"};
  return names[static_cast<int>(v)];
}

inline std::optional<JetVar> jet_from_name(const std::string& s) {
  for (int i = 0; i < kJetCount; ++i)
    if (s == jet_name(static_cast<JetVar>(i))) return static_cast<JetVar>(i);
  return std::nullopt;
}

// pure x-derivative order: u -> 0, u_x -> 1, u_xx -> 2, u_k -> k; others none
inline std::optional<int> jet_x_order(JetVar v) {
  switch (v) {
    case JetVar::u: return 0;
    case JetVar::u_x: return 1;
    case JetVar::u_xx: return 2;
    case JetVar::u_3: return 3;
    case JetVar::u_4: return 4;
    case JetVar::u_5: return 5;
    case JetVar::u_6: return 6;
    case JetVar::u_7: return 7;
    case JetVar::u_8: return 8;
    default: return std::nullopt;
  }
}

inline JetVar jet_of_x_order(int k) {
  switch (k) {
    case 0: return JetVar::u;
    case 1: return JetVar::u_x;
    case 2: return JetVar::u_xx;
    case 3: return JetVar::u_3;
    case 4: return JetVar::u_4;
    case 5: return JetVar::u_5;
    case 6: return JetVar::u_6;
    case 7: return JetVar::u_7;
    case 8: return JetVar::u_8;
    default: throw std::runtime_error("jet order out of range (max 8): u_" + std::to_string(k));
  }
}

// ---------------------------------------------------------------------------
// Nodes

enum class NodeKind : int { Num = 0, Param, Var, Power, Elem, Opaque, Product, Sum };

enum class ElemKind : int { Exp = 0, Ln, Sin, Cos, Tan, Sec, Arctan, Arctanh };

inline const char* elem_name(ElemKind k) {
  static const char* names[] = {"exp", "ln", "sin", "cos", "tan", "sec", "arctan", "arctanh"};
  return names[static_cast<int>(k)];
}

inline std::optional<ElemKind> elem_from_name(const std::string& s) {
  for (int i = 0; i < 8; ++i)
    if (s == elem_name(static_cast<ElemKind>(i))) return static_cast<ElemKind>(i);
  return std::nullopt;
}

struct ExprNode;
class Expr;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  NodeKind kind;
  Rat num;                  // Num
  std::string name;         // Param, Var, Opaque
  int jet = -1;             // Var: JetVar index, or -1 for auxiliary variables
  ElemKind elem{};          // Elem
  std::vector<int> deriv;   // Opaque derivative multi-index (size == arity)
  std::vector<Expr> kids;   // Sum/Product: members; Power: {base, expo}; Elem: {arg}; Opaque: args
};

class Expr {
 public:
  Expr() : p_(zero_node()) {}
  explicit Expr(ExprPtr p) : p_(std::move(p)) {}

  const ExprNode& node() const { return *p_; }
  const ExprPtr& ptr() const { return p_; }
  NodeKind kind() const { return p_->kind; }
  bool is(NodeKind k) const { return p_->kind == k; }

  bool is_num() const { return is(NodeKind::Num); }
  bool is_zero() const { return is_num() && p_->num == 0; }
  bool is_one() const { return is_num() && p_->num == 1; }
  const Rat& num() const { return p_->num; }
  const std::string& name() const { return p_->name; }
  const std::vector<Expr>& kids() const { return p_->kids; }

 private:
  static ExprPtr zero_node() {
    static ExprPtr z = [] {
      auto n = std::make_shared<ExprNode>();
      n->kind = NodeKind::Num;
      n->num = 0;
      return n;
    }();
    return z;
  }
  ExprPtr p_;
};

// ---------------------------------------------------------------------------
// Canonical total order: node-kind rank, then payload, then children.

inline int compare(const Expr& a, const Expr& b);

inline int compare_vec(const std::vector<Expr>& a, const std::vector<Expr>& b) {
  size_t n = std::min(a.size(), b.size());
  for (size_t i = 0; i < n; ++i)
    if (int c = compare(a[i], b[i])) return c;
  return a.size() < b.size() ? -1 : a.size() > b.size() ? 1 : 0;
}

inline int compare(const Expr& a, const Expr& b) {
  if (a.ptr() == b.ptr()) return 0;
  const ExprNode& x = a.node();
  const ExprNode& y = b.node();
  if (x.kind != y.kind) return x.kind < y.kind ? -1 : 1;
  switch (x.kind) {
    case NodeKind::Num:
      return x.num < y.num ? -1 : x.num > y.num ? 1 : 0;
    case NodeKind::Param:
      return x.name < y.name ? -1 : x.name > y.name ? 1 : 0;
    case NodeKind::Var:
      if (x.jet != y.jet) return x.jet < y.jet ? -1 : 1;
      return x.name < y.name ? -1 : x.name > y.name ? 1 : 0;
    case NodeKind::Elem:
      if (x.elem != y.elem) return x.elem < y.elem ? -1 : 1;
      return compare_vec(x.kids, y.kids);
    case NodeKind::Opaque: {
      if (x.name != y.name) return x.name < y.name ? -1 : 1;
      if (x.deriv != y.deriv) return x.deriv < y.deriv ? -1 : 1;
      return compare_vec(x.kids, y.kids);
    }
    default:
      return compare_vec(x.kids, y.kids);
  }
}

inline bool equal(const Expr& a, const Expr& b) { return compare(a, b) == 0; }

struct ExprLess {
  bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};

// ---------------------------------------------------------------------------
// Leaf constructors

inline Expr num(Rat r) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Num;
  n->num = std::move(r);
  return Expr(n);
}
inline Expr num(long v) { return num(Rat(v)); }
inline Expr num(long p, long q) { return num(Rat(p) / q); }

inline Expr param(const std::string& name) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Param;
  n->name = name;
  return Expr(n);
}

inline Expr var(JetVar v) {
  static std::vector<ExprPtr> cache = [] {
    std::vector<ExprPtr> c;
    for (int i = 0; i < kJetCount; ++i) {
      auto n = std::make_shared<ExprNode>();
      n->kind = NodeKind::Var;
      n->jet = i;
      n->name = jet_name(static_cast<JetVar>(i));
      c.push_back(n);
    }
    return c;
  }();
  return Expr(cache[static_cast<int>(v)]);
}

inline Expr auxvar(const std::string& name) {
  if (auto j = jet_from_name(name)) return var(*j);
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Var;
  n->jet = -1;
  n->name = name;
  return Expr(n);
}

// ---------------------------------------------------------------------------
// Composite constructors (light canonicalization)

Expr make_sum(std::vector<Expr> terms);
Expr make_prod(std::vector<Expr> factors);
Expr make_pow(const Expr& base, const Expr& expo);

inline Expr make_elem(ElemKind k, const Expr& arg) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Elem;
  n->elem = k;
  n->kids = {arg};
  return Expr(n);
}

inline Expr make_opaque(std::string name, std::vector<int> deriv, std::vector<Expr> args) {
  if (deriv.size() != args.size())
    throw std::runtime_error("opaque '" + name + "': derivative multi-index length != argument count");
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Opaque;
  n->name = std::move(name);
  n->deriv = std::move(deriv);
  n->kids = std::move(args);
  return Expr(n);
}

namespace detail {

// exact n-th root of a non-negative integer, if it exists
inline std::optional<BigInt> int_root(const BigInt& a, unsigned n) {
  if (a < 0) return std::nullopt;
  if (a == 0 || a == 1 || n == 1) return a;
  BigInt lo = 0, hi = a;
  while (lo < hi) {
    BigInt mid = (lo + hi + 1) / 2;
    BigInt p = 1;
    bool over = false;
    for (unsigned i = 0; i < n; ++i) {
      p *= mid;
      if (p > a) { over = true; break; }
    }
    if (over) hi = mid - 1; else lo = mid;
  }
  BigInt p = 1;
  for (unsigned i = 0; i < n; ++i) p *= lo;
  if (p == a) return lo;
  return std::nullopt;
}

inline Rat rat_pow_int(const Rat& base, const BigInt& e) {
  if (e == 0) return Rat(1);
  BigInt n = rat_num(base), d = rat_den(base);
  BigInt ae = e < 0 ? BigInt(-e) : e;
  BigInt pn = 1, pd = 1;
  for (BigInt i = 0; i < ae; ++i) { pn *= n; pd *= d; }
  Rat r(pn);
  r /= Rat(pd);
  if (e < 0) {
    if (r == 0) throw std::runtime_error("division by zero in numeric power");
    r = Rat(1) / r;
  }
  return r;
}

// try to evaluate base^(p/q) exactly over Q
inline std::optional<Rat> rat_pow_exact(const Rat& base, const Rat& expo) {
  if (rat_is_int(expo)) return rat_pow_int(base, rat_num(expo));
  if (base == 0) return rat_num(expo) > 0 ? std::optional<Rat>(Rat(0)) : std::nullopt;
  if (base == 1) return Rat(1);
  BigInt q = rat_den(expo);
  if (q > 6) return std::nullopt;
  Rat b = base;
  bool neg = b < 0;
  if (neg) {
    if (q % 2 == 0) return std::nullopt;  // even root of a negative
    b = -b;
  }
  auto rn = int_root(rat_num(b), static_cast<unsigned>(q));
  auto rd = int_root(rat_den(b), static_cast<unsigned>(q));
  if (!rn || !rd) return std::nullopt;
  Rat root = Rat(*rn) / Rat(*rd);
  if (neg) root = -root;
  return rat_pow_int(root, rat_num(expo));
}

// split a term into (numeric coefficient, core)
inline std::pair<Rat, Expr> coeff_split(const Expr& e) {
  if (e.is_num()) return {e.num(), num(1)};
  if (e.is(NodeKind::Product) && !e.kids().empty() && e.kids()[0].is_num()) {
    std::vector<Expr> rest(e.kids().begin() + 1, e.kids().end());
    if (rest.size() == 1) return {e.kids()[0].num(), rest[0]};
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::Product;
    n->kids = std::move(rest);
    return {e.kids()[0].num(), Expr(n)};
  }
  return {Rat(1), e};
}

// split a factor into (base, exponent)
inline std::pair<Expr, Expr> pow_split(const Expr& e) {
  if (e.is(NodeKind::Power)) return {e.kids()[0], e.kids()[1]};
  return {e, num(1)};
}

}  // namespace detail

inline Expr make_pow(const Expr& base, const Expr& expo) {
  if (expo.is_num()) {
    const Rat& e = expo.num();
    if (e == 0) return num(1);
    if (e == 1) return base;
    if (base.is_num()) {
      if (auto v = detail::rat_pow_exact(base.num(), e)) return num(*v);
    }
  }
  // (b^p)^e -> b^(p*e); bases are kept positive by domain sampling
  if (base.is(NodeKind::Power))
    return make_pow(base.kids()[0], make_prod({base.kids()[1], expo}));
  // distribute numeric exponents over products (positive-coefficient bases)
  if (base.is(NodeKind::Product) && expo.is_num()) {
    auto [c, core] = detail::coeff_split(base);
    bool int_expo = rat_is_int(expo.num());
    if (int_expo || c > 0) {
      std::vector<Expr> out;
      if (c != 1) out.push_back(make_pow(num(c), expo));
      const auto& fs = core.is(NodeKind::Product) ? core.kids() : std::vector<Expr>{core};
      for (const auto& f : fs) out.push_back(make_pow(f, expo));
      return make_prod(std::move(out));
    }
  }
  if (base.is_num() && base.num() == 1) return num(1);
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Power;
  n->kids = {base, expo};
  return Expr(n);
}

inline Expr make_prod(std::vector<Expr> factors) {
  Rat coeff(1);
  std::vector<Expr> flat;
  // flatten and fold numerals
  std::vector<Expr> queue = std::move(factors);
  for (size_t i = 0; i < queue.size(); ++i) {
    const Expr& f = queue[i];
    if (f.is_num()) {
      coeff *= f.num();
      if (coeff == 0) return num(0);
    } else if (f.is(NodeKind::Product)) {
      for (const auto& k : f.kids()) queue.push_back(k);
    } else {
      flat.push_back(f);
    }
  }
  // group by base
  std::map<Expr, std::vector<Expr>, ExprLess> groups;
  for (const auto& f : flat) {
    auto [b, e] = detail::pow_split(f);
    groups[b].push_back(e);
  }
  std::vector<Expr> out;
  for (auto& [b, es] : groups) {
    Expr e = es.size() == 1 ? es[0] : make_sum(es);
    Expr p = make_pow(b, e);
    if (p.is_num()) coeff *= p.num();
    else if (p.is(NodeKind::Product)) {
      // rare: pow collapsed into a product; splice its pieces
      auto [c2, core] = detail::coeff_split(p);
      coeff *= c2;
      if (core.is(NodeKind::Product))
        for (const auto& k : core.kids()) out.push_back(k);
      else if (!core.is_one()) out.push_back(core);
    } else out.push_back(p);
    if (coeff == 0) return num(0);
  }
  std::sort(out.begin(), out.end(), ExprLess{});
  if (out.empty()) return num(coeff);
  if (coeff == 1 && out.size() == 1) return out[0];
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Product;
  if (coeff != 1) n->kids.push_back(num(coeff));
  for (auto& f : out) n->kids.push_back(std::move(f));
  if (n->kids.size() == 1) return n->kids[0];
  return Expr(n);
}

inline Expr make_sum(std::vector<Expr> terms) {
  Rat constant(0);
  std::map<Expr, Rat, ExprLess> by_core;
  std::vector<Expr> queue = std::move(terms);
  for (size_t i = 0; i < queue.size(); ++i) {
    const Expr& t = queue[i];
    if (t.is_num()) {
      constant += t.num();
    } else if (t.is(NodeKind::Sum)) {
      for (const auto& k : t.kids()) queue.push_back(k);
    } else {
      auto [c, core] = detail::coeff_split(t);
      by_core[core] += c;
    }
  }
  std::vector<Expr> out;
  for (auto& [core, c] : by_core) {
    if (c == 0) continue;
    if (c == 1) out.push_back(core);
    else out.push_back(make_prod({num(c), core}));
  }
  if (constant != 0) out.push_back(num(constant));
  std::sort(out.begin(), out.end(), ExprLess{});
  if (out.empty()) return num(0);
  if (out.size() == 1) return out[0];
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Sum;
  n->kids = std::move(out);
  return Expr(n);
}

// ---------------------------------------------------------------------------
// Operator sugar

inline Expr operator+(const Expr& a, const Expr& b) { return make_sum({a, b}); }
inline Expr operator-(const Expr& a, const Expr& b) { return make_sum({a, make_prod({num(-1), b})}); }
inline Expr operator-(const Expr& a) { return make_prod({num(-1), a}); }
inline Expr operator*(const Expr& a, const Expr& b) { return make_prod({a, b}); }
inline Expr operator/(const Expr& a, const Expr& b) { return make_prod({a, make_pow(b, num(-1))}); }
inline Expr pow(const Expr& b, const Expr& e) { return make_pow(b, e); }
inline Expr pow(const Expr& b, long e) { return make_pow(b, num(e)); }
inline Expr sqrt(const Expr& a) { return make_pow(a, num(1, 2)); }
inline Expr exp(const Expr& a) { return make_elem(ElemKind::Exp, a); }
inline Expr ln(const Expr& a) { return make_elem(ElemKind::Ln, a); }
inline Expr sin(const Expr& a) { return make_elem(ElemKind::Sin, a); }
inline Expr cos(const Expr& a) { return make_elem(ElemKind::Cos, a); }
inline Expr tan(const Expr& a) { return make_elem(ElemKind::Tan, a); }
inline Expr sec(const Expr& a) { return make_elem(ElemKind::Sec, a); }
inline Expr arctan(const Expr& a) { return make_elem(ElemKind::Arctan, a); }
inline Expr arctanh(const Expr& a) { return make_elem(ElemKind::Arctanh, a); }

// ---------------------------------------------------------------------------
// Structure queries

template <typename F>
void visit(const Expr& e, F&& f) {
  f(e);
  for (const auto& k : e.kids()) visit(k, f);
}

inline void free_vars(const Expr& e, std::set<std::string>& vars, std::set<std::string>& params) {
  visit(e, [&](const Expr& n) {
    if (n.is(NodeKind::Var)) vars.insert(n.name());
    else if (n.is(NodeKind::Param)) params.insert(n.name());
  });
}

inline bool depends_on(const Expr& e, JetVar v) {
  bool found = false;
  visit(e, [&](const Expr& n) {
    if (n.is(NodeKind::Var) && n.node().jet == static_cast<int>(v)) found = true;
  });
  return found;
}

inline bool has_opaque(const Expr& e) {
  bool found = false;
  visit(e, [&](const Expr& n) { if (n.is(NodeKind::Opaque)) found = true; });
  return found;
}

inline int max_pure_x_order(const Expr& e) {
  int ord = -1;
  visit(e, [&](const Expr& n) {
    if (n.is(NodeKind::Var) && n.node().jet >= 0)
      if (auto k = jet_x_order(static_cast<JetVar>(n.node().jet))) ord = std::max(ord, *k);
  });
  return ord;
}

// ---------------------------------------------------------------------------
// Substitution (simultaneous, leaf-level: jet variables, aux variables, parameters)

using Bindings = std::map<Expr, Expr, ExprLess>;

inline Expr substitute(const Expr& e, const Bindings& b) {
  if (b.empty()) return e;
  switch (e.kind()) {
    case NodeKind::Num:
      return e;
    case NodeKind::Param:
    case NodeKind::Var: {
      auto it = b.find(e);
      return it != b.end() ? it->second : e;
    }
    case NodeKind::Power:
      return make_pow(substitute(e.kids()[0], b), substitute(e.kids()[1], b));
    case NodeKind::Elem:
      return make_elem(e.node().elem, substitute(e.kids()[0], b));
    case NodeKind::Opaque: {
      std::vector<Expr> args;
      args.reserve(e.kids().size());
      for (const auto& a : e.kids()) args.push_back(substitute(a, b));
      return make_opaque(e.name(), e.node().deriv, std::move(args));
    }
    case NodeKind::Product: {
      std::vector<Expr> fs;
      fs.reserve(e.kids().size());
      for (const auto& k : e.kids()) fs.push_back(substitute(k, b));
      return make_prod(std::move(fs));
    }
    case NodeKind::Sum: {
      std::vector<Expr> ts;
      ts.reserve(e.kids().size());
      for (const auto& k : e.kids()) ts.push_back(substitute(k, b));
      return make_sum(std::move(ts));
    }
  }
  return e;
}

// ---------------------------------------------------------------------------
// Printing (grammar-compatible; parse(print(e)) == e)

namespace detail {

inline void print_rec(std::ostream& os, const Expr& e, int parent_prec);

// precedence: sum 1, product 2, unary minus 2, power 3, atom 4
inline int prec_of(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Sum: return 1;
    case NodeKind::Product: return 2;
    case NodeKind::Power: return 3;
    case NodeKind::Num: return e.num() < 0 || !rat_is_int(e.num()) ? 2 : 4;
    default: return 4;
  }
}

inline void print_wrapped(std::ostream& os, const Expr& e, int parent_prec) {
  bool need = prec_of(e) < parent_prec;
  if (need) os << '(';
  print_rec(os, e, need ? 0 : parent_prec);
  if (need) os << ')';
}

inline void print_rec(std::ostream& os, const Expr& e, int parent_prec) {
  (void)parent_prec;
  switch (e.kind()) {
    case NodeKind::Num: {
      if (e.num() < 0) os << '-';
      Rat a = e.num() < 0 ? Rat(-e.num()) : e.num();
      os << rat_num(a).str();
      if (!rat_is_int(a)) os << '/' << rat_den(a).str();
      break;
    }
    case NodeKind::Param:
    case NodeKind::Var:
      os << e.name();
      break;
    case NodeKind::Power: {
      print_wrapped(os, e.kids()[0], 4);
      os << '^';
      print_wrapped(os, e.kids()[1], 4);
      break;
    }
    case NodeKind::Elem:
      os << elem_name(e.node().elem) << '(';
      print_rec(os, e.kids()[0], 0);
      os << ')';
      break;
    case NodeKind::Opaque: {
      bool plain = true;
      for (int d : e.node().deriv) plain = plain && d == 0;
      if (plain) {
        os << e.name();
      } else {
        os << "pd(" << e.name() << ';';
        for (size_t i = 0; i < e.node().deriv.size(); ++i) {
          if (i) os << ',';
          os << e.node().deriv[i];
        }
        os << ')';
      }
      os << '(';
      for (size_t i = 0; i < e.kids().size(); ++i) {
        if (i) os << ',';
        print_rec(os, e.kids()[i], 0);
      }
      os << ')';
      break;
    }
    case NodeKind::Product: {
      auto [c, core] = coeff_split(e);
      bool neg = c < 0;
      Rat ac = neg ? Rat(-c) : c;
      if (neg) os << '-';
      bool first = true;
      if (ac != 1) {
        print_wrapped(os, num(ac), 2);
        first = false;
      }
      const auto& fs = core.is(NodeKind::Product) ? core.kids() : std::vector<Expr>{core};
      for (const auto& f : fs) {
        if (!first) os << '*';
        print_wrapped(os, f, 3);
        first = false;
      }
      if (first) os << '1';
      break;
    }
    case NodeKind::Sum: {
      bool first = true;
      for (const auto& t : e.kids()) {
        auto [c, core] = coeff_split(t);
        if (!first) os << (c < 0 ? " - " : " + ");
        else if (c < 0) os << '-';
        Rat ac = c < 0 ? Rat(-c) : c;
        Expr tt = ac == 1 ? core : make_prod({num(ac), core});
        print_wrapped(os, tt, 2);
        first = false;
      }
      if (first) os << '0';
      break;
    }
  }
}

}  // namespace detail

inline std::string to_string(const Expr& e) {
  std::ostringstream os;
  detail::print_rec(os, e, 0);
  return os.str();
}

inline std::ostream& operator<<(std::ostream& os, const Expr& e) {
  detail::print_rec(os, e, 0);
  return os;
}

}  // namespace ck
