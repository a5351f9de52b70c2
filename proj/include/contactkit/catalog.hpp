#pragma once

// Machine-readable transcription of the classified (algebra, generators,
// invariant equation) triples, plus load/validate and batch verification.
//
// File format (line oriented, # starts a comment):
//   [entry]
//   id=A_3.5^2
//   section=3d                      tally bucket
//   anchor=...                      display fragment for the audit index
//   algebra=A3.5(q=1/2,p=symbolic)  table name + parameter bindings
//   opaque=F/2                      opaque symbol declaration name/arity
//   where w1 = expr                 named sub-expression
//   g1 = expr                       generators, in table basis order
//   rhs = expr                      right-hand side of u_t = F
//   constraint = expr != 0
//   constraint = lo < expr < hi
//   expected = closure-only         skip invariance checks
//   count=no                        exclude from section tallies

#include <atomic>
#include <fstream>
#include <functional>
#include <thread>

#include "algebra.hpp"
#include "verify.hpp"

namespace ck {

struct CatalogError : std::runtime_error {
  CatalogError(const std::string& msg, const std::string& id, int line)
      : std::runtime_error("catalog" + (id.empty() ? "" : " entry " + id) + " (line " +
                           std::to_string(line) + "): " + msg) {}
};

struct CatalogEntry {
  std::string id;
  std::string section;
  std::string anchor;
  std::string algebra_name;
  Bindings bindings;
  SymbolContext symbols;
  std::map<std::string, Expr> where;
  std::vector<Expr> generators;
  std::optional<Expr> rhs;
  std::vector<Expr> nonzero;
  std::vector<RangeConstraint> ranges;
  bool closure_only = false;
  bool counted = true;
  int line = 0;

  StructureConstants bound_table() const { return builtin_table(algebra_name).bind(bindings); }

  ProbeContext probe_context() const {
    ProbeContext ctx;
    ctx.symbols = symbols;
    ctx.nonzero = nonzero;
    ctx.ranges = ranges;
    ctx.add_symbol_constraints();
    return ctx;
  }
};

namespace detail_catalog {

inline std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline bool split_kv(const std::string& line, std::string& key, std::string& value) {
  size_t eq = line.find('=');
  if (eq == std::string::npos) return false;
  key = trim(line.substr(0, eq));
  value = trim(line.substr(eq + 1));
  return true;
}

// algebra=NAME or NAME(k=v,...); v is "symbolic" or an expression in parameters
inline void parse_algebra_spec(const std::string& text, CatalogEntry& e, int line) {
  size_t par = text.find('(');
  if (par == std::string::npos) {
    e.algebra_name = trim(text);
    return;
  }
  e.algebra_name = trim(text.substr(0, par));
  if (text.back() != ')') throw CatalogError("malformed algebra spec '" + text + "'", e.id, line);
  std::string args = text.substr(par + 1, text.size() - par - 2);
  size_t pos = 0;
  while (pos < args.size()) {
    size_t comma = args.find(',', pos);
    std::string piece = comma == std::string::npos ? args.substr(pos) : args.substr(pos, comma - pos);
    pos = comma == std::string::npos ? args.size() : comma + 1;
    piece = trim(piece);
    if (piece.empty()) continue;
    std::string k, v;
    if (!split_kv(piece, k, v))
      throw CatalogError("malformed parameter binding '" + piece + "'", e.id, line);
    if (v == "symbolic") continue;
    SymbolContext pctx;
    e.bindings.emplace(param(k), parse(v, pctx));
  }
}

}  // namespace detail_catalog

inline std::vector<CatalogEntry> load_catalog(std::istream& in) {
  using detail_catalog::trim;
  std::vector<CatalogEntry> entries;
  std::set<std::string> ids;
  std::optional<CatalogEntry> cur;
  std::vector<std::pair<int, std::string>> gen_lines;  // generator index -> text
  std::vector<std::pair<std::string, std::string>> where_lines;
  std::string rhs_text;
  int lineno = 0;

  auto validate = [&](CatalogEntry& e) {
    StructureConstants table = e.bound_table();
    // where-bindings are parsed as parameters and substituted textually
    Bindings wb;
    for (const auto& [name, text] : where_lines) {
      Expr val = parse(text, e.symbols);
      val = substitute(val, wb);
      e.where[name] = val;
      wb.emplace(param(name), val);
    }
    std::sort(gen_lines.begin(), gen_lines.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (size_t k = 0; k < gen_lines.size(); ++k)
      if (gen_lines[k].first != static_cast<int>(k) + 1)
        throw CatalogError("generator indices must be g1..gN in order", e.id, e.line);
    for (const auto& [idx, text] : gen_lines)
      e.generators.push_back(substitute(parse(text, e.symbols), wb));
    if (static_cast<int>(e.generators.size()) != table.dim)
      throw CatalogError("generator count " + std::to_string(e.generators.size()) +
                             " does not match dim " + std::to_string(table.dim) + " of " +
                             e.algebra_name,
                         e.id, e.line);
    for (const auto& g : e.generators) GeneratingFunction check(g);  // validates jet shape
    if (!rhs_text.empty()) {
      e.rhs = substitute(parse(rhs_text, e.symbols), wb);
      require_rhs_shape(*e.rhs);
    }
    if (!e.rhs && !e.closure_only)
      throw CatalogError("entry has no rhs and is not closure-only", e.id, e.line);
  };

  auto finish = [&]() {
    if (!cur) return;
    CatalogEntry& e = *cur;
    if (e.id.empty()) throw CatalogError("missing id", "", e.line);
    if (!ids.insert(e.id).second) throw CatalogError("duplicate id", e.id, e.line);
    if (e.algebra_name.empty()) throw CatalogError("missing algebra", e.id, e.line);
    try {
      validate(e);
    } catch (const CatalogError&) {
      throw;
    } catch (const std::exception& ex) {
      throw CatalogError(ex.what(), e.id, e.line);
    }
    entries.push_back(std::move(e));
    cur.reset();
    gen_lines.clear();
    where_lines.clear();
    rhs_text.clear();
  };

  std::string raw;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line == "[entry]") {
      finish();
      cur = CatalogEntry{};
      cur->line = lineno;
      continue;
    }
    if (!cur) throw CatalogError("content before first [entry]", "", lineno);
    CatalogEntry& e = *cur;

    if (line.rfind("where ", 0) == 0) {
      std::string k, v;
      if (!detail_catalog::split_kv(line.substr(6), k, v))
        throw CatalogError("malformed where line", e.id, lineno);
      where_lines.emplace_back(k, v);
      continue;
    }
    std::string key, value;
    if (!detail_catalog::split_kv(line, key, value))
      throw CatalogError("malformed line '" + line + "'", e.id, lineno);

    if (key == "id") e.id = value;
    else if (key == "section") e.section = value;
    else if (key == "anchor") e.anchor = value;
    else if (key == "algebra") detail_catalog::parse_algebra_spec(value, e, lineno);
    else if (key == "opaque") {
      size_t slash = value.find('/');
      if (slash == std::string::npos)
        throw CatalogError("opaque line must be name/arity", e.id, lineno);
      e.symbols.declare(detail_catalog::trim(value.substr(0, slash)),
                        std::stoi(value.substr(slash + 1)));
    } else if (key.size() >= 2 && key[0] == 'g' &&
               key.find_first_not_of("0123456789", 1) == std::string::npos) {
      gen_lines.emplace_back(std::stoi(key.substr(1)), value);
    } else if (key == "rhs") {
      rhs_text = value;
    } else if (key == "constraint") {
      // forms:  expr != 0   |   lo < expr < hi
      size_t neq = value.find("!=");
      size_t lt1 = value.find('<');
      if (neq != std::string::npos) {
        std::string lhs = trim(value.substr(0, neq));
        std::string rhs0 = trim(value.substr(neq + 2));
        if (rhs0 != "0") throw CatalogError("nonzero constraint must be 'expr != 0'", e.id, lineno);
        e.nonzero.push_back(parse(lhs, e.symbols));
      } else if (lt1 != std::string::npos) {
        size_t lt2 = value.find('<', lt1 + 1);
        if (lt2 == std::string::npos)
          throw CatalogError("range constraint must be 'lo < expr < hi'", e.id, lineno);
        SymbolContext pctx;
        Expr lo = parse(trim(value.substr(0, lt1)), pctx);
        Expr mid = parse(trim(value.substr(lt1 + 1, lt2 - lt1 - 1)), e.symbols);
        Expr hi = parse(trim(value.substr(lt2 + 1)), pctx);
        if (!lo.is_num() || !hi.is_num())
          throw CatalogError("range bounds must be rational literals", e.id, lineno);
        e.ranges.push_back({mid, lo.num(), hi.num()});
      } else {
        throw CatalogError("unrecognized constraint '" + value + "'", e.id, lineno);
      }
    } else if (key == "expected") {
      if (value == "closure-only") e.closure_only = true;
      else if (value != "pass")
        throw CatalogError("expected must be 'pass' or 'closure-only'", e.id, lineno);
    } else if (key == "count") {
      e.counted = value != "no";
    } else {
      throw CatalogError("unknown key '" + key + "'", e.id, lineno);
    }
  }
  finish();
  return entries;
}

inline std::vector<CatalogEntry> load_catalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open catalog file '" + path + "'");
  return load_catalog(in);
}

// ---------------------------------------------------------------------------
// Entry verification

struct CheckLine {
  std::string kind;   // closure | invariance | jacobi | contact-cond
  std::string what;   // pair or generator label
  ZeroVerdict verdict;
};

struct EntryReport {
  std::string id;
  std::string section;
  bool counted = true;
  bool closure_only = false;
  std::vector<CheckLine> checks;
  bool pass = true;
  bool failed = false;
  bool inconclusive = false;

  void absorb(const CheckLine& c) {
    checks.push_back(c);
    if (c.verdict.kind == Verdict::ProvenNonzero) failed = true;
    else if (!c.verdict.zero_class()) inconclusive = true;
    pass = !failed && !inconclusive;
  }
};

inline EntryReport verify_entry(const CatalogEntry& e, const ProbeConfig& cfg) {
  EntryReport rep;
  rep.id = e.id;
  rep.section = e.section;
  rep.counted = e.counted;
  rep.closure_only = e.closure_only;

  StructureConstants table = e.bound_table();
  ProbeContext ctx = e.probe_context();

  std::vector<GeneratingFunction> gens;
  gens.reserve(e.generators.size());
  for (const auto& g : e.generators) gens.emplace_back(g);

  Realization real(table, gens);
  RealizationReport closure = check_realization(real, cfg, ctx, e.id);
  for (const auto& pr : closure.pairs) {
    CheckLine c;
    c.kind = "closure";
    c.what = "g" + std::to_string(pr.i + 1) + ",g" + std::to_string(pr.j + 1);
    c.verdict = pr.verdict;
    rep.absorb(c);
  }

  if (!e.closure_only && e.rhs) {
    ProbeContext ictx = ctx;
    for (const auto& rc : table.ranges) ictx.ranges.push_back(rc);
    for (const auto& ex : table.exclusions) ictx.nonzero.push_back(ex);
    for (size_t i = 0; i < gens.size(); ++i) {
      InvarianceReport ir = check_invariance(*e.rhs, gens[i], cfg, ictx,
                                             rnd::task_hash(e.id + ":inv:" + std::to_string(i)));
      CheckLine c;
      c.kind = "invariance";
      c.what = "g" + std::to_string(i + 1);
      c.verdict = ir.verdict;
      rep.absorb(c);
    }
  }
  return rep;
}

struct Summary {
  std::vector<EntryReport> reports;  // catalog order
  int pass = 0, fail = 0, inconclusive = 0;
  std::map<std::string, int> section_counts;          // counted entries per section
  std::map<std::string, int> section_closure_only;    // closure-only extras

  void finalize() {
    pass = fail = inconclusive = 0;
    for (const auto& r : reports) {
      if (r.failed) ++fail;
      else if (r.inconclusive) ++inconclusive;
      else ++pass;
      if (r.counted && !r.closure_only) ++section_counts[r.section];
      else ++section_closure_only[r.section];
    }
  }
};

inline Summary verify_all(const std::vector<CatalogEntry>& entries, const ProbeConfig& cfg,
                          int jobs = 1,
                          const std::function<void(const EntryReport&)>& progress = {}) {
  Summary sum;
  sum.reports.resize(entries.size());
  if (jobs < 1) jobs = 1;
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= entries.size()) break;
      sum.reports[i] = verify_entry(entries[i], cfg);
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (progress)
    for (const auto& r : sum.reports) progress(r);
  sum.finalize();
  return sum;
}

}  // namespace ck
