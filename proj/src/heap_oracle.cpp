// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0

#include "cstar/heap_oracle.hpp"

#include <algorithm>
#include <functional>

#include "cstar/quote.hpp"

namespace cstar::oracle {

bool ConcreteHeap::disjoint(const ConcreteHeap& other) const {
  for (const auto& [a, v] : other.cells)
    if (cells.count(a)) return false;
  return true;
}

ConcreteHeap ConcreteHeap::disjoint_union(const ConcreteHeap& other) const {
  if (!disjoint(other)) throw OracleError("disjoint_union: overlapping domains");
  ConcreteHeap out = *this;
  out.cells.insert(other.cells.begin(), other.cells.end());
  return out;
}

std::string ConcreteHeap::to_string() const {
  std::string s = "{";
  bool first = true;
  for (const auto& [a, v] : cells) {
    if (!first) s += ", ";
    first = false;
    s += std::to_string(a) + " -> " + std::to_string(v);
  }
  return s + "}";
}

std::vector<ConcreteHeap> enumerate_heaps(const Bounds& b) {
  std::vector<ConcreteHeap> out;
  std::vector<std::uint64_t> addrs;
  for (int a = 0; a <= b.addr_max; ++a) addrs.push_back(static_cast<std::uint64_t>(a));
  size_t n = addrs.size();
  // subsets of addresses up to max_cells, then all byte assignments
  std::vector<size_t> pick;
  std::function<void(size_t)> rec = [&](size_t start) {
    // assign bytes to the current pick
    {
      std::vector<int> vals(pick.size(), 0);
      for (;;) {
        ConcreteHeap h;
        for (size_t i = 0; i < pick.size(); ++i)
          h.cells[addrs[pick[i]]] = static_cast<std::uint8_t>(vals[i]);
        out.push_back(std::move(h));
        size_t i = 0;
        for (; i < vals.size(); ++i) {
          if (vals[i] < b.byte_max) {
            ++vals[i];
            break;
          }
          vals[i] = 0;
        }
        if (i == vals.size()) break;
        if (vals.empty()) break;
      }
    }
    if (pick.size() >= static_cast<size_t>(b.max_cells)) return;
    for (size_t i = start; i < n; ++i) {
      pick.push_back(i);
      rec(i + 1);
      pick.pop_back();
    }
  };
  rec(0);
  return out;
}

namespace {

struct Eval {
  const sep::Theory& th;
  const Bounds& b;
  int depth = 0;

  Eval(const sep::Theory& theory, const Bounds& bounds) : th(theory), b(bounds) {}

  // Statements quantifying over three or more hprop variables use a reduced
  // instantiation family to keep the grid tractable.
  bool small_pools = false;

  // Quantified variables are bound in an environment with pre-decoded values
  // rather than substituted into the term, which keeps grid instantiation
  // cheap.
  struct Binding {
    Term term;                  // the instantiation, always set
    enum class K { Int, Bool, List, Opaque } kind = K::Opaque;
    BigInt int_val;
    bool bool_val = false;
    std::vector<Term> list_val;
  };
  std::vector<std::pair<Term, Binding>> env;

  const Binding* lookup(const Term& var) {
    for (size_t i = env.size(); i-- > 0;)
      if (env[i].first == var) return &env[i].second;
    return nullptr;
  }

  Binding decode_binding(const HolType& ty, const Term& value) {
    Binding bind;
    bind.term = value;
    if (ty == integer_ty()) {
      bind.kind = Binding::K::Int;
      bind.int_val = eval_int(value);
    } else if (ty == bool_ty()) {
      bind.kind = Binding::K::Bool;
      bind.bool_val = eval_formula(value);
    } else if (ty == list_ty(integer_ty()) || ty == list_ty(hprop_ty())) {
      bind.kind = Binding::K::List;
      bind.list_val = eval_list(value);
    }
    return bind;
  }

  void push_binding(const Term& var, const Term& value) {
    env.emplace_back(var, decode_binding(var.type(), value));
  }

  void push_prebound(const Term& var, const Binding& bind) { env.emplace_back(var, bind); }

  void pop_binding() { env.pop_back(); }

  std::map<std::string, std::vector<Binding>> binding_cache_;

  const std::vector<Binding>& decoded_domain_for(const HolType& ty, const Term& where) {
    std::string key = (small_pools ? "s:" : "f:") + ty.to_string();
    auto it = binding_cache_.find(key);
    if (it != binding_cache_.end()) return it->second;
    std::vector<Binding> out;
    for (const auto& v : domain_for(ty, where)) out.push_back(decode_binding(ty, v));
    return binding_cache_.emplace(key, std::move(out)).first->second;
  }

  [[noreturn]] void fail(const std::string& msg, const Term& t) {
    throw OracleError("oracle: " + msg + " in " + quote::print_term(t));
  }

  bool head_is(const Term& t, const char* name, size_t arity, std::vector<Term>* args) {
    const Term* cur = &t;
    size_t n = 0;
    while (cur->is_app()) {
      cur = &cur->fn();
      ++n;
    }
    if (n != arity || !cur->is_const() || cur->name() != name) return false;
    if (args) {
      args->assign(arity, Term());
      const Term* walk = &t;
      for (size_t i = arity; i-- > 0;) {
        (*args)[i] = walk->arg();
        walk = &walk->fn();
      }
    }
    return true;
  }

  std::map<std::string, BigInt> lit_cache_;

  BigInt eval_int(const Term& t) {
    if (is_int_literal(t)) {
      auto it = lit_cache_.find(t.name());
      if (it != lit_cache_.end()) return it->second;
      BigInt v = BigInt::from_string(t.name().substr(1));
      lit_cache_.emplace(t.name(), v);
      return v;
    }
    if (auto lit = dest_int_literal(t)) return *lit;
    if (t.is_var()) {
      if (const Binding* bind = lookup(t); bind && bind->kind == Binding::K::Int)
        return bind->int_val;
      fail("free integer variable " + t.name(), t);
    }
    if (is_address_const(t)) fail("address constant has no concrete value", t);
    std::vector<Term> args;
    if (head_is(t, "--", 1, &args)) return -eval_int(args[0]);
    if (head_is(t, "+", 2, &args)) return eval_int(args[0]) + eval_int(args[1]);
    if (head_is(t, "-", 2, &args)) return eval_int(args[0]) - eval_int(args[1]);
    if (head_is(t, "*", 2, &args)) return eval_int(args[0]) * eval_int(args[1]);
    if (head_is(t, "/", 2, &args)) {
      BigInt d = eval_int(args[1]);
      if (d.is_zero()) fail("division by zero", t);
      return BigInt::div_trunc(eval_int(args[0]), d);
    }
    if (head_is(t, "%", 2, &args)) {
      BigInt d = eval_int(args[1]);
      if (d.is_zero()) fail("division by zero", t);
      return BigInt::rem_trunc(eval_int(args[0]), d);
    }
    if (head_is(t, "EXP", 2, &args)) {
      BigInt e = eval_int(args[1]);
      if (e.negative()) fail("negative exponent", t);
      return BigInt::pow(eval_int(args[0]), e);
    }
    if (head_is(t, "sizeof", 1, &args)) {
      Term cty = resolve_var(args[0]);
      if (cty.is_const()) {
        if (cty.name() == "Tchar" || cty.name() == "Tuchar") return BigInt(1);
        if (cty.name() == "Tint") return BigInt(4);
        if (cty.name() == "Tptr") return BigInt(8);
      }
      fail("sizeof of non-constant type", t);
    }
    if (head_is(t, "length", 1, &args)) return BigInt(static_cast<long long>(eval_list(args[0]).size()));
    if (head_is(t, "fold_right", 3, &args)) {
      std::vector<Term> elems = eval_list(args[1]);
      Term acc = args[2];
      Term f = resolve_var(args[0]);
      for (size_t i = elems.size(); i-- > 0;)
        acc = beta_apply(beta_apply(f, elems[i]), acc);
      return eval_int(acc);
    }
    if (auto r = resolve_spine(t)) return eval_int(*r);
    fail("cannot evaluate integer term", t);
  }

  std::vector<Term> eval_list(const Term& t) {
    std::vector<Term> args;
    if (t.is_var()) {
      if (const Binding* bind = lookup(t); bind && bind->kind == Binding::K::List)
        return bind->list_val;
      fail("free list variable " + t.name(), t);
    }
    if (t.is_const() && t.name() == "nil") return {};
    if (head_is(t, "cons", 2, &args)) {
      std::vector<Term> rest = eval_list(args[1]);
      rest.insert(rest.begin(), args[0]);
      return rest;
    }
    if (head_is(t, "append", 2, &args)) {
      std::vector<Term> l = eval_list(args[0]), r = eval_list(args[1]);
      l.insert(l.end(), r.begin(), r.end());
      return l;
    }
    if (head_is(t, "rev", 1, &args)) {
      std::vector<Term> l = eval_list(args[0]);
      std::reverse(l.begin(), l.end());
      return l;
    }
    if (head_is(t, "snoc", 2, &args)) {
      std::vector<Term> l = eval_list(args[0]);
      l.push_back(args[1]);
      return l;
    }
    if (head_is(t, "replicate", 2, &args)) {
      BigInt n = eval_int(args[0]);
      std::vector<Term> out;
      Term v = args[1];
      while (n > BigInt(0)) {
        out.push_back(v);
        n = n - BigInt(1);
      }
      return out;
    }
    if (t.is_var()) fail("free list variable " + t.name(), t);
    fail("cannot evaluate list term", t);
  }

  // Element equality for list comparison.
  bool values_equal(const Term& a, const Term& b) {
    if (a == b) return true;
    if (a.type() == integer_ty()) return eval_int(a) == eval_int(b);
    if (a.type() == bool_ty()) return eval_formula(a) == eval_formula(b);
    fail("cannot compare list elements of type " + a.type().to_string(), a);
  }

  std::map<std::string, std::vector<Term>> domain_cache_;

  const std::vector<Term>& domain_for(const HolType& ty, const Term& where) {
    std::string key = (small_pools ? "s:" : "f:") + ty.to_string();
    auto it = domain_cache_.find(key);
    if (it != domain_cache_.end()) return it->second;
    return domain_cache_.emplace(key, domain_for_uncached(ty, where)).first->second;
  }

  std::vector<Term> domain_for_uncached(const HolType& ty, const Term& where) {
    std::vector<Term> out;
    if (ty == integer_ty()) {
      for (long long v = b.int_min; v <= b.int_max; ++v)
        out.push_back(v < 0 ? mk_app(th.kernel().constant("--"), mk_int_literal(BigInt(-v)))
                            : mk_int_literal(BigInt(v)));
      return out;
    }
    if (ty == bool_ty()) {
      out.push_back(th.kernel().constant("T"));
      out.push_back(th.kernel().constant("F"));
      return out;
    }
    if (ty == ctype_ty()) {
      for (const char* n : {"Tchar", "Tuchar", "Tint", "Tptr"})
        out.push_back(th.kernel().constant(n));
      return out;
    }
    if (ty == hprop_ty()) {
      if (b.hprop_pool.empty()) fail("no hprop instantiation pool", where);
      if (small_pools && b.hprop_pool.size() > 6)
        return std::vector<Term>(b.hprop_pool.begin(), b.hprop_pool.begin() + 6);
      return b.hprop_pool;
    }
    if (ty == list_ty(integer_ty())) {
      // lists over list_elem range up to list_max_len
      Term nil = th.kernel().mk_const("nil", list_ty(integer_ty()));
      Term cons = th.kernel().mk_const(
          "cons", fun_ty(integer_ty(), fun_ty(list_ty(integer_ty()), list_ty(integer_ty()))));
      std::vector<std::vector<long long>> lists{{}};
      std::vector<std::vector<long long>> frontier{{}};
      for (int len = 1; len <= b.list_max_len; ++len) {
        std::vector<std::vector<long long>> next;
        for (const auto& l : frontier)
          for (long long v = b.list_elem_min; v <= b.list_elem_max; ++v) {
            auto l2 = l;
            l2.push_back(v);
            next.push_back(l2);
            lists.push_back(l2);
          }
        frontier = std::move(next);
      }
      for (const auto& l : lists) {
        Term t = nil;
        for (size_t i = l.size(); i-- > 0;)
          t = mk_app(mk_app(cons, mk_int_literal(BigInt(l[i]))), t);
        out.push_back(t);
      }
      return out;
    }
    if (ty.is_fun() && ty.fun_to() == hprop_ty()) {
      if (b.hprop_fun_pool.empty()) fail("no hprop-function instantiation pool", where);
      std::vector<Term> fit;
      for (const auto& f : b.hprop_fun_pool)
        if (f.type() == ty) fit.push_back(f);
      if (fit.empty()) fail("no hprop-function pool entry of type " + ty.to_string(), where);
      return fit;
    }
    if (ty == fun_ty(integer_ty(), fun_ty(integer_ty(), integer_ty()))) {
      Term x = mk_var("x", integer_ty()), y = mk_var("y", integer_ty());
      std::vector<Term> fns;
      fns.push_back(mk_abs(x, mk_abs(y, mk_app(mk_app(th.kernel().constant("+"), x), y))));
      fns.push_back(mk_abs(x, mk_abs(y, mk_app(mk_app(th.kernel().constant("-"), x), y))));
      fns.push_back(mk_abs(x, mk_abs(y, x)));
      fns.push_back(mk_abs(x, mk_abs(y, y)));
      return fns;
    }
    if (ty == fun_ty(hprop_ty(), fun_ty(hprop_ty(), hprop_ty()))) {
      Term x = mk_var("x", hprop_ty()), y = mk_var("y", hprop_ty());
      std::vector<Term> fns;
      fns.push_back(mk_abs(x, mk_abs(y, th.mk_sep(x, y))));
      fns.push_back(mk_abs(x, mk_abs(y, x)));
      fns.push_back(mk_abs(x, mk_abs(y, y)));
      return fns;
    }
    if (ty.is_fun() && ty.fun_to() == bool_ty()) {
      std::vector<Term> fit;
      for (const auto& f : b.list_pred_pool)
        if (f.type() == ty) fit.push_back(f);
      if (fit.empty()) fail("no predicate pool entry of type " + ty.to_string(), where);
      return fit;
    }
    fail("no enumeration domain for type " + ty.to_string(), where);
  }

  Term beta_apply(const Term& f, const Term& arg) {
    if (f.is_abs()) return subst_term({{f.bound_var(), arg}}, f.body());
    return mk_app(f, arg);
  }

  // Replaces an env-bound head variable by its instantiation and reduces the
  // resulting beta redexes. Returns nothing when there is nothing to do.
  std::optional<Term> resolve_spine(const Term& t) {
    std::vector<Term> args;
    Term head = strip_app(t, args);
    bool changed = false;
    if (head.is_var()) {
      const Binding* bind = lookup(head);
      if (!bind) return std::nullopt;
      head = bind->term;
      changed = true;
    }
    if (!changed && !(t.is_app() && t.fn().is_abs())) return std::nullopt;
    Term cur = head;
    for (const auto& a : args) cur = beta_apply(cur, a);
    return cur;
  }

  const std::vector<ConcreteHeap>& heaps() {
    if (heap_cache_.empty()) heap_cache_ = enumerate_heaps(b);
    return heap_cache_;
  }

  static std::optional<long long> ctype_size_of(const Term& cty) {
    if (!cty.is_const()) return std::nullopt;
    if (cty.name() == "Tchar" || cty.name() == "Tuchar") return 1;
    if (cty.name() == "Tint") return 4;
    if (cty.name() == "Tptr") return 8;
    return std::nullopt;
  }

  static bool in_range(const Term& cty, const BigInt& v) {
    static const BigInt kCharMin(-128), kCharMax(127), kZero(0), kUcharMax(255);
    static const BigInt kIntMin(-2147483648LL), kIntMax(2147483647LL);
    static const BigInt kPtrMax = BigInt::pow(BigInt(2), BigInt(64)) - BigInt(1);
    const std::string& n = cty.name();
    if (n == "Tchar") return v >= kCharMin && v <= kCharMax;
    if (n == "Tuchar") return v >= kZero && v <= kUcharMax;
    if (n == "Tint") return v >= kIntMin && v <= kIntMax;
    if (n == "Tptr") return v >= kZero && v <= kPtrMax;
    return false;
  }

  static const BigInt& two_pow_bits(long long size) {
    static const BigInt k8 = BigInt::pow(BigInt(2), BigInt(8));
    static const BigInt k32 = BigInt::pow(BigInt(2), BigInt(32));
    static const BigInt k64 = BigInt::pow(BigInt(2), BigInt(64));
    if (size == 1) return k8;
    if (size == 4) return k32;
    return k64;
  }

  // exact footprint of one value of `cty` at `addr` encoding v (little-endian,
  // two's complement)
  bool data_cells(const Term& cty, const BigInt& addr, const BigInt& v, ConcreteHeap& out) {
    auto size = ctype_size_of(cty);
    if (!size) return false;
    if (addr.negative()) return false;
    static const BigInt k256(256), kOne(1);
    BigInt bytes = v;
    if (bytes.negative()) bytes = bytes + two_pow_bits(*size);
    BigInt cur = addr;
    for (long long i = 0; i < *size; ++i) {
      BigInt byte = BigInt::mod_floor(bytes, k256);
      if (!cur.fits_int64()) return false;
      out.cells[static_cast<std::uint64_t>(cur.to_int64())] =
          static_cast<std::uint8_t>(byte.to_int64());
      bytes = BigInt::div_floor(bytes, k256);
      cur = cur + kOne;
    }
    return true;
  }

  // Exact footprint of a conjunct: which cells it needs, with a known byte
  // value where the predicate determines one. `impossible` marks conjuncts
  // that no heap satisfies (out-of-range value, negative length).
  struct Footprint {
    bool impossible = false;
    std::map<std::uint64_t, std::optional<std::uint8_t>> cells;
    std::vector<Term> side;  // formulas that must additionally hold
  };

  std::optional<Footprint> footprint(const Term& t) {
    std::vector<Term> args;
    Footprint fp;
    if (t.is_const() && t.name() == "emp") return fp;
    if (head_is(t, "fact", 1, &args)) {
      fp.side.push_back(args[0]);
      return fp;
    }
    auto put_range = [&](const BigInt& addr, long long size,
                         const std::optional<BigInt>& value) {
      if (size == 0) return;  // empty footprint regardless of address
      if (addr.negative()) {
        fp.impossible = true;
        return;
      }
      static const BigInt k256(256), kOne(1);
      BigInt bytes;
      if (value) {
        bytes = *value;
        if (bytes.negative()) bytes = bytes + two_pow_bits(size);
      }
      BigInt cur = addr;
      for (long long i = 0; i < size; ++i) {
        if (!cur.fits_int64()) {
          fp.impossible = true;
          return;
        }
        std::uint64_t a = static_cast<std::uint64_t>(cur.to_int64());
        std::optional<std::uint8_t> byte;
        if (value) {
          byte = static_cast<std::uint8_t>(BigInt::mod_floor(bytes, k256).to_int64());
          bytes = BigInt::div_floor(bytes, k256);
        }
        if (fp.cells.count(a)) {
          fp.impossible = true;  // overlapping footprint within one conjunct
          return;
        }
        fp.cells[a] = byte;
        cur = cur + kOne;
      }
    };
    if (head_is(t, "data_at", 3, &args)) {
      Term cty = resolve_var(args[1]);
      auto size = ctype_size_of(cty);
      if (!size) return std::nullopt;
      BigInt v = eval_int(args[2]);
      if (!in_range(cty, v)) fp.impossible = true;
      if (!fp.impossible) put_range(eval_int(args[0]), *size, v);
      return fp;
    }
    if (head_is(t, "undef_data_at", 2, &args)) {
      auto size = ctype_size_of(resolve_var(args[1]));
      if (!size) return std::nullopt;
      put_range(eval_int(args[0]), *size, std::nullopt);
      return fp;
    }
    if (head_is(t, "undef_array_at", 3, &args)) {
      auto size = ctype_size_of(resolve_var(args[1]));
      if (!size) return std::nullopt;
      BigInt n = eval_int(args[2]);
      if (n.negative()) {
        fp.impossible = true;
        return fp;
      }
      BigInt total = n * BigInt(*size);
      if (!total.fits_int64() || total.to_int64() > 4096) return std::nullopt;
      put_range(eval_int(args[0]), total.to_int64(), std::nullopt);
      return fp;
    }
    if (head_is(t, "array_at", 3, &args)) {
      Term cty = resolve_var(args[1]);
      auto size = ctype_size_of(cty);
      if (!size) return std::nullopt;
      std::vector<Term> elems = eval_list(args[2]);
      BigInt cur = eval_int(args[0]);
      for (const auto& e : elems) {
        BigInt v = eval_int(e);
        if (!in_range(cty, v)) {
          fp.impossible = true;
          return fp;
        }
        put_range(cur, *size, v);
        if (fp.impossible) return fp;
        cur = cur + BigInt(*size);
      }
      return fp;
    }
    return std::nullopt;  // not footprint-deterministic
  }

  // Satisfaction of a list of conjuncts against exactly `h`.
  // --- satisfying-heap-set characterization (within bounds) ---
  //
  // For footprint-deterministic predicate structure the set of bounded heaps
  // satisfying a ground hprop term is small and computable directly, which
  // turns entailment and bi-entailment checks into set comparisons instead
  // of a scan over every bounded heap.
  struct HeapSet {
    bool all = false;  // every bounded heap (pure(p) with p true)
    std::vector<ConcreteHeap> heaps;  // sorted, deduplicated
  };

  bool heap_within_bounds(const ConcreteHeap& h) const {
    if (h.cells.size() > static_cast<size_t>(b.max_cells)) return false;
    for (const auto& [a, v] : h.cells) {
      if (a > static_cast<std::uint64_t>(b.addr_max)) return false;
      if (v > b.byte_max) return false;
    }
    return true;
  }

  static void sort_dedupe(std::vector<ConcreteHeap>& hs) {
    std::sort(hs.begin(), hs.end(), [](const ConcreteHeap& a, const ConcreteHeap& b2) {
      return a.cells < b2.cells;
    });
    hs.erase(std::unique(hs.begin(), hs.end()), hs.end());
  }

  // Expands a footprint into all bounded heaps matching it.
  void expand_footprint(const Footprint& fp, std::vector<ConcreteHeap>& out) {
    if (fp.impossible) return;
    for (const auto& f : fp.side)
      if (!eval_formula(f)) return;
    std::vector<std::uint64_t> free_addrs;
    ConcreteHeap base;
    for (const auto& [a, byte] : fp.cells) {
      if (a > static_cast<std::uint64_t>(b.addr_max)) return;
      if (byte) {
        if (*byte > b.byte_max) return;
        base.cells[a] = *byte;
      } else {
        free_addrs.push_back(a);
      }
    }
    if (fp.cells.size() > static_cast<size_t>(b.max_cells)) return;
    std::vector<int> vals(free_addrs.size(), 0);
    for (;;) {
      ConcreteHeap h = base;
      for (size_t i = 0; i < free_addrs.size(); ++i)
        h.cells[free_addrs[i]] = static_cast<std::uint8_t>(vals[i]);
      out.push_back(std::move(h));
      size_t i = 0;
      for (; i < vals.size(); ++i) {
        if (vals[i] < b.byte_max) {
          ++vals[i];
          break;
        }
        vals[i] = 0;
      }
      if (i == vals.size()) break;
    }
  }

  std::optional<HeapSet> characterize(const Term& t) {
    if (++depth > 100000) fail("evaluation budget exceeded", t);
    struct G {
      int& d;
      ~G() { --d; }
    } g{depth};
    if (auto r = resolve_spine(t)) return characterize(*r);
    std::vector<Term> args;
    if (auto fp = footprint(t)) {
      HeapSet s;
      expand_footprint(*fp, s.heaps);
      sort_dedupe(s.heaps);
      return s;
    }
    if (head_is(t, "pure", 1, &args)) {
      HeapSet s;
      if (eval_formula(args[0]))
        s.all = true;
      return s;
    }
    if (head_is(t, "hite", 3, &args))
      return characterize(eval_formula(args[0]) ? args[1] : args[2]);
    if (head_is(t, "hand", 2, &args)) {
      auto l = characterize(args[0]);
      if (!l) return std::nullopt;
      auto r = characterize(args[1]);
      if (!r) return std::nullopt;
      if (l->all) return r;
      if (r->all) return l;
      HeapSet s;
      std::set_intersection(l->heaps.begin(), l->heaps.end(), r->heaps.begin(), r->heaps.end(),
                            std::back_inserter(s.heaps),
                            [](const ConcreteHeap& a, const ConcreteHeap& b2) {
                              return a.cells < b2.cells;
                            });
      return s;
    }
    if (head_is(t, "**", 2, &args)) {
      auto l = characterize(args[0]);
      if (!l || l->all) return std::nullopt;
      auto r = characterize(args[1]);
      if (!r || r->all) return std::nullopt;
      HeapSet s;
      for (const auto& h1 : l->heaps)
        for (const auto& h2 : r->heaps) {
          if (!h1.disjoint(h2)) continue;
          ConcreteHeap u = h1.disjoint_union(h2);
          if (heap_within_bounds(u)) s.heaps.push_back(std::move(u));
        }
      sort_dedupe(s.heaps);
      return s;
    }
    if (t.is_app() && t.fn().is_const() && t.fn().name() == "hexists") {
      Term lam = t.arg();
      if (lam.is_var()) {
        if (const Binding* bind = lookup(lam)) lam = bind->term;
      }
      if (!lam.is_abs()) return std::nullopt;
      HeapSet s;
      for (const auto& v : domain_for(lam.bound_var().type(), t)) {
        push_binding(lam.bound_var(), v);
        auto inner = characterize(lam.body());
        pop_binding();
        if (!inner) return std::nullopt;
        if (inner->all) {
          s.all = true;
          return s;
        }
        s.heaps.insert(s.heaps.end(), inner->heaps.begin(), inner->heaps.end());
      }
      sort_dedupe(s.heaps);
      return s;
    }
    if (head_is(t, "hiter", 1, &args)) {
      std::vector<Term> hs = eval_list(args[0]);
      Term acc = th.kernel().constant("emp");
      for (size_t i = hs.size(); i-- > 0;) acc = th.mk_sep(hs[i], acc);
      return characterize(acc);
    }
    if (head_is(t, "fold_right", 3, &args) && args[0].is_const() && args[0].name() == "**") {
      std::vector<Term> hs = eval_list(args[1]);
      Term acc = args[2];
      for (size_t i = hs.size(); i-- > 0;) acc = th.mk_sep(hs[i], acc);
      return characterize(acc);
    }
    {
      std::vector<Term> as;
      Term head = strip_app(t, as);
      if (head.is_const()) {
        auto it = th.user_definitions().find(head.name());
        if (it != th.user_definitions().end()) {
          if (depth > b.unfold_depth * 64) fail("unfold budget exceeded", t);
          std::vector<Term> binders;
          Term eq = rules::strip_forall(it->second.conclusion(), binders);
          if (binders.size() != as.size()) fail("definition arity mismatch", t);
          TermSubst subst;
          for (size_t i = 0; i < as.size(); ++i) subst.emplace_back(binders[i], as[i]);
          return characterize(subst_term(subst, eq_rhs(eq)));
        }
      }
    }
    if (t.is_app() && t.fn().is_abs()) return characterize(beta_apply(t.fn(), t.arg()));
    return std::nullopt;
  }

  bool heapset_subset(const HeapSet& a, const HeapSet& bset) {
    if (bset.all) return true;
    if (a.all) return false;  // callers only use bounded sets on the left
    return std::includes(bset.heaps.begin(), bset.heaps.end(), a.heaps.begin(), a.heaps.end(),
                         [](const ConcreteHeap& x, const ConcreteHeap& y) {
                           return x.cells < y.cells;
                         });
  }


  Term resolve_var(const Term& t) {
    if (t.is_var())
      if (const Binding* bind = lookup(t)) return bind->term;
    return t;
  }

  bool eval_formula(const Term& t) {
    if (t.is_const() && t.name() == "T") return true;
    if (t.is_const() && t.name() == "F") return false;
    if (t.is_var()) {
      if (const Binding* bind = lookup(t); bind && bind->kind == Binding::K::Bool)
        return bind->bool_val;
      fail("free boolean variable " + t.name(), t);
    }
    std::vector<Term> args;
    if (head_is(t, "~", 1, &args)) return !eval_formula(args[0]);
    if (head_is(t, "&&", 2, &args)) return eval_formula(args[0]) && eval_formula(args[1]);
    if (head_is(t, "||", 2, &args)) return eval_formula(args[0]) || eval_formula(args[1]);
    if (head_is(t, "==>", 2, &args)) return !eval_formula(args[0]) || eval_formula(args[1]);
    if (head_is(t, "<", 2, &args)) return eval_int(args[0]) < eval_int(args[1]);
    if (head_is(t, "<=", 2, &args)) return eval_int(args[0]) <= eval_int(args[1]);
    if (head_is(t, ">", 2, &args)) return eval_int(args[0]) > eval_int(args[1]);
    if (head_is(t, ">=", 2, &args)) return eval_int(args[0]) >= eval_int(args[1]);
    if (is_eq(t)) {
      Term l = eq_lhs(t), r = eq_rhs(t);
      if (l.type() == integer_ty()) return eval_int(l) == eval_int(r);
      if (l.type() == bool_ty()) return eval_formula(l) == eval_formula(r);
      if (l.type() == ctype_ty()) {
        Term lc = resolve_var(l), rc = resolve_var(r);
        if (lc.is_const() && rc.is_const()) return lc.name() == rc.name();
        fail("cannot evaluate ctype equality", t);
      }
      if (l.type() == list_ty(integer_ty()) || l.type() == list_ty(hprop_ty())) {
        std::vector<Term> ll = eval_list(l), rl = eval_list(r);
        if (ll.size() != rl.size()) return false;
        for (size_t i = 0; i < ll.size(); ++i)
          if (!values_equal(ll[i], rl[i])) return false;
        return true;
      }
      if (l.type() == hprop_ty()) {
        auto cl = characterize(l);
        auto cr = cl ? characterize(r) : std::nullopt;
        if (cl && cr) {
          if (cl->all || cr->all)
            return cl->all == cr->all &&
                   (!cl->all || cl->heaps == cr->heaps);  // all vs all
          return cl->heaps == cr->heaps;
        }
        for (const auto& h : heaps())
          if (eval_hprop_rec(l, h) != eval_hprop_rec(r, h)) return false;
        return true;
      }
      fail("cannot evaluate equality at " + l.type().to_string(), t);
    }
    if (head_is(t, "|--", 2, &args)) {
      auto cl = characterize(args[0]);
      auto cr = cl ? characterize(args[1]) : std::nullopt;
      if (cl && cr) {
        if (cl->all) {
          // every bounded heap must satisfy the right side
          if (cr->all) return true;
          return cr->heaps.size() == heaps().size();
        }
        return heapset_subset(*cl, *cr);
      }
      for (const auto& h : heaps())
        if (eval_hprop_rec(args[0], h) && !eval_hprop_rec(args[1], h)) return false;
      return true;
    }
    // quantifiers
    if (t.is_app() && t.fn().is_const() && (t.fn().name() == "!" || t.fn().name() == "?") &&
        t.arg().is_abs()) {
      bool universal = t.fn().name() == "!";
      const Term& lam = t.arg();
      for (const auto& bind : decoded_domain_for(lam.bound_var().type(), t)) {
        push_prebound(lam.bound_var(), bind);
        bool r = eval_formula(lam.body());
        pop_binding();
        if (universal && !r) return false;
        if (!universal && r) return true;
      }
      return universal;
    }
    if (auto r = resolve_spine(t)) return eval_formula(*r);
    fail("cannot evaluate formula", t);
  }

  bool eval_conjuncts(const std::vector<Term>& conjuncts, const ConcreteHeap& h) {
    ConcreteHeap remaining = h;
    std::vector<Term> opaque;
    std::map<std::uint64_t, bool> claimed;
    for (const auto& c : conjuncts) {
      auto fp = footprint(c);
      if (!fp) {
        opaque.push_back(c);
        continue;
      }
      if (fp->impossible) return false;
      for (const auto& f : fp->side)
        if (!eval_formula(f)) return false;
      for (const auto& [addr, byte] : fp->cells) {
        auto it = remaining.cells.find(addr);
        if (it == remaining.cells.end()) return false;  // missing or already taken
        if (byte && *byte != it->second) return false;
        remaining.cells.erase(it);
      }
    }
    if (opaque.empty()) return remaining.cells.empty();
    if (opaque.size() == 1) return eval_hprop_rec(opaque[0], remaining);
    // subset enumeration over the remainder for the first opaque conjunct
    std::vector<std::pair<std::uint64_t, std::uint8_t>> cells(remaining.cells.begin(),
                                                              remaining.cells.end());
    size_t n = cells.size();
    std::vector<Term> rest(opaque.begin() + 1, opaque.end());
    for (size_t mask = 0; mask < (size_t{1} << n); ++mask) {
      ConcreteHeap h1, h2;
      for (size_t i = 0; i < n; ++i)
        ((mask >> i) & 1 ? h1 : h2).cells.insert(cells[i]);
      if (eval_hprop_rec(opaque[0], h1) && eval_conjuncts(rest, h2)) return true;
    }
    return false;
  }

  bool eval_sep(const Term& t, const ConcreteHeap& h) {
    std::vector<Term> conjuncts;
    std::function<void(const Term&)> flatten = [&](const Term& cur) {
      std::vector<Term> args;
      if (head_is(cur, "**", 2, &args)) {
        flatten(args[0]);
        flatten(args[1]);
      } else {
        conjuncts.push_back(cur);
      }
    };
    flatten(t);
    return eval_conjuncts(conjuncts, h);
  }

  bool eval_hprop_rec(const Term& t, const ConcreteHeap& h) {
    if (++depth > 100000) fail("evaluation budget exceeded", t);
    struct G {
      int& d;
      ~G() { --d; }
    } g{depth};
    std::vector<Term> args;
    if (t.is_const() && t.name() == "emp") return h.cells.empty();
    if (head_is(t, "pure", 1, &args)) return eval_formula(args[0]);
    if (head_is(t, "fact", 1, &args)) return h.cells.empty() && eval_formula(args[0]);
    if (head_is(t, "hand", 2, &args))
      return eval_hprop_rec(args[0], h) && eval_hprop_rec(args[1], h);
    if (head_is(t, "hite", 3, &args))
      return eval_formula(args[0]) ? eval_hprop_rec(args[1], h) : eval_hprop_rec(args[2], h);
    if (head_is(t, "data_at", 3, &args)) {
      Term cty = resolve_var(args[1]);
      BigInt addr = eval_int(args[0]);
      BigInt v = eval_int(args[2]);
      if (!in_range(cty, v)) return false;
      ConcreteHeap expect;
      if (!data_cells(cty, addr, v, expect)) return false;
      return h == expect;
    }
    if (head_is(t, "undef_data_at", 2, &args)) {
      BigInt addr = eval_int(args[0]);
      auto size = ctype_size_of(resolve_var(args[1]));
      if (!size || addr.negative()) return false;
      if (h.cells.size() != static_cast<size_t>(*size)) return false;
      BigInt cur = addr;
      for (long long i = 0; i < *size; ++i) {
        if (!cur.fits_int64() ||
            !h.cells.count(static_cast<std::uint64_t>(cur.to_int64())))
          return false;
        cur = cur + BigInt(1);
      }
      return true;
    }
    if (head_is(t, "array_at", 3, &args)) {
      Term cty = resolve_var(args[1]);
      BigInt addr = eval_int(args[0]);
      auto size = ctype_size_of(cty);
      if (!size) return false;
      std::vector<Term> elems = eval_list(args[2]);
      ConcreteHeap expect;
      BigInt cur = addr;
      for (const auto& e : elems) {
        BigInt v = eval_int(e);
        if (!in_range(cty, v)) return false;
        if (!data_cells(cty, cur, v, expect)) return false;
        cur = cur + BigInt(*size);
      }
      return h == expect;
    }
    if (head_is(t, "undef_array_at", 3, &args)) {
      BigInt addr = eval_int(args[0]);
      auto size = ctype_size_of(resolve_var(args[1]));
      BigInt n = eval_int(args[2]);
      if (!size || n.negative()) return false;
      if (n.is_zero()) return h.cells.empty();
      if (addr.negative()) return false;
      BigInt total = n * BigInt(*size);
      if (!total.fits_int64()) return false;
      if (h.cells.size() != static_cast<size_t>(total.to_int64())) return false;
      BigInt cur = addr;
      for (long long i = 0; i < total.to_int64(); ++i) {
        if (!cur.fits_int64() ||
            !h.cells.count(static_cast<std::uint64_t>(cur.to_int64())))
          return false;
        cur = cur + BigInt(1);
      }
      return true;
    }
    if (head_is(t, "**", 2, &args)) return eval_sep(t, h);
    if (t.is_app() && t.fn().is_const() && t.fn().name() == "hexists") {
      Term lam = t.arg();
      if (lam.is_var()) {
        if (const Binding* bind = lookup(lam)) lam = bind->term;
      }
      if (lam.is_abs()) {
        for (const auto& v : domain_for(lam.bound_var().type(), t)) {
          push_binding(lam.bound_var(), v);
          bool r = eval_hprop_rec(lam.body(), h);
          pop_binding();
          if (r) return true;
        }
        return false;
      }
    }
    if (head_is(t, "hiter", 1, &args)) {
      std::vector<Term> elems = eval_list(args[0]);
      Term folded = th.kernel().constant("emp");
      for (size_t i = elems.size(); i-- > 0;) folded = th.mk_sep(elems[i], folded);
      return eval_hprop_rec(folded, h);
    }
    {
      // fold_right (**) l base
      std::vector<Term> fr;
      if (head_is(t, "fold_right", 3, &fr) && fr[0].is_const() && fr[0].name() == "**") {
        std::vector<Term> elems = eval_list(fr[1]);
        Term folded = fr[2];
        for (size_t i = elems.size(); i-- > 0;) folded = th.mk_sep(elems[i], folded);
        return eval_hprop_rec(folded, h);
      }
    }
    // user-defined predicate: unfold its definition
    {
      std::vector<Term> as;
      Term head = strip_app(t, as);
      if (head.is_const()) {
        auto it = th.user_definitions().find(head.name());
        if (it != th.user_definitions().end()) {
          if (depth > b.unfold_depth * 64) fail("unfold budget exceeded", t);
          std::vector<Term> binders;
          Term eq = rules::strip_forall(it->second.conclusion(), binders);
          if (binders.size() != as.size()) fail("definition arity mismatch", t);
          TermSubst subst;
          for (size_t i = 0; i < as.size(); ++i) subst.emplace_back(binders[i], as[i]);
          return eval_hprop_rec(subst_term(subst, eq_rhs(eq)), h);
        }
      }
    }
    if (auto r = resolve_spine(t)) return eval_hprop_rec(*r, h);
    fail("unknown predicate head", t);
  }

 private:
  std::vector<ConcreteHeap> heap_cache_;
};

}  // namespace

Bounds default_bounds(const sep::Theory& th) {
  Bounds b;
  const Kernel& k = th.kernel();
  Term tchar = k.constant("Tchar");
  auto lit = [&](long long v) {
    return v < 0 ? mk_app(k.constant("--"), mk_int_literal(BigInt(-v)))
                 : mk_int_literal(BigInt(v));
  };
  b.hprop_pool.push_back(k.constant("emp"));
  b.hprop_pool.push_back(th.mk_fact(k.constant("T")));
  b.hprop_pool.push_back(th.mk_fact(k.constant("F")));
  for (long long a : {0, 1, 3})
    for (long long v : {0, 2}) b.hprop_pool.push_back(th.mk_data_at(lit(a), tchar, lit(v)));
  b.hprop_pool.push_back(th.mk_undef_data_at(lit(1), tchar));
  b.hprop_pool.push_back(th.mk_undef_data_at(lit(5), tchar));
  b.hprop_pool.push_back(
      th.mk_sep(th.mk_data_at(lit(2), tchar, lit(1)), th.mk_data_at(lit(6), tchar, lit(3))));

  Term x = mk_var("x", integer_ty());
  b.hprop_fun_pool.push_back(mk_abs(x, k.constant("emp")));
  b.hprop_fun_pool.push_back(mk_abs(x, th.mk_data_at(x, tchar, lit(1))));
  b.hprop_fun_pool.push_back(mk_abs(x, th.mk_data_at(lit(2), tchar, x)));
  b.hprop_fun_pool.push_back(
      mk_abs(x, th.mk_fact(mk_app(mk_app(k.constant("<="), lit(0)), x))));
  b.hprop_fun_pool.push_back(
      mk_abs(x, th.mk_sep(th.mk_fact(mk_app(mk_app(k.constant("<"), lit(0)), x)),
                          th.mk_undef_data_at(x, tchar))));

  HolType li = list_ty(integer_ty());
  Term l = mk_var("l", li);
  Term len = mk_app(k.mk_const("length", fun_ty(li, integer_ty())), l);
  b.list_pred_pool.push_back(mk_abs(l, mk_app(mk_app(k.constant("<="), lit(0)), len)));
  b.list_pred_pool.push_back(mk_abs(l, mk_app(mk_app(k.constant("<="), len), lit(2))));
  b.list_pred_pool.push_back(
      mk_abs(l, k.mk_eq(mk_app(k.mk_const("rev", fun_ty(li, li)),
                               mk_app(k.mk_const("rev", fun_ty(li, li)), l)),
                        l)));
  return b;
}

bool eval_hprop(const sep::Theory& th, const Term& t, const ConcreteHeap& h, const Bounds& b) {
  Eval e(th, b);
  return e.eval_hprop_rec(t, h);
}

bool eval_bool(const sep::Theory& th, const Term& t, const Bounds& b) {
  Eval e(th, b);
  return e.eval_formula(t);
}

bool entails_semantically(const sep::Theory& th, const Term& lhs, const Term& rhs,
                          const Bounds& b) {
  Term statement = th.mk_entail(lhs, rhs);
  std::vector<Term> frees = free_vars(statement);
  Theorem closed;  // not a theorem, just reuse forall-closing
  Term t = statement;
  for (size_t i = frees.size(); i-- > 0;) t = rules::mk_forall(th.kernel(), frees[i], t);
  return eval_bool(th, t, b);
}

namespace {

void collect_term_tyvars(const Term& t, std::vector<HolType>& out) {
  collect_tyvars(t.type(), out);
  switch (t.kind()) {
    case Term::Kind::App:
      collect_term_tyvars(t.fn(), out);
      collect_term_tyvars(t.arg(), out);
      break;
    case Term::Kind::Abs:
      collect_term_tyvars(t.bound_var(), out);
      collect_term_tyvars(t.body(), out);
      break;
    default:
      break;
  }
}

}  // namespace

bool check_statement(const sep::Theory& th, const Term& statement, const Bounds& b,
                     std::string* failure) {
  // polymorphic axioms are checked at element type integer
  Term stmt = statement;
  std::vector<HolType> tyvars;
  collect_term_tyvars(stmt, tyvars);
  if (!tyvars.empty()) {
    TypeSubst ts;
    for (const auto& tv : tyvars) ts.emplace_back(tv, integer_ty());
    stmt = subst_term_types(ts, stmt);
  }
  Eval e(th, b);
  std::vector<Term> binders;
  Term body = rules::strip_forall(stmt, binders);
  size_t hprop_binders = 0;
  for (const auto& v : binders)
    if (v.type() == hprop_ty()) ++hprop_binders;
  e.small_pools = hprop_binders >= 3;
  std::function<bool(size_t)> rec = [&](size_t i) -> bool {
    if (i == binders.size()) {
      if (e.eval_formula(body)) return true;
      if (failure) {
        TermSubst subst;
        for (const auto& [var, bind] : e.env) subst.emplace_back(var, bind.term);
        *failure = quote::print_term(subst_term(subst, body));
      }
      return false;
    }
    for (const auto& bind : e.decoded_domain_for(binders[i].type(), stmt)) {
      e.push_prebound(binders[i], bind);
      bool ok = rec(i + 1);
      e.pop_binding();
      if (!ok) return false;
    }
    return true;
  };
  return rec(0);
}

}  // namespace cstar::oracle
