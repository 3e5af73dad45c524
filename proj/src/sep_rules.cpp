// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0

#include "cstar/sep_rules.hpp"

#include <algorithm>
#include <functional>

#include "cstar/quote.hpp"

namespace cstar::sep {

using rules::ap_term;
using rules::ap_thm;
using rules::disch;
using rules::gen;
using rules::mp;
using rules::spec;
using rules::specialize;

namespace {

bool is_refl_eq(const Theorem& th) {
  return is_eq(th.conclusion()) &&
         alpha_eq(eq_lhs(th.conclusion()), eq_rhs(th.conclusion()));
}

// trans that collapses reflexive steps
Theorem trans2(const Kernel& k, const Theorem& a, const Theorem& b) {
  if (is_refl_eq(a)) return b;
  if (is_refl_eq(b)) return a;
  return k.trans(a, b);
}

// congruence A ** conv / conv ** B
Theorem sep_cong(const Theory& th, const Theorem& left_eq, const Theorem& right_eq) {
  const Kernel& k = th.kernel();
  if (is_refl_eq(left_eq) && is_refl_eq(right_eq))
    return k.refl(
        th.mk_sep(eq_lhs(left_eq.conclusion()), eq_lhs(right_eq.conclusion())));
  return k.mk_comb_rule(ap_term(k, k.constant("**"), left_eq), right_eq);
}

// ---------------------------------------------------------------------------
// First-order matching for rewrite
// ---------------------------------------------------------------------------

struct Matcher {
  const std::vector<Term>& pattern_vars;
  TermSubst term_subst;
  TypeSubst type_subst;

  bool is_pattern_var(const Term& v) const {
    for (const auto& pv : pattern_vars)
      if (pv.name() == v.name()) return true;  // types may differ pre-instantiation
    return false;
  }

  bool match(const Term& pattern, const Term& t,
             std::vector<std::pair<Term, Term>>& binders) {
    switch (pattern.kind()) {
      case Term::Kind::Var: {
        // bound variables must correspond positionally
        for (size_t i = binders.size(); i-- > 0;) {
          if (binders[i].first == pattern) return binders[i].second == t;
          if (binders[i].second == t) return false;
        }
        if (!is_pattern_var(pattern)) return t.is_var() && t.name() == pattern.name();
        if (!match_type(pattern.type(), t.type(), type_subst)) return false;
        // the match must not capture target-side bound variables
        for (const auto& [pv, tv] : binders)
          if (is_free_in(tv, t)) return false;
        for (auto& [from, to] : term_subst)
          if (from.name() == pattern.name()) return alpha_eq(to, t);
        term_subst.emplace_back(pattern, t);
        return true;
      }
      case Term::Kind::Const:
        return t.is_const() && t.name() == pattern.name() &&
               match_type(pattern.type(), t.type(), type_subst);
      case Term::Kind::App:
        return t.is_app() && match(pattern.fn(), t.fn(), binders) &&
               match(pattern.arg(), t.arg(), binders);
      case Term::Kind::Abs: {
        if (!t.is_abs()) return false;
        if (!match_type(pattern.bound_var().type(), t.bound_var().type(), type_subst))
          return false;
        binders.emplace_back(pattern.bound_var(), t.bound_var());
        bool ok = match(pattern.body(), t.body(), binders);
        binders.pop_back();
        return ok;
      }
    }
    return false;
  }
};

// instantiates a forall-quantified equality so its left side equals `at`
std::optional<Theorem> instantiate_eq(const Kernel& k, const Theorem& eq, const Term& at) {
  std::vector<Term> binders;
  Term body = rules::strip_forall(eq.conclusion(), binders);
  if (!is_eq(body)) return std::nullopt;
  Matcher m{binders, {}, {}};
  std::vector<std::pair<Term, Term>> benv;
  if (!m.match(eq_lhs(body), at, benv)) return std::nullopt;
  Theorem inst = eq;
  if (!m.type_subst.empty()) inst = k.inst_type(m.type_subst, inst);
  std::vector<Term> binders2;
  rules::strip_forall(inst.conclusion(), binders2);
  std::vector<Term> args;
  for (const auto& b : binders2) {
    bool found = false;
    for (const auto& [from, to] : m.term_subst)
      if (from.name() == b.name()) {
        args.push_back(to);
        found = true;
        break;
      }
    if (!found) return std::nullopt;  // variable of the rule not fixed by its left side
  }
  Theorem out = specialize(k, inst, args);
  if (!alpha_eq(eq_lhs(out.conclusion()), at)) return std::nullopt;
  return out;
}

// rewrite conversion: |- t = t', first leftmost-topdown match replaced
Theorem rewrite_conv(const Kernel& k, const Theorem& eq, const Term& t, bool& done) {
  if (!done) {
    if (auto inst = instantiate_eq(k, eq, t)) {
      done = true;
      return *inst;
    }
  }
  switch (t.kind()) {
    case Term::Kind::App: {
      Theorem f = rewrite_conv(k, eq, t.fn(), done);
      Theorem x = rewrite_conv(k, eq, t.arg(), done);
      if (is_refl_eq(f) && is_refl_eq(x)) return k.refl(t);
      return k.mk_comb_rule(f, x);
    }
    case Term::Kind::Abs: {
      Theorem body = rewrite_conv(k, eq, t.body(), done);
      if (is_refl_eq(body)) return k.refl(t);
      return k.abs_rule(t.bound_var(), body);
    }
    default:
      return k.refl(t);
  }
}

}  // namespace

Theorem rewrite_once(const Kernel& k, const Theorem& eq, const Term& t) {
  std::vector<Term> binders;
  Term body = rules::strip_forall(eq.conclusion(), binders);
  if (!is_eq(body)) throw RuleError("rewrite: rule is not an equality");
  bool done = false;
  return rewrite_conv(k, eq, t, done);
}

Theorem rewrite_rule_list(const Kernel& k, const std::vector<Theorem>& eqs, Theorem th,
                          int bound) {
  int replacements = 0;
  for (;;) {
    bool progressed = false;
    for (const auto& eq : eqs) {
      for (;;) {
        Theorem conv = rewrite_once(k, eq, th.conclusion());
        if (is_refl_eq(conv)) break;
        th = k.eq_mp(conv, th);
        progressed = true;
        if (++replacements > bound)
          throw RuleError("rewrite_rule_list: divergence (replacement bound exceeded)");
      }
    }
    if (!progressed) break;
  }
  return th;
}

// ---------------------------------------------------------------------------
// Structural conversions
// ---------------------------------------------------------------------------

Theorem hsep_comm_thm(const Theory& th, const Term& t) {
  const Kernel& k = th.kernel();
  if (!(t.type() == hprop_ty())) throw RuleError("hsep_comm: argument is not an hprop");
  std::vector<Term> avoid = free_vars(t);
  std::string name = "hp";
  for (int i = 0; is_free_in(mk_var(name, hprop_ty()), t); ++i)
    name = "hp_" + std::to_string(i);
  Term hp = mk_var(name, hprop_ty());
  Theorem inst = specialize(k, th.axiom("hsep-comm"), {t, hp});
  return gen(k, hp, inst);
}

Theorem hsep_move_thm(const Theory& th, const Term& t) {
  const Kernel& k = th.kernel();
  if (!(t.type() == hprop_ty())) throw RuleError("hsep_move: argument is not an hprop");
  auto fresh = [&](const std::string& base) {
    std::string name = base;
    for (int i = 0; is_free_in(mk_var(name, hprop_ty()), t); ++i)
      name = base + "_" + std::to_string(i);
    return mk_var(name, hprop_ty());
  };
  Term hp1 = fresh("hp1"), hp2 = fresh("hp2");
  // hp1 ** (t ** hp2) = (hp1 ** t) ** hp2 = (t ** hp1) ** hp2 = t ** (hp1 ** hp2)
  Theorem a1 = k.symm(specialize(k, th.axiom("hsep-assoc"), {hp1, t, hp2}));
  Theorem comm = specialize(k, th.axiom("hsep-comm"), {hp1, t});
  Theorem a2 = ap_thm(k, ap_term(k, k.constant("**"), comm), hp2);
  Theorem a3 = specialize(k, th.axiom("hsep-assoc"), {t, hp1, hp2});
  Theorem chained = k.trans(k.trans(a1, a2), a3);
  return gen(k, hp1, gen(k, hp2, chained));
}

namespace {

// |- (exists x. body) -|- (exists x. body') from a conversion on the body
Theorem hexists_cong(const Theory& th, const Term& bound_var, const Theorem& body_eq) {
  const Kernel& k = th.kernel();
  Theorem lam_eq = k.abs_rule(bound_var, body_eq);
  Term hex = k.mk_const("hexists", fun_ty(fun_ty(bound_var.type(), hprop_ty()), hprop_ty()));
  return ap_term(k, hex, lam_eq);
}

// |- (hexists P) ** q = exists x. (P x ** q), fully beta-reduced
Theorem hexists_sep_instance(const Theory& th, bool left, const Term& lam, const Term& q) {
  const Kernel& k = th.kernel();
  Theorem ax = th.axiom(left ? "hexists-sep-left" : "hexists-sep-right");
  TypeSubst ts;
  ts.emplace_back(HolType::var("a"), lam.bound_var().type());
  ax = k.inst_type(ts, ax);
  Theorem inst = left ? specialize(k, ax, {lam, q}) : specialize(k, ax, {q, lam});
  // reduce the (\x. P x ** q) redexes on the right side
  Term rhs = eq_rhs(inst.conclusion());
  Theorem rhs_conv = rules::beta_norm_conv(k, rhs);
  return trans2(k, inst, rhs_conv);
}

bool is_hexists_term(const Theory& th, const Term& t) { return th.is_hexists(t); }

// Pulls every conjunct-level existential to the front: |- t = exists xs. core
Theorem pull_exists_conv(const Theory& th, const Term& t) {
  const Kernel& k = th.kernel();
  if (is_hexists_term(th, t)) {
    const Term& lam = t.arg();
    Theorem inner = pull_exists_conv(th, lam.body());
    if (is_refl_eq(inner)) return k.refl(t);
    return hexists_cong(th, lam.bound_var(), inner);
  }
  if (th.is_sep(t)) {
    Theorem l = pull_exists_conv(th, binary_lhs(t));
    Theorem r = pull_exists_conv(th, binary_rhs(t));
    Theorem cur = sep_cong(th, l, r);
    if (is_refl_eq(cur)) cur = k.refl(t);
    // now hoist from (exists..) ** B and A ** (exists..)
    for (;;) {
      Term shape = eq_rhs(cur.conclusion());
      if (is_hexists_term(th, binary_lhs(shape))) {
        Term lam = binary_lhs(shape).arg();
        Theorem step = hexists_sep_instance(th, true, lam, binary_rhs(shape));
        cur = trans2(k, cur, step);
        // recurse inside the new binder
        Term now = eq_rhs(cur.conclusion());
        Theorem inner = pull_exists_conv(th, now.arg().body());
        if (!is_refl_eq(inner))
          cur = trans2(k, cur, hexists_cong(th, now.arg().bound_var(), inner));
        return cur;
      }
      if (is_hexists_term(th, binary_rhs(shape))) {
        Term lam = binary_rhs(shape).arg();
        Theorem step = hexists_sep_instance(th, false, lam, binary_lhs(shape));
        cur = trans2(k, cur, step);
        Term now = eq_rhs(cur.conclusion());
        Theorem inner = pull_exists_conv(th, now.arg().body());
        if (!is_refl_eq(inner))
          cur = trans2(k, cur, hexists_cong(th, now.arg().bound_var(), inner));
        return cur;
      }
      break;
    }
    return cur;
  }
  return k.refl(t);
}

// conversion under all leading existentials
Theorem under_binders_conv(const Theory& th, const Term& t,
                           const std::function<Theorem(const Term&)>& conv) {
  const Kernel& k = th.kernel();
  if (is_hexists_term(th, t)) {
    const Term& lam = t.arg();
    Theorem inner = under_binders_conv(th, lam.body(), conv);
    if (is_refl_eq(inner)) return k.refl(t);
    return hexists_cong(th, lam.bound_var(), inner);
  }
  return conv(t);
}

// right-associate and drop emp units; input and output are binder-free
Theorem flatten_conv(const Theory& th, const Term& t) {
  const Kernel& k = th.kernel();
  Theorem cur = k.refl(t);
  std::vector<Theorem> rules_list = {th.axiom("hsep-assoc"), th.axiom("hsep-emp-left"),
                                     th.axiom("hsep-emp-right")};
  int guard = 0;
  for (;;) {
    bool progressed = false;
    for (const auto& eq : rules_list) {
      for (;;) {
        Theorem step = rewrite_once(k, eq, eq_rhs(cur.conclusion()));
        if (is_refl_eq(step)) break;
        cur = trans2(k, cur, step);
        progressed = true;
        if (++guard > 10000) throw RuleError("flatten: divergence");
      }
    }
    if (!progressed) break;
  }
  return cur;
}

// |- t = target ** rest for right-associated t; rest keeps residual order
Theorem lift_conv(const Theory& th, const Term& target, const Term& t) {
  const Kernel& k = th.kernel();
  if (th.is_sep(t)) {
    Term l = binary_lhs(t), r = binary_rhs(t);
    if (alpha_eq(l, target)) return k.refl(t);
    if (th.is_sep(r) || !alpha_eq(r, target)) {
      if (!th.is_sep(r)) throw RuleError("sep_lift: no conjunct matching " +
                                         quote::print_term(target));
      Theorem inner = lift_conv(th, target, r);  // |- r = target ** r'
      Theorem step1 = sep_cong(th, k.refl(l), inner);  // |- l ** r = l ** (target ** r')
      Term shaped = eq_rhs(step1.conclusion());
      // |- l ** (target ** r') = target ** (l ** r')
      Theorem move = specialize(k, hsep_move_thm(th, target),
                                {binary_lhs(shaped), binary_rhs(binary_rhs(shaped))});
      return trans2(k, step1, move);
    }
    // target at far right: l ** target = target ** l
    return specialize(k, th.axiom("hsep-comm"), {l, r});
  }
  if (alpha_eq(t, target)) return k.refl(t);
  throw RuleError("sep_lift: no conjunct matching " + quote::print_term(target));
}

// |- t = right-assoc conjunction in exactly `order` (a permutation of t's
// conjuncts, alpha-matched)
Theorem perm_conv(const Theory& th, const Term& t, const std::vector<Term>& order) {
  const Kernel& k = th.kernel();
  if (order.size() <= 1) return k.refl(t);
  Theorem lifted = lift_conv(th, order[0], t);  // |- t = c0 ** rest
  Term shaped = eq_rhs(lifted.conclusion());
  std::vector<Term> rest_order(order.begin() + 1, order.end());
  Theorem inner = perm_conv(th, binary_rhs(shaped), rest_order);
  return trans2(k, lifted, sep_cong(th, k.refl(binary_lhs(shaped)), inner));
}

std::vector<Term> flat_conjuncts(const Theory& th, const Term& t) { return th.conjuncts(t); }

// canonical ordering: facts first, spatials after, stable
std::vector<Term> canonical_order(const Theory& th, const std::vector<Term>& conjs) {
  std::vector<Term> facts, spatials;
  for (const auto& c : conjs) (th.is_fact(c) ? facts : spatials).push_back(c);
  facts.insert(facts.end(), spatials.begin(), spatials.end());
  return facts;
}

}  // namespace

Theorem sep_normalize_thm(const Theory& th, const Term& t) {
  const Kernel& k = th.kernel();
  if (!(t.type() == hprop_ty())) throw RuleError("sep_normalize: argument is not an hprop");
  Theorem pulled = pull_exists_conv(th, t);
  Theorem core_conv = under_binders_conv(th, eq_rhs(pulled.conclusion()), [&](const Term& c) {
    Theorem flat = flatten_conv(th, c);
    Term flat_term = eq_rhs(flat.conclusion());
    std::vector<Term> conjs = flat_conjuncts(th, flat_term);
    if (conjs.size() > 1) {
      std::vector<Term> target = canonical_order(th, conjs);
      bool same = true;
      for (size_t i = 0; i < conjs.size(); ++i)
        if (!(conjs[i] == target[i])) same = false;
      if (!same) flat = trans2(k, flat, perm_conv(th, flat_term, target));
    }
    return flat;
  });
  return trans2(k, pulled, core_conv);
}

Theorem sep_lift_thm(const Theory& th, const Term& target, const Term& t) {
  const Kernel& k = th.kernel();
  Theorem flat = flatten_conv(th, t);
  return trans2(k, flat, lift_conv(th, target, eq_rhs(flat.conclusion())));
}

Theorem sep_lift_one_thm(const Theory& th, const Term& target, const Term& t) {
  return lift_conv(th, target, t);
}

std::optional<Theorem> sep_reorder_thm(const Theory& th, const Term& t1, const Term& t2) {
  const Kernel& k = th.kernel();
  Theorem n1 = sep_normalize_thm(th, t1);
  Theorem n2 = sep_normalize_thm(th, t2);
  // strip matching binder prefixes
  Term c1 = eq_rhs(n1.conclusion());
  Term c2 = eq_rhs(n2.conclusion());
  std::vector<Term> bs1, bs2;
  while (th.is_hexists(c1)) {
    bs1.push_back(c1.arg().bound_var());
    c1 = c1.arg().body();
  }
  while (th.is_hexists(c2)) {
    bs2.push_back(c2.arg().bound_var());
    c2 = c2.arg().body();
  }
  if (bs1.size() != bs2.size()) return std::nullopt;
  TermSubst rename;
  for (size_t i = 0; i < bs1.size(); ++i) {
    if (!(bs1[i].type() == bs2[i].type())) return std::nullopt;
    rename.emplace_back(bs2[i], bs1[i]);
  }
  Term c2r = subst_term(rename, c2);
  // multiset match of conjuncts
  std::vector<Term> conj1 = flat_conjuncts(th, c1);
  std::vector<Term> conj2 = flat_conjuncts(th, c2r);
  if (conj1.size() != conj2.size()) return std::nullopt;
  std::vector<bool> used(conj1.size(), false);
  std::vector<Term> order;
  for (const auto& want : conj2) {
    bool found = false;
    for (size_t i = 0; i < conj1.size(); ++i) {
      if (used[i]) continue;
      if (alpha_eq(conj1[i], want)) {
        used[i] = true;
        order.push_back(conj1[i]);
        found = true;
        break;
      }
    }
    if (!found) return std::nullopt;
  }
  try {
    Theorem permed = under_binders_conv(th, eq_rhs(n1.conclusion()), [&](const Term& core) {
      // rename-sensitive: binder names inside differ between the two
      // normalized forms only up to alpha, which trans absorbs
      std::vector<Term> inner_order;
      std::vector<Term> cs = flat_conjuncts(th, core);
      std::vector<bool> used2(cs.size(), false);
      for (const auto& want : conj2) {
        for (size_t i = 0; i < cs.size(); ++i) {
          if (used2[i]) continue;
          if (alpha_eq(cs[i], want)) {
            used2[i] = true;
            inner_order.push_back(cs[i]);
            break;
          }
        }
      }
      if (inner_order.size() != cs.size())
        throw RuleError("sep_reorder: conjunct mismatch");
      return perm_conv(th, core, inner_order);
    });
    Theorem left = trans2(k, n1, permed);
    return trans2(k, left, k.symm(n2));
  } catch (const RuleError&) {
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Entailment plumbing
// ---------------------------------------------------------------------------

Theorem entail_refl_thm(const Theory& th, const Term& h) {
  return spec(th.kernel(), th.axiom("entail-refl"), h);
}

Theorem entail_of_eq(const Theory& th, const Theorem& eq) {
  const Kernel& k = th.kernel();
  if (!is_eq(eq.conclusion()) || !(eq_lhs(eq.conclusion()).type() == hprop_ty()))
    throw RuleError("entail_of_eq: premise is not an hprop equality");
  Term a = eq_lhs(eq.conclusion());
  Theorem refl_ent = entail_refl_thm(th, a);  // |- a |-- a
  Term partial = mk_app(k.constant("|--"), a);
  Theorem prop_eq = ap_term(k, partial, eq);  // |- (a |-- a) = (a |-- b)
  return k.eq_mp(prop_eq, refl_ent);
}

Theorem entail_trans_thm(const Theory& th, const Theorem& ab, const Theorem& bc) {
  const Kernel& k = th.kernel();
  if (!is_binary(ab.conclusion(), "|--") || !is_binary(bc.conclusion(), "|--"))
    throw RuleError("entail_trans: premises are not entailments");
  Term a = binary_lhs(ab.conclusion());
  Term b = binary_rhs(ab.conclusion());
  Term c = binary_rhs(bc.conclusion());
  if (!alpha_eq(b, binary_lhs(bc.conclusion())))
    throw RuleError("entail_trans: middle terms differ");
  Theorem inst = specialize(k, th.axiom("entail-trans"), {a, b, c});
  return mp(k, mp(k, inst, ab), bc);
}

Theorem entail_frame(const Theory& th, const Theorem& ent, const Term& frame) {
  const Kernel& k = th.kernel();
  if (!is_binary(ent.conclusion(), "|--"))
    throw RuleError("entail_frame: premise is not an entailment");
  Theorem inst = specialize(k, th.axiom("hsep-cancel-right"),
                            {binary_lhs(ent.conclusion()), binary_rhs(ent.conclusion()), frame});
  return mp(k, inst, ent);
}

Theorem exists_intro_thm(const Theory& th, const std::vector<Term>& witnesses,
                         const Term& target) {
  const Kernel& k = th.kernel();
  // peel binders, substituting witnesses outside-in
  std::vector<Term> layers;  // target with i outer binders instantiated
  Term cur = target;
  layers.push_back(cur);
  for (const auto& w : witnesses) {
    if (!th.is_hexists(cur))
      throw RuleError("exists_intro: more witnesses than existential binders");
    const Term& lam = cur.arg();
    if (!(lam.bound_var().type() == w.type()))
      throw RuleError("exists_intro: witness type mismatch for " + lam.bound_var().name());
    cur = subst_term({{lam.bound_var(), w}}, lam.body());
    layers.push_back(cur);
  }
  // chain from the innermost instance upward
  Theorem chain;  // |- layers[n] |-- layers[i]
  for (size_t i = witnesses.size(); i-- > 0;) {
    const Term& ex_term = layers[i];  // exists x. B
    const Term& lam = ex_term.arg();
    Theorem ax = th.axiom("hexists-intro");
    TypeSubst ts;
    ts.emplace_back(HolType::var("a"), witnesses[i].type());
    ax = k.inst_type(ts, ax);
    Theorem inst = specialize(k, ax, {lam, witnesses[i]});  // |- (\x. B) w |-- exists x. B
    // reduce the redex on the left
    Term redex = binary_lhs(inst.conclusion());
    Theorem lhs_eq = k.beta(redex);  // |- (\x. B) w = B[w]
    Theorem prop_eq = k.mk_comb_rule(ap_term(k, k.constant("|--"), lhs_eq),
                                     k.refl(binary_rhs(inst.conclusion())));
    Theorem step = k.eq_mp(prop_eq, inst);  // |- B[w] |-- exists x. B
    chain = chain.valid() ? entail_trans_thm(th, chain, step) : step;
  }
  if (!chain.valid()) return entail_refl_thm(th, target);
  return chain;
}

// ---------------------------------------------------------------------------
// local_apply and friends
// ---------------------------------------------------------------------------

namespace {

struct OpenedState {
  Theorem norm;             // |- state = exists xs. core
  std::vector<Term> binders;
  Term core;
  std::vector<Term> conjuncts;
};

OpenedState open_state(const Theory& th, const Term& state) {
  OpenedState s;
  s.norm = sep_normalize_thm(th, state);
  Term cur = eq_rhs(s.norm.conclusion());
  while (th.is_hexists(cur)) {
    s.binders.push_back(cur.arg().bound_var());
    cur = cur.arg().body();
  }
  s.core = cur;
  s.conjuncts = th.conjuncts(cur);
  return s;
}

// merges every fact conjunct into a guard Q and returns
// |- core = fact(Q) ** rest  (rest emp-padded when no spatials remain)
struct FactSplit {
  Theorem conv;  // |- core = fact(Q) ** rest
  Term guard;    // Q
  Term rest;
};

FactSplit split_facts(const Theory& th, const Term& core,
                      const std::vector<Term>& skip_conjuncts = {}) {
  const Kernel& k = th.kernel();
  std::vector<Term> conjs = th.conjuncts(core);
  std::vector<Term> facts, others;
  std::vector<bool> skipped(conjs.size(), false);
  std::vector<bool> skip_used(skip_conjuncts.size(), false);
  for (size_t i = 0; i < conjs.size(); ++i) {
    bool skip = false;
    for (size_t j = 0; j < skip_conjuncts.size(); ++j)
      if (!skip_used[j] && alpha_eq(conjs[i], skip_conjuncts[j])) {
        skip_used[j] = true;
        skip = true;
        break;
      }
    if (!skip && th.is_fact(conjs[i]))
      facts.push_back(conjs[i]);
    else
      others.push_back(conjs[i]);
  }
  FactSplit out;
  if (facts.empty()) {
    // core = emp ** core  (then  emp -|- fact(T), reversed)
    Theorem pad = k.symm(spec(k, th.axiom("hsep-emp-left"), core));
    Theorem emp_as_fact =
        sep_cong(th, k.symm(th.axiom("fact-true")), k.refl(core));
    out.conv = trans2(k, pad, emp_as_fact);
    out.guard = k.constant("T");
    out.rest = core;
    return out;
  }
  // bring facts to the front in order
  std::vector<Term> order = facts;
  order.insert(order.end(), others.begin(), others.end());
  Theorem conv = perm_conv(th, core, order);
  // pad a lone fact list with emp so the merge loop leaves a ** shape
  if (others.empty()) {
    Term shaped = eq_rhs(conv.conclusion());
    Theorem pad = k.symm(spec(k, th.axiom("hsep-emp-right"), shaped));
    conv = trans2(k, conv, pad);
    others.push_back(k.constant("emp"));
    // re-associate: ((f1 ** f2) ** emp) is not our shape; flatten again
    conv = trans2(k, conv, flatten_conv(th, eq_rhs(conv.conclusion())));
  }
  // repeatedly merge the two leading facts: fact(a) ** (fact(b) ** R)
  //   = (fact(a) ** fact(b)) ** R  = fact(a && b) ** R
  for (size_t n = facts.size(); n > 1; --n) {
    Term shaped = eq_rhs(conv.conclusion());
    Term a = binary_lhs(shaped);
    Term rest = binary_rhs(shaped);
    Term b = binary_lhs(rest);
    Term tail = binary_rhs(rest);
    Theorem assoc = k.symm(specialize(k, th.axiom("hsep-assoc"), {a, b, tail}));
    Theorem merge = k.symm(
        specialize(k, th.axiom("fact-merge"), {a.arg(), b.arg()}));  // fact(a)**fact(b) = ..
    Theorem cong = sep_cong(th, merge, k.refl(tail));
    conv = trans2(k, trans2(k, conv, assoc), cong);
  }
  Term shaped = eq_rhs(conv.conclusion());
  out.conv = conv;
  out.guard = binary_lhs(shaped).arg();
  out.rest = binary_rhs(shaped);
  return out;
}

// from {Q} |- lhs |-- rhs build |- fact(Q) ** lhs |-- fact(Q) ** rhs
Theorem fact_guard(const Theory& th, const Term& guard, const Theorem& ent) {
  const Kernel& k = th.kernel();
  Theorem discharged = disch(k, guard, ent);
  Theorem elim = specialize(k, th.axiom("fact-elim"),
                            {guard, binary_lhs(ent.conclusion()), binary_rhs(ent.conclusion())});
  return mp(k, elim, discharged);
}

// wraps |- lhs |-- rhs with the existential binders, innermost first
Theorem wrap_binders(const Theory& th, Theorem ent, const std::vector<Term>& binders) {
  const Kernel& k = th.kernel();
  for (size_t i = binders.size(); i-- > 0;) {
    const Term& x = binders[i];
    Term lhs = binary_lhs(ent.conclusion());
    Term rhs = binary_rhs(ent.conclusion());
    Term lamL = mk_abs(x, lhs), lamR = mk_abs(x, rhs);
    Theorem gen_ent = gen(k, x, ent);  // |- !x. lhs |-- rhs
    // premise of the monotone axiom wants !x. (\x.lhs) x |-- (\x.rhs) x
    Theorem betaL = k.beta(mk_app(lamL, x));
    Theorem betaR = k.beta(mk_app(lamR, x));
    Theorem prop_eq = k.mk_comb_rule(ap_term(k, k.constant("|--"), betaL), betaR);
    Theorem lam_form = k.abs_rule(x, k.symm(prop_eq));
    // |- (!x. lhs |-- rhs) = (!x. (\x.lhs) x |-- (\x.rhs) x)
    Term fa = k.mk_const("!", fun_ty(fun_ty(x.type(), bool_ty()), bool_ty()));
    Theorem fa_eq = ap_term(k, fa, lam_form);
    Theorem premise = k.eq_mp(fa_eq, gen_ent);
    Theorem ax = th.axiom("hexists-monotone");
    TypeSubst ts;
    ts.emplace_back(HolType::var("a"), x.type());
    ax = k.inst_type(ts, ax);
    ent = mp(k, specialize(k, ax, {lamL, lamR}), premise);
  }
  return ent;
}

// splits merged fact conjuncts back apart: fact(a && b) -> fact(a) ** fact(b)
Theorem resplit_facts_conv(const Theory& th, const Term& t) {
  const Kernel& k = th.kernel();
  Theorem conv = k.refl(t);
  int guard = 0;
  for (;;) {
    Theorem step = rewrite_once(k, th.axiom("fact-merge"), eq_rhs(conv.conclusion()));
    if (is_refl_eq(step)) break;
    conv = trans2(k, conv, step);
    conv = trans2(k, conv, flatten_conv(th, eq_rhs(conv.conclusion())));
    if (++guard > 1000) throw RuleError("resplit: divergence");
  }
  return conv;
}

// |- state |-- new_state given |- core-after-binders |-- new_core
Theorem close_entailment(const Theory& th, const OpenedState& s, Theorem core_ent) {
  const Kernel& k = th.kernel();
  // keep fact conjuncts granular in the produced state
  {
    Theorem rhs_conv = resplit_facts_conv(th, binary_rhs(core_ent.conclusion()));
    if (!is_refl_eq(rhs_conv)) {
      Theorem prop_eq = k.mk_comb_rule(
          ap_term(k, k.constant("|--"), k.refl(binary_lhs(core_ent.conclusion()))), rhs_conv);
      core_ent = k.eq_mp(prop_eq, core_ent);
    }
  }
  Theorem wrapped = wrap_binders(th, core_ent, s.binders);
  // lhs of wrapped is exists xs. <lhs-core>; connect with |- state = exists xs. core
  Term lhs = binary_lhs(wrapped.conclusion());
  Term rhs = binary_rhs(wrapped.conclusion());
  if (!alpha_eq(lhs, eq_rhs(s.norm.conclusion())))
    throw RuleError("internal: frame assembly mismatch");
  Theorem prop_eq =
      k.mk_comb_rule(ap_term(k, k.constant("|--"), k.symm(s.norm)), k.refl(rhs));
  return k.eq_mp(prop_eq, wrapped);
}

// equality bridging two conjuncts that agree modulo arithmetic normal form;
// integer-typed argument positions are discharged by the arith oracle
Theorem bridge_conjunct(const Theory& th, const Term& from, const Term& to) {
  const Kernel& k = th.kernel();
  if (alpha_eq(from, to)) return k.refl(from);
  if (from.type() == integer_ty() && arith::match_modulo_arith(k, from, to))
    return arith::arith_rule(k, k.mk_eq(from, to), arith::Fragment::AbstractOpaque);
  std::vector<Term> fa, ta;
  Term fh = strip_app(from, fa);
  Term thd = strip_app(to, ta);
  if (!(fh == thd) || fa.size() != ta.size())
    throw RuleError("local_apply: cannot bridge " + quote::print_term(from) + " with " +
                    quote::print_term(to));
  Theorem conv = k.refl(fh);
  for (size_t i = 0; i < fa.size(); ++i) conv = k.mk_comb_rule(conv, bridge_conjunct(th, fa[i], ta[i]));
  return conv;
}

}  // namespace

Theorem local_apply_thm(const Theory& th, const Term& state, const Theorem& transform) {
  const Kernel& k = th.kernel();
  if (!transform.hypotheses().empty())
    throw RuleError("local_apply: transform has hypotheses");
  OpenedState s = open_state(th, state);

  // normalize the transform to (optional premise, L |-- R)
  Term concl = transform.conclusion();
  std::optional<Term> premise;
  Theorem ent_thm = transform;
  if (is_binary(concl, "==>")) {
    premise = binary_lhs(concl);
    concl = binary_rhs(concl);
  }
  Term L, R;
  bool is_bi = is_eq(concl) && eq_lhs(concl).type() == hprop_ty();
  if (is_bi) {
    L = eq_lhs(concl);
    R = eq_rhs(concl);
  } else if (is_binary(concl, "|--")) {
    L = binary_lhs(concl);
    R = binary_rhs(concl);
  } else {
    throw RuleError("local_apply: transform must conclude an entailment or bi-entailment");
  }

  // match L's conjuncts against the state's (first match wins, arith-NF keys)
  std::vector<Term> lconjs = th.conjuncts(L);
  std::vector<bool> used(s.conjuncts.size(), false);
  std::vector<std::pair<size_t, Term>> matches;  // state index -> L conjunct
  for (const auto& lc : lconjs) {
    bool found = false;
    for (size_t i = 0; i < s.conjuncts.size(); ++i) {
      if (used[i]) continue;
      if (alpha_eq(s.conjuncts[i], lc) ||
          arith::match_modulo_arith(k, s.conjuncts[i], lc)) {
        used[i] = true;
        matches.emplace_back(i, lc);
        found = true;
        break;
      }
    }
    if (!found)
      throw RuleError("local_apply: no conjunct matching " + quote::print_term(lc));
  }

  // rewrite matched state conjuncts into L's exact spelling
  std::vector<Term> adjusted = s.conjuncts;
  Theorem core_conv = k.refl(s.core);
  {
    bool any = false;
    std::vector<Theorem> per(s.conjuncts.size());
    for (size_t i = 0; i < s.conjuncts.size(); ++i) per[i] = k.refl(s.conjuncts[i]);
    for (const auto& [idx, lc] : matches) {
      per[idx] = bridge_conjunct(th, s.conjuncts[idx], lc);
      if (!is_refl_eq(per[idx])) any = true;
      adjusted[idx] = lc;
    }
    if (any) {
      // rebuild the right-assoc core with per-conjunct conversions
      std::function<Theorem(size_t, const Term&)> rebuild =
          [&](size_t i, const Term& cur) -> Theorem {
        if (i + 1 == s.conjuncts.size()) return per[i];
        return sep_cong(th, per[i], rebuild(i + 1, binary_rhs(cur)));
      };
      core_conv = rebuild(0, s.core);
    }
  }
  Term adjusted_core = eq_rhs(core_conv.conclusion());

  // facts guard (excluding matched conjuncts)
  std::vector<Term> matched_terms;
  for (const auto& [idx, lc] : matches) matched_terms.push_back(lc);
  FactSplit fs = split_facts(th, adjusted_core, matched_terms);

  // order the rest as L1..Lk ++ frame
  std::vector<Term> rest_conjs = th.conjuncts(fs.rest);
  std::vector<bool> used2(rest_conjs.size(), false);
  std::vector<Term> lifted = lconjs;
  for (const auto& lc : lconjs) {
    for (size_t i = 0; i < rest_conjs.size(); ++i) {
      if (used2[i]) continue;
      if (alpha_eq(rest_conjs[i], lc)) {
        used2[i] = true;
        break;
      }
    }
  }
  std::vector<Term> frame;
  {
    std::vector<bool> consumed(rest_conjs.size(), false);
    std::vector<Term> want = lconjs;
    for (const auto& lc : want) {
      for (size_t i = 0; i < rest_conjs.size(); ++i) {
        if (consumed[i]) continue;
        if (alpha_eq(rest_conjs[i], lc)) {
          consumed[i] = true;
          break;
        }
      }
    }
    for (size_t i = 0; i < rest_conjs.size(); ++i)
      if (!consumed[i]) frame.push_back(rest_conjs[i]);
  }
  std::vector<Term> order = lconjs;
  order.insert(order.end(), frame.begin(), frame.end());
  Theorem rest_perm = perm_conv(th, fs.rest, order);

  // regroup right-assoc [L1..Lk, F..] as L ** frame_term
  Term frame_term = frame.empty() ? k.constant("emp") : th.mk_sep_list(frame);
  Term grouped = th.mk_sep(L, frame_term);
  Theorem group_conv;
  {
    Theorem flat_grouped = flatten_conv(th, grouped);
    Term flat_lhs = eq_rhs(rest_perm.conclusion());
    if (!alpha_eq(eq_rhs(flat_grouped.conclusion()), flat_lhs)) {
      // padding emp introduced for an empty frame
      Theorem pad = flatten_conv(th, flat_lhs);
      if (!alpha_eq(eq_rhs(flat_grouped.conclusion()), eq_rhs(pad.conclusion())))
        throw RuleError("internal: local_apply grouping mismatch");
      rest_perm = trans2(k, rest_perm, pad);
    }
    group_conv = k.symm(flat_grouped);
  }

  // entailment under guard: {Q} |- L ** frame |-- R ** frame
  Theorem guarded_ent;
  {
    Theorem ent;
    if (premise) {
      Theorem q_assumed = k.assume(fs.guard);
      Theorem imp =
          arith::arith_rule(k, rules::mk_imp(k, fs.guard, *premise),
                            arith::Fragment::AbstractOpaque);
      Theorem p_thm = mp(k, imp, q_assumed);  // {Q} |- P
      ent = mp(k, transform, p_thm);          // {Q} |- L |-- R  (or L = R)
    } else {
      ent = transform;
    }
    if (is_bi) ent = entail_of_eq(th, ent);
    Theorem framed = entail_frame(th, ent, frame_term);  // {Q} |- L ** f |-- R ** f
    guarded_ent = fact_guard(th, fs.guard, framed);
  }

  // assemble: core = fact(Q) ** rest = fact(Q) ** (L ** f) |- fact(Q) ** (R ** f)
  Theorem pre_conv = trans2(
      k, core_conv,
      trans2(k, fs.conv, trans2(k, sep_cong(th, k.refl(mk_app(k.constant("fact"), fs.guard)),
                                            rest_perm),
                                sep_cong(th, k.refl(mk_app(k.constant("fact"), fs.guard)),
                                         group_conv))));
  Term ent_lhs = binary_lhs(guarded_ent.conclusion());
  if (!alpha_eq(eq_rhs(pre_conv.conclusion()), ent_lhs))
    throw RuleError("internal: local_apply left side mismatch");
  // core |-- fact(Q) ** (R ** f)
  Theorem core_ent = k.eq_mp(
      k.mk_comb_rule(ap_term(k, k.constant("|--"), k.symm(pre_conv)),
                     k.refl(binary_rhs(guarded_ent.conclusion()))),
      guarded_ent);
  return close_entailment(th, s, core_ent);
}

Theorem arith_subst_thm(const Theory& th, const Term& state, const Term& old_int,
                        const Term& new_int) {
  const Kernel& k = th.kernel();
  if (!(old_int.type() == integer_ty()) || !(new_int.type() == integer_ty()))
    throw RuleError("arith_subst: arguments must be integer terms");
  OpenedState s = open_state(th, state);
  FactSplit fs = split_facts(th, s.core);
  Theorem q_assumed = k.assume(fs.guard);
  Theorem imp = arith::arith_rule(k, rules::mk_imp(k, fs.guard, k.mk_eq(old_int, new_int)),
                                  arith::Fragment::AbstractOpaque);
  Theorem eq = mp(k, imp, q_assumed);  // {Q} |- old == new
  // rewrite all occurrences in the spatial rest
  Theorem conv = k.refl(fs.rest);
  int guard_count = 0;
  for (;;) {
    Theorem step = rewrite_once(k, eq, eq_rhs(conv.conclusion()));
    if (is_refl_eq(step)) break;
    conv = trans2(k, conv, step);
    if (++guard_count > 10000) throw RuleError("arith_subst: divergence");
  }
  if (is_refl_eq(conv)) {
    // nothing to change: state entails itself
    return close_entailment(th, s, entail_refl_thm(th, s.core));
  }
  Theorem ent = entail_of_eq(th, conv);  // {Q} |- rest |-- rest'
  Theorem guarded = fact_guard(th, fs.guard, ent);
  Theorem core_ent = k.eq_mp(
      k.mk_comb_rule(ap_term(k, k.constant("|--"), k.symm(fs.conv)),
                     k.refl(binary_rhs(guarded.conclusion()))),
      guarded);
  return close_entailment(th, s, core_ent);
}

Theorem pure_intro_thm(const Theory& th, const Term& state, const Term& q) {
  const Kernel& k = th.kernel();
  if (!(q.type() == bool_ty())) throw RuleError("pure_intro: fact must be a bool term");
  OpenedState s = open_state(th, state);
  FactSplit fs = split_facts(th, s.core);
  // Q <=> Q && q, by arith
  Theorem widen = arith::arith_rule(k, k.mk_eq(fs.guard, rules::mk_conj(k, fs.guard, q)),
                                    arith::Fragment::AbstractOpaque);
  Theorem fact_conv = ap_term(k, k.constant("fact"), widen);
  Theorem merge = specialize(k, th.axiom("fact-merge"), {fs.guard, q});
  Theorem conv = trans2(
      k, fs.conv,
      sep_cong(th, trans2(k, fact_conv, merge), k.refl(fs.rest)));
  // core = (fact(Q) ** fact(q)) ** rest; flatten for a tidy result
  conv = trans2(k, conv, flatten_conv(th, eq_rhs(conv.conclusion())));
  Theorem ent = entail_of_eq(th, conv);
  return close_entailment(th, s, ent);
}

Theorem sep_drop_fact_thm(const Theory& th, const Term& state, const Term& p) {
  const Kernel& k = th.kernel();
  OpenedState s = open_state(th, state);
  Term want = th.mk_fact(p);
  Term found;
  for (const auto& c : s.conjuncts)
    if (alpha_eq(c, want) || arith::match_modulo_arith(k, c, want)) {
      found = c;
      break;
    }
  if (!found.valid())
    throw RuleError("sep_drop_fact: no fact conjunct matching " + quote::print_term(p));
  if (s.conjuncts.size() == 1)
    throw RuleError("sep_drop_fact: refusing to drop the only conjunct");
  std::vector<Term> order{found};
  for (const auto& c : s.conjuncts)
    if (!(c == found)) order.push_back(c);
  Theorem permed = perm_conv(th, s.core, order);
  Term shaped = eq_rhs(permed.conclusion());
  Theorem drop = specialize(k, th.axiom("fact-drop"),
                            {binary_lhs(shaped).arg(), binary_rhs(shaped)});
  Theorem core_ent = k.eq_mp(
      k.mk_comb_rule(ap_term(k, k.constant("|--"), k.symm(permed)),
                     k.refl(binary_rhs(drop.conclusion()))),
      drop);
  return close_entailment(th, s, core_ent);
}

Theorem sep_intro_thm(const Theory& th, const Term& state, const Theorem& intro) {
  const Kernel& k = th.kernel();
  Theorem ent = intro;
  if (is_eq(ent.conclusion()) && eq_lhs(ent.conclusion()).type() == hprop_ty())
    ent = entail_of_eq(th, ent);
  if (!is_binary(ent.conclusion(), "|--") ||
      !(binary_lhs(ent.conclusion()).is_const() &&
        binary_lhs(ent.conclusion()).name() == "emp"))
    throw RuleError("sep_intro: the introduction theorem must conclude emp |-- X");
  OpenedState s = open_state(th, state);
  // core = emp ** core |-- X ** core
  Theorem pad = k.symm(spec(k, th.axiom("hsep-emp-left"), s.core));
  Theorem framed = entail_frame(th, ent, s.core);  // emp ** core |-- X ** core
  Theorem core_ent = k.eq_mp(
      k.mk_comb_rule(ap_term(k, k.constant("|--"), k.symm(pad)),
                     k.refl(binary_rhs(framed.conclusion()))),
      framed);
  return close_entailment(th, s, core_ent);
}

namespace {

// generalize then convert the premise into the (\x. ...) x shape the
// higher-order axioms expect, returning |- exists x. lhs |-- H via
// hexists-elim
Theorem hexists_elim_step(const Theory& th, const Term& x, const Theorem& ent) {
  const Kernel& k = th.kernel();
  Term lhs = binary_lhs(ent.conclusion());
  Term rhs = binary_rhs(ent.conclusion());
  if (is_free_in(x, rhs))
    throw RuleError("sep_match: binder " + x.name() + " escapes into the target");
  Term lam = mk_abs(x, lhs);
  Theorem gen_ent = gen(k, x, ent);
  Theorem beta_l = k.beta(mk_app(lam, x));
  Theorem prop_eq = k.mk_comb_rule(ap_term(k, k.constant("|--"), beta_l), k.refl(rhs));
  Theorem lam_form = k.abs_rule(x, k.symm(prop_eq));
  Term fa = k.mk_const("!", fun_ty(fun_ty(x.type(), bool_ty()), bool_ty()));
  Theorem premise = k.eq_mp(ap_term(k, fa, lam_form), gen_ent);
  Theorem ax = th.axiom("hexists-elim");
  TypeSubst ts;
  ts.emplace_back(HolType::var("a"), x.type());
  ax = k.inst_type(ts, ax);
  return mp(k, specialize(k, ax, {lam, rhs}), premise);
}

}  // namespace

Theorem sep_match_thm(const Theory& th, const Term& state, const Term& target,
                      const std::vector<Term>& witnesses) {
  const Kernel& k = th.kernel();
  OpenedState s = open_state(th, state);

  // instantiate the target binders with the witnesses
  Term body = target;
  std::vector<Term> target_binders;
  for (const auto& w : witnesses) {
    if (!th.is_hexists(body))
      throw RuleError("sep_match: more witnesses than target binders");
    const Term& lam = body.arg();
    if (!(lam.bound_var().type() == w.type()))
      throw RuleError("sep_match: witness type mismatch for " + lam.bound_var().name());
    target_binders.push_back(lam.bound_var());
    body = subst_term({{lam.bound_var(), w}}, lam.body());
  }
  if (th.is_hexists(body))
    throw RuleError("sep_match: target has more binders than witnesses");

  Theorem body_norm = sep_normalize_thm(th, body);  // |- body = core_t
  Term core_t = eq_rhs(body_norm.conclusion());
  std::vector<Term> t_conjs = th.conjuncts(core_t);
  std::vector<Term> t_facts, t_spats;
  for (const auto& c : t_conjs) (th.is_fact(c) ? t_facts : t_spats).push_back(c);
  if (t_spats.size() == 1 && t_spats[0].is_const() && t_spats[0].name() == "emp")
    t_spats.clear();

  FactSplit fs = split_facts(th, s.core);
  std::vector<Term> s_spats = th.conjuncts(fs.rest);
  if (s_spats.size() == 1 && s_spats[0].is_const() && s_spats[0].name() == "emp")
    s_spats.clear();

  // match spatials, remembering bridges
  if (s_spats.size() != t_spats.size())
    throw RuleError("sep_match: spatial conjunct counts differ (" +
                    std::to_string(s_spats.size()) + " vs " + std::to_string(t_spats.size()) +
                    ")");
  std::vector<int> pick(t_spats.size(), -1);
  std::vector<bool> used(s_spats.size(), false);
  for (size_t ti = 0; ti < t_spats.size(); ++ti) {
    for (size_t si = 0; si < s_spats.size(); ++si) {
      if (used[si]) continue;
      if (alpha_eq(s_spats[si], t_spats[ti]) ||
          arith::match_modulo_arith(k, s_spats[si], t_spats[ti])) {
        used[si] = true;
        pick[ti] = static_cast<int>(si);
        break;
      }
    }
    if (pick[ti] < 0)
      throw RuleError("sep_match: no state conjunct matches " +
                      quote::print_term(t_spats[ti]));
  }

  // conv: rest = exact target spatial list (permuted, bridged)
  Theorem rest_conv;
  {
    std::vector<Term> order;
    for (size_t ti = 0; ti < t_spats.size(); ++ti) order.push_back(s_spats[pick[ti]]);
    if (order.empty()) {
      rest_conv = k.refl(fs.rest);  // both sides emp
    } else {
      rest_conv = perm_conv(th, fs.rest, order);
      // per-position bridging to the target spelling
      Term permed = eq_rhs(rest_conv.conclusion());
      std::vector<Theorem> per(order.size());
      bool any = false;
      for (size_t i = 0; i < order.size(); ++i) {
        per[i] = bridge_conjunct(th, order[i], t_spats[i]);
        if (!is_refl_eq(per[i])) any = true;
      }
      if (any) {
        std::function<Theorem(size_t, const Term&)> rebuild =
            [&](size_t i, const Term& cur) -> Theorem {
          if (i + 1 == order.size()) return per[i];
          return sep_cong(th, per[i], rebuild(i + 1, binary_rhs(cur)));
        };
        rest_conv = trans2(k, rest_conv, rebuild(0, permed));
      }
    }
  }
  Term rest_final = eq_rhs(rest_conv.conclusion());

  // facts: fact(Q) ** rest' |-- fact(phi) ** rest' with phi the target facts
  std::vector<Term> t_fact_props;
  for (const auto& f : t_facts) t_fact_props.push_back(f.arg());
  Term phi = rules::mk_conj_list(k, t_fact_props);
  Theorem widen = arith::arith_rule(k, k.mk_eq(fs.guard, rules::mk_conj(k, fs.guard, phi)),
                                    arith::Fragment::AbstractOpaque);
  // fact(Q) = fact(Q && phi) = fact(Q) ** fact(phi)
  Theorem fact_conv = trans2(k, ap_term(k, k.constant("fact"), widen),
                             specialize(k, th.axiom("fact-merge"), {fs.guard, phi}));
  // assemble core conv: core = fact(Q) ** rest = (fact(Q) ** fact(phi)) ** rest'
  Theorem conv = trans2(k, fs.conv, sep_cong(th, fact_conv, rest_conv));
  // core |-- dropped = fact(phi) ** rest'
  Theorem assoc = specialize(
      k, th.axiom("hsep-assoc"),
      {mk_app(k.constant("fact"), fs.guard), mk_app(k.constant("fact"), phi), rest_final});
  conv = trans2(k, conv, assoc);
  Term shaped = eq_rhs(conv.conclusion());
  Theorem drop = specialize(k, th.axiom("fact-drop"), {fs.guard, binary_rhs(shaped)});
  Theorem core_ent = k.eq_mp(
      k.mk_comb_rule(ap_term(k, k.constant("|--"), k.symm(conv)),
                     k.refl(binary_rhs(drop.conclusion()))),
      drop);
  // now fact(phi) ** rest' must convert to core_t and then to the target
  Theorem finish;
  {
    Term have = binary_rhs(core_ent.conclusion());
    // expand fact(C1 && (C2 && ...)) ** rest along the target's fact list
    std::function<Theorem(const Term&, size_t)> split_at = [&](const Term& cur,
                                                               size_t i) -> Theorem {
      if (i + 1 >= t_fact_props.size()) return k.refl(cur);
      Term f = binary_lhs(cur);  // fact(Ci && C_{i+1...})
      Term tail = binary_rhs(cur);
      Term a = binary_lhs(f.arg()), b = binary_rhs(f.arg());
      Theorem merge = specialize(k, th.axiom("fact-merge"), {a, b});
      Theorem step = sep_cong(th, merge, k.refl(tail));
      Theorem assoc = specialize(k, th.axiom("hsep-assoc"),
                                 {mk_app(k.constant("fact"), a),
                                  mk_app(k.constant("fact"), b), tail});
      Theorem chained = trans2(k, step, assoc);
      Term now = eq_rhs(chained.conclusion());
      Theorem inner = split_at(binary_rhs(now), i + 1);
      return trans2(k, chained,
                    sep_cong(th, k.refl(binary_lhs(now)), inner));
    };
    Theorem expand = t_fact_props.size() > 1 ? split_at(have, 0) : k.refl(have);
    // handle the no-facts / no-spatials paddings
    Theorem tidy = flatten_conv(th, eq_rhs(expand.conclusion()));
    expand = trans2(k, expand, tidy);
    Term got = eq_rhs(expand.conclusion());
    if (!alpha_eq(got, core_t)) {
      // T facts: fact(T) may remain on the left; drop it via fact-true
      Theorem ft = rewrite_once(k, th.axiom("fact-true"), got);
      if (!is_refl_eq(ft)) {
        expand = trans2(k, expand, ft);
        expand = trans2(k, expand, flatten_conv(th, eq_rhs(expand.conclusion())));
        got = eq_rhs(expand.conclusion());
      }
    }
    if (!alpha_eq(got, core_t))
      throw RuleError("sep_match: assembled " + quote::print_term(got) +
                      " but the target normalizes to " + quote::print_term(core_t));
    Theorem to_body = trans2(k, expand, k.symm(body_norm));
    // core_ent's right side converts to body
    core_ent = k.eq_mp(
        k.mk_comb_rule(ap_term(k, k.constant("|--"), k.refl(binary_lhs(core_ent.conclusion()))),
                       to_body),
        core_ent);
    // introduce the target existentials
    if (!witnesses.empty()) {
      Theorem intro = exists_intro_thm(th, witnesses, target);
      core_ent = entail_trans_thm(th, core_ent, intro);
    }
    finish = core_ent;
  }
  // eliminate the state binders
  for (size_t i = s.binders.size(); i-- > 0;)
    finish = hexists_elim_step(th, s.binders[i], finish);
  // glue with the normalization of the state
  Term lhs = binary_lhs(finish.conclusion());
  if (!alpha_eq(lhs, eq_rhs(s.norm.conclusion())))
    throw RuleError("internal: sep_match assembly mismatch");
  Theorem prop_eq = k.mk_comb_rule(ap_term(k, k.constant("|--"), k.symm(s.norm)),
                                   k.refl(binary_rhs(finish.conclusion())));
  return k.eq_mp(prop_eq, finish);
}

Theorem fact_emp_thm(const Theory& th, const Theorem& proven) {
  const Kernel& k = th.kernel();
  if (!proven.hypotheses().empty())
    throw RuleError("fact_emp: theorem has hypotheses");
  Theorem as_true = rules::eqt_intro(k, proven);  // |- p = T
  Theorem fconv = ap_term(k, k.constant("fact"), as_true);
  return k.trans(fconv, th.axiom("fact-true"));   // |- fact(p) -|- emp
}

Theorem fact_intro_thm(const Theory& th, const Term& state, const Theorem& proven) {
  return sep_intro_thm(th, state, entail_of_eq(th, th.kernel().symm(fact_emp_thm(th, proven))));
}

Theorem drop_unused_binders_thm(const Theory& th, const Term& state) {
  const Kernel& k = th.kernel();
  Theorem norm = sep_normalize_thm(th, state);
  std::function<Theorem(const Term&)> go = [&](const Term& t) -> Theorem {
    if (!th.is_hexists(t)) return k.refl(t);
    const Term& lam = t.arg();
    Theorem inner = go(lam.body());
    Theorem cur = is_refl_eq(inner) ? k.refl(t) : hexists_cong(th, lam.bound_var(), inner);
    Term now = eq_rhs(cur.conclusion());
    const Term& lam2 = now.arg();
    if (!is_free_in(lam2.bound_var(), lam2.body())) {
      Theorem ax = th.axiom("hexists-unused");
      TypeSubst ts;
      ts.emplace_back(HolType::var("a"), lam2.bound_var().type());
      ax = k.inst_type(ts, ax);
      Theorem inst = spec(k, ax, lam2.body());
      // the instance binder is the axiom's own x; alpha-equality lets trans glue
      cur = trans2(k, cur, inst);
    }
    return cur;
  };
  return trans2(k, norm, go(eq_rhs(norm.conclusion())));
}

}  // namespace cstar::sep
