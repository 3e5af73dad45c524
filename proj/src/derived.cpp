// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0

#include "cstar/derived.hpp"

#include <algorithm>

namespace cstar::rules {

void bootstrap_base_logic(Kernel& k) {
  Term p = mk_var("p", bool_ty());
  Term q = mk_var("q", bool_ty());
  Term r = mk_var("r", bool_ty());

  // T = ((\p. p) = (\p. p))
  Term idb = mk_abs(p, p);
  k.new_basic_definition("T", k.mk_eq(mk_var("T", bool_ty()), k.mk_eq(idb, idb)));
  Term T = k.constant("T");

  // p && q = ((\f. f p q) = (\f. f T T))
  HolType bb2 = fun_ty(bool_ty(), fun_ty(bool_ty(), bool_ty()));
  Term f = mk_var("f", bb2);
  Term and_head = mk_app(mk_app(mk_var("&&", bb2), p), q);
  Term and_body = k.mk_eq(mk_abs(f, mk_app(mk_app(f, p), q)), mk_abs(f, mk_app(mk_app(f, T), T)));
  k.new_basic_definition("&&", k.mk_eq(and_head, and_body));
  Term conj_c = k.constant("&&");

  // p ==> q = ((p && q) = p)
  Term imp_head = mk_app(mk_app(mk_var("==>", bb2), p), q);
  Term imp_body = k.mk_eq(mk_app(mk_app(conj_c, p), q), p);
  k.new_basic_definition("==>", k.mk_eq(imp_head, imp_body));
  Term imp_c = k.constant("==>");

  // ! P = (P = (\x. T))
  HolType a = HolType::var("a");
  Term P = mk_var("P", fun_ty(a, bool_ty()));
  Term x = mk_var("x", a);
  Term fa_head = mk_app(mk_var("!", fun_ty(fun_ty(a, bool_ty()), bool_ty())), P);
  k.new_basic_definition("!", k.mk_eq(fa_head, k.mk_eq(P, mk_abs(x, T))));

  // ? P = !(\q. (!(\x. P x ==> q)) ==> q)
  Term forall_b = k.mk_const("!", fun_ty(fun_ty(bool_ty(), bool_ty()), bool_ty()));
  Term forall_a = k.mk_const("!", fun_ty(fun_ty(a, bool_ty()), bool_ty()));
  Term ex_head = mk_app(mk_var("?", fun_ty(fun_ty(a, bool_ty()), bool_ty())), P);
  Term inner = mk_abs(x, mk_app(mk_app(imp_c, mk_app(P, x)), q));
  Term ex_body =
      mk_app(forall_b, mk_abs(q, mk_app(mk_app(imp_c, mk_app(forall_a, inner)), q)));
  k.new_basic_definition("?", k.mk_eq(ex_head, ex_body));

  // F = !(\p. p)
  k.new_basic_definition("F", k.mk_eq(mk_var("F", bool_ty()), mk_app(forall_b, idb)));
  Term F = k.constant("F");

  // ~p = (p ==> F)
  Term not_head = mk_app(mk_var("~", fun_ty(bool_ty(), bool_ty())), p);
  k.new_basic_definition("~", k.mk_eq(not_head, mk_app(mk_app(imp_c, p), F)));

  // p || q = !(\r. (p ==> r) ==> ((q ==> r) ==> r))
  Term or_head = mk_app(mk_app(mk_var("||", bb2), p), q);
  Term or_body = mk_app(
      forall_b,
      mk_abs(r, mk_app(mk_app(imp_c, mk_app(mk_app(imp_c, p), r)),
                       mk_app(mk_app(imp_c, mk_app(mk_app(imp_c, q), r)), r))));
  k.new_basic_definition("||", k.mk_eq(or_head, or_body));
}

Term mk_conj(const Kernel& k, const Term& a, const Term& b) {
  return mk_app(mk_app(k.constant("&&"), a), b);
}
Term mk_disj(const Kernel& k, const Term& a, const Term& b) {
  return mk_app(mk_app(k.constant("||"), a), b);
}
Term mk_imp(const Kernel& k, const Term& a, const Term& b) {
  return mk_app(mk_app(k.constant("==>"), a), b);
}
Term mk_not(const Kernel& k, const Term& a) { return mk_app(k.constant("~"), a); }

Term mk_forall(const Kernel& k, const Term& var, const Term& body) {
  Term fa = k.mk_const("!", fun_ty(fun_ty(var.type(), bool_ty()), bool_ty()));
  return mk_app(fa, mk_abs(var, body));
}

Term mk_exists(const Kernel& k, const Term& var, const Term& body) {
  Term ex = k.mk_const("?", fun_ty(fun_ty(var.type(), bool_ty()), bool_ty()));
  return mk_app(ex, mk_abs(var, body));
}

Term mk_conj_list(const Kernel& k, const std::vector<Term>& ps) {
  if (ps.empty()) return k.constant("T");
  Term out = ps.back();
  for (size_t i = ps.size() - 1; i-- > 0;) out = mk_conj(k, ps[i], out);
  return out;
}

bool is_forall(const Term& t) {
  return t.is_app() && t.fn().is_const() && t.fn().name() == "!" && t.arg().is_abs();
}
bool is_conj(const Term& t) { return is_binary(t, "&&") && t.type() == bool_ty(); }
bool is_imp(const Term& t) { return is_binary(t, "==>"); }
bool is_not(const Term& t) { return t.is_app() && t.fn().is_const() && t.fn().name() == "~"; }

Term strip_forall(const Term& t, std::vector<Term>& vars) {
  Term cur = t;
  while (is_forall(cur)) {
    vars.push_back(cur.arg().bound_var());
    cur = cur.arg().body();
  }
  return cur;
}

Theorem ap_term(const Kernel& k, const Term& f, const Theorem& th) {
  return k.mk_comb_rule(k.refl(f), th);
}
Theorem ap_thm(const Kernel& k, const Theorem& th, const Term& x) {
  return k.mk_comb_rule(th, k.refl(x));
}

Theorem truth(const Kernel& k) {
  Theorem t_def = *k.find_definition("T");
  Term idb = eq_rhs(t_def.conclusion());  // (\p. p) = (\p. p)
  return k.eq_mp(k.symm(t_def), k.refl(eq_lhs(idb)));
}

Theorem eqt_intro(const Kernel& k, const Theorem& th) {
  return k.deduct_antisym(th, truth(k));
}

Theorem eqt_elim(const Kernel& k, const Theorem& th) {
  return k.eq_mp(k.symm(th), truth(k));
}

Theorem beta_norm_conv(const Kernel& k, const Term& t) {
  switch (t.kind()) {
    case Term::Kind::Var:
    case Term::Kind::Const:
      return k.refl(t);
    case Term::Kind::Abs: {
      Theorem body = beta_norm_conv(k, t.body());
      if (alpha_eq(eq_lhs(body.conclusion()), eq_rhs(body.conclusion()))) return k.refl(t);
      return k.abs_rule(t.bound_var(), body);
    }
    case Term::Kind::App: {
      if (t.fn().is_abs()) {
        Theorem step = k.beta(t);
        Theorem rest = beta_norm_conv(k, eq_rhs(step.conclusion()));
        return k.trans(step, rest);
      }
      Theorem fc = beta_norm_conv(k, t.fn());
      Theorem xc = beta_norm_conv(k, t.arg());
      Theorem combined = k.mk_comb_rule(fc, xc);
      Term result = eq_rhs(combined.conclusion());
      if (result.is_app() && result.fn().is_abs())
        return k.trans(combined, beta_norm_conv(k, result));
      return combined;
    }
  }
  return k.refl(t);
}

// |- c a1 .. an = body[a1..an]  from the definitional theorem of c
static Theorem apply_def(const Kernel& k, const Theorem& def, const std::vector<Term>& args) {
  Theorem th = def;
  for (const auto& a : args) {
    th = ap_thm(k, th, a);
    Term rhs = eq_rhs(th.conclusion());
    if (rhs.is_app() && rhs.fn().is_abs()) th = k.trans(th, k.beta(rhs));
  }
  return th;
}

// Definition theorem instantiated so `c` matches the type of an occurrence.
static Theorem def_at(const Kernel& k, const std::string& name, const HolType& occurrence_ty) {
  Theorem def = *k.find_definition(name);
  TypeSubst subst;
  if (!match_type(eq_lhs(def.conclusion()).type(), occurrence_ty, subst))
    throw RuleError("definition of " + name + " cannot be used at " + occurrence_ty.to_string());
  if (subst.empty()) return def;
  return k.inst_type(subst, def);
}

Theorem conj(const Kernel& k, const Theorem& a, const Theorem& b) {
  Term p = a.conclusion(), q = b.conclusion();
  HolType bb2 = fun_ty(bool_ty(), fun_ty(bool_ty(), bool_ty()));
  Term f = mk_var("f", bb2);
  Theorem fpq =
      k.mk_comb_rule(k.mk_comb_rule(k.refl(f), eqt_intro(k, a)), eqt_intro(k, b));
  Theorem lam_eq = k.abs_rule(f, fpq);  // |- (\f. f p q) = (\f. f T T)
  Theorem anddef_eq = apply_def(k, *k.find_definition("&&"), {p, q});
  return k.eq_mp(k.symm(anddef_eq), lam_eq);
}

static Theorem conjunct_sel(const Kernel& k, const Theorem& th, bool first) {
  Term c = th.conclusion();
  if (!is_conj(c)) throw RuleError("conjunct: conclusion is not a conjunction");
  Term p = binary_lhs(c), q = binary_rhs(c);
  Theorem anddef_eq = apply_def(k, *k.find_definition("&&"), {p, q});
  Theorem lam_eq = k.eq_mp(anddef_eq, th);  // |- (\f. f p q) = (\f. f T T)
  Term x = mk_var("x", bool_ty()), y = mk_var("y", bool_ty());
  Term sel = mk_abs(x, mk_abs(y, first ? x : y));
  Theorem applied = ap_thm(k, lam_eq, sel);
  Term lhs = eq_lhs(applied.conclusion()), rhs = eq_rhs(applied.conclusion());
  Theorem lhs_red = beta_norm_conv(k, lhs);  // |- lhs = p (or q)
  Theorem rhs_red = beta_norm_conv(k, rhs);  // |- rhs = T
  Theorem chained = k.trans(k.trans(k.symm(lhs_red), applied), rhs_red);
  return eqt_elim(k, chained);
}

Theorem conjunct1(const Kernel& k, const Theorem& th) { return conjunct_sel(k, th, true); }
Theorem conjunct2(const Kernel& k, const Theorem& th) { return conjunct_sel(k, th, false); }

Theorem mp(const Kernel& k, const Theorem& imp, const Theorem& ant) {
  Term c = imp.conclusion();
  if (!is_imp(c)) throw RuleError("mp: first premise is not an implication");
  Term p = binary_lhs(c), q = binary_rhs(c);
  if (!alpha_eq(p, ant.conclusion()))
    throw RuleError("mp: antecedent does not match");
  Theorem imp_eq = apply_def(k, *k.find_definition("==>"), {p, q});
  Theorem conj_eq_p = k.eq_mp(imp_eq, imp);        // |- (p && q) = p
  Theorem pq = k.eq_mp(k.symm(conj_eq_p), ant);    // |- p && q
  return conjunct2(k, pq);
}

Theorem disch(const Kernel& k, const Term& p, const Theorem& th) {
  Theorem th1 = conj(k, k.assume(p), th);  // {p} u hyps |- p && q
  Term pq = th1.conclusion();
  Theorem th2 = conjunct1(k, k.assume(pq));          // {p && q} |- p
  Theorem th3 = k.deduct_antisym(th1, th2);          // hyps - p |- (p && q) = p
  Theorem imp_eq = apply_def(k, *k.find_definition("==>"), {p, th.conclusion()});
  return k.eq_mp(k.symm(imp_eq), th3);
}

Theorem undisch(const Kernel& k, const Theorem& th) {
  if (!is_imp(th.conclusion())) throw RuleError("undisch: not an implication");
  return mp(k, th, k.assume(binary_lhs(th.conclusion())));
}

Theorem spec(const Kernel& k, const Theorem& th, const Term& t) {
  Term c = th.conclusion();
  if (!(c.is_app() && c.fn().is_const() && c.fn().name() == "!"))
    throw RuleError("spec: conclusion is not universally quantified");
  Term P = c.arg();
  Theorem fa_eq = apply_def(k, def_at(k, "!", c.fn().type()), {P});
  Theorem p_eq_lamT = k.eq_mp(fa_eq, th);       // |- P = (\x. T)
  Theorem applied = ap_thm(k, p_eq_lamT, t);    // |- P t = (\x. T) t
  Theorem step = k.trans(applied, k.beta(eq_rhs(applied.conclusion())));
  Theorem pt = eqt_elim(k, step);               // |- P t
  if (P.is_abs()) return k.eq_mp(k.beta(mk_app(P, t)), pt);
  return pt;
}

Theorem specialize(const Kernel& k, Theorem th, const std::vector<Term>& args) {
  for (const auto& a : args) th = spec(k, th, a);
  return th;
}

Theorem gen(const Kernel& k, const Term& var, const Theorem& th) {
  Theorem th1 = eqt_intro(k, th);
  Theorem th2 = k.abs_rule(var, th1);  // |- (\v. p) = (\v. T)
  Term lam = eq_lhs(th2.conclusion());
  Term fa = k.mk_const("!", fun_ty(lam.type(), bool_ty()));
  Theorem fa_eq = apply_def(k, def_at(k, "!", fa.type()), {lam});
  return k.eq_mp(k.symm(fa_eq), th2);
}

Theorem gen_all(const Kernel& k, const Theorem& th) {
  std::vector<Term> vars = free_vars(th.conclusion());
  for (const auto& h : th.hypotheses()) {
    for (auto it = vars.begin(); it != vars.end();) {
      if (is_free_in(*it, h))
        it = vars.erase(it);
      else
        ++it;
    }
  }
  Theorem out = th;
  for (size_t i = vars.size(); i-- > 0;) out = gen(k, vars[i], out);
  return out;
}

Theorem imp_trans(const Kernel& k, const Theorem& pq, const Theorem& qr) {
  if (!is_imp(pq.conclusion()) || !is_imp(qr.conclusion()))
    throw RuleError("imp_trans: premises must be implications");
  Term p = binary_lhs(pq.conclusion());
  return disch(k, p, mp(k, qr, mp(k, pq, k.assume(p))));
}

}  // namespace cstar::rules
