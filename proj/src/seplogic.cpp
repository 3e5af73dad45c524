// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0

#include "cstar/seplogic.hpp"

#include "cstar/quote.hpp"

namespace cstar::sep {

namespace {

void register_constants(Kernel& k) {
  HolType i = integer_ty(), b = bool_ty(), h = hprop_ty(), c = ctype_ty();
  HolType a = HolType::var("a");
  HolType bvar = HolType::var("b");

  k.new_constant("emp", h);
  k.new_constant("pure", fun_ty(b, h));
  k.new_constant("hand", fun_ty(h, fun_ty(h, h)));
  k.new_constant("**", fun_ty(h, fun_ty(h, h)));
  k.new_constant("|--", fun_ty(h, fun_ty(h, b)));
  k.new_constant("hexists", fun_ty(fun_ty(a, h), h));
  k.new_constant("data_at", fun_ty(i, fun_ty(c, fun_ty(i, h))));
  k.new_constant("undef_data_at", fun_ty(i, fun_ty(c, h)));
  k.new_constant("array_at", fun_ty(i, fun_ty(c, fun_ty(list_ty(i), h))));
  k.new_constant("undef_array_at", fun_ty(i, fun_ty(c, fun_ty(i, h))));
  k.new_constant("hite", fun_ty(b, fun_ty(h, fun_ty(h, h))));
  k.new_constant("sizeof", fun_ty(c, i));
  for (const char* name : {"Tchar", "Tuchar", "Tint", "Tptr"}) k.new_constant(name, c);
  for (const char* name : {"+", "-", "*", "/", "%", "EXP"})
    k.new_constant(name, fun_ty(i, fun_ty(i, i)));
  k.new_constant("--", fun_ty(i, i));
  for (const char* name : {"<", "<=", ">", ">="}) k.new_constant(name, fun_ty(i, fun_ty(i, b)));
  k.new_constant("nil", list_ty(a));
  k.new_constant("cons", fun_ty(a, fun_ty(list_ty(a), list_ty(a))));
  k.new_constant("length", fun_ty(list_ty(a), i));
  k.new_constant("append", fun_ty(list_ty(a), fun_ty(list_ty(a), list_ty(a))));
  k.new_constant("rev", fun_ty(list_ty(a), list_ty(a)));
  k.new_constant("replicate", fun_ty(i, fun_ty(i, list_ty(i))));
  k.new_constant("fold_right",
                 fun_ty(fun_ty(a, fun_ty(bvar, bvar)), fun_ty(list_ty(a), fun_ty(bvar, bvar))));
}

void register_definitions(Kernel& k) {
  // fact p = pure(p) && emp
  Term p = mk_var("p", bool_ty());
  Term fact_head = mk_app(mk_var("fact", fun_ty(bool_ty(), hprop_ty())), p);
  Term fact_body = mk_app(mk_app(k.constant("hand"), mk_app(k.constant("pure"), p)),
                          k.constant("emp"));
  k.new_basic_definition("fact", k.mk_eq(fact_head, fact_body));

  // snoc l x = append l (cons x nil)
  HolType a = HolType::var("a");
  Term l = mk_var("l", list_ty(a)), x = mk_var("x", a);
  Term snoc_head =
      mk_app(mk_app(mk_var("snoc", fun_ty(list_ty(a), fun_ty(a, list_ty(a)))), l), x);
  Term nil_a = k.mk_const("nil", list_ty(a));
  Term cons_a = k.mk_const("cons", fun_ty(a, fun_ty(list_ty(a), list_ty(a))));
  Term append_a =
      k.mk_const("append", fun_ty(list_ty(a), fun_ty(list_ty(a), list_ty(a))));
  Term snoc_body = mk_app(mk_app(append_a, l), mk_app(mk_app(cons_a, x), nil_a));
  k.new_basic_definition("snoc", k.mk_eq(snoc_head, snoc_body));

  // hiter hps = fold_right (**) hps emp
  Term hps = mk_var("hps", list_ty(hprop_ty()));
  Term hiter_head = mk_app(mk_var("hiter", fun_ty(list_ty(hprop_ty()), hprop_ty())), hps);
  Term fr = k.mk_const("fold_right",
                       fun_ty(fun_ty(hprop_ty(), fun_ty(hprop_ty(), hprop_ty())),
                              fun_ty(list_ty(hprop_ty()), fun_ty(hprop_ty(), hprop_ty()))));
  Term hiter_body = mk_app(mk_app(mk_app(fr, k.constant("**")), hps), k.constant("emp"));
  k.new_basic_definition("hiter", k.mk_eq(hiter_head, hiter_body));
}

// First-order axioms are written in the surface syntax for readability.
struct QuotedAxiom {
  const char* tag;
  const char* statement;
};

const QuotedAxiom kQuotedAxioms[] = {
    {"hsep-comm", "forall (h1:hprop) (h2:hprop). h1 ** h2 -|- h2 ** h1"},
    {"hsep-assoc",
     "forall (h1:hprop) (h2:hprop) (h3:hprop). (h1 ** h2) ** h3 -|- h1 ** (h2 ** h3)"},
    {"hsep-cancel-right",
     "forall (h1:hprop) (h1p:hprop) (h2:hprop). (h1 |-- h1p) ==> (h1 ** h2 |-- h1p ** h2)"},
    {"hsep-emp-right", "forall (h:hprop). h ** emp -|- h"},
    {"hsep-emp-left", "forall (h:hprop). emp ** h -|- h"},
    {"entail-refl", "forall (h:hprop). h |-- h"},
    {"entail-trans",
     "forall (h1:hprop) (h2:hprop) (h3:hprop). (h1 |-- h2) ==> ((h2 |-- h3) ==> (h1 |-- h3))"},
    {"pure-lift", "forall (p:bool) (h:hprop). pure(p) && h -|- fact(p) ** h"},
    {"fact-merge", "forall (p:bool) (q:bool). fact(p && q) -|- fact(p) ** fact(q)"},
    {"fact-elim",
     "forall (p:bool) (h1:hprop) (h2:hprop). (p ==> (h1 |-- h2)) ==> "
     "(fact(p) ** h1 |-- fact(p) ** h2)"},
    {"fact-contradict",
     "forall (p:bool) (h1:hprop) (h2:hprop). !p ==> (fact(p) ** h1 |-- h2)"},
    {"fact-drop", "forall (p:bool) (h:hprop). fact(p) ** h |-- h"},
    {"fact-true", "fact(T) -|- emp"},
    {"sizeof-Tchar", "sizeof(Tchar) == 1"},
    {"sizeof-Tuchar", "sizeof(Tuchar) == 1"},
    {"sizeof-Tint", "sizeof(Tint) == 4"},
    {"sizeof-Tptr", "sizeof(Tptr) == 8"},
    {"hite-true", "forall (b:bool) (h1:hprop) (h2:hprop). b ==> (hite(b, h1, h2) -|- h1)"},
    {"hite-false", "forall (b:bool) (h1:hprop) (h2:hprop). !b ==> (hite(b, h1, h2) -|- h2)"},
    {"data_at_undef",
     "forall (a:integer) (ty:ctype) (v:integer). data_at(a, ty, v) |-- undef_data_at(a, ty)"},
    {"undef_array_at_select_first",
     "forall (a:integer) (ty:ctype) (n:integer). n > 0 ==> "
     "(undef_array_at(a, ty, n) |-- undef_data_at(a, ty) ** "
     "undef_array_at(a + sizeof(ty), ty, n - 1))"},
    {"undef_array_at_destruct",
     "forall (a:integer) (ty:ctype) (n:integer) (i:integer). 0 <= i && i < n ==> "
     "(undef_array_at(a, ty, n) |-- undef_array_at(a, ty, i) ** "
     "undef_data_at(a + i * sizeof(ty), ty) ** "
     "undef_array_at(a + (i + 1) * sizeof(ty), ty, n - (i + 1)))"},
    {"undef_array_at_nil",
     "forall (a:integer) (ty:ctype) (n:integer). n == 0 ==> (undef_array_at(a, ty, n) -|- emp)"},
    {"array_at_nil", "forall (a:integer) (ty:ctype). array_at(a, ty, (nil:list integer)) -|- emp"},
    {"array_at_cons",
     "forall (a:integer) (ty:ctype) (v:integer) (l:list integer). "
     "array_at(a, ty, cons(v, l)) -|- data_at(a, ty, v) ** array_at(a + sizeof(ty), ty, l)"},
    {"array_at_snoc",
     "forall (a:integer) (ty:ctype) (l:list integer) (v:integer) (n:integer). "
     "length(l) == n ==> (array_at(a, ty, l) ** data_at(a + n * sizeof(ty), ty, v) -|- "
     "array_at(a, ty, snoc(l, v)))"},
    {"array_at_replicate_snoc",
     "forall (a:integer) (ty:ctype) (i:integer) (v:integer). i >= 0 ==> "
     "(array_at(a, ty, replicate(i, v)) ** data_at(a + i * sizeof(ty), ty, v) -|- "
     "array_at(a, ty, replicate(i + 1, v)))"},
    {"array_at_replicate_nil",
     "forall (a:integer) (ty:ctype) (n:integer) (v:integer). n == 0 ==> "
     "(array_at(a, ty, replicate(n, v)) -|- emp)"},
    {"array_at_replicate_select_first",
     "forall (a:integer) (ty:ctype) (n:integer) (v:integer). n > 0 ==> "
     "(array_at(a, ty, replicate(n, v)) -|- "
     "data_at(a, ty, v) ** array_at(a + sizeof(ty), ty, replicate(n - 1, v)))"},
    {"length-nil", "length((nil:list integer)) == 0"},
    {"length-cons",
     "forall (h:integer) (t:list integer). length(cons(h, t)) == length(t) + 1"},
    {"length-replicate",
     "forall (n:integer) (v:integer). n >= 0 ==> length(replicate(n, v)) == n"},
    {"replicate-zero", "forall (v:integer). replicate(0, v) == (nil:list integer)"},
    {"replicate-succ",
     "forall (n:integer) (v:integer). n > 0 ==> replicate(n, v) == cons(v, replicate(n - 1, v))"},
    {"replicate-snoc",
     "forall (n:integer) (v:integer). n >= 0 ==> snoc(replicate(n, v), v) == "
     "replicate(n + 1, v)"},
    {"append-nil", "forall (l:list integer). append(nil, l) == l"},
    {"append-nil-right", "forall (l:list integer). append(l, nil) == l"},
    {"append-cons",
     "forall (h:integer) (t:list integer) (l:list integer). "
     "append(cons(h, t), l) == cons(h, append(t, l))"},
    {"append-assoc",
     "forall (a:list integer) (b:list integer) (c:list integer). "
     "append(append(a, b), c) == append(a, append(b, c))"},
    {"rev-nil", "rev((nil:list integer)) == nil"},
    {"rev-cons",
     "forall (h:integer) (t:list integer). rev(cons(h, t)) == append(rev(t), cons(h, nil))"},
    {"list-distinct",
     "forall (h:integer) (t:list integer). !((nil:list integer) == cons(h, t))"},
    {"list-inject",
     "forall (h1:integer) (t1:list integer) (h2:integer) (t2:list integer). "
     "(cons(h1, t1) == cons(h2, t2)) <=> (h1 == h2 && t1 == t2)"},
};

void register_higher_order_axioms(Kernel& k, std::vector<std::string>& tags) {
  HolType a = HolType::var("a");
  HolType pa = fun_ty(a, hprop_ty());
  Term P = mk_var("P", pa), Q = mk_var("Q", pa);
  Term x = mk_var("x", a), h = mk_var("h", hprop_ty());
  Term hexists_a = k.mk_const("hexists", fun_ty(pa, hprop_ty()));
  Term sep = k.constant("**");
  Term entail = k.constant("|--");
  auto ent = [&](const Term& l, const Term& r) { return mk_app(mk_app(entail, l), r); };
  auto sp = [&](const Term& l, const Term& r) { return mk_app(mk_app(sep, l), r); };
  auto add_axiom = [&](const char* tag, const Term& statement) {
    k.new_axiom(tag, statement);
    tags.push_back(tag);
  };

  // hexists-monotone: !P Q. (!x. P x |-- Q x) ==> (hexists P |-- hexists Q)
  Term premise = rules::mk_forall(k, x, ent(mk_app(P, x), mk_app(Q, x)));
  Term concl = ent(mk_app(hexists_a, P), mk_app(hexists_a, Q));
  add_axiom("hexists-monotone",
            rules::mk_forall(k, P, rules::mk_forall(k, Q, rules::mk_imp(k, premise, concl))));

  // hexists-intro: !P t. P t |-- hexists P
  Term t = mk_var("t", a);
  add_axiom("hexists-intro",
            rules::mk_forall(
                k, P, rules::mk_forall(k, t, ent(mk_app(P, t), mk_app(hexists_a, P)))));

  // hexists-elim: !P H. (!x. P x |-- H) ==> (hexists P |-- H)
  add_axiom("hexists-elim",
            rules::mk_forall(
                k, P,
                rules::mk_forall(
                    k, h,
                    rules::mk_imp(k, rules::mk_forall(k, x, ent(mk_app(P, x), h)),
                                  ent(mk_app(hexists_a, P), h)))));

  // hexists-unused: !h. hexists (\x. h) -|- h
  add_axiom("hexists-unused",
            rules::mk_forall(k, h, k.mk_eq(mk_app(hexists_a, mk_abs(x, h)), h)));

  // hexists-sep-left: !P h. (hexists P) ** h -|- hexists (\x. P x ** h)
  add_axiom("hexists-sep-left",
            rules::mk_forall(
                k, P,
                rules::mk_forall(k, h,
                                 k.mk_eq(sp(mk_app(hexists_a, P), h),
                                         mk_app(hexists_a, mk_abs(x, sp(mk_app(P, x), h)))))));
  // hexists-sep-right: !h P. h ** (hexists P) -|- hexists (\x. h ** P x)
  add_axiom("hexists-sep-right",
            rules::mk_forall(
                k, h,
                rules::mk_forall(k, P,
                                 k.mk_eq(sp(h, mk_app(hexists_a, P)),
                                         mk_app(hexists_a, mk_abs(x, sp(h, mk_app(P, x))))))));

  // fold_right-nil / fold_right-cons at 'a, 'b
  HolType b = HolType::var("b");
  Term f = mk_var("f", fun_ty(a, fun_ty(b, b)));
  Term base = mk_var("base", b);
  Term hd = mk_var("hd", a), tl = mk_var("tl", list_ty(a));
  Term fr = k.mk_const("fold_right",
                       fun_ty(fun_ty(a, fun_ty(b, b)), fun_ty(list_ty(a), fun_ty(b, b))));
  Term nil_a = k.mk_const("nil", list_ty(a));
  Term cons_a = k.mk_const("cons", fun_ty(a, fun_ty(list_ty(a), list_ty(a))));
  add_axiom("fold_right-nil",
            rules::mk_forall(
                k, f,
                rules::mk_forall(
                    k, base, k.mk_eq(mk_app(mk_app(mk_app(fr, f), nil_a), base), base))));
  Term lhs = mk_app(mk_app(mk_app(fr, f), mk_app(mk_app(cons_a, hd), tl)), base);
  Term rhs = mk_app(mk_app(f, hd), mk_app(mk_app(mk_app(fr, f), tl), base));
  add_axiom("fold_right-cons",
            rules::mk_forall(
                k, f,
                rules::mk_forall(
                    k, hd,
                    rules::mk_forall(k, tl, rules::mk_forall(k, base, k.mk_eq(lhs, rhs))))));

  // list-induction at integer elements:
  // !P. (P nil && (!h t. P t ==> P (cons h t))) ==> (!l. P l)
  HolType li = list_ty(integer_ty());
  Term Pl = mk_var("P", fun_ty(li, bool_ty()));
  Term ih = mk_var("h", integer_ty()), it = mk_var("t", li), il = mk_var("l", li);
  Term nil_i = k.mk_const("nil", li);
  Term cons_i = k.mk_const("cons", fun_ty(integer_ty(), fun_ty(li, li)));
  Term step = rules::mk_forall(
      k, ih,
      rules::mk_forall(k, it,
                       rules::mk_imp(k, mk_app(Pl, it),
                                     mk_app(Pl, mk_app(mk_app(cons_i, ih), it)))));
  Term induct = rules::mk_imp(k, rules::mk_conj(k, mk_app(Pl, nil_i), step),
                              rules::mk_forall(k, il, mk_app(Pl, il)));
  add_axiom("list-induction", rules::mk_forall(k, Pl, induct));
}

}  // namespace

Theory register_theory(Kernel& k) {
  if (!k.has_constant("T")) rules::bootstrap_base_logic(k);
  register_constants(k);
  register_definitions(k);
  Theory th(k);
  quote::SyntaxEnv empty;
  for (const auto& [tag, text] : kQuotedAxioms) {
    Term statement = quote::parse_term(k, text, empty);
    k.new_axiom(tag, statement);
    th.tags_.push_back(tag);
  }
  register_higher_order_axioms(k, th.tags_);
  return th;
}

Theorem Theory::axiom(const std::string& tag) const {
  if (auto th = k_->find_axiom(tag)) return *th;
  throw RegistryError("unknown axiom: " + tag);
}

namespace {
std::string dashed(const std::string& name) {
  std::string out = name;
  for (char& c : out)
    if (c == '_') c = '-';
  return out;
}
}  // namespace

bool Theory::has_lemma(const std::string& name) const {
  if (k_->find_axiom(name)) return true;
  if (k_->find_axiom(dashed(name))) return true;
  auto strip = [&](const std::string& suffix) -> std::string {
    if (name.size() > suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
      return name.substr(0, name.size() - suffix.size());
    return "";
  };
  std::string base = strip("_unfold");
  if (base.empty()) base = strip("_fold");
  return !base.empty() && user_defs_.count(base) > 0;
}

Theorem Theory::lemma(const std::string& name, const std::vector<Term>& args) const {
  Theorem th;
  bool fold = false;
  if (auto ax = k_->find_axiom(name)) {
    th = *ax;
  } else if (auto axd = k_->find_axiom(dashed(name))) {
    th = *axd;
  } else {
    auto strip = [&](const std::string& suffix) -> std::string {
      if (name.size() > suffix.size() &&
          name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
        return name.substr(0, name.size() - suffix.size());
      return "";
    };
    std::string base = strip("_unfold");
    if (base.empty()) {
      base = strip("_fold");
      fold = true;
    }
    auto it = base.empty() ? user_defs_.end() : user_defs_.find(base);
    if (it == user_defs_.end()) throw RegistryError("unknown lemma: " + name);
    th = it->second;
  }
  std::vector<Term> binders;
  rules::strip_forall(th.conclusion(), binders);
  if (args.size() > binders.size())
    throw RuleError("lemma " + name + " takes at most " + std::to_string(binders.size()) +
                    " arguments, got " + std::to_string(args.size()));
  Theorem inst = rules::specialize(*k_, th, args);
  if (fold) {
    std::vector<Term> rest;
    Term body = rules::strip_forall(inst.conclusion(), rest);
    if (!rest.empty() || !is_eq(body))
      throw RuleError("lemma " + name + ": fold form needs a fully applied equation");
    inst = k_->symm(inst);
  }
  return inst;
}

Theorem Theory::define_predicate(const std::string& name, const std::vector<Term>& params,
                                 const Term& body) {
  for (const auto& p : params)
    if (!p.is_var()) throw RuleError("define_predicate: parameters must be variables");
  Term head_var = mk_var(name, [&] {
    HolType ty = body.type();
    for (size_t i = params.size(); i-- > 0;) ty = fun_ty(params[i].type(), ty);
    return ty;
  }());
  bool recursive = is_free_in(head_var, body);
  Theorem eq;
  if (!recursive) {
    Term lhs = head_var;
    for (const auto& p : params) lhs = mk_app(lhs, p);
    eq = k_->new_basic_definition(name, k_->mk_eq(lhs, body));
    // re-state applied and forall-closed for the fold/unfold accessors
    Term applied_lhs = k_->constant(name);
    Theorem conv = eq;
    for (const auto& p : params) {
      conv = rules::ap_thm(*k_, conv, p);
      Term rhs = eq_rhs(conv.conclusion());
      if (rhs.is_app() && rhs.fn().is_abs()) conv = k_->trans(conv, k_->beta(rhs));
      (void)applied_lhs;
    }
    eq = conv;
    for (size_t i = params.size(); i-- > 0;) eq = rules::gen(*k_, params[i], eq);
  } else {
    k_->new_constant(name, head_var.type());
    Term c = k_->constant(name);
    Term lhs = c;
    for (const auto& p : params) lhs = mk_app(lhs, p);
    Term closed_body = subst_term({{head_var, c}}, body);
    Term statement = k_->mk_eq(lhs, closed_body);
    for (size_t i = params.size(); i-- > 0;)
      statement = rules::mk_forall(*k_, params[i], statement);
    eq = k_->new_axiom("def-" + name, statement);
  }
  user_defs_.emplace(name, eq);
  return eq;
}

// --- builders ---

Term Theory::emp() const { return k_->constant("emp"); }
Term Theory::ctype_const(const std::string& name) const { return k_->constant(name); }
Term Theory::mk_int(const BigInt& v) const {
  if (v.negative()) return mk_app(k_->constant("--"), mk_int_literal(-v));
  return mk_int_literal(v);
}
Term Theory::mk_sep(const Term& a, const Term& b) const {
  return mk_app(mk_app(k_->constant("**"), a), b);
}
Term Theory::mk_sep_list(const std::vector<Term>& cs) const {
  if (cs.empty()) return emp();
  Term out = cs.back();
  for (size_t i = cs.size() - 1; i-- > 0;) out = mk_sep(cs[i], out);
  return out;
}
Term Theory::mk_fact(const Term& p) const { return mk_app(k_->constant("fact"), p); }
Term Theory::mk_pure(const Term& p) const { return mk_app(k_->constant("pure"), p); }
Term Theory::mk_hand(const Term& a, const Term& b) const {
  return mk_app(mk_app(k_->constant("hand"), a), b);
}
Term Theory::mk_entail(const Term& l, const Term& r) const {
  return mk_app(mk_app(k_->constant("|--"), l), r);
}
Term Theory::mk_bientail(const Term& l, const Term& r) const { return k_->mk_eq(l, r); }
Term Theory::mk_data_at(const Term& a, const Term& c, const Term& v) const {
  return mk_app(mk_app(mk_app(k_->constant("data_at"), a), c), v);
}
Term Theory::mk_undef_data_at(const Term& a, const Term& c) const {
  return mk_app(mk_app(k_->constant("undef_data_at"), a), c);
}
Term Theory::mk_hexists(const Term& var, const Term& body) const {
  Term hex = k_->mk_const("hexists", fun_ty(fun_ty(var.type(), hprop_ty()), hprop_ty()));
  return mk_app(hex, mk_abs(var, body));
}
Term Theory::mk_sizeof(const Term& cty) const { return mk_app(k_->constant("sizeof"), cty); }
Term Theory::mk_add(const Term& a, const Term& b) const {
  return mk_app(mk_app(k_->constant("+"), a), b);
}
Term Theory::mk_sub(const Term& a, const Term& b) const {
  return mk_app(mk_app(k_->constant("-"), a), b);
}
Term Theory::mk_mul(const Term& a, const Term& b) const {
  return mk_app(mk_app(k_->constant("*"), a), b);
}

bool Theory::is_fact(const Term& t) const {
  return t.is_app() && t.fn().is_const() && t.fn().name() == "fact";
}
bool Theory::is_hexists(const Term& t) const {
  return t.is_app() && t.fn().is_const() && t.fn().name() == "hexists" && t.arg().is_abs();
}

std::vector<Term> Theory::conjuncts(const Term& t) const {
  std::vector<Term> out;
  std::vector<Term> stack{t};
  while (!stack.empty()) {
    Term cur = stack.back();
    stack.pop_back();
    if (is_sep(cur)) {
      stack.push_back(binary_rhs(cur));
      stack.push_back(binary_lhs(cur));
    } else {
      out.push_back(cur);
    }
  }
  return out;
}

}  // namespace cstar::sep
