// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0

#include "cstar/kernel.hpp"

#include <algorithm>

namespace cstar {

// ---------------------------------------------------------------------------
// HolType
// ---------------------------------------------------------------------------

struct HolType::Node {
  Kind kind;
  std::string name;
  std::vector<HolType> args;
};

HolType HolType::var(std::string name) {
  HolType t;
  t.node_ = std::make_shared<Node>(Node{Kind::Var, std::move(name), {}});
  return t;
}

HolType HolType::app(std::string ctor, std::vector<HolType> args) {
  HolType t;
  t.node_ = std::make_shared<Node>(Node{Kind::App, std::move(ctor), std::move(args)});
  return t;
}

HolType::Kind HolType::kind() const { return node_->kind; }
const std::string& HolType::name() const { return node_->name; }
const std::vector<HolType>& HolType::args() const { return node_->args; }

bool HolType::operator==(const HolType& other) const {
  if (node_ == other.node_) return true;
  if (!node_ || !other.node_) return false;
  if (node_->kind != other.node_->kind || node_->name != other.node_->name) return false;
  if (node_->args.size() != other.node_->args.size()) return false;
  for (size_t i = 0; i < node_->args.size(); ++i)
    if (!(node_->args[i] == other.node_->args[i])) return false;
  return true;
}

std::string HolType::to_string() const {
  if (kind() == Kind::Var) return "'" + name();
  if (name() == "fun" && args().size() == 2) {
    std::string from = args()[0].to_string();
    if (args()[0].is_fun()) from = "(" + from + ")";
    return from + " -> " + args()[1].to_string();
  }
  std::string s = name();
  for (const auto& a : args()) {
    bool paren = a.kind() == Kind::App && !a.args().empty();
    s += " " + std::string(paren ? "(" : "") + a.to_string() + (paren ? ")" : "");
  }
  return s;
}

bool HolType::is_fun() const {
  return kind() == Kind::App && name() == "fun" && args().size() == 2;
}
const HolType& HolType::fun_from() const { return args()[0]; }
const HolType& HolType::fun_to() const { return args()[1]; }

HolType bool_ty() {
  static const HolType t = HolType::app("bool", {});
  return t;
}
HolType integer_ty() {
  static const HolType t = HolType::app("integer", {});
  return t;
}
HolType hprop_ty() {
  static const HolType t = HolType::app("hprop", {});
  return t;
}
HolType ctype_ty() {
  static const HolType t = HolType::app("ctype", {});
  return t;
}
HolType list_ty(HolType elem) { return HolType::app("list", {std::move(elem)}); }
HolType fun_ty(HolType from, HolType to) {
  return HolType::app("fun", {std::move(from), std::move(to)});
}

HolType apply_type_subst(const TypeSubst& subst, const HolType& ty) {
  if (ty.kind() == HolType::Kind::Var) {
    for (const auto& [from, to] : subst)
      if (from == ty) return to;
    return ty;
  }
  bool changed = false;
  std::vector<HolType> args;
  args.reserve(ty.args().size());
  for (const auto& a : ty.args()) {
    args.push_back(apply_type_subst(subst, a));
    if (!(args.back() == a)) changed = true;
  }
  if (!changed) return ty;
  return HolType::app(ty.name(), std::move(args));
}

bool match_type(const HolType& pattern, const HolType& concrete, TypeSubst& subst) {
  if (pattern.kind() == HolType::Kind::Var) {
    for (const auto& [from, to] : subst)
      if (from == pattern) return to == concrete;
    subst.emplace_back(pattern, concrete);
    return true;
  }
  if (concrete.kind() != HolType::Kind::App) return false;
  if (pattern.name() != concrete.name() || pattern.args().size() != concrete.args().size())
    return false;
  for (size_t i = 0; i < pattern.args().size(); ++i)
    if (!match_type(pattern.args()[i], concrete.args()[i], subst)) return false;
  return true;
}

void collect_tyvars(const HolType& ty, std::vector<HolType>& out) {
  if (ty.kind() == HolType::Kind::Var) {
    for (const auto& v : out)
      if (v == ty) return;
    out.push_back(ty);
    return;
  }
  for (const auto& a : ty.args()) collect_tyvars(a, out);
}

// ---------------------------------------------------------------------------
// Term
// ---------------------------------------------------------------------------

struct Term::Node {
  Kind kind;
  std::string name;  // Var, Const
  HolType ty;        // the term's type (cached for App/Abs)
  Term child0;       // App: fn, Abs: bound var
  Term child1;       // App: arg, Abs: body
};

Term::Kind Term::kind() const { return node_->kind; }
const HolType& Term::type() const { return node_->ty; }
const std::string& Term::name() const { return node_->name; }
const Term& Term::fn() const { return node_->child0; }
const Term& Term::arg() const { return node_->child1; }
const Term& Term::bound_var() const { return node_->child0; }
const Term& Term::body() const { return node_->child1; }

bool Term::operator==(const Term& other) const {
  if (node_ == other.node_) return true;
  if (!node_ || !other.node_) return false;
  if (kind() != other.kind()) return false;
  switch (kind()) {
    case Kind::Var:
    case Kind::Const:
      return name() == other.name() && type() == other.type();
    case Kind::App:
      return fn() == other.fn() && arg() == other.arg();
    case Kind::Abs:
      return bound_var() == other.bound_var() && body() == other.body();
  }
  return false;
}

Term mk_var(std::string name, HolType ty) {
  Term t(std::make_shared<const Term::Node>(
      Term::Node{Term::Kind::Var, std::move(name), std::move(ty), {}, {}}));
  return t;
}

Term mk_app(const Term& f, const Term& x) {
  if (!f.valid() || !x.valid()) throw TypeError("mk_app: invalid term");
  if (!f.type().is_fun())
    throw TypeError("mk_app: function position has non-function type " + f.type().to_string() +
                    " applied to " + x.type().to_string());
  if (!(f.type().fun_from() == x.type()))
    throw TypeError("mk_app: type mismatch, expected argument of type " +
                    f.type().fun_from().to_string() + " but got " + x.type().to_string());
  return Term(std::make_shared<const Term::Node>(
      Term::Node{Term::Kind::App, {}, f.type().fun_to(), f, x}));
}

Term mk_app(const Term& f, const std::vector<Term>& args) {
  Term t = f;
  for (const auto& a : args) t = mk_app(t, a);
  return t;
}

Term mk_abs(const Term& var, const Term& body) {
  if (!var.is_var()) throw TypeError("mk_abs: binder must be a variable");
  return Term(std::make_shared<const Term::Node>(
      Term::Node{Term::Kind::Abs, {}, fun_ty(var.type(), body.type()), var, body}));
}

static int type_compare(const HolType& a, const HolType& b) {
  if (a == b) return 0;
  std::string sa = a.to_string(), sb = b.to_string();
  return sa < sb ? -1 : 1;
}

int term_compare(const Term& a, const Term& b) {
  if (!a.valid() || !b.valid()) return a.valid() ? 1 : (b.valid() ? -1 : 0);
  if (a.kind() != b.kind()) return static_cast<int>(a.kind()) < static_cast<int>(b.kind()) ? -1 : 1;
  switch (a.kind()) {
    case Term::Kind::Var:
    case Term::Kind::Const: {
      if (a.name() != b.name()) return a.name() < b.name() ? -1 : 1;
      return type_compare(a.type(), b.type());
    }
    case Term::Kind::App: {
      int c = term_compare(a.fn(), b.fn());
      if (c != 0) return c;
      return term_compare(a.arg(), b.arg());
    }
    case Term::Kind::Abs: {
      int c = term_compare(a.bound_var(), b.bound_var());
      if (c != 0) return c;
      return term_compare(a.body(), b.body());
    }
  }
  return 0;
}

static bool alpha_eq_rec(const Term& a, const Term& b,
                         std::vector<std::pair<Term, Term>>& env) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Term::Kind::Var: {
      for (size_t i = env.size(); i-- > 0;) {
        bool la = env[i].first == a, lb = env[i].second == b;
        if (la || lb) return la && lb;
      }
      return a.name() == b.name() && a.type() == b.type();
    }
    case Term::Kind::Const:
      return a.name() == b.name() && a.type() == b.type();
    case Term::Kind::App:
      return alpha_eq_rec(a.fn(), b.fn(), env) && alpha_eq_rec(a.arg(), b.arg(), env);
    case Term::Kind::Abs: {
      if (!(a.bound_var().type() == b.bound_var().type())) return false;
      env.emplace_back(a.bound_var(), b.bound_var());
      bool r = alpha_eq_rec(a.body(), b.body(), env);
      env.pop_back();
      return r;
    }
  }
  return false;
}

bool alpha_eq(const Term& a, const Term& b) {
  if (!a.valid() || !b.valid()) return a.valid() == b.valid();
  std::vector<std::pair<Term, Term>> env;
  return alpha_eq_rec(a, b, env);
}

static void free_vars_rec(const Term& t, std::vector<Term>& bound, std::vector<Term>& out) {
  switch (t.kind()) {
    case Term::Kind::Var: {
      for (const auto& b : bound)
        if (b == t) return;
      for (const auto& v : out)
        if (v == t) return;
      out.push_back(t);
      return;
    }
    case Term::Kind::Const:
      return;
    case Term::Kind::App:
      free_vars_rec(t.fn(), bound, out);
      free_vars_rec(t.arg(), bound, out);
      return;
    case Term::Kind::Abs:
      bound.push_back(t.bound_var());
      free_vars_rec(t.body(), bound, out);
      bound.pop_back();
      return;
  }
}

std::vector<Term> free_vars(const Term& t) {
  std::vector<Term> bound, out;
  free_vars_rec(t, bound, out);
  return out;
}

bool is_free_in(const Term& var, const Term& t) {
  for (const auto& v : free_vars(t))
    if (v == var) return true;
  return false;
}

bool is_closed(const Term& t) { return free_vars(t).empty(); }

static Term rename_apart(const Term& var, const std::vector<Term>& avoid_frees) {
  std::string base = var.name();
  for (int i = 1;; ++i) {
    std::string candidate = base + "_" + std::to_string(i);
    bool clash = false;
    for (const auto& v : avoid_frees)
      if (v.name() == candidate) {
        clash = true;
        break;
      }
    if (!clash) return mk_var(candidate, var.type());
  }
}

Term subst_term(const TermSubst& subst, const Term& t) {
  switch (t.kind()) {
    case Term::Kind::Var: {
      for (const auto& [from, to] : subst)
        if (from == t) return to;
      return t;
    }
    case Term::Kind::Const:
      return t;
    case Term::Kind::App: {
      Term f = subst_term(subst, t.fn());
      Term x = subst_term(subst, t.arg());
      if (f == t.fn() && x == t.arg()) return t;
      return mk_app(f, x);
    }
    case Term::Kind::Abs: {
      const Term& bv = t.bound_var();
      TermSubst inner;
      for (const auto& [from, to] : subst)
        if (!(from == bv)) inner.push_back({from, to});
      if (inner.empty()) return t;
      // drop pairs that cannot act
      TermSubst active;
      for (const auto& [from, to] : inner)
        if (is_free_in(from, t.body())) active.push_back({from, to});
      if (active.empty()) return t;
      // capture check: does any replacement contain the binder free?
      bool capture = false;
      for (const auto& [from, to] : active)
        if (is_free_in(bv, to)) {
          capture = true;
          break;
        }
      Term bv2 = bv;
      Term body = t.body();
      if (capture) {
        std::vector<Term> avoid = free_vars(t.body());
        for (const auto& [from, to] : active) {
          auto fv = free_vars(to);
          avoid.insert(avoid.end(), fv.begin(), fv.end());
        }
        bv2 = rename_apart(bv, avoid);
        body = subst_term({{bv, bv2}}, body);
      }
      return mk_abs(bv2, subst_term(active, body));
    }
  }
  return t;
}

Term subst_term_types(const TypeSubst& subst, const Term& t) {
  switch (t.kind()) {
    case Term::Kind::Var:
      return mk_var(t.name(), apply_type_subst(subst, t.type()));
    case Term::Kind::Const: {
      HolType ty = apply_type_subst(subst, t.type());
      if (ty == t.type()) return t;
      Term r(std::make_shared<const Term::Node>(
          Term::Node{Term::Kind::Const, t.name(), ty, {}, {}}));
      return r;
    }
    case Term::Kind::App:
      return mk_app(subst_term_types(subst, t.fn()), subst_term_types(subst, t.arg()));
    case Term::Kind::Abs:
      return mk_abs(subst_term_types(subst, t.bound_var()), subst_term_types(subst, t.body()));
  }
  return t;
}

Term strip_app(const Term& t, std::vector<Term>& args) {
  Term cur = t;
  while (cur.is_app()) {
    args.push_back(cur.arg());
    cur = cur.fn();
  }
  std::reverse(args.begin(), args.end());
  return cur;
}

bool is_literal_const_name(const std::string& name) {
  if (name.size() >= 2 && name[0] == '&') {
    if (name[1] == '"') return name.back() == '"' && name.size() >= 4;
    for (size_t i = 1; i < name.size(); ++i)
      if (name[i] < '0' || name[i] > '9') return false;
    return true;
  }
  return false;
}

Term mk_int_literal(const BigInt& n) {
  if (n.negative()) throw TypeError("mk_int_literal: literal names are non-negative");
  return Term(std::make_shared<const Term::Node>(
      Term::Node{Term::Kind::Const, "&" + n.to_string(), integer_ty(), {}, {}}));
}

Term mk_address_const(const std::string& var_name) {
  return Term(std::make_shared<const Term::Node>(
      Term::Node{Term::Kind::Const, "&\"" + var_name + "\"", integer_ty(), {}, {}}));
}

bool is_int_literal(const Term& t) {
  return t.is_const() && t.name().size() >= 2 && t.name()[0] == '&' && t.name()[1] != '"' &&
         is_literal_const_name(t.name());
}

std::optional<BigInt> dest_int_literal(const Term& t) {
  if (is_int_literal(t)) return BigInt::from_string(t.name().substr(1));
  if (t.is_app() && t.fn().is_const() && t.fn().name() == "--" && is_int_literal(t.arg()))
    return -BigInt::from_string(t.arg().name().substr(1));
  return std::nullopt;
}

bool is_address_const(const Term& t) {
  return t.is_const() && t.name().size() >= 4 && t.name()[0] == '&' && t.name()[1] == '"';
}

bool is_eq(const Term& t) {
  return t.is_app() && t.fn().is_app() && t.fn().fn().is_const() && t.fn().fn().name() == "=";
}
Term eq_lhs(const Term& t) { return t.fn().arg(); }
Term eq_rhs(const Term& t) { return t.arg(); }

bool is_binary(const Term& t, const std::string& const_name) {
  return t.is_app() && t.fn().is_app() && t.fn().fn().is_const() &&
         t.fn().fn().name() == const_name;
}
Term binary_lhs(const Term& t) { return t.fn().arg(); }
Term binary_rhs(const Term& t) { return t.arg(); }

Term consequent(const Term& t) {
  if (is_eq(t) || is_binary(t, "==>") || is_binary(t, "|--")) return t.arg();
  throw RuleError("consequent: not an implication, entailment, or equality");
}

Term antecedent(const Term& t) {
  if (is_eq(t) || is_binary(t, "==>") || is_binary(t, "|--")) return t.fn().arg();
  throw RuleError("antecedent: not an implication, entailment, or equality");
}

// ---------------------------------------------------------------------------
// Theorem plumbing
// ---------------------------------------------------------------------------

std::vector<Term> merge_hyps(const std::vector<Term>& a, const std::vector<Term>& b) {
  std::vector<Term> out = a;
  for (const auto& h : b) {
    bool present = false;
    for (const auto& e : out)
      if (alpha_eq(e, h)) {
        present = true;
        break;
      }
    if (!present) out.push_back(h);
  }
  std::sort(out.begin(), out.end(), TermLess{});
  return out;
}

static std::vector<Term> remove_hyp(const std::vector<Term>& hyps, const Term& h) {
  std::vector<Term> out;
  for (const auto& e : hyps)
    if (!alpha_eq(e, h)) out.push_back(e);
  return out;
}

// ---------------------------------------------------------------------------
// Kernel
// ---------------------------------------------------------------------------

Kernel::Kernel() {
  type_arities_ = {{"bool", 0}, {"fun", 2}, {"integer", 0},
                   {"hprop", 0}, {"ctype", 0}, {"list", 1}};
  // Polymorphic equality is the one built-in constant.
  HolType a = HolType::var("a");
  constants_.emplace("=", fun_ty(a, fun_ty(a, bool_ty())));
}

void Kernel::new_type(const std::string& name, size_t arity) {
  if (type_arities_.count(name)) throw RegistryError("type constructor redefined: " + name);
  type_arities_.emplace(name, arity);
}

std::optional<size_t> Kernel::type_arity(const std::string& name) const {
  auto it = type_arities_.find(name);
  if (it == type_arities_.end()) return std::nullopt;
  return it->second;
}

void Kernel::check_registered_type(const HolType& ty) const {
  if (ty.kind() == HolType::Kind::Var) return;
  auto it = type_arities_.find(ty.name());
  if (it == type_arities_.end())
    throw TypeError("unknown type constructor: " + ty.name());
  if (it->second != ty.args().size())
    throw TypeError("type constructor " + ty.name() + " expects " +
                    std::to_string(it->second) + " arguments, got " +
                    std::to_string(ty.args().size()));
  for (const auto& a : ty.args()) check_registered_type(a);
}

void Kernel::new_constant(const std::string& name, const HolType& most_general) {
  if (constants_.count(name)) throw RegistryError("constant redefined: " + name);
  check_registered_type(most_general);
  constants_.emplace(name, most_general);
}

bool Kernel::has_constant(const std::string& name) const { return constants_.count(name) > 0; }

const HolType& Kernel::constant_type(const std::string& name) const {
  auto it = constants_.find(name);
  if (it == constants_.end()) throw RegistryError("unknown constant: " + name);
  return it->second;
}

Term Kernel::mk_const(const std::string& name, const HolType& ty_instance) const {
  if (is_literal_const_name(name)) {
    if (!(ty_instance == integer_ty()))
      throw TypeError("literal constant " + name + " must have type integer");
    if (name[1] == '"') return mk_address_const(name.substr(2, name.size() - 3));
    return mk_int_literal(BigInt::from_string(name.substr(1)));
  }
  const HolType& general = constant_type(name);
  TypeSubst subst;
  if (!match_type(general, ty_instance, subst))
    throw TypeError("constant " + name + " cannot have type " + ty_instance.to_string() +
                    " (registered: " + general.to_string() + ")");
  check_registered_type(ty_instance);
  return Term(std::make_shared<const Term::Node>(
      Term::Node{Term::Kind::Const, name, ty_instance, {}, {}}));
}

Term Kernel::constant(const std::string& name) const {
  return mk_const(name, constant_type(name));
}

Term Kernel::mk_eq(const Term& lhs, const Term& rhs) const {
  if (!(lhs.type() == rhs.type()))
    throw TypeError("mk_eq: sides have different types " + lhs.type().to_string() + " and " +
                    rhs.type().to_string());
  Term eq = mk_const("=", fun_ty(lhs.type(), fun_ty(lhs.type(), bool_ty())));
  return mk_app(mk_app(eq, lhs), rhs);
}

Theorem Kernel::make(std::vector<Term> hyps, Term concl, std::set<std::string> axioms) const {
  Theorem th;
  th.hyps_ = std::move(hyps);
  th.concl_ = std::move(concl);
  th.axioms_ = std::move(axioms);
  return th;
}

Theorem Kernel::refl(const Term& t) const { return make({}, mk_eq(t, t), {}); }

Theorem Kernel::trans(const Theorem& ab, const Theorem& bc) const {
  if (!is_eq(ab.conclusion()) || !is_eq(bc.conclusion()))
    throw RuleError("trans: premises must be equalities");
  if (!alpha_eq(eq_rhs(ab.conclusion()), eq_lhs(bc.conclusion())))
    throw RuleError("trans: middle terms differ");
  std::set<std::string> ax = ab.axioms();
  ax.insert(bc.axioms().begin(), bc.axioms().end());
  return make(merge_hyps(ab.hypotheses(), bc.hypotheses()),
              mk_eq(eq_lhs(ab.conclusion()), eq_rhs(bc.conclusion())), std::move(ax));
}

Theorem Kernel::symm(const Theorem& th) const {
  if (!is_eq(th.conclusion())) throw RuleError("symm: conclusion is not an equality");
  return make(th.hypotheses(), mk_eq(eq_rhs(th.conclusion()), eq_lhs(th.conclusion())),
              th.axioms());
}

Theorem Kernel::assume(const Term& t) const {
  if (!(t.type() == bool_ty())) throw RuleError("assume: term is not of type bool");
  return make({t}, t, {});
}

Theorem Kernel::eq_mp(const Theorem& eq, const Theorem& th) const {
  if (!is_eq(eq.conclusion())) throw RuleError("eq_mp: first premise is not an equality");
  if (!alpha_eq(eq_lhs(eq.conclusion()), th.conclusion()))
    throw RuleError("eq_mp: equality left side does not match premise conclusion");
  std::set<std::string> ax = eq.axioms();
  ax.insert(th.axioms().begin(), th.axioms().end());
  return make(merge_hyps(eq.hypotheses(), th.hypotheses()), eq_rhs(eq.conclusion()),
              std::move(ax));
}

Theorem Kernel::deduct_antisym(const Theorem& a, const Theorem& b) const {
  std::vector<Term> hyps = merge_hyps(remove_hyp(a.hypotheses(), b.conclusion()),
                                      remove_hyp(b.hypotheses(), a.conclusion()));
  std::set<std::string> ax = a.axioms();
  ax.insert(b.axioms().begin(), b.axioms().end());
  return make(std::move(hyps), mk_eq(a.conclusion(), b.conclusion()), std::move(ax));
}

Theorem Kernel::abs_rule(const Term& var, const Theorem& th) const {
  if (!var.is_var()) throw RuleError("abs: binder must be a variable");
  if (!is_eq(th.conclusion())) throw RuleError("abs: premise is not an equality");
  for (const auto& h : th.hypotheses())
    if (is_free_in(var, h)) throw RuleError("abs: variable free in hypotheses");
  return make(th.hypotheses(),
              mk_eq(mk_abs(var, eq_lhs(th.conclusion())), mk_abs(var, eq_rhs(th.conclusion()))),
              th.axioms());
}

Theorem Kernel::mk_comb_rule(const Theorem& fth, const Theorem& xth) const {
  if (!is_eq(fth.conclusion()) || !is_eq(xth.conclusion()))
    throw RuleError("mk_comb: premises must be equalities");
  Term f1 = eq_lhs(fth.conclusion()), f2 = eq_rhs(fth.conclusion());
  Term x1 = eq_lhs(xth.conclusion()), x2 = eq_rhs(xth.conclusion());
  std::set<std::string> ax = fth.axioms();
  ax.insert(xth.axioms().begin(), xth.axioms().end());
  return make(merge_hyps(fth.hypotheses(), xth.hypotheses()),
              mk_eq(mk_app(f1, x1), mk_app(f2, x2)), std::move(ax));
}

Theorem Kernel::beta(const Term& redex) const {
  if (!redex.is_app() || !redex.fn().is_abs())
    throw RuleError("beta: term is not a beta redex");
  const Term& lam = redex.fn();
  Term reduced = subst_term({{lam.bound_var(), redex.arg()}}, lam.body());
  return make({}, mk_eq(redex, reduced), {});
}

Theorem Kernel::inst(const TermSubst& subst, const Theorem& th) const {
  for (const auto& [from, to] : subst) {
    if (!from.is_var()) throw RuleError("inst: substitution domain must be variables");
    if (!(from.type() == to.type()))
      throw RuleError("inst: substitution changes type of " + from.name());
  }
  std::vector<Term> hyps;
  hyps.reserve(th.hypotheses().size());
  for (const auto& h : th.hypotheses()) hyps.push_back(subst_term(subst, h));
  return make(merge_hyps(hyps, {}), subst_term(subst, th.conclusion()), th.axioms());
}

Theorem Kernel::inst_type(const TypeSubst& subst, const Theorem& th) const {
  for (const auto& [from, to] : subst) {
    if (from.kind() != HolType::Kind::Var)
      throw RuleError("inst_type: substitution domain must be type variables");
    check_registered_type(to);
  }
  std::vector<Term> hyps;
  hyps.reserve(th.hypotheses().size());
  for (const auto& h : th.hypotheses()) hyps.push_back(subst_term_types(subst, h));
  return make(merge_hyps(hyps, {}), subst_term_types(subst, th.conclusion()), th.axioms());
}

Theorem Kernel::new_basic_definition(const std::string& name, const Term& equation) {
  if (!is_eq(equation)) throw RuleError("new_basic_definition: not an equation");
  // Accept `c = body` or `c x1 .. xn = body` with distinct variable arguments.
  std::vector<Term> args;
  Term head = strip_app(eq_lhs(equation), args);
  if (!head.is_var())
    throw RuleError("new_basic_definition: head of the left side must be the new name");
  if (head.name() != name)
    throw RuleError("new_basic_definition: head " + head.name() + " does not match " + name);
  Term body = eq_rhs(equation);
  for (size_t i = args.size(); i-- > 0;) {
    if (!args[i].is_var())
      throw RuleError("new_basic_definition: left-side arguments must be variables");
    body = mk_abs(args[i], body);
  }
  auto frees = free_vars(body);
  for (const auto& v : frees)
    if (!(v == head))
      throw RuleError("new_basic_definition: free variable " + v.name() + " in body");
  if (is_free_in(head, body))
    throw RuleError("new_basic_definition: recursive equation is not definitional");
  if (constants_.count(name)) throw RegistryError("constant redefined: " + name);

  // Generalize: the constant's most-general type is the body's type.
  new_constant(name, body.type());
  Term c = mk_const(name, body.type());
  Theorem def = make({}, mk_eq(c, body), {});
  definitions_.emplace(name, def);
  return def;
}

Theorem Kernel::new_axiom(const std::string& tag, const Term& statement) {
  if (!(statement.type() == bool_ty())) throw RuleError("new_axiom: statement is not of type bool");
  if (axioms_.count(tag)) throw RegistryError("axiom tag redefined: " + tag);
  Theorem th = make({}, statement, {tag});
  axioms_.emplace(tag, th);
  return th;
}

Theorem Kernel::oracle_theorem(const std::string& tag, const Term& statement) const {
  if (!(statement.type() == bool_ty()))
    throw RuleError("oracle_theorem: statement is not of type bool");
  return make({}, statement, {tag});
}

std::optional<Theorem> Kernel::find_axiom(const std::string& tag) const {
  auto it = axioms_.find(tag);
  if (it == axioms_.end()) return std::nullopt;
  return it->second;
}

std::optional<Theorem> Kernel::find_definition(const std::string& name) const {
  auto it = definitions_.find(name);
  if (it == definitions_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> Kernel::axiom_tags() const {
  std::vector<std::string> out;
  out.reserve(axioms_.size());
  for (const auto& [tag, th] : axioms_) out.push_back(tag);
  return out;
}

}  // namespace cstar
