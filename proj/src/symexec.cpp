// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0

#include "cstar/symexec.hpp"

#include <algorithm>

#include "cstar/arith.hpp"
#include "cstar/derived.hpp"

namespace cstar::engine {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool mentions_address(const Term& t, const std::string& var_name) {
  std::string want = "&\"" + var_name + "\"";
  std::function<bool(const Term&)> walk = [&](const Term& cur) -> bool {
    switch (cur.kind()) {
      case Term::Kind::Const:
        return cur.name() == want;
      case Term::Kind::Var:
        return false;
      case Term::Kind::App:
        return walk(cur.fn()) || walk(cur.arg());
      case Term::Kind::Abs:
        return walk(cur.body());
    }
    return false;
  };
  return walk(t);
}

}  // namespace

VerificationCondition& RunContext::emit_vc(const std::string& kind, const cfront::Span& origin,
                                           const Term& goal) {
  VerificationCondition vc;
  vc.id = "vc" + std::to_string(++vc_counter);
  vc.kind = kind;
  vc.origin = origin;
  vc.goal = goal;
  vcs.push_back(std::move(vc));
  return vcs.back();
}

// ---------------------------------------------------------------------------
// Construction: process the function specification
// ---------------------------------------------------------------------------

Engine::Engine(RunContext& ctx, const cfront::FuncDef& f)
    : ctx_(ctx), func_(f), th_(*ctx.theory) {
  const Kernel& k = th_.kernel();
  // parameter values are fresh logical variables named after the parameters
  for (const auto& [pname, pty] : f.params) {
    if (pty.k == cfront::CType::K::Void)
      throw ExecError("parameter " + pname + " has void type");
    spec_vars_[pname] = mk_var(pname, integer_ty());
  }
  // ghost parameters
  for (const auto& g : f.ghost_params) {
    auto [gname, gty] = quote::parse_typed_name(k, g);
    spec_vars_[gname] = mk_var(gname, gty);
  }
  // globals: initial-value variables named after the global
  for (const auto& g : ctx_.program->globals) {
    if (spec_vars_.count(g.name)) continue;  // shadowed by a parameter or ghost
    spec_vars_[g.name] = mk_var(g.name, integer_ty());
  }

  scopes_.push_back({});  // function scope
  quote::SyntaxEnv env = spec_env(false, Term());
  Term require = f.require_text
                     ? eval_payload(*f.require_text, env, /*hprop=*/true, f.span)
                     : th_.emp();

  SymHeap init = canonicalize(require);
  // parameter maps-to conjuncts
  for (const auto& [pname, pty] : f.params) {
    vars_[pname] = {pty, mk_address_const(pname), false};
    var_order_.push_back(pname);
    init.spatials.push_back(th_.mk_data_at(mk_address_const(pname),
                                           logic_ctype(pty, f.span), spec_vars_[pname]));
  }
  // implicit global conjuncts (unless the explicit spec mentions the global)
  for (const auto& g : ctx_.program->globals) {
    vars_[g.name] = {g.ctype, mk_address_const(g.name), true};
    var_order_.push_back(g.name);
    if (!mentions_address(require, g.name)) {
      init.spatials.push_back(th_.mk_data_at(mk_address_const(g.name),
                                             logic_ctype(g.ctype, g.span),
                                             spec_vars_[g.name]));
    }
  }
  current_ = std::move(init);
  log_state(f.span);
}

// ---------------------------------------------------------------------------
// Canonical form
// ---------------------------------------------------------------------------

std::string Engine::fresh_name(const std::string& base) const {
  auto taken = [&](const std::string& n) {
    if (spec_vars_.count(n)) return true;
    if (current_) {
      for (const auto& b : current_->binders)
        if (b.name() == n) return true;
    }
    return false;
  };
  if (!taken(base)) return base;
  for (;;) {
    std::string cand = base + "_" + std::to_string(++fresh_counter_);
    if (!taken(cand)) return cand;
  }
}

Term Engine::fresh_var(const std::string& base) {
  return mk_var(fresh_name(base), integer_ty());
}

SymHeap Engine::canonicalize(const Term& t, bool avoid_current_binders) const {
  SymHeap out;
  std::set<std::string> used;
  for (const auto& [n, v] : spec_vars_) used.insert(n);
  if (avoid_current_binders && current_)
    for (const auto& b : current_->binders) used.insert(b.name());
  for (const auto& v : free_vars(t)) used.insert(v.name());

  std::function<Term(const Term&)> fresh_binder = [&](const Term& v) -> Term {
    std::string name = v.name();
    if (!used.count(name)) {
      used.insert(name);
      return v;
    }
    for (int i = 1;; ++i) {
      std::string cand = v.name() + "_" + std::to_string(i);
      if (!used.count(cand)) {
        used.insert(cand);
        return mk_var(cand, v.type());
      }
    }
  };

  std::function<void(const Term&)> add_pure = [&](const Term& p) {
    if (is_binary(p, "&&") && p.type() == bool_ty()) {
      add_pure(binary_lhs(p));
      add_pure(binary_rhs(p));
      return;
    }
    out.pures.push_back(p);
  };

  std::function<void(const Term&)> walk = [&](const Term& cur) {
    if (th_.is_hexists(cur)) {
      const Term& lam = cur.arg();
      Term bv = fresh_binder(lam.bound_var());
      out.binders.push_back(bv);
      Term body = bv == lam.bound_var() ? lam.body()
                                        : subst_term({{lam.bound_var(), bv}}, lam.body());
      walk(body);
      return;
    }
    if (th_.is_sep(cur)) {
      walk(binary_lhs(cur));
      walk(binary_rhs(cur));
      return;
    }
    if (th_.is_fact(cur)) {
      add_pure(cur.arg());
      return;
    }
    if (is_binary(cur, "hand")) {
      Term l = binary_lhs(cur);
      if (l.is_app() && l.fn().is_const() && l.fn().name() == "pure") {
        add_pure(l.arg());
        walk(binary_rhs(cur));
        return;
      }
      out.spatials.push_back(cur);
      return;
    }
    if (cur.is_const() && cur.name() == "emp") return;
    out.spatials.push_back(cur);
  };
  walk(t);
  return out;
}

Term Engine::denote(const SymHeap& h) const {
  std::vector<Term> conjs;
  for (const auto& p : h.pures) conjs.push_back(th_.mk_fact(p));
  conjs.insert(conjs.end(), h.spatials.begin(), h.spatials.end());
  Term body = th_.mk_sep_list(conjs);
  for (size_t i = h.binders.size(); i-- > 0;) body = th_.mk_hexists(h.binders[i], body);
  return body;
}

Term Engine::state_term() const {
  if (!current_) throw ExecError("unreachable program point: no symbolic state");
  return denote(*current_);
}

void Engine::validate_state() const {
  if (!current_) return;
  const SymHeap& h = *current_;
  std::set<std::string> names;
  for (const auto& b : h.binders) {
    if (!b.is_var()) throw ExecError("state invariant: binder is not a variable");
    if (!names.insert(b.name()).second)
      throw ExecError("state invariant: duplicate binder " + b.name());
  }
  for (const auto& p : h.pures)
    if (!(p.type() == bool_ty())) throw ExecError("state invariant: non-bool pure");
  for (const auto& s : h.spatials) {
    if (!(s.type() == hprop_ty())) throw ExecError("state invariant: non-hprop spatial");
    if (th_.is_sep(s) || th_.is_hexists(s) || th_.is_fact(s) ||
        (s.is_const() && s.name() == "emp"))
      throw ExecError("state invariant: non-flattened spatial conjunct");
  }
  for (const auto& [name, info] : vars_) {
    int count = 0;
    for (const auto& s : h.spatials) {
      std::vector<Term> args;
      Term head = strip_app(s, args);
      if (!head.is_const()) continue;
      if ((head.name() == "data_at" && args.size() == 3) ||
          (head.name() == "undef_data_at" && args.size() == 2)) {
        if (arith::match_modulo_arith(th_.kernel(), args[0], info.addr)) ++count;
      }
    }
    if (count > 1)
      throw ExecError("state invariant: variable " + name + " has " +
                      std::to_string(count) + " maps-to conjuncts");
  }
}

// ---------------------------------------------------------------------------
// Payload evaluation and scopes
// ---------------------------------------------------------------------------

quote::SyntaxEnv Engine::spec_env(bool with_result, const Term& result) const {
  quote::SyntaxEnv env;
  for (const auto& [n, v] : spec_vars_) env.vars[n] = v;
  if (with_result) env.vars["__result"] = result;
  return env;
}

quote::SyntaxEnv Engine::proof_quote_env() const {
  quote::SyntaxEnv env;
  // precedence: ghost/spec variables, then program-variable values, then
  // state binders (a binder named like a variable wins)
  for (const auto& [n, v] : spec_vars_) env.vars[n] = v;
  if (current_) {
    for (const auto& [name, info] : vars_) {
      int idx = find_primitive(info.addr);
      if (idx < 0) continue;
      const Term& s = current_->spatials[idx];
      std::vector<Term> args;
      Term head = strip_app(s, args);
      if (head.is_const() && head.name() == "data_at") env.vars[name] = args[2];
    }
    for (const auto& b : current_->binders) env.vars[b.name()] = b;
  }
  return env;
}

Term Engine::eval_payload(const std::string& payload, const quote::SyntaxEnv& env, bool hprop,
                          const cfront::Span& span) {
  if (ctx_.eval_payload) return ctx_.eval_payload(payload, env, hprop);
  std::string text = trim(payload);
  if (!text.empty() && text.front() == '`') {
    size_t close = text.rfind('`');
    if (close == 0) throw QuoteError("unterminated quotation in attribute");
    text = text.substr(1, close - 1);
  }
  try {
    return hprop ? quote::parse_hprop(th_.kernel(), text, env)
                 : quote::parse_term(th_.kernel(), text, env);
  } catch (const QuoteError& e) {
    throw QuoteError(std::string(e.what()) + " at " + span.file + ":" +
                     std::to_string(span.line));
  }
}

// ---------------------------------------------------------------------------
// Expression translation
// ---------------------------------------------------------------------------

Term Engine::logic_ctype(const cfront::CType& t, const cfront::Span& span) const {
  switch (t.k) {
    case cfront::CType::K::Int:
      return th_.ctype_const("Tint");
    case cfront::CType::K::Char:
      return th_.ctype_const("Tchar");
    case cfront::CType::K::UChar:
      return th_.ctype_const("Tuchar");
    case cfront::CType::K::Ptr:
      return th_.ctype_const("Tptr");
    case cfront::CType::K::Void:
      throw ExecError("void has no logical representation at " + span.file + ":" +
                      std::to_string(span.line));
  }
  throw ExecError("unknown C type");
}

int Engine::find_primitive(const Term& addr) const {
  if (!current_) return -1;
  for (size_t i = 0; i < current_->spatials.size(); ++i) {
    const Term& s = current_->spatials[i];
    std::vector<Term> args;
    Term head = strip_app(s, args);
    if (!head.is_const()) continue;
    if ((head.name() == "data_at" && args.size() == 3) ||
        (head.name() == "undef_data_at" && args.size() == 2)) {
      if (arith::match_modulo_arith(th_.kernel(), args[0], addr)) return static_cast<int>(i);
    }
  }
  return -1;
}

Term Engine::load_value(const Term& addr, const Term& cty, const cfront::Span& span) {
  int idx = find_primitive(addr);
  std::string where = " at " + span.file + ":" + std::to_string(span.line);
  if (idx < 0)
    throw ExecError("cannot execute: no ownership of address " + quote::print_term(addr) +
                    "; transform the symbolic state in a proof block" + where);
  std::vector<Term> args;
  Term head = strip_app(current_->spatials[idx], args);
  if (head.name() == "undef_data_at")
    throw ExecError("reading undefined value at address " + quote::print_term(addr) + where);
  if (!(args[1] == cty) && !alpha_eq(args[1], cty))
    throw ExecError("load type mismatch at address " + quote::print_term(addr) + ": state has " +
                    quote::print_term(args[1]) + ", access wants " + quote::print_term(cty) +
                    where);
  return args[2];
}

Term Engine::read_var(const std::string& name, const cfront::Span& span) {
  auto it = vars_.find(name);
  if (it == vars_.end())
    throw ExecError("unknown variable " + name + " at " + span.file + ":" +
                    std::to_string(span.line));
  return load_value(it->second.addr, logic_ctype(it->second.ctype, span), span);
}

void Engine::side_condition(const Term& cond, const cfront::Span& span) {
  // try the arith oracle against the current pures first
  std::vector<Term> pures = current_ ? current_->pures : std::vector<Term>{};
  const Kernel& k = th_.kernel();
  Term hyp = rules::mk_conj_list(k, pures);
  Term goal = rules::mk_imp(k, hyp, cond);
  try {
    if (arith::check_valid(k, goal, arith::Fragment::AbstractOpaque).valid) {
      ++ctx_.auto_discharged;
      return;
    }
  } catch (const Error&) {
    // fall through to a VC
  }
  Term closed = goal;
  std::vector<Term> frees = free_vars(closed);
  for (size_t i = frees.size(); i-- > 0;) closed = rules::mk_forall(k, frees[i], closed);
  ctx_.emit_vc("side-condition", span, closed);
}

Engine::Typed Engine::translate(const cfront::Expr& e) {
  const Kernel& k = th_.kernel();
  switch (e.k) {
    case cfront::Expr::K::IntLit:
      return {th_.mk_int(e.value), cfront::CType::int_t()};
    case cfront::Expr::K::Var: {
      auto it = vars_.find(e.name);
      if (it == vars_.end())
        throw ExecError("unknown variable " + e.name + " at " + e.span.file + ":" +
                        std::to_string(e.span.line));
      return {read_var(e.name, e.span), it->second.ctype};
    }
    case cfront::Expr::K::Unary: {
      if (e.name == "-") {
        Typed a = translate(*e.a);
        return {mk_app(k.constant("--"), a.term), cfront::CType::int_t()};
      }
      if (e.name == "&") {
        if (e.a->k != cfront::Expr::K::Var)
          throw ExecError("address-of is only supported on variables at " + e.span.file + ":" +
                          std::to_string(e.span.line));
        auto it = vars_.find(e.a->name);
        if (it == vars_.end()) throw ExecError("unknown variable " + e.a->name);
        return {it->second.addr, cfront::CType::ptr_to(it->second.ctype)};
      }
      if (e.name == "*") {
        Typed a = translate(*e.a);
        if (!a.ctype.is_ptr() || !a.ctype.pointee)
          throw ExecError("dereference of a non-pointer at " + e.span.file + ":" +
                          std::to_string(e.span.line));
        Term cty = logic_ctype(*a.ctype.pointee, e.span);
        return {load_value(a.term, cty, e.span), *a.ctype.pointee};
      }
      throw ExecError("boolean operator in value position at " + e.span.file + ":" +
                      std::to_string(e.span.line));
    }
    case cfront::Expr::K::Cast: {
      Typed a = translate(*e.a);
      return {a.term, e.ctype};
    }
    case cfront::Expr::K::Index: {
      Typed a = translate(*e.a);
      Typed i = translate(*e.b);
      if (!a.ctype.is_ptr() || !a.ctype.pointee)
        throw ExecError("indexing a non-pointer at " + e.span.file + ":" +
                        std::to_string(e.span.line));
      Term cty = logic_ctype(*a.ctype.pointee, e.span);
      Term addr = th_.mk_add(a.term, th_.mk_mul(i.term, th_.mk_sizeof(cty)));
      return {load_value(addr, cty, e.span), *a.ctype.pointee};
    }
    case cfront::Expr::K::SizeofType:
      return {th_.mk_sizeof(logic_ctype(e.ctype, e.span)), cfront::CType::int_t()};
    case cfront::Expr::K::Binary: {
      const std::string& op = e.name;
      if (op == "&&" || op == "||" || op == "<" || op == "<=" || op == ">" || op == ">=" ||
          op == "==" || op == "!=")
        throw ExecError("boolean expression in value position at " + e.span.file + ":" +
                        std::to_string(e.span.line));
      Typed a = translate(*e.a);
      Typed b = translate(*e.b);
      if (op == "+" || op == "-") {
        // pointer arithmetic scales by the pointee size
        if (a.ctype.is_ptr() && a.ctype.pointee) {
          Term scaled = th_.mk_mul(b.term, th_.mk_sizeof(logic_ctype(*a.ctype.pointee, e.span)));
          Term t = op == "+" ? th_.mk_add(a.term, scaled) : th_.mk_sub(a.term, scaled);
          return {t, a.ctype};
        }
        if (b.ctype.is_ptr() && b.ctype.pointee && op == "+") {
          Term scaled = th_.mk_mul(a.term, th_.mk_sizeof(logic_ctype(*b.ctype.pointee, e.span)));
          return {th_.mk_add(b.term, scaled), b.ctype};
        }
        return {op == "+" ? th_.mk_add(a.term, b.term) : th_.mk_sub(a.term, b.term),
                cfront::CType::int_t()};
      }
      if (op == "*") return {th_.mk_mul(a.term, b.term), cfront::CType::int_t()};
      if (op == "/" || op == "%") {
        side_condition(rules::mk_not(k, k.mk_eq(b.term, th_.mk_int(BigInt(0)))), e.span);
        Term t = mk_app(mk_app(k.constant(op), a.term), b.term);
        return {t, cfront::CType::int_t()};
      }
      throw ExecError("unsupported operator " + op);
    }
  }
  throw ExecError("unsupported expression");
}

Term Engine::translate_condition(const cfront::Expr& e) {
  const Kernel& k = th_.kernel();
  switch (e.k) {
    case cfront::Expr::K::Binary: {
      const std::string& op = e.name;
      if (op == "&&" || op == "||") {
        Term a = translate_condition(*e.a);
        Term b = translate_condition(*e.b);
        return op == "&&" ? rules::mk_conj(k, a, b) : rules::mk_disj(k, a, b);
      }
      if (op == "<" || op == "<=" || op == ">" || op == ">=") {
        Typed a = translate(*e.a);
        Typed b = translate(*e.b);
        return mk_app(mk_app(k.constant(op), a.term), b.term);
      }
      if (op == "==" || op == "!=") {
        Typed a = translate(*e.a);
        Typed b = translate(*e.b);
        Term eq = k.mk_eq(a.term, b.term);
        return op == "==" ? eq : rules::mk_not(k, eq);
      }
      break;
    }
    case cfront::Expr::K::Unary:
      if (e.name == "!") return rules::mk_not(k, translate_condition(*e.a));
      break;
    default:
      break;
  }
  // numeric condition: e != 0
  Typed v = translate(e);
  return rules::mk_not(k, k.mk_eq(v.term, th_.mk_int(BigInt(0))));
}

// ---------------------------------------------------------------------------
// Auto-discharge
// ---------------------------------------------------------------------------

bool Engine::try_auto_discharge(const SymHeap& from, const SymHeap& to) {
  const Kernel& k = th_.kernel();
  Term hyp = rules::mk_conj_list(k, from.pures);
  auto oracle_valid = [&](const Term& goal) {
    try {
      return arith::check_valid(k, rules::mk_imp(k, hyp, goal),
                                arith::Fragment::AbstractOpaque)
          .valid;
    } catch (const Error&) {
      return false;
    }
  };
  // contradictory pure context discharges anything
  if (oracle_valid(k.constant("F"))) return true;

  SymHeap target = to;
  if (!target.binders.empty()) {
    if (target.binders.size() != from.binders.size()) return false;
    TermSubst rename;
    for (size_t i = 0; i < target.binders.size(); ++i) {
      if (!(target.binders[i].type() == from.binders[i].type())) return false;
      rename.emplace_back(target.binders[i], from.binders[i]);
    }
    for (auto& p : target.pures) p = subst_term(rename, p);
    for (auto& s : target.spatials) s = subst_term(rename, s);
    target.binders = from.binders;
  }
  // spatial multiset match modulo alpha and arithmetic normal form
  std::vector<bool> used(from.spatials.size(), false);
  for (const auto& want : target.spatials) {
    bool found = false;
    for (size_t i = 0; i < from.spatials.size(); ++i) {
      if (used[i]) continue;
      if (alpha_eq(from.spatials[i], want) ||
          arith::match_modulo_arith(k, from.spatials[i], want)) {
        used[i] = true;
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  for (bool u : used)
    if (!u) return false;  // leftover conjuncts cannot be dropped
  // pure residue via the arith oracle
  for (const auto& p : target.pures)
    if (!oracle_valid(p)) return false;
  return true;
}

bool Engine::discharge_or_vc(const SymHeap& from, const SymHeap& to, const std::string& kind,
                             const cfront::Span& origin) {
  if (try_auto_discharge(from, to)) {
    ++ctx_.auto_discharged;
    return true;
  }
  const Kernel& k = th_.kernel();
  // The goal opens the left side's binders: the right side may mention them
  // (a returned value, for instance), and the forall closure at the end
  // quantifies them together with the other logical variables.
  SymHeap opened = from;
  opened.binders.clear();
  Term goal = th_.mk_entail(denote(opened), denote(to));
  std::vector<Term> frees = free_vars(goal);
  Term closed = goal;
  for (size_t i = frees.size(); i-- > 0;) closed = rules::mk_forall(k, frees[i], closed);
  ctx_.emit_vc(kind, origin, closed);
  return false;
}

// ---------------------------------------------------------------------------
// Statement execution
// ---------------------------------------------------------------------------

void Engine::exec_decl(const cfront::Stmt& s) {
  if (vars_.count(s.name))
    throw ExecError("variable redeclared: " + s.name + " at " + s.span.file + ":" +
                    std::to_string(s.span.line));
  Term addr = mk_address_const(s.name);
  Term cty = logic_ctype(s.ctype, s.span);
  vars_[s.name] = {s.ctype, addr, false};
  var_order_.push_back(s.name);
  scopes_.back().push_back(s.name);
  if (s.call) {
    current_->spatials.push_back(th_.mk_undef_data_at(addr, cty));
    exec_call(s, s.span);  // assigns the result into the variable
    return;
  }
  if (s.expr) {
    Typed v = translate(*s.expr);
    current_->spatials.push_back(th_.mk_data_at(addr, cty, v.term));
  } else {
    current_->spatials.push_back(th_.mk_undef_data_at(addr, cty));
  }
}

void Engine::exec_assign(const cfront::Stmt& s) {
  auto it = vars_.find(s.name);
  if (it == vars_.end())
    throw ExecError("unknown variable " + s.name + " at " + s.span.file + ":" +
                    std::to_string(s.span.line));
  if (s.call) {
    exec_call(s, s.span);
    return;
  }
  Typed v = translate(*s.expr);
  int idx = find_primitive(it->second.addr);
  if (idx < 0)
    throw ExecError("cannot execute: no ownership of address " +
                    quote::print_term(it->second.addr) +
                    "; transform the symbolic state in a proof block at " + s.span.file + ":" +
                    std::to_string(s.span.line));
  current_->spatials[idx] =
      th_.mk_data_at(it->second.addr, logic_ctype(it->second.ctype, s.span), v.term);
}

void Engine::exec_store(const cfront::Stmt& s) {
  Typed target = translate(*s.addr);
  if (!target.ctype.is_ptr() || !target.ctype.pointee)
    throw ExecError("store through a non-pointer at " + s.span.file + ":" +
                    std::to_string(s.span.line));
  Term cty = logic_ctype(*target.ctype.pointee, s.span);
  Typed v = translate(*s.expr);
  int idx = find_primitive(target.term);
  if (idx < 0)
    throw ExecError("cannot execute: no ownership of address " +
                    quote::print_term(target.term) +
                    "; transform the symbolic state in a proof block at " + s.span.file + ":" +
                    std::to_string(s.span.line));
  std::vector<Term> args;
  strip_app(current_->spatials[idx], args);
  if (!alpha_eq(args[1], cty))
    throw ExecError("store type mismatch at address " + quote::print_term(target.term) +
                    ": state has " + quote::print_term(args[1]) + ", store writes " +
                    quote::print_term(cty) + " at " + s.span.file + ":" +
                    std::to_string(s.span.line));
  // keep the matched conjunct's address spelling; only the value changes
  current_->spatials[idx] = th_.mk_data_at(args[0], args[1], v.term);
}

Term Engine::instantiated_require(const cfront::FuncDef& callee,
                                  const std::map<std::string, Term>& args,
                                  const cfront::Span& span, Term* ensure_out,
                                  const Term& result_var) {
  quote::SyntaxEnv env;
  for (const auto& [n, t] : args) env.vars[n] = t;
  Term require = callee.require_text
                     ? eval_payload(*callee.require_text, env, true, span)
                     : th_.emp();
  if (ensure_out) {
    quote::SyntaxEnv eenv = env;
    if (result_var.valid()) eenv.vars["__result"] = result_var;
    *ensure_out = callee.ensure_text ? eval_payload(*callee.ensure_text, eenv, true, span)
                                     : th_.emp();
  }
  return require;
}

void Engine::exec_call(const cfront::Stmt& s, const cfront::Span& span) {
  const Kernel& k = th_.kernel();
  const cfront::CallInfo& call = *s.call;
  // find the callee (definition preferred, declaration acceptable)
  const cfront::FuncDef* callee = nullptr;
  for (const auto& f : ctx_.program->functions)
    if (f.name == call.callee && (!callee || !f.is_declaration)) callee = &f;
  if (!callee)
    throw ExecError("call to unknown function " + call.callee + " at " + span.file + ":" +
                    std::to_string(span.line));
  if (call.args.size() != callee->params.size())
    throw ExecError("call to " + call.callee + " with " + std::to_string(call.args.size()) +
                    " arguments, expected " + std::to_string(callee->params.size()));

  std::map<std::string, Term> inst;
  for (size_t i = 0; i < call.args.size(); ++i)
    inst[callee->params[i].first] = translate(*call.args[i]).term;
  // ghost arguments: spec scope plus current values of local variables
  {
    quote::SyntaxEnv genv = spec_env(false, Term());
    for (const auto& [name, info] : vars_) {
      if (genv.vars.count(name)) continue;
      int idx = find_primitive(info.addr);
      if (idx < 0) continue;
      std::vector<Term> margs;
      Term head = strip_app(current_->spatials[idx], margs);
      if (head.is_const() && head.name() == "data_at") genv.vars[name] = margs[2];
    }
    std::set<std::string> ghost_names;
    for (const auto& g : callee->ghost_params)
      ghost_names.insert(quote::parse_typed_name(k, g).first);
    for (const auto& [gname, gtext] : call.ghost_args) {
      if (!ghost_names.count(gname))
        throw ExecError("function " + call.callee + " has no ghost parameter " + gname);
      // the binding's right side is term syntax
      inst[gname] = eval_payload("`" + gtext + "`", genv, false, span);
    }
    for (const auto& g : callee->ghost_params) {
      auto [gname, gty] = quote::parse_typed_name(k, g);
      if (!inst.count(gname))
        throw ExecError("call to " + call.callee + " is missing [[argument(`" + gname +
                        " = ...`)]] at " + span.file + ":" + std::to_string(span.line));
      if (!(inst[gname].type() == gty))
        throw ExecError("ghost argument " + gname + " has type " +
                        inst[gname].type().to_string() + ", expected " + gty.to_string());
    }
  }

  Term result_var;
  if (!(callee->return_type.k == cfront::CType::K::Void))
    result_var = fresh_var(call.callee + "_ret");

  Term ensure;
  Term require = instantiated_require(*callee, inst, span, &ensure, result_var);

  // implicit global conjuncts for the callee
  for (const auto& g : ctx_.program->globals) {
    bool require_mentions = mentions_address(require, g.name);
    bool ensure_mentions = mentions_address(ensure, g.name);
    if (require_mentions && ensure_mentions) continue;
    Term gval = load_value(mk_address_const(g.name), logic_ctype(g.ctype, span), span);
    Term conj = th_.mk_data_at(mk_address_const(g.name), logic_ctype(g.ctype, span), gval);
    if (!require_mentions) require = th_.mk_sep(conj, require);
    if (!ensure_mentions) ensure = th_.mk_sep(conj, ensure);
  }

  // consume the require conjuncts
  SymHeap req = canonicalize(require);
  if (!req.binders.empty())
    throw ExecError("callee precondition with existentials is not supported: " + call.callee);
  Term hyp = rules::mk_conj_list(k, current_->pures);
  std::vector<Term> missing_spatials;
  std::vector<Term> missing_pures;
  std::vector<bool> consumed(current_->spatials.size(), false);
  for (const auto& want : req.spatials) {
    bool found = false;
    for (size_t i = 0; i < current_->spatials.size(); ++i) {
      if (consumed[i]) continue;
      if (alpha_eq(current_->spatials[i], want) ||
          arith::match_modulo_arith(k, current_->spatials[i], want)) {
        consumed[i] = true;
        found = true;
        break;
      }
    }
    if (!found) missing_spatials.push_back(want);
  }
  for (const auto& p : req.pures) {
    bool ok = false;
    try {
      ok = arith::check_valid(k, rules::mk_imp(k, hyp, p), arith::Fragment::AbstractOpaque)
               .valid;
    } catch (const Error&) {
      ok = false;
    }
    if (ok)
      ++ctx_.auto_discharged;
    else
      missing_pures.push_back(p);
  }
  if (!missing_spatials.empty() || !missing_pures.empty()) {
    // VC: state |-- missing ** leftover
    std::vector<Term> rhs;
    for (const auto& p : missing_pures) rhs.push_back(th_.mk_fact(p));
    rhs.insert(rhs.end(), missing_spatials.begin(), missing_spatials.end());
    for (size_t i = 0; i < current_->spatials.size(); ++i)
      if (!consumed[i]) rhs.push_back(current_->spatials[i]);
    SymHeap target;
    target.pures = current_->pures;
    target.spatials = rhs;
    // reuse the pure context so only the real obligation remains
    Term goal = th_.mk_entail(denote(*current_), denote(target));
    std::vector<Term> frees = free_vars(goal);
    Term closed = goal;
    for (size_t i = frees.size(); i-- > 0;) closed = rules::mk_forall(k, frees[i], closed);
    ctx_.emit_vc("call-precondition", span, closed);
  }
  // remove consumed conjuncts, then add the postcondition
  {
    std::vector<Term> rest;
    for (size_t i = 0; i < current_->spatials.size(); ++i)
      if (!consumed[i]) rest.push_back(current_->spatials[i]);
    current_->spatials = std::move(rest);
  }
  SymHeap ens = canonicalize(ensure, /*avoid_current_binders=*/true);
  for (const auto& b : ens.binders) current_->binders.push_back(b);
  for (const auto& p : ens.pures) current_->pures.push_back(p);
  for (const auto& sp : ens.spatials) current_->spatials.push_back(sp);

  // bind the result
  if (s.k == cfront::Stmt::K::Decl || s.k == cfront::Stmt::K::Assign) {
    if (!result_var.valid())
      throw ExecError("void call cannot be assigned at " + span.file + ":" +
                      std::to_string(span.line));
    auto it = vars_.find(s.name);
    int idx = find_primitive(it->second.addr);
    if (idx < 0) throw ExecError("no ownership of " + s.name + " for call result");
    current_->spatials[idx] = th_.mk_data_at(
        it->second.addr, logic_ctype(it->second.ctype, span), result_var);
  }
  if (s.k == cfront::Stmt::K::Return) {
    exec_return_value(result_var, span);
  }
}


void Engine::exec_return(const cfront::Stmt* s, const cfront::Span& span) {
  Term result;
  if (s && s->expr) result = translate(*s->expr).term;
  exec_return_value(result, span);
}

void Engine::exec_return_value(const Term& result, const cfront::Span& span) {
  const Kernel& k = th_.kernel();
  // drop stack variable conjuncts (globals stay)
  SymHeap out = *current_;
  for (const auto& name : var_order_) {
    const VarInfo& info = vars_.at(name);
    if (info.is_global) continue;
    int idx = -1;
    for (size_t i = 0; i < out.spatials.size(); ++i) {
      std::vector<Term> args;
      Term head = strip_app(out.spatials[i], args);
      if (!head.is_const()) continue;
      if ((head.name() == "data_at" && args.size() == 3) ||
          (head.name() == "undef_data_at" && args.size() == 2)) {
        if (arith::match_modulo_arith(k, args[0], info.addr)) {
          idx = static_cast<int>(i);
          break;
        }
      }
    }
    if (idx < 0)
      throw ExecError("stack variable " + name + " not owned at function exit (" + span.file +
                      ":" + std::to_string(span.line) + ")");
    out.spatials.erase(out.spatials.begin() + idx);
  }
  quote::SyntaxEnv env = spec_env(result.valid(), result);
  Term ensure = func_.ensure_text ? eval_payload(*func_.ensure_text, env, true, span)
                                  : th_.emp();
  for (const auto& g : ctx_.program->globals) {
    if (func_.require_text) {
      quote::SyntaxEnv dummy = spec_env(false, Term());
      Term req = eval_payload(*func_.require_text, dummy, true, func_.span);
      if (mentions_address(req, g.name) || mentions_address(ensure, g.name)) {
        if (!mentions_address(ensure, g.name)) continue;
        // explicit handling by the user
        continue;
      }
    } else if (mentions_address(ensure, g.name)) {
      continue;
    }
    // implicit: global preserved with its initial value
    ensure = th_.mk_sep(
        th_.mk_data_at(mk_address_const(g.name), logic_ctype(g.ctype, span),
                       spec_vars_.at(g.name)),
        ensure);
  }
  SymHeap target = canonicalize(ensure);
  // the target may reuse state binder names; keep them distinct
  discharge_or_vc(out, target, "postcondition", span);
  current_.reset();
}

void Engine::exec_assert_item(const cfront::Stmt& s) {
  quote::SyntaxEnv env = proof_quote_env();
  Term target = eval_payload(s.text, env, true, s.span);
  SymHeap to = canonicalize(target);
  if (!pending_join_.empty()) {
    for (const auto& [state, kind] : pending_join_) discharge_or_vc(state, to, kind, s.span);
    pending_join_.clear();
    join_required_ = false;
    join_from_break_ = false;
  } else if (current_) {
    discharge_or_vc(*current_, to, "assert", s.span);
  }
  current_ = std::move(to);
}

// ---------------------------------------------------------------------------
// Item dispatch
// ---------------------------------------------------------------------------

void Engine::exec_item(const cfront::EngineItem& item) {
  using K = cfront::EngineItem::K;
  // pending branch/break states flow through structural items and are
  // discharged by the next assertion, loop end, or function exit
  if (join_required_ && item.k != K::Assert && item.k != K::IfElse &&
      item.k != K::IfClose && item.k != K::LoopClose && item.k != K::Return &&
      item.k != K::FuncEnd && item.k != K::Break && item.k != K::Continue)
    throw ExecError(join_reason_ + " at " + item.span.file + ":" +
                    std::to_string(item.span.line));
  switch (item.k) {
    case K::Decl:
      if (current_) exec_decl(*item.stmt);
      break;
    case K::Assign:
      if (current_) exec_assign(*item.stmt);
      break;
    case K::Store:
      if (current_) exec_store(*item.stmt);
      break;
    case K::ExprStmt:
      if (current_ && item.stmt->expr) translate(*item.stmt->expr);
      break;
    case K::Call:
      if (current_) exec_call(*item.stmt, item.span);
      break;
    case K::Return: {
      std::vector<SymHeap> starts;
      if (join_required_ && join_from_break_)
        throw ExecError(join_reason_ + " at " + item.span.file + ":" +
                        std::to_string(item.span.line));
      if (join_required_) {
        for (auto& [st, kind] : pending_join_) starts.push_back(std::move(st));
        pending_join_.clear();
        join_required_ = false;
        join_from_break_ = false;
      } else if (current_) {
        starts.push_back(std::move(*current_));
      }
      for (auto& st : starts) {
        current_ = std::move(st);
        if (item.stmt->call)
          exec_call(*item.stmt, item.span);  // performs the return itself
        else
          exec_return(item.stmt, item.span);
      }
      current_.reset();
      break;
    }
    case K::IfOpen: {
      push_scope();
      Frame f;
      f.k = Frame::K::If;
      if (current_) {
        Term cond = translate_condition(*item.stmt->expr);
        f.iff.base = current_;
        f.iff.cond_true = cond;
        f.iff.cond_false = rules::mk_not(th_.kernel(), cond);
        current_->pures.push_back(cond);
      }
      frames_.push_back(std::move(f));
      break;
    }
    case K::IfElse: {
      if (frames_.empty() || frames_.back().k != Frame::K::If)
        throw ExecError("internal: stray else");
      pop_scope(current_ ? &*current_ : nullptr, item.span);
      push_scope();
      IfFrame& f = frames_.back().iff;
      if (join_required_) {
        for (auto& [st, kind] : pending_join_) f.arms.push_back(std::move(st));
        pending_join_.clear();
        join_required_ = false;
        join_from_break_ = false;
      } else {
        f.arms.push_back(current_);
      }
      if (f.base) {
        current_ = f.base;
        current_->pures.push_back(f.cond_false);
      } else {
        current_.reset();
      }
      break;
    }
    case K::IfClose: {
      if (frames_.empty() || frames_.back().k != Frame::K::If)
        throw ExecError("internal: stray if-close");
      pop_scope(current_ ? &*current_ : nullptr, item.span);
      IfFrame f = std::move(frames_.back().iff);
      frames_.pop_back();
      if (join_required_) {
        for (auto& [st, kind] : pending_join_) f.arms.push_back(std::move(st));
        pending_join_.clear();
        join_required_ = false;
        join_from_break_ = false;
      } else {
        f.arms.push_back(current_);
      }
      std::vector<SymHeap> live;
      for (auto& arm : f.arms)
        if (arm) live.push_back(std::move(*arm));
      if (live.empty()) {
        current_.reset();
      } else if (live.size() == 1) {
        current_ = std::move(live[0]);
      } else {
        pending_join_.clear();
        for (auto& st : live) pending_join_.emplace_back(std::move(st), "assert");
        join_required_ = true;
        join_reason_ = "join requires assertion: both branches reach this point";
        current_.reset();
      }
      break;
    }
    case K::LoopOpen: {
      Frame f;
      f.k = Frame::K::Loop;
      f.loop.stmt = item.stmt;
      if (current_) {
        f.loop.live = true;
        quote::SyntaxEnv env = proof_quote_env();
        Term inv = eval_payload(item.stmt->text, env, true, item.span);
        f.loop.invariant = inv;
        SymHeap inv_state = canonicalize(inv);
        discharge_or_vc(*current_, inv_state, "invariant-establish", item.span);
        current_ = std::move(inv_state);
        Term cond = translate_condition(*item.stmt->expr);
        current_->pures.push_back(cond);
      }
      frames_.push_back(std::move(f));
      push_scope();
      break;
    }
    case K::LoopClose: {
      if (frames_.empty() || frames_.back().k != Frame::K::Loop)
        throw ExecError("internal: stray loop-close");
      pop_scope(current_ ? &*current_ : nullptr, item.span);
      LoopFrame f = std::move(frames_.back().loop);
      frames_.pop_back();
      if (!f.live) {
        current_.reset();
        join_required_ = false;
        pending_join_.clear();
        break;
      }
      if (join_required_) {
        // each pending branch state must re-establish the invariant
        SymHeap inv_state = canonicalize(f.invariant);
        for (const auto& [st, kind] : pending_join_)
          discharge_or_vc(st, inv_state, "invariant-restore", item.span);
        pending_join_.clear();
        join_required_ = false;
        join_from_break_ = false;
        current_.reset();
      }
      if (current_) {
        SymHeap inv_state = canonicalize(f.invariant);
        discharge_or_vc(*current_, inv_state, "invariant-restore", item.span);
      }
      // post-loop state: invariant with the loop condition false
      SymHeap post = canonicalize(f.invariant);
      current_ = std::move(post);
      Term cond = translate_condition(*f.stmt->expr);
      current_->pures.push_back(rules::mk_not(th_.kernel(), cond));
      if (!f.breaks.empty()) {
        pending_join_.clear();
        for (auto& st : f.breaks) pending_join_.emplace_back(std::move(st), "break");
        pending_join_.emplace_back(std::move(*current_), "assert");
        current_.reset();
        join_required_ = true;
        join_from_break_ = true;
        join_reason_ = "break requires a post-loop assertion";
      }
      break;
    }
    case K::Break: {
      std::vector<SymHeap> starts;
      if (join_required_ && join_from_break_)
        throw ExecError(join_reason_ + " at " + item.span.file + ":" +
                        std::to_string(item.span.line));
      if (join_required_) {
        for (auto& [st, kind] : pending_join_) starts.push_back(std::move(st));
        pending_join_.clear();
        join_required_ = false;
        join_from_break_ = false;
      } else if (current_) {
        starts.push_back(std::move(*current_));
      }
      if (!starts.empty()) {
        LoopFrame* loop = nullptr;
        size_t loop_index = 0;
        for (size_t i = frames_.size(); i-- > 0;)
          if (frames_[i].k == Frame::K::Loop) {
            loop = &frames_[i].loop;
            loop_index = i;
            break;
          }
        if (!loop) throw ExecError("break outside of a loop");
        for (auto& st : starts) {
          drop_scopes_down_to(loop_index + 1, st, item.span);
          loop->breaks.push_back(std::move(st));
        }
        current_.reset();
      }
      break;
    }
    case K::Continue: {
      std::vector<SymHeap> starts;
      if (join_required_ && join_from_break_)
        throw ExecError(join_reason_ + " at " + item.span.file + ":" +
                        std::to_string(item.span.line));
      if (join_required_) {
        for (auto& [st, kind] : pending_join_) starts.push_back(std::move(st));
        pending_join_.clear();
        join_required_ = false;
        join_from_break_ = false;
      } else if (current_) {
        starts.push_back(std::move(*current_));
      }
      if (!starts.empty()) {
        LoopFrame* loop = nullptr;
        size_t loop_index = 0;
        for (size_t i = frames_.size(); i-- > 0;)
          if (frames_[i].k == Frame::K::Loop) {
            loop = &frames_[i].loop;
            loop_index = i;
            break;
          }
        if (!loop) throw ExecError("continue outside of a loop");
        SymHeap inv_state = canonicalize(loop->invariant);
        for (auto& st : starts) {
          drop_scopes_down_to(loop_index + 1, st, item.span);
          discharge_or_vc(st, inv_state, "continue", item.span);
        }
        current_.reset();
      }
      break;
    }
    case K::Assert:
      exec_assert_item(*item.stmt);
      break;
    case K::FuncEnd: {
      std::vector<SymHeap> starts;
      if (join_required_ && join_from_break_)
        throw ExecError(join_reason_ + " at " + item.span.file + ":" +
                        std::to_string(item.span.line));
      if (join_required_) {
        for (auto& [st, kind] : pending_join_) starts.push_back(std::move(st));
        pending_join_.clear();
        join_required_ = false;
        join_from_break_ = false;
      } else if (current_) {
        starts.push_back(std::move(*current_));
      }
      for (auto& st : starts) {
        if (!(func_.return_type.k == cfront::CType::K::Void))
          throw ExecError("missing return in non-void function " + func_.name);
        current_ = std::move(st);
        exec_return(nullptr, item.span);
      }
      current_.reset();
      break;
    }
    case K::ProofMark:
      throw ExecError("internal: proof mark reached the engine");
  }
  log_state(item.span);
}

void Engine::feed(const cfront::Segment& seg) {
  for (const auto& item : seg.items) exec_item(item);
}

void Engine::push_scope() { scopes_.push_back({}); }

void Engine::pop_scope(SymHeap* state, const cfront::Span& span) {
  const Kernel& k = th_.kernel();
  for (const auto& name : scopes_.back()) {
    auto it = vars_.find(name);
    if (it == vars_.end()) continue;
    if (state) {
      int idx = -1;
      for (size_t i = 0; i < state->spatials.size(); ++i) {
        std::vector<Term> args;
        Term head = strip_app(state->spatials[i], args);
        if (!head.is_const()) continue;
        if ((head.name() == "data_at" && args.size() == 3) ||
            (head.name() == "undef_data_at" && args.size() == 2)) {
          if (arith::match_modulo_arith(k, args[0], it->second.addr)) {
            idx = static_cast<int>(i);
            break;
          }
        }
      }
      if (idx < 0)
        throw ExecError("local variable " + name + " not owned at end of its scope (" +
                        span.file + ":" + std::to_string(span.line) + ")");
      state->spatials.erase(state->spatials.begin() + idx);
    }
    vars_.erase(it);
    var_order_.erase(std::remove(var_order_.begin(), var_order_.end(), name),
                     var_order_.end());
  }
  scopes_.pop_back();
}

void Engine::drop_scopes_down_to(size_t keep, SymHeap& state, const cfront::Span& span) {
  const Kernel& k = th_.kernel();
  for (size_t depth = scopes_.size(); depth-- > keep;) {
    for (const auto& name : scopes_[depth]) {
      auto it = vars_.find(name);
      if (it == vars_.end()) continue;
      int idx = -1;
      for (size_t i = 0; i < state.spatials.size(); ++i) {
        std::vector<Term> args;
        Term head = strip_app(state.spatials[i], args);
        if (!head.is_const()) continue;
        if ((head.name() == "data_at" && args.size() == 3) ||
            (head.name() == "undef_data_at" && args.size() == 2)) {
          if (arith::match_modulo_arith(k, args[0], it->second.addr)) {
            idx = static_cast<int>(i);
            break;
          }
        }
      }
      if (idx < 0)
        throw ExecError("local variable " + name + " not owned when leaving its scope (" +
                        span.file + ":" + std::to_string(span.line) + ")");
      state.spatials.erase(state.spatials.begin() + idx);
    }
  }
}

void Engine::log_state(const cfront::Span& span) {
  StateLogEntry entry;
  entry.span = span;
  entry.state = current_ ? quote::print_term(denote(*current_)) : "unreachable";
  ctx_.state_log.push_back(std::move(entry));
}

void Engine::set_state_from(const Theorem& th) {
  if (!th.hypotheses().empty())
    throw VerifyError("set_symbolic_state: theorem has hypotheses");
  const Term& c = th.conclusion();
  Term lhs, rhs;
  if (is_binary(c, "|--")) {
    lhs = binary_lhs(c);
    rhs = binary_rhs(c);
  } else if (is_eq(c) && eq_lhs(c).type() == hprop_ty()) {
    lhs = eq_lhs(c);
    rhs = eq_rhs(c);
  } else {
    throw VerifyError("set_symbolic_state: theorem must conclude an entailment");
  }
  if (!current_) throw ExecError("unreachable program point: no symbolic state");
  if (!alpha_eq(lhs, denote(*current_)))
    throw VerifyError("stale symbolic state: the theorem's left side is not the current state");
  for (const auto& tag : th.axioms()) ctx_.trust.insert(tag);
  current_ = canonicalize(rhs);
}

}  // namespace cstar::engine
