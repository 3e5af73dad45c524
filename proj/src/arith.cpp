// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0

#include "cstar/arith.hpp"

#include <algorithm>
#include <map>

#include "cstar/quote.hpp"

namespace cstar::arith {

std::optional<BigInt> ctype_size(const std::string& name) {
  if (name == "Tchar" || name == "Tuchar") return BigInt(1);
  if (name == "Tint") return BigInt(4);
  if (name == "Tptr") return BigInt(8);
  return std::nullopt;
}

namespace {

// ---------------------------------------------------------------------------
// Linear normal form
// ---------------------------------------------------------------------------

struct LinSum {
  BigInt constant;
  // atom -> coefficient; atoms kept arith-normalized and sorted
  std::vector<std::pair<Term, BigInt>> monos;

  void add_mono(const Term& atom, const BigInt& coeff) {
    if (coeff.is_zero()) return;
    for (auto& [a, c] : monos) {
      if (a == atom) {
        c = c + coeff;
        return;
      }
    }
    monos.emplace_back(atom, coeff);
  }

  void normalize() {
    monos.erase(std::remove_if(monos.begin(), monos.end(),
                               [](const auto& m) { return m.second.is_zero(); }),
                monos.end());
    std::sort(monos.begin(), monos.end(),
              [](const auto& a, const auto& b) { return term_compare(a.first, b.first) < 0; });
  }

  LinSum& operator+=(const LinSum& o) {
    constant = constant + o.constant;
    for (const auto& [a, c] : o.monos) add_mono(a, c);
    return *this;
  }

  void scale(const BigInt& f) {
    constant = constant * f;
    for (auto& [a, c] : monos) c = c * f;
  }

  bool is_constant() const { return monos.empty(); }
};

Term normal_any(const Kernel& k, const Term& t);
LinSum linearize(const Kernel& k, const Term& t);

Term literal_term(const Kernel& k, const BigInt& v) {
  if (v.negative()) return mk_app(k.constant("--"), mk_int_literal(-v));
  return mk_int_literal(v);
}

Term linsum_to_term(const Kernel& k, LinSum s) {
  s.normalize();
  std::vector<Term> parts;
  for (const auto& [atom, coeff] : s.monos) {
    if (coeff == BigInt(1))
      parts.push_back(atom);
    else
      parts.push_back(mk_app(mk_app(k.constant("*"), literal_term(k, coeff)), atom));
  }
  if (!s.constant.is_zero() || parts.empty()) parts.push_back(literal_term(k, s.constant));
  Term out = parts[0];
  for (size_t i = 1; i < parts.size(); ++i)
    out = mk_app(mk_app(k.constant("+"), out), parts[i]);
  return out;
}

LinSum linearize(const Kernel& k, const Term& t) {
  LinSum s;
  if (auto lit = dest_int_literal(t)) {
    s.constant = *lit;
    return s;
  }
  if (t.is_app() && t.fn().is_const() && t.fn().name() == "--") {
    s = linearize(k, t.arg());
    s.scale(BigInt(-1));
    return s;
  }
  if (is_binary(t, "+") || is_binary(t, "-")) {
    s = linearize(k, binary_lhs(t));
    LinSum rhs = linearize(k, binary_rhs(t));
    if (is_binary(t, "-")) rhs.scale(BigInt(-1));
    s += rhs;
    return s;
  }
  if (is_binary(t, "*")) {
    LinSum l = linearize(k, binary_lhs(t));
    LinSum r = linearize(k, binary_rhs(t));
    if (l.is_constant()) {
      r.scale(l.constant);
      return r;
    }
    if (r.is_constant()) {
      l.scale(r.constant);
      return l;
    }
    // nonlinear: keep as an atom with canonically ordered factors
    Term lt = linsum_to_term(k, l), rt = linsum_to_term(k, r);
    if (term_compare(lt, rt) > 0) std::swap(lt, rt);
    s.add_mono(mk_app(mk_app(k.constant("*"), lt), rt), BigInt(1));
    return s;
  }
  if (is_binary(t, "EXP")) {
    LinSum b = linearize(k, binary_lhs(t));
    LinSum e = linearize(k, binary_rhs(t));
    if (b.is_constant() && e.is_constant() && !e.constant.negative()) {
      s.constant = BigInt::pow(b.constant, e.constant);
      return s;
    }
    s.add_mono(mk_app(mk_app(k.constant("EXP"), linsum_to_term(k, b)), linsum_to_term(k, e)),
               BigInt(1));
    return s;
  }
  if (t.is_app() && t.fn().is_const() && t.fn().name() == "sizeof") {
    if (t.arg().is_const()) {
      if (auto sz = ctype_size(t.arg().name())) {
        s.constant = *sz;
        return s;
      }
    }
    s.add_mono(t, BigInt(1));
    return s;
  }
  if (is_binary(t, "/") || is_binary(t, "%")) {
    LinSum l = linearize(k, binary_lhs(t));
    LinSum r = linearize(k, binary_rhs(t));
    if (l.is_constant() && r.is_constant() && !r.constant.is_zero()) {
      s.constant = is_binary(t, "/") ? BigInt::div_trunc(l.constant, r.constant)
                                     : BigInt::rem_trunc(l.constant, r.constant);
      return s;
    }
    Term head = t.fn().fn();
    s.add_mono(mk_app(mk_app(head, linsum_to_term(k, l)), linsum_to_term(k, r)), BigInt(1));
    return s;
  }
  // opaque atom: variable or uninterpreted application; normalize inside
  s.add_mono(normal_any(k, t), BigInt(1));
  return s;
}

Term normal_any(const Kernel& k, const Term& t) {
  if (t.type() == integer_ty() && !t.is_var() && !is_int_literal(t) && !is_address_const(t)) {
    // avoid infinite recursion: linearize handles the integer structure and
    // calls back only on non-integer-headed children
    if (is_binary(t, "+") || is_binary(t, "-") || is_binary(t, "*") || is_binary(t, "/") ||
        is_binary(t, "%") || is_binary(t, "EXP") ||
        (t.is_app() && t.fn().is_const() &&
         (t.fn().name() == "--" || t.fn().name() == "sizeof")))
      return linsum_to_term(k, linearize(k, t));
  }
  switch (t.kind()) {
    case Term::Kind::Var:
    case Term::Kind::Const:
      return t;
    case Term::Kind::App: {
      Term f = normal_any(k, t.fn());
      Term x = t.arg().type() == integer_ty() ? linsum_to_term(k, linearize(k, t.arg()))
                                              : normal_any(k, t.arg());
      if (f == t.fn() && x == t.arg()) return t;
      return mk_app(f, x);
    }
    case Term::Kind::Abs:
      return mk_abs(t.bound_var(), normal_any(k, t.body()));
  }
  return t;
}

}  // namespace

Term arith_normal_term(const Kernel& k, const Term& t) {
  if (t.type() == integer_ty()) return linsum_to_term(k, linearize(k, t));
  return normal_any(k, t);
}

bool match_modulo_arith(const Kernel& k, const Term& a, const Term& b) {
  if (alpha_eq(a, b)) return true;
  return alpha_eq(arith_normal_term(k, a), arith_normal_term(k, b));
}

// ---------------------------------------------------------------------------
// Validity: negation -> NNF -> DNF -> Omega test per cube
// ---------------------------------------------------------------------------

namespace {

struct FragmentGuard : Error {
  using Error::Error;
};

// Linear constraint over integer variables identified by atom index.
// kind Ge:  sum + const >= 0 ; Eq: sum + const == 0
struct Constraint {
  enum class Kind { Ge, Eq } kind;
  std::map<int, BigInt> coeffs;  // var id -> coefficient, no zeros
  BigInt constant;

  void set(int var, const BigInt& c) {
    if (c.is_zero())
      coeffs.erase(var);
    else
      coeffs[var] = c;
  }
};

// Literal of a cube; Ne is split during solving.
struct Literal {
  enum class Kind { Ge, Eq, Ne, BoolAtom, NotBoolAtom } kind;
  Constraint c;   // Ge/Eq/Ne
  int bool_atom = -1;
};

struct AtomTable {
  const Kernel& k;
  bool abstract_opaque;
  std::vector<Term> int_atoms;    // id -> atom term
  std::vector<Term> bool_atoms;

  explicit AtomTable(const Kernel& kk, bool abs) : k(kk), abstract_opaque(abs) {}

  int int_atom_id(const Term& t) {
    Term key = arith_normal_term(k, t);
    for (size_t i = 0; i < int_atoms.size(); ++i)
      if (alpha_eq(int_atoms[i], key)) return static_cast<int>(i);
    int_atoms.push_back(key);
    return static_cast<int>(int_atoms.size()) - 1;
  }

  int bool_atom_id(const Term& t) {
    for (size_t i = 0; i < bool_atoms.size(); ++i)
      if (alpha_eq(bool_atoms[i], t)) return static_cast<int>(i);
    bool_atoms.push_back(t);
    return static_cast<int>(bool_atoms.size()) - 1;
  }

  // LinSum over variable ids.
  void flatten(const Term& t, std::map<int, BigInt>& coeffs, BigInt& constant,
               const BigInt& scale) {
    if (auto lit = dest_int_literal(t)) {
      constant = constant + *lit * scale;
      return;
    }
    if (t.is_app() && t.fn().is_const() && t.fn().name() == "--") {
      flatten(t.arg(), coeffs, constant, -scale);
      return;
    }
    if (is_binary(t, "+")) {
      flatten(binary_lhs(t), coeffs, constant, scale);
      flatten(binary_rhs(t), coeffs, constant, scale);
      return;
    }
    if (is_binary(t, "-")) {
      flatten(binary_lhs(t), coeffs, constant, scale);
      flatten(binary_rhs(t), coeffs, constant, -scale);
      return;
    }
    if (is_binary(t, "*")) {
      auto l = dest_int_literal(arith_normal_term(k, binary_lhs(t)));
      auto r = dest_int_literal(arith_normal_term(k, binary_rhs(t)));
      if (l) {
        flatten(binary_rhs(t), coeffs, constant, scale * *l);
        return;
      }
      if (r) {
        flatten(binary_lhs(t), coeffs, constant, scale * *r);
        return;
      }
      if (!abstract_opaque)
        throw FragmentGuard("outside linear fragment: nonlinear product " +
                            quote::print_term(t));
      int id = int_atom_id(t);
      coeffs[id] = (coeffs.count(id) ? coeffs[id] : BigInt(0)) + scale;
      return;
    }
    if (is_binary(t, "/") || is_binary(t, "%")) {
      if (!abstract_opaque)
        throw FragmentGuard("outside linear fragment: division in " + quote::print_term(t));
      int id = int_atom_id(t);
      coeffs[id] = (coeffs.count(id) ? coeffs[id] : BigInt(0)) + scale;
      return;
    }
    if (t.is_app() && t.fn().is_const() && t.fn().name() == "sizeof" && t.arg().is_const()) {
      if (auto sz = ctype_size(t.arg().name())) {
        constant = constant + *sz * scale;
        return;
      }
    }
    if (is_binary(t, "EXP")) {
      Term nf = arith_normal_term(k, t);
      if (auto lit = dest_int_literal(nf)) {
        constant = constant + *lit * scale;
        return;
      }
    }
    // variable or opaque atom
    int id = int_atom_id(t);
    coeffs[id] = (coeffs.count(id) ? coeffs[id] : BigInt(0)) + scale;
  }

  Constraint linear(const Term& lhs, const Term& rhs, Constraint::Kind kind,
                    const BigInt& lhs_scale, const BigInt& rhs_scale, const BigInt& offset) {
    Constraint c;
    c.kind = kind;
    c.constant = offset;
    std::map<int, BigInt> coeffs;
    flatten(lhs, coeffs, c.constant, lhs_scale);
    flatten(rhs, coeffs, c.constant, rhs_scale);
    for (auto& [v, co] : coeffs)
      if (!co.is_zero()) c.coeffs[v] = co;
    return c;
  }
};

// NNF formula tree over literals.
struct NNF {
  enum class K { And, Or, Lit, True, False } k;
  std::vector<NNF> kids;
  Literal lit;
};

bool is_cmp(const Term& t, const char* op) { return is_binary(t, op); }

NNF to_nnf(AtomTable& at, const Term& t, bool positive);

NNF nnf_lit(Literal l) {
  NNF n;
  n.k = NNF::K::Lit;
  n.lit = std::move(l);
  return n;
}

NNF nnf_node(NNF::K k, NNF a, NNF b) {
  NNF n;
  n.k = k;
  n.kids.push_back(std::move(a));
  n.kids.push_back(std::move(b));
  return n;
}

// comparison -> Ge/Eq/Ne constraint under polarity
NNF cmp_to_nnf(AtomTable& at, const Term& t, bool positive) {
  Term l = binary_lhs(t), r = binary_rhs(t);
  const BigInt one(1), minus_one(-1), zero(0);
  auto ge = [&](const Term& a, const Term& b, const BigInt& off) {
    // a - b + off >= 0
    return nnf_lit({Literal::Kind::Ge,
                    at.linear(a, b, Constraint::Kind::Ge, one, minus_one, off), -1});
  };
  if (is_cmp(t, "<"))  return positive ? ge(r, l, BigInt(-1)) : ge(l, r, zero);
  if (is_cmp(t, "<=")) return positive ? ge(r, l, zero) : ge(l, r, BigInt(-1));
  if (is_cmp(t, ">"))  return positive ? ge(l, r, BigInt(-1)) : ge(r, l, zero);
  if (is_cmp(t, ">=")) return positive ? ge(l, r, zero) : ge(r, l, BigInt(-1));
  // integer equality
  Constraint c = at.linear(l, r, positive ? Constraint::Kind::Eq : Constraint::Kind::Eq, one,
                           minus_one, zero);
  Literal lit;
  lit.kind = positive ? Literal::Kind::Eq : Literal::Kind::Ne;
  lit.c = std::move(c);
  return nnf_lit(std::move(lit));
}

NNF to_nnf(AtomTable& at, const Term& t, bool positive) {
  if (t.is_const() && t.name() == "T") {
    NNF n;
    n.k = positive ? NNF::K::True : NNF::K::False;
    return n;
  }
  if (t.is_const() && t.name() == "F") {
    NNF n;
    n.k = positive ? NNF::K::False : NNF::K::True;
    return n;
  }
  if (t.is_app() && t.fn().is_const() && t.fn().name() == "~")
    return to_nnf(at, t.arg(), !positive);
  if (is_binary(t, "&&") && t.type() == bool_ty()) {
    NNF a = to_nnf(at, binary_lhs(t), positive);
    NNF b = to_nnf(at, binary_rhs(t), positive);
    return nnf_node(positive ? NNF::K::And : NNF::K::Or, std::move(a), std::move(b));
  }
  if (is_binary(t, "||")) {
    NNF a = to_nnf(at, binary_lhs(t), positive);
    NNF b = to_nnf(at, binary_rhs(t), positive);
    return nnf_node(positive ? NNF::K::Or : NNF::K::And, std::move(a), std::move(b));
  }
  if (is_binary(t, "==>")) {
    NNF a = to_nnf(at, binary_lhs(t), !positive);
    NNF b = to_nnf(at, binary_rhs(t), positive);
    return nnf_node(positive ? NNF::K::Or : NNF::K::And, std::move(a), std::move(b));
  }
  if (is_cmp(t, "<") || is_cmp(t, "<=") || is_cmp(t, ">") || is_cmp(t, ">="))
    return cmp_to_nnf(at, t, positive);
  if (is_eq(t)) {
    const Term& l = eq_lhs(t);
    if (l.type() == integer_ty()) return cmp_to_nnf(at, t, positive);
    if (l.type() == bool_ty()) {
      // (a <=> b) == (a ==> b) && (b ==> a)
      NNF ab_pos = nnf_node(NNF::K::And,
                            to_nnf(at, eq_lhs(t), false).k == NNF::K::True
                                ? to_nnf(at, eq_lhs(t), false)
                                : nnf_node(NNF::K::Or, to_nnf(at, eq_lhs(t), false),
                                           to_nnf(at, eq_rhs(t), true)),
                            nnf_node(NNF::K::Or, to_nnf(at, eq_rhs(t), false),
                                     to_nnf(at, eq_lhs(t), true)));
      if (positive) return ab_pos;
      // ~(a <=> b) == (a && ~b) || (b && ~a)
      return nnf_node(
          NNF::K::Or,
          nnf_node(NNF::K::And, to_nnf(at, eq_lhs(t), true), to_nnf(at, eq_rhs(t), false)),
          nnf_node(NNF::K::And, to_nnf(at, eq_rhs(t), true), to_nnf(at, eq_lhs(t), false)));
    }
    // reflexive equality at any type holds outright
    if (alpha_eq(eq_lhs(t), eq_rhs(t))) {
      NNF n;
      n.k = positive ? NNF::K::True : NNF::K::False;
      return n;
    }
    // equality at other types: opaque boolean atom
  }
  if (!at.abstract_opaque)
    throw FragmentGuard("outside linear fragment: " + quote::print_term(t));
  Literal lit;
  lit.kind = positive ? Literal::Kind::BoolAtom : Literal::Kind::NotBoolAtom;
  lit.bool_atom = at.bool_atom_id(t);
  return nnf_lit(std::move(lit));
}

constexpr size_t kCubeLimit = 8192;

void to_dnf(const NNF& n, std::vector<std::vector<Literal>>& out) {
  switch (n.k) {
    case NNF::K::True:
      out.push_back({});
      return;
    case NNF::K::False:
      return;
    case NNF::K::Lit:
      out.push_back({n.lit});
      return;
    case NNF::K::Or: {
      for (const auto& kid : n.kids) to_dnf(kid, out);
      if (out.size() > kCubeLimit) throw Error("arith: formula too large (DNF limit)");
      return;
    }
    case NNF::K::And: {
      std::vector<std::vector<Literal>> left;
      to_dnf(n.kids[0], left);
      std::vector<std::vector<Literal>> right;
      to_dnf(n.kids[1], right);
      for (const auto& a : left)
        for (const auto& b : right) {
          std::vector<Literal> cube = a;
          cube.insert(cube.end(), b.begin(), b.end());
          out.push_back(std::move(cube));
          if (out.size() > kCubeLimit) throw Error("arith: formula too large (DNF limit)");
        }
      return;
    }
  }
}

// ---------------------------------------------------------------------------
// Omega test on a conjunction of Ge/Eq constraints
// ---------------------------------------------------------------------------

struct Omega {
  int next_var;
  int depth = 0;
  explicit Omega(int first_fresh) : next_var(first_fresh) {}

  static BigInt coeff_gcd(const Constraint& c) {
    BigInt g(0);
    for (const auto& [v, co] : c.coeffs) g = BigInt::gcd(g, co);
    return g;
  }

  // returns false if the constraint is unsatisfiable by itself
  static bool tighten(Constraint& c) {
    BigInt g = coeff_gcd(c);
    if (g.is_zero()) {
      if (c.kind == Constraint::Kind::Eq) return c.constant.is_zero();
      return !c.constant.negative();
    }
    if (c.kind == Constraint::Kind::Eq) {
      if (!BigInt::mod_floor(c.constant, g).is_zero()) return false;
      for (auto& [v, co] : c.coeffs) co = BigInt::div_floor(co, g);
      c.constant = BigInt::div_floor(c.constant, g);
    } else {
      for (auto& [v, co] : c.coeffs) co = BigInt::div_floor(co, g);
      c.constant = BigInt::div_floor(c.constant, g);  // floor tightens >= 0
    }
    return true;
  }

  // substitute var := rhs (a constraint expressed as var = sum + const)
  static void substitute(Constraint& c, int var, const std::map<int, BigInt>& rhs_coeffs,
                         const BigInt& rhs_const) {
    auto it = c.coeffs.find(var);
    if (it == c.coeffs.end()) return;
    BigInt factor = it->second;
    c.coeffs.erase(it);
    for (const auto& [v, co] : rhs_coeffs) {
      BigInt cur = c.coeffs.count(v) ? c.coeffs[v] : BigInt(0);
      cur = cur + factor * co;
      if (cur.is_zero())
        c.coeffs.erase(v);
      else
        c.coeffs[v] = cur;
    }
    c.constant = c.constant + factor * rhs_const;
  }

  // a smod m with result in (-m/2, m/2]
  static BigInt smod(const BigInt& a, const BigInt& m) {
    BigInt two(2);
    return a - m * BigInt::div_floor(two * a + m, two * m);
  }

  bool sat(std::vector<Constraint> cs) {
    if (++depth > 4000) throw Error("arith: search budget exceeded");
    struct DepthGuard {
      int& d;
      ~DepthGuard() { --d; }
    } guard{depth};

    // normalize all; drop trivial
    std::vector<Constraint> sys;
    for (auto& c : cs) {
      if (!tighten(c)) return false;
      if (!c.coeffs.empty()) sys.push_back(std::move(c));
    }
    // equality elimination
    for (size_t idx = 0; idx < sys.size(); ++idx) {
      if (sys[idx].kind != Constraint::Kind::Eq) continue;
      Constraint eq = sys[idx];
      // find a +-1 coefficient
      int solve_var = -1;
      for (const auto& [v, co] : eq.coeffs)
        if (co == BigInt(1) || co == BigInt(-1)) {
          solve_var = v;
          break;
        }
      if (solve_var < 0) {
        // Omega modulus trick: introduce sigma; the derived equation has a
        // +-1 coefficient for the variable with the smallest coefficient, so
        // solve it immediately and substitute through the whole system.
        int kvar = -1;
        BigInt kco;
        for (const auto& [v, co] : eq.coeffs)
          if (kvar < 0 || co.abs() < kco.abs()) {
            kvar = v;
            kco = co;
          }
        BigInt m = kco.abs() + BigInt(1);
        Constraint modeq;
        modeq.kind = Constraint::Kind::Eq;
        for (const auto& [v, co] : eq.coeffs) modeq.set(v, smod(co, m));
        modeq.constant = smod(eq.constant, m);
        int sigma = next_var++;
        modeq.set(sigma, -m);
        BigInt co_k = modeq.coeffs.at(kvar);  // -sign(kco), so +-1
        BigInt mult = -co_k;
        std::map<int, BigInt> rhs;
        BigInt rconst = modeq.constant * mult;
        for (const auto& [v, c2] : modeq.coeffs)
          if (v != kvar) rhs[v] = c2 * mult;
        std::vector<Constraint> reduced;
        for (const auto& c : sys) {
          Constraint cc = c;
          substitute(cc, kvar, rhs, rconst);
          reduced.push_back(std::move(cc));
        }
        return sat(std::move(reduced));
      }
      // solve eq for solve_var: co * x + rest + const = 0
      BigInt co = eq.coeffs[solve_var];
      std::map<int, BigInt> rhs;  // x = rhs + rconst
      BigInt rconst;
      // x = -(rest + const)/co ; co is +-1 so multiply by -co
      BigInt mult = -co;  // 1/co == co for +-1, negated to move across
      for (const auto& [v, c2] : eq.coeffs)
        if (v != solve_var) rhs[v] = c2 * mult;
      rconst = eq.constant * mult;
      std::vector<Constraint> reduced;
      for (size_t j = 0; j < sys.size(); ++j) {
        if (j == idx) continue;
        Constraint c = sys[j];
        substitute(c, solve_var, rhs, rconst);
        reduced.push_back(std::move(c));
      }
      return sat(std::move(reduced));
    }

    // inequalities only
    if (sys.empty()) return true;
    // choose a variable to eliminate: fewest lower*upper products
    std::map<int, std::pair<int, int>> counts;  // var -> (lowers, uppers)
    for (const auto& c : sys)
      for (const auto& [v, co] : c.coeffs) {
        if (co.negative())
          counts[v].second++;
        else
          counts[v].first++;
      }
    int best = -1;
    long best_score = -1;
    bool best_one_sided = false;
    for (const auto& [v, lu] : counts) {
      bool one_sided = lu.first == 0 || lu.second == 0;
      long score = static_cast<long>(lu.first) * lu.second;
      if (one_sided) {
        best = v;
        best_one_sided = true;
        break;
      }
      if (best_score < 0 || score < best_score) {
        best = v;
        best_score = score;
      }
    }
    if (best_one_sided) {
      // unbounded direction: drop every constraint mentioning it
      std::vector<Constraint> rest;
      for (const auto& c : sys)
        if (!c.coeffs.count(best)) rest.push_back(c);
      return sat(std::move(rest));
    }

    // Fourier-Motzkin on `best` with integer reasoning
    std::vector<Constraint> lowers, uppers, rest;
    for (const auto& c : sys) {
      auto it = c.coeffs.find(best);
      if (it == c.coeffs.end())
        rest.push_back(c);
      else if (it->second.negative())
        uppers.push_back(c);
      else
        lowers.push_back(c);
    }
    bool exact = true;
    for (const auto& lo : lowers)
      for (const auto& up : uppers) {
        BigInt a = lo.coeffs.at(best);          // a > 0:  a x >= -(lo rest)
        BigInt b = -(up.coeffs.at(best));       // b > 0:  b x <= (up rest)
        if (!(a == BigInt(1)) && !(b == BigInt(1))) exact = false;
      }

    auto shadow = [&](bool dark) {
      std::vector<Constraint> out = rest;
      for (const auto& lo : lowers)
        for (const auto& up : uppers) {
          BigInt a = lo.coeffs.at(best);
          BigInt b = -(up.coeffs.at(best));
          // combine: b*lo + a*up eliminates x
          Constraint c;
          c.kind = Constraint::Kind::Ge;
          c.constant = b * lo.constant + a * up.constant;
          std::map<int, BigInt> coeffs;
          for (const auto& [v, co] : lo.coeffs)
            if (v != best) coeffs[v] = b * co;
          for (const auto& [v, co] : up.coeffs) {
            if (v == best) continue;
            BigInt cur = coeffs.count(v) ? coeffs[v] : BigInt(0);
            coeffs[v] = cur + a * co;
          }
          if (dark) c.constant = c.constant - (a - BigInt(1)) * (b - BigInt(1));
          for (const auto& [v, co] : coeffs)
            if (!co.is_zero()) c.coeffs[v] = co;
          out.push_back(std::move(c));
        }
      return out;
    };

    if (exact) return sat(shadow(false));
    if (!sat(shadow(false))) return false;  // real shadow, necessary
    if (sat(shadow(true))) return true;     // dark shadow, sufficient
    // splinters: some lower bound is nearly tight
    BigInt bmax(0);
    for (const auto& up : uppers) {
      BigInt b = -(up.coeffs.at(best));
      if (b > bmax) bmax = b;
    }
    for (const auto& lo : lowers) {
      BigInt a = lo.coeffs.at(best);
      if (a == BigInt(1)) continue;
      BigInt limit = BigInt::div_floor(a * bmax - a - bmax, bmax);
      for (BigInt i(0); i <= limit; i = i + BigInt(1)) {
        // a x = -(lo rest) + i  i.e.  lo + (-i) == 0 with x kept
        Constraint eq = lo;
        eq.kind = Constraint::Kind::Eq;
        eq.constant = eq.constant - i;
        std::vector<Constraint> sys2 = sys;
        sys2.push_back(std::move(eq));
        if (sat(std::move(sys2))) return true;
      }
    }
    return false;
  }
};

// cube satisfiability with Ne splitting and bool-atom consistency
bool cube_sat(const std::vector<Literal>& cube, int first_fresh) {
  std::map<int, int> bool_sign;  // atom -> +1/-1
  std::vector<Constraint> cs;
  std::vector<Constraint> nes;
  for (const auto& lit : cube) {
    switch (lit.kind) {
      case Literal::Kind::Ge:
      case Literal::Kind::Eq:
        cs.push_back(lit.c);
        break;
      case Literal::Kind::Ne:
        nes.push_back(lit.c);
        break;
      case Literal::Kind::BoolAtom: {
        auto [it, fresh] = bool_sign.emplace(lit.bool_atom, 1);
        if (!fresh && it->second != 1) return false;
        break;
      }
      case Literal::Kind::NotBoolAtom: {
        auto [it, fresh] = bool_sign.emplace(lit.bool_atom, -1);
        if (!fresh && it->second != -1) return false;
        break;
      }
    }
  }
  // expand Ne disjunctively
  std::vector<std::vector<Constraint>> systems{cs};
  for (const auto& ne : nes) {
    std::vector<std::vector<Constraint>> next;
    for (const auto& base : systems) {
      Constraint lt = ne, gt = ne;  // sum + c >= 1  /  -(sum) - c >= 1
      lt.kind = Constraint::Kind::Ge;
      lt.constant = lt.constant - BigInt(1);
      gt.kind = Constraint::Kind::Ge;
      for (auto& [v, co] : gt.coeffs) co = -co;
      gt.constant = -gt.constant - BigInt(1);
      auto s1 = base;
      s1.push_back(lt);
      next.push_back(std::move(s1));
      auto s2 = base;
      s2.push_back(gt);
      next.push_back(std::move(s2));
    }
    systems = std::move(next);
    if (systems.size() > kCubeLimit) throw Error("arith: formula too large (!= splits)");
  }
  for (auto& sys : systems) {
    Omega omega(first_fresh);
    if (omega.sat(sys)) return true;
  }
  return false;
}

// brute-force search for a small countermodel of `formula` (evaluates the
// negation over a grid); returns "" if none within range
std::string small_countermodel(AtomTable& at,
                               const std::vector<std::vector<Literal>>& neg_dnf) {
  size_t nvars = at.int_atoms.size();
  if (nvars > 3 || !at.bool_atoms.empty()) return "";
  const int lo = -8, hi = 8;
  std::vector<BigInt> assign(nvars, BigInt(0));
  std::vector<int> cur(nvars, lo);
  auto eval_cube = [&](const std::vector<Literal>& cube) {
    for (const auto& lit : cube) {
      if (lit.kind == Literal::Kind::BoolAtom || lit.kind == Literal::Kind::NotBoolAtom)
        return false;
      BigInt v = lit.c.constant;
      for (const auto& [var, co] : lit.c.coeffs) {
        if (var >= static_cast<int>(nvars)) return false;
        v = v + co * assign[var];
      }
      bool ok = lit.kind == Literal::Kind::Ge   ? !v.negative()
                : lit.kind == Literal::Kind::Eq ? v.is_zero()
                                                : !v.is_zero();
      if (!ok) return false;
    }
    return true;
  };
  for (;;) {
    for (size_t i = 0; i < nvars; ++i) assign[i] = BigInt(cur[i]);
    for (const auto& cube : neg_dnf) {
      if (eval_cube(cube)) {
        std::string s;
        for (size_t i = 0; i < nvars; ++i) {
          if (i) s += ", ";
          s += quote::print_term(at.int_atoms[i]) + " = " + assign[i].to_string();
        }
        return s;
      }
    }
    size_t i = 0;
    for (; i < nvars; ++i) {
      if (cur[i] < hi) {
        ++cur[i];
        break;
      }
      cur[i] = lo;
    }
    if (i == nvars || nvars == 0) break;
  }
  return "";
}

}  // namespace

Validity check_valid(const Kernel& k, const Term& formula, Fragment fragment) {
  if (!(formula.type() == bool_ty()))
    throw Error("arith: formula is not of type bool");
  AtomTable at(k, fragment == Fragment::AbstractOpaque);
  NNF neg;
  try {
    neg = to_nnf(at, formula, /*positive=*/false);
  } catch (const FragmentGuard& e) {
    throw Error(e.what());
  }
  std::vector<std::vector<Literal>> dnf;
  to_dnf(neg, dnf);
  Validity result;
  result.valid = true;
  for (const auto& cube : dnf) {
    if (cube_sat(cube, static_cast<int>(at.int_atoms.size()))) {
      result.valid = false;
      break;
    }
  }
  if (!result.valid) result.countermodel = small_countermodel(at, dnf);
  return result;
}

Theorem arith_rule(const Kernel& k, const Term& t, Fragment fragment) {
  Validity v = check_valid(k, t, fragment);
  if (!v.valid) {
    std::string msg = "arith_rule: not valid: " + quote::print_term(t);
    if (!v.countermodel.empty()) msg += " (countermodel: " + v.countermodel + ")";
    throw Error(msg);
  }
  return k.oracle_theorem(kOracleTag, t);
}

}  // namespace cstar::arith
