/* cstar standard proof-support prelude.
 *
 * Declares the externally specified allocation functions and ships the
 * sample derived rules written in proof code. The engine/kernel builtins
 * below are implemented by the proof-supporting runtime; the prototypes
 * document the surface available to proof code.
 */

extern void *malloc(int n)
    [[cstar::require(`emp`)]]
    [[cstar::ensure(`hite(__result == 0, emp, undef_array_at(__result, Tchar, n))`)]];

extern void free(void *p)
    [[cstar::parameter(`n:integer`)]]
    [[cstar::require(`undef_array_at(p, Tchar, n)`)]]
    [[cstar::ensure(`emp`)]];

[[cstar::proof(
    /* engine interface */
    extern term get_symbolic_state(void);
    extern void set_symbolic_state(thm entailment);

    /* kernel primitives and derived rules */
    extern thm refl(term t);
    extern thm symm(thm th);
    extern thm trans(thm ab, thm bc);
    extern thm assume(term t);
    extern thm eq_mp(thm eq, thm th);
    extern thm beta(term redex);
    extern thm mp(thm imp, thm antecedent);
    extern thm disch(term antecedent, thm th);
    extern thm specialize(thm th, term t);
    extern thm generalize(term var, thm th);
    extern thm gen_all(thm th);
    extern term conclusion(thm th);
    extern term consequent(term t);
    extern term antecedent(term t);
    extern int equals_term(term a, term b);
    extern int is_sep(term t);
    extern term left_of_sep(term t);
    extern term right_of_sep(term t);

    /* oracle and rewriting */
    extern thm arith_rule(term formula);
    extern thm rewrite(thm eq, term t);
    extern thm rewrite_rule_list(thm rules[], thm th);

    /* separation-logic derived rules */
    extern thm hsep_comm(term t);
    extern thm hsep_move(term t);
    extern thm sep_normalize(term t);
    extern thm sep_lift(term target, term t);
    extern thm sep_reorder(term t1, term t2);
    extern thm local_apply(term state, thm transform);
    extern thm exists_intro(term target, term witness);
    extern thm arith_subst(term state, term old_value, term new_value);
    extern thm pure_intro(term state, term fact);
    extern thm sep_drop_fact(term state, term fact);
    extern thm drop_unused_binders(term state);
    extern thm entail_of_eq(thm eq);
    extern thm entail_trans(thm ab, thm bc);
    extern thm entail_frame(thm entailment, term frame);
    extern thm entail_refl(term t);
    extern void assert_prove(thm th, term goal);

    /* emp -|- array_at(base, ty, replicate(0, v)) */
    thm empty_replicate_array(term base, term ty, term v) {
        thm an = array_at_nil(base, ty);
        thm rz = replicate_zero(v);
        thm widen = rewrite(symm(rz), consequent(conclusion(symm(an))));
        return trans(symm(an), widen);
    }

    /* Lifts the target conjunct of a right-associated symbolic heap to the
     * far-left position, one commutation layer at a time. */
    thm sep_lift_one(term target, term septerm)
    {
        thm lift_to_left = hsep_move(target);
        if (is_sep(septerm)) {
            term l = left_of_sep(septerm);
            term r = right_of_sep(septerm);
            if (equals_term(target, l)) { return rewrite(lift_to_left, septerm); }
            else {
                if (is_sep(r)) {
                    thm step1 = rewrite(sep_lift_one(target, r), septerm);
                    thm step2 = rewrite(lift_to_left, consequent(conclusion(step1)));
                    return trans(step1, step2);
                } else if (equals_term(target, r))
                    return rewrite(symm(hsep_comm(target)), septerm);
            }
        } else if (equals_term(target, septerm)) { return refl(septerm); }
        return NULL; /* fail if target isn't found */
    }
)]]
