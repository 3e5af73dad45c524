/* Proof-support header for the clear benchmark: the loop-invariant
 * bookkeeping around the byte-zeroing loop. The heavy lifting is the
 * uninitialized-slice destruction in single_out_location; the other three
 * procedures move the state into and out of the invariant shape.
 */

[[cstar::proof(
    term clear_invariant(term ps) {
        return `exists (i:integer).
            fact(0 <= i && i <= len) **
            data_at(&"i", Tint, i) ** ${ps:hprop} **
            array_at(to, Tchar, replicate(i, 0)) **
            undef_array_at(to + i * sizeof(Tchar), Tchar, len - i)`;
    }

    void establish_invariant(term ps) {
        term s0 = get_symbolic_state();
        thm pad = sep_intro(s0, entail_of_eq(empty_replicate_array(`to`, `Tchar`, `0`)));
        thm done = entail_trans(pad,
            sep_match(consequent(conclusion(pad)), clear_invariant(ps), `0`));
        set_symbolic_state(done);
    }

    void single_out_location(void) {
        thm dest_undef_array =
            undef_array_at_select_first(`to + i * sizeof(Tchar)`, `Tchar`, `len - i`);
        thm arith_facts[] = {
            arith_rule(`len - i > 0 <=> i < len`),
            arith_rule(`len - i - 1 == len - (i + 1)`),
            arith_rule(`(to + i * sizeof(Tchar)) + sizeof(Tchar) ==
                        to + (i + 1) * sizeof(Tchar)`), NULL };
        dest_undef_array = rewrite_rule_list(arith_facts, dest_undef_array);
        thm final_thm = local_apply(get_symbolic_state(), dest_undef_array);
        set_symbolic_state(final_thm);
    }

    void reestablish_invariant(term ps) {
        term s0 = get_symbolic_state();
        thm fold = local_apply(s0, array_at_replicate_snoc(`to`, `Tchar`, `i`, `0`));
        thm done = entail_trans(fold,
            sep_match(consequent(conclusion(fold)), clear_invariant(ps), `i + 1`));
        set_symbolic_state(done);
    }

    void establish_postcondition(void) {
        term s0 = get_symbolic_state();
        thm cut = local_apply(s0,
            undef_array_at_nil(`to + i * sizeof(Tchar)`, `Tchar`, `len - i`));
        thm rename = entail_trans(cut,
            arith_subst(consequent(conclusion(cut)), `i`, `len`));
        set_symbolic_state(rename);
    }
)]]
