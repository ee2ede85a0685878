//! DFA acceptance must agree with direct trace semantics on every word
//! sequence, for every task template shape and for randomized formulas.

mod common;

use common::{all_sequences, eval_trace};
use proptest::prelude::*;
use taskweave::scltl::{Dfa, Formula, ScltlError, Word};

fn words(names: &[&str]) -> Vec<Word> {
    names.iter().map(|s| Word::new(s).unwrap()).collect()
}

fn dfa_accepts(dfa: &Dfa, trace: &[Word]) -> bool {
    let mut state = dfa.initial();
    for w in trace {
        state = dfa.advance(state, w).unwrap();
    }
    dfa.is_accepting(state)
}

fn check_formula_against_oracle(src: &str, alphabet: &[Word], max_len: usize) {
    let formula = Formula::parse(src).unwrap();
    match Dfa::compile(&formula, alphabet) {
        Ok(dfa) => {
            for seq in all_sequences(alphabet, max_len) {
                assert_eq!(
                    dfa_accepts(&dfa, &seq),
                    eval_trace(&formula, &seq),
                    "disagreement on {src:?} for sequence {seq:?}"
                );
            }
        }
        Err(ScltlError::Unsatisfiable) => {
            for seq in all_sequences(alphabet, max_len) {
                assert!(
                    !eval_trace(&formula, &seq),
                    "{src:?} was reported unsatisfiable but {seq:?} satisfies it"
                );
            }
        }
        Err(other) => panic!("unexpected compile error for {src:?}: {other}"),
    }
}

#[test]
fn template_shapes_agree_with_trace_semantics() {
    // One instantiation of each task template shape, plus exercises of the
    // remaining grammar corners, checked exhaustively on sequences of length
    // up to |alphabet| + 2.
    let cases: &[(&str, &[&str])] = &[
        ("F i-a && F i-b", &["i-a", "i-b"]),
        ("F i-a && F i-b && F i-c", &["i-a", "i-b", "i-c"]),
        ("F i-a && (F i-b || F i-c)", &["i-a", "i-b", "i-c"]),
        ("(!i-b U i-a) && F i-b", &["i-a", "i-b"]),
        (
            "((!i-c && !i-b) U i-a) && (!i-c U i-b) && F i-c",
            &["i-a", "i-b", "i-c"],
        ),
        (
            "((!i-c && !i-d) U i-a || (!i-c && !i-d) U i-b) && (!i-d U i-c) && F i-d",
            &["i-a", "i-b", "i-c", "i-d"],
        ),
        ("i-a", &["i-a", "i-b"]),
        ("!i-a", &["i-a", "i-b"]),
        ("a U b", &["a", "b", "c"]),
        ("F (a U b)", &["a", "b", "c"]),
        ("F a U b", &["a", "b", "c"]),
        ("(F a) U b", &["a", "b", "c"]),
        ("a && !a", &["a", "b"]),
        ("x || y && F z", &["x", "y", "z"]),
    ];
    for (src, alphabet) in cases {
        let alphabet = words(alphabet);
        let max_len = alphabet.len() + 2;
        check_formula_against_oracle(src, &alphabet, max_len);
    }
}

#[test]
fn formulas_with_spectator_words_agree_with_trace_semantics() {
    // The alphabet may be wider than the formula's atoms; spectator words
    // must behave as self-loops semantically.
    let alphabet = words(&["i-a", "i-b", "i-x"]);
    for src in ["F i-a && F i-b", "(!i-b U i-a) && F i-b", "!i-a U i-b"] {
        check_formula_against_oracle(src, &alphabet, 5);
    }
}

fn formula_strategy() -> impl Strategy<Value = Formula> {
    let atom = prop::sample::select(vec!["a", "b", "c"]).prop_map(|s| Word::new(s).unwrap());
    let leaf = prop_oneof![
        atom.clone().prop_map(Formula::Atom),
        atom.prop_map(Formula::Not),
    ];
    leaf.prop_recursive(3, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Formula::And),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Formula::Or),
            inner.clone().prop_map(|f| Formula::Eventually(Box::new(f))),
            (inner.clone(), inner)
                .prop_map(|(f, g)| Formula::Until(Box::new(f), Box::new(g))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_formulas_agree_with_trace_semantics(formula in formula_strategy()) {
        let alphabet = words(&["a", "b", "c"]);
        match Dfa::compile(&formula, &alphabet) {
            Ok(dfa) => {
                for seq in all_sequences(&alphabet, 4) {
                    prop_assert_eq!(
                        dfa_accepts(&dfa, &seq),
                        eval_trace(&formula, &seq),
                        "disagreement on {} for {:?}", formula, seq
                    );
                }
            }
            Err(ScltlError::Unsatisfiable) => {
                for seq in all_sequences(&alphabet, 4) {
                    prop_assert!(!eval_trace(&formula, &seq));
                }
            }
            Err(other) => prop_assert!(false, "unexpected compile error: {other}"),
        }
    }

    #[test]
    fn advance_is_deterministic_and_total(formula in formula_strategy(), seed in 0u64..1000) {
        let alphabet = words(&["a", "b", "c"]);
        if let Ok(dfa) = Dfa::compile(&formula, &alphabet) {
            // Walk a pseudo-random word sequence twice; identical states.
            let mut s1 = dfa.initial();
            let mut s2 = dfa.initial();
            let mut x = seed;
            for _ in 0..12 {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let w = &alphabet[(x >> 33) as usize % alphabet.len()];
                s1 = dfa.advance(s1, w).unwrap();
                s2 = dfa.advance(s2, w).unwrap();
                prop_assert_eq!(s1, s2);
                prop_assert!(s1 < dfa.num_states());
            }
        }
    }

    #[test]
    fn relevant_words_empty_iff_accepting_on_live_states(formula in formula_strategy()) {
        let alphabet = words(&["a", "b", "c"]);
        if let Ok(dfa) = Dfa::compile(&formula, &alphabet) {
            for s in 0..dfa.num_states() {
                if dfa.is_sink(s) {
                    continue;
                }
                prop_assert_eq!(
                    dfa.relevant_words(s).is_empty(),
                    dfa.is_accepting(s),
                    "state {} of {}", s, formula
                );
            }
        }
    }
}
