mod common;

use common::{close, dense_mm_run};
use proptest::prelude::*;
use qfa::ptest::{
    canonicalize, compile, compile_atom, parse_expr, subseq_oracle, trigger_lower_bound,
    trigger_upper_bound, PtestExpr,
};
use qfa::qfa::{verify_certificate, word, Alphabet, StateKind};
use qfa::Error;

fn ab() -> Alphabet {
    Alphabet::parse("ab").unwrap()
}

fn abc() -> Alphabet {
    Alphabet::parse("abc").unwrap()
}

fn expr_strategy() -> impl Strategy<Value = PtestExpr> {
    let leaf = "[ab]{0,2}".prop_map(|z| PtestExpr::atom(&z));
    leaf.prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(PtestExpr::not),
            prop::collection::vec(inner.clone(), 2..4).prop_map(PtestExpr::And),
            prop::collection::vec(inner, 2..4).prop_map(PtestExpr::Or),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_form_has_the_same_truth_table(e in expr_strategy()) {
        let c = canonicalize(&e);
        for w in ab().words_up_to(5) {
            prop_assert_eq!(c.evaluate(&w), e.evaluate(&w), "{} on {:?}", e, w);
        }
        for imp in &c.implicants {
            prop_assert!(imp.positive.iter().all(|z| !z.is_empty()));
            prop_assert!(imp.negative.iter().all(|z| !z.is_empty()));
        }
    }

    #[test]
    fn display_reparses_to_an_equivalent_expression(e in expr_strategy()) {
        let text = e.to_string();
        let back = parse_expr(&text, &ab()).unwrap();
        prop_assert_eq!(back.to_string(), text.clone());
        for w in ab().words_up_to(4) {
            prop_assert_eq!(back.evaluate(&w), e.evaluate(&w), "{}", text);
        }
    }
}

#[test]
fn parser_reports_positions() {
    let err = parse_expr(r#""ab" & "ad""#, &abc()).unwrap_err();
    assert!(matches!(err, Error::Parse { position: 9, .. }), "{err}");
    let err = parse_expr(r#"("ab" | "c""#, &abc()).unwrap_err();
    assert!(matches!(err, Error::Parse { position: 11, .. }), "{err}");
    assert!(parse_expr(r#""ab"""#, &abc()).is_err());
    assert!(parse_expr("", &abc()).is_err());
}

#[test]
fn precedence_and_canonical_examples() {
    let e = parse_expr(r#""a" | "b" & !"c""#, &abc()).unwrap();
    assert_eq!(
        e,
        PtestExpr::Or(vec![
            PtestExpr::atom("a"),
            PtestExpr::And(vec![PtestExpr::atom("b"), PtestExpr::not(PtestExpr::atom("c"))]),
        ])
    );
    let c = canonicalize(&parse_expr(r#"!("a" | "b")"#, &abc()).unwrap());
    assert_eq!(c.implicants.len(), 1);
    assert!(c.implicants[0].positive.is_empty());
    assert_eq!(c.implicants[0].negative, vec![word("a"), word("b")]);
    assert!(canonicalize(&parse_expr(r#""a" & !"a""#, &abc()).unwrap()).implicants.is_empty());
    assert!(canonicalize(&parse_expr(r#"!"""#, &abc()).unwrap()).implicants.is_empty());
}

#[test]
fn every_short_atom_compiles_to_a_certified_automaton() {
    for z in ab().words_up_to(3).into_iter().filter(|z| !z.is_empty()) {
        let m = compile_atom(&z, &ab()).unwrap();
        assert_eq!(m.n_states(), 2 * z.len() + 3);
        assert!(m.validate(1e-9).is_empty(), "{z:?}");
        let cert = m.certificate.as_ref().unwrap();
        let report = verify_certificate(&m, cert, &|w: &[char]| subseq_oracle(&z, w), 6).unwrap();
        assert!(report.is_ok(), "{z:?}: {:?}", report.violation);
        if z.len() == 1 || z[0] != z[1] {
            let n = z.len() - 1;
            for w in ab().words_up_to(6) {
                assert!(m.accept_prob(&w).unwrap() <= trigger_upper_bound(n) + 1e-12);
            }
        }
    }
    assert!(compile_atom(&[], &ab()).is_err());
    assert!(compile_atom(&word("ac"), &ab()).is_err());
}

#[test]
fn three_symbol_atom_matches_dense_reference() {
    let m = compile_atom(&word("abc"), &abc()).unwrap();
    for w in abc().words_up_to(5) {
        let t = m.run(&w).unwrap();
        let (acc, rej) = dense_mm_run(&m, &w);
        assert!(close(t.p_acc(), acc, 1e-12) && close(t.p_rej(), rej, 1e-12));
        if subseq_oracle(&word("abc"), &w) {
            assert!(acc >= trigger_lower_bound(2));
        } else {
            assert!(acc < 1e-12, "{w:?}");
        }
    }
}

fn check_compiled(text: &str, alphabet: &Alphabet, max_len: usize) {
    let e = parse_expr(text, alphabet).unwrap();
    let c = compile(&e, alphabet).unwrap();
    assert!(c.automaton.validate(1e-9).is_empty());
    assert_eq!(c.automaton.certificate, Some(c.certificate));
    let report = verify_certificate(&c.automaton, &c.certificate, &|w: &[char]| e.evaluate(w), max_len)
        .unwrap();
    assert!(report.is_ok(), "{text}: {:?}", report.violation.map(|v| v.to_string()));
    let margin = report.empirical_margin(c.certificate.cut_point).unwrap();
    assert!(margin >= c.certificate.margin - 1e-9);
    assert!(!c.report.steps.is_empty());
    assert!(c.report.to_string().contains("canonical form"));
}

#[test]
fn compiled_expressions_respect_their_certificates() {
    check_compiled(r#""a" & !"b""#, &ab(), 5);
    check_compiled(r#"("a" & "b") | !"c""#, &abc(), 4);
    check_compiled(r#""ab" | "ba""#, &ab(), 5);
    check_compiled(r#"!"""#, &ab(), 3);
    check_compiled(r#""""#, &ab(), 3);
}

#[test]
fn no_acceptance_before_the_end_marker() {
    for z in ["a", "ab", "abc", "cab"] {
        let m = compile_atom(&word(z), &abc()).unwrap();
        for w in abc().words_up_to(4) {
            let t = m.run(&w).unwrap();
            let mut last_rej = t.initial.p_rej;
            for step in &t.steps[..t.steps.len() - 1] {
                assert_eq!(step.state.p_acc, 0.0);
                assert!(step.state.p_rej >= last_rej - 1e-15);
                last_rej = step.state.p_rej;
            }
        }
    }
}

/// Once `z` has been read, the last chain state `q_{2n}` holds at most
/// `(1 − 2^-(n+1))/√(n+2)`, and this persists on every extension.
#[test]
fn last_chain_state_stays_low_after_a_full_trigger() {
    for z in abc().words_up_to(3).into_iter().filter(|z| !z.is_empty()) {
        let m = compile_atom(&z, &abc()).unwrap();
        let n = z.len() - 1;
        let amp = 1.0 / (n as f64 + 2.0).sqrt();
        let bound = amp * (1.0 - 0.5f64.powi(n as i32 + 1)) + 1e-12;
        for w in abc().words_up_to(5) {
            let t = m.run(&w).unwrap();
            for k in 1..=w.len() {
                let v = &t.steps[k - 1].state.vector;
                assert!(v.as_slice().iter().all(|x| x.im.abs() < 1e-12));
                assert!(close(v[2 * n + 2].re, amp, 1e-12));
                if subseq_oracle(&z, &w[..k]) {
                    assert!(v[2 * n].re <= bound, "{z:?} {w:?} k={k}");
                }
            }
        }
    }
}

/// Without a repeated leading symbol every averaging step is a convex
/// combination, so even states stay in `[0, 1/√(n+2)]`.
#[test]
fn even_amplitudes_stay_in_range_without_leading_repeat() {
    for z in ["a", "ab", "ba", "abc", "abb", "cba", "aba"] {
        let z = word(z);
        let m = compile_atom(&z, &abc()).unwrap();
        let amp = 1.0 / (z.len() as f64 + 1.0).sqrt();
        for w in abc().words_up_to(5) {
            let t = m.run(&w).unwrap();
            for step in &t.steps[..t.steps.len() - 1] {
                for q in (0..m.n_states()).step_by(2) {
                    if m.kinds[q] == StateKind::NonHalting {
                        let x = step.state.vector[q].re;
                        assert!((-1e-12..=amp + 1e-12).contains(&x), "{z:?} {w:?} q{q}");
                    }
                }
            }
        }
    }
    // A repeated leading symbol drives q0 negative.
    let m = compile_atom(&word("aa"), &ab()).unwrap();
    let t = m.run(&word("aa")).unwrap();
    assert!(t.steps[1].state.vector[0].re < -0.1);
}
