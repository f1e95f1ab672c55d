mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{
    close, dense_mm_run, permuted_moqfa, random_kinds, random_mmqfa, random_moqfa,
    random_unitary, random_word, rng,
};
use num_complex::Complex64;
use proptest::prelude::*;
use qfa::gallery;
use qfa::numerics::{CMatrix, CVector};
use qfa::ptest::{compile_atom, subseq_oracle, trigger_lower_bound};
use qfa::qfa::{
    mm_step, verify_certificate, word, AcceptanceCertificate, Alphabet, Bounds, CertificateFlags,
    DiagnosticKind, MmQfa, MmState, MoQfa, StateKind, ViolationKind, END_MARKER,
};
use rand::Rng;

fn ab() -> Alphabet {
    Alphabet::parse("ab").unwrap()
}

#[test]
fn rotation_examples() {
    let m = gallery::rotation();
    assert!(m.accept_prob(&word("ab")).unwrap() < 1e-15);
    // One rotation moves amplitude sin α = 4/5 onto q1.
    assert!(close(m.accept_prob(&word("a")).unwrap(), 16.0 / 25.0, 1e-12));
    assert_eq!(m.accept_prob(&word("")).unwrap(), 0.0);
    assert!(m.accept_prob(&word("ac")).is_err());
    assert!(m.validate(1e-9).is_empty());
}

#[test]
fn permuting_states_preserves_probabilities() {
    let mut r = rng(7);
    for n in 1..5 {
        let m = random_moqfa(&mut r, n, &ab());
        let p = permuted_moqfa(&mut r, &m);
        for w in ab().words_up_to(4) {
            assert!(close(m.accept_prob(&w).unwrap(), p.accept_prob(&w).unwrap(), 1e-12));
        }
    }
}

#[test]
fn identity_step_on_non_halting_support() {
    let kinds = vec![StateKind::NonHalting, StateKind::Accepting, StateKind::NonHalting];
    let v = CVector::from_real(&[0.6, 0.0, 0.0]).unwrap();
    let s = MmState::new(v, 0.5, 0.14);
    assert_eq!(mm_step(&s, &CMatrix::identity(3), &kinds).unwrap(), s);
}

#[test]
fn first_trigger_moves_a_third_into_junk() {
    let m = compile_atom(&word("ab"), &ab()).unwrap();
    let amp = 1.0 / 3f64.sqrt();
    for q in [0, 2, 4] {
        assert!(close(m.initial.vector[q].re, amp, 1e-15));
    }
    let after = mm_step(&m.initial, m.matrix('a').unwrap(), &m.kinds).unwrap();
    assert!(close(after.p_rej, 1.0 / 3.0, 1e-12));
    assert_eq!(after.p_acc, 0.0);
    assert!(close(after.vector.norm_sq(), 2.0 / 3.0, 1e-12));
}

#[test]
fn random_steps_conserve_probability() {
    let mut r = rng(11);
    for _ in 0..1000 {
        let n = r.gen_range(1..7);
        let kinds = random_kinds(&mut r, n);
        let u = random_unitary(&mut r, n);
        let m = random_mmqfa(&mut r, n, &ab());
        let mut v = m.initial.vector.clone();
        // Move the support onto the non-halting states of `kinds`.
        let mut entries = v.as_slice().to_vec();
        for (q, k) in kinds.iter().enumerate() {
            if k.is_halting() {
                entries[q] = Complex64::new(0.0, 0.0);
            }
        }
        let norm = entries.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if norm == 0.0 {
            continue;
        }
        v = CVector::new(entries).unwrap();
        let s = MmState::new(v, 0.2, 1.0 - 0.2 - norm);
        let next = mm_step(&s, &u, &kinds).unwrap();
        assert!(close(next.total(), s.total(), 1e-9));
    }
}

#[test]
fn all_non_halting_automaton_never_halts() {
    let mut r = rng(3);
    let n = 3;
    let transitions = ab()
        .with_end_marker()
        .map(|c| (c, random_unitary(&mut r, n)))
        .collect();
    let m = MmQfa::new(
        ab(),
        transitions,
        vec![StateKind::NonHalting; n],
        MmState::new(CVector::basis(n, 0).unwrap(), 0.0, 0.0),
        BTreeSet::new(),
    )
    .unwrap();
    for w in ab().words_up_to(4) {
        let t = m.run(&w).unwrap();
        assert_eq!((t.p_acc(), t.p_rej()), (0.0, 0.0));
        assert!(close(t.leftover(), 1.0, 1e-12));
    }
}

#[test]
fn identity_automaton_keeps_everything() {
    let transitions = ab()
        .with_end_marker()
        .map(|c| (c, CMatrix::identity(3)))
        .collect();
    let m = MmQfa::new(
        ab(),
        transitions,
        vec![StateKind::NonHalting, StateKind::Accepting, StateKind::Rejecting],
        MmState::new(CVector::basis(3, 0).unwrap(), 0.0, 0.0),
        BTreeSet::new(),
    )
    .unwrap();
    for w in ab().words_up_to(3) {
        assert_eq!(m.accept_prob(&w).unwrap(), 0.0);
    }
}

#[test]
fn trigger_ab_examples() {
    let m = compile_atom(&word("ab"), &ab()).unwrap();
    let t = m.run(&word("ab")).unwrap();
    assert!(t.p_acc() >= 1.0 / 96.0);
    assert!(close(t.p_rej(), 1.0 - t.p_acc(), 1e-9));
    assert!(m.accept_prob(&word("ba")).unwrap().abs() < 1e-9);
}

#[test]
fn sparse_simulation_matches_dense_reference() {
    let mut r = rng(5);
    for _ in 0..40 {
        let n = r.gen_range(1..6);
        let m = random_mmqfa(&mut r, n, &ab());
        for _ in 0..10 {
            let w = random_word(&mut r, &ab(), 6);
            let t = m.run(&w).unwrap();
            let (acc, rej) = dense_mm_run(&m, &w);
            assert!(close(t.p_acc(), acc, 1e-12) && close(t.p_rej(), rej, 1e-12));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn traces_conserve_probability(seed in any::<u64>(), n in 1usize..7, len in 0usize..9) {
        let mut r = rng(seed);
        let m = random_mmqfa(&mut r, n, &ab());
        let w = random_word(&mut r, &ab(), len);
        let t = m.run(&w).unwrap();
        prop_assert!(close(t.initial.total(), 1.0, 1e-9));
        for step in &t.steps {
            prop_assert!(close(step.state.total(), 1.0, 1e-9));
        }
    }

    #[test]
    fn simulation_is_deterministic(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = random_mmqfa(&mut r, 4, &ab());
        let w = random_word(&mut r, &ab(), 6);
        let a = m.run(&w).unwrap();
        let b = m.run(&w).unwrap();
        prop_assert_eq!(a.p_acc().to_bits(), b.p_acc().to_bits());
        prop_assert_eq!(a, b);
    }
}

#[test]
fn validate_reports_non_unitary_symbol() {
    let mut m = gallery::rotation();
    m.transitions.insert('a', CMatrix::from_real_rows(&[[1.0, 0.0], [0.0, 2.0]]).unwrap());
    let d = m.validate(1e-9);
    assert_eq!(d.len(), 1);
    assert_eq!(d[0].kind, DiagnosticKind::Unitarity);
    assert!(d[0].message.contains("'a'"), "{}", d[0]);
}

#[test]
fn validate_reports_initial_support_on_accepting_state() {
    let transitions = ab()
        .with_end_marker()
        .map(|c| (c, CMatrix::identity(2)))
        .collect();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let m = MmQfa::new(
        ab(),
        transitions,
        vec![StateKind::NonHalting, StateKind::Accepting],
        MmState::new(CVector::from_real(&[h, h]).unwrap(), 0.0, 0.0),
        BTreeSet::new(),
    )
    .unwrap();
    let d = m.validate(1e-9);
    assert!(d.iter().any(|x| x.kind == DiagnosticKind::Support), "{d:?}");
}

#[test]
fn validate_reports_bad_mo_norm() {
    let m = MoQfa::new(
        ab(),
        ab().with_end_marker().map(|c| (c, CMatrix::identity(2))).collect(),
        CVector::from_real(&[1.0, 1.0]).unwrap(),
        BTreeSet::new(),
    )
    .unwrap();
    assert!(m.validate(1e-9).iter().any(|d| d.kind == DiagnosticKind::Norm));
}

#[test]
fn certificate_of_single_atom_verifies() {
    let m = compile_atom(&word("a"), &ab()).unwrap();
    let cert = m.certificate.unwrap();
    let member = |w: &[char]| subseq_oracle(&word("a"), w);
    let report = verify_certificate(&m, &cert, &member, 6).unwrap();
    assert!(report.is_ok(), "{:?}", report.violation);
    assert_eq!(report.words_checked, 127);

    let mut doubled = cert;
    doubled.margin *= 2.0;
    let report = verify_certificate(&m, &doubled, &member, 6).unwrap();
    let v = report.violation.expect("doubled margin must fail");
    assert!(matches!(
        v.kind,
        ViolationKind::MemberBelowBound { .. } | ViolationKind::NonMemberAboveBound { .. }
    ));
}

#[test]
fn end_decisive_flag_on_mid_word_acceptor() {
    // 'a' sends everything into the accepting state.
    let swap = CMatrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
    let transitions = BTreeMap::from([
        ('a', swap.clone()),
        ('b', CMatrix::identity(2)),
        (END_MARKER, swap),
    ]);
    let m = MmQfa::new(
        ab(),
        transitions,
        vec![StateKind::NonHalting, StateKind::Accepting],
        MmState::new(CVector::basis(2, 0).unwrap(), 0.0, 0.0),
        BTreeSet::new(),
    )
    .unwrap();
    let cert = AcceptanceCertificate::from_envelope(
        Bounds::point(1.0),
        Bounds::point(0.0),
        CertificateFlags {
            end_decisive: true,
            ..CertificateFlags::default()
        },
    )
    .unwrap();
    let report = verify_certificate(&m, &cert, &|_: &[char]| true, 2).unwrap();
    let v = report.violation.unwrap();
    assert_eq!(v.word, word("a"));
    assert_eq!(v.kind, ViolationKind::EarlyAcceptance { step: 1 });
}

#[test]
fn trigger_bound_for_short_atoms() {
    for z in ab().words_up_to(3).into_iter().filter(|z| !z.is_empty()) {
        let m = compile_atom(&z, &ab()).unwrap();
        let bound = trigger_lower_bound(z.len() - 1);
        for w in ab().words_up_to(6) {
            let p = m.accept_prob(&w).unwrap();
            if subseq_oracle(&z, &w) {
                assert!(p >= bound, "{z:?} {w:?}: {p} < {bound}");
            } else {
                assert!(p.abs() < 1e-9);
            }
        }
    }
}
