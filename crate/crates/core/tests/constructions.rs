mod common;

use std::collections::BTreeMap;

use common::{close, random_mmqfa, random_moqfa, random_unitary, random_word, rng};
use proptest::prelude::*;
use qfa::constructions::{
    accept_all, mm_complement, mm_complement_one_sided, mm_intersect, mm_inverse_hom, mm_power,
    mm_strip_left_endmarker, mm_tensor, mm_union, mo_strip_left_endmarker, word_quotient,
    Homomorphism, QuotientSide, TwoMarkerMm, TwoMarkerMo,
};
use qfa::gallery;
use qfa::numerics::{CMatrix, CVector};
use qfa::ptest::{compile_atom, subseq_oracle};
use qfa::qfa::{verify_certificate, word, Alphabet, MmQfa, StateKind, Word, END_MARKER};
use rand::Rng;

fn ab() -> Alphabet {
    Alphabet::parse("ab").unwrap()
}

fn atom(z: &str) -> MmQfa {
    compile_atom(&word(z), &ab()).unwrap()
}

fn sub(z: &str) -> impl Fn(&[char]) -> bool {
    let z = word(z);
    move |w: &[char]| subseq_oracle(&z, w)
}

fn assert_certified(m: &MmQfa, member: &dyn Fn(&[char]) -> bool, max_len: usize) {
    assert!(m.validate(1e-9).is_empty(), "{:?}", m.validate(1e-9));
    let cert = m.certificate.as_ref().expect("certificate attached");
    let report = verify_certificate(m, cert, member, max_len).unwrap();
    assert!(
        report.is_ok(),
        "{:?} {:?}",
        report.certificate_problems,
        report.violation.map(|v| v.to_string())
    );
}

fn probs_agree(a: &MmQfa, b: &MmQfa, max_len: usize) {
    for w in a.alphabet.words_up_to(max_len) {
        let (x, y) = (a.run(&w).unwrap(), b.run(&w).unwrap());
        assert!(close(x.p_acc(), y.p_acc(), 1e-9), "{w:?}");
        assert!(close(x.p_rej(), y.p_rej(), 1e-9), "{w:?}");
    }
}

#[test]
fn complement_swaps_outcomes() {
    let m = atom("a");
    let twice = mm_complement(&mm_complement(&m));
    assert_eq!(
        (&twice.transitions, &twice.kinds, &twice.initial, &twice.junk),
        (&m.transitions, &m.kinds, &m.initial, &m.junk)
    );
    let c = mm_complement(&m);
    assert!(close(c.accept_prob(&word("b")).unwrap(), 1.0, 1e-12));
    assert_certified(&c, &|w: &[char]| !subseq_oracle(&word("a"), w), 5);

    let mut r = rng(21);
    for _ in 0..10 {
        let m = random_mmqfa(&mut r, 4, &ab());
        let c = mm_complement(&m);
        for w in ab().words_up_to(5) {
            let (x, y) = (m.run(&w).unwrap(), c.run(&w).unwrap());
            assert!(close(x.p_acc(), y.p_rej(), 1e-12) && close(x.p_rej(), y.p_acc(), 1e-12));
        }
    }
}

#[test]
fn identity_homomorphism_changes_nothing() {
    let m = atom("ab");
    let h = Homomorphism::identity(&ab());
    let inv = mm_inverse_hom(&m, &h).unwrap();
    probs_agree(&m, &inv, 4);
}

#[test]
fn inverse_homomorphism_example() {
    let m = atom("ab");
    let n_non = m.kinds.iter().filter(|k| **k == StateKind::NonHalting).count();
    assert_eq!((m.n_states(), n_non), (7, 3));
    let h = Homomorphism::new(ab(), BTreeMap::from([('a', word("ab")), ('b', word(""))])).unwrap();
    let inv = mm_inverse_hom(&m, &h).unwrap();
    assert_eq!(inv.n_states(), 15);
    for w in ab().words_up_to(4) {
        let image = h.apply(&w).unwrap();
        let (x, y) = (inv.run(&w).unwrap(), m.run(&image).unwrap());
        assert!(close(x.p_acc(), y.p_acc(), 1e-9) && close(x.p_rej(), y.p_rej(), 1e-9));
    }
    assert_certified(&inv, &|w: &[char]| subseq_oracle(&word("ab"), &h.apply(w).unwrap()), 5);
}

#[test]
fn homomorphism_images_must_use_target_alphabet() {
    let m = atom("ab");
    let h = Homomorphism::new(ab(), BTreeMap::from([('a', word("c")), ('b', word(""))])).unwrap();
    assert!(mm_inverse_hom(&m, &h).is_err());
}

fn random_hom(r: &mut impl Rng) -> Homomorphism {
    let images = ab()
        .symbols()
        .iter()
        .map(|&c| (c, random_word(r, &ab(), 2)))
        .collect();
    Homomorphism::new(ab(), images).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn inverse_homomorphism_law(seed in any::<u64>(), z in "[ab]{1,2}") {
        let mut r = rng(seed);
        let m = atom(&z);
        let h = random_hom(&mut r);
        let inv = mm_inverse_hom(&m, &h).unwrap();
        prop_assert!(inv.validate(1e-9).is_empty());
        for w in ab().words_up_to(4) {
            let lhs = inv.accept_prob(&w).unwrap();
            let rhs = m.accept_prob(&h.apply(&w).unwrap()).unwrap();
            prop_assert!(close(lhs, rhs, 1e-9));
        }
    }

    #[test]
    fn tensor_multiplies_probabilities(z1 in "[ab]{1,2}", z2 in "[ab]{1,2}") {
        let (m1, m2) = (atom(&z1), atom(&z2));
        let t = mm_tensor(&m1, &m2).unwrap();
        for w in ab().words_up_to(4) {
            let p = m1.accept_prob(&w).unwrap() * m2.accept_prob(&w).unwrap();
            prop_assert!(close(t.accept_prob(&w).unwrap(), p, 1e-9));
        }
    }
}

#[test]
fn mo_strip_with_identity_cent() {
    let mut r = rng(2);
    let m = random_moqfa(&mut r, 3, &ab());
    let two = TwoMarkerMo::new(m.clone(), CMatrix::identity(3)).unwrap();
    let stripped = mo_strip_left_endmarker(&two).unwrap();
    for w in ab().words_up_to(4) {
        assert!(close(stripped.accept_prob(&w).unwrap(), m.accept_prob(&w).unwrap(), 1e-12));
    }
}

#[test]
fn mo_strip_agrees_with_two_marker_simulation() {
    let mut r = rng(4);
    for _ in 0..5 {
        let m = random_moqfa(&mut r, 3, &ab());
        let cent = gallery::givens(3, 0, 2, r.gen_range(0.0..6.0));
        let two = TwoMarkerMo::new(m.clone(), cent.clone()).unwrap();
        let stripped = mo_strip_left_endmarker(&two).unwrap();
        for w in ab().words_up_to(5) {
            // Direct evaluation of U(¢ w $).
            let mut v = cent.mat_vec(&m.initial).unwrap();
            for c in w.iter().copied().chain([END_MARKER]) {
                v = m.transitions[&c].mat_vec(&v).unwrap();
            }
            let direct = v.weight_on(m.accepting.iter().copied());
            assert!(close(stripped.accept_prob(&w).unwrap(), direct, 1e-9));
        }
        // U'(x$) = U(¢x$) as matrices.
        let x = random_word(&mut r, &ab(), 3);
        let product = |t: &BTreeMap<char, CMatrix>, syms: &[char]| {
            syms.iter().fold(CMatrix::identity(3), |acc, c| t[c].mat_mul(&acc).unwrap())
        };
        let mut with_end = x.clone();
        with_end.push(END_MARKER);
        let lhs = product(&stripped.transitions, &with_end);
        let rhs = product(&m.transitions, &with_end).mat_mul(&cent).unwrap();
        assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
    }
}

#[test]
fn mm_strip_identity_cent_and_state_count() {
    let mut r = rng(8);
    let mut m = random_mmqfa(&mut r, 5, &ab());
    m.kinds = vec![
        StateKind::NonHalting,
        StateKind::Accepting,
        StateKind::NonHalting,
        StateKind::Rejecting,
        StateKind::NonHalting,
    ];
    m.initial.vector = CVector::from_real(&[0.6, 0.0, 0.0, 0.0, 0.8]).unwrap();
    m.initial.p_acc = 0.0;
    m.initial.p_rej = 0.0;
    let two = TwoMarkerMm::new(m.clone(), CMatrix::identity(5)).unwrap();
    let stripped = mm_strip_left_endmarker(&two).unwrap();
    assert_eq!(stripped.n_states(), 7);
    assert!(stripped.validate(1e-9).is_empty());
    probs_agree(&m, &stripped, 4);
}

#[test]
fn mm_strip_demo_pair() {
    let demo = gallery::endmark_demo();
    let stripped = mm_strip_left_endmarker(&demo).unwrap();
    for w in ab().words_up_to(5) {
        let a = demo.run(&w).unwrap();
        let t = stripped.run(&w).unwrap();
        assert!(close(a.p_acc, t.p_acc(), 1e-9) && close(a.p_rej, t.p_rej(), 1e-9), "{w:?}");
        for step in &t.steps {
            assert!(close(step.state.total(), 1.0, 1e-9));
        }
    }
}

#[test]
fn quotients() {
    let m = atom("ab");
    for side in [QuotientSide::Left, QuotientSide::Right] {
        probs_agree(&m, &word_quotient(&m, &[], side).unwrap(), 4);
    }
    let left = word_quotient(&m, &word("a"), QuotientSide::Left).unwrap();
    assert!(close(
        left.accept_prob(&word("b")).unwrap(),
        m.accept_prob(&word("ab")).unwrap(),
        1e-12
    ));
    let right = word_quotient(&m, &word("b"), QuotientSide::Right).unwrap();
    assert!(close(
        right.accept_prob(&word("a")).unwrap(),
        m.accept_prob(&word("ab")).unwrap(),
        1e-12
    ));
    let u = word("ba");
    let left = word_quotient(&m, &u, QuotientSide::Left).unwrap();
    let right = word_quotient(&m, &u, QuotientSide::Right).unwrap();
    for w in ab().words_up_to(4) {
        let uw: Word = u.iter().chain(&w).copied().collect();
        let wu: Word = w.iter().chain(&u).copied().collect();
        assert!(close(left.accept_prob(&w).unwrap(), m.accept_prob(&uw).unwrap(), 1e-9));
        assert!(close(right.accept_prob(&w).unwrap(), m.accept_prob(&wu).unwrap(), 1e-9));
    }
    let z = word("ab");
    assert_certified(&left, &|w: &[char]| subseq_oracle(&z, &[&u[..], w].concat()), 5);
    assert_certified(&right, &|w: &[char]| subseq_oracle(&z, &[w, &u[..]].concat()), 5);
}

#[test]
fn tensor_examples() {
    let (a, b) = (atom("a"), atom("b"));
    let t = mm_tensor(&a, &b).unwrap();
    let w = word("ab");
    let product = a.accept_prob(&w).unwrap() * b.accept_prob(&w).unwrap();
    assert!(close(t.accept_prob(&w).unwrap(), product, 1e-9));
    let (ca, cb) = (a.certificate.unwrap(), b.certificate.unwrap());
    let floor = (ca.cut_point + ca.margin) * (cb.cut_point + cb.margin);
    for w in ab().words_up_to(4) {
        if subseq_oracle(&word("a"), &w) && subseq_oracle(&word("b"), &w) {
            assert!(t.accept_prob(&w).unwrap() >= floor - 1e-12);
        }
    }
    assert_certified(&t, &|w: &[char]| sub("a")(w) && sub("b")(w), 5);
    probs_agree(&a, &mm_tensor(&a, &accept_all(&ab())).unwrap(), 4);
}

#[test]
fn tensor_refuses_non_end_decisive_input() {
    let mut r = rng(1);
    let m = random_mmqfa(&mut r, 3, &ab());
    let mut accepting_early = m.clone();
    accepting_early.kinds = vec![StateKind::NonHalting, StateKind::Accepting, StateKind::Rejecting];
    accepting_early.transitions.insert('a', random_unitary(&mut r, 3));
    accepting_early.initial.vector = CVector::basis(3, 0).unwrap();
    accepting_early.initial.p_acc = 0.0;
    accepting_early.initial.p_rej = 0.0;
    assert!(mm_tensor(&accepting_early, &atom("a")).is_err());
}

#[test]
fn powers() {
    let m = atom("a");
    probs_agree(&m, &mm_power(&m, 1).unwrap(), 4);
    let sq = mm_power(&m, 2).unwrap();
    assert_eq!(sq.n_states(), m.n_states().pow(2));
    assert_eq!(mm_power(&m, 3).unwrap().n_states(), m.n_states().pow(3));
    let p = m.accept_prob(&word("a")).unwrap();
    assert!(close(sq.accept_prob(&word("a")).unwrap(), p * p, 1e-12));
    assert!(mm_power(&m, 0).is_err());
    assert_certified(&sq, &sub("a"), 5);
}

#[test]
fn unions() {
    let (a, b) = (atom("a"), atom("b"));
    probs_agree(&a, &mm_union(&a, &a, Some((1, 1))).unwrap(), 4);
    let u = mm_union(&a, &b, Some((1, 1))).unwrap();
    assert_eq!(u.accept_prob(&[]).unwrap(), 0.0);
    assert!(close(
        u.accept_prob(&word("a")).unwrap(),
        0.5 * a.accept_prob(&word("a")).unwrap(),
        1e-12
    ));
    let (ca, cb) = (a.certificate.unwrap(), b.certificate.unwrap());
    let both = 0.5 * ((ca.cut_point + ca.margin) + (cb.cut_point + cb.margin));
    for w in ab().words_up_to(4) {
        if sub("a")(&w) && sub("b")(&w) {
            assert!(u.accept_prob(&w).unwrap() >= both - 1e-12);
        }
    }
    assert_certified(&u, &|w: &[char]| sub("a")(w) || sub("b")(w), 5);
    let auto = mm_union(&a, &atom("ab"), None).unwrap();
    assert_certified(&auto, &|w: &[char]| sub("a")(w) || sub("ab")(w), 5);
}

#[test]
fn one_sided_complement() {
    let m = atom("a");
    let c = mm_complement_one_sided(&m).unwrap();
    assert_certified(&c, &|w: &[char]| !sub("a")(w), 5);
    let p = |w: &str| c.accept_prob(&word(w)).unwrap();
    let worst_member = p("b").min(p("bb"));
    for w in ["a", "ab", "ba"] {
        assert!(p(w) < worst_member);
    }
    // One accepting state: reservoir c = 1/√2 against old amplitude c·√p.
    for w in ab().words_up_to(5) {
        let beta = m.accept_prob(&w).unwrap().sqrt();
        let expected = 0.5 * (1.0 - beta).powi(2) / 2.0;
        assert!(close(c.accept_prob(&w).unwrap(), expected, 1e-12), "{w:?}");
        if !sub("a")(&w) {
            // Every new accepting state receives exactly c/√2.
            assert!(close(c.accept_prob(&w).unwrap(), 0.25, 1e-12));
        }
    }
    assert!(mm_complement_one_sided(&c).is_err());
}

#[test]
fn intersections() {
    let not_b = mm_complement_one_sided(&atom("b")).unwrap();
    let a = atom("a");
    let i = mm_intersect(&not_b, &a, None).unwrap();
    let cert = i.certificate.unwrap();
    let member = |w: &[char]| sub("a")(w) && !sub("b")(w);
    assert!(i.accept_prob(&word("a")).unwrap() > cert.cut_point);
    assert!(i.accept_prob(&word("ab")).unwrap() < cert.cut_point);
    assert!(i.accept_prob(&word("b")).unwrap().abs() < 1e-12);
    for w in ab().words_up_to(4) {
        let p = i.accept_prob(&w).unwrap();
        assert_eq!(p > cert.cut_point, member(&w), "{w:?}");
        if !sub("a")(&w) {
            assert!(p.abs() < 1e-12);
        }
    }
    assert_certified(&i, &member, 5);
    // Two one-sided inputs need no amplification.
    let both = mm_intersect(&atom("a"), &atom("b"), None).unwrap();
    assert_eq!(both.n_states(), atom("a").n_states() * atom("b").n_states());
}
