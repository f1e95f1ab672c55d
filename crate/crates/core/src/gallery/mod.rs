//! Ready-made automata used in examples, tests, and the command line.

use std::collections::{BTreeMap, BTreeSet};

use crate::classical::Dfa;
use crate::constructions::TwoMarkerMm;
use crate::error::{Error, Result};
use crate::numerics::{CMatrix, CVector};
use crate::qfa::{Alphabet, MmQfa, MmState, MoQfa, StateKind, END_MARKER};

/// Rotation automaton over `{a, b}`: `a` rotates the plane by the angle with
/// the given cosine and sine, `b` rotates back, and `$` does nothing. Starts
/// in `q0` and accepts in `q1`, so `p(w) = sin²((|w|_a - |w|_b) α)`.
pub fn rotation_with(cos: f64, sin: f64) -> Result<MoQfa> {
    if ((cos * cos + sin * sin) - 1.0).abs() > 1e-12 {
        return Err(Error::Precondition(format!(
            "cos² + sin² = {} is not 1",
            cos * cos + sin * sin
        )));
    }
    let u = CMatrix::from_real_rows(&[[cos, sin], [-sin, cos]])?;
    let transitions = BTreeMap::from([
        ('b', u.transpose()),
        ('a', u),
        (END_MARKER, CMatrix::identity(2)),
    ]);
    MoQfa::new(
        Alphabet::parse("ab")?,
        transitions,
        CVector::basis(2, 0)?,
        BTreeSet::from([1]),
    )
}

/// The rotation automaton with `cos α = 3/5`. Since `α/π` is irrational,
/// `p(w) > 0` exactly when `|w|_a ≠ |w|_b`.
pub fn rotation() -> MoQfa {
    rotation_with(0.6, 0.8).expect("valid rotation")
}

/// Word problem of the free group on two generators.
///
/// `a` and `b` rotate three-space by `arccos(3/5)` about the z- and x-axes;
/// `A` and `B` are their inverses. These two rotations generate a free group
/// (Świerczkowski, 1958), so the start vector `e1`, which lies on neither
/// axis, returns to itself with certainty on words that reduce to the
/// identity. Other words are accepted with probability below one, without a
/// uniform gap.
pub fn free_group() -> MoQfa {
    let (c, s) = (0.6, 0.8);
    let a = CMatrix::from_real_rows(&[[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        .expect("rational rotation");
    let b = CMatrix::from_real_rows(&[[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
        .expect("rational rotation");
    let transitions = BTreeMap::from([
        ('A', a.transpose()),
        ('B', b.transpose()),
        ('a', a),
        ('b', b),
        (END_MARKER, CMatrix::identity(3)),
    ]);
    MoQfa::new(
        Alphabet::parse("abAB").expect("valid alphabet"),
        transitions,
        CVector::basis(3, 1).expect("in range"),
        BTreeSet::from([1]),
    )
    .expect("well-formed automaton")
}

/// Group DFA accepting words whose number of `symbol`s is `residue` mod `modulus`.
pub fn count_mod(alphabet: &Alphabet, symbol: char, modulus: usize, residue: usize) -> Result<Dfa> {
    let i = alphabet.index_of(symbol).ok_or(Error::UnknownSymbol(symbol))?;
    if modulus == 0 || residue >= modulus {
        return Err(Error::Precondition(format!(
            "residue {residue} must lie in 0..{modulus}"
        )));
    }
    let delta = (0..modulus)
        .map(|q| {
            (0..alphabet.len())
                .map(|j| if j == i { (q + 1) % modulus } else { q })
                .collect()
        })
        .collect();
    Dfa::new(alphabet.clone(), delta, 0, BTreeSet::from([residue]))
}

/// Words over `{a, b}` with an even number of `a`s.
pub fn parity_dfa() -> Dfa {
    count_mod(&Alphabet::parse("ab").expect("valid alphabet"), 'a', 2, 0).expect("valid counter")
}

/// [`parity_dfa`] compiled to an MO-QFA.
pub fn parity() -> MoQfa {
    parity_dfa().to_moqfa().expect("parity is a group language")
}

/// Minimal DFA of `{a, b}*b`.
pub fn ends_with_b() -> Dfa {
    Dfa::new(
        Alphabet::parse("ab").expect("valid alphabet"),
        vec![vec![0, 1], vec![0, 1]],
        0,
        BTreeSet::from([1]),
    )
    .expect("valid DFA")
}

/// Rotation by `theta` in the plane of basis vectors `i` and `j`.
pub fn givens(n: usize, i: usize, j: usize, theta: f64) -> CMatrix {
    let (c, s) = (theta.cos(), theta.sin());
    CMatrix::from_fn(n, n, |r, k| {
        let x = match (r, k) {
            _ if (r, k) == (i, i) || (r, k) == (j, j) => c,
            _ if (r, k) == (i, j) => -s,
            _ if (r, k) == (j, i) => s,
            _ if r == k => 1.0,
            _ => 0.0,
        };
        x.into()
    })
}

/// Two-marker MM-QFA over `{a, b}` with states `q0`, `q1` non-halting, `q2`
/// accepting and `q3` rejecting. The `¢` matrix already leaks amplitude into
/// the rejecting state.
pub fn endmark_demo() -> TwoMarkerMm {
    let g = |i, j, t| givens(4, i, j, t);
    let mul = |x: CMatrix, y: CMatrix| x.mat_mul(&y).expect("square 4x4");
    let transitions = BTreeMap::from([
        ('a', mul(g(1, 2, 0.5), g(0, 1, 0.7))),
        ('b', mul(g(0, 3, 0.4), g(0, 1, -0.9))),
        (END_MARKER, mul(g(0, 2, 1.0), g(1, 3, 0.6))),
    ]);
    let kinds = vec![
        StateKind::NonHalting,
        StateKind::NonHalting,
        StateKind::Accepting,
        StateKind::Rejecting,
    ];
    let automaton = MmQfa::new(
        Alphabet::parse("ab").expect("valid alphabet"),
        transitions,
        kinds,
        MmState::new(CVector::basis(4, 0).expect("in range"), 0.0, 0.0),
        BTreeSet::new(),
    )
    .expect("well-formed automaton");
    let cent = mul(g(0, 1, std::f64::consts::FRAC_PI_4), g(0, 3, 0.3));
    TwoMarkerMm::new(automaton, cent).expect("unitary cent matrix")
}
