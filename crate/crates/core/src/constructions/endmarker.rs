use std::collections::BTreeMap;

use crate::constructions::check_state_count;
use crate::error::{Error, Result};
use crate::numerics::{CMatrix, CVector, DEFAULT_TOL, ZERO};
use crate::qfa::{MmQfa, MmState, MoQfa, StateKind, END_MARKER};

fn check_cent(cent: &CMatrix, n: usize) -> Result<()> {
    if cent.rows() != n || cent.cols() != n {
        return Err(Error::DimensionMismatch {
            context: "left end-marker matrix",
            left: cent.rows(),
            right: n,
        });
    }
    let (dev, _, _) = cent.unitarity_defect()?;
    if dev > DEFAULT_TOL {
        return Err(Error::NotUnitary {
            tol: DEFAULT_TOL,
            deviation: dev,
        });
    }
    Ok(())
}

/// An MO-QFA that reads a left end-marker `¢` before its input.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoMarkerMo {
    pub automaton: MoQfa,
    pub cent: CMatrix,
}

impl TwoMarkerMo {
    pub fn new(automaton: MoQfa, cent: CMatrix) -> Result<Self> {
        check_cent(&cent, automaton.n_states())?;
        Ok(TwoMarkerMo { automaton, cent })
    }

    /// Acceptance probability of `¢ w $`.
    pub fn accept_prob(&self, w: &[char]) -> Result<f64> {
        let m = &self.automaton;
        m.alphabet.check_word(w)?;
        let mut v = self.cent.mat_vec(&m.initial)?;
        for &c in w.iter().chain(std::iter::once(&END_MARKER)) {
            v = m.matrix(c)?.mat_vec(&v)?;
        }
        Ok(v.weight_on(m.accepting.iter().copied()))
    }
}

/// One-marker MO-QFA equivalent to `two`: `U'_σ = U_¢⁻¹ U_σ U_¢`, `U'_$ = U_$ U_¢`.
pub fn mo_strip_left_endmarker(two: &TwoMarkerMo) -> Result<MoQfa> {
    let m = &two.automaton;
    let cent = &two.cent;
    let cent_inv = cent.conjugate_transpose();
    let mut transitions = BTreeMap::new();
    for (&c, u) in &m.transitions {
        let t = if c == END_MARKER {
            u.mat_mul(cent)?
        } else {
            cent_inv.mat_mul(&u.mat_mul(cent)?)?
        };
        transitions.insert(c, t);
    }
    MoQfa::new(
        m.alphabet.clone(),
        transitions,
        m.initial.clone(),
        m.accepting.clone(),
    )
}

/// An MM-QFA that reads a left end-marker `¢` before its input; the
/// `¢` step is measured like any other.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoMarkerMm {
    pub automaton: MmQfa,
    pub cent: CMatrix,
}

impl TwoMarkerMm {
    pub fn new(automaton: MmQfa, cent: CMatrix) -> Result<Self> {
        check_cent(&cent, automaton.n_states())?;
        Ok(TwoMarkerMm { automaton, cent })
    }

    /// The triple after reading `¢`.
    pub fn after_cent(&self) -> Result<MmState> {
        crate::qfa::mm_step(&self.automaton.initial, &self.cent, &self.automaton.kinds)
    }

    /// Final triple `(p_acc, p_rej, leftover)` on `¢ w $`.
    pub fn run(&self, w: &[char]) -> Result<MmState> {
        let start = self.after_cent()?;
        let trace = self.automaton.run_from(&start, w, true)?;
        Ok(trace.final_state().clone())
    }

    pub fn accept_prob(&self, w: &[char]) -> Result<f64> {
        Ok(self.run(w)?.p_acc)
    }
}

/// One-marker MM-QFA equivalent to `two`.
///
/// Old halting states become non-halting; each gains a halting copy with its
/// label, and a sweep `S` moves freshly halted mass into the copies before the
/// `¢`-conjugation can mix it back.
pub fn mm_strip_left_endmarker(two: &TwoMarkerMm) -> Result<MmQfa> {
    let m = &two.automaton;
    let n = m.n_states();
    let halting = m.halting_states();
    let h = halting.len();
    let total = n + h;
    check_state_count(total)?;

    let mut perm: Vec<usize> = (0..total).collect();
    for (k, &q) in halting.iter().enumerate() {
        perm[q] = n + k;
        perm[n + k] = q;
    }
    let sweep = CMatrix::permutation(&perm)?;
    let pad = CMatrix::identity(h);
    let grow = |u: &CMatrix| -> Result<CMatrix> {
        if h == 0 {
            Ok(u.clone())
        } else {
            u.direct_sum(&pad)
        }
    };
    let cent = grow(&two.cent)?;
    let cent_inv = grow(&two.cent.conjugate_transpose())?;

    let mut transitions = BTreeMap::new();
    for (&c, u) in &m.transitions {
        let core = sweep.mat_mul(&grow(u)?)?.mat_mul(&cent)?;
        let t = if c == END_MARKER {
            core
        } else {
            cent_inv.mat_mul(&core)?
        };
        transitions.insert(c, t);
    }

    let mut kinds = vec![StateKind::NonHalting; n];
    let mut junk = std::collections::BTreeSet::new();
    for (k, &q) in halting.iter().enumerate() {
        kinds.push(m.kinds[q]);
        if m.junk.contains(&q) {
            junk.insert(n + k);
        }
    }

    let after = two.after_cent()?;
    let pulled_back = two.cent.conjugate_transpose().mat_vec(&after.vector)?;
    let mut vector = pulled_back.into_vec();
    vector.resize(total, ZERO);
    let initial = MmState::new(CVector::new(vector)?, after.p_acc, after.p_rej);

    let mut out = MmQfa::new(m.alphabet.clone(), transitions, kinds, initial, junk)?;
    out.certificate = m.certificate;
    Ok(out)
}
