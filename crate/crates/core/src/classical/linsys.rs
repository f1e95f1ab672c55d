use std::collections::{BTreeMap, VecDeque};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{CMatrix, CVector};
use crate::qfa::{Alphabet, MoQfa, Word, END_MARKER};

/// Largest imaginary part tolerated when a value is read as a real number.
pub const IMAG_TOL: f64 = 1e-9;

/// Weighted automaton over the complex field, read with row vectors:
/// `f(w) = initial · M_{w1} ⋯ M_{wk} · functional`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSystem {
    pub alphabet: Alphabet,
    pub initial: CVector,
    pub matrices: BTreeMap<char, CMatrix>,
    pub functional: CVector,
}

impl LinearSystem {
    pub fn new(
        alphabet: Alphabet,
        initial: CVector,
        matrices: BTreeMap<char, CMatrix>,
        functional: CVector,
    ) -> Result<Self> {
        let d = initial.dim();
        if functional.dim() != d {
            return Err(Error::DimensionMismatch {
                context: "linear system functional",
                left: d,
                right: functional.dim(),
            });
        }
        for &c in alphabet.symbols() {
            let m = matrices
                .get(&c)
                .ok_or_else(|| Error::Malformed(format!("no matrix for symbol {c:?}")))?;
            if m.rows() != d || m.cols() != d {
                return Err(Error::DimensionMismatch {
                    context: "linear system matrix",
                    left: d,
                    right: m.rows().max(m.cols()),
                });
            }
        }
        if let Some(c) = matrices.keys().find(|c| !alphabet.contains(**c)) {
            return Err(Error::Malformed(format!("matrix for symbol {c:?} outside the alphabet")));
        }
        Ok(LinearSystem {
            alphabet,
            initial,
            matrices,
            functional,
        })
    }

    pub fn dim(&self) -> usize {
        self.initial.dim()
    }

    pub fn state_after(&self, w: &[char]) -> Result<CVector> {
        self.alphabet.check_word(w)?;
        w.iter()
            .try_fold(self.initial.clone(), |v, c| self.matrices[c].vec_mat(&v))
    }

    pub fn evaluate_complex(&self, w: &[char]) -> Result<Complex64> {
        self.state_after(w)?.dot(&self.functional)
    }

    /// Value on `w`; fails if the imaginary part exceeds [`IMAG_TOL`].
    pub fn evaluate(&self, w: &[char]) -> Result<f64> {
        let z = self.evaluate_complex(w)?;
        if z.im.abs() > IMAG_TOL {
            return Err(Error::NonReal(z.im));
        }
        Ok(z.re)
    }

    /// System computing `self(w) - other(w)`.
    pub fn difference(&self, other: &LinearSystem) -> Result<LinearSystem> {
        if self.alphabet != other.alphabet {
            return Err(Error::Precondition("linear systems have different alphabets".into()));
        }
        let matrices = self
            .matrices
            .iter()
            .map(|(&c, m)| Ok((c, m.direct_sum(&other.matrices[&c])?)))
            .collect::<Result<_>>()?;
        LinearSystem::new(
            self.alphabet.clone(),
            self.initial.concat(&other.initial),
            matrices,
            self.functional.concat(&other.functional.scale(Complex64::new(-1.0, 0.0))),
        )
    }
}

/// Linear system of dimension `n²` whose value on `w` is the acceptance
/// probability of `w$`. States are `ψ ⊗ conj(ψ)`; symbol matrices are
/// `(U_σ ⊗ conj(U_σ))ᵀ` for the row convention.
pub fn bilinearize(m: &MoQfa) -> Result<LinearSystem> {
    let n = m.n_states();
    n.checked_mul(n)
        .ok_or(Error::DimensionOverflow("bilinearized dimension"))?;
    let doubled = |u: &CMatrix| u.tensor_product(&u.conj());
    let matrices = m
        .alphabet
        .symbols()
        .iter()
        .map(|&c| Ok((c, doubled(m.matrix(c)?)?.transpose())))
        .collect::<Result<BTreeMap<_, _>>>()?;
    let psi = &m.initial;
    let initial = psi.tensor_product(&psi.conj())?;
    let mut projector = vec![Complex64::new(0.0, 0.0); n * n];
    for &i in &m.accepting {
        projector[i * n + i] = Complex64::new(1.0, 0.0);
    }
    let end = doubled(m.matrix(END_MARKER)?)?;
    let functional = end.transpose().mat_vec(&CVector::new(projector)?)?;
    LinearSystem::new(m.alphabet.clone(), initial, matrices, functional)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceVerdict {
    pub equivalent: bool,
    /// Shortlex-least word on which the systems differ by more than the tolerance.
    pub separating_word: Option<Word>,
    /// Values of both systems on the separating word.
    pub values: Option<(f64, f64)>,
    /// Dimension of the reachable span that was explored.
    pub span_dim: usize,
}

/// Decides whether two systems agree on every word, up to `tol`.
///
/// Explores the reachable span of the difference system breadth-first in
/// shortlex order, keeping an orthonormal basis; a word is expanded only if
/// its state vector is independent of the basis found so far.
pub fn linsys_equiv(a: &LinearSystem, b: &LinearSystem, tol: f64) -> Result<EquivalenceVerdict> {
    let diff = a.difference(b)?;
    let dim = diff.dim();
    let independence = 1e-9;
    let separated = |w: &Word| -> Result<EquivalenceVerdict> {
        Ok(EquivalenceVerdict {
            equivalent: false,
            separating_word: Some(w.clone()),
            values: Some((a.evaluate(w)?, b.evaluate(w)?)),
            span_dim: 0,
        })
    };

    let mut basis: Vec<CVector> = Vec::new();
    let mut queue: VecDeque<(Word, CVector)> = VecDeque::new();
    let root: Word = Vec::new();
    if diff.initial.dot(&diff.functional)?.norm() > tol {
        return separated(&root);
    }
    if let Some(e) = residual(&basis, &diff.initial, independence) {
        basis.push(e);
        queue.push_back((root, diff.initial.clone()));
    }
    while let Some((w, v)) = queue.pop_front() {
        for &c in diff.alphabet.symbols() {
            let next = diff.matrices[&c].vec_mat(&v)?;
            let mut wc = w.clone();
            wc.push(c);
            if next.dot(&diff.functional)?.norm() > tol {
                return separated(&wc);
            }
            if basis.len() < dim {
                if let Some(e) = residual(&basis, &next, independence) {
                    basis.push(e);
                    queue.push_back((wc, next));
                }
            }
        }
    }
    Ok(EquivalenceVerdict {
        equivalent: true,
        separating_word: None,
        values: None,
        span_dim: basis.len(),
    })
}

/// Normalized component of `v` orthogonal to `basis`, if it is large enough
/// relative to `v`.
fn residual(basis: &[CVector], v: &CVector, threshold: f64) -> Option<CVector> {
    let scale = v.norm_sq().sqrt();
    if scale == 0.0 {
        return None;
    }
    let mut r = v.clone();
    // Two passes of Gram-Schmidt for stability.
    for _ in 0..2 {
        for e in basis {
            let coeff = e.inner(&r).expect("equal dimensions");
            r = r.sub(&e.scale(coeff)).expect("equal dimensions");
        }
    }
    let norm = r.norm_sq().sqrt();
    (norm > threshold * scale.max(1.0)).then(|| r.scale(Complex64::new(1.0 / norm, 0.0)))
}

/// Equivalence of two MO-QFAs over the same alphabet, via their bilinear systems.
pub fn moqfa_equiv(m1: &MoQfa, m2: &MoQfa, tol: f64) -> Result<EquivalenceVerdict> {
    linsys_equiv(&bilinearize(m1)?, &bilinearize(m2)?, tol)
}
