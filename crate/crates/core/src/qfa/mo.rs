use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::numerics::{CMatrix, CVector};
use crate::qfa::diagnostic::{shape_error, transition_diagnostics, Diagnostic, DiagnosticKind};
use crate::qfa::words::{Alphabet, END_MARKER};

/// A measure-once quantum finite automaton.
///
/// `transitions` holds one matrix per alphabet symbol plus one for the
/// end-marker. Acceptance probability of `w` is the squared norm of the
/// accepting part of `U_$ U_{w_k} … U_{w_1} ψ₀`.
#[derive(Clone, Debug, PartialEq)]
pub struct MoQfa {
    pub alphabet: Alphabet,
    pub transitions: BTreeMap<char, CMatrix>,
    pub initial: CVector,
    pub accepting: BTreeSet<usize>,
}

impl MoQfa {
    pub fn new(
        alphabet: Alphabet,
        transitions: BTreeMap<char, CMatrix>,
        initial: CVector,
        accepting: BTreeSet<usize>,
    ) -> Result<Self> {
        let m = MoQfa {
            alphabet,
            transitions,
            initial,
            accepting,
        };
        m.check_shape()?;
        Ok(m)
    }

    fn check_shape(&self) -> Result<()> {
        let n = self.n_states();
        if let Some(msg) = shape_error(&self.alphabet, &self.transitions, n) {
            return Err(Error::Malformed(msg));
        }
        if let Some(&q) = self.accepting.iter().find(|&&q| q >= n) {
            return Err(Error::IndexOutOfRange { index: q, dim: n });
        }
        Ok(())
    }

    pub fn n_states(&self) -> usize {
        self.initial.dim()
    }

    pub fn matrix(&self, sym: char) -> Result<&CMatrix> {
        self.transitions.get(&sym).ok_or(Error::UnknownSymbol(sym))
    }

    /// The state after reading `w` and the end-marker, before measurement.
    pub fn final_vector(&self, w: &[char]) -> Result<CVector> {
        self.alphabet.check_word(w)?;
        let mut v = self.initial.clone();
        for &c in w.iter().chain(std::iter::once(&END_MARKER)) {
            v = self.matrix(c)?.mat_vec(&v)?;
        }
        Ok(v)
    }

    pub fn accept_prob(&self, w: &[char]) -> Result<f64> {
        let v = self.final_vector(w)?;
        Ok(v.weight_on(self.accepting.iter().copied()))
    }

    pub fn validate(&self, tol: f64) -> Vec<Diagnostic> {
        let n = self.n_states();
        let mut out = transition_diagnostics(&self.alphabet, &self.transitions, n, tol);
        if !self.initial.is_finite() {
            out.push(Diagnostic::new(
                DiagnosticKind::NonFinite,
                "initial vector has a non-finite entry",
            ));
        } else if (self.initial.norm_sq() - 1.0).abs() > tol {
            out.push(Diagnostic::new(
                DiagnosticKind::Norm,
                format!("initial vector has squared norm {}", self.initial.norm_sq()),
            ));
        }
        for &q in self.accepting.iter().filter(|&&q| q >= n) {
            out.push(Diagnostic::new(
                DiagnosticKind::Range,
                format!("accepting state {q} out of range for {n} states"),
            ));
        }
        out
    }
}
