use std::collections::BTreeMap;
use std::fmt;

use crate::numerics::CMatrix;
use crate::qfa::words::{Alphabet, END_MARKER};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DiagnosticKind {
    Shape,
    NonFinite,
    Unitarity,
    Norm,
    Support,
    Range,
    Junk,
    Certificate,
}

/// One problem found by a `validate` call.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
}

impl Diagnostic {
    pub fn new(kind: DiagnosticKind, message: impl Into<String>) -> Self {
        Diagnostic {
            kind,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.kind {
            DiagnosticKind::Shape => "shape",
            DiagnosticKind::NonFinite => "non-finite",
            DiagnosticKind::Unitarity => "unitarity",
            DiagnosticKind::Norm => "norm",
            DiagnosticKind::Support => "support",
            DiagnosticKind::Range => "range",
            DiagnosticKind::Junk => "junk",
            DiagnosticKind::Certificate => "certificate",
        };
        write!(f, "[{tag}] {}", self.message)
    }
}

/// Shape and unitarity diagnostics shared by both automaton kinds.
pub(crate) fn transition_diagnostics(
    alphabet: &Alphabet,
    transitions: &BTreeMap<char, CMatrix>,
    n: usize,
    tol: f64,
) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for sym in alphabet.with_end_marker() {
        if !transitions.contains_key(&sym) {
            out.push(Diagnostic::new(
                DiagnosticKind::Shape,
                format!("no transition matrix for symbol {sym:?}"),
            ));
        }
    }
    for (&sym, u) in transitions {
        if sym != END_MARKER && !alphabet.contains(sym) {
            out.push(Diagnostic::new(
                DiagnosticKind::Shape,
                format!("transition matrix for symbol {sym:?} outside the alphabet"),
            ));
            continue;
        }
        if u.rows() != n || u.cols() != n {
            out.push(Diagnostic::new(
                DiagnosticKind::Shape,
                format!("matrix for {sym:?} is {}x{}, expected {n}x{n}", u.rows(), u.cols()),
            ));
            continue;
        }
        if !u.is_finite() {
            out.push(Diagnostic::new(
                DiagnosticKind::NonFinite,
                format!("matrix for {sym:?} has a non-finite entry"),
            ));
            continue;
        }
        if let Ok((dev, i, j)) = u.unitarity_defect() {
            if dev > tol {
                out.push(Diagnostic::new(
                    DiagnosticKind::Unitarity,
                    format!(
                        "matrix for {sym:?} is not unitary: |(U^dagger U - I)[{i}][{j}]| = {dev:e}"
                    ),
                ));
            }
        }
    }
    out
}

pub(crate) fn shape_error(
    alphabet: &Alphabet,
    transitions: &BTreeMap<char, CMatrix>,
    n: usize,
) -> Option<String> {
    transition_diagnostics(alphabet, transitions, n, f64::INFINITY)
        .into_iter()
        .find(|d| d.kind == DiagnosticKind::Shape)
        .map(|d| d.message)
}
