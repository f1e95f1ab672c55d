use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{CMatrix, CVector};
use crate::qfa::certificate::AcceptanceCertificate;
use crate::qfa::diagnostic::{shape_error, transition_diagnostics, Diagnostic, DiagnosticKind};
use crate::qfa::words::{Alphabet, END_MARKER};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StateKind {
    NonHalting,
    Accepting,
    Rejecting,
}

impl StateKind {
    pub fn is_halting(self) -> bool {
        self != StateKind::NonHalting
    }
}

/// Unnormalized non-halting vector plus accumulated halting probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct MmState {
    pub vector: CVector,
    pub p_acc: f64,
    pub p_rej: f64,
}

impl MmState {
    pub fn new(vector: CVector, p_acc: f64, p_rej: f64) -> Self {
        MmState {
            vector,
            p_acc,
            p_rej,
        }
    }

    /// Probability mass still in non-halting states.
    pub fn leftover(&self) -> f64 {
        self.vector.norm_sq()
    }

    pub fn total(&self) -> f64 {
        self.p_acc + self.p_rej + self.leftover()
    }
}

/// Result of one step: the new state plus the accepting amplitudes observed
/// just before measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub state: MmState,
    pub accept_amplitudes: Vec<(usize, Complex64)>,
}

/// Applies `u`, measures, and keeps the non-halting projection unnormalized.
pub fn mm_step(state: &MmState, u: &CMatrix, kinds: &[StateKind]) -> Result<MmState> {
    step_detailed(state, u, kinds).map(|o| o.state)
}

pub fn step_detailed(state: &MmState, u: &CMatrix, kinds: &[StateKind]) -> Result<StepOutcome> {
    if kinds.len() != u.rows() {
        return Err(Error::DimensionMismatch {
            context: "state labels vs matrix",
            left: kinds.len(),
            right: u.rows(),
        });
    }
    let mut v = u.mat_vec(&state.vector)?.into_vec();
    let mut p_acc = state.p_acc;
    let mut p_rej = state.p_rej;
    let mut accept_amplitudes = Vec::new();
    for (q, z) in v.iter_mut().enumerate() {
        match kinds[q] {
            StateKind::NonHalting => {}
            StateKind::Accepting => {
                p_acc += z.norm_sqr();
                if *z != Complex64::new(0.0, 0.0) {
                    accept_amplitudes.push((q, *z));
                }
                *z = Complex64::new(0.0, 0.0);
            }
            StateKind::Rejecting => {
                p_rej += z.norm_sqr();
                *z = Complex64::new(0.0, 0.0);
            }
        }
    }
    Ok(StepOutcome {
        state: MmState::new(CVector::from_vec_unchecked(v), p_acc, p_rej),
        accept_amplitudes,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceStep {
    pub symbol: char,
    pub state: MmState,
    pub accept_amplitudes: Vec<(usize, Complex64)>,
}

/// Every intermediate state of a run, ending with the end-marker step.
#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub initial: MmState,
    pub steps: Vec<TraceStep>,
}

impl RunTrace {
    pub fn final_state(&self) -> &MmState {
        self.steps.last().map(|s| &s.state).unwrap_or(&self.initial)
    }

    pub fn p_acc(&self) -> f64 {
        self.final_state().p_acc
    }

    pub fn p_rej(&self) -> f64 {
        self.final_state().p_rej
    }

    pub fn leftover(&self) -> f64 {
        self.final_state().leftover()
    }
}

/// A measure-many quantum finite automaton.
///
/// Every state is non-halting, accepting, or rejecting. After each symbol the
/// automaton measures which kind of state it is in; halting outcomes stop the
/// computation and their probability is accumulated in the state triple.
#[derive(Clone, Debug, PartialEq)]
pub struct MmQfa {
    pub alphabet: Alphabet,
    pub transitions: BTreeMap<char, CMatrix>,
    pub kinds: Vec<StateKind>,
    pub initial: MmState,
    pub junk: BTreeSet<usize>,
    pub certificate: Option<AcceptanceCertificate>,
}

impl MmQfa {
    pub fn new(
        alphabet: Alphabet,
        transitions: BTreeMap<char, CMatrix>,
        kinds: Vec<StateKind>,
        initial: MmState,
        junk: BTreeSet<usize>,
    ) -> Result<Self> {
        let m = MmQfa {
            alphabet,
            transitions,
            kinds,
            initial,
            junk,
            certificate: None,
        };
        m.check_shape()?;
        Ok(m)
    }

    pub fn with_certificate(mut self, certificate: AcceptanceCertificate) -> Self {
        self.certificate = Some(certificate);
        self
    }

    fn check_shape(&self) -> Result<()> {
        let n = self.n_states();
        if self.initial.vector.dim() != n {
            return Err(Error::DimensionMismatch {
                context: "initial vector vs state labels",
                left: self.initial.vector.dim(),
                right: n,
            });
        }
        if let Some(msg) = shape_error(&self.alphabet, &self.transitions, n) {
            return Err(Error::Malformed(msg));
        }
        if let Some(&q) = self.junk.iter().find(|&&q| q >= n) {
            return Err(Error::IndexOutOfRange { index: q, dim: n });
        }
        Ok(())
    }

    pub fn n_states(&self) -> usize {
        self.kinds.len()
    }

    pub fn matrix(&self, sym: char) -> Result<&CMatrix> {
        self.transitions.get(&sym).ok_or(Error::UnknownSymbol(sym))
    }

    pub fn states_of(&self, kind: StateKind) -> Vec<usize> {
        (0..self.n_states()).filter(|&q| self.kinds[q] == kind).collect()
    }

    pub fn halting_states(&self) -> Vec<usize> {
        (0..self.n_states())
            .filter(|&q| self.kinds[q].is_halting())
            .collect()
    }

    pub fn step(&self, state: &MmState, sym: char) -> Result<StepOutcome> {
        step_detailed(state, self.matrix(sym)?, &self.kinds)
    }

    /// Runs `w` followed by the end-marker from the initial triple.
    pub fn run(&self, w: &[char]) -> Result<RunTrace> {
        self.run_from(&self.initial, w, true)
    }

    /// Runs `w` from `start`, optionally finishing with the end-marker.
    pub fn run_from(&self, start: &MmState, w: &[char], end_marker: bool) -> Result<RunTrace> {
        self.alphabet.check_word(w)?;
        let mut steps = Vec::with_capacity(w.len() + 1);
        let mut state = start.clone();
        let tail = end_marker.then_some(END_MARKER);
        for c in w.iter().copied().chain(tail) {
            let out = self.step(&state, c)?;
            state = out.state.clone();
            steps.push(TraceStep {
                symbol: c,
                state: out.state,
                accept_amplitudes: out.accept_amplitudes,
            });
        }
        Ok(RunTrace {
            initial: start.clone(),
            steps,
        })
    }

    pub fn accept_prob(&self, w: &[char]) -> Result<f64> {
        self.alphabet.check_word(w)?;
        let mut state = self.initial.clone();
        for &c in w.iter().chain(std::iter::once(&END_MARKER)) {
            state = mm_step(&state, self.matrix(c)?, &self.kinds)?;
        }
        Ok(state.p_acc)
    }

    pub fn validate(&self, tol: f64) -> Vec<Diagnostic> {
        let n = self.n_states();
        let mut out = Vec::new();
        if self.initial.vector.dim() != n {
            out.push(Diagnostic::new(
                DiagnosticKind::Shape,
                format!(
                    "initial vector has dimension {}, expected {n}",
                    self.initial.vector.dim()
                ),
            ));
            return out;
        }
        out.extend(transition_diagnostics(&self.alphabet, &self.transitions, n, tol));
        let init = &self.initial;
        if !init.vector.is_finite() || !init.p_acc.is_finite() || !init.p_rej.is_finite() {
            out.push(Diagnostic::new(
                DiagnosticKind::NonFinite,
                "initial triple has a non-finite entry",
            ));
            return out;
        }
        for (name, p) in [("accept", init.p_acc), ("reject", init.p_rej)] {
            if !(-tol..=1.0 + tol).contains(&p) {
                out.push(Diagnostic::new(
                    DiagnosticKind::Range,
                    format!("initial {name} probability {p} outside [0, 1]"),
                ));
            }
        }
        let total = init.total();
        if (total - 1.0).abs() > tol {
            out.push(Diagnostic::new(
                DiagnosticKind::Norm,
                format!("initial squared norm plus halting probabilities is {total}, expected 1"),
            ));
        }
        for q in self.halting_states() {
            let amp = init.vector[q].norm();
            if amp > tol {
                out.push(Diagnostic::new(
                    DiagnosticKind::Support,
                    format!("initial vector has amplitude {amp} on halting state {q}"),
                ));
            }
        }
        for &q in &self.junk {
            if q >= n {
                out.push(Diagnostic::new(
                    DiagnosticKind::Range,
                    format!("junk state {q} out of range for {n} states"),
                ));
                continue;
            }
            let kind = self.kinds[q];
            if !kind.is_halting() {
                out.push(Diagnostic::new(
                    DiagnosticKind::Junk,
                    format!("junk state {q} is non-halting"),
                ));
            }
            if let Some(c) = &self.certificate {
                if c.end_decisive && kind == StateKind::Accepting {
                    out.push(Diagnostic::new(
                        DiagnosticKind::Junk,
                        format!("junk state {q} is accepting in an end-decisive automaton"),
                    ));
                }
                if c.co_end_decisive && kind == StateKind::Rejecting {
                    out.push(Diagnostic::new(
                        DiagnosticKind::Junk,
                        format!("junk state {q} is rejecting in a co-end-decisive automaton"),
                    ));
                }
            }
        }
        if let Some(c) = &self.certificate {
            for p in c.problems() {
                out.push(Diagnostic::new(DiagnosticKind::Certificate, p));
            }
        }
        out
    }
}
