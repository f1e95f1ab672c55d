//! Exhaustive enumeration of runs and certificate checking.

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;

use crate::error::Result;
use crate::qfa::certificate::{AcceptanceCertificate, Sidedness};
use crate::qfa::mm::{MmQfa, MmState};
use crate::qfa::words::{shortlex_cmp, word_string, Word, END_MARKER};

/// Growth of a halting probability below this is treated as no growth.
pub const HALT_SLACK: f64 = 1e-12;
/// Slack on envelope comparisons.
pub const BOUND_SLACK: f64 = 1e-10;
/// Tolerance for one-sided zeros and amplitude signs.
pub const EXACT_TOL: f64 = 1e-9;

/// Summary of the run on one word.
#[derive(Clone, Debug, PartialEq)]
pub struct WordOutcome {
    pub word: Word,
    pub p_acc: f64,
    pub p_rej: f64,
    pub leftover: f64,
    /// First step (1-based, 0 for the initial triple) at which acceptance
    /// probability grew before the end-marker.
    pub early_accept: Option<usize>,
    pub early_reject: Option<usize>,
    /// Worst accepting amplitude seen at any step, measured by
    /// `max(−re, |im|)`, with its step and state.
    pub worst_amplitude: Option<(usize, usize, Complex64)>,
}

#[derive(Clone)]
struct Prefix {
    state: MmState,
    early_accept: Option<usize>,
    early_reject: Option<usize>,
    worst_amplitude: Option<(usize, usize, Complex64)>,
}

fn amplitude_defect(z: Complex64) -> f64 {
    (-z.re).max(z.im.abs())
}

fn merge_worst(
    current: Option<(usize, usize, Complex64)>,
    step: usize,
    amps: &[(usize, Complex64)],
) -> Option<(usize, usize, Complex64)> {
    let mut best = current;
    for &(q, z) in amps {
        let better = match best {
            None => true,
            Some((_, _, w)) => amplitude_defect(z) > amplitude_defect(w),
        };
        if better {
            best = Some((step, q, z));
        }
    }
    best
}

/// Visits every word of length at most `max_len` in lexicographic order,
/// sharing the simulation of common prefixes.
pub fn explore(m: &MmQfa, max_len: usize, mut visit: impl FnMut(&WordOutcome)) -> Result<()> {
    let init = &m.initial;
    let root = Prefix {
        state: init.clone(),
        early_accept: (init.p_acc > HALT_SLACK).then_some(0),
        early_reject: (init.p_rej > HALT_SLACK).then_some(0),
        worst_amplitude: None,
    };
    let mut word = Vec::with_capacity(max_len);
    explore_from(m, &root, &mut word, max_len, &mut visit)
}

fn explore_from(
    m: &MmQfa,
    prefix: &Prefix,
    word: &mut Word,
    max_len: usize,
    visit: &mut impl FnMut(&WordOutcome),
) -> Result<()> {
    let step_no = word.len() + 1;
    let end = m.step(&prefix.state, END_MARKER)?;
    visit(&WordOutcome {
        word: word.clone(),
        p_acc: end.state.p_acc,
        p_rej: end.state.p_rej,
        leftover: end.state.leftover(),
        early_accept: prefix.early_accept,
        early_reject: prefix.early_reject,
        worst_amplitude: merge_worst(prefix.worst_amplitude, step_no, &end.accept_amplitudes),
    });
    if word.len() == max_len {
        return Ok(());
    }
    for &c in m.alphabet.symbols() {
        let out = m.step(&prefix.state, c)?;
        let child = Prefix {
            early_accept: prefix.early_accept.or(
                (out.state.p_acc > prefix.state.p_acc + HALT_SLACK).then_some(step_no),
            ),
            early_reject: prefix.early_reject.or(
                (out.state.p_rej > prefix.state.p_rej + HALT_SLACK).then_some(step_no),
            ),
            worst_amplitude: merge_worst(prefix.worst_amplitude, step_no, &out.accept_amplitudes),
            state: out.state,
        };
        word.push(c);
        explore_from(m, &child, word, max_len, visit)?;
        word.pop();
    }
    Ok(())
}

/// Acceptance probabilities of every word up to `max_len`, lexicographic order.
pub fn probability_table(m: &MmQfa, max_len: usize) -> Result<Vec<(Word, f64)>> {
    let mut out = Vec::new();
    explore(m, max_len, |o| out.push((o.word.clone(), o.p_acc)))?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub enum ViolationKind {
    MemberBelowBound { p: f64, bound: f64 },
    MemberAboveEnvelope { p: f64, bound: f64 },
    NonMemberAboveBound { p: f64, bound: f64 },
    NonMemberBelowEnvelope { p: f64, bound: f64 },
    EarlyAcceptance { step: usize },
    EarlyRejection { step: usize },
    OneSidedLeak { p: f64 },
    AmplitudeSign { step: usize, state: usize, amplitude: Complex64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub word: Word,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = word_string(&self.word);
        match &self.kind {
            ViolationKind::MemberBelowBound { p, bound } => {
                write!(f, "member {w:?}: p = {p} below lower bound {bound}")
            }
            ViolationKind::MemberAboveEnvelope { p, bound } => {
                write!(f, "member {w:?}: p = {p} above envelope {bound}")
            }
            ViolationKind::NonMemberAboveBound { p, bound } => {
                write!(f, "non-member {w:?}: p = {p} above upper bound {bound}")
            }
            ViolationKind::NonMemberBelowEnvelope { p, bound } => {
                write!(f, "non-member {w:?}: p = {p} below envelope {bound}")
            }
            ViolationKind::EarlyAcceptance { step } => {
                write!(f, "{w:?}: acceptance observed at step {step}, before the end-marker")
            }
            ViolationKind::EarlyRejection { step } => {
                write!(f, "{w:?}: rejection observed at step {step}, before the end-marker")
            }
            ViolationKind::OneSidedLeak { p } => {
                write!(f, "{w:?}: one-sided side has probability {p}")
            }
            ViolationKind::AmplitudeSign {
                step,
                state,
                amplitude,
            } => write!(
                f,
                "{w:?}: accepting amplitude {amplitude} on state {state} at step {step}"
            ),
        }
    }
}

/// Outcome of checking a certificate against every word up to some length.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateReport {
    /// Self-consistency problems of the certificate itself.
    pub certificate_problems: Vec<String>,
    pub words_checked: usize,
    pub violation_count: usize,
    /// The shortlex-least violating word and its first failed check.
    pub violation: Option<Violation>,
    pub min_member_prob: Option<f64>,
    pub max_non_member_prob: Option<f64>,
}

impl CertificateReport {
    pub fn is_ok(&self) -> bool {
        self.violation.is_none() && self.certificate_problems.is_empty()
    }

    /// Smallest distance of an observed probability from `cut_point` on the
    /// correct side; negative if some word is misclassified.
    pub fn empirical_margin(&self, cut_point: f64) -> Option<f64> {
        let m = self.min_member_prob.map(|p| p - cut_point);
        let n = self.max_non_member_prob.map(|p| cut_point - p);
        match (m, n) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

fn check_word(
    o: &WordOutcome,
    cert: &AcceptanceCertificate,
    is_member: bool,
) -> Option<ViolationKind> {
    let p = o.p_acc;
    if is_member {
        let b = cert.member_bounds();
        if p < b.lo - BOUND_SLACK {
            return Some(ViolationKind::MemberBelowBound { p, bound: b.lo });
        }
        if p > b.hi + BOUND_SLACK {
            return Some(ViolationKind::MemberAboveEnvelope { p, bound: b.hi });
        }
        if cert.sidedness == Sidedness::Negative && p < 1.0 - EXACT_TOL {
            return Some(ViolationKind::OneSidedLeak { p: 1.0 - p });
        }
    } else {
        let b = cert.non_member_bounds();
        if p > b.hi + BOUND_SLACK {
            return Some(ViolationKind::NonMemberAboveBound { p, bound: b.hi });
        }
        if p < b.lo - BOUND_SLACK {
            return Some(ViolationKind::NonMemberBelowEnvelope { p, bound: b.lo });
        }
        if cert.sidedness == Sidedness::Positive && p > EXACT_TOL {
            return Some(ViolationKind::OneSidedLeak { p });
        }
    }
    if cert.end_decisive {
        if let Some(step) = o.early_accept {
            return Some(ViolationKind::EarlyAcceptance { step });
        }
    }
    if cert.co_end_decisive {
        if let Some(step) = o.early_reject {
            return Some(ViolationKind::EarlyRejection { step });
        }
    }
    if cert.positive_amplitude {
        if let Some((step, state, amplitude)) = o.worst_amplitude {
            if amplitude_defect(amplitude) > EXACT_TOL {
                return Some(ViolationKind::AmplitudeSign {
                    step,
                    state,
                    amplitude,
                });
            }
        }
    }
    None
}

/// Checks `cert` against `m` on every word of length at most `max_len`.
pub fn verify_certificate(
    m: &MmQfa,
    cert: &AcceptanceCertificate,
    member: &dyn Fn(&[char]) -> bool,
    max_len: usize,
) -> Result<CertificateReport> {
    let mut report = CertificateReport {
        certificate_problems: cert.problems(),
        words_checked: 0,
        violation_count: 0,
        violation: None,
        min_member_prob: None,
        max_non_member_prob: None,
    };
    explore(m, max_len, |o| {
        report.words_checked += 1;
        let is_member = member(&o.word);
        if is_member {
            report.min_member_prob = Some(report.min_member_prob.map_or(o.p_acc, |x| x.min(o.p_acc)));
        } else {
            report.max_non_member_prob =
                Some(report.max_non_member_prob.map_or(o.p_acc, |x| x.max(o.p_acc)));
        }
        if let Some(kind) = check_word(o, cert, is_member) {
            report.violation_count += 1;
            let replace = match &report.violation {
                None => true,
                Some(v) => shortlex_cmp(&o.word, &v.word) == Ordering::Less,
            };
            if replace {
                report.violation = Some(Violation {
                    word: o.word.clone(),
                    kind,
                });
            }
        }
    })?;
    Ok(report)
}
