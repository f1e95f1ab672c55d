//! Automaton models, simulation, validation, and certificate checking.

mod certificate;
mod diagnostic;
mod mm;
mod mo;
pub mod verify;
mod words;

pub use certificate::{AcceptanceCertificate, Bounds, CertificateFlags, Sidedness};
pub use diagnostic::{Diagnostic, DiagnosticKind};
pub use mm::{mm_step, step_detailed, MmQfa, MmState, RunTrace, StateKind, StepOutcome, TraceStep};
pub use mo::MoQfa;
pub use verify::{explore, probability_table, verify_certificate, CertificateReport, Violation, ViolationKind, WordOutcome};
pub use words::{shortlex_cmp, word, word_string, Alphabet, Word, END_MARKER};
