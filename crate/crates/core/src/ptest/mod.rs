//! Boolean combinations of subsequence atoms and their compilation to
//! certified measure-many automata.

mod canonical;
mod compile;
mod expr;

pub use canonical::{canonicalize, CanonicalForm, Implicant};
pub use compile::{
    averaging_matrix, compile, compile_atom, trigger_lower_bound, trigger_upper_bound,
    ChosenPowers, CompilationReport, Compiled, ReportStep,
};
pub use expr::{parse_expr, subseq_oracle, PtestExpr};
