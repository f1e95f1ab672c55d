//! Closure and composition constructions on measure-many automata.
//!
//! Every construction returns a new automaton; certificates are carried or
//! derived when the input certificates allow it.

mod closure;
mod compose;
mod endmarker;

pub use closure::{mm_complement, mm_inverse_hom, word_quotient, Homomorphism, QuotientSide};
pub use compose::{
    accept_all, mm_complement_one_sided, mm_intersect, mm_power, mm_tensor, mm_union,
    reject_all, select_intersection_power, select_union_powers, structurally_end_decisive,
    tensor_bounds, TensorBounds, MAX_AUTO_POWER,
};
pub use endmarker::{mm_strip_left_endmarker, mo_strip_left_endmarker, TwoMarkerMm, TwoMarkerMo};

use crate::error::{Error, Result};

/// Largest automaton any construction will build.
pub const MAX_STATES: usize = 1 << 17;

pub(crate) fn check_state_count(states: usize) -> Result<()> {
    if states > MAX_STATES {
        Err(Error::StateLimit {
            states,
            limit: MAX_STATES,
        })
    } else {
        Ok(())
    }
}

pub(crate) fn same_alphabet(
    a: &crate::qfa::Alphabet,
    b: &crate::qfa::Alphabet,
) -> Result<()> {
    if a != b {
        return Err(Error::Precondition(format!(
            "alphabets differ: {{{a}}} vs {{{b}}}"
        )));
    }
    Ok(())
}
