//! Classical counterparts: DFA structure checks, bilinear systems,
//! equivalence testing, and conversion to probabilistic automata.

mod dfa;
mod linsys;
mod pfa;

pub use dfa::{
    gfa_to_moqfa, Dfa, IrreversibleVerdict, IrreversibleWitness, PartialOrderVerdict,
    PartialOrderWitness,
};
pub use linsys::{bilinearize, linsys_equiv, moqfa_equiv, EquivalenceVerdict, LinearSystem, IMAG_TOL};
pub use pfa::{moqfa_to_pfa, Pfa, PfaNormalization, STOCHASTIC_TOL};

/// Minimal DFA with states in breadth-first order from the start state.
pub fn dfa_minimize(d: &Dfa) -> Dfa {
    d.minimize()
}
