use std::collections::BTreeMap;

use crate::constructions::check_state_count;
use crate::error::{Error, Result};
use crate::numerics::CMatrix;
use crate::qfa::{Alphabet, MmQfa, MmState, StateKind, Word, END_MARKER};

/// Exchanges accepting and rejecting states.
///
/// The certificate transform assumes every run leaves no mass in
/// non-halting states after the end-marker, so that `p_rej = 1 − p_acc`.
pub fn mm_complement(m: &MmQfa) -> MmQfa {
    let kinds = m
        .kinds
        .iter()
        .map(|k| match k {
            StateKind::Accepting => StateKind::Rejecting,
            StateKind::Rejecting => StateKind::Accepting,
            StateKind::NonHalting => StateKind::NonHalting,
        })
        .collect();
    MmQfa {
        alphabet: m.alphabet.clone(),
        transitions: m.transitions.clone(),
        kinds,
        initial: MmState::new(m.initial.vector.clone(), m.initial.p_rej, m.initial.p_acc),
        junk: m.junk.clone(),
        certificate: m.certificate.map(|c| c.complemented()),
    }
}

/// A monoid homomorphism from words over `domain` to words over some target
/// alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct Homomorphism {
    domain: Alphabet,
    images: BTreeMap<char, Word>,
}

impl Homomorphism {
    pub fn new(domain: Alphabet, images: BTreeMap<char, Word>) -> Result<Self> {
        for &c in domain.symbols() {
            if !images.contains_key(&c) {
                return Err(Error::Precondition(format!("no image given for {c:?}")));
            }
        }
        for (&c, img) in &images {
            if !domain.contains(c) {
                return Err(Error::UnknownSymbol(c));
            }
            if img.contains(&END_MARKER) {
                return Err(Error::Precondition(format!(
                    "image of {c:?} contains the end-marker"
                )));
            }
        }
        Ok(Homomorphism { domain, images })
    }

    pub fn identity(alphabet: &Alphabet) -> Self {
        let images = alphabet.symbols().iter().map(|&c| (c, vec![c])).collect();
        Homomorphism {
            domain: alphabet.clone(),
            images,
        }
    }

    pub fn domain(&self) -> &Alphabet {
        &self.domain
    }

    pub fn image(&self, c: char) -> Option<&[char]> {
        self.images.get(&c).map(|w| w.as_slice())
    }

    pub fn max_image_len(&self) -> usize {
        self.images.values().map(Vec::len).max().unwrap_or(0)
    }

    pub fn apply(&self, w: &[char]) -> Result<Word> {
        let mut out = Vec::new();
        for &c in w {
            out.extend_from_slice(self.image(c).ok_or(Error::UnknownSymbol(c))?);
        }
        Ok(out)
    }
}

/// Builds the automaton whose step on each key of `pipelines` runs the given
/// symbol sequence of `m`, moving halted mass around a ring of `ring` extra
/// copies of the halting states so later sub-steps cannot disturb it.
///
/// A pipeline of length `k` needs `k ≤ ring + 1`.
fn halting_ring(
    m: &MmQfa,
    alphabet: Alphabet,
    pipelines: &BTreeMap<char, Word>,
    ring: usize,
) -> Result<MmQfa> {
    let n = m.n_states();
    let halting = m.halting_states();
    let h = halting.len();
    let extra = ring
        .checked_mul(h)
        .ok_or(Error::DimensionOverflow("halting ring"))?;
    let total = n + extra;
    check_state_count(total)?;

    let pos = |set: usize, k: usize| if set == 0 { halting[k] } else { n + (set - 1) * h + k };
    let mut perm: Vec<usize> = (0..total).collect();
    for set in 0..=ring {
        for k in 0..h {
            perm[pos(set, k)] = pos((set + 1) % (ring + 1), k);
        }
    }
    let shift = CMatrix::permutation(&perm)?;

    let mut kinds = m.kinds.clone();
    let mut junk = m.junk.clone();
    for set in 1..=ring {
        for (k, &q) in halting.iter().enumerate() {
            kinds.push(m.kinds[q]);
            if m.junk.contains(&q) {
                junk.insert(pos(set, k));
            }
        }
    }

    let pad = CMatrix::identity(extra);
    let mut padded = BTreeMap::new();
    for (&c, u) in &m.transitions {
        let v = if extra == 0 { u.clone() } else { u.direct_sum(&pad)? };
        padded.insert(c, shift.mat_mul(&v)?);
    }

    let mut transitions = BTreeMap::new();
    for (&c, pipeline) in pipelines {
        if pipeline.len() > ring + 1 {
            return Err(Error::Precondition(format!(
                "pipeline of length {} does not fit a ring of {ring} copies",
                pipeline.len()
            )));
        }
        let matrix = if pipeline.is_empty() {
            shift.clone()
        } else {
            let mut acc = CMatrix::identity(total);
            for &x in pipeline {
                let v = padded.get(&x).ok_or(Error::UnknownSymbol(x))?;
                acc = v.mat_mul(&acc)?;
            }
            acc
        };
        transitions.insert(c, matrix);
    }

    let mut vector = m.initial.vector.clone().into_vec();
    vector.resize(total, crate::numerics::ZERO);
    let initial = MmState::new(
        crate::numerics::CVector::new(vector)?,
        m.initial.p_acc,
        m.initial.p_rej,
    );
    let mut out = MmQfa::new(alphabet, transitions, kinds, initial, junk)?;
    out.certificate = m.certificate;
    Ok(out)
}

/// Automaton for `h⁻¹(L(m))`: on `w` it behaves as `m` on `h(w)`.
pub fn mm_inverse_hom(m: &MmQfa, h: &Homomorphism) -> Result<MmQfa> {
    for (&c, img) in &h.images {
        if let Some(&x) = img.iter().find(|&&x| !m.alphabet.contains(x)) {
            return Err(Error::Precondition(format!(
                "image of {c:?} uses {x:?}, which is outside the automaton's alphabet"
            )));
        }
    }
    let mut pipelines = h.images.clone();
    pipelines.insert(END_MARKER, vec![END_MARKER]);
    halting_ring(m, h.domain.clone(), &pipelines, h.max_image_len())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuotientSide {
    /// `u \ L = { w : u·w ∈ L }`
    Left,
    /// `L / u = { w : w·u ∈ L }`
    Right,
}

/// Automaton for the quotient of `L(m)` by the word `u`.
pub fn word_quotient(m: &MmQfa, u: &[char], side: QuotientSide) -> Result<MmQfa> {
    m.alphabet.check_word(u)?;
    match side {
        QuotientSide::Left => {
            let trace = m.run_from(&m.initial, u, false)?;
            let mut out = m.clone();
            out.initial = trace.final_state().clone();
            Ok(out)
        }
        QuotientSide::Right => {
            let mut pipelines: BTreeMap<char, Word> =
                m.alphabet.symbols().iter().map(|&c| (c, vec![c])).collect();
            let mut end = u.to_vec();
            end.push(END_MARKER);
            pipelines.insert(END_MARKER, end);
            halting_ring(m, m.alphabet.clone(), &pipelines, u.len())
        }
    }
}

