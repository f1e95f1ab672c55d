use std::fmt;

use crate::ptest::expr::{subseq_oracle, PtestExpr};
use crate::qfa::{word_string, Word};

/// `(∩ positive) ∩ complement(∪ negative)`; an empty positive list means Σ*.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Implicant {
    pub positive: Vec<Word>,
    pub negative: Vec<Word>,
}

impl Implicant {
    pub fn evaluate(&self, w: &[char]) -> bool {
        self.positive.iter().all(|z| subseq_oracle(z, w))
            && !self.negative.iter().any(|z| subseq_oracle(z, w))
    }

    fn merge(&self, other: &Implicant) -> Implicant {
        let mut out = self.clone();
        for z in &other.positive {
            if !out.positive.contains(z) {
                out.positive.push(z.clone());
            }
        }
        for z in &other.negative {
            if !out.negative.contains(z) {
                out.negative.push(z.clone());
            }
        }
        out
    }
}

impl fmt::Display for Implicant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |ws: &[Word]| {
            ws.iter()
                .map(|w| format!("\"{}\"", word_string(w)))
                .collect::<Vec<_>>()
                .join(", ")
        };
        write!(f, "[{}] minus [{}]", list(&self.positive), list(&self.negative))
    }
}

/// Union of implicants; the empty union is the empty language.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct CanonicalForm {
    pub implicants: Vec<Implicant>,
}

impl CanonicalForm {
    pub fn evaluate(&self, w: &[char]) -> bool {
        self.implicants.iter().any(|i| i.evaluate(w))
    }
}

fn dnf(e: &PtestExpr, negated: bool) -> Vec<Implicant> {
    match (e, negated) {
        (PtestExpr::Atom(z), false) => vec![Implicant {
            positive: vec![z.clone()],
            negative: vec![],
        }],
        (PtestExpr::Atom(z), true) => vec![Implicant {
            positive: vec![],
            negative: vec![z.clone()],
        }],
        (PtestExpr::Not(c), _) => dnf(c, !negated),
        (PtestExpr::And(cs), false) | (PtestExpr::Or(cs), true) => {
            let mut acc = vec![Implicant::default()];
            for c in cs {
                let part = dnf(c, negated);
                acc = acc
                    .iter()
                    .flat_map(|a| part.iter().map(move |b| a.merge(b)))
                    .collect();
            }
            acc
        }
        (PtestExpr::Or(cs), false) | (PtestExpr::And(cs), true) => {
            cs.iter().flat_map(|c| dnf(c, negated)).collect()
        }
    }
}

/// Negation normal form followed by distribution into a union of implicants.
///
/// The empty atom denotes Σ*, so it is dropped from positive lists and makes
/// an implicant empty when negated. Implicants with an atom on both sides are
/// dropped, as are duplicates.
pub fn canonicalize(e: &PtestExpr) -> CanonicalForm {
    let mut implicants: Vec<Implicant> = Vec::new();
    for mut imp in dnf(e, false) {
        if imp.negative.iter().any(|z| z.is_empty()) {
            continue;
        }
        imp.positive.retain(|z| !z.is_empty());
        if imp.positive.iter().any(|z| imp.negative.contains(z)) {
            continue;
        }
        if !implicants.contains(&imp) {
            implicants.push(imp);
        }
    }
    CanonicalForm { implicants }
}
