use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::constructions::{
    accept_all, mm_complement_one_sided, mm_intersect, mm_tensor, mm_union, reject_all,
    select_intersection_power, select_union_powers,
};
use crate::error::{Error, Result};
use crate::numerics::{re, CMatrix, CVector};
use crate::ptest::canonical::{canonicalize, CanonicalForm, Implicant};
use crate::ptest::expr::PtestExpr;
use crate::qfa::{
    word_string, AcceptanceCertificate, Alphabet, Bounds, CertificateFlags, MmQfa, MmState,
    StateKind, END_MARKER,
};

/// The 3×3 averaging block of a trigger chain.
pub fn averaging_matrix() -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_real_rows(&[[0.5, h, 0.5], [h, 0.0, -h], [0.5, -h, 0.5]])
        .expect("constant block")
}

/// Lower bound `(1/(n+2))·(1/2)^(2n+3)` on the acceptance probability of
/// members of `L_z` for `|z| = n + 1`.
pub fn trigger_lower_bound(n: usize) -> f64 {
    0.5f64.powi(2 * n as i32 + 3) / (n as f64 + 2.0)
}

/// Upper bound `1/(2(n+2))` on the acceptance probability of any word, valid
/// when `z₀ ≠ z₁`: the chain amplitudes then stay nonnegative.
pub fn trigger_upper_bound(n: usize) -> f64 {
    1.0 / (2.0 * (n as f64 + 2.0))
}

/// Upper bound on the acceptance probability of the atom automaton for `z`.
///
/// When `z₀ = z₁` the swap into `q₁` can follow an averaging step within the
/// same symbol and leave `q₀` negative, so `α` only satisfies
/// `|α| ≤ √(1 − β²)`.
fn atom_upper_bound(z: &[char]) -> f64 {
    let n = z.len() - 1;
    if n == 0 || z[0] != z[1] {
        return trigger_upper_bound(n);
    }
    let beta_sq = 1.0 / (n as f64 + 2.0);
    (beta_sq.sqrt() + (1.0 - beta_sq).sqrt()).powi(2) / 2.0
}

/// Trigger-chain automaton for the subsequence language `L_z`.
///
/// With `z = z₀…z_n` the automaton has `2n+5` states. Even states up to
/// `q_{2n+2}` are non-halting and start with amplitude `1/√(n+2)`; `q_{2n+1}`
/// accepts; `q_{2n+3}`, `q_{2n+4}` and the odd states below `q_{2n}` reject,
/// all but `q_{2n+3}` being junk. Reading `z₀` empties `q₀`, and reading `z_i`
/// averages `(q_{2i−2}, q_{2i−1}, q_{2i})`, so the drop propagates along the
/// chain. At the end-marker the accepting state receives `(β−α)/√2` where `α`
/// is the amplitude of `q_{2n}` and `β = 1/√(n+2)` that of `q_{2n+2}`.
///
/// For `n = 0` the first trigger sends `q₀` to the junk state `q₄`.
pub fn compile_atom(z: &[char], alphabet: &Alphabet) -> Result<MmQfa> {
    if z.is_empty() {
        return Err(Error::Precondition("atom must be nonempty".into()));
    }
    alphabet.check_word(z)?;
    let n = z.len() - 1;
    let size = 2 * n + 5;

    let mut kinds = vec![StateKind::NonHalting; size];
    let mut junk = BTreeSet::new();
    for q in (1..2 * n).step_by(2) {
        kinds[q] = StateKind::Rejecting;
        junk.insert(q);
    }
    kinds[2 * n + 1] = StateKind::Accepting;
    kinds[2 * n + 3] = StateKind::Rejecting;
    kinds[2 * n + 4] = StateKind::Rejecting;
    junk.insert(2 * n + 4);

    let mut trigger: Vec<usize> = (0..size).collect();
    let target = if n >= 1 { 1 } else { 2 * n + 4 };
    trigger.swap(0, target);
    let trigger = CMatrix::permutation(&trigger)?;

    let x = averaging_matrix();
    let mut transitions = BTreeMap::new();
    for &sigma in alphabet.symbols() {
        let mut u = CMatrix::identity(size);
        for (i, &zi) in z.iter().enumerate() {
            if zi != sigma {
                continue;
            }
            let factor = if i == 0 {
                trigger.clone()
            } else {
                CMatrix::embed(size, 2 * i - 2, &x)?
            };
            u = u.mat_mul(&factor)?;
        }
        transitions.insert(sigma, u);
    }

    let flipped = CMatrix::from_fn(3, 3, |i, j| if i == 1 { -x.get(i, j) } else { x.get(i, j) });
    let mut finish: Vec<usize> = (0..size).collect();
    for i in 0..n {
        finish.swap(2 * i, 2 * i + 1);
    }
    finish.swap(2 * n, 2 * n + 4);
    finish.swap(2 * n + 2, 2 * n + 3);
    let finish = CMatrix::permutation(&finish)?;
    transitions.insert(END_MARKER, finish.mat_mul(&CMatrix::embed(size, 2 * n, &flipped)?)?);

    let amp = 1.0 / ((n + 2) as f64).sqrt();
    let vector: Vec<_> = (0..size)
        .map(|q| if q % 2 == 0 && q <= 2 * n + 2 { re(amp) } else { re(0.0) })
        .collect();
    let initial = MmState::new(CVector::new(vector)?, 0.0, 0.0);
    let m = MmQfa::new(alphabet.clone(), transitions, kinds, initial, junk)?;

    let lo = if n == 0 {
        m.accept_prob(z)?
    } else {
        trigger_lower_bound(n)
    };
    let cert = AcceptanceCertificate::from_envelope(
        Bounds::new(lo, atom_upper_bound(z)),
        Bounds::point(0.0),
        CertificateFlags {
            end_decisive: true,
            co_end_decisive: false,
            positive_amplitude: true,
        },
    )?;
    Ok(m.with_certificate(cert))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChosenPowers {
    Union { s: u32, t: u32 },
    Intersection { k: u32 },
}

impl fmt::Display for ChosenPowers {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChosenPowers::Union { s, t } => write!(f, "s = {s}, t = {t}"),
            ChosenPowers::Intersection { k } => write!(f, "k = {k}"),
        }
    }
}

/// One intermediate automaton of a compilation.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportStep {
    pub description: String,
    pub states: usize,
    pub certificate: AcceptanceCertificate,
    pub powers: Option<ChosenPowers>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CompilationReport {
    pub canonical: CanonicalForm,
    pub steps: Vec<ReportStep>,
}

impl fmt::Display for CompilationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "canonical form: {} implicant(s)", self.canonical.implicants.len())?;
        for (i, imp) in self.canonical.implicants.iter().enumerate() {
            writeln!(f, "  implicant {i}: {imp}")?;
        }
        for s in &self.steps {
            write!(f, "{}: {} states", s.description, s.states)?;
            if let Some(p) = &s.powers {
                write!(f, " ({p})")?;
            }
            writeln!(f)?;
            writeln!(f, "  {}", s.certificate)?;
        }
        Ok(())
    }
}

/// Output of [`compile`].
#[derive(Clone, Debug, PartialEq)]
pub struct Compiled {
    pub automaton: MmQfa,
    pub certificate: AcceptanceCertificate,
    pub report: CompilationReport,
}

struct Recorder {
    steps: Vec<ReportStep>,
}

impl Recorder {
    fn record(&mut self, description: String, m: &MmQfa, powers: Option<ChosenPowers>) -> Result<()> {
        let certificate = m.certificate.ok_or_else(|| {
            Error::Precondition(format!("{description} produced no certificate"))
        })?;
        self.steps.push(ReportStep {
            description,
            states: m.n_states(),
            certificate,
            powers,
        });
        Ok(())
    }

    fn union_all(&mut self, label: &str, parts: Vec<MmQfa>) -> Result<MmQfa> {
        let mut it = parts.into_iter();
        let mut acc = it.next().expect("at least one part");
        for (i, next) in it.enumerate() {
            let (s, t) = select_union_powers(
                acc.certificate.as_ref().expect("certified"),
                next.certificate.as_ref().expect("certified"),
            )?;
            acc = mm_union(&acc, &next, Some((s, t)))?;
            self.record(format!("{label} union {}", i + 1), &acc, Some(ChosenPowers::Union { s, t }))?;
        }
        Ok(acc)
    }
}

fn compile_implicant(
    imp: &Implicant,
    index: usize,
    alphabet: &Alphabet,
    rec: &mut Recorder,
) -> Result<MmQfa> {
    let mut positive = None;
    for z in &imp.positive {
        let atom = compile_atom(z, alphabet)?;
        rec.record(format!("implicant {index} atom \"{}\"", word_string(z)), &atom, None)?;
        positive = Some(match positive {
            None => atom,
            Some(acc) => {
                let t = mm_tensor(&acc, &atom)?;
                rec.record(format!("implicant {index} tensor with \"{}\"", word_string(z)), &t, None)?;
                t
            }
        });
    }
    if imp.negative.is_empty() {
        return Ok(match positive {
            Some(p) => p,
            None => {
                let all = accept_all(alphabet);
                rec.record(format!("implicant {index} all words"), &all, None)?;
                all
            }
        });
    }
    let mut negatives = Vec::new();
    for z in &imp.negative {
        let atom = compile_atom(z, alphabet)?;
        rec.record(format!("implicant {index} negated atom \"{}\"", word_string(z)), &atom, None)?;
        negatives.push(atom);
    }
    let union = rec.union_all(&format!("implicant {index} negated"), negatives)?;
    let complement = mm_complement_one_sided(&union)?;
    rec.record(format!("implicant {index} complement"), &complement, None)?;
    match positive {
        None => Ok(complement),
        Some(p) => {
            let k = select_intersection_power(
                complement.certificate.as_ref().expect("certified"),
                p.certificate.as_ref().expect("certified"),
            )?;
            let out = mm_intersect(&complement, &p, Some(k))?;
            rec.record(
                format!("implicant {index} intersection"),
                &out,
                Some(ChosenPowers::Intersection { k }),
            )?;
            Ok(out)
        }
    }
}

/// Compiles a boolean combination of subsequence atoms into a certified,
/// end-decisive MM-QFA.
pub fn compile(e: &PtestExpr, alphabet: &Alphabet) -> Result<Compiled> {
    for z in e.atoms() {
        alphabet.check_word(z)?;
    }
    let canonical = canonicalize(e);
    let mut rec = Recorder { steps: Vec::new() };
    let automaton = if canonical.implicants.is_empty() {
        let none = reject_all(alphabet);
        rec.record("empty language".into(), &none, None)?;
        none
    } else {
        let mut parts = Vec::new();
        for (i, imp) in canonical.implicants.iter().enumerate() {
            parts.push(compile_implicant(imp, i, alphabet, &mut rec)?);
        }
        rec.union_all("implicant", parts)?
    };
    let certificate = automaton.certificate.expect("every step is certified");
    Ok(Compiled {
        automaton,
        certificate,
        report: CompilationReport {
            canonical,
            steps: rec.steps,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfa::{word, Sidedness};

    fn ab() -> Alphabet {
        Alphabet::parse("ab").unwrap()
    }

    #[test]
    fn atom_layout() {
        let m = compile_atom(&word("ab"), &ab()).unwrap();
        assert_eq!(m.n_states(), 7);
        assert_eq!(m.kinds[3], StateKind::Accepting);
        assert_eq!(m.kinds[5], StateKind::Rejecting);
        assert_eq!(m.junk, BTreeSet::from([1, 6]));
        assert!(m.validate(1e-9).is_empty(), "{:?}", m.validate(1e-9));
        let c = m.certificate.unwrap();
        assert_eq!(c.sidedness, Sidedness::Positive);
        assert!((c.cut_point + c.margin - 1.0 / 96.0).abs() < 1e-15);
    }

    #[test]
    fn first_step_moves_a_third_to_junk() {
        let m = compile_atom(&word("ab"), &ab()).unwrap();
        let s = m.step(&m.initial, 'a').unwrap().state;
        assert!((s.p_rej - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.vector[0], re(0.0));
    }

    #[test]
    fn single_letter_atom() {
        let m = compile_atom(&word("a"), &ab()).unwrap();
        assert_eq!(m.n_states(), 5);
        assert!((m.accept_prob(&word("a")).unwrap() - 0.25).abs() < 1e-15);
        assert!(m.accept_prob(&word("bbb")).unwrap().abs() < 1e-15);
        assert!(m.validate(1e-9).is_empty());
    }

    #[test]
    fn empty_atom_rejected() {
        assert!(compile_atom(&[], &ab()).is_err());
        assert!(compile_atom(&word("c"), &ab()).is_err());
    }

    #[test]
    fn single_atom_compiles_to_itself() {
        let c = compile(&PtestExpr::atom("ab"), &ab()).unwrap();
        assert_eq!(c.automaton, compile_atom(&word("ab"), &ab()).unwrap());
        assert_eq!(c.report.steps.len(), 1);
    }

    #[test]
    fn empty_language_and_universe() {
        let none = compile(&PtestExpr::not(PtestExpr::atom("")), &ab()).unwrap();
        assert_eq!(none.automaton.accept_prob(&word("ab")).unwrap(), 0.0);
        let all = compile(&PtestExpr::atom(""), &ab()).unwrap();
        assert_eq!(all.automaton.accept_prob(&word("ab")).unwrap(), 1.0);
    }
}
