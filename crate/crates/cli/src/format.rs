//! The versioned JSON automaton file.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use qfa::classical::{Dfa, LinearSystem, Pfa, PfaNormalization};
use qfa::constructions::{TwoMarkerMm, TwoMarkerMo};
use qfa::numerics::{CMatrix, CVector};
use qfa::qfa::{AcceptanceCertificate, Alphabet, MmQfa, MmState, MoQfa, Sidedness, StateKind};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub const VERSION: u32 = 1;

/// Matrices with more states than this are written as triplet lists.
pub const DENSE_LIMIT: usize = 16;

type C = [f64; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Mo,
    Mm,
    Dfa,
    Pfa,
    Linsys,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixRepr {
    Dense(Vec<Vec<C>>),
    Sparse { sparse: Vec<(usize, usize, C)> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindRepr {
    NonHalting,
    Accepting,
    Rejecting,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SidednessRepr {
    Positive,
    Negative,
    TwoSided,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateRepr {
    pub cut_point: f64,
    pub margin: f64,
    pub max_margin: f64,
    pub end_decisive: bool,
    pub co_end_decisive: bool,
    pub sidedness: SidednessRepr,
    pub positive_amplitude: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizationRepr {
    pub source_cut_point: f64,
    pub real_dim: usize,
    pub imaginary_track: bool,
    pub cut_slot: bool,
    pub bordered_dim: usize,
    pub shifts: BTreeMap<String, f64>,
    pub scales: BTreeMap<String, f64>,
    pub start_offset: f64,
    pub start_scale: f64,
    pub functional_lo: f64,
    pub functional_hi: f64,
}

/// One automaton of any kind. Which optional fields are required depends on
/// `kind`; see `docs/automaton-format.md`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutomatonFile {
    pub version: u32,
    pub kind: Kind,
    pub alphabet: String,
    pub states: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transitions: Option<BTreeMap<String, MatrixRepr>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cent: Option<MatrixRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<C>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_p_acc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_p_rej: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kinds: Option<Vec<KindRepr>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub junk: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accepting: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<BTreeMap<String, Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functional: Option<Vec<C>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cut_point: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<NormalizationRepr>,
}

/// A parsed file, converted into library types.
#[derive(Clone, Debug)]
pub enum Automaton {
    Mo {
        automaton: MoQfa,
        cent: Option<CMatrix>,
        cut_point: Option<f64>,
    },
    Mm {
        automaton: MmQfa,
        cent: Option<CMatrix>,
    },
    Dfa(Dfa),
    Pfa(Pfa),
    Linsys(LinearSystem),
}

impl Automaton {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Automaton::Mo { .. } => "mo",
            Automaton::Mm { .. } => "mm",
            Automaton::Dfa(_) => "dfa",
            Automaton::Pfa(_) => "pfa",
            Automaton::Linsys(_) => "linsys",
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        match self {
            Automaton::Mo { automaton, .. } => &automaton.alphabet,
            Automaton::Mm { automaton, .. } => &automaton.alphabet,
            Automaton::Dfa(d) => &d.alphabet,
            Automaton::Pfa(p) => &p.alphabet,
            Automaton::Linsys(s) => &s.alphabet,
        }
    }
}

impl From<MoQfa> for Automaton {
    fn from(automaton: MoQfa) -> Self {
        Automaton::Mo {
            automaton,
            cent: None,
            cut_point: None,
        }
    }
}

impl From<MmQfa> for Automaton {
    fn from(automaton: MmQfa) -> Self {
        Automaton::Mm {
            automaton,
            cent: None,
        }
    }
}

impl From<TwoMarkerMo> for Automaton {
    fn from(two: TwoMarkerMo) -> Self {
        Automaton::Mo {
            automaton: two.automaton,
            cent: Some(two.cent),
            cut_point: None,
        }
    }
}

impl From<TwoMarkerMm> for Automaton {
    fn from(two: TwoMarkerMm) -> Self {
        Automaton::Mm {
            automaton: two.automaton,
            cent: Some(two.cent),
        }
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Format(msg.into())
}

fn require<T>(field: Option<T>, name: &str, kind: Kind) -> CliResult<T> {
    field.ok_or_else(|| bad(format!("{kind:?} file is missing \"{name}\"").to_lowercase()))
}

fn c(z: Complex64) -> C {
    [z.re, z.im]
}

fn from_c(x: &C) -> Complex64 {
    Complex64::new(x[0], x[1])
}

fn vector_repr(v: &CVector) -> Vec<C> {
    v.as_slice().iter().copied().map(c).collect()
}

fn vector(v: &[C]) -> CliResult<CVector> {
    Ok(CVector::new(v.iter().map(from_c).collect())?)
}

pub fn matrix_repr(m: &CMatrix) -> MatrixRepr {
    if m.rows() <= DENSE_LIMIT {
        MatrixRepr::Dense(m.to_dense().into_iter().map(|r| r.into_iter().map(c).collect()).collect())
    } else {
        MatrixRepr::Sparse {
            sparse: m.iter().map(|(i, j, z)| (i, j, c(z))).collect(),
        }
    }
}

pub fn matrix(m: &MatrixRepr, n: usize) -> CliResult<CMatrix> {
    let out = match m {
        MatrixRepr::Dense(rows) => {
            CMatrix::from_rows(rows.iter().map(|r| r.iter().map(from_c).collect()).collect())?
        }
        MatrixRepr::Sparse { sparse } => {
            CMatrix::from_triplets(n, n, sparse.iter().map(|(i, j, z)| (*i, *j, from_c(z))))?
        }
    };
    if out.rows() != n || out.cols() != n {
        return Err(bad(format!(
            "matrix is {}x{} but the file declares {n} states",
            out.rows(),
            out.cols()
        )));
    }
    Ok(out)
}

fn symbol(key: &str) -> CliResult<char> {
    let mut it = key.chars();
    match (it.next(), it.next()) {
        (Some(ch), None) => Ok(ch),
        _ => Err(bad(format!("transition key {key:?} must be a single symbol"))),
    }
}

fn matrices_repr(t: &BTreeMap<char, CMatrix>) -> BTreeMap<String, MatrixRepr> {
    t.iter().map(|(k, m)| (k.to_string(), matrix_repr(m))).collect()
}

fn matrices(t: &BTreeMap<String, MatrixRepr>, n: usize) -> CliResult<BTreeMap<char, CMatrix>> {
    t.iter().map(|(k, m)| Ok((symbol(k)?, matrix(m, n)?))).collect()
}

fn certificate_repr(c: &AcceptanceCertificate) -> CertificateRepr {
    CertificateRepr {
        cut_point: c.cut_point,
        margin: c.margin,
        max_margin: c.max_margin,
        end_decisive: c.end_decisive,
        co_end_decisive: c.co_end_decisive,
        sidedness: match c.sidedness {
            Sidedness::Positive => SidednessRepr::Positive,
            Sidedness::Negative => SidednessRepr::Negative,
            Sidedness::TwoSided => SidednessRepr::TwoSided,
        },
        positive_amplitude: c.positive_amplitude,
    }
}

fn certificate(c: &CertificateRepr) -> AcceptanceCertificate {
    AcceptanceCertificate {
        cut_point: c.cut_point,
        margin: c.margin,
        max_margin: c.max_margin,
        end_decisive: c.end_decisive,
        co_end_decisive: c.co_end_decisive,
        sidedness: match c.sidedness {
            SidednessRepr::Positive => Sidedness::Positive,
            SidednessRepr::Negative => Sidedness::Negative,
            SidednessRepr::TwoSided => Sidedness::TwoSided,
        },
        positive_amplitude: c.positive_amplitude,
    }
}

fn normalization_repr(n: &PfaNormalization) -> NormalizationRepr {
    let keyed = |m: &BTreeMap<char, f64>| m.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    NormalizationRepr {
        source_cut_point: n.source_cut_point,
        real_dim: n.real_dim,
        imaginary_track: n.imaginary_track,
        cut_slot: n.cut_slot,
        bordered_dim: n.bordered_dim,
        shifts: keyed(&n.shifts),
        scales: keyed(&n.scales),
        start_offset: n.start_offset,
        start_scale: n.start_scale,
        functional_lo: n.functional_lo,
        functional_hi: n.functional_hi,
    }
}

fn normalization(n: &NormalizationRepr) -> CliResult<PfaNormalization> {
    let keyed = |m: &BTreeMap<String, f64>| -> CliResult<BTreeMap<char, f64>> {
        m.iter().map(|(k, v)| Ok((symbol(k)?, *v))).collect()
    };
    Ok(PfaNormalization {
        source_cut_point: n.source_cut_point,
        real_dim: n.real_dim,
        imaginary_track: n.imaginary_track,
        cut_slot: n.cut_slot,
        bordered_dim: n.bordered_dim,
        shifts: keyed(&n.shifts)?,
        scales: keyed(&n.scales)?,
        start_offset: n.start_offset,
        start_scale: n.start_scale,
        functional_lo: n.functional_lo,
        functional_hi: n.functional_hi,
    })
}

impl AutomatonFile {
    fn blank(kind: Kind, alphabet: &Alphabet, states: usize) -> Self {
        AutomatonFile {
            version: VERSION,
            kind,
            alphabet: alphabet.symbols().iter().collect(),
            states,
            transitions: None,
            cent: None,
            initial: None,
            initial_p_acc: None,
            initial_p_rej: None,
            kinds: None,
            junk: None,
            accepting: None,
            certificate: None,
            delta: None,
            start: None,
            matrices: None,
            distribution: None,
            functional: None,
            cut_point: None,
            normalization: None,
        }
    }

    pub fn from_automaton(a: &Automaton) -> Self {
        match a {
            Automaton::Mo {
                automaton: m,
                cent,
                cut_point,
            } => AutomatonFile {
                transitions: Some(matrices_repr(&m.transitions)),
                cent: cent.as_ref().map(matrix_repr),
                initial: Some(vector_repr(&m.initial)),
                accepting: Some(m.accepting.iter().copied().collect()),
                cut_point: *cut_point,
                ..Self::blank(Kind::Mo, &m.alphabet, m.n_states())
            },
            Automaton::Mm { automaton: m, cent } => AutomatonFile {
                transitions: Some(matrices_repr(&m.transitions)),
                cent: cent.as_ref().map(matrix_repr),
                initial: Some(vector_repr(&m.initial.vector)),
                initial_p_acc: (m.initial.p_acc != 0.0).then_some(m.initial.p_acc),
                initial_p_rej: (m.initial.p_rej != 0.0).then_some(m.initial.p_rej),
                kinds: Some(
                    m.kinds
                        .iter()
                        .map(|k| match k {
                            StateKind::NonHalting => KindRepr::NonHalting,
                            StateKind::Accepting => KindRepr::Accepting,
                            StateKind::Rejecting => KindRepr::Rejecting,
                        })
                        .collect(),
                ),
                junk: (!m.junk.is_empty()).then(|| m.junk.iter().copied().collect()),
                certificate: m.certificate.as_ref().map(certificate_repr),
                ..Self::blank(Kind::Mm, &m.alphabet, m.n_states())
            },
            Automaton::Dfa(d) => AutomatonFile {
                delta: Some(d.delta.clone()),
                start: Some(d.start),
                accepting: Some(d.accepting.iter().copied().collect()),
                ..Self::blank(Kind::Dfa, &d.alphabet, d.n_states())
            },
            Automaton::Pfa(p) => AutomatonFile {
                matrices: Some(p.matrices.iter().map(|(k, m)| (k.to_string(), m.clone())).collect()),
                distribution: Some(p.start.clone()),
                accepting: Some(p.accepting.iter().copied().collect()),
                cut_point: Some(p.cut_point),
                normalization: p.normalization.as_ref().map(normalization_repr),
                ..Self::blank(Kind::Pfa, &p.alphabet, p.n_states())
            },
            Automaton::Linsys(s) => AutomatonFile {
                transitions: Some(matrices_repr(&s.matrices)),
                initial: Some(vector_repr(&s.initial)),
                functional: Some(vector_repr(&s.functional)),
                ..Self::blank(Kind::Linsys, &s.alphabet, s.dim())
            },
        }
    }

    pub fn to_automaton(&self) -> CliResult<Automaton> {
        if self.version != VERSION {
            return Err(bad(format!(
                "unsupported version {}; this tool reads version {VERSION}",
                self.version
            )));
        }
        let kind = self.kind;
        let alphabet = Alphabet::parse(&self.alphabet)?;
        let n = self.states;
        let cent = self.cent.as_ref().map(|m| matrix(m, n)).transpose()?;
        let set = |v: &Option<Vec<usize>>| -> BTreeSet<usize> {
            v.iter().flatten().copied().collect()
        };
        match kind {
            Kind::Mo => {
                let t = matrices(require(self.transitions.as_ref(), "transitions", kind)?, n)?;
                let v = vector(require(self.initial.as_ref(), "initial", kind)?)?;
                let m = MoQfa::new(alphabet, t, v, set(&self.accepting))?;
                Ok(Automaton::Mo {
                    automaton: m,
                    cent,
                    cut_point: self.cut_point,
                })
            }
            Kind::Mm => {
                let t = matrices(require(self.transitions.as_ref(), "transitions", kind)?, n)?;
                let v = vector(require(self.initial.as_ref(), "initial", kind)?)?;
                let kinds = require(self.kinds.as_ref(), "kinds", kind)?
                    .iter()
                    .map(|k| match k {
                        KindRepr::NonHalting => StateKind::NonHalting,
                        KindRepr::Accepting => StateKind::Accepting,
                        KindRepr::Rejecting => StateKind::Rejecting,
                    })
                    .collect();
                let initial = MmState::new(
                    v,
                    self.initial_p_acc.unwrap_or(0.0),
                    self.initial_p_rej.unwrap_or(0.0),
                );
                let mut m = MmQfa::new(alphabet, t, kinds, initial, set(&self.junk))?;
                m.certificate = self.certificate.as_ref().map(certificate);
                Ok(Automaton::Mm { automaton: m, cent })
            }
            Kind::Dfa => {
                let delta = require(self.delta.clone(), "delta", kind)?;
                if delta.len() != n {
                    return Err(bad(format!("delta has {} rows for {n} states", delta.len())));
                }
                let start = require(self.start, "start", kind)?;
                Ok(Automaton::Dfa(Dfa::new(alphabet, delta, start, set(&self.accepting))?))
            }
            Kind::Pfa => {
                let ms = require(self.matrices.as_ref(), "matrices", kind)?
                    .iter()
                    .map(|(k, m)| Ok((symbol(k)?, m.clone())))
                    .collect::<CliResult<_>>()?;
                let start = require(self.distribution.clone(), "distribution", kind)?;
                let cut = require(self.cut_point, "cut_point", kind)?;
                let mut p = Pfa::new(alphabet, ms, start, set(&self.accepting), cut)?;
                p.normalization = self.normalization.as_ref().map(normalization).transpose()?;
                Ok(Automaton::Pfa(p))
            }
            Kind::Linsys => {
                let t = matrices(require(self.transitions.as_ref(), "transitions", kind)?, n)?;
                let v = vector(require(self.initial.as_ref(), "initial", kind)?)?;
                let f = vector(require(self.functional.as_ref(), "functional", kind)?)?;
                Ok(Automaton::Linsys(LinearSystem::new(alphabet, v, t, f)?))
            }
        }
    }
}

/// Pretty layout that keeps complex numbers, vectors and matrix rows on one line.
pub fn to_json(a: &Automaton) -> String {
    let value = serde_json::to_value(AutomatonFile::from_automaton(a))
        .expect("automaton files always serialize");
    let mut out = String::new();
    layout(&value, 0, &mut out);
    out.push('\n');
    out
}

fn depth(v: &Value) -> usize {
    match v {
        Value::Array(xs) => 1 + xs.iter().map(depth).max().unwrap_or(0),
        Value::Object(_) => usize::MAX / 2,
        _ => 0,
    }
}

fn layout(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                layout(x, indent + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
        Value::Array(xs) if depth(v) > 2 => {
            out.push_str("[\n");
            for (i, x) in xs.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                layout(x, indent + 1, out);
                out.push_str(if i + 1 < xs.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Array(xs) => {
            let items: Vec<String> = xs.iter().map(Value::to_string).collect();
            out.push('[');
            out.push_str(&items.join(", "));
            out.push(']');
        }
        _ => out.push_str(&v.to_string()),
    }
}

pub fn from_json(text: &str) -> CliResult<Automaton> {
    let file: AutomatonFile = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    file.to_automaton()
}

/// Reads a standalone matrix in the same notation used inside files.
pub fn matrix_from_json(text: &str, n: usize) -> CliResult<CMatrix> {
    let repr: MatrixRepr = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    matrix(&repr, n)
}
