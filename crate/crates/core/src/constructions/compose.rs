use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_1_SQRT_2;

use crate::constructions::{check_state_count, same_alphabet};
use crate::error::{Error, Result};
use crate::numerics::{re, CMatrix, CVector, ONE, ZERO};
use crate::qfa::{
    AcceptanceCertificate, Alphabet, Bounds, CertificateFlags, MmQfa, MmState, Sidedness,
    StateKind, END_MARKER,
};

/// Largest power the automatic selection rules will try.
pub const MAX_AUTO_POWER: u32 = 16;

const STRUCT_TOL: f64 = 1e-12;

/// True if no accepting state can be reached before the end-marker: the
/// initial accept probability is zero and no non-end-marker matrix moves
/// non-halting amplitude into an accepting state.
pub fn structurally_end_decisive(m: &MmQfa) -> bool {
    if m.initial.p_acc > STRUCT_TOL {
        return false;
    }
    m.transitions
        .iter()
        .filter(|(&c, _)| c != END_MARKER)
        .all(|(_, u)| {
            u.iter().all(|(i, j, z)| {
                !(m.kinds[i] == StateKind::Accepting
                    && m.kinds[j] == StateKind::NonHalting
                    && z.norm() > STRUCT_TOL)
            })
        })
}

fn require_end_decisive(m: &MmQfa, who: &str) -> Result<()> {
    let ok = match &m.certificate {
        Some(c) => c.end_decisive,
        None => structurally_end_decisive(m),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{who} is not end-decisive")))
    }
}

fn require_certificate<'a>(m: &'a MmQfa, who: &str) -> Result<&'a AcceptanceCertificate> {
    m.certificate
        .as_ref()
        .ok_or_else(|| Error::Precondition(format!("{who} has no acceptance certificate")))
}

/// Two-state automaton accepting every word at the end-marker.
pub fn accept_all(alphabet: &Alphabet) -> MmQfa {
    trivial(alphabet, StateKind::Accepting)
}

/// Two-state automaton rejecting every word at the end-marker.
pub fn reject_all(alphabet: &Alphabet) -> MmQfa {
    trivial(alphabet, StateKind::Rejecting)
}

fn trivial(alphabet: &Alphabet, verdict: StateKind) -> MmQfa {
    let mut transitions: BTreeMap<char, CMatrix> = alphabet
        .symbols()
        .iter()
        .map(|&c| (c, CMatrix::identity(2)))
        .collect();
    transitions.insert(
        END_MARKER,
        CMatrix::permutation(&[1, 0]).expect("swap is a permutation"),
    );
    let cert = AcceptanceCertificate::from_envelope(
        Bounds::point(1.0),
        Bounds::point(0.0),
        CertificateFlags {
            end_decisive: true,
            co_end_decisive: false,
            positive_amplitude: true,
        },
    )
    .expect("point envelopes are separated");
    MmQfa::new(
        alphabet.clone(),
        transitions,
        vec![StateKind::NonHalting, verdict],
        MmState::new(CVector::basis(2, 0).expect("index in range"), 0.0, 0.0),
        BTreeSet::new(),
    )
    .expect("trivial automaton is well formed")
    .with_certificate(cert)
}

fn raw_tensor(m1: &MmQfa, m2: &MmQfa) -> Result<MmQfa> {
    same_alphabet(&m1.alphabet, &m2.alphabet)?;
    let (n1, n2) = (m1.n_states(), m2.n_states());
    let n = n1
        .checked_mul(n2)
        .ok_or(Error::DimensionOverflow("tensor automaton"))?;
    check_state_count(n)?;
    let mut kinds = Vec::with_capacity(n);
    let mut junk = BTreeSet::new();
    for i in 0..n1 {
        for j in 0..n2 {
            let (a, b) = (m1.kinds[i], m2.kinds[j]);
            let kind = if a == StateKind::Rejecting || b == StateKind::Rejecting {
                StateKind::Rejecting
            } else if a == StateKind::Accepting && b == StateKind::Accepting {
                StateKind::Accepting
            } else {
                StateKind::NonHalting
            };
            if kind == StateKind::Rejecting && (m1.junk.contains(&i) || m2.junk.contains(&j)) {
                junk.insert(i * n2 + j);
            }
            kinds.push(kind);
        }
    }
    let mut transitions = BTreeMap::new();
    for (&c, u1) in &m1.transitions {
        transitions.insert(c, u1.tensor_product(m2.matrix(c)?)?);
    }
    let vector = m1.initial.vector.tensor_product(&m2.initial.vector)?;
    let p_acc = m1.initial.p_acc * m2.initial.p_acc;
    let p_rej = (1.0 - vector.norm_sq() - p_acc).max(0.0);
    MmQfa::new(
        m1.alphabet.clone(),
        transitions,
        kinds,
        MmState::new(vector, p_acc, p_rej),
        junk,
    )
}

/// Probability intervals of a tensor product, split by membership in each
/// factor's language.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TensorBounds {
    pub both: Bounds,
    pub first_only: Bounds,
    pub second_only: Bounds,
    pub neither: Bounds,
}

pub fn tensor_bounds(c1: &AcceptanceCertificate, c2: &AcceptanceCertificate) -> TensorBounds {
    let (m1, n1) = (c1.member_bounds(), c1.non_member_bounds());
    let (m2, n2) = (c2.member_bounds(), c2.non_member_bounds());
    TensorBounds {
        both: m1.mul(&m2),
        first_only: m1.mul(&n2),
        second_only: n1.mul(&m2),
        neither: n1.mul(&n2),
    }
}

/// Tensor product of two end-decisive automata; accepts `w` with probability
/// `p₁(w)·p₂(w)`.
///
/// When both inputs carry certificates and the product separates `L₁ ∩ L₂`
/// from its complement, the result carries the derived certificate.
pub fn mm_tensor(m1: &MmQfa, m2: &MmQfa) -> Result<MmQfa> {
    require_end_decisive(m1, "first automaton")?;
    require_end_decisive(m2, "second automaton")?;
    let mut out = raw_tensor(m1, m2)?;
    if let (Some(c1), Some(c2)) = (&m1.certificate, &m2.certificate) {
        let b = tensor_bounds(c1, c2);
        let non = b.first_only.hull(&b.second_only).hull(&b.neither);
        let flags = CertificateFlags {
            end_decisive: true,
            co_end_decisive: c1.co_end_decisive && c2.co_end_decisive,
            positive_amplitude: c1.positive_amplitude && c2.positive_amplitude,
        };
        out.certificate = AcceptanceCertificate::from_envelope(b.both, non, flags).ok();
    }
    Ok(out)
}

/// `k`-fold tensor power; accepts `w` with probability `p(w)^k`.
pub fn mm_power(m: &MmQfa, k: u32) -> Result<MmQfa> {
    if k == 0 {
        return Err(Error::Precondition("power must be at least 1".into()));
    }
    require_end_decisive(m, "automaton")?;
    let states = m
        .n_states()
        .checked_pow(k)
        .ok_or(Error::DimensionOverflow("tensor power"))?;
    check_state_count(states)?;
    let mut out = m.clone();
    for _ in 1..k {
        out = raw_tensor(&out, m)?;
    }
    out.certificate = match &m.certificate {
        Some(c) => Some(AcceptanceCertificate::from_envelope(
            c.member_bounds().powi(k),
            c.non_member_bounds().powi(k),
            c.flags(),
        )?),
        None => None,
    };
    Ok(out)
}

fn union_envelope(
    c1: &AcceptanceCertificate,
    c2: &AcceptanceCertificate,
    s: u32,
    t: u32,
) -> (Bounds, Bounds) {
    let (a, a_non) = (c1.member_bounds().powi(s), c1.non_member_bounds().powi(s));
    let (b, b_non) = (c2.member_bounds().powi(t), c2.non_member_bounds().powi(t));
    let avg = |x: Bounds, y: Bounds| Bounds::new((x.lo + y.lo) / 2.0, (x.hi + y.hi) / 2.0);
    let member = avg(a, b).hull(&avg(a, b_non)).hull(&avg(a_non, b));
    (member, avg(a_non, b_non))
}

fn union_rule(c1: &AcceptanceCertificate, c2: &AcceptanceCertificate, s: u32, t: u32) -> bool {
    let (l1, e1, l2, e2) = (c1.cut_point, c1.margin, c2.cut_point, c2.margin);
    let lhs = (l1 - e1).max(0.0).powi(s as i32) + (l2 - e2).max(0.0).powi(t as i32);
    let rhs = 0.5 * (l1 + e1).powi(s as i32).min((l2 + e2).powi(t as i32));
    lhs <= rhs
}

/// Smallest `(s, t)`, ordered by `s + t` then `s`, with
/// `(λ−ε)^s + (λ'−ε')^t ≤ ½·min((λ+ε)^s, (λ'+ε')^t)`.
pub fn select_union_powers(
    c1: &AcceptanceCertificate,
    c2: &AcceptanceCertificate,
) -> Result<(u32, u32)> {
    for total in 2..=2 * MAX_AUTO_POWER {
        for s in 1..total {
            let t = total - s;
            if s <= MAX_AUTO_POWER && t <= MAX_AUTO_POWER && union_rule(c1, c2, s, t) {
                return Ok((s, t));
            }
        }
    }
    Err(Error::Precondition(format!(
        "no s, t <= {MAX_AUTO_POWER} satisfy (l-e)^s + (l'-e')^t <= min((l+e)^s, (l'+e')^t)/2 \
         with l-e = {}, l+e = {}, l'-e' = {}, l'+e' = {}",
        c1.cut_point - c1.margin,
        c1.cut_point + c1.margin,
        c2.cut_point - c2.margin,
        c2.cut_point + c2.margin
    )))
}

/// Union by direct sum of tensor powers, each half of the initial mass going
/// to one component: `p(w) = ½·p₁(w)^s + ½·p₂(w)^t`.
///
/// `powers = None` selects `(s, t)` with [`select_union_powers`].
pub fn mm_union(m1: &MmQfa, m2: &MmQfa, powers: Option<(u32, u32)>) -> Result<MmQfa> {
    same_alphabet(&m1.alphabet, &m2.alphabet)?;
    let c1 = require_certificate(m1, "first automaton")?;
    let c2 = require_certificate(m2, "second automaton")?;
    for (c, who) in [(c1, "first automaton"), (c2, "second automaton")] {
        if !c.end_decisive {
            return Err(Error::Precondition(format!("{who} is not end-decisive")));
        }
        if !c.is_bounded_error() {
            return Err(Error::Precondition(format!("{who} has zero margin")));
        }
    }
    let (s, t) = match powers {
        Some(p) => p,
        None => select_union_powers(c1, c2)?,
    };
    let (member, non) = union_envelope(c1, c2, s, t);
    let flags = CertificateFlags {
        end_decisive: true,
        co_end_decisive: c1.co_end_decisive && c2.co_end_decisive,
        positive_amplitude: c1.positive_amplitude && c2.positive_amplitude,
    };
    let cert = AcceptanceCertificate::from_envelope(member, non, flags).map_err(|_| {
        Error::Precondition(format!(
            "powers s = {s}, t = {t} do not separate the union: members >= {}, non-members <= {}",
            member.lo, non.hi
        ))
    })?;
    let n1 = m1.n_states().checked_pow(s);
    let n2 = m2.n_states().checked_pow(t);
    match (n1, n2) {
        (Some(a), Some(b)) => check_state_count(a.saturating_add(b))?,
        _ => return Err(Error::DimensionOverflow("union")),
    }
    let p1 = mm_power(m1, s)?;
    let p2 = mm_power(m2, t)?;
    let offset = p1.n_states();
    let mut transitions = BTreeMap::new();
    for (&c, u1) in &p1.transitions {
        transitions.insert(c, u1.direct_sum(p2.matrix(c)?)?);
    }
    let kinds = p1.kinds.iter().chain(&p2.kinds).copied().collect();
    let junk = p1
        .junk
        .iter()
        .copied()
        .chain(p2.junk.iter().map(|q| q + offset))
        .collect();
    let half = re(FRAC_1_SQRT_2);
    let vector = p1.initial.vector.scale(half).concat(&p2.initial.vector.scale(half));
    let initial = MmState::new(
        vector,
        (p1.initial.p_acc + p2.initial.p_acc) / 2.0,
        (p1.initial.p_rej + p2.initial.p_rej) / 2.0,
    );
    Ok(MmQfa::new(p1.alphabet.clone(), transitions, kinds, initial, junk)?.with_certificate(cert))
}

/// The 4×4 averaging-then-cleanup block on
/// `(old accept, new accept, reservoir, new reject)`.
fn averaging_block() -> CMatrix {
    let h = FRAC_1_SQRT_2;
    let averaging = CMatrix::from_real_rows(&[
        [0.5, h, 0.5, 0.0],
        [-h, 0.0, h, 0.0],
        [0.5, -h, 0.5, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ])
    .expect("constant block");
    let cleanup = CMatrix::permutation(&[0, 1, 3, 2]).expect("constant permutation");
    cleanup.mat_mul(&averaging).expect("4x4 blocks")
}

/// Complement of a language accepted with positive one-sided error.
///
/// Each accepting state gains a new accepting state, a reservoir holding
/// amplitude `c = 1/√(1+a)`, and a junk rejecting state. At the end-marker
/// the new accepting state receives `c(1−β)/√2` where `β` is the old
/// accepting amplitude, so words outside the old language are accepted with
/// probability exactly `a·c²/2`.
pub fn mm_complement_one_sided(m: &MmQfa) -> Result<MmQfa> {
    let cert = require_certificate(m, "automaton")?;
    if !cert.end_decisive {
        return Err(Error::Precondition("automaton is not end-decisive".into()));
    }
    if cert.sidedness != Sidedness::Positive {
        return Err(Error::Precondition(
            "automaton does not have positive one-sided error".into(),
        ));
    }
    if !cert.positive_amplitude {
        return Err(Error::Precondition(
            "automaton does not accept with positive amplitude".into(),
        ));
    }
    if m.initial.p_acc > STRUCT_TOL {
        return Err(Error::Precondition(
            "initial accept probability must be zero".into(),
        ));
    }
    let n = m.n_states();
    let accepting = m.states_of(StateKind::Accepting);
    let a = accepting.len();
    if a == 0 {
        return Err(Error::Precondition("automaton has no accepting states".into()));
    }
    let total = n + 3 * a;
    check_state_count(total)?;

    let mut kinds = m.kinds.clone();
    for &q in &accepting {
        kinds[q] = StateKind::Rejecting;
    }
    let mut junk = m.junk.clone();
    for i in 0..a {
        kinds.extend([StateKind::Accepting, StateKind::NonHalting, StateKind::Rejecting]);
        junk.insert(n + 3 * i + 2);
    }

    let block = averaging_block();
    let mut x_entries = Vec::new();
    let mut touched = vec![false; total];
    for (i, &q) in accepting.iter().enumerate() {
        let idx = [q, n + 3 * i, n + 3 * i + 1, n + 3 * i + 2];
        for &k in &idx {
            touched[k] = true;
        }
        for (r, c, z) in block.iter() {
            x_entries.push((idx[r], idx[c], z));
        }
    }
    x_entries.extend((0..total).filter(|&k| !touched[k]).map(|k| (k, k, ONE)));
    let x = CMatrix::from_triplets(total, total, x_entries)?;

    let pad = CMatrix::identity(3 * a);
    let mut transitions = BTreeMap::new();
    for (&c, u) in &m.transitions {
        let padded = u.direct_sum(&pad)?;
        let t = if c == END_MARKER {
            x.mat_mul(&padded)?
        } else {
            padded
        };
        transitions.insert(c, t);
    }

    let scale = 1.0 / ((1 + a) as f64).sqrt();
    let mut vector: Vec<_> = m.initial.vector.as_slice().iter().map(|z| z * scale).collect();
    for _ in 0..a {
        vector.extend([ZERO, re(scale), ZERO]);
    }
    let c2 = scale * scale;
    let initial = MmState::new(CVector::new(vector)?, 0.0, m.initial.p_rej * c2);

    let af = a as f64;
    let b = cert.member_bounds().lo;
    let mhi = cert.member_bounds().hi.clamp(0.0, 1.0);
    let member = Bounds::point(af * c2 / 2.0);
    let non = Bounds::new(
        c2 * af * (1.0 - mhi.sqrt()).powi(2) / 2.0,
        c2 * (af - 2.0 * b.sqrt() + b) / 2.0,
    );
    let new_cert = AcceptanceCertificate::from_envelope(
        member,
        non,
        CertificateFlags {
            end_decisive: true,
            co_end_decisive: false,
            positive_amplitude: true,
        },
    )?;
    Ok(MmQfa::new(m.alphabet.clone(), transitions, kinds, initial, junk)?.with_certificate(new_cert))
}

fn intersection_rule(c1: &AcceptanceCertificate, c2: &AcceptanceCertificate, k: u32) -> bool {
    let k = k as i32;
    let lhs = (c1.cut_point - c1.margin).max(0.0).powi(k) * c2.member_bounds().hi;
    let rhs = 0.5 * (c1.cut_point + c1.margin).powi(k) * c2.member_bounds().lo;
    lhs <= rhs
}

/// Least `k ≤ 16` with `(λ−ε)^k·min(1, λ'+η') ≤ ½·(λ+ε)^k·(λ'+ε')`.
pub fn select_intersection_power(
    c1: &AcceptanceCertificate,
    c2: &AcceptanceCertificate,
) -> Result<u32> {
    (1..=MAX_AUTO_POWER)
        .find(|&k| intersection_rule(c1, c2, k))
        .ok_or_else(|| {
            Error::Precondition(format!(
                "no k <= {MAX_AUTO_POWER} satisfies (l-e)^k (l'+n') <= (l+e)^k (l'+e')/2 \
                 with l-e = {}, l+e = {}, l'+n' = {}, l'+e' = {}",
                c1.cut_point - c1.margin,
                c1.cut_point + c1.margin,
                c2.member_bounds().hi,
                c2.member_bounds().lo
            ))
        })
}

/// Intersection of a bounded-error language `L(m1)` with a positive
/// one-sided language `L(m2)`: the tensor of `m1^k` with `m2`.
///
/// `k = None` selects the power with [`select_intersection_power`].
pub fn mm_intersect(m1: &MmQfa, m2: &MmQfa, k: Option<u32>) -> Result<MmQfa> {
    same_alphabet(&m1.alphabet, &m2.alphabet)?;
    let c1 = require_certificate(m1, "first automaton")?;
    let c2 = require_certificate(m2, "second automaton")?;
    if !c1.end_decisive || !c1.is_bounded_error() {
        return Err(Error::Precondition(
            "first automaton must be end-decisive with bounded error".into(),
        ));
    }
    if !c2.end_decisive || c2.sidedness != Sidedness::Positive {
        return Err(Error::Precondition(
            "second automaton must be end-decisive with positive one-sided error".into(),
        ));
    }
    let k = match k {
        Some(k) => k,
        None => select_intersection_power(c1, c2)?,
    };
    let powered = mm_power(m1, k)?;
    let out = mm_tensor(&powered, m2)?;
    if out.certificate.is_none() {
        return Err(Error::Precondition(format!(
            "power k = {k} does not separate the intersection"
        )));
    }
    Ok(out)
}
