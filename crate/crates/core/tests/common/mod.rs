#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use qfa::classical::Dfa;
use qfa::numerics::{CMatrix, CVector};
use qfa::qfa::{Alphabet, MmQfa, MmState, MoQfa, StateKind, Word, END_MARKER};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_unit_vector(rng: &mut impl Rng, n: usize) -> CVector {
    loop {
        let v: Vec<Complex64> = (0..n).map(|_| random_complex(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-3 {
            return CVector::new(v.into_iter().map(|z| z / norm).collect()).unwrap();
        }
    }
}

/// Random unitary from Gram-Schmidt on random complex columns.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> CMatrix {
    loop {
        let mut cols: Vec<Vec<Complex64>> = Vec::new();
        let mut ok = true;
        for _ in 0..n {
            let mut v: Vec<Complex64> = (0..n).map(|_| random_complex(rng)).collect();
            for _ in 0..2 {
                for c in &cols {
                    let p: Complex64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                    for (x, y) in v.iter_mut().zip(c) {
                        *x -= p * y;
                    }
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-6 {
                ok = false;
                break;
            }
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
        if ok {
            return CMatrix::from_fn(n, n, |i, j| cols[j][i]);
        }
    }
}

/// Random orthogonal matrix with real entries.
pub fn random_orthogonal(rng: &mut impl Rng, n: usize) -> CMatrix {
    let u = random_unitary(rng, n);
    let real = CMatrix::from_fn(n, n, |i, j| Complex64::new(u.get(i, j).re, 0.0));
    // Re-orthonormalize the real parts.
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for j in 0..n {
        let mut v: Vec<f64> = (0..n).map(|i| real.get(i, j).re).collect();
        for _ in 0..2 {
            for c in &cols {
                let p: f64 = c.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (x, y) in v.iter_mut().zip(c) {
                    *x -= p * y;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-6 {
            return random_orthogonal(rng, n);
        }
        cols.push(v.into_iter().map(|x| x / norm).collect());
    }
    CMatrix::from_fn(n, n, |i, j| Complex64::new(cols[j][i], 0.0))
}

pub fn random_moqfa(rng: &mut impl Rng, n: usize, alphabet: &Alphabet) -> MoQfa {
    let mut transitions = BTreeMap::new();
    for c in alphabet.with_end_marker() {
        transitions.insert(c, random_unitary(rng, n));
    }
    let accepting: BTreeSet<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
    MoQfa::new(
        alphabet.clone(),
        transitions,
        random_unit_vector(rng, n),
        accepting,
    )
    .unwrap()
}

pub fn random_kinds(rng: &mut impl Rng, n: usize) -> Vec<StateKind> {
    let mut kinds: Vec<StateKind> = (0..n)
        .map(|_| match rng.gen_range(0..3) {
            0 => StateKind::NonHalting,
            1 => StateKind::Accepting,
            _ => StateKind::Rejecting,
        })
        .collect();
    kinds[0] = StateKind::NonHalting;
    kinds
}

/// Random MM-QFA whose initial vector lives on the non-halting states and
/// carries mass `1 - p_acc0 - p_rej0`.
pub fn random_mmqfa(rng: &mut impl Rng, n: usize, alphabet: &Alphabet) -> MmQfa {
    let kinds = random_kinds(rng, n);
    let mut transitions = BTreeMap::new();
    for c in alphabet.with_end_marker() {
        transitions.insert(c, random_unitary(rng, n));
    }
    let (p_acc, p_rej): (f64, f64) = if rng.gen_bool(0.5) {
        let a = rng.gen_range(0.0..0.3);
        (a, rng.gen_range(0.0..0.3))
    } else {
        (0.0, 0.0)
    };
    let mass = (1.0 - p_acc - p_rej).sqrt();
    let free: Vec<usize> = (0..n).filter(|&q| kinds[q] == StateKind::NonHalting).collect();
    let raw = random_unit_vector(rng, free.len());
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for (k, &q) in free.iter().enumerate() {
        v[q] = raw[k] * mass;
    }
    MmQfa::new(
        alphabet.clone(),
        transitions,
        kinds,
        MmState::new(CVector::new(v).unwrap(), p_acc, p_rej),
        BTreeSet::new(),
    )
    .unwrap()
}

pub fn random_dfa(rng: &mut impl Rng, n: usize, alphabet: &Alphabet) -> Dfa {
    let delta = (0..n)
        .map(|_| (0..alphabet.len()).map(|_| rng.gen_range(0..n)).collect())
        .collect();
    let accepting = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
    Dfa::new(alphabet.clone(), delta, 0, accepting).unwrap()
}

pub fn random_word(rng: &mut impl Rng, alphabet: &Alphabet, max_len: usize) -> Word {
    let len = rng.gen_range(0..=max_len);
    (0..len)
        .map(|_| alphabet.symbols()[rng.gen_range(0..alphabet.len())])
        .collect()
}

/// Conjugates every matrix and the start vector by a random permutation.
pub fn permuted_moqfa(rng: &mut impl Rng, m: &MoQfa) -> MoQfa {
    let n = m.n_states();
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let p = CMatrix::permutation(&perm).unwrap();
    let pt = p.conjugate_transpose();
    let transitions = m
        .transitions
        .iter()
        .map(|(&c, u)| (c, p.mat_mul(u).unwrap().mat_mul(&pt).unwrap()))
        .collect();
    MoQfa::new(
        m.alphabet.clone(),
        transitions,
        p.mat_vec(&m.initial).unwrap(),
        m.accepting.iter().map(|&q| perm[q]).collect(),
    )
    .unwrap()
}

/// Dense column-vector product, independent of the sparse kernels.
pub fn dense_apply(u: &[Vec<Complex64>], v: &[Complex64]) -> Vec<Complex64> {
    u.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// Reference MM-QFA simulation on dense matrices: returns `(p_acc, p_rej)`
/// for `w$`.
pub fn dense_mm_run(m: &MmQfa, w: &[char]) -> (f64, f64) {
    let mut v: Vec<Complex64> = m.initial.vector.as_slice().to_vec();
    let (mut acc, mut rej) = (m.initial.p_acc, m.initial.p_rej);
    for c in w.iter().copied().chain([END_MARKER]) {
        let dense = m.transitions[&c].to_dense();
        v = dense_apply(&dense, &v);
        for (q, kind) in m.kinds.iter().enumerate() {
            match kind {
                StateKind::Accepting => acc += v[q].norm_sqr(),
                StateKind::Rejecting => rej += v[q].norm_sqr(),
                StateKind::NonHalting => continue,
            }
            v[q] = Complex64::new(0.0, 0.0);
        }
    }
    (acc, rej)
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}
