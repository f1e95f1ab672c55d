use std::collections::{BTreeMap, BTreeSet};

use crate::classical::linsys::bilinearize;
use crate::error::{Error, Result};
use crate::qfa::{Alphabet, MoQfa};

/// Tolerance on row sums of stochastic matrices and start distributions.
pub const STOCHASTIC_TOL: f64 = 1e-9;

/// Constants produced while normalizing a generalized automaton into a PFA.
#[derive(Clone, Debug, PartialEq)]
pub struct PfaNormalization {
    /// Cut-point of the source automaton.
    pub source_cut_point: f64,
    /// Dimension of the real system before bordering.
    pub real_dim: usize,
    /// Whether real and imaginary parts were tracked separately.
    pub imaginary_track: bool,
    /// Whether a constant coordinate carrying `-λ` was appended.
    pub cut_slot: bool,
    /// Dimension after adding the two border states.
    pub bordered_dim: usize,
    /// Per-symbol uniform shift `c_σ` added to every entry.
    pub shifts: BTreeMap<char, f64>,
    /// Per-symbol row-sum divisor `bordered_dim * c_σ`.
    pub scales: BTreeMap<char, f64>,
    /// Start distribution is `start_offset * 1 + initial / start_scale`.
    pub start_offset: f64,
    pub start_scale: f64,
    /// Range of the centered functional, mapped affinely onto `[0, 1]`.
    pub functional_lo: f64,
    pub functional_hi: f64,
}

/// Probabilistic finite automaton over row-stochastic matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct Pfa {
    pub alphabet: Alphabet,
    pub matrices: BTreeMap<char, Vec<Vec<f64>>>,
    pub start: Vec<f64>,
    pub accepting: BTreeSet<usize>,
    pub cut_point: f64,
    pub normalization: Option<PfaNormalization>,
}

fn check_distribution(row: &[f64], what: &str) -> Result<()> {
    if let Some(x) = row.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::MalformedDistribution(format!("{what} has entry {x}")));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > STOCHASTIC_TOL {
        return Err(Error::MalformedDistribution(format!("{what} sums to {sum}")));
    }
    Ok(())
}

impl Pfa {
    pub fn new(
        alphabet: Alphabet,
        matrices: BTreeMap<char, Vec<Vec<f64>>>,
        start: Vec<f64>,
        accepting: BTreeSet<usize>,
        cut_point: f64,
    ) -> Result<Self> {
        let n = start.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        check_distribution(&start, "start distribution")?;
        for &c in alphabet.symbols() {
            let m = matrices
                .get(&c)
                .ok_or_else(|| Error::Malformed(format!("no matrix for symbol {c:?}")))?;
            if m.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "PFA matrix rows",
                    left: n,
                    right: m.len(),
                });
            }
            for (i, row) in m.iter().enumerate() {
                if row.len() != n {
                    return Err(Error::DimensionMismatch {
                        context: "PFA matrix columns",
                        left: n,
                        right: row.len(),
                    });
                }
                check_distribution(row, &format!("row {i} of the {c:?} matrix"))?;
            }
        }
        if let Some(c) = matrices.keys().find(|c| !alphabet.contains(**c)) {
            return Err(Error::Malformed(format!("matrix for symbol {c:?} outside the alphabet")));
        }
        if let Some(&q) = accepting.iter().find(|&&q| q >= n) {
            return Err(Error::IndexOutOfRange { index: q, dim: n });
        }
        if !cut_point.is_finite() {
            return Err(Error::NonFinite("PFA cut-point".into()));
        }
        Ok(Pfa {
            alphabet,
            matrices,
            start,
            accepting,
            cut_point,
            normalization: None,
        })
    }

    pub fn n_states(&self) -> usize {
        self.start.len()
    }

    pub fn distribution_after(&self, w: &[char]) -> Result<Vec<f64>> {
        self.alphabet.check_word(w)?;
        let mut x = self.start.clone();
        for c in w {
            let m = &self.matrices[c];
            let mut y = vec![0.0; x.len()];
            for (xi, row) in x.iter().zip(m) {
                if *xi != 0.0 {
                    for (yj, mij) in y.iter_mut().zip(row) {
                        *yj += xi * mij;
                    }
                }
            }
            x = y;
        }
        Ok(x)
    }

    pub fn accept_prob(&self, w: &[char]) -> Result<f64> {
        let x = self.distribution_after(w)?;
        Ok(self.accepting.iter().map(|&q| x[q]).sum())
    }

    /// Largest deviation of a row sum from one, over all matrices.
    pub fn stochasticity_defect(&self) -> f64 {
        self.matrices
            .values()
            .flatten()
            .map(|row| (row.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Real generalized automaton with row-vector convention.
struct RealSystem {
    initial: Vec<f64>,
    matrices: BTreeMap<char, Vec<Vec<f64>>>,
    functional: Vec<f64>,
}

/// PFA accepting `{w : p(w) > cut_point}` with its own cut-point, where `p` is
/// the acceptance probability of `m`.
///
/// The bilinear system is made real, extended by a coordinate holding `-λ`,
/// bordered so that every row and column sums to zero, shifted entrywise to
/// nonnegativity and rescaled. The start distribution is the uniform vector
/// plus a scaled copy of the zero-sum initial vector; the functional is
/// centered and mapped to `[0, 1]`, and realized by splitting each state into
/// an accepting and a rejecting copy.
pub fn moqfa_to_pfa(m: &MoQfa, cut_point: f64) -> Result<Pfa> {
    if !cut_point.is_finite() {
        return Err(Error::NonFinite("cut-point".into()));
    }
    let sys = bilinearize(m)?;
    let imaginary_track = std::iter::once(&sys.initial)
        .chain(std::iter::once(&sys.functional))
        .any(|v| v.as_slice().iter().any(|z| z.im != 0.0))
        || sys.matrices.values().any(|u| u.iter().any(|(_, _, z)| z.im != 0.0));

    let mut real = realify(&sys, imaginary_track);
    let real_dim = real.initial.len();
    let cut_slot = cut_point != 0.0;
    if cut_slot {
        real.initial.push(1.0);
        real.functional.push(-cut_point);
        for mat in real.matrices.values_mut() {
            for row in mat.iter_mut() {
                row.push(0.0);
            }
            let mut last = vec![0.0; real_dim + 1];
            last[real_dim] = 1.0;
            mat.push(last);
        }
    }

    let r = real.initial.len();
    let d = r + 2;
    let border = |mat: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        let mut b = vec![vec![0.0; d]; d];
        let mut total = 0.0;
        for i in 0..r {
            let row_sum: f64 = mat[i].iter().sum();
            b[i + 1][0] = -row_sum;
            total += row_sum;
            b[i + 1][1..=r].copy_from_slice(&mat[i]);
        }
        for j in 0..r {
            b[d - 1][j + 1] = -(0..r).map(|i| mat[i][j]).sum::<f64>();
        }
        b[d - 1][0] = total;
        b
    };

    let mut shifts = BTreeMap::new();
    let mut scales = BTreeMap::new();
    let mut stochastic = BTreeMap::new();
    for (&c, mat) in &real.matrices {
        let b = border(mat);
        let min = b.iter().flatten().copied().fold(0.0, f64::min);
        let shift = if min < 0.0 { -min } else { 1.0 };
        let scale = d as f64 * shift;
        let p: Vec<Vec<f64>> = b
            .iter()
            .map(|row| row.iter().map(|x| ((x + shift) / scale).max(0.0)).collect())
            .collect();
        shifts.insert(c, shift);
        scales.insert(c, scale);
        stochastic.insert(c, p);
    }

    let mut initial = vec![0.0; d];
    initial[0] = -real.initial.iter().sum::<f64>();
    initial[1..=r].copy_from_slice(&real.initial);
    let worst = initial.iter().copied().fold(0.0, f64::min);
    let start_offset = 1.0 / d as f64;
    let start_scale = if worst < 0.0 { -worst * d as f64 } else { 1.0 };
    let start: Vec<f64> = initial
        .iter()
        .map(|x| (start_offset + x / start_scale).max(0.0))
        .collect();

    let mut functional = vec![0.0; d];
    functional[1..=r].copy_from_slice(&real.functional);
    let mean = functional.iter().sum::<f64>() / d as f64;
    functional.iter_mut().for_each(|x| *x -= mean);
    let lo = functional.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = functional.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let g: Vec<f64> = if span > 0.0 {
        functional.iter().map(|x| ((x - lo) / span).clamp(0.0, 1.0)).collect()
    } else {
        vec![0.0; d]
    };
    let pfa_cut = if span > 0.0 { -lo / span } else { 0.0 };

    // State 2k accepts, 2k + 1 rejects; both behave like state k.
    let split_row = |row: &[f64]| -> Vec<f64> {
        row.iter()
            .zip(&g)
            .flat_map(|(p, gk)| [p * gk, p * (1.0 - gk)])
            .collect()
    };
    let matrices = stochastic
        .iter()
        .map(|(&c, p)| {
            let rows = p
                .iter()
                .flat_map(|row| {
                    let split = split_row(row);
                    [split.clone(), split]
                })
                .collect();
            (c, rows)
        })
        .collect();
    let mut pfa = Pfa::new(
        m.alphabet.clone(),
        matrices,
        split_row(&start),
        (0..d).map(|k| 2 * k).collect(),
        pfa_cut,
    )?;
    pfa.normalization = Some(PfaNormalization {
        source_cut_point: cut_point,
        real_dim,
        imaginary_track,
        cut_slot,
        bordered_dim: d,
        shifts,
        scales,
        start_offset,
        start_scale,
        functional_lo: lo,
        functional_hi: hi,
    });
    Ok(pfa)
}

fn realify(sys: &crate::classical::linsys::LinearSystem, imaginary_track: bool) -> RealSystem {
    let d = sys.dim();
    if !imaginary_track {
        return RealSystem {
            initial: sys.initial.as_slice().iter().map(|z| z.re).collect(),
            matrices: sys
                .matrices
                .iter()
                .map(|(&c, u)| {
                    let mut dense = vec![vec![0.0; d]; d];
                    for (i, j, z) in u.iter() {
                        dense[i][j] = z.re;
                    }
                    (c, dense)
                })
                .collect(),
            functional: sys.functional.as_slice().iter().map(|z| z.re).collect(),
        };
    }
    // A row vector s = a + ib is stored as [a, b]; right multiplication by
    // M = P + iQ becomes [a, b] · [[P, Q], [-Q, P]], and Re(s · f) pairs with
    // [Re f, -Im f].
    let initial = sys
        .initial
        .as_slice()
        .iter()
        .map(|z| z.re)
        .chain(sys.initial.as_slice().iter().map(|z| z.im))
        .collect();
    let functional = sys
        .functional
        .as_slice()
        .iter()
        .map(|z| z.re)
        .chain(sys.functional.as_slice().iter().map(|z| -z.im))
        .collect();
    let matrices = sys
        .matrices
        .iter()
        .map(|(&c, u)| {
            let mut dense = vec![vec![0.0; 2 * d]; 2 * d];
            for (i, j, z) in u.iter() {
                dense[i][j] = z.re;
                dense[i][d + j] = z.im;
                dense[d + i][j] = -z.im;
                dense[d + i][d + j] = z.re;
            }
            (c, dense)
        })
        .collect();
    RealSystem {
        initial,
        matrices,
        functional,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{CMatrix, CVector};
    use crate::qfa::END_MARKER;
    use num_complex::Complex64;

    fn rotation() -> MoQfa {
        let alphabet = Alphabet::parse("ab").unwrap();
        let u = CMatrix::from_real_rows(&[[0.6, 0.8], [-0.8, 0.6]]).unwrap();
        let mut t = BTreeMap::new();
        t.insert('b', u.transpose());
        t.insert('a', u);
        t.insert(END_MARKER, CMatrix::identity(2));
        MoQfa::new(alphabet, t, CVector::basis(2, 0).unwrap(), BTreeSet::from([1])).unwrap()
    }

    #[test]
    fn rotation_classification_is_preserved() {
        let m = rotation();
        let pfa = moqfa_to_pfa(&m, 0.0).unwrap();
        assert!(pfa.stochasticity_defect() < STOCHASTIC_TOL);
        for w in m.alphabet.words_up_to(6) {
            let a = w.iter().filter(|&&c| c == 'a').count();
            let b = w.len() - a;
            let gap = pfa.accept_prob(&w).unwrap() - pfa.cut_point;
            if a != b {
                assert!(gap > 1e-12, "{w:?}: {gap}");
            } else {
                assert!(gap.abs() < 1e-12, "{w:?}: {gap}");
            }
        }
    }

    #[test]
    fn complex_entries_use_imaginary_track() {
        let alphabet = Alphabet::parse("a").unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let i = Complex64::new(0.0, h);
        let u = CMatrix::from_rows(vec![
            vec![Complex64::new(h, 0.0), i],
            vec![i, Complex64::new(h, 0.0)],
        ])
        .unwrap();
        let mut t = BTreeMap::new();
        t.insert('a', u);
        t.insert(END_MARKER, CMatrix::identity(2));
        let m = MoQfa::new(alphabet, t, CVector::basis(2, 0).unwrap(), BTreeSet::from([0])).unwrap();
        let pfa = moqfa_to_pfa(&m, 0.25).unwrap();
        let norm = pfa.normalization.as_ref().unwrap();
        assert!(norm.imaginary_track && norm.cut_slot);
        assert_eq!(norm.bordered_dim, 2 * 4 + 1 + 2);
        for w in m.alphabet.words_up_to(6) {
            let src = m.accept_prob(&w).unwrap() - 0.25;
            let dst = pfa.accept_prob(&w).unwrap() - pfa.cut_point;
            assert_eq!(src > 0.0, dst > 0.0);
        }
    }

    #[test]
    fn rejects_non_stochastic_input() {
        let alphabet = Alphabet::parse("a").unwrap();
        let bad = BTreeMap::from([('a', vec![vec![0.5, 0.4], vec![0.0, 1.0]])]);
        assert!(Pfa::new(alphabet, bad, vec![1.0, 0.0], BTreeSet::new(), 0.5).is_err());
    }
}
