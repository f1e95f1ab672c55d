//! Complex vectors and matrices.
//!
//! `CMatrix` has a dense interface (shape, entry lookup, row access) but keeps
//! its entries in compressed sparse row form. Exact zeros are never stored.

use std::ops::Index;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A complex amplitude.
pub type Amplitude = Complex64;

/// Default tolerance for structural checks.
pub const DEFAULT_TOL: f64 = 1e-9;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Shorthand for a real amplitude.
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn check_finite(z: Complex64, what: impl FnOnce() -> String) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(what()))
    }
}

/// A complex column vector of positive dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct CVector(Vec<Complex64>);

impl CVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty);
        }
        for (i, z) in entries.iter().enumerate() {
            check_finite(*z, || format!("vector entry {i}"))?;
        }
        Ok(CVector(entries))
    }

    pub fn from_real(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&x| re(x)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        CVector(vec![ZERO; dim])
    }

    /// The standard basis vector `e_index`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
        let mut v = vec![ZERO; dim];
        v[index] = ONE;
        Ok(CVector(v))
    }

    pub(crate) fn from_vec_unchecked(entries: Vec<Complex64>) -> Self {
        CVector(entries)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.0
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Squared norm of the entries at `indices`.
    pub fn weight_on(&self, indices: impl IntoIterator<Item = usize>) -> f64 {
        indices.into_iter().map(|i| self.0[i].norm_sqr()).sum()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        CVector(self.0.iter().map(|z| z * factor).collect())
    }

    pub fn add(&self, other: &CVector) -> Result<Self> {
        self.same_dim(other, "vector addition")?;
        Ok(CVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &CVector) -> Result<Self> {
        self.same_dim(other, "vector subtraction")?;
        Ok(CVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    /// Hermitian inner product, conjugate-linear in `self`.
    pub fn inner(&self, other: &CVector) -> Result<Complex64> {
        self.same_dim(other, "inner product")?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum())
    }

    /// Bilinear pairing without conjugation.
    pub fn dot(&self, other: &CVector) -> Result<Complex64> {
        self.same_dim(other, "dot product")?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum())
    }

    /// Kronecker product; index `i * other.dim() + k` holds `self[i] * other[k]`.
    pub fn tensor_product(&self, other: &CVector) -> Result<Self> {
        let dim = self
            .dim()
            .checked_mul(other.dim())
            .ok_or(Error::DimensionOverflow("vector tensor product"))?;
        let mut out = Vec::with_capacity(dim);
        for a in &self.0 {
            for b in &other.0 {
                out.push(a * b);
            }
        }
        Ok(CVector(out))
    }

    /// Concatenation, the vector counterpart of `direct_sum`.
    pub fn concat(&self, other: &CVector) -> Self {
        let mut out = self.0.clone();
        out.extend_from_slice(&other.0);
        CVector(out)
    }

    pub fn conj(&self) -> Self {
        CVector(self.0.iter().map(|z| z.conj()).collect())
    }

    pub fn max_abs_diff(&self, other: &CVector) -> Result<f64> {
        self.same_dim(other, "vector comparison")?;
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn same_dim(&self, other: &CVector, context: &'static str) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                context,
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }
}

impl Index<usize> for CVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

/// A complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            row_ptr: vec![0; rows + 1],
            col_idx: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        CMatrix {
            rows: n,
            cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            vals: vec![ONE; n],
        }
    }

    /// Builds a matrix from dense rows.
    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let n_rows = rows.len();
        if n_rows == 0 {
            return Err(Error::Empty);
        }
        let n_cols = rows[0].len();
        if n_cols == 0 {
            return Err(Error::Empty);
        }
        let mut m = CMatrix::zeros(n_rows, n_cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::DimensionMismatch {
                    context: "ragged matrix rows",
                    left: n_cols,
                    right: row.len(),
                });
            }
            for (j, &z) in row.iter().enumerate() {
                check_finite(z, || format!("matrix entry ({i}, {j})"))?;
                if z != ZERO {
                    m.col_idx.push(j);
                    m.vals.push(z);
                }
            }
            m.row_ptr[i + 1] = m.col_idx.len();
        }
        Ok(m)
    }

    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.as_ref().iter().map(|&x| re(x)).collect())
                .collect(),
        )
    }

    /// Builds a matrix from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        entries: impl IntoIterator<Item = (usize, usize, Complex64)>,
    ) -> Result<Self> {
        let mut buckets: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); rows];
        for (i, j, z) in entries {
            if i >= rows {
                return Err(Error::IndexOutOfRange { index: i, dim: rows });
            }
            if j >= cols {
                return Err(Error::IndexOutOfRange { index: j, dim: cols });
            }
            check_finite(z, || format!("matrix entry ({i}, {j})"))?;
            buckets[i].push((j, z));
        }
        let mut m = CMatrix::zeros(rows, cols);
        for (i, mut bucket) in buckets.into_iter().enumerate() {
            bucket.sort_by_key(|&(j, _)| j);
            let mut k = 0;
            while k < bucket.len() {
                let j = bucket[k].0;
                let mut sum = ZERO;
                while k < bucket.len() && bucket[k].0 == j {
                    sum += bucket[k].1;
                    k += 1;
                }
                if sum != ZERO {
                    m.col_idx.push(j);
                    m.vals.push(sum);
                }
            }
            m.row_ptr[i + 1] = m.col_idx.len();
        }
        Ok(m)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = CMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let z = f(i, j);
                if z != ZERO {
                    m.col_idx.push(j);
                    m.vals.push(z);
                }
            }
            m.row_ptr[i + 1] = m.col_idx.len();
        }
        m
    }

    /// The permutation matrix sending `e_j` to `e_{perm[j]}`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n {
                return Err(Error::IndexOutOfRange { index: p, dim: n });
            }
            if seen[p] {
                return Err(Error::Precondition(format!("{p} appears twice in permutation")));
            }
            seen[p] = true;
        }
        Self::from_triplets(n, n, perm.iter().enumerate().map(|(j, &i)| (i, j, ONE)))
    }

    /// `I_offset ⊕ block ⊕ I_rest`, an `n × n` matrix.
    pub fn embed(n: usize, offset: usize, block: &CMatrix) -> Result<Self> {
        if !block.is_square() {
            return Err(Error::NotSquare {
                rows: block.rows,
                cols: block.cols,
            });
        }
        let end = offset + block.rows;
        if end > n {
            return Err(Error::IndexOutOfRange { index: end - 1, dim: n });
        }
        let entries = (0..offset)
            .map(|i| (i, i, ONE))
            .chain(block.iter().map(|(i, j, z)| (i + offset, j + offset, z)))
            .chain((end..n).map(|i| (i, i, ONE)));
        Self::from_triplets(n, n, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Number of stored (nonzero) entries.
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        assert!(i < self.rows && j < self.cols, "matrix index out of range");
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[span.clone()].binary_search(&j) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => ZERO,
        }
    }

    /// Nonzero entries of row `i` as `(col, value)` in increasing column order.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    /// All nonzero entries as `(row, col, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.rows).flat_map(move |i| self.row(i).map(move |(j, z)| (i, j, z)))
    }

    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let mut out = vec![vec![ZERO; self.cols]; self.rows];
        for (i, j, z) in self.iter() {
            out[i][j] = z;
        }
        out
    }

    /// Matrix-vector product `M v`.
    pub fn mat_vec(&self, v: &CVector) -> Result<CVector> {
        if v.dim() != self.cols {
            return Err(Error::DimensionMismatch {
                context: "matrix-vector product",
                left: self.cols,
                right: v.dim(),
            });
        }
        let x = v.as_slice();
        let out = (0..self.rows)
            .map(|i| self.row(i).map(|(j, a)| a * x[j]).sum())
            .collect();
        Ok(CVector(out))
    }

    /// Row-vector product `vᵀ M`.
    pub fn vec_mat(&self, v: &CVector) -> Result<CVector> {
        if v.dim() != self.rows {
            return Err(Error::DimensionMismatch {
                context: "vector-matrix product",
                left: self.rows,
                right: v.dim(),
            });
        }
        let mut out = vec![ZERO; self.cols];
        for (i, j, a) in self.iter() {
            out[j] += v[i] * a;
        }
        Ok(CVector(out))
    }

    pub fn mat_mul(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                context: "matrix product",
                left: self.cols,
                right: other.rows,
            });
        }
        let mut out = CMatrix::zeros(self.rows, other.cols);
        let mut acc = vec![ZERO; other.cols];
        let mut mark = vec![usize::MAX; other.cols];
        let mut touched = Vec::new();
        for i in 0..self.rows {
            touched.clear();
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    if mark[j] != i {
                        mark[j] = i;
                        acc[j] = ZERO;
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                if acc[j] != ZERO {
                    out.col_idx.push(j);
                    out.vals.push(acc[j]);
                }
            }
            out.row_ptr[i + 1] = out.col_idx.len();
        }
        Ok(out)
    }

    /// Kronecker product: entry `(i·rB + k, j·cB + l)` is `A[i][j] · B[k][l]`.
    pub fn tensor_product(&self, other: &CMatrix) -> Result<CMatrix> {
        let rows = self
            .rows
            .checked_mul(other.rows)
            .ok_or(Error::DimensionOverflow("tensor product"))?;
        let cols = self
            .cols
            .checked_mul(other.cols)
            .ok_or(Error::DimensionOverflow("tensor product"))?;
        let mut out = CMatrix::zeros(rows, cols);
        for i in 0..self.rows {
            for k in 0..other.rows {
                for (j, a) in self.row(i) {
                    for (l, b) in other.row(k) {
                        let z = a * b;
                        if z != ZERO {
                            out.col_idx.push(j * other.cols + l);
                            out.vals.push(z);
                        }
                    }
                }
                out.row_ptr[i * other.rows + k + 1] = out.col_idx.len();
            }
        }
        Ok(out)
    }

    /// Block-diagonal `self ⊕ other`; both blocks must be square.
    pub fn direct_sum(&self, other: &CMatrix) -> Result<CMatrix> {
        for m in [self, other] {
            if !m.is_square() {
                return Err(Error::NotSquare {
                    rows: m.rows,
                    cols: m.cols,
                });
            }
        }
        let n = self.rows + other.rows;
        let offset = self.rows;
        let mut out = self.clone();
        out.rows = n;
        out.cols = n;
        for i in 0..other.rows {
            for (j, z) in other.row(i) {
                out.col_idx.push(j + offset);
                out.vals.push(z);
            }
            out.row_ptr.push(out.col_idx.len());
        }
        Ok(out)
    }

    pub fn transpose(&self) -> CMatrix {
        let mut counts = vec![0usize; self.cols + 1];
        for &j in &self.col_idx {
            counts[j + 1] += 1;
        }
        for j in 0..self.cols {
            counts[j + 1] += counts[j];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0; self.nnz()];
        let mut vals = vec![ZERO; self.nnz()];
        for (i, j, z) in self.iter() {
            let slot = next[j];
            col_idx[slot] = i;
            vals[slot] = z;
            next[j] += 1;
        }
        CMatrix {
            rows: self.cols,
            cols: self.rows,
            row_ptr,
            col_idx,
            vals,
        }
    }

    pub fn conj(&self) -> CMatrix {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|z| *z = z.conj());
        out
    }

    pub fn conjugate_transpose(&self) -> CMatrix {
        self.transpose().conj()
    }

    pub fn scale(&self, factor: Complex64) -> CMatrix {
        Self::from_triplets(self.rows, self.cols, self.iter().map(|(i, j, z)| (i, j, z * factor)))
            .expect("scaling preserves shape")
    }

    pub fn add(&self, other: &CMatrix) -> Result<CMatrix> {
        self.same_shape(other, "matrix addition")?;
        Self::from_triplets(self.rows, self.cols, self.iter().chain(other.iter()))
    }

    pub fn sub(&self, other: &CMatrix) -> Result<CMatrix> {
        self.same_shape(other, "matrix subtraction")?;
        Self::from_triplets(
            self.rows,
            self.cols,
            self.iter().chain(other.iter().map(|(i, j, z)| (i, j, -z))),
        )
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> Result<f64> {
        let d = self.sub(other)?;
        Ok(d.vals.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    /// Largest `|(A†A − I)_{ij}|` together with its position.
    pub fn unitarity_defect(&self) -> Result<(f64, usize, usize)> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let gram = self.conjugate_transpose().mat_mul(self)?;
        let mut worst = (0.0, 0, 0);
        for i in 0..self.rows {
            let mut diag_seen = false;
            for (j, z) in gram.row(i) {
                let dev = if i == j {
                    diag_seen = true;
                    (z - ONE).norm()
                } else {
                    z.norm()
                };
                if dev > worst.0 {
                    worst = (dev, i, j);
                }
            }
            if !diag_seen && 1.0 > worst.0 {
                worst = (1.0, i, i);
            }
        }
        Ok(worst)
    }

    /// True iff square and `max |A†A − I| ≤ tol`.
    pub fn is_unitary(&self, tol: f64) -> bool {
        matches!(self.unitarity_defect(), Ok((dev, _, _)) if dev <= tol)
    }

    /// The diagonal 0/1 projector onto the span of `indices`.
    pub fn projector(dim: usize, indices: impl IntoIterator<Item = usize>) -> Result<CMatrix> {
        let mut on = vec![false; dim];
        for i in indices {
            if i >= dim {
                return Err(Error::IndexOutOfRange { index: i, dim });
            }
            on[i] = true;
        }
        Self::from_triplets(dim, dim, (0..dim).filter(|&i| on[i]).map(|i| (i, i, ONE)))
    }

    /// Keeps only the listed rows and columns, in the given order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Result<CMatrix> {
        let mut col_pos = vec![usize::MAX; self.cols];
        for (k, &j) in cols.iter().enumerate() {
            if j >= self.cols {
                return Err(Error::IndexOutOfRange { index: j, dim: self.cols });
            }
            col_pos[j] = k;
        }
        let mut entries = Vec::new();
        for (r, &i) in rows.iter().enumerate() {
            if i >= self.rows {
                return Err(Error::IndexOutOfRange { index: i, dim: self.rows });
            }
            for (j, z) in self.row(i) {
                if col_pos[j] != usize::MAX {
                    entries.push((r, col_pos[j], z));
                }
            }
        }
        Self::from_triplets(rows.len(), cols.len(), entries)
    }

    pub fn is_finite(&self) -> bool {
        self.vals.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// True iff every stored entry has zero imaginary part within `tol`.
    pub fn is_real(&self, tol: f64) -> bool {
        self.vals.iter().all(|z| z.im.abs() <= tol)
    }

    fn same_shape(&self, other: &CMatrix, context: &'static str) -> Result<()> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch {
                context,
                left: self.rows,
                right: other.rows,
            });
        }
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                context,
                left: self.cols,
                right: other.cols,
            });
        }
        Ok(())
    }
}

/// Total variation distance `½ Σ |pᵢ − qᵢ|` between two distributions.
pub fn variation_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::MalformedDistribution(format!(
            "lengths differ ({} vs {})",
            p.len(),
            q.len()
        )));
    }
    for (name, d) in [("first", p), ("second", q)] {
        if let Some(x) = d.iter().find(|x| !x.is_finite() || **x < -DEFAULT_TOL) {
            return Err(Error::MalformedDistribution(format!("{name} has entry {x}")));
        }
        let total: f64 = d.iter().sum();
        if (total - 1.0).abs() > DEFAULT_TOL {
            return Err(Error::MalformedDistribution(format!("{name} sums to {total}")));
        }
    }
    let d: f64 = p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
    Ok(d.clamp(0.0, 1.0))
}

/// Least `n ≤ cap` with `dim² · max_j ‖(I − Uⁿ) e_j‖² < eps`.
///
/// The basis-vector bound is inflated by `dim²` so that it covers every unit
/// vector, not just the standard basis.
pub fn find_stabilizing_power(u: &CMatrix, eps: f64, cap: u64) -> Result<u64> {
    if !(eps > 0.0) {
        return Err(Error::Precondition(format!("eps must be positive, got {eps}")));
    }
    let (dev, _, _) = u.unitarity_defect()?;
    if dev > DEFAULT_TOL {
        return Err(Error::NotUnitary {
            tol: DEFAULT_TOL,
            deviation: dev,
        });
    }
    let dim = u.rows() as f64;
    let mut power = u.clone();
    for n in 1..=cap {
        let worst = (0..u.cols())
            .map(|j| {
                (0..u.rows())
                    .map(|i| {
                        let delta = if i == j { ONE } else { ZERO };
                        (delta - power.get(i, j)).norm_sqr()
                    })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        if dim * dim * worst < eps {
            return Ok(n);
        }
        power = u.mat_mul(&power)?;
    }
    Err(Error::SearchExhausted { cap })
}
