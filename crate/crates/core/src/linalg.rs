//! Dense complex matrix kernel.
//!
//! Everything here works on small matrices (side length at most 16 in
//! practice): a cyclic Jacobi eigensolver for Hermitian matrices, Kronecker
//! products, partial traces and density-matrix validation.
//!
//! Tensor convention: subsystems are laid out row-major, the first label is
//! the most significant index.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{DensityProperty, Error, Result};
use crate::states::DensityMatrix;

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Off-diagonal Frobenius mass below which Jacobi stops (relative to
/// `max(1, ‖A‖_F)`).
pub const JACOBI_TOL: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Maximum entrywise deviation from Hermiticity accepted by [`hermitian_eig`].
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Tolerances used by [`validate_density`].
pub const DENSITY_HERMITIAN_TOL: f64 = 1e-8;
pub const DENSITY_TRACE_TOL: f64 = 1e-8;
pub const DENSITY_CLAMP_TOL: f64 = 1e-8;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Build from row-major entries. Rejects a length mismatch and non-finite
    /// entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::not_density(
                DensityProperty::Finite,
                "matrix has NaN or infinite entries",
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    /// `|v⟩⟨v|`.
    pub fn outer(v: &[C64]) -> Self {
        Self::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
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

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |m - m†|` over all entries.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        out
    }

    pub fn mat_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn kron(&self, other: &Self) -> Self {
        kron(self, other)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Kronecker product: entry `(i·b.rows + k, j·b.cols + l)` is `a(i,j)·b(k,l)`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a[(i, j)];
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out[(i * b.rows + k, j * b.cols + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).expect("finite")
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_vec(2, 2, vec![ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO]).expect("finite")
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::diag(&[1.0, -1.0])
}

/// Eigendecomposition of a Hermitian matrix. Eigenvalues are sorted in
/// descending order; `vectors` holds the matching eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `V Λ V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_values(|x| x)
    }

    /// `V f(Λ) V†`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        let fv: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        ComplexMatrix::from_fn(n, n, |i, j| (0..n).map(|k| v[(i, k)] * v[(j, k)].conj() * fv[k]).sum())
    }
}

pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEigen> {
    let n = check_hermitian(m)?;
    let mut a = symmetrized(m);
    let mut v = ComplexMatrix::identity(n).data;
    jacobi_in_place(&mut a, n, Some(&mut v))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[y * n + y].re.total_cmp(&a[x * n + x].re));
    let values = order.iter().map(|&k| a[k * n + k].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[i * n + order[j]]);
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues only (descending). Skips eigenvector accumulation.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let n = check_hermitian(m)?;
    let mut a = symmetrized(m);
    jacobi_in_place(&mut a, n, None)?;
    let mut values: Vec<f64> = (0..n).map(|k| a[k * n + k].re).collect();
    values.sort_by(|x, y| y.total_cmp(x));
    Ok(values)
}

/// Eigenvalues of a Hermitian matrix stored row-major in `buf` (overwritten).
/// Skips the Hermiticity check; for inner loops whose inputs are Hermitian by
/// construction.
pub(crate) fn eigenvalues_unchecked(buf: &mut [C64], n: usize) -> Result<()> {
    jacobi_in_place(buf, n, None)
}

fn check_hermitian(m: &ComplexMatrix) -> Result<usize> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    let dev = m.hermitian_deviation();
    if !(dev <= HERMITIAN_TOL) {
        return Err(Error::NotHermitian(dev));
    }
    Ok(m.rows)
}

fn symmetrized(m: &ComplexMatrix) -> Vec<C64> {
    let n = m.rows;
    let mut a = vec![ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
        }
    }
    a
}

/// Cyclic complex Jacobi. On return the diagonal of `a` holds the eigenvalues
/// and, if given, the columns of `v` the eigenvectors (`v` must start as the
/// identity or any unitary to be right-multiplied).
fn jacobi_in_place(a: &mut [C64], n: usize, mut v: Option<&mut [C64]>) -> Result<()> {
    if n <= 1 {
        if n == 1 {
            a[0].im = 0.0;
        }
        return Ok(());
    }
    let scale = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1.0);
    let threshold = JACOBI_TOL * scale;
    for _sweep in 0..=JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    off += a[p * n + q].norm_sqr();
                }
            }
        }
        if off.sqrt() < threshold {
            for k in 0..n {
                a[k * n + k].im = 0.0;
            }
            return Ok(());
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let r = apq.norm();
                if r < f64::MIN_POSITIVE {
                    continue;
                }
                let phase = apq / r;
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // U restricted to (p, q): [[c, s], [-s·ē, c·ē]] with e = a_pq/|a_pq|.
                let pc = phase.conj();
                let u_pp = C64::new(c, 0.0);
                let u_pq = C64::new(s, 0.0);
                let u_qp = -pc * s;
                let u_qq = pc * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * u_pp + akq * u_qp;
                    a[k * n + q] = akp * u_pq + akq * u_qq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = u_pp.conj() * apk + u_qp.conj() * aqk;
                    a[q * n + k] = u_pq.conj() * apk + u_qq.conj() * aqk;
                }
                a[p * n + q] = ZERO;
                a[q * n + p] = ZERO;
                a[p * n + p].im = 0.0;
                a[q * n + q].im = 0.0;
                if let Some(v) = v.as_deref_mut() {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = vkp * u_pp + vkq * u_qp;
                        v[k * n + q] = vkp * u_pq + vkq * u_qq;
                    }
                }
            }
        }
    }
    Err(Error::NoConvergence(JACOBI_MAX_SWEEPS))
}

/// Ordered subsystem dimensions with unique party labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionList {
    dims: Vec<usize>,
    labels: Vec<String>,
}

impl DimensionList {
    pub fn new(dims: Vec<usize>, labels: Vec<String>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::DimensionMismatch("at least one subsystem is required".into()));
        }
        if dims.len() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} dimensions but {} labels",
                dims.len(),
                labels.len()
            )));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::DimensionMismatch(format!("subsystem dimension {d} is below 2")));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::InvalidArgument(format!("duplicate party label `{l}`")));
            }
        }
        Ok(Self { dims, labels })
    }

    /// `n` qubits labelled `A`, `B`, `C`, ...
    pub fn qubits(n: usize) -> Self {
        assert!((1..=26).contains(&n), "qubit count must be in 1..=26");
        let labels = (0..n).map(|i| char::from(b'A' + i as u8).to_string()).collect();
        Self {
            dims: vec![2; n],
            labels,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Subsystem indices for a label set, in the order given.
    pub fn indices<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(labels.len());
        for l in labels {
            let i = self.index_of(l.as_ref())?;
            if out.contains(&i) {
                return Err(Error::OverlappingParties(l.as_ref().to_string()));
            }
            out.push(i);
        }
        Ok(out)
    }

    /// The sub-list for the given subsystem indices, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            dims: indices.iter().map(|&i| self.dims[i]).collect(),
            labels: indices.iter().map(|&i| self.labels[i].clone()).collect(),
        }
    }

    /// Product of the dimensions at `indices`.
    pub fn dim_of(&self, indices: &[usize]) -> usize {
        indices.iter().map(|&i| self.dims[i]).product()
    }
}

/// Offsets into the full row-major index space for every multi-index over the
/// listed subsystems (enumerated row-major in the listed order).
pub(crate) fn subsystem_offsets(dims: &[usize], subsystems: &[usize]) -> Vec<usize> {
    let n = dims.len();
    let mut strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let mut offsets = vec![0usize];
    for &s in subsystems {
        let mut next = Vec::with_capacity(offsets.len() * dims[s]);
        for &o in &offsets {
            for x in 0..dims[s] {
                next.push(o + x * strides[s]);
            }
        }
        offsets = next;
    }
    offsets
}

/// Reduced matrix over `keep` (subsystem indices, in the order they should
/// appear in the result), tracing out every other subsystem.
pub(crate) fn reduce_matrix(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> ComplexMatrix {
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let keep_off = subsystem_offsets(dims, keep);
    let trace_off = subsystem_offsets(dims, &traced);
    let dk = keep_off.len();
    let mut out = ComplexMatrix::zeros(dk, dk);
    for (i, &oi) in keep_off.iter().enumerate() {
        for (j, &oj) in keep_off.iter().enumerate() {
            let mut acc = ZERO;
            for &t in &trace_off {
                acc += m[(oi + t, oj + t)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Trace out every party not in `keep`. The kept parties retain their
/// original relative order.
pub fn partial_trace<S: AsRef<str>>(rho: &DensityMatrix, keep: &[S]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::InvalidArgument("keep set must be nonempty".into()));
    }
    let mut idx = rho.dims().indices(keep)?;
    idx.sort_unstable();
    Ok(rho.reduced_indices(&idx))
}

/// Validate a raw matrix as a density matrix over `dims`.
///
/// Accepts iff Hermitian (1e-8), unit trace (1e-8) and no eigenvalue below
/// -1e-8. Eigenvalues in `[-1e-8, 0)` are clamped to zero and the trace
/// renormalized.
pub fn validate_density(m: ComplexMatrix, dims: DimensionList) -> Result<DensityMatrix> {
    if !m.is_square() || m.rows() != dims.total_dim() {
        return Err(Error::not_density(
            DensityProperty::Shape,
            format!(
                "{}x{} matrix for subsystem dimensions {:?}",
                m.rows(),
                m.cols(),
                dims.dims()
            ),
        ));
    }
    if m.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::not_density(DensityProperty::Finite, "NaN or infinite entry"));
    }
    let dev = m.hermitian_deviation();
    if dev > DENSITY_HERMITIAN_TOL {
        return Err(Error::not_density(
            DensityProperty::Hermitian,
            format!("max |m - m^H| = {dev:e}"),
        ));
    }
    let tr = m.trace();
    if (tr.re - 1.0).abs() > DENSITY_TRACE_TOL || tr.im.abs() > DENSITY_TRACE_TOL {
        return Err(Error::not_density(
            DensityProperty::Trace,
            format!("trace = {} + {}i", tr.re, tr.im),
        ));
    }
    let herm = ComplexMatrix::from_vec(m.rows(), m.cols(), symmetrized(&m))?;
    let eig = hermitian_eig(&herm)?;
    let min = eig.values.last().copied().unwrap_or(0.0);
    if min < -DENSITY_CLAMP_TOL {
        return Err(Error::not_density(
            DensityProperty::Positivity,
            format!("minimum eigenvalue {min:e}"),
        ));
    }
    let matrix = if min < 0.0 {
        let clamped: Vec<f64> = eig.values.iter().map(|&x| x.max(0.0)).collect();
        let total: f64 = clamped.iter().sum();
        let repaired = HermitianEigen {
            values: clamped.iter().map(|x| x / total).collect(),
            vectors: eig.vectors,
        };
        repaired.reconstruct()
    } else {
        herm
    };
    Ok(DensityMatrix::from_parts_unchecked(matrix, dims))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::DensityMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let g = ComplexMatrix::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        &g + &g.adjoint()
    }

    #[test]
    fn eig_identity_and_pauli_z() {
        let e = hermitian_eig(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0]);
        let e = hermitian_eig(&pauli_z()).unwrap();
        assert_eq!(e.values, vec![1.0, -1.0]);
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        for (n, seed) in [(8, 1), (8, 2), (16, 3), (3, 4)] {
            let h = random_hermitian(n, seed);
            let e = hermitian_eig(&h).unwrap();
            assert!(e.reconstruct().max_abs_diff(&h) <= 1e-9);
            let gram = &e.vectors.adjoint() * &e.vectors;
            assert!(gram.max_abs_diff(&ComplexMatrix::identity(n)) <= 1e-9);
            assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 0.0, 1.0]).unwrap();
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn eigenvalues_match_full_decomposition() {
        let h = random_hermitian(6, 9);
        let full = hermitian_eig(&h).unwrap().values;
        let only = hermitian_eigenvalues(&h).unwrap();
        for (a, b) in full.iter().zip(&only) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn kron_examples() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
        let d = kron(&ComplexMatrix::diag(&[1.0, 2.0]), &ComplexMatrix::diag(&[3.0, 4.0]));
        assert_eq!(d, ComplexMatrix::diag(&[3.0, 4.0, 6.0, 8.0]));
        // X ⊗ Z expanded by hand.
        let expected = ComplexMatrix::from_real(
            4,
            4,
            &[
                0.0, 0.0, 1.0, 0.0, //
                0.0, 0.0, 0.0, -1.0, //
                1.0, 0.0, 0.0, 0.0, //
                0.0, -1.0, 0.0, 0.0,
            ],
        )
        .unwrap();
        assert_eq!(kron(&pauli_x(), &pauli_z()), expected);
    }

    #[test]
    fn kron_is_associative_on_integer_entries() {
        let a = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = ComplexMatrix::from_vec(2, 1, vec![c(0.0, 1.0), c(-2.0, 0.0)]).unwrap();
        let cm = ComplexMatrix::from_real(1, 3, &[5.0, -1.0, 7.0]).unwrap();
        assert_eq!(kron(&kron(&a, &b), &cm), kron(&a, &kron(&b, &cm)));
    }

    fn qubit_density(m: ComplexMatrix, n: usize) -> DensityMatrix {
        validate_density(m, DimensionList::qubits(n)).unwrap()
    }

    #[test]
    fn partial_trace_of_product_state() {
        let ra = ComplexMatrix::diag(&[0.3, 0.7]);
        let rb = ComplexMatrix::from_vec(2, 2, vec![c(0.6, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.4, 0.0)]).unwrap();
        let rho = qubit_density(kron(&ra, &rb), 2);
        let a = partial_trace(&rho, &["A"]).unwrap();
        assert!(a.matrix().max_abs_diff(&ra) < 1e-15);
        let b = partial_trace(&rho, &["B"]).unwrap();
        assert!(b.matrix().max_abs_diff(&rb) < 1e-15);
    }

    #[test]
    fn partial_trace_bell_and_ghz() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = [c(s, 0.0), ZERO, ZERO, c(s, 0.0)];
        let rho = qubit_density(ComplexMatrix::outer(&bell), 2);
        let a = partial_trace(&rho, &["A"]).unwrap();
        assert!(a.matrix().max_abs_diff(&ComplexMatrix::diag(&[0.5, 0.5])) < 1e-15);

        let mut ghz = vec![ZERO; 8];
        ghz[0] = c(s, 0.0);
        ghz[7] = c(s, 0.0);
        let rho = qubit_density(ComplexMatrix::outer(&ghz), 3);
        let ab = partial_trace(&rho, &["A", "B"]).unwrap();
        let expected = ComplexMatrix::diag(&[0.5, 0.0, 0.0, 0.5]);
        assert!(ab.matrix().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn partial_trace_full_set_is_identity_and_unknown_label_errors() {
        let rho = qubit_density(ComplexMatrix::diag(&[0.1, 0.2, 0.3, 0.4]), 2);
        let same = partial_trace(&rho, &["A", "B"]).unwrap();
        assert_eq!(same.matrix(), rho.matrix());
        assert!(matches!(partial_trace(&rho, &["Z"]), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn sequential_trace_equals_joint_trace() {
        let h = random_hermitian(8, 77);
        let g = &h * &h;
        let tr = g.trace().re;
        let rho = qubit_density(g.scale(c(1.0 / tr, 0.0)), 3);
        let joint = partial_trace(&rho, &["A"]).unwrap();
        let step = partial_trace(&partial_trace(&rho, &["A", "B"]).unwrap(), &["A"]).unwrap();
        assert!(joint.matrix().max_abs_diff(step.matrix()) <= 1e-10);
        assert!((joint.matrix().trace().re - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn validate_density_policy() {
        let ok = validate_density(ComplexMatrix::diag(&[0.5, 0.5]), DimensionList::qubits(1));
        assert!(ok.is_ok());

        let bad = validate_density(ComplexMatrix::diag(&[0.45, 0.45]), DimensionList::qubits(1));
        assert!(matches!(
            bad,
            Err(Error::NotDensityMatrix {
                property: DensityProperty::Trace,
                ..
            })
        ));

        let clamped = validate_density(ComplexMatrix::diag(&[1.0 + 1e-9, -1e-9]), DimensionList::qubits(1)).unwrap();
        let vals = hermitian_eigenvalues(clamped.matrix()).unwrap();
        assert!(vals.iter().all(|&v| v >= 0.0));
        assert!((clamped.matrix().trace().re - 1.0).abs() < 1e-15);

        let neg = validate_density(ComplexMatrix::diag(&[1.1, -0.1]), DimensionList::qubits(1));
        assert!(matches!(
            neg,
            Err(Error::NotDensityMatrix {
                property: DensityProperty::Positivity,
                ..
            })
        ));

        let shape = validate_density(ComplexMatrix::diag(&[0.5, 0.5]), DimensionList::qubits(2));
        assert!(matches!(
            shape,
            Err(Error::NotDensityMatrix {
                property: DensityProperty::Shape,
                ..
            })
        ));
    }

    #[test]
    fn dimension_list_rejects_bad_input() {
        assert!(DimensionList::new(vec![2, 2], vec!["A".into(), "A".into()]).is_err());
        assert!(DimensionList::new(vec![1], vec!["A".into()]).is_err());
        assert!(DimensionList::new(vec![2], vec![]).is_err());
        let d = DimensionList::qubits(3);
        assert_eq!(d.indices(&["C", "A"]).unwrap(), vec![2, 0]);
        assert!(matches!(d.indices(&["A", "A"]), Err(Error::OverlappingParties(_))));
    }
}
