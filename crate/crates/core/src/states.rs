//! Pure and mixed states, the named state families, Haar sampling and the
//! JSON state file format.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, reduce_matrix, subsystem_offsets, ComplexMatrix, DimensionList, C64, ZERO};

/// Norm tolerance for [`StateVector`].
pub const NORM_TOL: f64 = 1e-10;
/// Purity below `1 - PURITY_TOL` means "not pure".
pub const PURITY_TOL: f64 = 1e-8;

/// Seedable generator used everywhere randomness is needed: ChaCha20 keyed
/// through `SeedableRng::seed_from_u64` (PCG32 expansion of the 64-bit seed).
pub type StateRng = ChaCha20Rng;

pub fn rng_from_seed(seed: u64) -> StateRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// A validated density matrix annotated with its subsystem structure.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    dims: DimensionList,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, dims: DimensionList) -> Result<Self> {
        linalg::validate_density(matrix, dims)
    }

    pub(crate) fn from_parts_unchecked(matrix: ComplexMatrix, dims: DimensionList) -> Self {
        debug_assert_eq!(matrix.rows(), dims.total_dim());
        Self { matrix, dims }
    }

    pub fn maximally_mixed(dims: DimensionList) -> Self {
        let d = dims.total_dim();
        let matrix = ComplexMatrix::identity(d).scale(C64::new(1.0 / d as f64, 0.0));
        Self { matrix, dims }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> &DimensionList {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        self.dims.labels()
    }

    pub fn num_parties(&self) -> usize {
        self.dims.len()
    }

    pub fn into_parts(self) -> (ComplexMatrix, DimensionList) {
        (self.matrix, self.dims)
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        let m = &self.matrix;
        let n = m.rows();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (m[(i, j)] * m[(j, i)]).re;
            }
        }
        acc
    }

    pub fn is_pure(&self) -> bool {
        self.purity() >= 1.0 - PURITY_TOL
    }

    /// Reduced state over the given parties, in the given order.
    pub fn marginal<S: AsRef<str>>(&self, labels: &[S]) -> Result<DensityMatrix> {
        if labels.is_empty() {
            return Err(Error::InvalidArgument("marginal needs at least one party".into()));
        }
        let idx = self.dims.indices(labels)?;
        Ok(self.reduced_indices(&idx))
    }

    pub(crate) fn reduced_indices(&self, keep: &[usize]) -> DensityMatrix {
        let identity_order = keep.len() == self.dims.len() && keep.iter().enumerate().all(|(i, &k)| i == k);
        if identity_order {
            return self.clone();
        }
        let matrix = reduce_matrix(&self.matrix, self.dims.dims(), keep);
        DensityMatrix {
            matrix,
            dims: self.dims.select(keep),
        }
    }

    /// `w·self + (1 - w)·other`.
    pub fn mix(&self, other: &DensityMatrix, weight: f64) -> Result<DensityMatrix> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(
                "mixing states with different structure".into(),
            ));
        }
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::OutOfRange {
                name: "weight",
                value: weight,
            });
        }
        let m = &self.matrix.scale(C64::new(weight, 0.0)) + &other.matrix.scale(C64::new(1.0 - weight, 0.0));
        Ok(DensityMatrix {
            matrix: m,
            dims: self.dims.clone(),
        })
    }

    /// `(U_party ⊗ I) ρ (U_party ⊗ I)†`.
    pub fn apply_local_unitary(&self, party: &str, u: &ComplexMatrix) -> Result<DensityMatrix> {
        let full = local_operator(&self.dims, party, u)?;
        let m = &(&full * &self.matrix) * &full.adjoint();
        Ok(DensityMatrix {
            matrix: m,
            dims: self.dims.clone(),
        })
    }
}

/// Embed `u` acting on `party` into the full space.
pub(crate) fn local_operator(dims: &DimensionList, party: &str, u: &ComplexMatrix) -> Result<ComplexMatrix> {
    let k = dims.index_of(party)?;
    if u.rows() != dims.dims()[k] || u.cols() != dims.dims()[k] {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, party `{party}` has dimension {}",
            u.rows(),
            u.cols(),
            dims.dims()[k]
        )));
    }
    let mut full = ComplexMatrix::identity(1);
    for (i, &d) in dims.dims().iter().enumerate() {
        let factor = if i == k { u.clone() } else { ComplexMatrix::identity(d) };
        full = full.kron(&factor);
    }
    Ok(full)
}

/// A unit-norm pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
    dims: DimensionList,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>, dims: DimensionList) -> Result<Self> {
        if amplitudes.len() != dims.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for total dimension {}",
                amplitudes.len(),
                dims.total_dim()
            )));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite amplitude".into()));
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm * norm));
        }
        Ok(Self { amplitudes, dims })
    }

    /// Normalizes `amplitudes` before wrapping them.
    pub fn normalized(mut amplitudes: Vec<C64>, dims: DimensionList) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize a zero vector".into()));
        }
        for z in &mut amplitudes {
            *z /= norm;
        }
        Self::new(amplitudes, dims)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dims: DimensionList, index: usize) -> Result<Self> {
        let mut amps = vec![ZERO; dims.total_dim()];
        if index >= amps.len() {
            return Err(Error::InvalidArgument(format!("basis index {index} out of range")));
        }
        amps[index] = C64::new(1.0, 0.0);
        Self::new(amps, dims)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dims(&self) -> &DimensionList {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        self.dims.labels()
    }

    pub fn num_parties(&self) -> usize {
        self.dims.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_parts_unchecked(ComplexMatrix::outer(&self.amplitudes), self.dims.clone())
    }

    /// Reduced density matrix over `labels` (in that order), computed
    /// directly from the amplitudes.
    pub fn marginal<S: AsRef<str>>(&self, labels: &[S]) -> Result<DensityMatrix> {
        let keep = self.dims.indices(labels)?;
        if keep.is_empty() {
            return Err(Error::InvalidArgument("marginal needs at least one party".into()));
        }
        let traced: Vec<usize> = (0..self.dims.len()).filter(|i| !keep.contains(i)).collect();
        let ko = subsystem_offsets(self.dims.dims(), &keep);
        let to = subsystem_offsets(self.dims.dims(), &traced);
        let psi = &self.amplitudes;
        let m = ComplexMatrix::from_fn(ko.len(), ko.len(), |i, j| {
            to.iter().map(|&t| psi[ko[i] + t] * psi[ko[j] + t].conj()).sum()
        });
        Ok(DensityMatrix::from_parts_unchecked(m, self.dims.select(&keep)))
    }

    /// `(U_party ⊗ I)|ψ⟩`.
    pub fn apply_local_unitary(&self, party: &str, u: &ComplexMatrix) -> Result<StateVector> {
        let full = local_operator(&self.dims, party, u)?;
        StateVector::normalized(full.mat_vec(&self.amplitudes), self.dims.clone())
    }
}

fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfRange { name, value })
    }
}

fn qubit_state(n: usize, terms: &[(usize, f64)]) -> Result<StateVector> {
    let mut amps = vec![ZERO; 1 << n];
    for &(idx, amp) in terms {
        amps[idx] += C64::new(amp, 0.0);
    }
    StateVector::new(amps, DimensionList::qubits(n))
}

/// `√(pε)|000⟩ + √(p(1−ε))|111⟩ + √((1−p)/2)(|101⟩ + |110⟩)`.
pub fn psi_tilde(p: f64, eps: f64) -> Result<StateVector> {
    check_probability("p", p)?;
    check_probability("eps", eps)?;
    let side = ((1.0 - p) / 2.0).sqrt();
    qubit_state(
        3,
        &[
            (0b000, (p * eps).sqrt()),
            (0b111, (p * (1.0 - eps)).sqrt()),
            (0b101, side),
            (0b110, side),
        ],
    )
}

/// `√α|000⟩ + √(1−α)|111⟩`.
pub fn ghz_generalized(alpha: f64) -> Result<StateVector> {
    check_probability("alpha", alpha)?;
    qubit_state(3, &[(0b000, alpha.sqrt()), (0b111, (1.0 - alpha).sqrt())])
}

/// `√a|100⟩ + √b|010⟩ + √c|001⟩` with `a + b + c = 1`.
pub fn w_generalized(a: f64, b: f64, c: f64) -> Result<StateVector> {
    for (name, v) in [("a", a), ("b", b), ("c", c)] {
        if !(v >= 0.0) {
            return Err(Error::OutOfRange { name, value: v });
        }
    }
    let total = a + b + c;
    if (total - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(total));
    }
    qubit_state(3, &[(0b100, a.sqrt()), (0b010, b.sqrt()), (0b001, c.sqrt())])
}

/// `(|0…0⟩ + |1…1⟩)/√2` on `n` qubits.
pub fn ghz(n: usize) -> StateVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    qubit_state(n, &[(0, s), ((1 << n) - 1, s)]).expect("normalized by construction")
}

/// Symmetric W state on `n` qubits.
pub fn w_state(n: usize) -> StateVector {
    let a = (1.0 / n as f64).sqrt();
    let terms: Vec<(usize, f64)> = (0..n).map(|k| (1 << k, a)).collect();
    qubit_state(n, &terms).expect("normalized by construction")
}

/// `|0…0⟩` on `n` qubits.
pub fn product_zero(n: usize) -> StateVector {
    qubit_state(n, &[(0, 1.0)]).expect("normalized by construction")
}

fn complex_gaussian(rng: &mut StateRng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state: independent standard complex Gaussian amplitudes,
/// normalized. Deterministic in `seed`.
pub fn haar_random_pure(dims: DimensionList, seed: u64) -> StateVector {
    let mut rng = rng_from_seed(seed);
    haar_random_pure_with(dims, &mut rng)
}

pub fn haar_random_pure_with(dims: DimensionList, rng: &mut StateRng) -> StateVector {
    let amps = (0..dims.total_dim()).map(|_| complex_gaussian(rng)).collect();
    StateVector::normalized(amps, dims).expect("Gaussian vector is nonzero")
}

/// Haar-random `d×d` unitary: Gram–Schmidt on the columns of a complex
/// Ginibre matrix (QR with positive diagonal R).
pub fn haar_unitary(d: usize, rng: &mut StateRng) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = (0..d)
        .map(|_| (0..d).map(|_| complex_gaussian(rng)).collect())
        .collect();
    for j in 0..d {
        for k in 0..j {
            let (done, rest) = cols.split_at_mut(j);
            let q = &done[k];
            let proj: C64 = q.iter().zip(&rest[0]).map(|(a, b)| a.conj() * b).sum();
            for (x, qk) in rest[0].iter_mut().zip(q) {
                *x -= proj * qk;
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for x in &mut cols[j] {
            *x /= norm;
        }
    }
    ComplexMatrix::from_fn(d, d, |i, j| cols[j][i])
}

/// Random mixed state: partial trace of a Haar-random pure state on
/// `dims ⊗ C^ancilla_dim` (the induced measure).
pub fn random_mixed(dims: DimensionList, ancilla_dim: usize, seed: u64) -> DensityMatrix {
    let mut rng = rng_from_seed(seed);
    random_mixed_with(dims, ancilla_dim, &mut rng)
}

pub fn random_mixed_with(dims: DimensionList, ancilla_dim: usize, rng: &mut StateRng) -> DensityMatrix {
    let d = dims.total_dim();
    let amps: Vec<C64> = (0..d * ancilla_dim).map(|_| complex_gaussian(rng)).collect();
    let norm2: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    let m = ComplexMatrix::from_fn(d, d, |i, j| {
        (0..ancilla_dim)
            .map(|t| amps[i * ancilla_dim + t] * amps[j * ancilla_dim + t].conj())
            .sum::<C64>()
            / norm2
    });
    DensityMatrix::from_parts_unchecked(m, dims)
}

/// On-disk representation of a density matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    /// Row-major `[re, im]` pairs.
    pub matrix: Vec<[f64; 2]>,
}

impl StateFile {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        Self {
            dims: rho.dims().dims().to_vec(),
            labels: Some(rho.labels().to_vec()),
            matrix: rho.matrix().as_slice().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn into_density(self) -> Result<DensityMatrix> {
        let labels = match self.labels {
            Some(l) => l,
            None => default_labels(self.dims.len())?,
        };
        let dims = DimensionList::new(self.dims, labels)?;
        let d = dims.total_dim();
        if self.matrix.len() != d * d {
            return Err(Error::Parse(format!(
                "matrix has {} entries, expected {}",
                self.matrix.len(),
                d * d
            )));
        }
        let entries = self.matrix.iter().map(|&[re, im]| C64::new(re, im)).collect();
        let m = ComplexMatrix::from_vec(d, d, entries)?;
        linalg::validate_density(m, dims)
    }
}

fn default_labels(n: usize) -> Result<Vec<String>> {
    if n == 0 || n > 26 {
        return Err(Error::Parse(format!("cannot label {n} parties")));
    }
    Ok((0..n).map(|i| char::from(b'A' + i as u8).to_string()).collect())
}

pub fn parse_state_json(text: &str) -> Result<DensityMatrix> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_density()
}

pub fn state_to_json(rho: &DensityMatrix) -> String {
    serde_json::to_string_pretty(&StateFile::from_density(rho)).expect("serializable")
}

pub fn load_state(path: impl AsRef<Path>) -> Result<DensityMatrix> {
    parse_state_json(&fs::read_to_string(path)?)
}

pub fn save_state(rho: &DensityMatrix, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, state_to_json(rho))?;
    Ok(())
}
