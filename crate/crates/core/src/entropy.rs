//! Von Neumann entropy (base 2) and the unmeasured entropic functionals
//! built from it.

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, DimensionList};
use crate::states::{DensityMatrix, StateVector};

/// Eigenvalues below this contribute nothing to an entropy.
pub const EIGEN_FLOOR: f64 = 1e-12;

/// `-Σ λ log₂ λ` over the given spectrum, skipping `λ < 1e-12`.
pub fn entropy_from_eigenvalues(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&l| l >= EIGEN_FLOOR)
        .map(|&l| -l * l.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Entropy of a Hermitian, trace-normalized matrix. The caller guarantees
/// Hermiticity.
pub(crate) fn matrix_entropy(m: &ComplexMatrix) -> f64 {
    let n = m.rows();
    let mut buf = m.as_slice().to_vec();
    if linalg::eigenvalues_unchecked(&mut buf, n).is_err() {
        // The sweep cap is never reached at these sizes; make it loud in
        // debug builds and use whatever diagonal we have otherwise.
        debug_assert!(false, "Jacobi did not converge on a {n}x{n} density");
    }
    let values: Vec<f64> = (0..n).map(|k| buf[k * n + k].re).collect();
    entropy_from_eigenvalues(&values)
}

pub fn von_neumann(rho: &DensityMatrix) -> f64 {
    matrix_entropy(rho.matrix())
}

/// Entropy of the reduced state on `parties`. An empty set has entropy 0.
pub fn subsystem_entropy<S: AsRef<str>>(rho: &DensityMatrix, parties: &[S]) -> Result<f64> {
    if parties.is_empty() {
        return Ok(0.0);
    }
    let mut idx = rho.dims().indices(parties)?;
    idx.sort_unstable();
    Ok(von_neumann(&rho.reduced_indices(&idx)))
}

fn ensure_disjoint(dims: &DimensionList, sets: &[&[usize]]) -> Result<()> {
    let mut seen = vec![false; dims.len()];
    for set in sets {
        for &i in *set {
            if seen[i] {
                return Err(Error::OverlappingParties(dims.labels()[i].clone()));
            }
            seen[i] = true;
        }
    }
    Ok(())
}

fn entropy_of(rho: &DensityMatrix, idx: &[usize]) -> f64 {
    if idx.is_empty() {
        return 0.0;
    }
    let mut sorted = idx.to_vec();
    sorted.sort_unstable();
    von_neumann(&rho.reduced_indices(&sorted))
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().chain(b).copied().collect()
}

/// `S̃(target|given) = S(target ∪ given) - S(given)`.
pub fn conditional_entropy_unmeasured<S: AsRef<str>>(rho: &DensityMatrix, target: &[S], given: &[S]) -> Result<f64> {
    let t = rho.dims().indices(target)?;
    let g = rho.dims().indices(given)?;
    ensure_disjoint(rho.dims(), &[&t, &g])?;
    Ok(entropy_of(rho, &union(&t, &g)) - entropy_of(rho, &g))
}

/// `Ĩ(a:b) = S(a) + S(b) - S(ab)`.
pub fn mutual_information<S: AsRef<str>>(rho: &DensityMatrix, a: &[S], b: &[S]) -> Result<f64> {
    let ia = rho.dims().indices(a)?;
    let ib = rho.dims().indices(b)?;
    if ia.is_empty() || ib.is_empty() {
        return Err(Error::InvalidArgument(
            "mutual information needs two nonempty sets".into(),
        ));
    }
    ensure_disjoint(rho.dims(), &[&ia, &ib])?;
    Ok(entropy_of(rho, &ia) + entropy_of(rho, &ib) - entropy_of(rho, &union(&ia, &ib)))
}

/// `Ĩ(b:c|given) = S̃(b|given) + S̃(c|given) - S̃(bc|given)`.
pub fn cond_mutual_info_unmeasured<S: AsRef<str>>(rho: &DensityMatrix, b: &[S], c: &[S], given: &[S]) -> Result<f64> {
    let ib = rho.dims().indices(b)?;
    let ic = rho.dims().indices(c)?;
    let ig = rho.dims().indices(given)?;
    ensure_disjoint(rho.dims(), &[&ib, &ic, &ig])?;
    let sg = entropy_of(rho, &ig);
    let s_bg = entropy_of(rho, &union(&ib, &ig));
    let s_cg = entropy_of(rho, &union(&ic, &ig));
    let s_bcg = entropy_of(rho, &union(&union(&ib, &ic), &ig));
    Ok((s_bg - sg) + (s_cg - sg) - (s_bcg - sg))
}

pub(crate) fn require_arity(dims: &DimensionList, n: usize) -> Result<()> {
    if dims.len() == n {
        Ok(())
    } else {
        Err(Error::WrongArity {
            expected: n,
            got: dims.len(),
        })
    }
}

/// `Ĩ(B:C|A) - Ĩ(B:C)` with the first party as anchor.
pub fn interaction_info_unmeasured(rho: &DensityMatrix) -> Result<f64> {
    require_arity(rho.dims(), 3)?;
    let anchor = rho.labels()[0].clone();
    interaction_info_unmeasured_anchor(rho, &anchor)
}

/// Interaction information conditioned on `anchor`; the value is the same
/// for every choice of anchor.
pub fn interaction_info_unmeasured_anchor(rho: &DensityMatrix, anchor: &str) -> Result<f64> {
    require_arity(rho.dims(), 3)?;
    let a = rho.dims().index_of(anchor)?;
    let others: Vec<&str> = rho
        .labels()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != a)
        .map(|(_, l)| l.as_str())
        .collect();
    let cmi = cond_mutual_info_unmeasured(rho, &[others[0]], &[others[1]], &[anchor])?;
    let mi = mutual_information(rho, &[others[0]], &[others[1]])?;
    Ok(cmi - mi)
}

/// Entropies of every nonempty subset of parties, indexed by bitmask
/// (bit `i` set means party `i` is included). Computed once per state.
#[derive(Debug, Clone)]
pub struct EntropyTable {
    labels: Vec<String>,
    values: Vec<f64>,
}

impl EntropyTable {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        let n = rho.num_parties();
        let mut values = vec![0.0; 1 << n];
        for (mask, v) in values.iter_mut().enumerate().skip(1) {
            let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            *v = von_neumann(&rho.reduced_indices(&idx));
        }
        Self {
            labels: rho.labels().to_vec(),
            values,
        }
    }

    /// Uses the amplitudes directly and the pure-state symmetry
    /// `S(X) = S(complement of X)`, so only half the marginals are formed.
    pub fn from_pure(psi: &StateVector) -> Self {
        let n = psi.num_parties();
        let full = (1usize << n) - 1;
        let mut values = vec![0.0; 1 << n];
        for mask in 1..full {
            let comp = full ^ mask;
            if comp < mask {
                values[mask] = values[comp];
                continue;
            }
            let labels: Vec<&str> = (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| psi.labels()[i].as_str())
                .collect();
            let rho = psi.marginal(&labels).expect("labels come from the state");
            values[mask] = von_neumann(&rho);
        }
        Self {
            labels: psi.labels().to_vec(),
            values,
        }
    }

    pub fn mask<S: AsRef<str>>(&self, parties: &[S]) -> Result<usize> {
        let mut mask = 0;
        for p in parties {
            let i = self
                .labels
                .iter()
                .position(|l| l == p.as_ref())
                .ok_or_else(|| Error::UnknownLabel(p.as_ref().to_string()))?;
            mask |= 1 << i;
        }
        Ok(mask)
    }

    pub fn by_mask(&self, mask: usize) -> f64 {
        self.values[mask]
    }

    pub fn get<S: AsRef<str>>(&self, parties: &[S]) -> Result<f64> {
        Ok(self.values[self.mask(parties)?])
    }
}
