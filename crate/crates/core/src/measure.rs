//! Rank-1 projective measurements on one (possibly composite) party, and the
//! minimization of the post-measurement average conditional entropy.
//!
//! Only orthogonal rank-1 projective measurements are searched, not general
//! POVMs. Every optimizer result carries `projective_only = true` in its
//! diagnostics to make that explicit.

use rayon::prelude::*;
use serde::Serialize;

use crate::entropy::{entropy_from_eigenvalues, EIGEN_FLOOR};
use crate::error::{Error, Result};
use crate::linalg::{self, reduce_matrix, ComplexMatrix, C64, ZERO};
use crate::nelder_mead::{nelder_mead, NelderMeadOptions};
use crate::states::{haar_unitary, rng_from_seed, DensityMatrix};

use std::f64::consts::{PI, TAU};

/// Outcomes with smaller probability are dropped from every average.
pub const PROB_FLOOR: f64 = 1e-12;
/// Minima within this of the best count as ties.
pub const TIE_TOL: f64 = 1e-10;

/// Angles describing an orthonormal measurement basis on a `party_dim`
/// dimensional party.
///
/// For `d = 2` the two angles are Bloch angles `(θ, φ)`. For `d > 2` there
/// are `d(d-1)` angles: one `(θ, φ)` pair per Givens rotation, applied in the
/// order (0,1), (0,2), …, (0,d-1), (1,2), …; the basis vectors are the
/// columns of the product.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasurementParams {
    party_dim: usize,
    angles: Vec<f64>,
}

pub fn param_len(d: usize) -> usize {
    d * (d - 1)
}

impl MeasurementParams {
    pub fn new(party_dim: usize, angles: Vec<f64>) -> Result<Self> {
        if party_dim < 2 {
            return Err(Error::InvalidArgument(format!("party dimension {party_dim} < 2")));
        }
        let expected = param_len(party_dim);
        if angles.len() != expected {
            return Err(Error::BadParamLength {
                expected,
                got: angles.len(),
            });
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidArgument("non-finite measurement angle".into()));
        }
        Ok(Self { party_dim, angles })
    }

    pub fn bloch(theta: f64, phi: f64) -> Self {
        Self::new(2, vec![theta, phi]).expect("two angles for a qubit")
    }

    /// The computational basis.
    pub fn computational(party_dim: usize) -> Self {
        Self::new(party_dim, vec![0.0; param_len(party_dim)]).expect("length matches")
    }

    /// Angles whose basis equals the columns of `u` up to per-column phases.
    pub fn from_unitary(u: &ComplexMatrix) -> Result<Self> {
        let d = u.rows();
        if !u.is_square() || d < 2 {
            return Err(Error::DimensionMismatch("expected a square unitary".into()));
        }
        if d == 2 {
            // Column 0 is e^{iχ}(cos θ/2, e^{iφ} sin θ/2).
            let (a, b) = (u[(0, 0)], u[(1, 0)]);
            let theta = 2.0 * b.norm().atan2(a.norm());
            let phi = if b.norm() > 0.0 { b.arg() - a.arg() } else { 0.0 };
            return Ok(Self::bloch(theta, phi).canonical());
        }
        let mut w = u.clone();
        let mut angles = Vec::with_capacity(param_len(d));
        for i in 0..d - 1 {
            for j in i + 1..d {
                let (a, b) = (w[(i, i)], w[(j, i)]);
                let theta = b.norm().atan2(a.norm());
                let phi = if b.norm() > 0.0 { b.arg() - a.arg() } else { 0.0 };
                let g = givens(d, i, j, theta, phi);
                w = &g.adjoint() * &w;
                angles.push(theta);
                angles.push(phi);
            }
        }
        Self::new(d, angles)
    }

    pub fn party_dim(&self) -> usize {
        self.party_dim
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Qubit angles folded into θ ∈ [0, π], φ ∈ [0, 2π). Same basis; other
    /// dimensions are returned unchanged.
    pub fn canonical(mut self) -> Self {
        if self.party_dim == 2 {
            let mut theta = self.angles[0].rem_euclid(TAU);
            let mut phi = self.angles[1];
            if theta > PI {
                theta = TAU - theta;
                phi += PI;
            }
            self.angles = vec![theta, phi.rem_euclid(TAU)];
        }
        self
    }

    /// Orthonormal basis vectors, one per outcome.
    pub fn basis(&self) -> Vec<Vec<C64>> {
        let d = self.party_dim;
        if d == 2 {
            let (theta, phi) = (self.angles[0], self.angles[1]);
            let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
            let e = C64::from_polar(1.0, phi);
            return vec![vec![C64::new(c, 0.0), e * s], vec![C64::new(s, 0.0), -e * c]];
        }
        let mut u = ComplexMatrix::identity(d);
        let mut k = 0;
        for i in 0..d - 1 {
            for j in i + 1..d {
                u = &u * &givens(d, i, j, self.angles[k], self.angles[k + 1]);
                k += 2;
            }
        }
        (0..d).map(|c| u.column(c)).collect()
    }

    pub fn projectors(&self) -> Vec<ComplexMatrix> {
        self.basis().iter().map(|v| ComplexMatrix::outer(v)).collect()
    }
}

fn givens(d: usize, i: usize, j: usize, theta: f64, phi: f64) -> ComplexMatrix {
    let mut g = ComplexMatrix::identity(d);
    let (c, s) = (theta.cos(), theta.sin());
    g[(i, i)] = C64::new(c, 0.0);
    g[(j, j)] = C64::new(c, 0.0);
    g[(i, j)] = -C64::from_polar(s, -phi);
    g[(j, i)] = C64::from_polar(s, phi);
    g
}

pub fn projectors_from_params(params: &MeasurementParams) -> Vec<ComplexMatrix> {
    params.projectors()
}

/// One measurement outcome: its probability and the normalized state of the
/// unmeasured parties (absent when the probability is below 1e-12).
#[derive(Debug, Clone)]
pub struct Outcome {
    pub probability: f64,
    pub state: Option<DensityMatrix>,
}

#[derive(Debug, Clone)]
pub struct MeasurementOutcomeEnsemble {
    pub outcomes: Vec<Outcome>,
}

impl MeasurementOutcomeEnsemble {
    /// `Σ pᵢ S(ρ_rest|i)`.
    pub fn average_entropy(&self) -> f64 {
        self.outcomes
            .iter()
            .filter_map(|o| o.state.as_ref().map(|s| o.probability * crate::entropy::von_neumann(s)))
            .sum()
    }
}

/// Measure `party` (a set of labels treated as one composite party) and
/// return the ensemble of post-measurement states of all remaining parties.
pub fn measure_party<S: AsRef<str>>(
    rho: &DensityMatrix,
    party: &[S],
    params: &MeasurementParams,
) -> Result<MeasurementOutcomeEnsemble> {
    let measured = rho.dims().indices(party)?;
    if measured.is_empty() {
        return Err(Error::InvalidArgument("nothing to measure".into()));
    }
    let rest: Vec<usize> = (0..rho.num_parties()).filter(|i| !measured.contains(i)).collect();
    if rest.is_empty() {
        return Err(Error::InvalidArgument("no unmeasured parties remain".into()));
    }
    let dm = rho.dims().dim_of(&measured);
    if params.party_dim() != dm {
        return Err(Error::DimensionMismatch(format!(
            "measurement on dimension {} applied to a party of dimension {dm}",
            params.party_dim()
        )));
    }
    let problem = Blocks::new(rho, &measured, &rest);
    let rest_dims = rho.dims().select(&rest);
    let outcomes = problem
        .conditional_blocks(&params.basis())
        .into_iter()
        .map(|(p, sigma)| {
            let state = (p >= PROB_FLOOR).then(|| {
                let m = sigma.scale(C64::new(1.0 / p, 0.0));
                DensityMatrix::from_parts_unchecked(m, rest_dims.clone())
            });
            Outcome { probability: p, state }
        })
        .collect();
    Ok(MeasurementOutcomeEnsemble { outcomes })
}

/// The reduced state over `measured ∪ target` arranged measured-first, so
/// that conditional states are cheap to form for any basis.
#[derive(Debug, Clone)]
pub(crate) struct Blocks {
    dm: usize,
    dt: usize,
    r: Vec<C64>,
}

impl Blocks {
    pub(crate) fn new(rho: &DensityMatrix, measured: &[usize], target: &[usize]) -> Self {
        let keep: Vec<usize> = measured.iter().chain(target).copied().collect();
        let dm = rho.dims().dim_of(measured);
        let dt = rho.dims().dim_of(target);
        let r = reduce_matrix(rho.matrix(), rho.dims().dims(), &keep).into_vec();
        Self { dm, dt, r }
    }

    /// `(pᵢ, σᵢ)` with `σᵢ = ⟨vᵢ|ρ|vᵢ⟩` unnormalized, `pᵢ = Tr σᵢ`.
    fn conditional_blocks(&self, basis: &[Vec<C64>]) -> Vec<(f64, ComplexMatrix)> {
        basis
            .iter()
            .map(|v| {
                let sigma = self.block(v);
                let p = sigma.trace().re.max(0.0);
                (p, sigma)
            })
            .collect()
    }

    fn block(&self, v: &[C64]) -> ComplexMatrix {
        let (dm, dt) = (self.dm, self.dt);
        let n = dm * dt;
        let mut sigma = ComplexMatrix::zeros(dt, dt);
        for a in 0..dm {
            let va = v[a].conj();
            if va == ZERO {
                continue;
            }
            for (b, &vb) in v.iter().enumerate().take(dm) {
                let w = va * vb;
                if w == ZERO {
                    continue;
                }
                for t in 0..dt {
                    let row = (a * dt + t) * n + b * dt;
                    for u in 0..dt {
                        sigma[(t, u)] += w * self.r[row + u];
                    }
                }
            }
        }
        sigma
    }

    /// `Σᵢ pᵢ S(σᵢ/pᵢ)`, plus the Shannon entropy of `p` when
    /// `with_shannon` (that sum is the entropy of the dephased state).
    fn objective(&self, basis: &[Vec<C64>], with_shannon: bool) -> f64 {
        let mut total = 0.0;
        for v in basis {
            let sigma = self.block(v);
            let p = sigma.trace().re;
            if p < PROB_FLOOR {
                continue;
            }
            let mut values = block_eigenvalues(sigma);
            for x in &mut values {
                *x /= p;
            }
            total += p * entropy_from_eigenvalues(&values);
            if with_shannon && p >= EIGEN_FLOOR {
                total -= p * p.log2();
            }
        }
        total
    }
}

fn block_eigenvalues(m: ComplexMatrix) -> Vec<f64> {
    let n = m.rows();
    if n == 1 {
        return vec![m[(0, 0)].re];
    }
    if n == 2 {
        let (a, d) = (m[(0, 0)].re, m[(1, 1)].re);
        let b = (m[(0, 1)] + m[(1, 0)].conj()) * 0.5;
        let mean = 0.5 * (a + d);
        let r = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        return vec![mean + r, mean - r];
    }
    let mut buf = m.into_vec();
    let _ = linalg::eigenvalues_unchecked(&mut buf, n);
    (0..n).map(|k| buf[k * n + k].re).collect()
}

/// Objective `Σ pᵢ S(ρ_target|i)` for measurements on `measured`, with the
/// reduced state precomputed. Useful for grid scans.
#[derive(Debug, Clone)]
pub struct ConditionalEntropyObjective {
    blocks: Blocks,
    with_shannon: bool,
}

impl ConditionalEntropyObjective {
    pub fn new<S: AsRef<str>>(rho: &DensityMatrix, measured: &[S], target: &[S]) -> Result<Self> {
        let (m, t) = split_parties(rho, measured, target)?;
        Ok(Self {
            blocks: Blocks::new(rho, &m, &t),
            with_shannon: false,
        })
    }

    /// Entropy of the state dephased in the measured basis,
    /// `S(Σᵢ Πᵢ ρ Πᵢ)`.
    pub fn dephased<S: AsRef<str>>(rho: &DensityMatrix, measured: &[S]) -> Result<Self> {
        let m = rho.dims().indices(measured)?;
        let rest: Vec<usize> = (0..rho.num_parties()).filter(|i| !m.contains(i)).collect();
        if m.is_empty() || rest.is_empty() {
            return Err(Error::InvalidArgument(
                "measured set must be a nonempty proper subset".into(),
            ));
        }
        Ok(Self {
            blocks: Blocks::new(rho, &m, &rest),
            with_shannon: true,
        })
    }

    pub fn party_dim(&self) -> usize {
        self.blocks.dm
    }

    pub fn evaluate(&self, params: &MeasurementParams) -> f64 {
        self.blocks.objective(&params.basis(), self.with_shannon)
    }

    pub fn evaluate_angles(&self, angles: &[f64]) -> f64 {
        let params = MeasurementParams {
            party_dim: self.blocks.dm,
            angles: angles.to_vec(),
        };
        self.evaluate(&params)
    }

    pub fn minimize(&self, config: &OptimizerConfig) -> Minimum {
        minimize(self, config)
    }
}

fn split_parties<S: AsRef<str>>(rho: &DensityMatrix, measured: &[S], target: &[S]) -> Result<(Vec<usize>, Vec<usize>)> {
    let m = rho.dims().indices(measured)?;
    let t = rho.dims().indices(target)?;
    if m.is_empty() || t.is_empty() {
        return Err(Error::InvalidArgument(
            "measured and target sets must be nonempty".into(),
        ));
    }
    if let Some(&i) = m.iter().find(|i| t.contains(i)) {
        return Err(Error::OverlappingParties(rho.labels()[i].clone()));
    }
    Ok((m, t))
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizerConfig {
    /// Qubit grid: number of θ values on [0, π] and φ values on [0, 2π).
    pub grid_theta: usize,
    pub grid_phi: usize,
    /// Best grid cells refined by Nelder–Mead.
    pub refine_top: usize,
    /// Haar-random starting bases for parties of dimension > 2.
    pub random_starts: usize,
    pub seed: u64,
    pub xtol: f64,
    pub max_evals: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            grid_theta: 13,
            grid_phi: 25,
            refine_top: 5,
            random_starts: 64,
            seed: 0x5EED,
            xtol: 1e-9,
            max_evals: 2000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizerDiagnostics {
    /// Number of Nelder–Mead runs.
    pub restarts: usize,
    pub evaluations: usize,
    /// Largest minus smallest local minimum over the runs.
    pub spread: f64,
    pub converged_starts: usize,
    /// Index of the run the reported minimum came from.
    pub best_start: usize,
    pub projective_only: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Minimum {
    pub value: f64,
    pub argmin: MeasurementParams,
    pub diagnostics: OptimizerDiagnostics,
}

fn starting_points(objective: &ConditionalEntropyObjective, config: &OptimizerConfig) -> (Vec<Vec<f64>>, usize, f64) {
    let d = objective.party_dim();
    if d == 2 {
        let nt = config.grid_theta.max(2);
        let np = config.grid_phi.max(1);
        let mut cells = Vec::new();
        for i in 0..nt {
            let theta = PI * i as f64 / (nt - 1) as f64;
            let phis = if i == 0 || i == nt - 1 { 1 } else { np };
            for j in 0..phis {
                cells.push(vec![theta, TAU * j as f64 / np as f64]);
            }
        }
        let mut scored: Vec<(f64, usize)> = cells
            .iter()
            .enumerate()
            .map(|(k, x)| (objective.evaluate_angles(x), k))
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let starts = scored
            .iter()
            .take(config.refine_top.max(1))
            .map(|&(_, k)| cells[k].clone())
            .collect();
        let step = 0.5 * PI / (nt - 1) as f64;
        (starts, cells.len(), step)
    } else {
        let mut rng = rng_from_seed(config.seed);
        let starts = (0..config.random_starts.max(1))
            .map(|_| {
                let u = haar_unitary(d, &mut rng);
                MeasurementParams::from_unitary(&u).expect("square unitary").angles
            })
            .collect();
        (starts, 0, 0.25)
    }
}

fn minimize(objective: &ConditionalEntropyObjective, config: &OptimizerConfig) -> Minimum {
    let (starts, grid_evals, step) = starting_points(objective, config);
    let opts = NelderMeadOptions {
        xtol: config.xtol,
        max_evals: config.max_evals,
        initial_step: step,
    };
    let runs: Vec<_> = starts
        .par_iter()
        .map(|x0| nelder_mead(|x| objective.evaluate_angles(x), x0, &opts))
        .collect();

    let lowest = runs.iter().map(|r| r.fx).fold(f64::INFINITY, f64::min);
    let highest = runs.iter().map(|r| r.fx).fold(f64::NEG_INFINITY, f64::max);
    let best_start = runs
        .iter()
        .position(|r| r.fx <= lowest + TIE_TOL)
        .expect("at least one run");
    let best = &runs[best_start];
    let argmin = MeasurementParams {
        party_dim: objective.party_dim(),
        angles: best.x.clone(),
    }
    .canonical();
    Minimum {
        value: best.fx,
        argmin,
        diagnostics: OptimizerDiagnostics {
            restarts: runs.len(),
            evaluations: grid_evals + runs.iter().map(|r| r.evals).sum::<usize>(),
            spread: highest - lowest,
            converged_starts: runs.iter().filter(|r| r.converged).count(),
            best_start,
            projective_only: true,
        },
    }
}

/// `min over projective measurements on measured of Σᵢ pᵢ S(ρ_target|i)`.
pub fn min_avg_conditional_entropy<S: AsRef<str>>(
    rho: &DensityMatrix,
    measured: &[S],
    target: &[S],
) -> Result<Minimum> {
    min_avg_conditional_entropy_with(rho, measured, target, &OptimizerConfig::default())
}

pub fn min_avg_conditional_entropy_with<S: AsRef<str>>(
    rho: &DensityMatrix,
    measured: &[S],
    target: &[S],
    config: &OptimizerConfig,
) -> Result<Minimum> {
    Ok(ConditionalEntropyObjective::new(rho, measured, target)?.minimize(config))
}

/// `min over projective measurements on measured of S(Σᵢ Πᵢ ρ Πᵢ)`.
pub fn min_dephased_entropy<S: AsRef<str>>(
    rho: &DensityMatrix,
    measured: &[S],
    config: &OptimizerConfig,
) -> Result<Minimum> {
    Ok(ConditionalEntropyObjective::dephased(rho, measured)?.minimize(config))
}
