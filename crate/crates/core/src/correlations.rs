//! Discord and classical correlation, interrogated conditional mutual
//! information, two-qubit entanglement of formation and the one-way work
//! deficit.
//!
//! Arrow convention: `D→(ρ_XY)` measures the first party `X`, `D←(ρ_XY)`
//! measures `Y`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::entropy::{mutual_information, require_arity, subsystem_entropy, von_neumann, EntropyTable};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, hermitian_eigenvalues, pauli_y, ComplexMatrix, ZERO};
use crate::measure::{
    min_dephased_entropy, ConditionalEntropyObjective, Minimum, OptimizerConfig, OptimizerDiagnostics,
};
use crate::states::{DensityMatrix, PURITY_TOL};

/// Which side of a bipartition gets measured: `Right` measures the anchor,
/// `Left` measures the rest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Right,
    Left,
}

#[derive(Debug, Clone, Serialize)]
pub struct Discord {
    /// `Ĩ(measured:target)`.
    pub mutual_info: f64,
    /// `S(target) - min Σ pᵢ S(target|i)`.
    pub classical: f64,
    /// `mutual_info - classical`.
    pub discord: f64,
    /// The optimized conditional entropy `S(target|measured)`.
    pub conditional_entropy: f64,
    pub diagnostics: OptimizerDiagnostics,
}

impl Discord {
    fn from_minimum(mutual_info: f64, s_target: f64, min: &Minimum) -> Self {
        let classical = s_target - min.value;
        Self {
            mutual_info,
            classical,
            discord: mutual_info - classical,
            conditional_entropy: min.value,
            diagnostics: min.diagnostics.clone(),
        }
    }
}

/// Discord with `measured` measured, target `target`. Parties outside both
/// sets are traced out.
pub fn discord<S: AsRef<str>>(rho: &DensityMatrix, measured: &[S], target: &[S]) -> Result<Discord> {
    discord_with(rho, measured, target, &OptimizerConfig::default())
}

pub fn discord_with<S: AsRef<str>>(
    rho: &DensityMatrix,
    measured: &[S],
    target: &[S],
    config: &OptimizerConfig,
) -> Result<Discord> {
    let objective = ConditionalEntropyObjective::new(rho, measured, target)?;
    let min = objective.minimize(config);
    let mi = mutual_information(rho, measured, target)?;
    let s_target = subsystem_entropy(rho, target)?;
    Ok(Discord::from_minimum(mi, s_target, &min))
}

pub(crate) fn ensure_pure(rho: &DensityMatrix) -> Result<()> {
    let purity = rho.purity();
    if purity < 1.0 - PURITY_TOL {
        Err(Error::NotPure(purity))
    } else {
        Ok(())
    }
}

fn complement(rho: &DensityMatrix, anchor: &str) -> Result<Vec<String>> {
    let a = rho.dims().index_of(anchor)?;
    Ok(rho
        .labels()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != a)
        .map(|(_, l)| l.clone())
        .collect())
}

/// Discord between `anchor` and all other parties of a pure state.
///
/// `Left` (measurement on the rest) returns `S(ρ_anchor)` directly; `Right`
/// optimizes a measurement on the anchor, which for a pure state must agree
/// with `S(ρ_anchor)` up to optimizer error.
pub fn discord_bipartition(rho: &DensityMatrix, anchor: &str, direction: Direction) -> Result<f64> {
    ensure_pure(rho)?;
    let rest = complement(rho, anchor)?;
    if rest.is_empty() {
        return Err(Error::InvalidArgument("bipartition needs at least two parties".into()));
    }
    match direction {
        Direction::Left => subsystem_entropy(rho, &[anchor]),
        Direction::Right => Ok(discord(rho, &[anchor.to_string()], &rest)?.discord),
    }
}

/// `I_A(B:C|A) = S(B|A) + S(C|A) - S(BC|A)` with each conditional entropy
/// optimized on its own.
#[derive(Debug, Clone, Serialize)]
pub struct InterrogatedCmi {
    pub value: f64,
    pub s_b_given_a: f64,
    pub s_c_given_a: f64,
    pub s_bc_given_a: f64,
    /// Diagnostics of the three optimizations, in the order B, C, BC.
    pub diagnostics: [OptimizerDiagnostics; 3],
}

pub fn interrogated_cmi(rho: &DensityMatrix, anchor: &str) -> Result<InterrogatedCmi> {
    interrogated_cmi_with(rho, anchor, &OptimizerConfig::default())
}

pub fn interrogated_cmi_with(rho: &DensityMatrix, anchor: &str, config: &OptimizerConfig) -> Result<InterrogatedCmi> {
    require_arity(rho.dims(), 3)?;
    let rest = complement(rho, anchor)?;
    let a = [anchor];
    let b = [rest[0].as_str()];
    let c = [rest[1].as_str()];
    let bc = [rest[0].as_str(), rest[1].as_str()];
    let ob = ConditionalEntropyObjective::new(rho, &a, &b)?;
    let oc = ConditionalEntropyObjective::new(rho, &a, &c)?;
    let obc = ConditionalEntropyObjective::new(rho, &a, &bc)?;
    let (mb, (mc, mbc)) = rayon::join(
        || ob.minimize(config),
        || rayon::join(|| oc.minimize(config), || obc.minimize(config)),
    );
    Ok(InterrogatedCmi {
        value: mb.value + mc.value - mbc.value,
        s_b_given_a: mb.value,
        s_c_given_a: mc.value,
        s_bc_given_a: mbc.value,
        diagnostics: [mb.diagnostics, mc.diagnostics, mbc.diagnostics],
    })
}

/// `I_A(B:C|A) - Ĩ(B:C)`.
pub fn interrogated_interaction_info(rho: &DensityMatrix, anchor: &str) -> Result<f64> {
    let cmi = interrogated_cmi(rho, anchor)?;
    let rest = complement(rho, anchor)?;
    Ok(cmi.value - mutual_information(rho, &[&rest[0]], &[&rest[1]])?)
}

fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    require_arity(rho.dims(), 2)?;
    if rho.dims().dims() != [2, 2] {
        return Err(Error::DimensionMismatch(format!(
            "two-qubit state expected, got dimensions {:?}",
            rho.dims().dims()
        )));
    }
    Ok(())
}

/// Two-qubit concurrence `max(0, λ₁ - λ₂ - λ₃ - λ₄)`, where the `λᵢ` are
/// the square roots of the spectrum of `ρ (Y⊗Y) ρ* (Y⊗Y)`.
///
/// Computed without square-rooting noisy eigenvalues: with `ρ = W W†`,
/// `W = V √Λ`, the `λᵢ` are the singular values of `τ = Wᵀ (Y⊗Y) W`, read
/// off the Hermitian dilation `[[0, τ], [τ†, 0]]`.
pub fn concurrence_2q(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubits(rho)?;
    let yy = pauli_y().kron(&pauli_y());
    let eig = hermitian_eig(rho.matrix())?;
    let w = ComplexMatrix::from_fn(4, 4, |i, k| eig.vectors[(i, k)] * eig.values[k].max(0.0).sqrt());
    let wt = ComplexMatrix::from_fn(4, 4, |i, j| w[(j, i)]);
    let tau = &(&wt * &yy) * &w;
    let dilation = ComplexMatrix::from_fn(8, 8, |i, j| match (i < 4, j < 4) {
        (true, false) => tau[(i, j - 4)],
        (false, true) => tau[(j, i - 4)].conj(),
        _ => ZERO,
    });
    let values = hermitian_eigenvalues(&dilation)?;
    let lambda: Vec<f64> = values[..4].iter().map(|x| x.max(0.0)).collect();
    Ok((lambda[0] - lambda[1] - lambda[2] - lambda[3]).clamp(0.0, 1.0))
}

/// `h(x) = -x log₂ x - (1-x) log₂(1-x)`.
pub fn binary_entropy(x: f64) -> f64 {
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    term(x) + term(1.0 - x)
}

pub fn eof_from_concurrence(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    binary_entropy(0.5 * (1.0 + (1.0 - c * c).sqrt()))
}

pub fn eof_2q(rho: &DensityMatrix) -> Result<f64> {
    Ok(eof_from_concurrence(concurrence_2q(rho)?))
}

/// Entanglement of formation of the pair `(x, y)` of a state: Wootters'
/// formula on the two-qubit reduction.
pub fn pair_eof(rho: &DensityMatrix, x: &str, y: &str) -> Result<f64> {
    eof_2q(&rho.marginal(&[x, y])?)
}

/// One-way work deficit: `min over projective measurements on measured of
/// S(Σᵢ Πᵢ ρ Πᵢ) - S(ρ)`.
pub fn work_deficit_oneway<S: AsRef<str>>(rho: &DensityMatrix, measured: &[S]) -> Result<f64> {
    Ok(work_deficit_oneway_with(rho, measured, &OptimizerConfig::default())?.0)
}

pub fn work_deficit_oneway_with<S: AsRef<str>>(
    rho: &DensityMatrix,
    measured: &[S],
    config: &OptimizerConfig,
) -> Result<(f64, OptimizerDiagnostics)> {
    let idx = rho.dims().indices(measured)?;
    if rho.dims().dim_of(&idx) > 4 {
        return Err(Error::InvalidArgument(
            "measured party dimension must be at most 4".into(),
        ));
    }
    let min = min_dephased_entropy(rho, measured, config)?;
    Ok((min.value - von_neumann(rho), min.diagnostics))
}

/// Measures of one ordered pair `(measured, target)` of single parties.
#[derive(Debug, Clone, Serialize)]
pub struct PairReport {
    pub measured: String,
    pub target: String,
    pub mutual_info: f64,
    pub classical: f64,
    pub discord: f64,
    pub work_deficit: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub concurrence: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eof: Option<f64>,
}

/// One party against all the others.
#[derive(Debug, Clone, Serialize)]
pub struct BipartitionReport {
    pub anchor: String,
    pub rest: Vec<String>,
    pub mutual_info: f64,
    /// Measurement on the anchor.
    pub discord_right: f64,
    pub classical_right: f64,
    /// Measurement on the rest; omitted when the rest is larger than
    /// dimension 4 and the state is mixed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discord_left: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classical_left: Option<f64>,
    /// Entanglement entropy, for pure states only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eof: Option<f64>,
    /// True when `discord_left` comes from a composite-party optimization
    /// on a mixed state (restricted family, biased upward).
    pub left_heuristic: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportDiagnostics {
    pub optimizations: usize,
    pub evaluations: usize,
    pub max_spread: f64,
    pub projective_only: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrelationReport {
    pub labels: Vec<String>,
    pub dims: Vec<usize>,
    pub pure: bool,
    /// Entropy of each nonempty subset of parties, keyed by concatenated labels.
    pub entropies: BTreeMap<String, f64>,
    pub pairs: Vec<PairReport>,
    pub bipartitions: Vec<BipartitionReport>,
    pub diagnostics: ReportDiagnostics,
}

struct DiagAcc(ReportDiagnostics);

impl DiagAcc {
    fn add(&mut self, d: &OptimizerDiagnostics) {
        self.0.optimizations += 1;
        self.0.evaluations += d.evaluations;
        self.0.max_spread = self.0.max_spread.max(d.spread);
    }
}

pub fn correlation_report(rho: &DensityMatrix, config: &OptimizerConfig) -> Result<CorrelationReport> {
    let n = rho.num_parties();
    if n < 2 {
        return Err(Error::WrongArity { expected: 2, got: n });
    }
    let labels = rho.labels().to_vec();
    let dims = rho.dims().dims().to_vec();
    let pure = rho.purity() >= 1.0 - PURITY_TOL;
    let table = EntropyTable::from_density(rho);
    let mut entropies = BTreeMap::new();
    for mask in 1..(1usize << n) {
        let key: String = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| labels[i].as_str())
            .collect();
        entropies.insert(key, table.by_mask(mask));
    }
    let mut acc = DiagAcc(ReportDiagnostics {
        optimizations: 0,
        evaluations: 0,
        max_spread: 0.0,
        projective_only: true,
    });

    let mut pairs = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            let (lx, ly) = (labels[x].as_str(), labels[y].as_str());
            let pair = rho.marginal(&[lx, ly])?;
            let d = discord_with(&pair, &[lx], &[ly], config)?;
            acc.add(&d.diagnostics);
            let (wd, wdiag) = work_deficit_oneway_with(&pair, &[lx], config)?;
            acc.add(&wdiag);
            let qubits = dims[x] == 2 && dims[y] == 2;
            let concurrence = if qubits { Some(concurrence_2q(&pair)?) } else { None };
            pairs.push(PairReport {
                measured: lx.to_string(),
                target: ly.to_string(),
                mutual_info: d.mutual_info,
                classical: d.classical,
                discord: d.discord,
                work_deficit: wd,
                concurrence,
                eof: concurrence.map(eof_from_concurrence),
            });
        }
    }

    let mut bipartitions = Vec::new();
    if n >= 3 {
        for x in 0..n {
            let anchor = labels[x].as_str();
            let rest: Vec<String> = labels
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != x)
                .map(|(_, l)| l.clone())
                .collect();
            let right = discord_with(rho, &[anchor.to_string()], &rest, config)?;
            acc.add(&right.diagnostics);
            let rest_dim: usize = (0..n).filter(|&i| i != x).map(|i| dims[i]).product();
            let s_anchor = table.get(&[anchor])?;
            let (discord_left, classical_left, left_heuristic) = if pure {
                // Pure state: S(anchor | rest measured) = 0 at the Schmidt basis.
                (Some(s_anchor), Some(s_anchor), false)
            } else if rest_dim <= 4 {
                let left = discord_with(rho, &rest, &[anchor.to_string()], config)?;
                acc.add(&left.diagnostics);
                (Some(left.discord), Some(left.classical), true)
            } else {
                (None, None, false)
            };
            bipartitions.push(BipartitionReport {
                anchor: anchor.to_string(),
                rest,
                mutual_info: right.mutual_info,
                discord_right: right.discord,
                classical_right: right.classical,
                discord_left,
                classical_left,
                eof: pure.then_some(s_anchor),
                left_heuristic,
            });
        }
    }

    Ok(CorrelationReport {
        labels,
        dims,
        pure,
        entropies,
        pairs,
        bipartitions,
        diagnostics: acc.0,
    })
}

/// Two-qubit state from a real 4×4 matrix; test helper shared with the
/// integration tests.
#[doc(hidden)]
pub fn two_qubit(entries: &[f64]) -> Result<DensityMatrix> {
    let m = ComplexMatrix::from_real(4, 4, entries)?;
    DensityMatrix::new(m, crate::linalg::DimensionList::qubits(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DimensionList;
    use crate::measure::min_avg_conditional_entropy;
    use crate::states::{ghz, haar_random_pure, haar_unitary, product_zero, psi_tilde, random_mixed, rng_from_seed};
    use std::f64::consts::{PI, TAU};

    fn bell() -> DensityMatrix {
        two_qubit(&[0.5, 0., 0., 0.5, 0., 0., 0., 0., 0., 0., 0., 0., 0.5, 0., 0., 0.5]).unwrap()
    }

    #[test]
    fn discord_examples() {
        let g = ghz(3).marginal(&["A", "B"]).unwrap();
        let d = discord(&g, &["A"], &["B"]).unwrap();
        assert!(d.discord.abs() < 1e-9 && (d.classical - 1.0).abs() < 1e-9);
        let b = discord(&bell(), &["A"], &["B"]).unwrap();
        assert!((b.discord - 1.0).abs() < 1e-9 && (b.classical - 1.0).abs() < 1e-9);
        assert!((b.classical + b.discord - b.mutual_info).abs() <= 1e-12);
    }

    #[test]
    fn w_family_pair_matches_grid() {
        let rho = psi_tilde(1.0 / 3.0, 1.0).unwrap().marginal(&["A", "B"]).unwrap();
        let d = discord(&rho, &["A"], &["B"]).unwrap();
        let obj = ConditionalEntropyObjective::new(&rho, &["A"], &["B"]).unwrap();
        let mut grid = f64::INFINITY;
        for i in 0..=360 {
            for j in 0..720 {
                grid = grid.min(obj.evaluate_angles(&[PI * i as f64 / 360.0, TAU * j as f64 / 720.0]));
            }
        }
        assert!(d.conditional_entropy <= grid + 1e-9);
        assert!(grid - d.conditional_entropy < 1e-5);
    }

    #[test]
    fn bipartition_examples() {
        let g = ghz(3).to_density();
        for dir in [Direction::Left, Direction::Right] {
            assert!((discord_bipartition(&g, "A", dir).unwrap() - 1.0).abs() < 1e-9);
            assert!(
                discord_bipartition(&product_zero(3).to_density(), "A", dir)
                    .unwrap()
                    .abs()
                    < 1e-9
            );
        }
        for seed in 0..5 {
            let rho = haar_random_pure(DimensionList::qubits(3), seed).to_density();
            let left = discord_bipartition(&rho, "A", Direction::Left).unwrap();
            let right = discord_bipartition(&rho, "A", Direction::Right).unwrap();
            assert!((left - right).abs() < 5e-4);
        }
        let mixed = random_mixed(DimensionList::qubits(3), 2, 1);
        assert!(matches!(
            discord_bipartition(&mixed, "A", Direction::Left),
            Err(Error::NotPure(_))
        ));
    }

    #[test]
    fn interrogated_cmi_examples() {
        let prod = product_zero(3).to_density();
        assert!(interrogated_cmi(&prod, "A").unwrap().value.abs() < 1e-6);
        assert!(interrogated_interaction_info(&prod, "A").unwrap().abs() < 1e-6);

        let g = ghz(3).to_density();
        let cmi = interrogated_cmi(&g, "A").unwrap();
        assert!(cmi.value.abs() < 1e-9);
        assert!(pair_eof(&g, "B", "C").unwrap().abs() < 1e-12);
        assert!((interrogated_interaction_info(&g, "A").unwrap() + 1.0).abs() < 1e-9);

        for seed in 10..15 {
            let rho = haar_random_pure(DimensionList::qubits(3), seed).to_density();
            let cmi = interrogated_cmi(&rho, "A").unwrap();
            let e = pair_eof(&rho, "B", "C").unwrap();
            assert!((cmi.value - 2.0 * e).abs() < 1e-3);
        }
        assert!(matches!(interrogated_cmi(&bell(), "A"), Err(Error::WrongArity { .. })));
    }

    #[test]
    fn concurrence_examples() {
        assert!((concurrence_2q(&bell()).unwrap() - 1.0).abs() < 1e-9);
        let a = random_mixed(DimensionList::qubits(1), 2, 3);
        let b = random_mixed(DimensionList::qubits(1), 2, 4);
        let prod = DensityMatrix::new(a.matrix().kron(b.matrix()), DimensionList::qubits(2)).unwrap();
        assert!(concurrence_2q(&prod).unwrap() < 1e-7);
        // Pure two-qubit state cos t|00> + sin t|11> has C = sin 2t.
        let t: f64 = 0.3;
        let (c, s) = (t.cos(), t.sin());
        let rho = two_qubit(&[
            c * c,
            0.,
            0.,
            c * s,
            0.,
            0.,
            0.,
            0.,
            0.,
            0.,
            0.,
            0.,
            c * s,
            0.,
            0.,
            s * s,
        ])
        .unwrap();
        assert!((concurrence_2q(&rho).unwrap() - (2.0 * t).sin()).abs() < 1e-9);
        assert!(matches!(
            concurrence_2q(&ghz(3).to_density()),
            Err(Error::WrongArity { .. })
        ));
    }

    #[test]
    fn eof_examples() {
        assert!((eof_from_concurrence(1.0) - 1.0).abs() < 1e-15);
        assert_eq!(eof_from_concurrence(0.0), 0.0);
        let mut last = -1.0;
        for k in 0..=100 {
            let e = eof_from_concurrence(k as f64 / 100.0);
            assert!(e >= last);
            last = e;
        }
        // Koashi-Winter: E(BC) equals the optimized S(B|A).
        for seed in 20..25 {
            let rho = haar_random_pure(DimensionList::qubits(3), seed).to_density();
            let e = pair_eof(&rho, "B", "C").unwrap();
            let s = min_avg_conditional_entropy(&rho, &["A"], &["B"]).unwrap().value;
            assert!((e - s).abs() < 5e-4, "seed {seed}: {e} vs {s}");
        }
    }

    #[test]
    fn w_pair_concurrence_matches_koashi_winter_route() {
        let psi = psi_tilde(1.0 / 3.0, 1.0).unwrap().to_density();
        let e = pair_eof(&psi, "B", "C").unwrap();
        let s = min_avg_conditional_entropy(&psi, &["A"], &["B"]).unwrap().value;
        assert!((e - s).abs() < 1e-3);
    }

    #[test]
    fn work_deficit_examples() {
        let g = ghz(3).marginal(&["A", "B"]).unwrap();
        assert!(work_deficit_oneway(&g, &["A"]).unwrap().abs() < 1e-9);
        assert!((work_deficit_oneway(&bell(), &["A"]).unwrap() - 1.0).abs() < 1e-9);
        assert!(
            work_deficit_oneway(&product_zero(2).to_density(), &["B"])
                .unwrap()
                .abs()
                < 1e-9
        );
        for seed in 0..10 {
            let rho = random_mixed(DimensionList::qubits(2), 3, seed);
            let d = discord(&rho, &["A"], &["B"]).unwrap().discord;
            let w = work_deficit_oneway(&rho, &["A"]).unwrap();
            assert!(w >= d - 5e-4 && w >= -1e-9);
        }
    }

    #[test]
    fn discord_is_local_unitary_invariant() {
        let rho = random_mixed(DimensionList::qubits(2), 2, 40);
        let u = haar_unitary(2, &mut rng_from_seed(41));
        let rotated = rho.apply_local_unitary("A", &u).unwrap();
        let a = discord(&rho, &["A"], &["B"]).unwrap().discord;
        let b = discord(&rotated, &["A"], &["B"]).unwrap().discord;
        assert!((a - b).abs() < 2e-5);
    }

    #[test]
    fn report_for_ghz() {
        let r = correlation_report(&ghz(3).to_density(), &OptimizerConfig::default()).unwrap();
        assert!(r.pure);
        assert!((r.entropies["A"] - 1.0).abs() < 1e-12);
        let ab = r.pairs.iter().find(|p| p.measured == "A" && p.target == "B").unwrap();
        assert!(ab.discord.abs() < 1e-9);
        for p in &r.pairs {
            assert!((p.classical + p.discord - p.mutual_info).abs() < 1e-9);
        }
        assert_eq!(r.bipartitions.len(), 3);
        assert!((r.bipartitions[0].discord_right - 1.0).abs() < 1e-6);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"discord_right\""));
    }

    #[test]
    fn report_for_mixed_three_qubits_has_left_heuristic() {
        let rho = random_mixed(DimensionList::qubits(3), 2, 77);
        let r = correlation_report(&rho, &OptimizerConfig::default()).unwrap();
        assert!(!r.pure);
        for b in &r.bipartitions {
            assert!(b.left_heuristic);
            assert!(b.discord_left.unwrap() >= -5e-4);
            assert!(b.discord_right >= -5e-4);
        }
    }
}
