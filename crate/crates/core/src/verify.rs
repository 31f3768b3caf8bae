//! Randomized identity suites: every monogamy identity evaluated on seeded
//! samples, reduced to max/mean residuals and a pass/fail verdict.
//!
//! Sample `k` of a run with seed `s` is drawn with seed `s + k` (wrapping),
//! so any single sample can be replayed on its own.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::correlations::{discord_with, work_deficit_oneway_with};
use crate::error::{Error, Result};
use crate::linalg::DimensionList;
use crate::measure::OptimizerConfig;
use crate::monogamy::{
    check_recursion_eq10, check_recursion_left, theorem1_residual, work_deficit_bounds_from, PureTripartite, Route,
};
use crate::states::{haar_random_pure, product_zero, random_mixed, DensityMatrix, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Tripartite,
    Npartite,
    Workdeficit,
    All,
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tripartite" => Ok(Suite::Tripartite),
            "npartite" => Ok(Suite::Npartite),
            "workdeficit" => Ok(Suite::Workdeficit),
            "all" => Ok(Suite::All),
            other => Err(Error::Parse(format!("unknown suite `{other}`"))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Tripartite => "tripartite",
            Suite::Npartite => "npartite",
            Suite::Workdeficit => "workdeficit",
            Suite::All => "all",
        })
    }
}

/// Where samples come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleSource {
    Haar,
    /// Every sample is the all-zero product state (degenerate smoke run).
    Product,
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub suite: Suite,
    pub n_samples: usize,
    pub seed: u64,
    /// Replaces every identity tolerance when set.
    pub tolerance: Option<f64>,
    pub source: SampleSource,
    pub optimizer: OptimizerConfig,
}

impl VerifyConfig {
    pub fn new(suite: Suite, n_samples: usize, seed: u64) -> Self {
        Self {
            suite,
            n_samples,
            seed,
            tolerance: None,
            source: SampleSource::Haar,
            optimizer: OptimizerConfig::default(),
        }
    }
}

/// Default tolerance of each identity.
pub fn default_tolerance(name: &str) -> f64 {
    match name {
        "eof_gap" | "cmi_eof" | "squashed" | "route_right" | "route_left" => 1e-3,
        "interaction_decomposition" => 1e-9,
        "right_recursion" => 5e-3,
        "left_recursion" => 1e-2,
        _ => 5e-4,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityResult {
    pub name: String,
    pub tolerance: f64,
    pub samples: usize,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub n_samples: usize,
    pub seed: u64,
    pub source: SampleSource,
    pub tolerance_override: Option<f64>,
    pub identities: Vec<IdentityResult>,
    pub max_optimizer_spread: f64,
    pub passed: bool,
}

/// Residuals of one sample: `(identity, value)` pairs, several per identity
/// allowed, plus the largest optimizer spread seen.
#[derive(Debug, Default)]
struct SampleResiduals {
    values: Vec<(&'static str, f64)>,
    spread: f64,
}

impl SampleResiduals {
    fn push(&mut self, name: &'static str, v: f64) {
        self.values.push((name, v));
    }
}

fn sample_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_add(k as u64)
}

fn pure_sample(cfg: &VerifyConfig, n: usize, k: usize) -> StateVector {
    match cfg.source {
        SampleSource::Haar => haar_random_pure(DimensionList::qubits(n), sample_seed(cfg.seed, k)),
        SampleSource::Product => product_zero(n),
    }
}

fn mixed_pair_sample(cfg: &VerifyConfig, k: usize) -> DensityMatrix {
    match cfg.source {
        SampleSource::Haar => random_mixed(DimensionList::qubits(2), 4, sample_seed(cfg.seed, k)),
        SampleSource::Product => product_zero(2).to_density(),
    }
}

/// Weight on the pure part of the `k`-th mixed sample for the interaction decomposition
/// check; cycles through 0.1, 0.5, 0.9.
pub fn mixing_weight(k: usize) -> f64 {
    [0.1, 0.5, 0.9][k % 3]
}

/// `w |ψ⟩⟨ψ| + (1 - w) I/8`.
pub fn mixed_with_identity(psi: &StateVector, w: f64) -> Result<DensityMatrix> {
    psi.to_density()
        .mix(&DensityMatrix::maximally_mixed(psi.dims().clone()), w)
}

fn tripartite_sample(cfg: &VerifyConfig, k: usize) -> Result<SampleResiduals> {
    let psi = pure_sample(cfg, 3, k);
    let t = PureTripartite::new(&psi, &cfg.optimizer)?;
    let mut r = SampleResiduals {
        spread: t.max_spread(),
        ..Default::default()
    };
    for (x, y, z) in [("A", "B", "C"), ("B", "C", "A"), ("C", "A", "B")] {
        r.push("average_relation", t.average_relation_residual(x)?);
        r.push("right_from_left", t.right_from_left_residual(x)?);
        r.push("eof_gap", t.eof_gap_residual(x, y)?);
        let (a, b) = t.lami_limi_residuals(x)?;
        r.push("lami_limi", a);
        r.push("lami_limi", b);
        r.push("left_average", t.left_average_residual(x, y)?);
        r.push("squashed", t.squashed(z)?.residual);
        r.push(
            "route_right",
            (t.delta_right(x, Route::Optimized)? - t.delta_right(x, Route::PureClosedForm)?).abs(),
        );
        r.push(
            "route_left",
            (t.delta_left(x, Route::Optimized)? - t.delta_left(x, Route::PureClosedForm)?).abs(),
        );
        // Koashi-Winter with anchor x measured: S(y|x) = E(yz), and
        // ½ I_x(y:z|x) = E(yz).
        let e_yz = t.eof(y, z)?;
        let s_y = t.pair_discord(x, y)?.conditional_entropy;
        let s_z = t.pair_discord(x, z)?.conditional_entropy;
        let s_yz = t.split_discord(x)?.conditional_entropy;
        r.push("koashi_winter", (e_yz - s_y).abs());
        r.push("cmi_eof", (e_yz - 0.5 * (s_y + s_z - s_yz)).abs());
    }
    let mixed = mixed_with_identity(&psi, mixing_weight(k))?;
    r.push(
        "interaction_decomposition",
        theorem1_residual(&mixed, "A", &cfg.optimizer)?.residual,
    );
    Ok(r)
}

fn npartite_sample(cfg: &VerifyConfig, k: usize) -> Result<SampleResiduals> {
    let psi = pure_sample(cfg, 4, k);
    let (right, left) = rayon::join(
        || check_recursion_eq10(&psi, &cfg.optimizer),
        || check_recursion_left(&psi, &cfg.optimizer),
    );
    let (right, left) = (right?, left?);
    let mut r = SampleResiduals {
        spread: right.max_spread.max(left.max_spread),
        ..Default::default()
    };
    r.push("right_recursion", right.residual);
    r.push("left_recursion", left.residual);
    Ok(r)
}

fn workdeficit_sample(cfg: &VerifyConfig, k: usize) -> Result<SampleResiduals> {
    let mut r = SampleResiduals::default();
    // Two-qubit mixed states: D ≤ work deficit in both directions. The
    // residual is the amount by which the ordering is violated.
    let rho = mixed_pair_sample(cfg, k);
    for (m, t) in [("A", "B"), ("B", "A")] {
        let d = discord_with(&rho, &[m], &[t], &cfg.optimizer)?;
        let (w, diag) = work_deficit_oneway_with(&rho, &[m], &cfg.optimizer)?;
        r.spread = r.spread.max(d.diagnostics.spread).max(diag.spread);
        r.push("discord_le_work_deficit", (d.discord - w).max(0.0));
    }
    let psi = pure_sample(cfg, 3, k);
    let t = PureTripartite::new(&psi, &cfg.optimizer)?;
    r.spread = r.spread.max(t.max_spread());
    let b = work_deficit_bounds_from(&psi, &t, "A", &cfg.optimizer)?;
    r.push("work_deficit_left_bound", b.left_gap.max(0.0));
    r.push("work_deficit_right_bound", b.right_gap.max(0.0));
    Ok(r)
}

type SampleFn = fn(&VerifyConfig, usize) -> Result<SampleResiduals>;

const TRIPARTITE: &[&str] = &[
    "average_relation",
    "right_from_left",
    "eof_gap",
    "lami_limi",
    "left_average",
    "koashi_winter",
    "cmi_eof",
    "squashed",
    "route_right",
    "route_left",
    "interaction_decomposition",
];
const NPARTITE: &[&str] = &["right_recursion", "left_recursion"];
const WORKDEFICIT: &[&str] = &[
    "discord_le_work_deficit",
    "work_deficit_left_bound",
    "work_deficit_right_bound",
];

pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyReport> {
    if cfg.n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    let mut parts: Vec<(&[&str], SampleFn)> = Vec::new();
    if matches!(cfg.suite, Suite::Tripartite | Suite::All) {
        parts.push((TRIPARTITE, tripartite_sample));
    }
    if matches!(cfg.suite, Suite::Npartite | Suite::All) {
        parts.push((NPARTITE, npartite_sample));
    }
    if matches!(cfg.suite, Suite::Workdeficit | Suite::All) {
        parts.push((WORKDEFICIT, workdeficit_sample));
    }

    let mut identities = Vec::new();
    let mut max_spread: f64 = 0.0;
    for (names, run) in parts {
        let samples: Vec<SampleResiduals> = (0..cfg.n_samples)
            .into_par_iter()
            .map(|k| run(cfg, k))
            .collect::<Result<_>>()?;
        for s in &samples {
            max_spread = max_spread.max(s.spread);
        }
        for &name in names {
            let values: Vec<f64> = samples
                .iter()
                .flat_map(|s| s.values.iter().filter(|(n, _)| *n == name).map(|(_, v)| *v))
                .collect();
            let tolerance = cfg.tolerance.unwrap_or_else(|| default_tolerance(name));
            // NaN compares false both ways; fold with a NaN-propagating max.
            let max = values.iter().fold(
                0.0f64,
                |m, &v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) },
            );
            let mean = values.iter().sum::<f64>() / values.len().max(1) as f64;
            identities.push(IdentityResult {
                name: name.to_string(),
                tolerance,
                samples: cfg.n_samples,
                max_residual: max,
                mean_residual: mean,
                passed: max <= tolerance,
            });
        }
    }
    let passed = identities.iter().all(|i| i.passed);
    Ok(VerifyReport {
        suite: cfg.suite,
        n_samples: cfg.n_samples,
        seed: cfg.seed,
        source: cfg.source,
        tolerance_override: cfg.tolerance,
        identities,
        max_optimizer_spread: max_spread,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in [Suite::Tripartite, Suite::Npartite, Suite::Workdeficit, Suite::All] {
            assert_eq!(s.to_string().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn small_tripartite_run_passes() {
        let r = run_verify(&VerifyConfig::new(Suite::Tripartite, 4, 7)).unwrap();
        assert!(r.passed, "{r:#?}");
        assert_eq!(r.identities.len(), TRIPARTITE.len());
    }

    #[test]
    fn product_source_gives_zero_residuals() {
        let mut cfg = VerifyConfig::new(Suite::All, 1, 0);
        cfg.source = SampleSource::Product;
        let r = run_verify(&cfg).unwrap();
        assert!(r.passed);
        for i in &r.identities {
            assert!(i.max_residual < 1e-9, "{} = {}", i.name, i.max_residual);
        }
    }

    #[test]
    fn tolerance_below_observed_residual_fails() {
        let mut cfg = VerifyConfig::new(Suite::Tripartite, 2, 1);
        let worst = run_verify(&cfg)
            .unwrap()
            .identities
            .iter()
            .map(|i| i.max_residual)
            .fold(0.0, f64::max);
        assert!(worst > 0.0);
        cfg.tolerance = Some(worst / 2.0);
        let r = run_verify(&cfg).unwrap();
        assert!(!r.passed);
        assert!(r.identities.iter().all(|i| i.tolerance == worst / 2.0));
    }

    #[test]
    fn runs_are_deterministic() {
        let a = run_verify(&VerifyConfig::new(Suite::Workdeficit, 2, 3)).unwrap();
        let b = run_verify(&VerifyConfig::new(Suite::Workdeficit, 2, 3)).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
