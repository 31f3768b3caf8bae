//! Monogamy deficits of discord, the identities relating them, the GHZ/W
//! classifier, and their work-deficit, squashed-entanglement and N-party
//! counterparts.
//!
//! For a party `X` with partners `Y`, `Z`:
//!
//! * `Δ→_X = D→(X|YZ) - D→(XY) - D→(XZ)` (every discord measures `X`)
//! * `Δ←_X = D←(X|YZ) - D←(XY) - D←(XZ)` (every discord measures the partner)
//!
//! On pure three-qubit states both have closed forms in local entropies and
//! pair entanglements of formation:
//!
//! * `Δ←_X = S(X) - E(XY) - E(XZ)`
//! * `Δ→_X = S(Y) + S(Z) - S(X) - 2 E(YZ)`

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::correlations::{
    discord_with, ensure_pure, eof_2q, interrogated_cmi_with, work_deficit_oneway_with, Discord,
};
use crate::entropy::{cond_mutual_info_unmeasured, mutual_information, require_arity, subsystem_entropy, EntropyTable};
use crate::error::{Error, Result};
use crate::measure::{min_dephased_entropy, OptimizerConfig};
use crate::states::{DensityMatrix, StateVector};

/// Closed-band half width around zero for the GHZ/W criterion.
pub const CLASSIFY_TOL: f64 = 1e-4;
/// Single-party entropies at or below this mark a state as not genuinely
/// tripartite.
pub const GENUINE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Route {
    #[serde(rename = "optimized")]
    Optimized,
    #[serde(rename = "pure_closed_form")]
    PureClosedForm,
}

impl Route {
    pub fn as_str(self) -> &'static str {
        match self {
            Route::Optimized => "optimized",
            Route::PureClosedForm => "pure_closed_form",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "GHZ_class")]
    GhzClass,
    #[serde(rename = "W_class")]
    WClass,
    #[serde(rename = "not_applicable")]
    NotApplicable,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::GhzClass => "GHZ_class",
            Verdict::WClass => "W_class",
            Verdict::NotApplicable => "not_applicable",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    /// `Δ←` anchored on the third party, from the closed form.
    pub delta_left_c: f64,
    /// True when `|Δ←_C| ≤ 1e-4`; such states are reported GHZ_class.
    pub boundary: bool,
}

/// Symmetrized classical correlation and discord of a pair.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AverageCorrelations {
    pub omega_i: f64,
    pub omega_d: f64,
}

impl AverageCorrelations {
    pub fn from_discords(xy: &Discord, yx: &Discord) -> Self {
        Self {
            omega_i: 0.5 * (xy.classical + yx.classical),
            omega_d: 0.5 * (xy.discord + yx.discord),
        }
    }
}

/// Averages for the pair `(x, y)` of `rho`, each discord optimized.
pub fn average_correlations<S: AsRef<str> + Sync>(
    rho: &DensityMatrix,
    x: &[S],
    y: &[S],
    config: &OptimizerConfig,
) -> Result<AverageCorrelations> {
    let (xy, yx) = rayon::join(|| discord_with(rho, x, y, config), || discord_with(rho, y, x, config));
    Ok(AverageCorrelations::from_discords(&xy?, &yx?))
}

#[derive(Debug, Clone, Serialize)]
pub struct DeficitReport {
    pub anchor: String,
    pub delta_left: f64,
    pub delta_right: f64,
    pub route: Route,
    pub identity_residuals: BTreeMap<String, f64>,
    pub classification: Verdict,
}

/// Every quantity the three-party pure-state identities need, computed once:
/// entropies, pair EOFs, the six pair discords and the three anchor-vs-rest
/// discords measured on the anchor.
#[derive(Debug, Clone)]
pub struct PureTripartite {
    labels: [String; 3],
    entropies: EntropyTable,
    eof: [[f64; 3]; 3],
    /// `pair[m][t]`: discord of the `(m, t)` reduction measuring `m`.
    pair: Vec<Vec<Option<Discord>>>,
    /// Anchor measured, target the other two.
    split: Vec<Discord>,
}

impl PureTripartite {
    pub fn new(psi: &StateVector, config: &OptimizerConfig) -> Result<Self> {
        require_arity(psi.dims(), 3)?;
        if psi.dims().dims() != [2, 2, 2] {
            return Err(Error::DimensionMismatch("three qubits expected".into()));
        }
        let rho = psi.to_density();
        let labels: [String; 3] = [
            psi.labels()[0].clone(),
            psi.labels()[1].clone(),
            psi.labels()[2].clone(),
        ];
        let entropies = EntropyTable::from_pure(psi);

        let mut eof = [[0.0; 3]; 3];
        for x in 0..3 {
            for y in x + 1..3 {
                let e = eof_2q(&psi.marginal(&[&labels[x], &labels[y]])?)?;
                eof[x][y] = e;
                eof[y][x] = e;
            }
        }

        // Nine independent optimizations: six ordered pairs, three splits.
        let tasks: Vec<(usize, Option<usize>)> = (0..3)
            .flat_map(|m| (0..3).filter(move |&t| t != m).map(move |t| (m, Some(t))))
            .chain((0..3).map(|m| (m, None)))
            .collect();
        let results: Vec<Result<Discord>> = tasks
            .par_iter()
            .map(|&(m, t)| match t {
                Some(t) => {
                    let pair = psi.marginal(&[&labels[m], &labels[t]])?;
                    discord_with(&pair, &[&labels[m]], &[&labels[t]], config)
                }
                None => {
                    let rest: Vec<&str> = (0..3).filter(|&i| i != m).map(|i| labels[i].as_str()).collect();
                    discord_with(&rho, &[labels[m].as_str()], &rest, config)
                }
            })
            .collect();
        let mut pair = vec![vec![None, None, None]; 3];
        let mut split = Vec::with_capacity(3);
        for (&(m, t), r) in tasks.iter().zip(results) {
            let d = r?;
            match t {
                Some(t) => pair[m][t] = Some(d),
                None => split.push(d),
            }
        }
        Ok(Self {
            labels,
            entropies,
            eof,
            pair,
            split,
        })
    }

    pub fn labels(&self) -> &[String; 3] {
        &self.labels
    }

    fn idx(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    fn others(i: usize) -> (usize, usize) {
        match i {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        }
    }

    fn s(&self, i: usize) -> f64 {
        self.entropies.by_mask(1 << i)
    }

    pub fn entropy(&self, label: &str) -> Result<f64> {
        Ok(self.s(self.idx(label)?))
    }

    pub fn eof(&self, x: &str, y: &str) -> Result<f64> {
        Ok(self.eof[self.idx(x)?][self.idx(y)?])
    }

    fn d(&self, m: usize, t: usize) -> &Discord {
        self.pair[m][t].as_ref().expect("all ordered pairs computed")
    }

    /// Discord of the `(measured, target)` reduction, measuring `measured`.
    pub fn pair_discord(&self, measured: &str, target: &str) -> Result<&Discord> {
        let (m, t) = (self.idx(measured)?, self.idx(target)?);
        if m == t {
            return Err(Error::OverlappingParties(measured.to_string()));
        }
        Ok(self.d(m, t))
    }

    pub fn split_discord(&self, anchor: &str) -> Result<&Discord> {
        Ok(&self.split[self.idx(anchor)?])
    }

    fn right_closed(&self, x: usize) -> f64 {
        let (y, z) = Self::others(x);
        self.s(y) + self.s(z) - self.s(x) - 2.0 * self.eof[y][z]
    }

    fn left_closed(&self, x: usize) -> f64 {
        let (y, z) = Self::others(x);
        self.s(x) - self.eof[x][y] - self.eof[x][z]
    }

    fn right_opt(&self, x: usize) -> f64 {
        let (y, z) = Self::others(x);
        self.split[x].discord - self.d(x, y).discord - self.d(x, z).discord
    }

    /// `D←(X|YZ)` is `S(X)` for a pure state; the pair terms are optimized.
    fn left_opt(&self, x: usize) -> f64 {
        let (y, z) = Self::others(x);
        self.s(x) - self.d(y, x).discord - self.d(z, x).discord
    }

    pub fn delta_right(&self, anchor: &str, route: Route) -> Result<f64> {
        let x = self.idx(anchor)?;
        Ok(match route {
            Route::Optimized => self.right_opt(x),
            Route::PureClosedForm => self.right_closed(x),
        })
    }

    pub fn delta_left(&self, anchor: &str, route: Route) -> Result<f64> {
        let x = self.idx(anchor)?;
        Ok(match route {
            Route::Optimized => self.left_opt(x),
            Route::PureClosedForm => self.left_closed(x),
        })
    }

    pub fn average(&self, x: &str, y: &str) -> Result<AverageCorrelations> {
        let (a, b) = (self.idx(x)?, self.idx(y)?);
        Ok(AverageCorrelations::from_discords(self.d(a, b), self.d(b, a)))
    }

    /// `|Δ←_X - ½(Δ→_Y + Δ→_Z)|`.
    pub fn average_relation_residual(&self, anchor: &str) -> Result<f64> {
        let x = self.idx(anchor)?;
        let (y, z) = Self::others(x);
        Ok((self.left_opt(x) - 0.5 * (self.right_opt(y) + self.right_opt(z))).abs())
    }

    /// `|Δ→_X - (Δ←_Y + Δ←_Z - Δ←_X)|`.
    pub fn right_from_left_residual(&self, anchor: &str) -> Result<f64> {
        let x = self.idx(anchor)?;
        let (y, z) = Self::others(x);
        Ok((self.right_opt(x) - (self.left_opt(y) + self.left_opt(z) - self.left_opt(x))).abs())
    }

    /// `|E(XY) - ω̄_D(X|Y) - ½(Δ←_Z - Δ→_Z)|` with `Z` the third party.
    pub fn eof_gap_residual(&self, x: &str, y: &str) -> Result<f64> {
        let (a, b) = (self.idx(x)?, self.idx(y)?);
        let z = 3 - a - b;
        let avg = self.average(x, y)?;
        Ok((self.eof[a][b] - avg.omega_d - 0.5 * (self.left_opt(z) - self.right_opt(z))).abs())
    }

    /// `|Δ→_X - (I→(XY) - D→(XY))|` for both partners `Y`.
    pub fn lami_limi_residuals(&self, anchor: &str) -> Result<(f64, f64)> {
        let x = self.idx(anchor)?;
        let (y, z) = Self::others(x);
        let delta = self.right_opt(x);
        let via = |t: usize| {
            let d = self.d(x, t);
            (delta - (d.classical - d.discord)).abs()
        };
        Ok((via(y), via(z)))
    }

    /// `|Δ←_Z - (ω̄_I(X|Y) - ω̄_D(X|Y))|` with `Z` the third party.
    pub fn left_average_residual(&self, x: &str, y: &str) -> Result<f64> {
        let (a, b) = (self.idx(x)?, self.idx(y)?);
        let z = 3 - a - b;
        let avg = self.average(x, y)?;
        Ok((self.left_opt(z) - (avg.omega_i - avg.omega_d)).abs())
    }

    /// `Δ_{E_X} = S(X) - E(XY) - E(XZ)` against the optimized `Δ←_X`.
    pub fn squashed(&self, anchor: &str) -> Result<SquashedReport> {
        let x = self.idx(anchor)?;
        let delta_e = self.left_closed(x);
        let delta_left = self.left_opt(x);
        Ok(SquashedReport {
            anchor: anchor.to_string(),
            delta_e,
            delta_left_discord: delta_left,
            residual: (delta_e - delta_left).abs(),
            lower_bound: delta_left.max(0.0),
            bound_status: "implied_by_identity",
        })
    }

    pub fn classification(&self) -> Classification {
        classify_from(self.s(0), self.s(1), self.s(2), self.left_closed(2))
    }

    pub fn max_spread(&self) -> f64 {
        self.pair
            .iter()
            .flatten()
            .flatten()
            .chain(&self.split)
            .map(|d| d.diagnostics.spread)
            .fold(0.0, f64::max)
    }

    /// Both deficits on `anchor`, every identity residual that involves it,
    /// and the GHZ/W verdict.
    pub fn report(&self, anchor: &str, route: Route) -> Result<DeficitReport> {
        let x = self.idx(anchor)?;
        let (y, z) = Self::others(x);
        let (ly, lz) = (self.labels[y].as_str(), self.labels[z].as_str());
        let mut residuals = BTreeMap::new();
        residuals.insert("average_relation".to_string(), self.average_relation_residual(anchor)?);
        residuals.insert("right_from_left".to_string(), self.right_from_left_residual(anchor)?);
        residuals.insert("eof_gap".to_string(), self.eof_gap_residual(ly, lz)?);
        let (r1, r2) = self.lami_limi_residuals(anchor)?;
        residuals.insert(format!("lami_limi_{}{}", anchor, ly), r1);
        residuals.insert(format!("lami_limi_{}{}", anchor, lz), r2);
        residuals.insert("left_average".to_string(), self.left_average_residual(ly, lz)?);
        residuals.insert(
            "route_right".to_string(),
            (self.right_opt(x) - self.right_closed(x)).abs(),
        );
        residuals.insert("route_left".to_string(), (self.left_opt(x) - self.left_closed(x)).abs());
        Ok(DeficitReport {
            anchor: anchor.to_string(),
            delta_left: self.delta_left(anchor, route)?,
            delta_right: self.delta_right(anchor, route)?,
            route,
            identity_residuals: residuals,
            classification: self.classification().verdict,
        })
    }
}

fn classify_from(sa: f64, sb: f64, sc: f64, delta_left_c: f64) -> Classification {
    if sa <= GENUINE_TOL || sb <= GENUINE_TOL || sc <= GENUINE_TOL {
        return Classification {
            verdict: Verdict::NotApplicable,
            delta_left_c,
            boundary: false,
        };
    }
    let verdict = if delta_left_c >= -CLASSIFY_TOL {
        Verdict::GhzClass
    } else {
        Verdict::WClass
    };
    Classification {
        verdict,
        delta_left_c,
        boundary: delta_left_c.abs() <= CLASSIFY_TOL,
    }
}

fn require_three_qubits(psi: &StateVector) -> Result<()> {
    require_arity(psi.dims(), 3)?;
    if psi.dims().dims() != [2, 2, 2] {
        return Err(Error::DimensionMismatch("three qubits expected".into()));
    }
    Ok(())
}

/// GHZ class iff `Δ←_C ≥ 0` (closed form, band `1e-4`); `not_applicable`
/// when some single-party entropy vanishes.
pub fn classify_ghz_w(psi: &StateVector) -> Result<Classification> {
    require_three_qubits(psi)?;
    let t = EntropyTable::from_pure(psi);
    let l = psi.labels();
    let e_ca = eof_2q(&psi.marginal(&[&l[0], &l[2]])?)?;
    let e_cb = eof_2q(&psi.marginal(&[&l[1], &l[2]])?)?;
    let (sa, sb, sc) = (t.by_mask(1), t.by_mask(2), t.by_mask(4));
    Ok(classify_from(sa, sb, sc, sc - e_ca - e_cb))
}

fn tripartite(psi: &StateVector) -> Result<PureTripartite> {
    PureTripartite::new(psi, &OptimizerConfig::default())
}

fn first_three(psi: &StateVector) -> (String, String, String) {
    let l = psi.labels();
    (l[0].clone(), l[1].clone(), l[2].clone())
}

pub fn check_relation_eq4(psi: &StateVector) -> Result<f64> {
    tripartite(psi)?.average_relation_residual(&psi.labels()[0])
}

pub fn check_relation_eq5(psi: &StateVector) -> Result<f64> {
    tripartite(psi)?.right_from_left_residual(&psi.labels()[0])
}

pub fn check_difference_eq8(psi: &StateVector) -> Result<f64> {
    let (a, b, _) = first_three(psi);
    tripartite(psi)?.eof_gap_residual(&a, &b)
}

pub fn check_lami_limi_eq9(psi: &StateVector, anchor: &str) -> Result<(f64, f64)> {
    tripartite(psi)?.lami_limi_residuals(anchor)
}

pub fn check_avg_eq13(psi: &StateVector) -> Result<f64> {
    let (a, b, _) = first_three(psi);
    tripartite(psi)?.left_average_residual(&a, &b)
}

#[derive(Debug, Clone, Serialize)]
pub struct DeficitValue {
    pub value: f64,
    pub route: Route,
    /// Set when a composite-party optimization on a mixed state was needed.
    pub heuristic: bool,
    pub max_spread: f64,
}

fn split_labels(rho: &DensityMatrix, anchor: &str) -> Result<Vec<String>> {
    let a = rho.dims().index_of(anchor)?;
    if rho.dims().dims()[a] != 2 {
        return Err(Error::DimensionMismatch(format!("anchor `{anchor}` must be a qubit")));
    }
    Ok(rho
        .labels()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != a)
        .map(|(_, l)| l.clone())
        .collect())
}

/// `D→(anchor|rest) - Σᵢ D→(anchor, i)`, every discord optimized with the
/// measurement on the anchor. Works for any number of parties and mixed
/// states.
pub fn deficit_right(rho: &DensityMatrix, anchor: &str, config: &OptimizerConfig) -> Result<DeficitValue> {
    let rest = split_labels(rho, anchor)?;
    if rest.len() < 2 {
        return Err(Error::WrongArity {
            expected: 3,
            got: rho.num_parties(),
        });
    }
    let whole = discord_with(rho, &[anchor.to_string()], &rest, config)?;
    let pairs: Vec<Discord> = rest
        .par_iter()
        .map(|p| discord_with(&rho.marginal(&[anchor, p])?, &[anchor], &[p.as_str()], config))
        .collect::<Result<_>>()?;
    let value = whole.discord - pairs.iter().map(|d| d.discord).sum::<f64>();
    let max_spread = pairs
        .iter()
        .chain(std::iter::once(&whole))
        .map(|d| d.diagnostics.spread)
        .fold(0.0, f64::max);
    Ok(DeficitValue {
        value,
        route: Route::Optimized,
        heuristic: false,
        max_spread,
    })
}

/// `D←(anchor|rest) - Σᵢ D←(anchor, i)` on three parties.
///
/// Pure states use the closed form. Mixed states need `D←(anchor|rest)` with
/// a four-dimensional composite measurement, so the result is flagged
/// heuristic: the restricted measurement family can only overestimate the
/// minimized conditional entropy, biasing that term low.
pub fn deficit_left(rho: &DensityMatrix, anchor: &str, config: &OptimizerConfig) -> Result<DeficitValue> {
    require_arity(rho.dims(), 3)?;
    let rest = split_labels(rho, anchor)?;
    if ensure_pure(rho).is_ok() {
        let s = |p: &[&str]| subsystem_entropy(rho, p);
        let e1 = eof_2q(&rho.marginal(&[anchor, &rest[0]])?)?;
        let e2 = eof_2q(&rho.marginal(&[anchor, &rest[1]])?)?;
        return Ok(DeficitValue {
            value: s(&[anchor])? - e1 - e2,
            route: Route::PureClosedForm,
            heuristic: false,
            max_spread: 0.0,
        });
    }
    let whole = discord_with(rho, &rest, &[anchor.to_string()], config)?;
    let pairs: Vec<Discord> = rest
        .par_iter()
        .map(|p| discord_with(&rho.marginal(&[anchor, p])?, &[p.as_str()], &[anchor], config))
        .collect::<Result<_>>()?;
    let value = whole.discord - pairs.iter().map(|d| d.discord).sum::<f64>();
    let max_spread = pairs
        .iter()
        .chain(std::iter::once(&whole))
        .map(|d| d.diagnostics.spread)
        .fold(0.0, f64::max);
    Ok(DeficitValue {
        value,
        route: Route::Optimized,
        heuristic: true,
        max_spread,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct InteractionDecomposition {
    pub delta_right: f64,
    /// `Ĩ_A = Ĩ(B:C|A) - Ĩ(B:C)`, zero for pure states.
    pub unmeasured_interaction: f64,
    /// `I_A = I_A(B:C|A) - Ĩ(B:C)` from the same three optimizations.
    pub interrogated_interaction: f64,
    pub residual: f64,
}

/// `|Δ→_A - (Ĩ_A - I_A)|` with the unmeasured and interrogated interaction
/// informations. The discords in `Δ→_A` and the conditional entropies in
/// `I_A` come from the same three optimizer runs.
pub fn theorem1_residual(
    rho: &DensityMatrix,
    anchor: &str,
    config: &OptimizerConfig,
) -> Result<InteractionDecomposition> {
    require_arity(rho.dims(), 3)?;
    let rest = split_labels(rho, anchor)?;
    let (b, c) = (rest[0].as_str(), rest[1].as_str());
    let cmi = interrogated_cmi_with(rho, anchor, config)?;
    let s = |p: &[&str]| subsystem_entropy(rho, p);
    // D→(A|X) = Ĩ(A:X) - (S(X) - S(X|A)) with the shared S(X|A).
    let d_bc = mutual_information(rho, &[anchor], &[b, c])? - (s(&[b, c])? - cmi.s_bc_given_a);
    let d_b = mutual_information(rho, &[anchor], &[b])? - (s(&[b])? - cmi.s_b_given_a);
    let d_c = mutual_information(rho, &[anchor], &[c])? - (s(&[c])? - cmi.s_c_given_a);
    let delta_right = d_bc - d_b - d_c;
    let pair_mi = mutual_information(rho, &[b], &[c])?;
    let unmeasured = cond_mutual_info_unmeasured(rho, &[b], &[c], &[anchor])? - pair_mi;
    let interrogated = cmi.value - pair_mi;
    Ok(InteractionDecomposition {
        delta_right,
        unmeasured_interaction: unmeasured,
        interrogated_interaction: interrogated,
        residual: (delta_right - (unmeasured - interrogated)).abs(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SquashedReport {
    pub anchor: String,
    /// `E(X|rest) - E(XY) - E(XZ)` with `E(X|rest) = S(X)`.
    pub delta_e: f64,
    pub delta_left_discord: f64,
    pub residual: f64,
    /// `max{Δ←_X, 0}`, the lower bound on the squashed-entanglement deficit.
    pub lower_bound: f64,
    /// The bound follows from the identity plus `E_sq ≤ E`; squashed
    /// entanglement of mixed pairs is never evaluated.
    pub bound_status: &'static str,
}

pub fn squashed_bound_pure(psi: &StateVector) -> Result<SquashedReport> {
    tripartite(psi)?.squashed(&psi.labels()[2])
}

#[derive(Debug, Clone, Serialize)]
pub struct WorkDeficitBounds {
    pub anchor: String,
    pub delta_left_work: f64,
    pub delta_right_work: f64,
    pub delta_left_discord: f64,
    pub delta_right_discord: f64,
    /// `Δ←_Δ - Δ←_D`; should be ≤ 0 up to optimizer tolerance.
    pub left_gap: f64,
    pub right_gap: f64,
}

/// Work-deficit monogamy deficits on `anchor` next to the discord ones.
///
/// `Δ←(anchor:rest) = S(anchor)` for a pure state; the pair work deficits and
/// `Δ→(anchor:rest)` (dephasing the anchor) are optimized.
pub fn work_deficit_bounds(psi: &StateVector, anchor: &str, config: &OptimizerConfig) -> Result<WorkDeficitBounds> {
    require_three_qubits(psi)?;
    let t = PureTripartite::new(psi, config)?;
    work_deficit_bounds_from(psi, &t, anchor, config)
}

pub fn work_deficit_bounds_from(
    psi: &StateVector,
    t: &PureTripartite,
    anchor: &str,
    config: &OptimizerConfig,
) -> Result<WorkDeficitBounds> {
    let rho = psi.to_density();
    let rest = split_labels(&rho, anchor)?;
    let pair_states: Vec<DensityMatrix> = rest
        .iter()
        .map(|p| psi.marginal(&[anchor, p.as_str()]))
        .collect::<Result<_>>()?;
    let left_pairs: Vec<f64> = rest
        .iter()
        .zip(&pair_states)
        .map(|(p, pr)| Ok(work_deficit_oneway_with(pr, &[p.as_str()], config)?.0))
        .collect::<Result<_>>()?;
    let right_pairs: Vec<f64> = pair_states
        .iter()
        .map(|pr| Ok(work_deficit_oneway_with(pr, &[anchor], config)?.0))
        .collect::<Result<_>>()?;
    // S(ρ) = 0 for the pure whole state.
    let whole_right = min_dephased_entropy(&rho, &[anchor], config)?.value;
    let s_anchor = t.entropy(anchor)?;

    let delta_left_work = s_anchor - left_pairs.iter().sum::<f64>();
    let delta_right_work = whole_right - right_pairs.iter().sum::<f64>();
    let delta_left_discord = t.delta_left(anchor, Route::Optimized)?;
    let delta_right_discord = t.delta_right(anchor, Route::Optimized)?;
    Ok(WorkDeficitBounds {
        anchor: anchor.to_string(),
        delta_left_work,
        delta_right_work,
        delta_left_discord,
        delta_right_discord,
        left_gap: delta_left_work - delta_left_discord,
        right_gap: delta_right_work - delta_right_discord,
    })
}

fn require_pure_vector(psi: &StateVector, parties: usize) -> Result<()> {
    require_arity(psi.dims(), parties)?;
    if psi.dims().dims().iter().any(|&d| d != 2) {
        return Err(Error::DimensionMismatch("qubit parties expected".into()));
    }
    Ok(())
}

/// Per-pair discord pieces shared by the N-party deficits.
fn anchored_pair_discords(
    psi: &StateVector,
    anchor: &str,
    others: &[String],
    measure_anchor: bool,
    config: &OptimizerConfig,
) -> Result<Vec<Discord>> {
    others
        .par_iter()
        .map(|p| {
            let pair = psi.marginal(&[anchor, p.as_str()])?;
            if measure_anchor {
                discord_with(&pair, &[anchor], &[p.as_str()], config)
            } else {
                discord_with(&pair, &[p.as_str()], &[anchor], config)
            }
        })
        .collect()
}

/// `Δ→` of the first party of an N-qubit pure state:
/// `S(A₁) - Σᵢ D→(A₁Aᵢ)`, using `D→(A₁|A₂⋯A_N) = S(A₁)` for pure states.
pub fn deficit_right_npartite(psi: &StateVector, config: &OptimizerConfig) -> Result<f64> {
    let n = psi.num_parties();
    if n < 3 {
        return Err(Error::WrongArity { expected: 3, got: n });
    }
    require_pure_vector(psi, n)?;
    let labels = psi.labels();
    let s1 = subsystem_entropy(&psi.marginal(&[&labels[0]])?, &[&labels[0]])?;
    let pairs = anchored_pair_discords(psi, &labels[0], &labels[1..], true, config)?;
    Ok(s1 - pairs.iter().map(|d| d.discord).sum::<f64>())
}

#[derive(Debug, Clone, Serialize)]
pub struct RecursionReport {
    pub deficit_n: f64,
    pub deficit_n_minus_1: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub max_spread: f64,
}

/// Right recursion on four qubits:
/// `Δ→(4) - Δ→(3) = I→(A₁A₄) - D→(A₁A₄)`.
///
/// `Δ→(3)` lives on the mixed reduction `ρ_{A₁A₂A₃}`; its first term
/// `D→(A₁|A₂A₃)` is optimized there with the measurement on `A₁`.
pub fn check_recursion_eq10(psi: &StateVector, config: &OptimizerConfig) -> Result<RecursionReport> {
    require_pure_vector(psi, 4)?;
    let l = psi.labels();
    let s1 = subsystem_entropy(&psi.marginal(&[&l[0]])?, &[&l[0]])?;
    let pairs = anchored_pair_discords(psi, &l[0], &l[1..], true, config)?;
    let rho123 = psi.marginal(&[&l[0], &l[1], &l[2]])?;
    let whole3 = discord_with(&rho123, &[&l[0]], &[&l[1], &l[2]], config)?;

    let deficit_n = s1 - pairs.iter().map(|d| d.discord).sum::<f64>();
    let deficit_n_minus_1 = whole3.discord - pairs[0].discord - pairs[1].discord;
    let lhs = deficit_n - deficit_n_minus_1;
    let rhs = pairs[2].classical - pairs[2].discord;
    let max_spread = pairs
        .iter()
        .chain(std::iter::once(&whole3))
        .map(|d| d.diagnostics.spread)
        .fold(0.0, f64::max);
    Ok(RecursionReport {
        deficit_n,
        deficit_n_minus_1,
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        max_spread,
    })
}

/// Left recursion on four qubits:
/// `Δ←(4) - Δ←(3) = ω̄_I(A₂A₃|A₄) - ω̄_D(A₂A₃|A₄)`.
///
/// `D←(A₁|A₂A₃)` on `ρ_{A₁A₂A₃}` and the `A₂A₃`-measured half of the
/// averages both need the four-dimensional composite optimizer.
pub fn check_recursion_left(psi: &StateVector, config: &OptimizerConfig) -> Result<RecursionReport> {
    require_pure_vector(psi, 4)?;
    let l = psi.labels();
    let s1 = subsystem_entropy(&psi.marginal(&[&l[0]])?, &[&l[0]])?;
    let pairs = anchored_pair_discords(psi, &l[0], &l[1..], false, config)?;
    let rho123 = psi.marginal(&[&l[0], &l[1], &l[2]])?;
    let rho234 = psi.marginal(&[&l[1], &l[2], &l[3]])?;
    let composite = [l[1].as_str(), l[2].as_str()];
    let last = [l[3].as_str()];

    let (whole3, (c_to_l, l_to_c)) = rayon::join(
        || discord_with(&rho123, &composite, &[l[0].as_str()], config),
        || {
            rayon::join(
                || discord_with(&rho234, &composite, &last, config),
                || discord_with(&rho234, &last, &composite, config),
            )
        },
    );
    let (whole3, c_to_l, l_to_c) = (whole3?, c_to_l?, l_to_c?);
    let avg = AverageCorrelations::from_discords(&c_to_l, &l_to_c);

    let deficit_n = s1 - pairs.iter().map(|d| d.discord).sum::<f64>();
    let deficit_n_minus_1 = whole3.discord - pairs[0].discord - pairs[1].discord;
    let lhs = deficit_n - deficit_n_minus_1;
    let rhs = avg.omega_i - avg.omega_d;
    let max_spread = pairs
        .iter()
        .chain([&whole3, &c_to_l, &l_to_c])
        .map(|d| d.diagnostics.spread)
        .fold(0.0, f64::max);
    Ok(RecursionReport {
        deficit_n,
        deficit_n_minus_1,
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        max_spread,
    })
}
