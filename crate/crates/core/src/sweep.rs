//! Deficits along the `psi_tilde(p, ε)` family, CSV output and the curve
//! shape helpers used to read off where each curve changes sign.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::fmt_num;
use crate::measure::OptimizerConfig;
use crate::monogamy::{PureTripartite, Route};
use crate::states::psi_tilde;

/// Column list of the sweep CSV, in order.
pub const CSV_HEADER: &str = "p,eps,delta_right_A,delta_left_A,D_AB,D_AC,E_BC,route,optimizer_spread";

/// Values within this of zero have no sign.
pub const SIGN_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub eps: Vec<f64>,
    pub p_start: f64,
    pub p_end: f64,
    pub p_step: f64,
    pub route: Route,
    pub optimizer: OptimizerConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            eps: vec![0.5, 0.75, 1.0],
            p_start: 0.0,
            p_end: 1.0,
            p_step: 0.01,
            route: Route::Optimized,
            optimizer: OptimizerConfig::default(),
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = (0.0..=1.0).contains(&self.p_start)
            && (0.0..=1.0).contains(&self.p_end)
            && self.p_start < self.p_end
            && self.p_step > 0.0
            && self.p_step.is_finite();
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "bad p range: start {} end {} step {}",
                self.p_start, self.p_end, self.p_step
            )));
        }
        if self.eps.is_empty() {
            return Err(Error::InvalidArgument("no eps values".into()));
        }
        if let Some(&e) = self.eps.iter().find(|e| !(0.0..=1.0).contains(*e)) {
            return Err(Error::OutOfRange { name: "eps", value: e });
        }
        Ok(())
    }

    /// Grid values `p_start + k·p_step` up to `p_end`, snapped to 1e-12 so
    /// that `p_end` itself is hit despite accumulated rounding.
    pub fn p_values(&self) -> Vec<f64> {
        let n = ((self.p_end - self.p_start) / self.p_step + 1e-9).floor() as usize;
        (0..=n)
            .map(|k| {
                let p = self.p_start + k as f64 * self.p_step;
                ((p * 1e12).round() / 1e12).min(self.p_end)
            })
            .collect()
    }
}

/// One `(p, ε)` grid point.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub p: f64,
    pub eps: f64,
    pub delta_right_a: f64,
    pub delta_left_a: f64,
    /// `D→(ρ_AB)`, measurement on A.
    pub d_ab: f64,
    /// `D→(ρ_AC)`, measurement on A.
    pub d_ac: f64,
    pub e_bc: f64,
    pub route: Route,
    pub optimizer_spread: f64,
    /// `|optimized Δ→_A - closed form|`; not written to the CSV.
    #[serde(skip)]
    pub route_gap: f64,
}

impl SweepRow {
    pub fn csv_line(&self) -> String {
        [
            fmt_num(self.p),
            fmt_num(self.eps),
            fmt_num(self.delta_right_a),
            fmt_num(self.delta_left_a),
            fmt_num(self.d_ab),
            fmt_num(self.d_ac),
            fmt_num(self.e_bc),
            self.route.as_str().to_string(),
            fmt_num(self.optimizer_spread),
        ]
        .join(",")
    }
}

pub fn sweep_point(p: f64, eps: f64, route: Route, config: &OptimizerConfig) -> Result<SweepRow> {
    let psi = psi_tilde(p, eps)?;
    let t = PureTripartite::new(&psi, config)?;
    let right_opt = t.delta_right("A", Route::Optimized)?;
    let right_closed = t.delta_right("A", Route::PureClosedForm)?;
    Ok(SweepRow {
        p,
        eps,
        delta_right_a: t.delta_right("A", route)?,
        delta_left_a: t.delta_left("A", route)?,
        d_ab: t.pair_discord("A", "B")?.discord,
        d_ac: t.pair_discord("A", "C")?.discord,
        e_bc: t.eof("B", "C")?,
        route,
        optimizer_spread: t.max_spread(),
        route_gap: (right_opt - right_closed).abs(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalPoint {
    pub eps: f64,
    /// First negative-to-positive crossing of `Δ→_A`.
    pub p_star: Option<f64>,
    /// Every negative-to-positive crossing, in increasing `p`.
    pub crossings: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    /// Grouped by ε (in the configured order), then increasing `p`.
    pub rows: Vec<SweepRow>,
    pub critical: Vec<CriticalPoint>,
    pub max_route_gap: f64,
}

impl SweepResult {
    /// `(p, Δ→_A)` for one ε.
    pub fn curve(&self, eps: f64) -> (Vec<f64>, Vec<f64>) {
        self.rows
            .iter()
            .filter(|r| r.eps == eps)
            .map(|r| (r.p, r.delta_right_a))
            .unzip()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.rows.len() * 96);
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.csv_line());
            out.push('\n');
        }
        for c in &self.critical {
            let p = c
                .p_star
                .map(|p| format!("{p:.3}"))
                .unwrap_or_else(|| "none".to_string());
            out.push_str(&format!("# p_star eps={} {}\n", fmt_num(c.eps), p));
        }
        out.push_str(&format!("# max_route_gap {}\n", fmt_num(self.max_route_gap)));
        out
    }
}

pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let ps = config.p_values();
    let grid: Vec<(f64, f64)> = config
        .eps
        .iter()
        .flat_map(|&e| ps.iter().map(move |&p| (p, e)))
        .collect();
    let rows: Vec<SweepRow> = grid
        .par_iter()
        .map(|&(p, e)| sweep_point(p, e, config.route, &config.optimizer))
        .collect::<Result<_>>()?;
    let critical = config
        .eps
        .iter()
        .map(|&eps| {
            let (xs, ys): (Vec<f64>, Vec<f64>) = rows
                .iter()
                .filter(|r| r.eps == eps)
                .map(|r| (r.p, r.delta_right_a))
                .unzip();
            let crossings = rising_sign_changes(&xs, &ys);
            CriticalPoint {
                eps,
                p_star: crossings.first().copied(),
                crossings,
            }
        })
        .collect();
    let max_route_gap = rows.iter().map(|r| r.route_gap).fold(0.0, f64::max);
    Ok(SweepResult {
        rows,
        critical,
        max_route_gap,
    })
}

/// Negative-to-positive crossings, located by linear interpolation between
/// the bracketing points. Points with `|y| ≤ 1e-9` are skipped.
pub fn rising_sign_changes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let signed: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(_, y)| y.abs() > SIGN_TOL)
        .map(|(&x, &y)| (x, y))
        .collect();
    signed
        .windows(2)
        .filter(|w| w[0].1 < 0.0 && w[1].1 > 0.0)
        .map(|w| {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            x0 + (x1 - x0) * (-y0) / (y1 - y0)
        })
        .collect()
}

/// Number of peaks (rise then fall, each by more than `tol`) in the
/// sequence, via a hysteresis filter so wiggles below `tol` do not count.
pub fn count_peaks(ys: &[f64], tol: f64) -> usize {
    let Some(&first) = ys.first() else {
        return 0;
    };
    #[derive(PartialEq)]
    enum Dir {
        Flat,
        Up,
        Down,
    }
    let (mut dir, mut hi, mut lo, mut ext) = (Dir::Flat, first, first, first);
    let mut peaks = 0;
    for &y in &ys[1..] {
        match dir {
            Dir::Flat => {
                hi = hi.max(y);
                lo = lo.min(y);
                if y - lo > tol {
                    dir = Dir::Up;
                    ext = y;
                } else if hi - y > tol {
                    dir = Dir::Down;
                    ext = y;
                }
            }
            Dir::Up => {
                if y > ext {
                    ext = y;
                } else if ext - y > tol {
                    peaks += 1;
                    dir = Dir::Down;
                    ext = y;
                }
            }
            Dir::Down => {
                if y < ext {
                    ext = y;
                } else if y - ext > tol {
                    dir = Dir::Up;
                    ext = y;
                }
            }
        }
    }
    peaks
}
