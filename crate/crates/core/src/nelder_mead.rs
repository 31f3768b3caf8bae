//! Plain Nelder–Mead simplex minimizer (standard coefficients).

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    /// Stop once every vertex is within this max-norm distance of the best.
    pub xtol: f64,
    pub max_evals: usize,
    /// Edge length of the initial axis-aligned simplex.
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            xtol: 1e-9,
            max_evals: 2000,
            initial_step: 0.1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub evals: usize,
    pub converged: bool,
}

const ALPHA: f64 = 1.0;
const GAMMA: f64 = 2.0;
const RHO: f64 = 0.5;
const SIGMA: f64 = 0.5;

pub fn nelder_mead(mut f: impl FnMut(&[f64]) -> f64, x0: &[f64], opts: &NelderMeadOptions) -> NelderMeadResult {
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for k in 0..n {
        let mut v = x0.to_vec();
        v[k] += opts.initial_step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| eval(x, &mut evals)).collect();

    let mut converged = false;
    loop {
        // Stable sort keeps earlier vertices first among ties.
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let diameter = simplex[1..]
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if diameter < opts.xtol {
            converged = true;
            break;
        }
        if evals >= opts.max_evals {
            break;
        }

        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&simplex[n]).map(|(c, w)| c + t * (c - w)).collect() };

        let xr = along(ALPHA);
        let fr = eval(&xr, &mut evals);
        if fr < values[0] {
            let xe = along(GAMMA);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[n] {
            let xc = along(RHO * ALPHA);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        } else {
            let xc = along(-RHO);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        };
        if fc < values[n].min(fr) {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=n {
            for (x, b) in simplex[i].iter_mut().zip(&best) {
                *x = b + SIGMA * (*x - b);
            }
            values[i] = eval(&simplex[i], &mut evals);
        }
    }

    NelderMeadResult {
        x: simplex.swap_remove(0),
        fx: values[0],
        evals,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_quadratic() {
        let r = nelder_mead(
            |x| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2),
            &[0.0, 0.0],
            &NelderMeadOptions::default(),
        );
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-8 && (r.x[1] + 2.0).abs() < 1e-8);
    }

    #[test]
    fn rosenbrock_reaches_minimum_with_budget() {
        let opts = NelderMeadOptions {
            max_evals: 5000,
            ..Default::default()
        };
        let r = nelder_mead(
            |x| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2),
            &[-1.2, 1.0],
            &opts,
        );
        assert!(r.fx < 1e-12, "fx = {}", r.fx);
    }

    #[test]
    fn respects_evaluation_cap() {
        let opts = NelderMeadOptions {
            max_evals: 50,
            ..Default::default()
        };
        let r = nelder_mead(|x| x.iter().map(|v| v.cos()).sum(), &[0.3; 6], &opts);
        assert!(!r.converged);
        // The cap is checked once per iteration, so a shrink may overrun it.
        assert!(r.evals <= 50 + 7);
    }
}
