//! Derivative-free fitting of an expression's constants.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::config::SRConfig;
use super::fitness::Dataset;
use crate::expr::Expr;

/// Result of a Nelder–Mead run.
#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

/// Nelder–Mead simplex minimization of `f` from `x0` with at most
/// `max_evals` function evaluations.
pub fn nelder_mead(f: &mut impl FnMut(&[f64]) -> f64, x0: &[f64], max_evals: usize) -> Minimum {
    let n = x0.len();
    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    if n == 0 {
        let value = eval(x0, &mut evals);
        return Minimum { x: Vec::new(), value, evals };
    }

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), v0));
    for i in 0..n {
        let mut x = x0.to_vec();
        let step = if x[i] != 0.0 { 0.1 * x[i].abs() } else { 0.1 };
        x[i] += step;
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let spread = simplex
            .iter()
            .skip(1)
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        let scale = simplex[0].0.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let flat = worst.is_finite() && (worst - best).abs() <= 1e-10 * best.abs().max(1e-300);
        if spread <= 1e-13 * scale || flat && spread <= 1e-6 * scale {
            break;
        }

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(alpha);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = along(gamma);
            let fe = eval(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = along(alpha * rho);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = along(-rho);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let x_best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    for (v, b) in entry.0.iter_mut().zip(&x_best) {
                        *v = b + sigma * (*v - b);
                    }
                    entry.1 = eval(&entry.0, &mut evals);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Minimum { x, value, evals }
}

/// Refits the constants of `expr` to `data`.
///
/// Runs Nelder–Mead from the current constants and from
/// `config.optimizer_restarts` randomly jittered starts, each bounded by
/// `config.optimizer_max_evals` evaluations on a row subsample of at most
/// `config.optimizer_max_rows`. The refit is only kept when it does not
/// increase the loss on the full dataset.
pub fn optimize_constants<R: Rng + ?Sized>(
    expr: &Expr,
    data: &Dataset,
    config: &SRConfig,
    rng: &mut R,
) -> Expr {
    if expr.count_constants() == 0 {
        return expr.clone();
    }
    let candidate = fit_constants(
        expr,
        data,
        config,
        FitBudget {
            max_evals: config.optimizer_max_evals,
            restarts: config.optimizer_restarts,
            max_rows: config.optimizer_max_rows,
        },
        rng,
    );
    let old = data.data_loss(expr, config.loss);
    let new = data.data_loss(&candidate, config.loss);
    if new <= old {
        candidate
    } else {
        expr.clone()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FitBudget {
    pub max_evals: usize,
    pub restarts: usize,
    pub max_rows: usize,
}

/// Nelder–Mead fit of the constants on a row subsample, without comparing
/// against the starting point on the full data.
pub fn fit_constants<R: Rng + ?Sized>(
    expr: &Expr,
    data: &Dataset,
    config: &SRConfig,
    budget: FitBudget,
    rng: &mut R,
) -> Expr {
    let x0 = expr.constants();
    if x0.is_empty() || budget.max_evals == 0 {
        return expr.clone();
    }
    let batch = data.subsample(budget.max_rows, rng);
    let mut work = expr.clone();
    let mut objective = |c: &[f64]| {
        work.set_constants(c);
        batch.data_loss(&work, config.loss)
    };

    let mut best = nelder_mead(&mut objective, &x0, budget.max_evals);
    for _ in 0..budget.restarts {
        let start: Vec<f64> = best
            .x
            .iter()
            .map(|v| {
                let z: f64 = StandardNormal.sample(rng);
                v * (1.0 + 0.5 * z)
            })
            .collect();
        let m = nelder_mead(&mut objective, &start, budget.max_evals);
        if m.value < best.value {
            best = m;
        }
    }

    if best.x.iter().any(|v| !v.is_finite()) {
        return expr.clone();
    }
    let mut candidate = expr.clone();
    candidate.set_constants(&best.x);
    candidate
}
