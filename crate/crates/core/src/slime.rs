//! Local symbolic explanations around a point of interest.
//!
//! A locale combines the `J` nearest recorded rows (weight `M`) with
//! Gaussian samples around `x*` labelled by a surrogate and weighted by the
//! proximity kernel `exp(-sum_i (x*_i - z_i)^2 / s_i)`.

use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::prune::sample_variance;
use crate::harness::{distill_weighted, FitResult, IOTable};
use crate::matrix::Matrix;
use crate::search::SRConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlimeParams {
    pub x_star: Vec<f64>,
    /// Number of nearest neighbors `J`.
    pub neighbors: usize,
    pub n_synthetic: usize,
    /// Sampling variance per coordinate (one value broadcasts). Defaults to
    /// half the per-coordinate sample variance of the neighbors.
    pub sigma2: Option<Vec<f64>>,
    /// Weight `M` of every neighbor row.
    pub neighbor_weight: f64,
    /// Kernel bandwidth per coordinate; defaults to `sigma2`.
    pub kernel_sigma2: Option<Vec<f64>>,
}

impl SlimeParams {
    pub fn new(x_star: Vec<f64>, neighbors: usize) -> Self {
        SlimeParams {
            x_star,
            neighbors,
            n_synthetic: 0,
            sigma2: None,
            neighbor_weight: 1.0,
            kernel_sigma2: None,
        }
    }
}

/// A weighted local dataset.
#[derive(Clone, Debug)]
pub struct Locale {
    pub table: IOTable,
    pub weights: Vec<f64>,
    /// Indices of the neighbor rows in the source table, nearest first.
    pub neighbor_rows: Vec<usize>,
    pub sigma2: Vec<f64>,
    pub kernel_sigma2: Vec<f64>,
}

/// Surrogate model evaluated on synthetic points; returns one value per output.
pub type Surrogate<'a> = &'a dyn Fn(&[f64]) -> Vec<f64>;

/// Row indices of the `j` rows nearest to `x_star`, ties broken by index.
pub fn nearest_rows(x: &Matrix, x_star: &[f64], j: usize) -> Vec<usize> {
    let mut order: Vec<(f64, usize)> = x
        .row_iter()
        .enumerate()
        .map(|(i, row)| (squared_distance(row, x_star), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    order.into_iter().take(j).map(|(_, i)| i).collect()
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

/// Proximity weight of `z`. Coordinates with zero bandwidth are ignored.
pub fn kernel_weight(x_star: &[f64], z: &[f64], kernel_sigma2: &[f64]) -> f64 {
    let d: f64 = x_star
        .iter()
        .zip(z)
        .zip(kernel_sigma2)
        .filter(|(_, s)| **s > 0.0)
        .map(|((a, b), s)| (a - b) * (a - b) / s)
        .sum();
    (-d).exp()
}

fn broadcast(name: &str, v: &[f64], d: usize) -> Result<Vec<f64>> {
    let out = match v.len() {
        1 => vec![v[0]; d],
        n if n == d => v.to_vec(),
        n => {
            return Err(Error::Config(format!(
                "{name} has {n} values, expected 1 or {d}"
            )))
        }
    };
    if out.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(Error::Config(format!("{name} must be finite and nonnegative")));
    }
    Ok(out)
}

pub fn build_locale<R: Rng + ?Sized>(
    table: &IOTable,
    params: &SlimeParams,
    surrogate: Option<Surrogate<'_>>,
    rng: &mut R,
) -> Result<Locale> {
    let d = table.n_inputs();
    if params.x_star.len() != d {
        return Err(Error::Shape(format!(
            "x_star has {} coordinates, table has {d} inputs",
            params.x_star.len()
        )));
    }
    if params.neighbors == 0 {
        return Err(Error::Config("J must be at least 1".into()));
    }
    if params.neighbors > table.rows() {
        return Err(Error::Config(format!(
            "J = {} exceeds the {} available rows",
            params.neighbors,
            table.rows()
        )));
    }
    if !(params.neighbor_weight.is_finite() && params.neighbor_weight >= 0.0) {
        return Err(Error::Config("neighbor weight must be finite and nonnegative".into()));
    }
    let surrogate = match (params.n_synthetic, surrogate) {
        (0, _) => None,
        (_, Some(f)) => Some(f),
        (_, None) => {
            return Err(Error::Config(
                "synthetic points requested without a surrogate".into(),
            ))
        }
    };

    let neighbor_rows = nearest_rows(table.inputs(), &params.x_star, params.neighbors);
    let local = table.select_rows(&neighbor_rows);

    let sigma2 = match &params.sigma2 {
        Some(s) => broadcast("sigma2", s, d)?,
        None if params.neighbors >= 2 => (0..d)
            .map(|i| 0.5 * sample_variance(&local.inputs().column(i)))
            .collect(),
        None if params.n_synthetic == 0 => vec![0.0; d],
        None => {
            return Err(Error::Config(
                "default sigma2 needs at least 2 neighbors".into(),
            ))
        }
    };
    let kernel_sigma2 = match &params.kernel_sigma2 {
        Some(s) => broadcast("kernel_sigma2", s, d)?,
        None => sigma2.clone(),
    };

    let mut x = local.inputs().clone();
    let mut y = local.outputs().clone();
    let mut weights = vec![params.neighbor_weight; neighbor_rows.len()];
    if let Some(f) = surrogate {
        for _ in 0..params.n_synthetic {
            let z: Vec<f64> = params
                .x_star
                .iter()
                .zip(&sigma2)
                .map(|(m, s)| {
                    let n: f64 = StandardNormal.sample(rng);
                    m + s.sqrt() * n
                })
                .collect();
            let out = f(&z);
            if out.len() != table.n_outputs() {
                return Err(Error::Shape(format!(
                    "surrogate returned {} values, expected {}",
                    out.len(),
                    table.n_outputs()
                )));
            }
            weights.push(kernel_weight(&params.x_star, &z, &kernel_sigma2));
            x.push_row(&z)?;
            y.push_row(&out)?;
        }
    }

    let table = IOTable::new(
        table.input_names().to_vec(),
        table.output_names().to_vec(),
        x,
        y,
    )?;
    Ok(Locale {
        table,
        weights,
        neighbor_rows,
        sigma2,
        kernel_sigma2,
    })
}

/// Fits every output of the locale under its weights.
pub fn slime_fit(
    locale: &Locale,
    config: &SRConfig,
    out_dir: Option<&Path>,
    block_name: &str,
) -> Result<FitResult> {
    distill_weighted(&locale.table, Some(&locale.weights), config, out_dir, block_name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn line(xs: &[f64]) -> IOTable {
        let x: Vec<[f64; 1]> = xs.iter().map(|v| [*v]).collect();
        let y: Vec<[f64; 1]> = xs.iter().map(|v| [v * v]).collect();
        IOTable::new(
            vec!["x".into()],
            vec!["y".into()],
            Matrix::from_rows(&x).unwrap(),
            Matrix::from_rows(&y).unwrap(),
        )
        .unwrap()
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(5)
    }

    #[test]
    fn two_nearest_and_default_sigma() {
        let t = line(&[9.0, -1.0, 5.0, 1.0]);
        let loc = build_locale(&t, &SlimeParams::new(vec![0.0], 2), None, &mut rng()).unwrap();
        assert_eq!(loc.neighbor_rows, vec![1, 3]);
        assert_eq!(loc.table.inputs().column(0), vec![-1.0, 1.0]);
        assert_eq!(loc.sigma2, vec![1.0]);
        assert_eq!(loc.weights, vec![1.0, 1.0]);
    }

    #[test]
    fn kernel_is_one_at_the_point() {
        assert_eq!(kernel_weight(&[0.3, -2.0], &[0.3, -2.0], &[0.5, 0.1]), 1.0);
        let w = kernel_weight(&[0.0], &[1.0], &[2.0]);
        assert!((w - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn full_table_with_unit_weights() {
        let xs = [0.5, -3.0, 2.0, 7.0, 1.5];
        let t = line(&xs);
        let loc = build_locale(&t, &SlimeParams::new(vec![0.0], 5), None, &mut rng()).unwrap();
        let mut got = loc.table.inputs().column(0);
        let mut want = xs.to_vec();
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        assert_eq!(got, want);
        assert!(loc.weights.iter().all(|w| *w == 1.0));
    }

    #[test]
    fn ties_break_by_index_regardless_of_order() {
        let t = line(&[1.0, -1.0, 3.0]);
        let loc = build_locale(&t, &SlimeParams::new(vec![0.0], 1), None, &mut rng()).unwrap();
        assert_eq!(loc.neighbor_rows, vec![0]);
        let flipped = line(&[-1.0, 1.0, 3.0]);
        let loc = build_locale(&flipped, &SlimeParams::new(vec![0.0], 1), None, &mut rng()).unwrap();
        assert_eq!(loc.neighbor_rows, vec![0]);
    }

    #[test]
    fn synthetic_points_use_the_surrogate() {
        let t = line(&[0.0, 0.5, 1.0, 1.5, 2.0]);
        let square = |z: &[f64]| vec![z[0] * z[0]];
        let params = SlimeParams {
            n_synthetic: 50,
            sigma2: Some(vec![0.01]),
            ..SlimeParams::new(vec![1.0], 3)
        };
        let loc = build_locale(&t, &params, Some(&square), &mut rng()).unwrap();
        assert_eq!(loc.table.rows(), 53);
        for i in 3..53 {
            let z = loc.table.inputs().get(i, 0);
            assert_eq!(loc.table.outputs().get(i, 0), z * z);
            assert_eq!(loc.weights[i], kernel_weight(&[1.0], &[z], &[0.01]));
            assert!(loc.weights[i] > 0.0 && loc.weights[i] <= 1.0);
        }
        let again = build_locale(&t, &params, Some(&square), &mut rng()).unwrap();
        assert_eq!(loc.table, again.table);
        assert_eq!(loc.weights, again.weights);
    }

    #[test]
    fn errors() {
        let t = line(&[0.0, 1.0]);
        let p = SlimeParams::new(vec![0.0], 3);
        assert!(matches!(build_locale(&t, &p, None, &mut rng()), Err(Error::Config(_))));
        let p = SlimeParams::new(vec![0.0], 0);
        assert!(matches!(build_locale(&t, &p, None, &mut rng()), Err(Error::Config(_))));
        let p = SlimeParams {
            n_synthetic: 4,
            ..SlimeParams::new(vec![0.0], 2)
        };
        assert!(matches!(build_locale(&t, &p, None, &mut rng()), Err(Error::Config(_))));
        let p = SlimeParams {
            neighbor_weight: 0.0,
            ..SlimeParams::new(vec![0.0], 2)
        };
        let loc = build_locale(&t, &p, None, &mut rng()).unwrap();
        let err = slime_fit(&loc, &SRConfig::default(), None, "b").unwrap_err();
        assert!(matches!(err, Error::Data(_)), "{err}");
    }
}
