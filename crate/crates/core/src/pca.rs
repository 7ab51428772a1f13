//! Principal component analysis: centered, never whitened.
//!
//! A fitted model is stored as a directory:
//!
//! ```text
//! manifest.json   {"format_version":1,"n_features":d,"n_components":k,"n_samples":n,
//!                  "total_variance":v,"dtype":"f64le","layout":"row-major",
//!                  "feature_names":[..]}
//! mean.bin        d values
//! components.bin  k*d values, one component per row
//! variance.bin    k explained variances
//! ```

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::table::{read_f64s, write_f64s, FORMAT_VERSION, MANIFEST};
use crate::harness::prune::sample_variance;
use crate::matrix::Matrix;

pub const MEAN: &str = "mean.bin";
pub const COMPONENTS: &str = "components.bin";
pub const VARIANCE: &str = "variance.bin";

#[derive(Clone, Debug, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `k x d`, orthonormal rows, strongest first.
    pub components: Matrix,
    /// Variance along each component (n - 1 denominator).
    pub explained_variance: Vec<f64>,
    /// Sum of the per-feature sample variances.
    pub total_variance: f64,
    pub n_samples: usize,
    /// Names of the input features; empty when unknown.
    pub feature_names: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct PcaManifest {
    format_version: u32,
    n_features: usize,
    n_components: usize,
    n_samples: usize,
    total_variance: f64,
    dtype: String,
    layout: String,
    #[serde(default)]
    feature_names: Vec<String>,
}

impl PcaModel {
    pub fn n_features(&self) -> usize {
        self.mean.len()
    }

    pub fn n_components(&self) -> usize {
        self.components.rows()
    }

    pub fn explained_variance_ratio(&self) -> Result<Vec<f64>> {
        if !(self.total_variance > 0.0) {
            return Err(Error::Data("data has zero total variance".into()));
        }
        Ok(self
            .explained_variance
            .iter()
            .map(|v| v / self.total_variance)
            .collect())
    }

    /// `(x - mean) * components^T`.
    pub fn project(&self, x: &Matrix) -> Result<Matrix> {
        let d = self.n_features();
        if x.cols() != d {
            return Err(Error::Shape(format!("expected {d} columns, got {}", x.cols())));
        }
        let k = self.n_components();
        let mut out = Vec::with_capacity(x.rows() * k);
        let mut centered = vec![0.0; d];
        for row in x.row_iter() {
            for ((c, v), m) in centered.iter_mut().zip(row).zip(&self.mean) {
                *c = v - m;
            }
            for j in 0..k {
                out.push(dot(&centered, self.components.row(j)));
            }
        }
        Matrix::new(x.rows(), k, out)
    }

    /// `z * components + mean`.
    pub fn reconstruct(&self, z: &Matrix) -> Result<Matrix> {
        let k = self.n_components();
        if z.cols() != k {
            return Err(Error::Shape(format!("expected {k} columns, got {}", z.cols())));
        }
        let d = self.n_features();
        let mut out = Vec::with_capacity(z.rows() * d);
        for row in z.row_iter() {
            let mut x = self.mean.clone();
            for (j, zj) in row.iter().enumerate() {
                for (xi, ci) in x.iter_mut().zip(self.components.row(j)) {
                    *xi += zj * ci;
                }
            }
            out.extend_from_slice(&x);
        }
        Matrix::new(z.rows(), d, out)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

/// Fits the top `k` components of `x` (rows are samples).
pub fn pca_fit(x: &Matrix, k: usize) -> Result<PcaModel> {
    let (n, d) = (x.rows(), x.cols());
    if n < 2 {
        return Err(Error::Data(format!("PCA needs at least 2 rows, got {n}")));
    }
    if k == 0 || k > (n - 1).min(d) {
        return Err(Error::Config(format!(
            "k must be in 1..={}, got {k}",
            (n - 1).min(d)
        )));
    }
    if !x.all_finite() {
        return Err(Error::Data("PCA input contains non-finite values".into()));
    }

    let columns = x.columns();
    let mean: Vec<f64> = columns.iter().map(|c| c.iter().sum::<f64>() / n as f64).collect();
    let total_variance = columns.iter().map(|c| sample_variance(c)).sum();
    let centered = DMatrix::from_fn(n, d, |i, j| x.get(i, j) - mean[j]);
    let svd = centered.svd_unordered(false, true);
    let v_t = svd.v_t.expect("right singular vectors were requested");

    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .total_cmp(&svd.singular_values[a])
            .then(a.cmp(&b))
    });

    let mut components = Vec::with_capacity(k * d);
    let mut explained_variance = Vec::with_capacity(k);
    for &r in order.iter().take(k) {
        let mut row: Vec<f64> = v_t.row(r).iter().copied().collect();
        let pivot = row
            .iter()
            .enumerate()
            .fold(0, |best, (i, v)| if v.abs() > row[best].abs() { i } else { best });
        if row[pivot] < 0.0 {
            row.iter_mut().for_each(|v| *v = -*v);
        }
        components.extend_from_slice(&row);
        let s = svd.singular_values[r];
        explained_variance.push(s * s / (n - 1) as f64);
    }

    Ok(PcaModel {
        mean,
        components: Matrix::new(k, d, components)?,
        explained_variance,
        total_variance,
        n_samples: n,
        feature_names: Vec::new(),
    })
}

pub fn save_pca(model: &PcaModel, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let manifest = PcaManifest {
        format_version: FORMAT_VERSION,
        n_features: model.n_features(),
        n_components: model.n_components(),
        n_samples: model.n_samples,
        total_variance: model.total_variance,
        dtype: "f64le".into(),
        layout: "row-major".into(),
        feature_names: model.feature_names.clone(),
    };
    let path = dir.join(MANIFEST);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    write_f64s(&dir.join(MEAN), &model.mean)?;
    write_f64s(&dir.join(COMPONENTS), model.components.data())?;
    write_f64s(&dir.join(VARIANCE), &model.explained_variance)
}

pub fn load_pca(dir: &Path) -> Result<PcaModel> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let m: PcaManifest =
        serde_json::from_str(&text).map_err(|e| Error::format(&path, e.to_string()))?;
    if m.format_version != FORMAT_VERSION || m.dtype != "f64le" || m.layout != "row-major" {
        return Err(Error::format(&path, "unsupported PCA model format"));
    }
    let read = |name: &str, len: usize| -> Result<Vec<f64>> {
        let p = dir.join(name);
        let v = read_f64s(&p)?;
        if v.len() != len {
            return Err(Error::format(
                &p,
                format!("expected {len} values, found {}", v.len()),
            ));
        }
        Ok(v)
    };
    let (d, k) = (m.n_features, m.n_components);
    if !m.feature_names.is_empty() && m.feature_names.len() != d {
        return Err(Error::format(&path, "feature_names does not match n_features"));
    }
    Ok(PcaModel {
        mean: read(MEAN, d)?,
        components: Matrix::new(k, d, read(COMPONENTS, k * d)?)?,
        explained_variance: read(VARIANCE, k)?,
        total_variance: m.total_variance,
        n_samples: m.n_samples,
        feature_names: m.feature_names,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(n: usize, d: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..n * d).map(|_| StandardNormal.sample(&mut rng)).collect();
        Matrix::new(n, d, data).unwrap()
    }

    fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
        a.data().iter().zip(b.data()).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn line_has_one_direction() {
        let rows: Vec<[f64; 2]> = (0..20).map(|i| [i as f64 * 0.3 - 2.0, 2.0 * (i as f64 * 0.3 - 2.0)]).collect();
        let m = pca_fit(&Matrix::from_rows(&rows).unwrap(), 1).unwrap();
        let s = 5f64.sqrt();
        assert!((m.components.get(0, 0) - 1.0 / s).abs() < 1e-12);
        assert!((m.components.get(0, 1) - 2.0 / s).abs() < 1e-12);
        let r = m.explained_variance_ratio().unwrap();
        assert!((r[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn axis_variances() {
        // sample variances 4, 1, 0 with zero covariance
        let a = 6f64.sqrt();
        let b = 1.5f64.sqrt();
        let x = Matrix::from_rows(&[[a, 0.0, 2.0], [-a, 0.0, 2.0], [0.0, b, 2.0], [0.0, -b, 2.0]]).unwrap();
        let m = pca_fit(&x, 2).unwrap();
        let r = m.explained_variance_ratio().unwrap();
        assert!((r[0] - 0.8).abs() < 1e-10 && (r[1] - 0.2).abs() < 1e-10, "{r:?}");
        assert!((m.components.get(0, 0) - 1.0).abs() < 1e-12);
        assert!((m.components.get(1, 1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn isotropic_ratios() {
        let m = pca_fit(&gaussian(10_000, 4, 1), 4).unwrap();
        for r in m.explained_variance_ratio().unwrap() {
            assert!((r - 0.25).abs() < 0.05, "{r}");
        }
    }

    #[test]
    fn full_rank_round_trip() {
        let x = gaussian(50, 5, 2);
        let m = pca_fit(&x, 5).unwrap();
        let back = m.reconstruct(&m.project(&x).unwrap()).unwrap();
        assert!(max_abs_diff(&x, &back) < 1e-8);
        let sum: f64 = m.explained_variance_ratio().unwrap().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reconstruction_error_matches_discarded_variance() {
        let x = gaussian(200, 6, 3);
        let full = pca_fit(&x, 6).unwrap();
        let n = x.rows() as f64;
        let mut last = f64::INFINITY;
        for k in 1..=6 {
            let m = pca_fit(&x, k).unwrap();
            let back = m.reconstruct(&m.project(&x).unwrap()).unwrap();
            let err: f64 = x.data().iter().zip(back.data()).map(|(u, v)| (u - v) * (u - v)).sum::<f64>() / n;
            let discarded: f64 = full.explained_variance[k..].iter().sum::<f64>() * (n - 1.0) / n;
            assert!((err - discarded).abs() <= 1e-6 * discarded.max(1e-12) + 1e-12, "k={k}: {err} vs {discarded}");
            assert!(err <= last);
            last = err;
        }
    }

    #[test]
    fn orthonormal_and_identities() {
        let x = gaussian(100, 5, 4);
        let m = pca_fit(&x, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot(m.components.row(i), m.components.row(j)) - want).abs() < 1e-8);
            }
        }
        let mean = Matrix::from_rows(&[m.mean.clone()]).unwrap();
        assert!(m.project(&mean).unwrap().data().iter().all(|v| v.abs() < 1e-12));
        let z = Matrix::from_rows(&[[0.5, -1.0, 2.0]]).unwrap();
        let again = m.project(&m.reconstruct(&z).unwrap()).unwrap();
        assert!(max_abs_diff(&z, &again) < 1e-10);
        assert!(m.explained_variance.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn deterministic_and_persistent() {
        let x = gaussian(30, 4, 5);
        let mut a = pca_fit(&x, 2).unwrap();
        assert_eq!(a, pca_fit(&x, 2).unwrap());
        a.feature_names = vec!["a".into(), "b".into(), "c".into(), "d".into()];
        let dir = tempfile::tempdir().unwrap();
        save_pca(&a, dir.path()).unwrap();
        assert_eq!(load_pca(dir.path()).unwrap(), a);
    }

    #[test]
    fn errors() {
        let x = gaussian(3, 4, 6);
        assert!(matches!(pca_fit(&x, 3), Err(Error::Config(_))));
        assert!(matches!(pca_fit(&x, 0), Err(Error::Config(_))));
        let m = pca_fit(&x, 2).unwrap();
        assert!(matches!(m.project(&gaussian(2, 3, 1)), Err(Error::Shape(_))));
        let mut bad = x.clone();
        bad.set(0, 0, f64::NAN);
        assert!(matches!(pca_fit(&bad, 1), Err(Error::Data(_))));
        let flat = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert!(pca_fit(&flat, 1).unwrap().explained_variance_ratio().is_err());
    }
}
