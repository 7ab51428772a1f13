//! Variance-based dimension importance and the cosine pruning schedule.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::IOTable;

pub const DEFAULT_END_FRACTION: f64 = 0.65;

/// Output dimensions ranked by sample variance (n - 1 denominator),
/// highest first; ties keep the lower index first.
pub fn get_importance(table: &IOTable) -> Result<Vec<(usize, f64)>> {
    let n = table.rows();
    if n < 2 {
        return Err(Error::Data(format!("importance needs at least 2 rows, got {n}")));
    }
    let y = table.outputs();
    let mut ranked: Vec<(usize, f64)> = (0..y.cols())
        .map(|j| (j, sample_variance(&y.column(j))))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(ranked)
}

pub(crate) fn sample_variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
}

/// Cosine-annealed reduction of the number of active dimensions, reaching
/// `target_dims` at `end_fraction` of training.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PruneSchedule {
    pub total_steps: usize,
    pub end_fraction: f64,
    pub start_dims: usize,
    pub target_dims: usize,
}

impl PruneSchedule {
    pub fn new(total_steps: usize, start_dims: usize, target_dims: usize) -> Result<Self> {
        let s = PruneSchedule {
            total_steps,
            end_fraction: DEFAULT_END_FRACTION,
            start_dims,
            target_dims,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.target_dims > self.start_dims {
            return Err(Error::Config(format!(
                "target_dims {} exceeds start_dims {}",
                self.target_dims, self.start_dims
            )));
        }
        if !(self.end_fraction > 0.0 && self.end_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "end_fraction must be in (0, 1], got {}",
                self.end_fraction
            )));
        }
        if self.total_steps == 0 {
            return Err(Error::Config("total_steps must be positive".into()));
        }
        Ok(())
    }

    /// Number of dimensions kept at `step`.
    pub fn kept(&self, step: usize) -> usize {
        let end = self.end_fraction * self.total_steps as f64;
        let progress = (step as f64 / end).min(1.0);
        let span = (self.start_dims - self.target_dims) as f64;
        self.target_dims + (span * (1.0 + (PI * progress).cos()) / 2.0).round() as usize
    }
}

/// Keep-mask over dimensions: the `schedule.kept(step)` highest-ranked
/// dimensions stay active.
pub fn prune_mask(schedule: &PruneSchedule, step: usize, ranking: &[(usize, f64)]) -> Vec<bool> {
    let dims = ranking.iter().map(|(d, _)| d + 1).max().unwrap_or(0);
    let mut mask = vec![false; dims];
    for (d, _) in ranking.iter().take(schedule.kept(step)) {
        mask[*d] = true;
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    fn table(y: &[[f64; 2]]) -> IOTable {
        let x: Vec<[f64; 1]> = (0..y.len()).map(|i| [i as f64]).collect();
        IOTable::new(
            vec!["x".into()],
            vec!["a".into(), "b".into()],
            Matrix::from_rows(&x).unwrap(),
            Matrix::from_rows(y).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn hand_computed_variances() {
        let r = get_importance(&table(&[[0.0, 1.0], [0.0, 3.0]])).unwrap();
        assert_eq!(r, vec![(1, 2.0), (0, 0.0)]);
    }

    #[test]
    fn needs_two_rows() {
        assert!(get_importance(&table(&[[0.0, 1.0]])).is_err());
    }

    #[test]
    fn schedule_endpoints_and_midpoint() {
        let s = PruneSchedule::new(1000, 100, 2).unwrap();
        assert_eq!(s.kept(0), 100);
        assert_eq!(s.kept(325), 51);
        assert_eq!(s.kept(650), 2);
        assert_eq!(s.kept(1000), 2);
        assert!(PruneSchedule::new(10, 2, 3).is_err());
    }

    #[test]
    fn mask_keeps_top_ranked() {
        let s = PruneSchedule::new(10, 3, 1).unwrap();
        let ranking = [(2, 5.0), (0, 3.0), (1, 0.5)];
        assert_eq!(prune_mask(&s, 0, &ranking), vec![true, true, true]);
        assert_eq!(prune_mask(&s, 10, &ranking), vec![false, false, true]);
    }
}
