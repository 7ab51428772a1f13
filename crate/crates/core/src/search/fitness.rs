//! Training data as seen by the search, and the loss it minimizes.

use rand::Rng;

use super::config::{LossKind, SRConfig};
use crate::error::{Error, Result};
use crate::expr::eval::eval_unchecked;
use crate::expr::{Expr, OperatorSet};
use crate::matrix::Matrix;

/// Column-major inputs, one target column, optional row weights.
#[derive(Clone, Debug)]
pub struct Dataset {
    columns: Vec<Vec<f64>>,
    y: Vec<f64>,
    weights: Option<Vec<f64>>,
    weight_total: f64,
}

impl Dataset {
    pub fn new(x: &Matrix, y: &[f64]) -> Result<Self> {
        if x.rows() == 0 || y.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if x.rows() != y.len() {
            return Err(Error::Shape(format!(
                "{} input rows but {} targets",
                x.rows(),
                y.len()
            )));
        }
        Ok(Dataset {
            columns: x.columns(),
            y: y.to_vec(),
            weights: None,
            weight_total: y.len() as f64,
        })
    }

    /// Attaches per-row weights. Uniform weights are dropped, so a uniformly
    /// weighted dataset behaves exactly like an unweighted one.
    pub fn with_weights(mut self, weights: &[f64]) -> Result<Self> {
        if weights.len() != self.y.len() {
            return Err(Error::Shape(format!(
                "{} weights for {} rows",
                weights.len(),
                self.y.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Data("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::Data("all weights are zero".into()));
        }
        if weights.iter().all(|w| *w == weights[0]) {
            self.weights = None;
            self.weight_total = self.y.len() as f64;
        } else {
            self.weights = Some(weights.to_vec());
            self.weight_total = total;
        }
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn d(&self) -> usize {
        self.columns.len()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn column_refs(&self) -> Vec<&[f64]> {
        self.columns.iter().map(Vec::as_slice).collect()
    }

    pub fn check_targets(&self) -> Result<()> {
        if let Some(i) = self.y.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("target row {i} is not finite")));
        }
        Ok(())
    }

    /// Predictions; panics if `expr` references a missing column.
    pub fn predict(&self, expr: &Expr) -> Vec<f64> {
        eval_unchecked(expr, &self.column_refs(), self.n())
    }

    /// Mean (weighted) data loss; `+inf` if any prediction is NaN.
    pub fn data_loss(&self, expr: &Expr, kind: LossKind) -> f64 {
        if expr.max_var().is_some_and(|i| i >= self.d()) {
            return f64::INFINITY;
        }
        let pred = self.predict(expr);
        self.loss_of(&pred, kind)
    }

    pub fn loss_of(&self, pred: &[f64], kind: LossKind) -> f64 {
        let residual = |p: f64, y: f64| match kind {
            LossKind::Mse => (p - y) * (p - y),
            LossKind::Mae => (p - y).abs(),
        };
        let mut acc = 0.0;
        match &self.weights {
            None => {
                for (p, y) in pred.iter().zip(&self.y) {
                    acc += residual(*p, *y);
                }
            }
            Some(w) => {
                for ((p, y), w) in pred.iter().zip(&self.y).zip(w) {
                    acc += w * residual(*p, *y);
                }
            }
        }
        let loss = acc / self.weight_total;
        if loss.is_nan() {
            f64::INFINITY
        } else {
            loss
        }
    }

    /// Loss of the constant predictor at the (weighted) target mean.
    pub fn baseline_loss(&self, kind: LossKind) -> f64 {
        let mean = match &self.weights {
            None => self.y.iter().sum::<f64>() / self.weight_total,
            Some(w) => self.y.iter().zip(w).map(|(y, w)| y * w).sum::<f64>() / self.weight_total,
        };
        self.loss_of(&vec![mean; self.n()], kind)
    }

    /// Random subset of at most `max_rows` rows (all rows when smaller).
    pub fn subsample<R: Rng + ?Sized>(&self, max_rows: usize, rng: &mut R) -> Dataset {
        if self.n() <= max_rows {
            return self.clone();
        }
        let mut idx = rand::seq::index::sample(rng, self.n(), max_rows).into_vec();
        idx.sort_unstable();
        let columns = self
            .columns
            .iter()
            .map(|c| idx.iter().map(|&i| c[i]).collect())
            .collect();
        let y = idx.iter().map(|&i| self.y[i]).collect();
        let weights: Option<Vec<f64>> = self
            .weights
            .as_ref()
            .map(|w| idx.iter().map(|&i| w[i]).collect());
        let weight_total = match &weights {
            Some(w) => w.iter().sum::<f64>().max(f64::MIN_POSITIVE),
            None => max_rows as f64,
        };
        Dataset {
            columns,
            y,
            weights,
            weight_total,
        }
    }
}

/// Complexity, raw data loss and the penalized fitness of an expression.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Score {
    pub complexity: u32,
    pub loss: f64,
    pub fitness: f64,
}

/// Divisor applied to data loss inside the search fitness: the loss of the
/// best constant predictor when `normalize_loss` is set and that loss is
/// positive, 1 otherwise.
pub fn loss_scale(data: &Dataset, config: &SRConfig) -> f64 {
    if !config.normalize_loss {
        return 1.0;
    }
    let baseline = data.baseline_loss(config.loss);
    if baseline > 0.0 && baseline.is_finite() {
        baseline
    } else {
        1.0
    }
}

pub(crate) fn fitness_of(loss: f64, complexity: u32, scale: f64, config: &SRConfig) -> f64 {
    loss / scale + config.parsimony * complexity as f64
}

pub(crate) fn score(expr: &Expr, data: &Dataset, config: &SRConfig, scale: f64) -> Result<Score> {
    let complexity = expr.complexity(&config.ops)?;
    let loss = data.data_loss(expr, config.loss);
    Ok(Score {
        complexity,
        loss,
        fitness: fitness_of(loss, complexity, scale, config),
    })
}

/// Mean squared error plus `parsimony * complexity`; `+inf` on any NaN prediction.
pub fn penalized_loss(
    expr: &Expr,
    x: &Matrix,
    y: &[f64],
    ops: &OperatorSet,
    parsimony: f64,
) -> Result<f64> {
    let data = Dataset::new(x, y)?;
    if let Some(i) = expr.max_var() {
        if i >= data.d() {
            return Err(Error::VariableOutOfRange {
                index: i,
                columns: data.d(),
            });
        }
    }
    let complexity = expr.complexity(ops)?;
    Ok(data.data_loss(expr, LossKind::Mse) + parsimony * complexity as f64)
}
