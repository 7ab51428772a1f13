//! Column-wise batch evaluation.
//!
//! Any non-finite intermediate (division by zero, `log` of a non-positive
//! number, overflow) becomes NaN for that row only.

use super::Expr;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Evaluates `expr` on every row of `x`.
pub fn eval_batch(expr: &Expr, x: &Matrix) -> Result<Vec<f64>> {
    let columns = x.columns();
    let refs: Vec<&[f64]> = columns.iter().map(Vec::as_slice).collect();
    eval_columns(expr, &refs, x.rows())
}

/// Evaluates `expr` over column-major data, `n` rows per column.
pub fn eval_columns(expr: &Expr, columns: &[&[f64]], n: usize) -> Result<Vec<f64>> {
    if let Some(i) = expr.max_var() {
        if i >= columns.len() {
            return Err(Error::VariableOutOfRange {
                index: i,
                columns: columns.len(),
            });
        }
    }
    if let Some(c) = columns.iter().find(|c| c.len() != n) {
        return Err(Error::Shape(format!(
            "column holds {} rows, expected {n}",
            c.len()
        )));
    }
    Ok(eval_unchecked(expr, columns, n))
}

#[inline]
fn sanitize(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::NAN
    }
}

/// Caller guarantees every variable index is in range and all columns hold `n` rows.
pub(crate) fn eval_unchecked(expr: &Expr, columns: &[&[f64]], n: usize) -> Vec<f64> {
    match expr {
        Expr::Const(c) => vec![sanitize(*c); n],
        Expr::Var(i) => columns[*i].iter().map(|v| sanitize(*v)).collect(),
        Expr::Unary(op, a) => {
            let mut v = eval_unchecked(a, columns, n);
            let op = *op;
            for x in v.iter_mut() {
                *x = sanitize(op.apply(*x));
            }
            v
        }
        Expr::Binary(op, a, b) => {
            let mut v = eval_unchecked(a, columns, n);
            let op = *op;
            match &**b {
                Expr::Const(c) => {
                    let c = sanitize(*c);
                    for x in v.iter_mut() {
                        *x = sanitize(op.apply(*x, c));
                    }
                }
                Expr::Var(i) => {
                    for (x, y) in v.iter_mut().zip(columns[*i]) {
                        *x = sanitize(op.apply(*x, sanitize(*y)));
                    }
                }
                other => {
                    let w = eval_unchecked(other, columns, n);
                    for (x, y) in v.iter_mut().zip(&w) {
                        *x = sanitize(op.apply(*x, *y));
                    }
                }
            }
            v
        }
    }
}

/// Evaluates on a single point.
pub fn eval_point(expr: &Expr, point: &[f64]) -> Result<f64> {
    let cols: Vec<[f64; 1]> = point.iter().map(|v| [*v]).collect();
    let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
    Ok(eval_columns(expr, &refs, 1)?[0])
}
