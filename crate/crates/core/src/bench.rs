//! Synthetic recovery benchmarks: pairwise force laws and the 1-D heat
//! equation solution, emitted as [`IOTable`]s.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::IOTable;
use crate::matrix::Matrix;

pub const DEFAULT_SOFTENING: f64 = 1e-2;
/// Pairs closer than this (before softening) are redrawn.
pub const MIN_SEPARATION: f64 = 0.1;

pub const PAIRWISE_INPUTS: [&str; 7] = ["dx", "dy", "r", "m1", "m2", "q1", "q2"];
pub const PAIRWISE_OUTPUTS: [&str; 2] = ["fx", "fy"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForceKind {
    /// Natural length 1: `(1 - r) / r * (dx, dy)`.
    Spring,
    /// Magnitude `1/r`: `(dx, dy) / r^2`.
    InvR,
    /// Gravity-like with the partner's mass: `m2 (dx, dy) / r^3`.
    InvR2,
    /// Coulomb-like: `q1 q2 (dx, dy) / r^3`.
    Charge,
}

impl ForceKind {
    pub const ALL: [ForceKind; 4] = [
        ForceKind::Spring,
        ForceKind::InvR,
        ForceKind::InvR2,
        ForceKind::Charge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ForceKind::Spring => "spring",
            ForceKind::InvR => "inv_r",
            ForceKind::InvR2 => "inv_r2",
            ForceKind::Charge => "charge",
        }
    }
}

impl fmt::Display for ForceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ForceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ForceKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown force law `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForceLaw {
    pub kind: ForceKind,
    pub softening: f64,
}

impl ForceLaw {
    pub fn new(kind: ForceKind) -> Self {
        ForceLaw {
            kind,
            softening: DEFAULT_SOFTENING,
        }
    }

    /// Force on the receiving particle. `r` is the softened distance.
    #[allow(clippy::too_many_arguments)]
    pub fn force(&self, dx: f64, dy: f64, r: f64, _m1: f64, m2: f64, q1: f64, q2: f64) -> (f64, f64) {
        let scale = match self.kind {
            ForceKind::Spring => (1.0 - r) / r,
            ForceKind::InvR => 1.0 / (r * r),
            ForceKind::InvR2 => m2 / (r * r * r),
            ForceKind::Charge => q1 * q2 / (r * r * r),
        };
        (scale * dx, scale * dy)
    }
}

/// Samples `n` interacting pairs with inputs `(dx, dy, r, m1, m2, q1, q2)`
/// and outputs `(fx, fy)`.
pub fn gen_pairwise<R: Rng + ?Sized>(law: ForceLaw, n: usize, rng: &mut R) -> Result<IOTable> {
    if n == 0 {
        return Err(Error::Config("n must be at least 1".into()));
    }
    if !(law.softening >= 0.0 && law.softening.is_finite()) {
        return Err(Error::Config("softening must be a nonnegative number".into()));
    }
    let mut x = Vec::with_capacity(n * 7);
    let mut y = Vec::with_capacity(n * 2);
    for _ in 0..n {
        let (dx, dy, dist) = loop {
            let dx = rng.random_range(-5.0..5.0);
            let dy = rng.random_range(-5.0..5.0);
            let dist = f64::hypot(dx, dy);
            if dist >= MIN_SEPARATION {
                break (dx, dy, dist);
            }
        };
        let r = dist + law.softening;
        let m1 = rng.random_range(0.5..2.0);
        let m2 = rng.random_range(0.5..2.0);
        let q1 = charge(rng);
        let q2 = charge(rng);
        let (fx, fy) = law.force(dx, dy, r, m1, m2, q1, q2);
        x.extend_from_slice(&[dx, dy, r, m1, m2, q1, q2]);
        y.extend_from_slice(&[fx, fy]);
    }
    IOTable::new(
        PAIRWISE_INPUTS.iter().map(|s| s.to_string()).collect(),
        PAIRWISE_OUTPUTS.iter().map(|s| s.to_string()).collect(),
        Matrix::new(n, 7, x)?,
        Matrix::new(n, 2, y)?,
    )
}

fn charge<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let q = rng.random_range(-1.0..1.0);
        if f64::abs(q) >= 0.1 {
            return q;
        }
    }
}

/// `u(x, t) = exp(-pi^2 alpha t) sin(pi x)`.
pub fn heat_solution(x: f64, t: f64, alpha: f64) -> f64 {
    (-PI * PI * alpha * t).exp() * (PI * x).sin()
}

/// Samples `(x, t)` uniformly on the unit square with output `u`.
pub fn gen_heat<R: Rng + ?Sized>(n: usize, alpha: f64, rng: &mut R) -> Result<IOTable> {
    if n == 0 {
        return Err(Error::Config("n must be at least 1".into()));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Config(format!("alpha must be positive, got {alpha}")));
    }
    let mut x = Vec::with_capacity(n * 2);
    let mut u = Vec::with_capacity(n);
    for _ in 0..n {
        let xi: f64 = rng.random();
        let ti: f64 = rng.random();
        x.extend_from_slice(&[xi, ti]);
        u.push(heat_solution(xi, ti, alpha));
    }
    IOTable::new(
        vec!["x".into(), "t".into()],
        vec!["u".into()],
        Matrix::new(n, 2, x)?,
        Matrix::new(n, 1, u)?,
    )
}
