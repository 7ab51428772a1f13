use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::OperatorSet;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    #[default]
    Mse,
    Mae,
}

/// Everything that controls a symbolic-regression run.
///
/// Defaults: operators `+ * inv sin exp` with
/// `sin` and `exp` costing 3, 400 iterations, tournaments of two.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SRConfig {
    pub ops: OperatorSet,
    pub n_populations: usize,
    pub population_size: usize,
    pub n_iterations: usize,
    pub tournament_size: usize,
    pub tournament_p: f64,
    pub parsimony: f64,
    pub max_complexity: u32,
    pub migration_interval: usize,
    pub migration_fraction: f64,
    /// Constant optimization runs every this many rounds.
    pub constant_opt_interval: usize,
    /// Fraction of members whose constants are optimized in such a round.
    pub optimizer_probability: f64,
    pub optimizer_max_evals: usize,
    pub optimizer_restarts: usize,
    /// Constant fitting works on a random row subset of at most this size.
    pub optimizer_max_rows: usize,
    /// Nelder–Mead budget for fitting the constants of each new child
    /// before it is scored; 0 turns this off.
    pub child_optimizer_evals: usize,
    pub child_optimizer_rows: usize,
    pub acceptance_temperature: f64,
    pub crossover_probability: f64,
    pub max_init_depth: usize,
    pub loss: LossKind,
    /// Tournaments rank by penalized loss when set, raw data loss otherwise.
    pub penalized_tournament: bool,
    /// Divide data loss by the best constant's loss before adding the
    /// parsimony term, so `parsimony` means the same on any target scale.
    pub normalize_loss: bool,
    /// Selection and acceptance multiply fitness by
    /// `exp(scaling * share)`, where `share` is the fraction of the
    /// population at that complexity; 0 turns this off.
    pub adaptive_parsimony_scaling: f64,
    pub seed: u64,
}

impl Default for SRConfig {
    fn default() -> Self {
        SRConfig {
            ops: OperatorSet::default(),
            n_populations: 8,
            population_size: 50,
            n_iterations: 400,
            tournament_size: 2,
            tournament_p: 0.9,
            parsimony: 0.0,
            max_complexity: 25,
            migration_interval: 10,
            migration_fraction: 0.1,
            constant_opt_interval: 1,
            optimizer_probability: 0.14,
            optimizer_max_evals: 200,
            optimizer_restarts: 2,
            optimizer_max_rows: 256,
            child_optimizer_evals: 60,
            child_optimizer_rows: 128,
            acceptance_temperature: 0.1,
            crossover_probability: 0.1,
            max_init_depth: 4,
            loss: LossKind::Mse,
            penalized_tournament: true,
            normalize_loss: true,
            adaptive_parsimony_scaling: 20.0,
            seed: 0,
        }
    }
}

impl SRConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.n_populations < 1 {
            return fail("n_populations must be at least 1".into());
        }
        if self.population_size < 2 {
            return fail("population_size must be at least 2".into());
        }
        if self.tournament_size < 1 || self.tournament_size > self.population_size {
            return fail(format!(
                "tournament_size must be in 1..={}",
                self.population_size
            ));
        }
        for (name, p) in [
            ("tournament_p", self.tournament_p),
            ("optimizer_probability", self.optimizer_probability),
        ] {
            if !(p > 0.0 && p <= 1.0) {
                return fail(format!("{name} must be in (0, 1], got {p}"));
            }
        }
        for (name, p) in [
            ("migration_fraction", self.migration_fraction),
            ("crossover_probability", self.crossover_probability),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return fail(format!("{name} must be in [0, 1], got {p}"));
            }
        }
        if !(self.parsimony >= 0.0 && self.parsimony.is_finite()) {
            return fail(format!("parsimony must be a nonnegative number, got {}", self.parsimony));
        }
        if !(self.adaptive_parsimony_scaling >= 0.0 && self.adaptive_parsimony_scaling.is_finite()) {
            return fail(format!(
                "adaptive_parsimony_scaling must be a nonnegative number, got {}",
                self.adaptive_parsimony_scaling
            ));
        }
        if self.max_complexity < 3 {
            return fail(format!("max_complexity must be at least 3, got {}", self.max_complexity));
        }
        if !(self.acceptance_temperature > 0.0 && self.acceptance_temperature.is_finite()) {
            return fail("acceptance_temperature must be positive".into());
        }
        if self.migration_interval == 0 || self.constant_opt_interval == 0 {
            return fail("intervals must be at least 1".into());
        }
        if self.max_init_depth == 0 {
            return fail("max_init_depth must be at least 1".into());
        }
        Ok(())
    }
}
