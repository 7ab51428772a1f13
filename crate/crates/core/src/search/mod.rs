//! Genetic symbolic regression: fitness, variation operators, constant
//! fitting, the multi-population loop and Pareto-front selection.

pub mod config;
pub mod constants;
pub mod evolve;
pub mod fitness;
pub mod front;
pub mod operators;

pub use config::{LossKind, SRConfig};
pub use constants::{fit_constants, nelder_mead, optimize_constants, FitBudget};
pub use evolve::{evolve, SearchStats};
pub use fitness::{penalized_loss, Dataset, Score};
pub use front::{scores, select_best, FrontEntry, ParetoFront};
pub use operators::{accept, crossover, mutate, random_tree, tournament_select, Grammar, Mutation};
