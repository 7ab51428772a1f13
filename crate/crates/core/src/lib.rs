//! Symbolic distillation toolkit.
//!
//! Fits closed-form expressions to recorded input/output behaviour of a
//! model component with multi-population genetic symbolic regression,
//! selects equations from the resulting Pareto front, explains local
//! behaviour with symbolic surrogates and provides the PCA and pruning
//! utilities used when distilling wide layers.

pub mod bench;
pub mod cli;
pub mod error;
pub mod expr;
pub mod harness;
pub mod matrix;
pub mod pca;
pub mod search;
pub mod slime;

pub use error::{Error, Result};
pub use expr::{Expr, Op, Operator, OperatorSet};
pub use harness::{distill, IOTable};
pub use matrix::Matrix;
pub use pca::{pca_fit, PcaModel};
pub use search::{evolve, select_best, Dataset, ParetoFront, SRConfig};
pub use slime::{build_locale, slime_fit, Locale, SlimeParams};
