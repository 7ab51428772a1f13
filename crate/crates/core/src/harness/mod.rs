//! Recorded I/O tables, variable transforms, per-dimension distillation,
//! dimension importance and pruning schedules.

pub mod distill;
pub mod prune;
pub mod table;
pub mod transform;

pub use distill::{distill, distill_weighted, fit_dataset, read_bank, read_front, write_front, DimensionFit, FitResult, FrontRow};
pub use prune::{get_importance, prune_mask, PruneSchedule};
pub use table::{load_table, load_weights, save_csv, save_table, save_weights, IOTable, LoadOptions};
pub use transform::{apply_transforms, parse_transforms, VariableTransform};
