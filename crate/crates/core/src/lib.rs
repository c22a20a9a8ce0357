//! Greedy column subset selection.
//!
//! Pick `l` columns of a matrix `A` whose span reconstructs `A` (or a
//! different target `B`) with the smallest Frobenius error. Scores are kept
//! up to date with rank-one corrections, so no residual matrix is ever
//! formed. On top of that sit a random-projection sketch, a partitioned
//! two-phase pipeline that selects against the shared sketch, baselines and
//! an evaluation metric.
//!
//! Column indices are 0-based throughout.
//!
//! ```
//! use greedy_css::{greedy_select, Matrix};
//!
//! let a = Matrix::identity(3).unwrap();
//! let sel = greedy_select(&a, 2).unwrap();
//! assert_eq!(sel.indices(), &[0, 1]);
//! ```

pub mod cli;
pub mod distributed;
pub mod error;
pub mod eval;
pub mod generalized;
pub mod greedy;
pub mod io;
pub mod linalg;
pub mod matrix;
pub mod rng;
pub mod sketch;
pub mod synth;

pub use distributed::{distributed_select, naive_distributed_baseline, Assignment, DistributedConfig};
pub use error::{CssError, Result};
pub use eval::{relative_accuracy, EvalReport, ProbabilityMode};
pub use generalized::generalized_select;
pub use greedy::{greedy_select, Selection, StopReason};
pub use io::{load_matrix, save_matrix, Format, RunSummary};
pub use linalg::{css_criterion, target_criterion};
pub use matrix::{ColumnSet, Matrix};
pub use sketch::{sketch_matrix, sketch_partitioned, SketchKind, SketchSpec};
