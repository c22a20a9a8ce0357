//! Two-phase partitioned selection.
//!
//! 1. Sketch: every partition computes its partial sketch `Σ_{i∈b} A_{:i}Ω_{i:}`
//!    and the partials are summed into the shared target `B = AΩ`.
//! 2. Map: each partition runs generalized selection of `l_b = ⌈l/c⌉` of its
//!    own columns against `B`, and ships only the picked columns.
//! 3. Reduce: one generalized selection of `l` columns from the concatenated
//!    picks (in partition-id order), again against `B`.
//!
//! Everything runs in-process on a rayon pool; the map tasks share immutable
//! data only, and the reduce starts after all of them finish.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CssError, Result};
use crate::generalized::generalized_select;
use crate::greedy::{greedy_select, Selection, StopReason};
use crate::linalg::{css_criterion, target_criterion};
use crate::matrix::{ColumnSet, Matrix};
use crate::sketch::{sketch_partitioned, SketchSpec};

/// How columns are dealt out to partitions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Assignment {
    /// Consecutive blocks; the first `n mod c` blocks get one extra column.
    Contiguous,
    /// Column `j` goes to partition `j mod c`.
    RoundRobin,
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Assignment::Contiguous => "contiguous",
            Assignment::RoundRobin => "round-robin",
        })
    }
}

impl FromStr for Assignment {
    type Err = CssError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "contiguous" => Ok(Assignment::Contiguous),
            "round-robin" => Ok(Assignment::RoundRobin),
            other => Err(CssError::InvalidArgument(format!("unknown assignment '{other}'"))),
        }
    }
}

/// A block of columns together with their global positions.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    pub id: usize,
    pub matrix: Matrix,
    pub global: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistributedConfig {
    /// Number of partitions `c`.
    pub partitions: usize,
    /// Global column budget `l`.
    pub l: usize,
    pub assignment: Assignment,
    pub sketch: SketchSpec,
    pub seed: u64,
    /// Worker threads for the sketch and map phases; `None` uses rayon's default.
    pub threads: Option<usize>,
}

impl DistributedConfig {
    /// `l_b = ⌈l / c⌉`, so that the partitions always offer at least `l` candidates.
    pub fn per_partition_budget(&self) -> usize {
        self.l.div_ceil(self.partitions.max(1))
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.partitions == 0 {
            return Err(CssError::Partition("partition count must be at least 1".into()));
        }
        if self.partitions > n {
            return Err(CssError::Partition(format!(
                "{} partitions requested for {n} columns",
                self.partitions
            )));
        }
        if self.l == 0 || self.l > n {
            return Err(CssError::InvalidArgument(format!(
                "column budget {} must be between 1 and {n}",
                self.l
            )));
        }
        if self.threads == Some(0) {
            return Err(CssError::InvalidArgument("thread count must be at least 1".into()));
        }
        self.sketch.validate(n)
    }
}

/// Splits the columns of `a` into `c` partitions.
pub fn partition_columns(a: &Matrix, c: usize, assignment: Assignment) -> Result<Vec<Partition>> {
    let n = a.ncols();
    if c == 0 || c > n {
        return Err(CssError::Partition(format!("cannot split {n} columns into {c} partitions")));
    }
    let groups: Vec<Vec<usize>> = match assignment {
        Assignment::Contiguous => {
            let (base, extra) = (n / c, n % c);
            let mut start = 0;
            (0..c)
                .map(|b| {
                    let len = base + usize::from(b < extra);
                    let g: Vec<usize> = (start..start + len).collect();
                    start += len;
                    g
                })
                .collect()
        }
        Assignment::RoundRobin => (0..c).map(|b| (b..n).step_by(c).collect()).collect(),
    };
    groups
        .into_iter()
        .enumerate()
        .map(|(id, global)| {
            let set = ColumnSet::from_indices(global.clone())?;
            Ok(Partition {
                id,
                matrix: a.select_columns(&set)?,
                global,
            })
        })
        .collect()
}

/// What a map task emits: its picks and the picked column data.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionResult {
    pub partition: usize,
    /// Picks as partition-local positions, in selection order.
    pub local: ColumnSet,
    /// The same picks as global column indices.
    pub global: Vec<usize>,
    rows: usize,
    data: Vec<f64>,
    pub stop: Option<StopReason>,
}

impl PartitionResult {
    pub fn len(&self) -> usize {
        self.global.len()
    }

    pub fn is_empty(&self) -> bool {
        self.global.is_empty()
    }

    /// Picked columns as an m×|picks| matrix, or `None` when nothing was picked.
    pub fn data(&self) -> Option<Matrix> {
        if self.is_empty() {
            return None;
        }
        Matrix::from_column_major(self.rows, self.len(), self.data.clone()).ok()
    }

    fn column(&self, k: usize) -> &[f64] {
        &self.data[k * self.rows..(k + 1) * self.rows]
    }
}

/// Map phase for one partition: generalized selection of up to `l_b` of its
/// columns against the shared target `b`.
pub fn map_phase(partition: &Partition, b: &Matrix, l_b: usize) -> Result<PartitionResult> {
    if partition.matrix.nrows() != b.nrows() {
        return Err(CssError::Dimension(format!(
            "partition {} has {} rows, target has {}",
            partition.id,
            partition.matrix.nrows(),
            b.nrows()
        )));
    }
    let budget = l_b.min(partition.matrix.ncols());
    let selection = if budget == 0 {
        Selection { columns: ColumnSet::new(), stop: Some(StopReason::Exhausted) }
    } else {
        match generalized_select(&partition.matrix, b, budget) {
            Ok(sel) => sel,
            // An all-zero block has nothing to offer.
            Err(CssError::NoActiveCandidates) => {
                Selection { columns: ColumnSet::new(), stop: Some(StopReason::Exhausted) }
            }
            Err(e) => return Err(e),
        }
    };
    let m = partition.matrix.nrows();
    let mut data = Vec::with_capacity(m * selection.columns.len());
    for &j in selection.indices() {
        data.extend_from_slice(partition.matrix.column(j));
    }
    Ok(PartitionResult {
        partition: partition.id,
        global: selection.indices().iter().map(|&j| partition.global[j]).collect(),
        local: selection.columns,
        rows: m,
        data,
        stop: selection.stop,
    })
}

/// Reduce output: the final picks (global indices) and their data.
#[derive(Clone, Debug)]
pub struct ReduceOutcome {
    pub selection: Selection,
    pub data: Matrix,
    /// `‖B − P B‖²_F` over the final picks.
    pub target_error: f64,
}

/// Concatenated map-phase picks in partition-id order with their global indices.
fn gather(results: &[PartitionResult]) -> Result<(Matrix, Vec<usize>)> {
    let mut ordered: Vec<&PartitionResult> = results.iter().collect();
    ordered.sort_by_key(|r| r.partition);
    let mut seen = std::collections::HashSet::new();
    let mut columns = Vec::new();
    let mut global = Vec::new();
    for r in ordered {
        for (k, &g) in r.global.iter().enumerate() {
            if !seen.insert(g) {
                return Err(CssError::Tiling(format!("global column {g} arrived from two partitions")));
            }
            columns.push(r.column(k).to_vec());
            global.push(g);
        }
    }
    if columns.is_empty() {
        return Err(CssError::Exhausted);
    }
    Ok((Matrix::from_columns(&columns)?, global))
}

/// Reduce phase: generalized selection of `l` columns out of all map-phase picks.
pub fn reduce_phase(results: &[PartitionResult], b: &Matrix, l: usize) -> Result<ReduceOutcome> {
    if results.is_empty() {
        return Err(CssError::InvalidArgument("reduce phase needs at least one map result".into()));
    }
    let (candidates, global) = gather(results)?;
    if candidates.nrows() != b.nrows() {
        return Err(CssError::Dimension("map results and target differ in row count".into()));
    }
    if l == 0 {
        return Err(CssError::InvalidArgument("column budget must be at least 1".into()));
    }
    let budget = l.min(candidates.ncols());
    let local = generalized_select(&candidates, b, budget)?;
    let target_error = target_criterion(&candidates, &local.columns, b)?;
    let stop = local
        .stop
        .or((local.columns.len() < l).then_some(StopReason::Exhausted));
    Ok(ReduceOutcome {
        data: candidates.select_columns(&local.columns)?,
        selection: Selection { columns: local.columns.map_through(&global), stop },
        target_error,
    })
}

/// Wall-clock time per phase, in seconds. Reported, never asserted.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PhaseTimings {
    pub sketch: f64,
    pub map: f64,
    pub reduce: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistributedReport {
    /// `‖B − P B‖²_F` for the final selection.
    pub target_error: f64,
    /// `‖A − P A‖²_F` for the final selection.
    pub reconstruction_error: f64,
    pub timings: PhaseTimings,
    /// Column vectors shipped from the map phase to the reducer, `Σ_b |picks_b|`.
    pub columns_moved: usize,
    /// Values broadcast for the shared target: `c · m · r`.
    pub broadcast_values: usize,
    pub picks_per_partition: Vec<usize>,
    pub per_partition_budget: usize,
    pub stop: Option<StopReason>,
}

#[derive(Clone, Debug)]
pub struct DistributedOutcome {
    pub selection: Selection,
    pub sketch: Matrix,
    pub report: DistributedReport,
}

fn with_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(job()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CssError::InvalidArgument(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Full pipeline: partition, sketch, map, reduce.
pub fn distributed_select(a: &Matrix, config: &DistributedConfig) -> Result<DistributedOutcome> {
    config.validate(a.ncols())?;
    let partitions = partition_columns(a, config.partitions, config.assignment)?;
    let l_b = config.per_partition_budget();

    with_pool(config.threads, || {
        let t0 = Instant::now();
        let b = sketch_partitioned(&partitions, &config.sketch)?;
        let t1 = Instant::now();
        let results: Vec<PartitionResult> = partitions
            .par_iter()
            .map(|p| map_phase(p, &b, l_b))
            .collect::<Result<_>>()?;
        let t2 = Instant::now();
        let reduced = reduce_phase(&results, &b, config.l)?;
        let t3 = Instant::now();

        let report = DistributedReport {
            target_error: reduced.target_error,
            reconstruction_error: css_criterion(a, &reduced.selection.columns)?,
            timings: PhaseTimings {
                sketch: (t1 - t0).as_secs_f64(),
                map: (t2 - t1).as_secs_f64(),
                reduce: (t3 - t2).as_secs_f64(),
            },
            columns_moved: results.iter().map(PartitionResult::len).sum(),
            broadcast_values: config.partitions * b.nrows() * b.ncols(),
            picks_per_partition: results.iter().map(PartitionResult::len).collect(),
            per_partition_budget: l_b,
            stop: reduced.selection.stop,
        };
        Ok(DistributedOutcome {
            selection: reduced.selection,
            sketch: b,
            report,
        })
    })?
}

/// Baseline without a shared target: each partition runs plain greedy
/// selection on its own columns, and the union is reduced by greedy
/// selection of `l` columns reconstructing the union itself.
pub fn naive_distributed_baseline(a: &Matrix, config: &DistributedConfig) -> Result<Selection> {
    config.validate(a.ncols())?;
    let partitions = partition_columns(a, config.partitions, config.assignment)?;
    let l_b = config.per_partition_budget();
    let picks: Vec<Vec<usize>> = with_pool(config.threads, || {
        partitions
            .par_iter()
            .map(|p| {
                let budget = l_b.min(p.matrix.ncols());
                match greedy_select(&p.matrix, budget) {
                    Ok(sel) => Ok(sel.indices().iter().map(|&j| p.global[j]).collect()),
                    Err(CssError::NoActiveCandidates) => Ok(Vec::new()),
                    Err(e) => Err(e),
                }
            })
            .collect::<Result<_>>()
    })??;
    let union: Vec<usize> = picks.into_iter().flatten().collect();
    if union.is_empty() {
        return Err(CssError::NoActiveCandidates);
    }
    let candidates = a.select_columns(&ColumnSet::from_indices(union.clone())?)?;
    let budget = config.l.min(candidates.ncols());
    let local = generalized_select(&candidates, &candidates, budget)?;
    let stop = local
        .stop
        .or((local.columns.len() < config.l).then_some(StopReason::Exhausted));
    Ok(Selection {
        columns: local.columns.map_through(&union),
        stop,
    })
}
