//! Random-projection sketch `B = AΩ`, accumulated one column at a time.
//!
//! `B = Σ_i A_{:i} Ω_{i:}`, and row `Ω_{i:}` is a pure function of the master
//! seed and the global column index `i`. Any worker can therefore regenerate
//! the rows it needs without `Ω` ever being materialized, and the result does
//! not depend on how columns are ordered or partitioned.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::distributed::Partition;
use crate::error::{CssError, Result};
use crate::matrix::{axpy, Matrix};
use crate::rng::{derive_seed, rng_from_seed};

/// Entry distribution of `Ω`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SketchKind {
    /// Standard normal entries.
    Gaussian,
    /// ±1 with equal probability.
    Sign,
    /// `+√3`, `0`, `−√3` with probabilities 1/6, 2/3, 1/6.
    SparseSign,
    /// `Ω = I` (requires `r = n`); for exactness checks only.
    Identity,
}

impl SketchKind {
    pub fn name(self) -> &'static str {
        match self {
            SketchKind::Gaussian => "gaussian",
            SketchKind::Sign => "sign",
            SketchKind::SparseSign => "sparse-sign",
            SketchKind::Identity => "identity",
        }
    }
}

impl fmt::Display for SketchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for SketchKind {
    type Err = CssError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(SketchKind::Gaussian),
            "sign" => Ok(SketchKind::Sign),
            "sparse-sign" => Ok(SketchKind::SparseSign),
            "identity" => Ok(SketchKind::Identity),
            other => Err(CssError::InvalidArgument(format!("unknown sketch kind '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SketchSpec {
    pub kind: SketchKind,
    /// Target dimension (columns of `B`).
    pub r: usize,
    pub seed: u64,
}

impl SketchSpec {
    pub fn new(kind: SketchKind, r: usize, seed: u64) -> Self {
        Self { kind, r, seed }
    }

    /// Checks the spec against a matrix with `n` columns.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.r == 0 {
            return Err(CssError::InvalidArgument("sketch dimension r must be at least 1".into()));
        }
        if self.kind == SketchKind::Identity && self.r != n {
            return Err(CssError::InvalidArgument(format!(
                "identity sketch needs r = n = {n}, got r = {}",
                self.r
            )));
        }
        Ok(())
    }
}

/// Row `i` of `Ω`, determined by `(spec.seed, i)` alone.
pub fn omega_row(spec: &SketchSpec, i: usize) -> Vec<f64> {
    let r = spec.r;
    if spec.kind == SketchKind::Identity {
        let mut row = vec![0.0; r];
        if i < r {
            row[i] = 1.0;
        }
        return row;
    }
    let mut rng = rng_from_seed(derive_seed(spec.seed, i as u64));
    match spec.kind {
        SketchKind::Gaussian => (0..r).map(|_| StandardNormal.sample(&mut rng)).collect(),
        SketchKind::Sign => (0..r)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect(),
        SketchKind::SparseSign => {
            let s = 3f64.sqrt();
            (0..r)
                .map(|_| match rng.random_range(0..6u8) {
                    0 => s,
                    1 => -s,
                    _ => 0.0,
                })
                .collect()
        }
        SketchKind::Identity => unreachable!(),
    }
}

/// Adds `A_{:i} Ω_{g(i):}` for every local column `i` into the m×r
/// accumulator `acc` (column-major), where `global[i]` is the global index.
fn accumulate(acc: &mut [f64], a: &Matrix, global: &[usize], spec: &SketchSpec) {
    let m = a.nrows();
    for (col, &g) in a.columns().zip(global) {
        let row = omega_row(spec, g);
        for (j, &v) in row.iter().enumerate() {
            if v != 0.0 {
                axpy(v, col, &mut acc[j * m..(j + 1) * m]);
            }
        }
    }
}

/// `B = AΩ` by streaming over the columns of `a` in index order.
pub fn sketch_matrix(a: &Matrix, spec: &SketchSpec) -> Result<Matrix> {
    let order: Vec<usize> = (0..a.ncols()).collect();
    sketch_in_order(a, spec, &order)
}

/// `B = AΩ`, visiting columns in the given order. The result agrees with
/// [`sketch_matrix`] up to floating-point reassociation.
pub fn sketch_in_order(a: &Matrix, spec: &SketchSpec, order: &[usize]) -> Result<Matrix> {
    spec.validate(a.ncols())?;
    let m = a.nrows();
    let mut acc = vec![0.0; m * spec.r];
    for &i in order {
        if i >= a.ncols() {
            return Err(CssError::InvalidColumns(format!("column {i} out of range")));
        }
        let col = Matrix::from_column_major(m, 1, a.column(i).to_vec())?;
        accumulate(&mut acc, &col, &[i], spec);
    }
    Matrix::from_column_major(m, spec.r, acc)
}

/// Per-partition partial sketch `B̄_(b) = Σ_{i ∈ b} A_{:i} Ω_{g(i):}`.
pub fn partial_sketch(partition: &Partition, spec: &SketchSpec) -> Result<Matrix> {
    let m = partition.matrix.nrows();
    let mut acc = vec![0.0; m * spec.r];
    accumulate(&mut acc, &partition.matrix, &partition.global, spec);
    Matrix::from_column_major(m, spec.r, acc)
}

/// Checks that the partitions' global indices tile `0..n` exactly once and
/// that row counts agree. Returns `n`.
pub fn check_tiling(partitions: &[Partition]) -> Result<usize> {
    let first = partitions
        .first()
        .ok_or_else(|| CssError::Tiling("no partitions".into()))?;
    let m = first.matrix.nrows();
    let n: usize = partitions.iter().map(|p| p.global.len()).sum();
    let mut seen = vec![false; n];
    for p in partitions {
        if p.matrix.nrows() != m {
            return Err(CssError::Dimension(format!(
                "partition {} has {} rows, expected {m}",
                p.id,
                p.matrix.nrows()
            )));
        }
        if p.global.len() != p.matrix.ncols() {
            return Err(CssError::Tiling(format!(
                "partition {} maps {} indices for {} columns",
                p.id,
                p.global.len(),
                p.matrix.ncols()
            )));
        }
        for &g in &p.global {
            if g >= n {
                return Err(CssError::Tiling(format!("global index {g} leaves a gap in 0..{n}")));
            }
            if std::mem::replace(&mut seen[g], true) {
                return Err(CssError::Tiling(format!("global column {g} assigned twice")));
            }
        }
    }
    Ok(n)
}

/// Sketch of the matrix tiled by `partitions`: partial sketches are computed
/// independently (in parallel) and summed in partition-id order.
pub fn sketch_partitioned(partitions: &[Partition], spec: &SketchSpec) -> Result<Matrix> {
    let n = check_tiling(partitions)?;
    spec.validate(n)?;
    let mut ordered: Vec<&Partition> = partitions.iter().collect();
    ordered.sort_by_key(|p| p.id);
    let partials: Vec<Matrix> = ordered
        .par_iter()
        .map(|p| partial_sketch(p, spec))
        .collect::<Result<_>>()?;
    let m = partials[0].nrows();
    let mut total = vec![0.0; m * spec.r];
    for part in &partials {
        axpy(1.0, part.as_slice(), &mut total);
    }
    Matrix::from_column_major(m, spec.r, total)
}
