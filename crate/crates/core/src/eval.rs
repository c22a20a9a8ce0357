//! Relative-accuracy metric, baseline selectors and brute-force oracles.
//!
//! Relative accuracy places a selection `S` on a scale where the mean
//! uniform-random selection of the same size scores 0% and the best rank-l
//! approximation from the SVD scores 100%:
//!
//! ```text
//! 100 · (‖A − Ã_U‖_F − ‖A − Ã_S‖_F) / (‖A − Ã_U‖_F − ‖A − A_l‖_F)
//! ```
//!
//! Note the plain (not squared) Frobenius norms.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CssError, Result};
use crate::generalized::generalized_select;
use crate::greedy::{greedy_select, Selection, StopReason, DEACTIVATION_TOLERANCE, RECONSTRUCTED_TOLERANCE};
use crate::linalg::{best_rank_k_error_sq, css_criterion_lenient, randomized_svd};
use crate::matrix::{ColumnSet, Matrix};
use crate::rng::{derive_seed, rng_from_seed, streams};

/// Default number of uniform draws averaged in the metric.
pub const DEFAULT_UNIFORM_TRIALS: usize = 10;

/// Denominators at or below this fraction of `‖A‖_F` make the metric undefined.
pub const METRIC_DENOMINATOR_TOLERANCE: f64 = 1e-12;

/// Oracles refuse inputs larger than this in either dimension.
pub const ORACLE_LIMIT: usize = 64;

/// Oracle ties: criterion values within this fraction of the target energy.
pub const ORACLE_TIE_TOLERANCE: f64 = 1e-9;

/// `l` distinct indices drawn uniformly without replacement.
pub fn uniform_select(n: usize, l: usize, seed: u64) -> Result<ColumnSet> {
    if l > n {
        return Err(CssError::InvalidArgument(format!("cannot draw {l} of {n} columns")));
    }
    let mut rng = rng_from_seed(seed);
    ColumnSet::from_indices(rand::seq::index::sample(&mut rng, n, l).into_vec())
}

/// Seed of uniform trial `t`: consecutive offsets from the uniform-trials
/// stream of `seed`. The uniform baseline run with the same master seed uses
/// trial 0, so it scores exactly 0% against a single trial.
pub fn uniform_trial_seed(seed: u64, trial: usize) -> u64 {
    derive_seed(seed, streams::UNIFORM_TRIALS).wrapping_add(trial as u64)
}

/// The three Frobenius errors behind the metric.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricParts {
    /// Mean of `‖A − Ã_U‖_F` over the uniform trials.
    pub uniform_error: f64,
    /// `‖A − Ã_S‖_F`.
    pub selection_error: f64,
    /// `‖A − A_l‖_F` for the best rank-l approximation.
    pub optimal_error: f64,
}

impl MetricParts {
    /// The percentage, or [`CssError::UndefinedMetric`] when the uniform
    /// baseline is already within tolerance of the optimum.
    pub fn relative_accuracy(&self, norm_a: f64) -> Result<f64> {
        let denominator = self.uniform_error - self.optimal_error;
        if denominator <= METRIC_DENOMINATOR_TOLERANCE * norm_a {
            return Err(CssError::UndefinedMetric);
        }
        Ok(100.0 * (self.uniform_error - self.selection_error) / denominator)
    }
}

pub fn metric_parts(a: &Matrix, set: &ColumnSet, uniform_trials: usize, seed: u64) -> Result<MetricParts> {
    let l = set.len();
    if l == 0 {
        return Err(CssError::InvalidArgument("cannot score an empty selection".into()));
    }
    if uniform_trials == 0 {
        return Err(CssError::InvalidArgument("at least one uniform trial is required".into()));
    }
    set.check_bounds(a.ncols())?;
    let n = a.ncols();
    let uniform: Vec<f64> = (0..uniform_trials)
        .into_par_iter()
        .map(|t| {
            let u = uniform_select(n, l, uniform_trial_seed(seed, t))?;
            Ok(css_criterion_lenient(a, &u)?.sqrt())
        })
        .collect::<Result<_>>()?;
    let uniform_error = uniform.iter().sum::<f64>() / uniform_trials as f64;
    let rank_cap = a.nrows().min(a.ncols());
    let optimal_error = if l >= rank_cap {
        0.0
    } else {
        best_rank_k_error_sq(a, l, derive_seed(seed, streams::SVD))?.sqrt()
    };
    Ok(MetricParts {
        uniform_error,
        selection_error: css_criterion_lenient(a, set)?.sqrt(),
        optimal_error,
    })
}

/// Relative accuracy (percent) of `set` against `uniform_trials` seeded
/// uniform selections of the same size.
pub fn relative_accuracy(a: &Matrix, set: &ColumnSet, uniform_trials: usize, seed: u64) -> Result<f64> {
    metric_parts(a, set, uniform_trials, seed)?.relative_accuracy(a.frobenius())
}

/// Sampling probabilities for the randomized phase of hybrid selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbabilityMode {
    Uniform,
    /// Proportional to `‖A_{:i}‖²`.
    ColumnNorm,
    /// Proportional to the squared row norms of the top-l right singular vectors.
    SvdRows,
}

impl fmt::Display for ProbabilityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            ProbabilityMode::Uniform => "uniform",
            ProbabilityMode::ColumnNorm => "column-norm",
            ProbabilityMode::SvdRows => "svd-rows",
        })
    }
}

impl FromStr for ProbabilityMode {
    type Err = CssError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(ProbabilityMode::Uniform),
            "column-norm" => Ok(ProbabilityMode::ColumnNorm),
            "svd-rows" => Ok(ProbabilityMode::SvdRows),
            other => Err(CssError::InvalidArgument(format!("unknown probability mode '{other}'"))),
        }
    }
}

/// Size of the randomized phase: `min(n, ⌈l · ln l⌉)`.
pub fn hybrid_sample_size(n: usize, l: usize) -> usize {
    let lf = l as f64;
    ((lf * lf.ln()).ceil() as usize).min(n)
}

fn sampling_weights(a: &Matrix, l: usize, mode: ProbabilityMode, seed: u64) -> Result<Vec<f64>> {
    Ok(match mode {
        ProbabilityMode::Uniform => vec![1.0; a.ncols()],
        ProbabilityMode::ColumnNorm => a.columns().map(|c| c.iter().map(|x| x * x).sum()).collect(),
        ProbabilityMode::SvdRows => {
            let k = l.min(a.nrows().min(a.ncols()));
            let svd = randomized_svd(a, k, 10, 2, derive_seed(seed, streams::SVD))?;
            let v = svd.v.as_dmatrix();
            (0..a.ncols()).map(|i| v.row(i).norm_squared()).collect()
        }
    })
}

/// Weighted sampling of up to `count` distinct indices without replacement.
/// Returns them in ascending order.
pub fn sample_without_replacement(weights: &[f64], count: usize, seed: u64) -> Result<Vec<usize>> {
    let mut remaining: Vec<f64> = weights.iter().map(|&w| w.max(0.0)).collect();
    if !(remaining.iter().sum::<f64>() > 0.0) {
        return Err(CssError::DegenerateDistribution);
    }
    let mut rng = rng_from_seed(seed);
    let mut picked = Vec::with_capacity(count);
    for _ in 0..count {
        let total: f64 = remaining.iter().sum();
        if !(total > 0.0) {
            break;
        }
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut choice = None;
        for (i, &w) in remaining.iter().enumerate() {
            if w > 0.0 {
                acc += w;
                choice = Some(i);
                if target < acc {
                    break;
                }
            }
        }
        let i = choice.expect("positive mass has a support");
        remaining[i] = 0.0;
        picked.push(i);
    }
    picked.sort_unstable();
    Ok(picked)
}

/// Hybrid selection: sample `⌈l ln l⌉` columns at random, then run greedy
/// selection restricted to them.
pub fn hybrid_select(a: &Matrix, l: usize, mode: ProbabilityMode, seed: u64) -> Result<Selection> {
    if l < 2 || l > a.ncols() {
        return Err(CssError::InvalidArgument(format!(
            "hybrid selection needs 2 <= l <= {}, got {l}",
            a.ncols()
        )));
    }
    let weights = sampling_weights(a, l, mode, seed)?;
    let sampled = sample_without_replacement(
        &weights,
        hybrid_sample_size(a.ncols(), l),
        derive_seed(seed, streams::HYBRID),
    )?;
    let sub = a.select_columns(&ColumnSet::from_indices(sampled.clone())?)?;
    let local = greedy_select(&sub, l.min(sub.ncols()))?;
    let stop = local.stop.or((local.columns.len() < l).then_some(StopReason::Exhausted));
    Ok(Selection {
        columns: local.columns.map_through(&sampled),
        stop,
    })
}

/// Columns that best reconstruct the leading `k` scaled left singular
/// vectors `U_k Σ_k` (randomized SVD, oversample 10, two power iterations).
pub fn sketch_svd_select(a: &Matrix, l: usize, k: usize, seed: u64) -> Result<Selection> {
    let svd = randomized_svd(a, k, 10, 2, seed)?;
    generalized_select(a, &svd.scaled_left(), l)
}

fn oracle_guard(a: &Matrix) -> Result<()> {
    let (m, n) = a.shape();
    if m > ORACLE_LIMIT || n > ORACLE_LIMIT {
        return Err(CssError::OracleScale { rows: m, cols: n });
    }
    Ok(())
}

/// `X − A_S (A_SᵀA_S)⁻¹ A_Sᵀ X` by an LU solve of the normal equations.
fn normal_equation_residual(a: &Matrix, set: &[usize], x: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if set.is_empty() {
        return Some(x.clone());
    }
    let a_s = DMatrix::from_fn(a.nrows(), set.len(), |i, k| a.get(i, set[k]));
    let gram = a_s.tr_mul(&a_s);
    let coeffs = gram.lu().solve(&a_s.tr_mul(x))?;
    Some(x - a_s * coeffs)
}

fn residual_or_degenerate(a: &Matrix, set: &[usize], x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    normal_equation_residual(a, set, x).ok_or_else(|| CssError::DegenerateBasis { indices: set.to_vec() })
}

/// Greedy selection evaluated literally: every step tries each remaining
/// column, computes `F(S ∪ {i})` by explicit projection and keeps the
/// smallest (ties within `1e-9·‖A‖²_F` go to the smaller index).
pub fn naive_greedy_oracle(a: &Matrix, l: usize) -> Result<ColumnSet> {
    oracle_guard(a)?;
    let n = a.ncols();
    let ad = a.as_dmatrix();
    let energy = a.frobenius_sq();
    let mut selected: Vec<usize> = Vec::new();
    while selected.len() < l.min(n) {
        let e = residual_or_degenerate(a, &selected, ad)?;
        let current = e.norm_squared();
        if current <= RECONSTRUCTED_TOLERANCE * energy {
            break;
        }
        let mut scored: Vec<(usize, f64)> = Vec::new();
        for i in (0..n).filter(|i| !selected.contains(i)) {
            let norm0 = ad.column(i).norm_squared();
            if norm0 == 0.0 || e.column(i).norm_squared() <= DEACTIVATION_TOLERANCE * norm0 {
                continue;
            }
            let mut trial = selected.clone();
            trial.push(i);
            scored.push((i, residual_or_degenerate(a, &trial, ad)?.norm_squared()));
        }
        let Some(best) = scored.iter().map(|&(_, f)| f).reduce(f64::min) else {
            break;
        };
        let window = ORACLE_TIE_TOLERANCE * energy;
        let (p, _) = *scored.iter().find(|&&(_, f)| f <= best + window).expect("non-empty");
        selected.push(p);
    }
    ColumnSet::from_indices(selected)
}

/// Generalized selection evaluated literally from `E = A − P A`,
/// `F = B − P B`, `H = FᵀE` and `G = EᵀE` at every step.
pub fn naive_generalized_oracle(a: &Matrix, b: &Matrix, l: usize) -> Result<ColumnSet> {
    oracle_guard(a)?;
    oracle_guard(b)?;
    if a.nrows() != b.nrows() {
        return Err(CssError::Dimension("source and target row counts differ".into()));
    }
    let n = a.ncols();
    let ad = a.as_dmatrix();
    let bd = b.as_dmatrix();
    let energy = b.frobenius_sq();
    let mut selected: Vec<usize> = Vec::new();
    while selected.len() < l.min(n) {
        let e = residual_or_degenerate(a, &selected, ad)?;
        let f = residual_or_degenerate(a, &selected, bd)?;
        let h = f.tr_mul(&e);
        let mut scored: Vec<(usize, f64, f64)> = Vec::new();
        for i in (0..n).filter(|i| !selected.contains(i)) {
            let norm0 = ad.column(i).norm_squared();
            let g = e.column(i).norm_squared();
            if norm0 == 0.0 || g <= DEACTIVATION_TOLERANCE * norm0 {
                continue;
            }
            scored.push((i, h.column(i).norm_squared(), g));
        }
        if scored.is_empty() {
            break;
        }
        let max_f = scored.iter().map(|s| s.1).fold(0.0, f64::max);
        let max_g = scored.iter().map(|s| s.2).fold(0.0, f64::max);
        if max_f <= RECONSTRUCTED_TOLERANCE * energy * max_g {
            break;
        }
        let best = scored.iter().map(|s| s.1 / s.2).fold(f64::NEG_INFINITY, f64::max);
        let window = ORACLE_TIE_TOLERANCE * energy;
        let (p, _, _) = *scored.iter().find(|s| s.1 / s.2 >= best - window).expect("non-empty");
        selected.push(p);
    }
    ColumnSet::from_indices(selected)
}

/// Summary of one method's run on one matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub method: String,
    pub selected: Vec<usize>,
    /// `‖A − P A‖²_F` over the selection.
    pub f_value: f64,
    /// Percent; absent when the metric is undefined or not requested.
    pub relative_accuracy: Option<f64>,
    pub duration_secs: f64,
    pub seeds: Vec<u64>,
}

impl EvalReport {
    pub fn new(
        method: impl Into<String>,
        a: &Matrix,
        selection: &ColumnSet,
        uniform_trials: Option<usize>,
        seed: u64,
        duration: Duration,
    ) -> Result<Self> {
        let relative_accuracy = match uniform_trials {
            Some(t) => match relative_accuracy(a, selection, t, seed) {
                Ok(v) => Some(v),
                Err(CssError::UndefinedMetric) => None,
                Err(e) => return Err(e),
            },
            None => None,
        };
        Ok(Self {
            method: method.into(),
            selected: selection.indices().to_vec(),
            f_value: css_criterion_lenient(a, selection)?,
            relative_accuracy,
            duration_secs: duration.as_secs_f64(),
            seeds: vec![seed],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::css_criterion;
    use crate::synth::{exact_low_rank, gaussian_matrix};

    #[test]
    fn uniform_select_basics() {
        let all = uniform_select(6, 6, 1).unwrap();
        let mut ix = all.indices().to_vec();
        ix.sort();
        assert_eq!(ix, (0..6).collect::<Vec<_>>());
        assert_eq!(uniform_select(20, 5, 9).unwrap(), uniform_select(20, 5, 9).unwrap());
        assert!(uniform_select(3, 4, 0).is_err());
    }

    #[test]
    fn uniform_select_is_uniform() {
        let mut counts = [0usize; 10];
        for seed in 0..1000 {
            counts[uniform_select(10, 1, seed).unwrap().indices()[0]] += 1;
        }
        // Binomial(1000, 0.1): σ = √90.
        let sigma = 90f64.sqrt();
        for c in counts {
            assert!((c as f64 - 100.0).abs() <= 4.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn uniform_selection_scores_zero() {
        let a = gaussian_matrix(20, 30, 4);
        let s = uniform_select(30, 4, uniform_trial_seed(11, 0)).unwrap();
        assert_eq!(relative_accuracy(&a, &s, 1, 11).unwrap(), 0.0);
    }

    #[test]
    fn exact_rank_selection_scores_hundred() {
        // Rank 3: three independent directions plus many copies of the first,
        // so uniform draws usually miss part of the span.
        let base = gaussian_matrix(8, 3, 5);
        let cols: Vec<Vec<f64>> = (0..20)
            .map(|j| {
                let src = if j < 3 { j } else { 0 };
                base.column(src).iter().map(|x| x * (1.0 + j as f64 * 0.1)).collect()
            })
            .collect();
        let a = Matrix::from_columns(&cols).unwrap();
        let s = ColumnSet::from_indices(vec![0, 1, 2]).unwrap();
        let acc = relative_accuracy(&a, &s, 10, 3).unwrap();
        assert!((acc - 100.0).abs() < 1e-6, "{acc}");
    }

    #[test]
    fn metric_matches_formula_from_raw_errors() {
        let a = gaussian_matrix(40, 60, 12);
        let s = greedy_select(&a, 5).unwrap().columns;
        let parts = metric_parts(&a, &s, 10, 7).unwrap();
        let acc = parts.relative_accuracy(a.frobenius()).unwrap();

        let fs = css_criterion(&a, &s).unwrap().sqrt();
        let fu: f64 = (0..10)
            .map(|t| css_criterion(&a, &uniform_select(60, 5, uniform_trial_seed(7, t)).unwrap()).unwrap().sqrt())
            .sum::<f64>()
            / 10.0;
        let sv = a.as_dmatrix().clone().svd(false, false).singular_values;
        let mut sv: Vec<f64> = sv.iter().copied().collect();
        sv.sort_by(|x, y| y.total_cmp(x));
        let fl = sv[5..].iter().map(|x| x * x).sum::<f64>().sqrt();
        let want = 100.0 * (fu - fs) / (fu - fl);
        assert!((acc - want).abs() <= 1e-9 * want.abs(), "{acc} vs {want}");
        assert!(acc > 0.0);
    }

    #[test]
    fn metric_undefined_when_uniform_is_optimal() {
        let a = Matrix::identity(4).unwrap();
        let s = ColumnSet::from_indices(vec![0, 1, 2, 3]).unwrap();
        assert!(matches!(relative_accuracy(&a, &s, 3, 0), Err(CssError::UndefinedMetric)));
    }

    #[test]
    fn hybrid_covering_all_columns_equals_greedy() {
        let a = gaussian_matrix(8, 5, 3);
        assert_eq!(hybrid_sample_size(5, 4), 5);
        for mode in [ProbabilityMode::Uniform, ProbabilityMode::ColumnNorm, ProbabilityMode::SvdRows] {
            assert_eq!(hybrid_select(&a, 4, mode, 1).unwrap(), greedy_select(&a, 4).unwrap());
        }
    }

    #[test]
    fn column_norm_sampling_favours_dominant_column() {
        let a = Matrix::from_fn(6, 20, |i, j| if j == 13 { 100.0 } else { ((i + j) % 3) as f64 * 0.1 + 0.05 })
            .unwrap();
        let weights = sampling_weights(&a, 3, ProbabilityMode::ColumnNorm, 0).unwrap();
        let size = hybrid_sample_size(20, 3);
        let hits = (0..1000u64)
            .filter(|&s| sample_without_replacement(&weights, size, s).unwrap().contains(&13))
            .count();
        assert!(hits > 990, "{hits}");
    }

    #[test]
    fn hybrid_is_deterministic_and_validates() {
        let a = gaussian_matrix(10, 40, 6);
        let x = hybrid_select(&a, 4, ProbabilityMode::SvdRows, 5).unwrap();
        assert_eq!(x, hybrid_select(&a, 4, ProbabilityMode::SvdRows, 5).unwrap());
        assert!(hybrid_select(&a, 1, ProbabilityMode::Uniform, 5).is_err());
        let zero = Matrix::zeros(4, 6).unwrap();
        assert!(matches!(
            hybrid_select(&zero, 2, ProbabilityMode::ColumnNorm, 0),
            Err(CssError::DegenerateDistribution)
        ));
    }

    #[test]
    fn sketch_svd_recovers_exact_rank() {
        let a = exact_low_rank(15, 25, 4, 8);
        let sel = sketch_svd_select(&a, 4, 4, 2).unwrap();
        assert_eq!(sel.columns.len(), 4);
        assert!(css_criterion(&a, &sel.columns).unwrap() <= 1e-8 * a.frobenius_sq());
        assert_eq!(sel, sketch_svd_select(&a, 4, 4, 2).unwrap());
    }

    #[test]
    fn sketch_svd_full_rank_matches_exact_svd_target() {
        let a = gaussian_matrix(6, 9, 13);
        let sel = sketch_svd_select(&a, 3, 6, 4).unwrap();
        let exact = crate::linalg::exact_svd(&a);
        let want = generalized_select(&a, &exact.scaled_left(), 3).unwrap();
        assert_eq!(sel.columns, want.columns);
    }

    #[test]
    fn greedy_oracle_examples() {
        let i3 = Matrix::identity(3).unwrap();
        assert_eq!(naive_greedy_oracle(&i3, 2).unwrap().indices(), &[0, 1]);
        let a = gaussian_matrix(6, 6, 2);
        let s = naive_greedy_oracle(&a, 6).unwrap();
        assert!(css_criterion_lenient(&a, &s).unwrap() <= 1e-9 * a.frobenius_sq());
        assert!(matches!(
            naive_greedy_oracle(&gaussian_matrix(65, 3, 1), 1),
            Err(CssError::OracleScale { .. })
        ));
    }

    /// Brute force over all subsets of size t confirms each oracle step is the
    /// best single addition to the previous prefix.
    #[test]
    fn greedy_oracle_steps_are_exact_argmins() {
        for seed in 0..5 {
            let a = gaussian_matrix(7, 10, 100 + seed);
            let picks = naive_greedy_oracle(&a, 3).unwrap();
            for t in 0..3 {
                let prefix = picks.prefix(t);
                let chosen = css_criterion(&a, &picks.prefix(t + 1)).unwrap();
                for i in (0..10).filter(|i| !prefix.contains(*i)) {
                    let mut trial = prefix.clone();
                    trial.push(i).unwrap();
                    assert!(chosen <= css_criterion(&a, &trial).unwrap() + 1e-9 * a.frobenius_sq());
                }
            }
            // Greedy can be beaten by the exhaustive optimum but never the other way round.
            let best3 = (0..10)
                .flat_map(|x| (x + 1..10).flat_map(move |y| (y + 1..10).map(move |z| vec![x, y, z])))
                .map(|s| css_criterion(&a, &ColumnSet::from_indices(s).unwrap()).unwrap())
                .fold(f64::INFINITY, f64::min);
            assert!(best3 <= css_criterion(&a, &picks).unwrap() + 1e-12);
        }
    }

    #[test]
    fn generalized_oracle_examples() {
        let a = gaussian_matrix(9, 12, 3);
        assert_eq!(naive_generalized_oracle(&a, &a, 4).unwrap(), naive_greedy_oracle(&a, 4).unwrap());

        // Target orthogonal to every source column.
        let src = Matrix::from_fn(4, 3, |i, j| if i < 2 { (i + j + 1) as f64 } else { 0.0 }).unwrap();
        let tgt = Matrix::from_fn(4, 2, |i, j| if i >= 2 { (i * j + 1) as f64 } else { 0.0 }).unwrap();
        assert!(naive_generalized_oracle(&src, &tgt, 2).unwrap().is_empty());
        let prod = generalized_select(&src, &tgt, 2).unwrap();
        assert!(prod.columns.is_empty());
        assert_eq!(prod.stop, Some(StopReason::TargetReconstructed));
    }

    #[test]
    fn report_serializes() {
        let a = gaussian_matrix(10, 20, 1);
        let s = greedy_select(&a, 3).unwrap().columns;
        let r = EvalReport::new("greedy", &a, &s, Some(5), 2, Duration::from_millis(3)).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["method"], "greedy");
        assert_eq!(json["selected"].as_array().unwrap().len(), 3);
        assert!(r.relative_accuracy.unwrap() > 0.0);
    }
}
