//! Centralized greedy column subset selection.
//!
//! Each iteration picks the column with the largest reduction in
//! reconstruction error, `‖Gᵀ_{:i}‖² / G_ii` with `G = EᵀE`, but neither the
//! residual `E` nor its Gram matrix `G` is ever formed. Two scores per column
//! are kept instead:
//!
//! * `f_i = ‖G_{:i}‖²`, the criterion numerator,
//! * `g_i = G_ii`, the criterion denominator,
//!
//! and both are refreshed from the rank-one Gram downdate
//! `G ← G − ω ωᵀ`, where `ω = G_{:p} / √G_pp` is rebuilt from `Aᵀ A_{:p}` and
//! the stored history of earlier `ω` vectors. Memory is `O(n·l)`.
//!
//! The same engine drives the generalized (source/target) variant in
//! [`crate::generalized`]; plain selection is the special case where the
//! target is the source itself.

use rayon::prelude::*;

use crate::error::{CssError, Result};
use crate::matrix::{axpy, dot, mat_vec, ColumnSet, Matrix};

/// A candidate is dropped once its residual energy `g_i` falls to this
/// fraction of its initial value (and, at start-up, of the largest column energy).
pub const DEACTIVATION_TOLERANCE: f64 = 1e-12;

/// Scores within this fraction of the target energy of the best score are ties;
/// ties go to the smallest index.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Candidates scoring within this fraction of the target energy of the best
/// recursive score have their scores recomputed directly before the tie rule
/// is applied. Recursive scores of nearly dependent columns carry cancellation
/// error well above [`TIE_TOLERANCE`], which would otherwise decide exact ties.
pub const SCREEN_TOLERANCE: f64 = 1e-6;

/// Selection stops when `max f_i <= RECONSTRUCTED_TOLERANCE · ‖target‖²_F · max g_i`.
pub const RECONSTRUCTED_TOLERANCE: f64 = 1e-12;

/// Why a selection returned fewer columns than requested.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// No numerically independent candidate is left.
    Exhausted,
    /// The target is already reproduced up to tolerance.
    TargetReconstructed,
}

/// Result of a greedy run. `stop` is set whenever fewer than the requested
/// number of columns came back.
#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    pub columns: ColumnSet,
    pub stop: Option<StopReason>,
}

impl Selection {
    pub fn exhausted(&self) -> bool {
        self.stop.is_some()
    }

    pub fn indices(&self) -> &[usize] {
        self.columns.indices()
    }
}

/// Outcome of one greedy iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step {
    pub index: usize,
    /// `f_p / g_p`: the drop in reconstruction error from adding column `p`.
    pub gain: f64,
}

/// Per-candidate scores and the `ω` history of a greedy run.
#[derive(Clone, Debug)]
pub struct SelectionState {
    f: Vec<f64>,
    g: Vec<f64>,
    initial_g: Vec<f64>,
    omega_history: Vec<Vec<f64>>,
    selected: ColumnSet,
    active: Vec<bool>,
    target_energy: f64,
}

impl SelectionState {
    pub(crate) fn new(f: Vec<f64>, g: Vec<f64>, target_energy: f64) -> Result<Self> {
        let max_g = g.iter().copied().fold(0.0, f64::max);
        let active: Vec<bool> = g
            .iter()
            .map(|&gi| gi > DEACTIVATION_TOLERANCE * max_g && gi > 0.0)
            .collect();
        if !active.iter().any(|&a| a) {
            return Err(CssError::NoActiveCandidates);
        }
        Ok(Self {
            initial_g: g.clone(),
            f,
            g,
            omega_history: Vec::new(),
            selected: ColumnSet::new(),
            active,
            target_energy,
        })
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn initial_g(&self) -> &[f64] {
        &self.initial_g
    }

    pub fn omega_history(&self) -> &[Vec<f64>] {
        &self.omega_history
    }

    pub fn selected(&self) -> &ColumnSet {
        &self.selected
    }

    pub fn active(&self) -> &[bool] {
        &self.active
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.active[i]
    }

    pub fn has_active(&self) -> bool {
        self.active.iter().any(|&a| a)
    }

    /// ‖target‖²_F, the scale for tie and stopping tolerances.
    pub fn target_energy(&self) -> f64 {
        self.target_energy
    }

    /// Current criterion value `f_i / g_i` for an active candidate.
    pub fn score(&self, i: usize) -> f64 {
        self.f[i] / self.g[i]
    }

    /// Argmax of `f_i / g_i` over active candidates, smallest index on ties.
    pub fn best_candidate(&self) -> Option<usize> {
        let best = (0..self.f.len())
            .filter(|&i| self.active[i])
            .map(|i| self.score(i))
            .fold(f64::NEG_INFINITY, f64::max);
        if best == f64::NEG_INFINITY {
            return None;
        }
        let window = TIE_TOLERANCE * self.target_energy;
        (0..self.f.len()).find(|&i| self.active[i] && self.score(i) >= best - window)
    }

    /// True when no active candidate can reduce the target error by a
    /// non-negligible amount.
    pub fn target_reconstructed(&self) -> bool {
        let (max_f, max_g) = (0..self.f.len())
            .filter(|&i| self.active[i])
            .fold((0.0f64, 0.0f64), |(mf, mg), i| (mf.max(self.f[i]), mg.max(self.g[i])));
        max_f <= RECONSTRUCTED_TOLERANCE * self.target_energy * max_g
    }
}

/// `targetᵀ source[:, p]`: one column of the cross-Gram matrix.
pub(crate) fn cross_column(target: &Matrix, source: &Matrix, p: usize) -> Vec<f64> {
    let col = source.column(p);
    (0..target.ncols())
        .into_par_iter()
        .map(|j| dot(target.column(j), col))
        .collect()
}

/// `sourceᵀ v` for an m-vector `v`.
pub(crate) fn transpose_apply(source: &Matrix, v: &[f64]) -> Vec<f64> {
    (0..source.ncols())
        .into_par_iter()
        .map(|j| dot(source.column(j), v))
        .collect()
}

/// Initial scores `f_i = ‖targetᵀ source[:, i]‖²`, `g_i = ‖source[:, i]‖²`.
pub(crate) fn initial_scores(source: &Matrix, target: &Matrix) -> (Vec<f64>, Vec<f64>) {
    (0..source.ncols())
        .into_par_iter()
        .map(|i| {
            let col = source.column(i);
            let f = target
                .columns()
                .map(|t| {
                    let c = dot(t, col);
                    c * c
                })
                .sum::<f64>();
            (f, dot(col, col))
        })
        .unzip()
}

/// `base − Σ_r coeffs[r] · vectors[r]`.
fn subtract_history(mut base: Vec<f64>, coeffs: impl Iterator<Item = f64>, vectors: &[Vec<f64>]) -> Vec<f64> {
    for (c, v) in coeffs.zip(vectors) {
        axpy(-c, v, &mut base);
    }
    base
}

/// `‖targetᵀ e‖² / ‖e‖²` with `e` the part of `source[:, i]` orthogonal to `q`.
fn direct_score(q: &[Vec<f64>], source: &Matrix, target: &Matrix, i: usize) -> f64 {
    let mut e = source.column(i).to_vec();
    for _ in 0..2 {
        for qv in q {
            let c = dot(qv, &e);
            axpy(-c, qv, &mut e);
        }
    }
    let g = dot(&e, &e);
    let f: f64 = target
        .columns()
        .map(|t| {
            let c = dot(t, &e);
            c * c
        })
        .sum();
    f / g
}

/// The next pivot: argmax of the recursive scores, with near-ties re-scored
/// directly and then resolved to the smallest index within [`TIE_TOLERANCE`].
fn choose_pivot(state: &SelectionState, source: &Matrix, target: &Matrix) -> Option<usize> {
    let best = (0..state.f.len())
        .filter(|&i| state.active[i])
        .map(|i| state.score(i))
        .fold(f64::NEG_INFINITY, f64::max);
    if best == f64::NEG_INFINITY {
        return None;
    }
    let screen = SCREEN_TOLERANCE * state.target_energy;
    let contenders: Vec<usize> = (0..state.f.len())
        .filter(|&i| state.active[i] && state.score(i) >= best - screen)
        .collect();
    if contenders.len() == 1 {
        return Some(contenders[0]);
    }
    let q = if state.selected.is_empty() {
        Vec::new()
    } else {
        match crate::linalg::strict_basis(source, &state.selected) {
            Ok(q) => q,
            Err(_) => return state.best_candidate(),
        }
    };
    let scores: Vec<f64> = contenders
        .par_iter()
        .map(|&i| direct_score(&q, source, target, i))
        .collect();
    let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let window = TIE_TOLERANCE * state.target_energy;
    contenders
        .iter()
        .zip(&scores)
        .find(|&(_, &s)| s >= top - window)
        .map(|(&i, _)| i)
}

/// One iteration of the recursive update.
///
/// With `upsilon_history = None` the target is `source` itself and `υ ≡ ω`;
/// otherwise `target` is the separate reconstruction target and its `υ`
/// history is maintained alongside `ω`.
pub(crate) fn advance(
    state: &mut SelectionState,
    source: &Matrix,
    target: &Matrix,
    upsilon_history: Option<&mut Vec<Vec<f64>>>,
) -> Result<Step> {
    let p = choose_pivot(state, source, target).ok_or(CssError::Exhausted)?;
    let gain = state.score(p);

    let omega_p: Vec<f64> = state.omega_history.iter().map(|w| w[p]).collect();
    // δ = AᵀA_{:p} − Σ_{r<t} ω_p⁽ʳ⁾ ω⁽ʳ⁾
    let delta = subtract_history(
        cross_column(source, source, p),
        omega_p.iter().copied(),
        &state.omega_history,
    );
    let pivot = delta[p];
    if !(pivot > DEACTIVATION_TOLERANCE * state.initial_g[p]) {
        state.active[p] = false;
        return Err(CssError::NumericallyDependent { index: p });
    }
    let scale = pivot.sqrt();
    let omega: Vec<f64> = delta.iter().map(|d| d / scale).collect();

    // υ = γ / √δ_p with γ = BᵀA_{:p} − Σ_{r<t} ω_p⁽ʳ⁾ υ⁽ʳ⁾
    let upsilon: Vec<f64> = match &upsilon_history {
        Some(history) => {
            let gamma = subtract_history(cross_column(target, source, p), omega_p.iter().copied(), history);
            gamma.iter().map(|x| x / scale).collect()
        }
        None => omega.clone(),
    };
    let upsilon_sq = dot(&upsilon, &upsilon);

    // Hᵀυ = AᵀBυ − Σ_{r<t} (υ⁽ʳ⁾ᵀυ) ω⁽ʳ⁾, with H the residual cross-Gram before this step.
    let h_upsilon = {
        let past: &[Vec<f64>] = match &upsilon_history {
            Some(history) => history,
            None => &state.omega_history,
        };
        let coeffs: Vec<f64> = past.iter().map(|u| dot(u, &upsilon)).collect();
        subtract_history(
            transpose_apply(source, &mat_vec(target, &upsilon)),
            coeffs.into_iter(),
            &state.omega_history,
        )
    };

    for i in 0..state.f.len() {
        let w = omega[i];
        state.f[i] = state.f[i] - 2.0 * w * h_upsilon[i] + upsilon_sq * w * w;
        state.g[i] -= w * w;
    }

    state.omega_history.push(omega);
    if let Some(history) = upsilon_history {
        history.push(upsilon);
    }
    state.selected.push(p)?;
    state.active[p] = false;
    for i in 0..state.g.len() {
        if state.active[i] && state.g[i] <= DEACTIVATION_TOLERANCE * state.initial_g[i] {
            state.active[i] = false;
        }
    }
    Ok(Step { index: p, gain })
}

/// Runs iterations until `l` columns are chosen or the candidates run out.
pub(crate) fn run(
    state: &mut SelectionState,
    source: &Matrix,
    target: &Matrix,
    mut upsilon_history: Option<&mut Vec<Vec<f64>>>,
    l: usize,
) -> Result<Option<StopReason>> {
    while state.selected.len() < l {
        if !state.has_active() {
            return Ok(Some(StopReason::Exhausted));
        }
        if state.target_reconstructed() {
            return Ok(Some(StopReason::TargetReconstructed));
        }
        match advance(state, source, target, upsilon_history.as_deref_mut()) {
            // The pivot was deactivated; try the next candidate.
            Err(CssError::NumericallyDependent { .. }) => continue,
            other => {
                other?;
            }
        }
    }
    Ok(None)
}

pub(crate) fn check_budget(l: usize, n: usize) -> Result<()> {
    if l == 0 || l > n {
        return Err(CssError::InvalidArgument(format!(
            "column budget {l} must be between 1 and {n}"
        )));
    }
    Ok(())
}

/// Initial state: `f_i = ‖AᵀA_{:i}‖²`, `g_i = A_{:i}ᵀA_{:i}`.
pub fn init_state(a: &Matrix) -> Result<SelectionState> {
    let (f, g) = initial_scores(a, a);
    SelectionState::new(f, g, a.frobenius_sq())
}

/// Picks the next column, updates the scores and returns the pick.
pub fn select_next(state: &mut SelectionState, a: &Matrix) -> Result<Step> {
    if state.f.len() != a.ncols() {
        return Err(CssError::Dimension("state was built for a different matrix".into()));
    }
    advance(state, a, a, None)
}

/// Greedily selects up to `l` columns of `a`, in selection order.
pub fn greedy_select(a: &Matrix, l: usize) -> Result<Selection> {
    check_budget(l, a.ncols())?;
    let mut state = init_state(a)?;
    let stop = run(&mut state, a, a, None, l)?;
    Ok(Selection {
        columns: state.selected,
        stop,
    })
}
