//! Generalized selection: choose columns of a source matrix `A` that best
//! reconstruct a different target matrix `B` with the same row count.
//!
//! The criterion is `‖H_{:i}‖² / G_ii` with `G = EᵀE`, `H = FᵀE`, where `E`
//! and `F` are the residuals of `A` and `B` after projecting onto the
//! selected columns. As in [`crate::greedy`], only the scores are stored,
//! together with the `ω` (length n) and `υ` (length r) histories.

use crate::error::{CssError, Result};
use crate::greedy::{self, check_budget, initial_scores, Selection, SelectionState, Step};
use crate::matrix::Matrix;

/// [`SelectionState`] plus the `υ` history of the target side.
#[derive(Clone, Debug)]
pub struct GeneralizedState {
    base: SelectionState,
    upsilon_history: Vec<Vec<f64>>,
}

impl GeneralizedState {
    pub fn scores(&self) -> &SelectionState {
        &self.base
    }

    pub fn f(&self) -> &[f64] {
        self.base.f()
    }

    pub fn g(&self) -> &[f64] {
        self.base.g()
    }

    pub fn upsilon_history(&self) -> &[Vec<f64>] {
        &self.upsilon_history
    }

    pub fn omega_history(&self) -> &[Vec<f64>] {
        self.base.omega_history()
    }

    pub fn selected(&self) -> &crate::matrix::ColumnSet {
        self.base.selected()
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.base.is_active(i)
    }
}

fn check_rows(a: &Matrix, b: &Matrix) -> Result<()> {
    if a.nrows() != b.nrows() {
        return Err(CssError::Dimension(format!(
            "source has {} rows but target has {}",
            a.nrows(),
            b.nrows()
        )));
    }
    Ok(())
}

/// Initial state: `f_i = ‖BᵀA_{:i}‖²`, `g_i = A_{:i}ᵀA_{:i}`.
pub fn generalized_init(a: &Matrix, b: &Matrix) -> Result<GeneralizedState> {
    check_rows(a, b)?;
    let (f, g) = initial_scores(a, b);
    Ok(GeneralizedState {
        base: SelectionState::new(f, g, b.frobenius_sq())?,
        upsilon_history: Vec::new(),
    })
}

pub fn generalized_select_next(state: &mut GeneralizedState, a: &Matrix, b: &Matrix) -> Result<Step> {
    check_rows(a, b)?;
    if state.base.f().len() != a.ncols() {
        return Err(CssError::Dimension("state was built for a different source".into()));
    }
    greedy::advance(&mut state.base, a, b, Some(&mut state.upsilon_history))
}

/// Greedily selects up to `l` columns of `a` to reconstruct `b`.
///
/// Stops early (and flags it) when `b` is already reproduced up to tolerance
/// or no independent source column is left.
pub fn generalized_select(a: &Matrix, b: &Matrix, l: usize) -> Result<Selection> {
    check_budget(l, a.ncols())?;
    let mut state = generalized_init(a, b)?;
    let stop = greedy::run(&mut state.base, a, b, Some(&mut state.upsilon_history), l)?;
    Ok(Selection {
        columns: state.base.selected().clone(),
        stop,
    })
}
