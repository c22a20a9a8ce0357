//! Selecting columns of a source matrix that best reconstruct a different
//! target with the same rows.
//!
//!     cargo run --example generalized_selection

use greedy_css::generalized::generalized_select;
use greedy_css::greedy::greedy_select;
use greedy_css::linalg::target_criterion;
use greedy_css::matrix::Matrix;
use greedy_css::synth::gaussian_matrix;

fn main() -> greedy_css::Result<()> {
    let a = gaussian_matrix(40, 100, 3);

    // Target built from columns 7, 42 and 90 of the source (plus a tiny
    // perturbation): the selection should find exactly those.
    let w = gaussian_matrix(3, 5, 4);
    let picked = a.select_columns(&greedy_css::ColumnSet::from_indices(vec![7, 42, 90])?)?;
    let noise = gaussian_matrix(40, 5, 5);
    let b = Matrix::from_fn(40, 5, |i, j| {
        let mut v = 1e-6 * noise.get(i, j);
        for k in 0..3 {
            v += picked.get(i, k) * w.get(k, j);
        }
        v
    })?;

    let sel = generalized_select(&a, &b, 6)?;
    println!("picked {:?} (stop: {:?})", sel.indices(), sel.stop);
    for t in 1..=sel.columns.len() {
        let prefix = sel.columns.prefix(t);
        println!("  first {t}: ‖B − P B‖²_F = {:.3e}", target_criterion(&a, &prefix, &b)?);
    }

    // With the source as its own target this is plain greedy selection.
    assert_eq!(generalized_select(&a, &a, 5)?, greedy_select(&a, 5)?);
    println!("source-as-target run matches greedy_select");
    Ok(())
}
