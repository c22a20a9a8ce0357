//! Random-projection sketches `B = AΩ`: the four kinds, partition-invariance,
//! and how well the sketched criterion tracks the exact one.
//!
//!     cargo run --example random_projection

use greedy_css::distributed::{partition_columns, Assignment};
use greedy_css::eval::uniform_select;
use greedy_css::linalg::{css_criterion, target_criterion};
use greedy_css::sketch::{sketch_matrix, sketch_partitioned, SketchKind, SketchSpec};
use greedy_css::synth::gaussian_matrix;

fn main() -> greedy_css::Result<()> {
    let a = gaussian_matrix(50, 80, 11);
    let set = uniform_select(80, 10, 12)?;
    let exact = css_criterion(&a, &set)?;
    println!("exact F(S) = {exact:.3}");

    for kind in [SketchKind::Gaussian, SketchKind::Sign, SketchKind::SparseSign] {
        for r in [20, 50, 200] {
            let b = sketch_matrix(&a, &SketchSpec::new(kind, r, 13))?;
            // Unit-variance entries, so ‖(I − P)AΩ‖² ≈ r · F(S).
            let approx = target_criterion(&a, &set, &b)? / r as f64;
            println!(
                "{kind:>12} r = {r:>3}: F̄/r = {approx:>9.3}  ({:+.1}%)",
                100.0 * (approx - exact) / exact
            );
        }
    }
    let b = sketch_matrix(&a, &SketchSpec::new(SketchKind::Identity, 80, 0))?;
    assert_eq!(b, a);
    println!("identity sketch returns A itself");

    // Each partition sketches its own columns; the partial sums add up to the
    // same B whatever the split.
    let spec = SketchSpec::new(SketchKind::Gaussian, 16, 14);
    let whole = sketch_matrix(&a, &spec)?;
    for c in [2, 3, 7] {
        for assignment in [Assignment::Contiguous, Assignment::RoundRobin] {
            let parts = partition_columns(&a, c, assignment)?;
            let b = sketch_partitioned(&parts, &spec)?;
            let diff = b.sub(&whole)?.frobenius() / whole.frobenius();
            println!("c = {c}, {assignment:>11}: relative difference {diff:.1e}");
        }
    }
    Ok(())
}
