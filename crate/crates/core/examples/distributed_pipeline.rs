//! The two-phase partitioned pipeline against the naive per-partition
//! baseline, with the data-movement report.
//!
//!     cargo run --release --example distributed_pipeline

use greedy_css::distributed::{distributed_select, naive_distributed_baseline, Assignment, DistributedConfig};
use greedy_css::eval::relative_accuracy;
use greedy_css::greedy::greedy_select;
use greedy_css::linalg::css_criterion;
use greedy_css::sketch::{SketchKind, SketchSpec};
use greedy_css::synth::concentrated_generators;

fn config(kind: SketchKind, r: usize, seed: u64) -> DistributedConfig {
    DistributedConfig {
        partitions: 4,
        l: 20,
        assignment: Assignment::Contiguous,
        sketch: SketchSpec::new(kind, r, seed),
        seed,
        threads: None,
    }
}

fn main() -> greedy_css::Result<()> {
    // 20 generator columns, all in the first of four contiguous partitions.
    let a = concentrated_generators(100, 400, 20, 1.0, 7);

    let out = distributed_select(&a, &config(SketchKind::Gaussian, 100, 7))?;
    let r = &out.report;
    println!("selected {:?}", out.selection.indices());
    println!("per-partition budget {} picks {:?}", r.per_partition_budget, r.picks_per_partition);
    println!("columns moved {}, broadcast values {}", r.columns_moved, r.broadcast_values);
    println!("F(S) = {:.1}, F̄(S) = {:.1}", r.reconstruction_error, r.target_error);
    println!(
        "timings: sketch {:.4}s map {:.4}s reduce {:.4}s",
        r.timings.sketch, r.timings.map, r.timings.reduce
    );

    // How the shared target's width affects the comparison with the naive
    // baseline (which never looks beyond its own partition).
    let naive = naive_distributed_baseline(&a, &config(SketchKind::Identity, 400, 7))?;
    let central = greedy_select(&a, 20)?;
    println!("\n{:>22} {:>10} {:>10}", "method", "F(S)", "rel. acc.");
    let show = |name: &str, set: &greedy_css::ColumnSet| -> greedy_css::Result<()> {
        let f = css_criterion(&a, set)?;
        let acc = relative_accuracy(&a, set, 10, 7)?;
        println!("{name:>22} {f:>10.1} {acc:>9.1}%");
        Ok(())
    };
    show("centralized greedy", &central.columns)?;
    show("naive per-partition", &naive.columns)?;
    for (kind, r) in [
        (SketchKind::Gaussian, 50),
        (SketchKind::Gaussian, 100),
        (SketchKind::Gaussian, 400),
        (SketchKind::Identity, 400),
    ] {
        let sel = distributed_select(&a, &config(kind, r, 7))?.selection;
        show(&format!("distributed {kind} r={r}"), &sel.columns)?;
    }
    Ok(())
}
