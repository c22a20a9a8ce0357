//! Greedy selection against the baselines, scored by relative accuracy
//! (0% = mean of uniform draws, 100% = best rank-l approximation).
//!
//!     cargo run --release --example baselines_comparison

use greedy_css::eval::{hybrid_select, relative_accuracy, sketch_svd_select, uniform_select, ProbabilityMode};
use greedy_css::greedy::greedy_select;
use greedy_css::matrix::ColumnSet;
use greedy_css::synth::planted_low_rank;

fn main() -> greedy_css::Result<()> {
    let l = 30;
    println!("200x500, rank 30 + noise, l = {l}; mean relative accuracy over 3 instances");
    println!("{:>6} {:>8} {:>8} {:>8} {:>8} {:>10} {:>8}", "noise", "greedy", "hyb-uni", "hyb-col", "hyb-svd", "sketch-svd", "uniform");
    for noise in [0.1, 0.3, 1.0] {
        let mut acc = [0.0f64; 6];
        for inst in 0..3u64 {
            let a = planted_low_rank(200, 500, 30, noise, 800 + inst);
            let seed = 900 + inst;
            let sets: [ColumnSet; 6] = [
                greedy_select(&a, l)?.columns,
                hybrid_select(&a, l, ProbabilityMode::Uniform, seed)?.columns,
                hybrid_select(&a, l, ProbabilityMode::ColumnNorm, seed)?.columns,
                hybrid_select(&a, l, ProbabilityMode::SvdRows, seed)?.columns,
                sketch_svd_select(&a, l, l, seed)?.columns,
                uniform_select(500, l, seed.wrapping_mul(31))?,
            ];
            for (slot, set) in acc.iter_mut().zip(&sets) {
                *slot += relative_accuracy(&a, set, 10, seed)? / 3.0;
            }
        }
        println!(
            "{noise:>6} {:>7.1}% {:>7.1}% {:>7.1}% {:>7.1}% {:>9.1}% {:>7.1}%",
            acc[0], acc[1], acc[2], acc[3], acc[4], acc[5]
        );
    }
    Ok(())
}
