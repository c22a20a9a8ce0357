//! Greedy column subset selection on a planted low-rank matrix.
//!
//! Prints each pick with the error drop it promised and the error actually
//! measured afterwards, then shows early stopping on a rank-deficient input.
//!
//!     cargo run --example greedy_selection

use greedy_css::greedy::{greedy_select, init_state, select_next};
use greedy_css::linalg::css_criterion;
use greedy_css::synth::{exact_low_rank, planted_low_rank};

fn main() -> greedy_css::Result<()> {
    let a = planted_low_rank(60, 120, 8, 0.05, 1);
    println!("A is {}x{}, ‖A‖²_F = {:.3}", a.nrows(), a.ncols(), a.frobenius_sq());

    let mut state = init_state(&a)?;
    let mut error = a.frobenius_sq();
    println!("{:>4} {:>6} {:>14} {:>14}", "step", "column", "predicted F", "measured F");
    for t in 0..10 {
        let step = select_next(&mut state, &a)?;
        error -= step.gain;
        let measured = css_criterion(&a, state.selected())?;
        println!("{t:>4} {:>6} {error:>14.6} {measured:>14.6}", step.index);
    }

    // The one-shot API returns the same columns.
    let sel = greedy_select(&a, 10)?;
    assert_eq!(sel.columns, *state.selected());

    // Rank 3: asking for 6 columns returns 3 and says why.
    let low = exact_low_rank(20, 30, 3, 2);
    let sel = greedy_select(&low, 6)?;
    println!(
        "\nrank-3 input, l = 6: picked {:?}, stop = {:?}, F = {:.2e}",
        sel.indices(),
        sel.stop,
        css_criterion(&low, &sel.columns)?
    );
    Ok(())
}
