//! Reading and writing matrices (csv, coordinate triplets, binary), the JSON
//! run summary, and driving the command-line front end in-process.
//!
//!     cargo run --example matrix_io

use greedy_css::cli;
use greedy_css::io::{load_matrix, read_coordinate, save_matrix, Format};
use greedy_css::synth::gaussian_matrix;

fn main() -> greedy_css::Result<()> {
    let dir = std::env::temp_dir().join(format!("greedy-css-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;

    let a = gaussian_matrix(6, 9, 21);
    for (format, name) in [(Format::Csv, "a.csv"), (Format::Coordinate, "a.coo"), (Format::Binary, "a.bin")] {
        let path = dir.join(name);
        save_matrix(&a, &path, format)?;
        let back = load_matrix(&path, format)?;
        println!("{format:>10}: {} bytes, round trip exact: {}", std::fs::metadata(&path)?.len(), back == a);
    }

    let sparse = read_coordinate("2 3 2\n0 1 3.5\n1 2 -1\n".as_bytes())?;
    println!("coordinate input densified:");
    for i in 0..sparse.nrows() {
        let row: Vec<String> = (0..sparse.ncols()).map(|j| sparse.get(i, j).to_string()).collect();
        println!("  [{}]", row.join(", "));
    }

    // Same run as `css select --input a.csv --l 4 --summary run.json`.
    let input = dir.join("a.csv");
    let summary = dir.join("run.json");
    let args = [
        "css",
        "select",
        "--input",
        input.to_str().unwrap(),
        "--l",
        "4",
        "--trials",
        "5",
        "--summary",
        summary.to_str().unwrap(),
    ];
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(args, &mut out, &mut err);
    println!("exit {code}, indices:\n{}", String::from_utf8_lossy(&out));
    println!("{}", std::fs::read_to_string(&summary)?);

    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
