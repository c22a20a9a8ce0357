//! Command-line front end used by the `css` binary.
//!
//! All indices read or written are 0-based. One `--seed` drives everything;
//! sub-seeds come from [`crate::rng::derive_seed`]:
//! sketch = stream 1, uniform trials = stream 2, hybrid sampling = stream 3,
//! randomized SVD = stream 4.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical degeneracy.

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::distributed::{distributed_select, naive_distributed_baseline, Assignment, DistributedConfig};
use crate::error::{CssError, Result};
use crate::eval::{hybrid_select, relative_accuracy, sketch_svd_select, uniform_select, uniform_trial_seed, ProbabilityMode};
use crate::generalized::generalized_select;
use crate::greedy::{greedy_select, Selection};
use crate::io::{format_indices, load_matrix, parse_indices, write_matrix, Format, RunParameters, RunSummary};
use crate::linalg::{css_criterion_lenient, target_criterion};
use crate::matrix::{ColumnSet, Matrix};
use crate::rng::{derive_seed, streams};
use crate::sketch::{sketch_matrix, SketchKind, SketchSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "css", version, about = "Greedy column subset selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Greedy selection of l columns reconstructing the input.
    Select(SelectArgs),
    /// Select columns of the input that reconstruct --target.
    SelectGen(SelectGenArgs),
    /// Write the random projection B = AΩ.
    Sketch(SketchArgs),
    /// Partitioned two-phase selection against a shared sketch.
    SelectDist(DistArgs),
    /// Run a baseline selector.
    Baseline(BaselineArgs),
    /// Relative accuracy of an index list (read from --indices or stdin).
    Eval(EvalArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Input matrix.
    #[arg(long)]
    input: PathBuf,
    /// Input format; guessed from the extension when omitted.
    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: machine parallelism). Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Write the JSON run summary here.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Uniform trials for the relative accuracy in the summary.
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Args, Debug)]
struct SelectArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    l: usize,
    /// Selected indices, one per line (default: stdout).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SelectGenArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    l: usize,
    /// Target matrix (same format as the input).
    #[arg(long)]
    target: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SketchOpts {
    /// Sketch width; defaults to the column count for the identity sketch.
    #[arg(long)]
    r: Option<usize>,
    #[arg(long, value_enum, default_value_t = SketchArg::Gaussian)]
    sketch: SketchArg,
}

#[derive(Args, Debug)]
struct SketchArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    sketch: SketchOpts,
    /// Where to write B (default: stdout).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Format for B (default: the input format).
    #[arg(long, value_parser = parse_format)]
    output_format: Option<Format>,
}

#[derive(Args, Debug)]
struct DistOpts {
    #[arg(long, default_value_t = 1)]
    partitions: usize,
    #[arg(long, value_enum, default_value_t = AssignmentArg::Contiguous)]
    assignment: AssignmentArg,
}

#[derive(Args, Debug)]
struct DistArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    l: usize,
    #[command(flatten)]
    sketch: SketchOpts,
    #[command(flatten)]
    dist: DistOpts,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BaselineArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    l: usize,
    #[arg(long, value_enum)]
    method: Method,
    /// Rank of the SVD target for sketch-svd (default: l).
    #[arg(long)]
    k: Option<usize>,
    #[command(flatten)]
    dist: DistOpts,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
    /// Expected number of indices (checked when given).
    #[arg(long)]
    l: Option<usize>,
    /// Index list, whitespace separated (default: stdin).
    #[arg(long)]
    indices: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SketchArg {
    Gaussian,
    Sign,
    SparseSign,
    Identity,
}

impl From<SketchArg> for SketchKind {
    fn from(s: SketchArg) -> Self {
        match s {
            SketchArg::Gaussian => SketchKind::Gaussian,
            SketchArg::Sign => SketchKind::Sign,
            SketchArg::SparseSign => SketchKind::SparseSign,
            SketchArg::Identity => SketchKind::Identity,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AssignmentArg {
    Contiguous,
    RoundRobin,
}

impl From<AssignmentArg> for Assignment {
    fn from(a: AssignmentArg) -> Self {
        match a {
            AssignmentArg::Contiguous => Assignment::Contiguous,
            AssignmentArg::RoundRobin => Assignment::RoundRobin,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Uniform,
    HybridUni,
    HybridCol,
    HybridSvd,
    SketchSvd,
    NaiveDist,
}

fn parse_format(s: &str) -> std::result::Result<Format, String> {
    s.parse().map_err(|e: CssError| e.to_string())
}

/// Exit code for a library error.
pub fn exit_code(err: &CssError) -> i32 {
    match err {
        e if e.is_numerical() => EXIT_NUMERICAL,
        CssError::InvalidArgument(_) | CssError::InvalidRank { .. } | CssError::Partition(_) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{rendered}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{rendered}");
                EXIT_OK
            };
        }
    };
    match execute(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(command: Command, stdout: &mut dyn Write) -> Result<()> {
    let threads = match &command {
        Command::Select(a) => a.common.threads,
        Command::SelectGen(a) => a.common.threads,
        Command::Sketch(a) => a.common.threads,
        Command::SelectDist(a) => a.common.threads,
        Command::Baseline(a) => a.common.threads,
        Command::Eval(a) => a.common.threads,
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(CssError::InvalidArgument("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(t);
    }
    let pool = pool
        .build()
        .map_err(|e| CssError::InvalidArgument(format!("thread pool: {e}")))?;
    let mut out = Vec::new();
    pool.install(|| dispatch(command, &mut out))?;
    stdout.write_all(&out)?;
    Ok(())
}

fn load(common: &Common) -> Result<(Matrix, Format)> {
    let format = resolve_format(common.format, &common.input)?;
    Ok((load_matrix(&common.input, format)?, format))
}

fn resolve_format(format: Option<Format>, path: &std::path::Path) -> Result<Format> {
    format.or_else(|| Format::from_path(path)).ok_or_else(|| {
        CssError::InvalidArgument(format!("cannot infer the format of {}; pass --format", path.display()))
    })
}

fn emit_indices(indices: &[usize], output: &Option<PathBuf>, out: &mut Vec<u8>) -> Result<()> {
    let text = format_indices(indices);
    match output {
        Some(path) => fs::write(path, text)?,
        None => out.extend_from_slice(text.as_bytes()),
    }
    Ok(())
}

fn summary_accuracy(a: &Matrix, set: &ColumnSet, common: &Common) -> Result<Option<f64>> {
    match common.trials {
        None => Ok(None),
        Some(_) if set.is_empty() => Ok(None),
        Some(t) => match relative_accuracy(a, set, t, common.seed) {
            Ok(v) => Ok(Some(v)),
            Err(CssError::UndefinedMetric) => Ok(None),
            Err(e) => Err(e),
        },
    }
}

struct Finished<'a> {
    method: String,
    parameters: RunParameters,
    selection: Selection,
    f_sketch_value: Option<f64>,
    report: Option<crate::distributed::DistributedReport>,
    output: &'a Option<PathBuf>,
}

fn finish(a: &Matrix, common: &Common, done: Finished<'_>, out: &mut Vec<u8>) -> Result<()> {
    emit_indices(done.selection.indices(), done.output, out)?;
    if let Some(path) = &common.summary {
        let summary = RunSummary {
            method: done.method,
            parameters: RunParameters { trials: common.trials, ..done.parameters },
            selected: done.selection.indices().to_vec(),
            f_value: css_criterion_lenient(a, &done.selection.columns)?,
            f_sketch_value: done.f_sketch_value,
            relative_accuracy: summary_accuracy(a, &done.selection.columns, common)?,
            stop: done.selection.stop,
            timings: done.report.as_ref().map(|r| r.timings.clone()),
            columns_moved: done.report.as_ref().map(|r| r.columns_moved),
        };
        summary.save(path)?;
    }
    Ok(())
}

fn sketch_spec(opts: &SketchOpts, n: usize, seed: u64) -> Result<SketchSpec> {
    let kind = SketchKind::from(opts.sketch);
    let r = match (opts.r, kind) {
        (Some(r), _) => r,
        (None, SketchKind::Identity) => n,
        (None, _) => return Err(CssError::InvalidArgument("--r is required for random sketches".into())),
    };
    let spec = SketchSpec::new(kind, r, derive_seed(seed, streams::SKETCH));
    spec.validate(n)?;
    Ok(spec)
}

fn dist_config(l: usize, spec: SketchSpec, dist: &DistOpts, seed: u64) -> DistributedConfig {
    DistributedConfig {
        partitions: dist.partitions,
        l,
        assignment: dist.assignment.into(),
        sketch: spec,
        seed,
        threads: None,
    }
}

fn dispatch(command: Command, out: &mut Vec<u8>) -> Result<()> {
    match command {
        Command::Select(args) => {
            let (a, _) = load(&args.common)?;
            let selection = greedy_select(&a, args.l)?;
            let parameters = RunParameters { l: args.l, seed: args.common.seed, ..Default::default() };
            let done = Finished {
                method: "greedy".into(),
                parameters,
                selection,
                f_sketch_value: None,
                report: None,
                output: &args.output,
            };
            finish(&a, &args.common, done, out)
        }
        Command::SelectGen(args) => {
            let (a, format) = load(&args.common)?;
            let b = load_matrix(&args.target, format)?;
            let selection = generalized_select(&a, &b, args.l)?;
            let target_error = target_criterion(&a, &selection.columns, &b)?;
            let parameters = RunParameters {
                l: args.l,
                r: Some(b.ncols()),
                seed: args.common.seed,
                ..Default::default()
            };
            let done = Finished {
                method: "generalized".into(),
                parameters,
                selection,
                f_sketch_value: Some(target_error),
                report: None,
                output: &args.output,
            };
            finish(&a, &args.common, done, out)
        }
        Command::Sketch(args) => {
            let (a, format) = load(&args.common)?;
            let spec = sketch_spec(&args.sketch, a.ncols(), args.common.seed)?;
            let b = sketch_matrix(&a, &spec)?;
            let out_format = args.output_format.unwrap_or(format);
            match &args.output {
                Some(path) => crate::io::save_matrix(&b, path, out_format)?,
                None => write_matrix(&b, &mut *out, out_format)?,
            }
            Ok(())
        }
        Command::SelectDist(args) => {
            let (a, _) = load(&args.common)?;
            let spec = sketch_spec(&args.sketch, a.ncols(), args.common.seed)?;
            let config = dist_config(args.l, spec, &args.dist, args.common.seed);
            let outcome = distributed_select(&a, &config)?;
            let parameters = RunParameters {
                l: args.l,
                r: Some(spec.r),
                c: Some(args.dist.partitions),
                seed: args.common.seed,
                sketch: Some(spec.kind.to_string()),
                assignment: Some(config.assignment.to_string()),
                ..Default::default()
            };
            let done = Finished {
                method: "distributed".into(),
                parameters,
                f_sketch_value: Some(outcome.report.target_error),
                selection: outcome.selection,
                report: Some(outcome.report),
                output: &args.output,
            };
            finish(&a, &args.common, done, out)
        }
        Command::Baseline(args) => {
            let (a, _) = load(&args.common)?;
            let seed = args.common.seed;
            let l = args.l;
            let mut parameters = RunParameters { l, seed, ..Default::default() };
            let (name, selection) = match args.method {
                Method::Uniform => {
                    let columns = uniform_select(a.ncols(), l, uniform_trial_seed(seed, 0))?;
                    ("uniform", Selection { columns, stop: None })
                }
                Method::HybridUni => ("hybrid-uni", hybrid_select(&a, l, ProbabilityMode::Uniform, seed)?),
                Method::HybridCol => ("hybrid-col", hybrid_select(&a, l, ProbabilityMode::ColumnNorm, seed)?),
                Method::HybridSvd => ("hybrid-svd", hybrid_select(&a, l, ProbabilityMode::SvdRows, seed)?),
                Method::SketchSvd => {
                    let k = args.k.unwrap_or(l);
                    parameters.r = Some(k);
                    ("sketch-svd", sketch_svd_select(&a, l, k, derive_seed(seed, streams::SVD))?)
                }
                Method::NaiveDist => {
                    parameters.c = Some(args.dist.partitions);
                    let spec = SketchSpec::new(SketchKind::Identity, a.ncols(), 0);
                    let config = dist_config(l, spec, &args.dist, seed);
                    parameters.assignment = Some(config.assignment.to_string());
                    ("naive-dist", naive_distributed_baseline(&a, &config)?)
                }
            };
            let done = Finished {
                method: name.into(),
                parameters,
                selection,
                f_sketch_value: None,
                report: None,
                output: &args.output,
            };
            finish(&a, &args.common, done, out)
        }
        Command::Eval(args) => {
            let (a, _) = load(&args.common)?;
            let text = match &args.indices {
                Some(path) => fs::read_to_string(path)?,
                None => {
                    let mut s = String::new();
                    std::io::stdin().read_to_string(&mut s)?;
                    s
                }
            };
            let columns = ColumnSet::from_indices(parse_indices(&text)?)?;
            if let Some(l) = args.l {
                if l != columns.len() {
                    return Err(CssError::InvalidArgument(format!(
                        "--l {l} but {} indices were given",
                        columns.len()
                    )));
                }
            }
            columns.check_bounds(a.ncols())?;
            let trials = args.common.trials.unwrap_or(crate::eval::DEFAULT_UNIFORM_TRIALS);
            let accuracy = relative_accuracy(&a, &columns, trials, args.common.seed)?;
            writeln!(out, "{accuracy}")?;
            if let Some(path) = &args.common.summary {
                RunSummary {
                    method: "eval".into(),
                    parameters: RunParameters {
                        l: columns.len(),
                        seed: args.common.seed,
                        trials: Some(trials),
                        ..Default::default()
                    },
                    selected: columns.indices().to_vec(),
                    f_value: css_criterion_lenient(&a, &columns)?,
                    f_sketch_value: None,
                    relative_accuracy: Some(accuracy),
                    stop: None,
                    timings: None,
                    columns_moved: None,
                }
                .save(path)?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("css").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(call(&["select", "--input", "x.csv", "--l", "2", "--bogus"]).0, EXIT_USAGE);
        let (code, out, _) = call(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("select-dist"));
    }

    #[test]
    fn missing_file_is_data_error() {
        let (code, _, err) = call(&["select", "--input", "/nonexistent/a.csv", "--l", "2"]);
        assert_eq!(code, EXIT_DATA);
        assert!(err.starts_with("error:"));
    }

    #[test]
    fn exit_code_mapping() {
        assert_eq!(exit_code(&CssError::NoActiveCandidates), EXIT_NUMERICAL);
        assert_eq!(exit_code(&CssError::Parse { line: 1, msg: String::new() }), EXIT_DATA);
        assert_eq!(exit_code(&CssError::InvalidRank { k: 3, max: 2 }), EXIT_USAGE);
    }
}
