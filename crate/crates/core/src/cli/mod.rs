//! Command-line front end: norm evaluation, prox benchmarking, data
//! generation and the completion and multitask experiment runners.
//!
//! Every command other than `norm` takes `key=value` settings, optionally
//! read from a file with `--config`; settings on the command line win.
//! Tabular output is CSV preceded by a `#` line echoing the resolved
//! settings, which can be passed back to reproduce the run.
//!
//! Exit codes: 0 success, 1 solver failure, 2 usage or input error, 3
//! internal consistency failure.

pub mod config;
pub mod experiments;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::{
    gen_block_clustered, gen_lowrank, load_ratings, CompletionProblem, MetricKind, RatingFormat,
    Ratings, SplitMode, SplitSpec,
};
use crate::error::Error;
use crate::losses::TaskDataset;
use crate::prox::{prox_sq_ksup, prox_sq_ksup_reference, ProxConfig};
use crate::solver::{Penalty, PenaltyFamily, SolveConfig};
use crate::svd::thin_svd;
use crate::vecnorm::{
    box_norm, dual_box_norm, dual_k_support_norm, k_support_norm, BoxParams, KSupportParams,
};
use config::ExperimentConfig;
use experiments::{run_experiment, Arm, Experiment, Source};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SOLVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONSISTENCY: i32 = 3;

/// A command failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Numeric { .. } | Error::Metric(_) => EXIT_SOLVE,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = std::result::Result<(), Failure>;

#[derive(Parser, Debug)]
#[command(
    name = "boxnorm",
    version,
    about = "Box-norm and k-support norm toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a norm, its certificate and its dual on a vector or matrix file.
    Norm(NormArgs),
    /// Time the fast and reference k-support prox over a list of sizes.
    BenchProx(Settings),
    /// Synthetic or rating-file matrix completion experiment.
    Complete(Settings),
    /// Centered and uncentered multitask experiment.
    Mtl(Settings),
    /// Write a synthetic completion problem.
    Gen(GenArgs),
}

#[derive(Args, Debug)]
#[group(id = "kind", required = true, multiple = false)]
struct NormKind {
    /// Box-norm; needs a, b and c (or k).
    #[arg(long = "box")]
    box_norm: bool,
    /// k-support norm; needs k.
    #[arg(long)]
    ksup: bool,
    /// Trace norm (ℓ1 on vectors).
    #[arg(long)]
    trace: bool,
    /// Frobenius norm (ℓ2 on vectors).
    #[arg(long)]
    frobenius: bool,
}

#[derive(Args, Debug)]
struct NormArgs {
    #[command(flatten)]
    kind: NormKind,
    /// `key=value` parameters and the input file (numbers separated by
    /// whitespace or commas; several rows make a matrix).
    #[arg(value_name = "PARAM|FILE")]
    args: Vec<String>,
}

#[derive(Args, Debug)]
struct Settings {
    /// File of `key=value` lines, overridden by the command line.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output path; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// `key=value` settings.
    #[arg(value_name = "KEY=VALUE")]
    settings: Vec<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum GenKind {
    Lowrank,
    Blocks,
}

#[derive(Args, Debug)]
struct GenArgs {
    kind: GenKind,
    #[command(flatten)]
    settings: Settings,
}

/// Runs the command line `args` (program name first) and returns the exit
/// code. Results go to `out` unless an output file is set; diagnostics go
/// to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let help = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let text = e.render().to_string();
            return if help {
                let _ = write!(out, "{text}");
                EXIT_OK
            } else {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            };
        }
    };
    let result = match cli.command {
        Command::Norm(a) => cmd_norm(&a, out),
        Command::BenchProx(s) => cmd_bench_prox(&s, out, err),
        Command::Complete(s) => cmd_complete(&s, out, err),
        Command::Mtl(s) => cmd_mtl(&s, out, err),
        Command::Gen(g) => cmd_gen(&g, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
    .into()
}

fn emit(text: &str, output: Option<&str>, out: &mut dyn Write) -> CmdResult {
    match output {
        Some(p) => {
            let path = Path::new(p);
            std::fs::write(path, text).map_err(|e| io_failure(path, e))
        }
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| io_failure(Path::new("<stdout>"), e)),
    }
}

/// Settings from `--config`, then `key=value` arguments, then flags.
fn gather(
    command: &str,
    allowed: &'static [&'static str],
    s: &Settings,
) -> Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig::new(command, allowed);
    if let Some(path) = &s.config {
        cfg.merge_file(path)?;
    }
    cfg.set_pairs(s.settings.iter().map(String::as_str))?;
    if let Some(t) = s.trials {
        cfg.set("trials", &t.to_string())?;
    }
    if let Some(seed) = s.seed {
        cfg.set("seed", &seed.to_string())?;
    }
    if let Some(o) = &s.output {
        cfg.set("output", &o.to_string_lossy())?;
    }
    Ok(cfg)
}

/// The echo line without the output path, so a rerun into another file
/// produces identical contents.
fn echo_without_output(cfg: &ExperimentConfig) -> String {
    let mut c = cfg.clone();
    c.remove("output");
    c.echo()
}

// ---------------------------------------------------------------- norm

/// Parses whitespace- or comma-separated numbers; `#` starts a comment.
/// Returns the rows.
pub fn parse_numbers(text: &str, path: &Path) -> crate::Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let row: crate::Result<Vec<f64>> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: format!("not a number: `{t}`"),
                })
            })
            .collect();
        let row = row?;
        if !row.is_empty() {
            rows.push(row);
        }
    }
    if rows.is_empty() {
        return Err(Error::Input(format!("{} holds no numbers", path.display())));
    }
    Ok(rows)
}

fn cmd_norm(a: &NormArgs, out: &mut dyn Write) -> CmdResult {
    let mut cfg = ExperimentConfig::new("norm", &["a", "b", "c", "k", "input"]);
    for tok in &a.args {
        if tok.contains('=') {
            cfg.set_pairs([tok.as_str()])?;
        } else if cfg.raw("input").is_some() {
            return Err(Failure::usage(format!("more than one input file: `{tok}`")));
        } else {
            cfg.set("input", tok)?;
        }
    }
    let path = PathBuf::from(cfg.str("input")?);
    let text = std::fs::read_to_string(&path).map_err(|e| io_failure(&path, e))?;
    let rows = parse_numbers(&text, &path)?;
    let is_matrix = rows.len() > 1 && rows[0].len() > 1;
    let values: Vec<f64> = if is_matrix {
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Failure::usage("matrix rows have different lengths"));
        }
        let m = ndarray::Array2::from_shape_vec(
            (rows.len(), cols),
            rows.into_iter().flatten().collect(),
        )
        .expect("shape checked");
        thin_svd(m.view())?.sigma
    } else {
        rows.into_iter().flatten().collect()
    };
    let d = values.len();
    let mut lines = Vec::new();
    if a.kind.box_norm {
        let (pa, pb) = (cfg.get::<f64>("a")?, cfg.get::<f64>("b")?);
        let params = match (cfg.raw("c"), cfg.raw("k")) {
            (Some(_), None) => BoxParams::new(pa, pb, cfg.get("c")?)?,
            (None, Some(_)) => BoxParams::from_k(pa, pb, cfg.get("k")?, d)?,
            _ => return Err(Failure::usage("--box needs exactly one of c or k")),
        };
        let (value, cert) = box_norm(&values, &params)?;
        lines.push(("norm", "box".to_string()));
        lines.push(("value", value.to_string()));
        lines.push(("q", cert.q.to_string()));
        lines.push(("ell", cert.ell.to_string()));
        lines.push(("alpha", cert.alpha.to_string()));
        lines.push(("dual", dual_box_norm(&values, &params)?.to_string()));
    } else if a.kind.ksup {
        let params = KSupportParams::new(cfg.get("k")?);
        let (value, q) = k_support_norm(&values, &params)?;
        let mut mags: Vec<f64> = values.iter().map(|x| x.abs()).collect();
        mags.sort_by(|x, y| y.total_cmp(x));
        let tail: f64 = mags[q..].iter().sum();
        let alpha = if tail > 0.0 {
            (params.k - q) as f64 / tail
        } else {
            f64::INFINITY
        };
        lines.push(("norm", "ksup".to_string()));
        lines.push(("value", value.to_string()));
        lines.push(("q", q.to_string()));
        lines.push((
            "ell",
            mags.iter().filter(|&&m| m == 0.0).count().to_string(),
        ));
        lines.push(("alpha", alpha.to_string()));
        lines.push(("dual", dual_k_support_norm(&values, &params)?.to_string()));
    } else if a.kind.trace {
        let l1: f64 = values.iter().map(|x| x.abs()).sum();
        let linf = values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        lines.push(("norm", "trace".to_string()));
        lines.push(("value", l1.to_string()));
        lines.push(("dual", linf.to_string()));
    } else {
        let l2 = values.iter().map(|x| x * x).sum::<f64>().sqrt();
        lines.push(("norm", "frobenius".to_string()));
        lines.push(("value", l2.to_string()));
        lines.push(("dual", l2.to_string()));
    }
    let text: String = lines.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
    emit(&text, None, out)
}

// ---------------------------------------------------------------- bench-prox

/// Timing of the fast and reference prox at one size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRow {
    pub d: usize,
    pub k: usize,
    pub fast_seconds: f64,
    pub reference_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOptions {
    pub sizes: Vec<usize>,
    /// `k = max(1, round(k_frac d))`.
    pub k_frac: f64,
    pub runs: usize,
    pub warmup: usize,
    pub lambda: f64,
    pub seed: u64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            sizes: (10..=15).map(|p| 1usize << p).collect(),
            k_frac: 0.05,
            runs: 11,
            warmup: 3,
            lambda: 1.0,
            seed: 1,
        }
    }
}

fn median_time(runs: usize, warmup: usize, mut f: impl FnMut()) -> f64 {
    for _ in 0..warmup {
        f();
    }
    let mut times: Vec<f64> = (0..runs.max(1))
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed().as_secs_f64()
        })
        .collect();
    times.sort_by(f64::total_cmp);
    times[times.len() / 2]
}

/// Checks that both prox routines agree to `1e-8` at every size, then
/// reports the median time of each.
pub fn bench_prox(opts: &BenchOptions) -> std::result::Result<Vec<BenchRow>, Failure> {
    let cfg = ProxConfig::new(opts.lambda)?;
    let mut rows = Vec::new();
    for &d in &opts.sizes {
        if d == 0 {
            return Err(Failure::usage("sizes must be positive"));
        }
        let k = ((opts.k_frac * d as f64).round() as usize).clamp(1, d);
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(d as u64));
        let w: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let fast = prox_sq_ksup(&w, k, &cfg)?;
        let reference = prox_sq_ksup_reference(&w, k, opts.lambda)?;
        let gap = fast
            .iter()
            .zip(&reference)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f64, f64::max);
        if !(gap <= 1e-8) {
            return Err(Failure {
                code: EXIT_CONSISTENCY,
                message: format!("fast and reference prox differ by {gap:e} at d={d}, k={k}"),
            });
        }
        let fast_seconds = median_time(opts.runs, opts.warmup, || {
            std::hint::black_box(prox_sq_ksup(std::hint::black_box(&w), k, &cfg).ok());
        });
        let reference_seconds = median_time(opts.runs, opts.warmup, || {
            std::hint::black_box(
                prox_sq_ksup_reference(std::hint::black_box(&w), k, opts.lambda).ok(),
            );
        });
        rows.push(BenchRow {
            d,
            k,
            fast_seconds,
            reference_seconds,
        });
    }
    Ok(rows)
}

/// Least-squares slope of `log t` against `log d`.
pub fn scaling_exponent(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

const BENCH_KEYS: &[&str] = &[
    "sizes", "k_frac", "runs", "warmup", "lambda", "seed", "output",
];

fn cmd_bench_prox(s: &Settings, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    if s.trials.is_some() {
        return Err(Failure::usage("bench-prox takes runs=, not --trials"));
    }
    let mut cfg = gather("bench-prox", BENCH_KEYS, s)?;
    let dflt = BenchOptions::default();
    let sizes: Vec<String> = dflt.sizes.iter().map(|d| d.to_string()).collect();
    cfg.default("sizes", sizes.join(","));
    cfg.default("k_frac", dflt.k_frac);
    cfg.default("runs", dflt.runs);
    cfg.default("warmup", dflt.warmup);
    cfg.default("lambda", dflt.lambda);
    cfg.default("seed", dflt.seed);
    let opts = BenchOptions {
        sizes: cfg.list("sizes")?,
        k_frac: cfg.get("k_frac")?,
        runs: cfg.get("runs")?,
        warmup: cfg.get("warmup")?,
        lambda: cfg.get("lambda")?,
        seed: cfg.get("seed")?,
    };
    if !(opts.k_frac > 0.0 && opts.k_frac <= 1.0) {
        return Err(Failure::usage("k_frac must lie in (0, 1]"));
    }
    let rows = bench_prox(&opts)?;
    let mut text = echo_without_output(&cfg);
    text.push_str("\nd,fast_seconds,reference_seconds\n");
    for r in &rows {
        text.push_str(&format!(
            "{},{:e},{:e}\n",
            r.d, r.fast_seconds, r.reference_seconds
        ));
        let _ = writeln!(
            err,
            "d={} k={} speedup {:.1}x",
            r.d,
            r.k,
            r.reference_seconds / r.fast_seconds
        );
    }
    emit(&text, cfg.raw("output"), out)
}

// ---------------------------------------------------------------- gen

const GEN_KEYS: &[&str] = &["d", "r", "noise", "seed", "blocks", "block_size", "output"];

fn cmd_gen(g: &GenArgs, out: &mut dyn Write) -> CmdResult {
    if g.settings.trials.is_some() {
        return Err(Failure::usage("gen does not take --trials"));
    }
    let mut cfg = gather("gen", GEN_KEYS, &g.settings)?;
    cfg.default("d", 100);
    cfg.default("noise", true);
    cfg.default("seed", 1);
    let (d, noise, seed) = (cfg.get("d")?, cfg.get("noise")?, cfg.get("seed")?);
    let problem = match g.kind {
        GenKind::Lowrank => {
            cfg.default("r", 5);
            gen_lowrank(d, cfg.get("r")?, noise, seed)?
        }
        GenKind::Blocks => {
            cfg.default("blocks", 5);
            cfg.default("block_size", 20);
            gen_block_clustered(d, cfg.get("blocks")?, cfg.get("block_size")?, noise, seed)?
        }
    };
    emit(&problem.to_text(), cfg.raw("output"), out)
}

// ---------------------------------------------------------------- experiments

const COMPLETE_KEYS: &[&str] = &[
    "seed",
    "trials",
    "source",
    "d",
    "rank",
    "dataset",
    "format",
    "train",
    "validation",
    "test",
    "split",
    "penalties",
    "thresholds",
    "tol",
    "max_iter",
    "metric",
    "lambda_trace",
    "lambda_elnet",
    "lambda_ksup",
    "lambda_box",
    "gammas",
    "ksup_ks",
    "box_ks",
    "box_a",
    "box_b",
    "output",
];

const MTL_KEYS: &[&str] = &[
    "seed",
    "trials",
    "source",
    "d",
    "blocks",
    "block_size",
    "dataset",
    "profiles_per_task",
    "train",
    "validation",
    "test",
    "penalties",
    "centered",
    "thresholds",
    "tol",
    "max_iter",
    "lambda_fr",
    "lambda_trace",
    "lambda_elnet",
    "lambda_ksup",
    "lambda_box",
    "gammas",
    "ksup_ks",
    "box_ks",
    "box_a",
    "box_b",
    "output",
];

/// Settings of the `complete` command with every default filled in.
pub fn complete_config(pairs: &[&str]) -> crate::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::new("complete", COMPLETE_KEYS);
    cfg.set_pairs(pairs.iter().copied())?;
    complete_defaults(&mut cfg);
    Ok(cfg)
}

/// Settings of the `mtl` command with every default filled in.
pub fn mtl_config(pairs: &[&str]) -> crate::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::new("mtl", MTL_KEYS);
    cfg.set_pairs(pairs.iter().copied())?;
    mtl_defaults(&mut cfg);
    Ok(cfg)
}

fn complete_defaults(cfg: &mut ExperimentConfig) {
    cfg.default("seed", 1);
    cfg.default("trials", 20);
    cfg.default("source", "lowrank");
    cfg.default("penalties", "trace,elnet,ksup,box");
    cfg.default("thresholds", 20);
    cfg.default("max_iter", 10_000);
    cfg.default("gammas", "0,1e-4,3e-4,1e-3");
    cfg.default("ksup_ks", "1,2,3,4,5");
    cfg.default("box_ks", "2,3,4");
    cfg.default("box_a", "0.01,0.03");
    cfg.default("box_b", 1);
    if cfg.raw("source") == Some("lowrank") {
        cfg.default("d", 100);
        cfg.default("rank", 5);
        cfg.default("train", 0.2);
        cfg.default("validation", 0.1);
        cfg.default("test", 0.7);
        cfg.default("split", "uniform");
        cfg.default("tol", "synthetic");
        cfg.default("metric", "relative_sq");
        cfg.default("lambda_trace", "log:0.5:50:9");
        cfg.default("lambda_elnet", "log:0.5:50:9");
        cfg.default("lambda_ksup", "log:3e-4:0.1:10");
        cfg.default("lambda_box", "log:1e-4:0.01:7");
    } else {
        cfg.default("train", 0.5);
        cfg.default("validation", 0.1);
        cfg.default("test", 0.4);
        cfg.default("split", "per_row");
        cfg.default("tol", "real");
        cfg.default("metric", "nmae");
        cfg.default("lambda_trace", "log:1:100:5");
        cfg.default("lambda_elnet", "log:1:100:5");
        cfg.default("lambda_ksup", "log:1e-4:0.01:5");
        cfg.default("lambda_box", "log:1e-4:0.01:5");
    }
}

fn mtl_defaults(cfg: &mut ExperimentConfig) {
    cfg.default("seed", 1);
    cfg.default("trials", 20);
    cfg.default("source", "blocks");
    cfg.default("penalties", "fr,trace,elnet,ksup,box");
    cfg.default("centered", "both");
    cfg.default("max_iter", 10_000);
    cfg.default("tol", "synthetic");
    cfg.default("gammas", "0,1e-4,3e-4,1e-3");
    cfg.default("box_b", 1);
    if cfg.raw("source") == Some("blocks") {
        cfg.default("d", 100);
        cfg.default("blocks", 5);
        cfg.default("block_size", 20);
        cfg.default("train", 0.1);
        cfg.default("validation", 0.1);
        cfg.default("test", 0.8);
        cfg.default("thresholds", 20);
        cfg.default("ksup_ks", "1,2,3,4");
        cfg.default("box_ks", "1,2,3");
        cfg.default("box_a", "0.01,0.03");
        cfg.default("lambda_fr", "log:0.01:10:7");
        cfg.default("lambda_trace", "log:0.5:50:9");
        cfg.default("lambda_elnet", "log:0.5:50:9");
        cfg.default("lambda_ksup", "log:3e-4:0.1:10");
        cfg.default("lambda_box", "log:1e-4:0.01:7");
    } else {
        cfg.default("profiles_per_task", 20);
        cfg.default("train", 0.5);
        cfg.default("validation", 0.25);
        cfg.default("test", 0.25);
        cfg.default("thresholds", 0);
        cfg.default("ksup_ks", "1,2,3");
        cfg.default("box_ks", "1,2");
        cfg.default("box_a", "0.01,0.1");
        cfg.default("lambda_fr", "log:1e-4:1:9");
        cfg.default("lambda_trace", "log:1e-4:1:9");
        cfg.default("lambda_elnet", "log:1e-4:1:9");
        cfg.default("lambda_ksup", "log:1e-4:1:9");
        cfg.default("lambda_box", "log:1e-4:1:9");
    }
}

fn tolerance(cfg: &ExperimentConfig) -> crate::Result<f64> {
    match cfg.str("tol")? {
        "synthetic" => Ok(1e-5),
        "real" => Ok(1e-3),
        _ => cfg.get("tol"),
    }
}

fn family(cfg: &ExperimentConfig, name: &str) -> crate::Result<PenaltyFamily> {
    Ok(match name {
        "fr" => PenaltyFamily::Frobenius,
        "trace" => PenaltyFamily::Trace,
        "elnet" => PenaltyFamily::ElasticNet {
            gammas: cfg.list("gammas")?,
        },
        "ksup" => PenaltyFamily::KSupport {
            ks: cfg.list("ksup_ks")?,
        },
        "box" => PenaltyFamily::Box {
            ks: cfg.list("box_ks")?,
            a_values: cfg.list("box_a")?,
            b: cfg.get("box_b")?,
        },
        other => {
            return Err(Error::Parameter(format!(
                "unknown penalty `{other}`; expected fr, trace, elnet, ksup or box"
            )))
        }
    })
}

fn arms(cfg: &ExperimentConfig, centered: &[bool]) -> crate::Result<Vec<Arm>> {
    let names: Vec<String> = cfg.list("penalties")?;
    if names.is_empty() {
        return Err(Error::Parameter("no penalties selected".into()));
    }
    let mut out = Vec::new();
    for &c in centered {
        for name in &names {
            out.push(Arm {
                family: family(cfg, name)?,
                lambdas: cfg.grid(&format!("lambda_{name}"))?,
                centered: c,
            });
        }
    }
    Ok(out)
}

fn split_spec(cfg: &ExperimentConfig, mode: SplitMode) -> crate::Result<SplitSpec> {
    Ok(SplitSpec {
        train: cfg.get("train")?,
        validation: cfg.get("validation")?,
        test: cfg.get("test")?,
        seed: 0,
        mode,
    })
}

fn base_config(cfg: &ExperimentConfig) -> crate::Result<SolveConfig> {
    Ok(SolveConfig {
        tol: tolerance(cfg)?,
        max_iter: cfg.get("max_iter")?,
        ..SolveConfig::synthetic(1.0, Penalty::Trace)
    })
}

fn thresholds(cfg: &ExperimentConfig) -> crate::Result<Option<usize>> {
    let n: usize = cfg.get("thresholds")?;
    Ok((n > 0).then_some(n))
}

/// Builds the `complete` experiment described by fully defaulted settings.
pub fn complete_experiment(cfg: &ExperimentConfig) -> crate::Result<Experiment> {
    let mode = match cfg.str("split")? {
        "uniform" => SplitMode::Uniform,
        "per_row" => SplitMode::PerRow,
        other => return Err(Error::Parameter(format!("unknown split mode `{other}`"))),
    };
    let metric = match cfg.str("metric")? {
        "relative_sq" => MetricKind::RelativeSq,
        "nmae" => MetricKind::Nmae,
        "nmae_display" => MetricKind::NmaeSquaredDisplay,
        other => return Err(Error::Parameter(format!("unknown metric `{other}`"))),
    };
    let source = match cfg.str("source")? {
        "lowrank" => Source::LowRank {
            d: cfg.get("d")?,
            rank: cfg.get("rank")?,
        },
        "file" => {
            let path = PathBuf::from(cfg.str("dataset")?);
            let problem = match cfg.str("format")? {
                "movielens" => ratings_matrix(load_ratings(&path, RatingFormat::MovielensTab)?)?,
                "jester" => ratings_matrix(load_ratings(&path, RatingFormat::JesterCsv)?)?,
                "matrix" => CompletionProblem::load(&path)?,
                other => {
                    return Err(Error::Parameter(format!(
                        "unknown format `{other}`; expected movielens, jester or matrix"
                    )))
                }
            };
            Source::Matrix(problem)
        }
        other => {
            return Err(Error::Parameter(format!(
                "unknown source `{other}`; expected lowrank or file"
            )))
        }
    };
    Ok(Experiment {
        source,
        arms: arms(cfg, &[false])?,
        trials: cfg.get("trials")?,
        seed: cfg.get("seed")?,
        split: split_spec(cfg, mode)?,
        base: base_config(cfg)?,
        thresholds: thresholds(cfg)?,
        metric,
    })
}

fn ratings_matrix(r: Ratings) -> crate::Result<CompletionProblem> {
    match r {
        Ratings::Matrix(p) => Ok(p),
        Ratings::Tasks(_) => Err(Error::Input("expected a rating matrix".into())),
    }
}

fn ratings_tasks(r: Ratings) -> crate::Result<TaskDataset> {
    match r {
        Ratings::Tasks(t) => Ok(t),
        Ratings::Matrix(_) => Err(Error::Input("expected a multitask table".into())),
    }
}

/// Builds the `mtl` experiment described by fully defaulted settings.
pub fn mtl_experiment(cfg: &ExperimentConfig) -> crate::Result<Experiment> {
    let centered: &[bool] = match cfg.str("centered")? {
        "both" => &[false, true],
        "yes" => &[true],
        "no" => &[false],
        other => {
            return Err(Error::Parameter(format!(
                "centered must be both, yes or no, got `{other}`"
            )))
        }
    };
    let source = match cfg.str("source")? {
        "blocks" => Source::Blocks {
            d: cfg.get("d")?,
            blocks: cfg.get("blocks")?,
            block_size: cfg.get("block_size")?,
        },
        "lenk" => {
            let path = PathBuf::from(cfg.str("dataset")?);
            let format = RatingFormat::LenkTable {
                profiles_per_task: cfg.get("profiles_per_task")?,
            };
            Source::Tasks(ratings_tasks(load_ratings(&path, format)?)?)
        }
        other => {
            return Err(Error::Parameter(format!(
                "unknown source `{other}`; expected blocks or lenk"
            )))
        }
    };
    Ok(Experiment {
        source,
        arms: arms(cfg, centered)?,
        trials: cfg.get("trials")?,
        seed: cfg.get("seed")?,
        split: split_spec(cfg, SplitMode::Uniform)?,
        base: base_config(cfg)?,
        thresholds: thresholds(cfg)?,
        metric: MetricKind::RelativeSq,
    })
}

fn run_table(
    exp: &Experiment,
    cfg: &ExperimentConfig,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let total = exp.trials;
    let results = run_experiment(exp, &mut |i, _| {
        let _ = writeln!(err, "trial {}/{} done", i + 1, total);
    })?;
    let mut text = echo_without_output(cfg);
    text.push('\n');
    text.push_str(&results.to_csv());
    emit(&text, cfg.raw("output"), out)
}

fn cmd_complete(s: &Settings, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let mut cfg = gather("complete", COMPLETE_KEYS, s)?;
    complete_defaults(&mut cfg);
    let exp = complete_experiment(&cfg)?;
    run_table(&exp, &cfg, out, err)
}

fn cmd_mtl(s: &Settings, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let mut cfg = gather("mtl", MTL_KEYS, s)?;
    mtl_defaults(&mut cfg);
    let exp = mtl_experiment(&cfg)?;
    run_table(&exp, &cfg, out, err)
}
