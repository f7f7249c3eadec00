//! Command-line driver for f2reglab.
//!
//! Exit codes: 0 success, 1 a verified claim failed, 2 usage or guard error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use f2reglab::decompose::{self, Guards, Schedule, Status};
use f2reglab::fourier::{check_subspace_regularity, wht_full};
use f2reglab::instance::{
    block_dims, eval_pointwise, generate_spanning_family, three_quarters, GenerationOptions,
    Instance, XiKind,
};
use f2reglab::rounding::{deviation_report, round_to_binary, DeviationFamilies};
use f2reglab::witness::{self, exhaustive_lowerbound_check, LowerBoundMode};
use f2reglab::{Epsilon, F2Vector, FunctionTable, Subspace, DEFAULT_DENSE_LIMIT};
use serde_json::{json, Value};

pub mod report;
pub mod table_file;

use table_file::TableFileError;

#[derive(Debug, Parser)]
#[command(name = "f2reglab", version, about = "Regularity lower-bound laboratory over F2^n")]
pub struct Cli {
    /// Worker threads (overrides F2REGLAB_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Largest n for which dense tables are built.
    #[arg(long, global = true, default_value_t = DEFAULT_DENSE_LIMIT)]
    pub dense_limit: u32,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the s-block instance and optionally write its table.
    Gen(GenArgs),
    /// Evaluate the instance at one point.
    Eval(EvalArgs),
    /// Check eps-regularity of one subspace.
    Check(CheckArgs),
    /// Refine until an eps-regular subspace is found.
    Decompose(DecomposeArgs),
    /// Certify that only {0} is regular for the instance.
    VerifyLowerbound(LowerBoundArgs),
    /// Generate and verify a spanning family.
    Spanning(SpanningArgs),
    /// Round a table to {0,1} values and measure coefficient drift.
    Round(RoundArgs),
    /// Time the full Walsh-Hadamard transform.
    BenchWht(BenchArgs),
}

#[derive(Debug, Args)]
pub struct Source {
    /// Table file to analyse.
    #[arg(long = "in", value_name = "PATH", conflicts_with = "s")]
    pub input: Option<PathBuf>,
    /// Build the s-block instance instead of reading a file.
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Values are multiples of 1/GRID (detected from the file when omitted).
    #[arg(long)]
    pub grid: Option<u64>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub s: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Table file to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON report path (stdout when omitted).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub s: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Point as a coordinate string x1 x2 ... xn.
    #[arg(long, conflicts_with = "index", required_unless_present = "index")]
    pub x: Option<String>,
    /// Point as an integer x1 + 2 x2 + 4 x3 + ...
    #[arg(long)]
    pub index: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long)]
    pub eps: String,
    /// "zero", "full", or comma-separated basis encodings.
    #[arg(long, default_value = "full")]
    pub subspace: String,
    /// Also emit the witness certificate (instance sources only).
    #[arg(long)]
    pub certificate: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long)]
    pub eps: String,
    /// Refine by one character per round.
    #[arg(long)]
    pub single_witness: bool,
    #[arg(long)]
    pub max_iterations: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_DENSE_LIMIT as usize)]
    pub max_index_log2: usize,
    /// CSV trace path.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyMode {
    Exhaustive,
    Structured,
    Sampled,
}

#[derive(Debug, Args)]
pub struct LowerBoundArgs {
    /// Number of blocks; derived from --eps when omitted.
    #[arg(long, required_unless_present = "eps")]
    pub s: Option<usize>,
    /// Defaults to 1/(16 s).
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = VerifyMode::Structured)]
    pub mode: VerifyMode,
    /// Structured mode: all subspaces of codimension up to this.
    #[arg(long, default_value_t = 2)]
    pub codim_max: usize,
    /// Random subspaces per dimension.
    #[arg(long, default_value_t = 1000)]
    pub random_per_dim: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpanningArgs {
    #[arg(long)]
    pub d: usize,
    /// Defaults to 8 d.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, default_value = "3/4")]
    pub rho: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Exhaustive below the dense limit unless `sampled`.
    #[arg(long, value_enum, default_value_t = VerifyMode::Exhaustive)]
    pub mode: VerifyMode,
    #[arg(long, default_value_t = f2reglab::instance::DEFAULT_HYPERPLANE_SAMPLES)]
    pub samples: u64,
    #[arg(long, default_value_t = 100)]
    pub max_attempts: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RoundArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long)]
    pub tau: String,
    /// Seed of the rounding draws and sampled pairs.
    #[arg(long, default_value_t = 1)]
    pub round_seed: u64,
    /// All cosets of subspaces up to this codimension.
    #[arg(long)]
    pub codim_max: Option<usize>,
    /// Random (A, eta) pairs.
    #[arg(long, default_value_t = 200)]
    pub pairs: usize,
    #[arg(long, default_value_t = 4)]
    pub pair_codim_max: usize,
    /// Rounded table file to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failed run with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
    /// Report to emit anyway.
    pub report: Option<(String, Option<PathBuf>)>,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
            report: None,
        }
    }
}

impl From<f2reglab::Error> for Failure {
    fn from(e: f2reglab::Error) -> Self {
        use f2reglab::Error::*;
        let code = match e {
            ClaimViolation(_) | RetryCapExceeded(_) => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
            report: None,
        }
    }
}

impl From<TableFileError> for Failure {
    fn from(e: TableFileError) -> Self {
        Failure::usage(e.to_string())
    }
}

type Outcome = std::result::Result<Output, Failure>;

/// What a successful command prints.
pub struct Output {
    pub json: String,
    pub path: Option<PathBuf>,
    /// Exit code; 1 when the report records a failed claim.
    pub code: i32,
}

fn parse_eps(s: &str) -> Result<Epsilon, Failure> {
    s.parse::<Epsilon>().map_err(Failure::from)
}

fn options(dense_limit: u32) -> GenerationOptions {
    GenerationOptions {
        dense_limit,
        ..GenerationOptions::default()
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    fs::write(path, contents)
        .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))
}

/// The function under study, with the instance when it was generated here.
struct Loaded {
    table: FunctionTable,
    instance: Option<Instance>,
    origin: Value,
}

fn load(source: &Source, dense_limit: u32) -> Result<Loaded, Failure> {
    match (&source.input, source.s) {
        (Some(path), _) => {
            let mut table = table_file::read_table(path, dense_limit)?;
            if let Some(g) = source.grid.or_else(|| table_file::detect_grid(&table)) {
                table = table.with_grid(g)?;
            }
            let origin = json!({ "file": path.display().to_string(), "grid": table.grid() });
            Ok(Loaded {
                table,
                instance: None,
                origin,
            })
        }
        (None, Some(s)) => {
            let inst = Instance::generate(s, source.seed, &options(dense_limit))?;
            let table = inst.table()?.clone();
            let origin = json!({ "s": s, "seed": source.seed, "grid": table.grid() });
            Ok(Loaded {
                table,
                instance: Some(inst),
                origin,
            })
        }
        (None, None) => Err(Failure::usage("give --in PATH or --s S")),
    }
}

fn parse_subspace(spec: &str, n: usize) -> Result<Subspace, Failure> {
    match spec.trim() {
        "zero" => Ok(Subspace::zero(n)),
        "full" => Ok(Subspace::full(n)),
        list => {
            let indices = list
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<u64>()
                        .map_err(|_| Failure::usage(format!("bad basis entry {t:?}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Subspace::from_indices(n, &indices)?)
        }
    }
}

fn gen(args: &GenArgs, dense_limit: u32) -> Outcome {
    let params = block_dims(args.s)?;
    let mut body = json!({
        "s": args.s,
        "seed": args.seed,
        "epsilon_max": report::epsilon(params.epsilon_max),
        "dims": params.dims.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
        "prefix_sums": params.prefix_sums.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
        "n": params.n().to_string(),
    });
    let dense = params.dense_possible(dense_limit);
    if args.out.is_some() && !dense {
        return Err(Failure::usage(format!(
            "a table over n = {} coordinates exceeds the dense limit n <= {dense_limit}",
            params.n()
        )));
    }
    if params.blocks().is_ok() {
        let inst = Instance::generate(args.s, args.seed, &options(dense_limit))?;
        let xi: Vec<Value> = inst
            .xi
            .blocks
            .iter()
            .enumerate()
            .map(|(k, b)| match &b.kind {
                XiKind::Basis => json!({ "block": k + 1, "dim": b.dim, "count": b.entries.len(), "kind": "basis" }),
                XiKind::Random(fam) => json!({
                    "block": k + 1,
                    "dim": b.dim,
                    "count": b.entries.len(),
                    "kind": "random",
                    "attempt": fam.attempt,
                    "check": report::spanning_check(&fam.check),
                }),
            })
            .collect();
        body["xi"] = json!(xi);
        if let Some(table) = &inst.table {
            body["mean"] = json!(table.mean());
            if table.values().len() <= 64 {
                body["values"] = json!(table.values());
            }
            if let Some(path) = &args.out {
                table_file::write_table(path, table)?;
                body["table"] = json!(path.display().to_string());
            }
        }
    }
    Ok(Output {
        json: report::render("gen", body),
        path: args.report.clone(),
        code: 0,
    })
}

fn eval(args: &EvalArgs, dense_limit: u32) -> Outcome {
    let inst = Instance::generate(args.s, args.seed, &options(dense_limit))?;
    let n = inst.n();
    let x = match (&args.x, args.index) {
        (Some(bits), _) => F2Vector::from_bit_string(bits)?,
        (None, Some(i)) => F2Vector::from_index(n, i)?,
        (None, None) => return Err(Failure::usage("give --x or --index")),
    };
    let value = eval_pointwise(&inst, &x)?;
    let terms = (1..=inst.s())
        .map(|j| inst.term(j, &x))
        .collect::<f2reglab::Result<Vec<_>>>()?;
    let hits = terms.iter().filter(|&&t| t).count() as u64;
    let body = json!({
        "s": inst.s(),
        "n": n,
        "seed": args.seed,
        "x": x.to_string(),
        "value": { "exact": f2reglab::exact::ratio_string(hits, inst.s() as u64), "value": value },
        "terms": terms,
    });
    Ok(Output {
        json: report::render("eval", body),
        path: args.out.clone(),
        code: 0,
    })
}

fn check(args: &CheckArgs, dense_limit: u32) -> Outcome {
    let eps = parse_eps(&args.eps)?;
    let loaded = load(&args.source, dense_limit)?;
    let f = &loaded.table;
    let h = parse_subspace(&args.subspace, f.n())?;
    let report = check_subspace_regularity(f, &h, eps)?;
    let mut body = json!({
        "source": loaded.origin,
        "report": report::regularity(&report, f.coefficient_scale(h.dim())),
        "regular": report.is_regular(),
        "fraction": report.regular_fraction(),
    });
    if args.certificate {
        let inst = loaded
            .instance
            .as_ref()
            .ok_or_else(|| Failure::usage("--certificate needs an instance source (--s)"))?;
        if h.is_zero() {
            return Err(Failure::usage("the zero subspace has no certificate"));
        }
        let cert = witness::scan_witnesses(inst, &h, eps)?;
        body["certificate"] = report::certificate(&cert);
    }
    Ok(Output {
        json: report::render("check", body),
        path: args.out.clone(),
        code: 0,
    })
}

fn decompose_cmd(args: &DecomposeArgs, dense_limit: u32) -> Outcome {
    let eps = parse_eps(&args.eps)?;
    let loaded = load(&args.source, dense_limit)?;
    let f = &loaded.table;
    let guards = Guards {
        max_iterations: args.max_iterations,
        max_index_log2: args.max_index_log2,
        schedule: if args.single_witness {
            Schedule::SingleWitness
        } else {
            Schedule::Batched
        },
    };
    let trace = decompose::find_regular_subspace(f, eps, guards)?;
    if let Some(path) = &args.csv {
        write_file(path, trace.to_csv().as_bytes())?;
    }
    let body = json!({
        "source": loaded.origin,
        "n": f.n(),
        "trace": report::trace(&trace, |k| f.coefficient_scale(k)),
    });
    let json = report::render("decompose", body);
    if trace.status != Status::Regular {
        return Err(Failure {
            code: 2,
            message: format!("guard tripped: {}", trace.status.name()),
            report: Some((json, args.out.clone())),
        });
    }
    Ok(Output {
        json,
        path: args.out.clone(),
        code: 0,
    })
}

fn verify_lowerbound(args: &LowerBoundArgs, dense_limit: u32) -> Outcome {
    let eps = args.eps.as_deref().map(parse_eps).transpose()?;
    let s = match (args.s, eps) {
        (Some(s), _) => s,
        (None, Some(e)) => e.block_count(),
        (None, None) => return Err(Failure::usage("give --s or --eps")),
    };
    if s == 0 {
        return Err(Failure::usage("eps is too large for even one block"));
    }
    let eps = match eps {
        Some(e) => e,
        None => Epsilon::for_blocks(s)?,
    };
    let inst = Instance::generate(s, args.seed, &options(dense_limit))?;
    let mode = match args.mode {
        VerifyMode::Exhaustive => LowerBoundMode::Exhaustive,
        VerifyMode::Structured => LowerBoundMode::Structured {
            codim_max: args.codim_max,
            random_per_dim: args.random_per_dim,
            seed: args.seed,
        },
        VerifyMode::Sampled => LowerBoundMode::Structured {
            codim_max: 0,
            random_per_dim: args.random_per_dim,
            seed: args.seed,
        },
    };
    let summary = exhaustive_lowerbound_check(&inst, eps, mode);
    let summary = summary?;
    let mut body = report::lowerbound(&summary, witness::IDENTITY_TOLERANCE);
    body["seed"] = json!(args.seed);
    body["epsilon_max"] = report::epsilon(inst.epsilon_max());
    let all_hold = body["claims"]
        .as_object()
        .unwrap()
        .values()
        .all(|v| v.as_bool() == Some(true));
    let binding = eps.ratio() <= inst.epsilon_max().ratio();
    body["binding"] = json!(binding);
    let json = report::render("verify-lowerbound", body);
    if binding && !all_hold {
        return Err(Failure {
            code: 1,
            message: "a claim failed verification; see the report".into(),
            report: Some((json, args.out.clone())),
        });
    }
    Ok(Output {
        json,
        path: args.out.clone(),
        code: 0,
    })
}

fn spanning(args: &SpanningArgs, dense_limit: u32) -> Outcome {
    let rho = parse_eps(&args.rho)?;
    let count = args.count.unwrap_or(8 * args.d);
    let opts = GenerationOptions {
        dense_limit: match args.mode {
            VerifyMode::Sampled => 0,
            _ => dense_limit,
        },
        max_attempts: args.max_attempts,
        hyperplane_samples: args.samples,
    };
    if args.mode == VerifyMode::Exhaustive && args.d > dense_limit as usize {
        f2reglab::gf2::check_dense(args.d, dense_limit)?;
    }
    let fam = generate_spanning_family(args.d, count, rho, args.seed, &opts)?;
    let body = json!({
        "d": args.d,
        "count": count,
        "rho": report::epsilon(rho),
        "bound": f2reglab::exact::ratio_string(
            (rho.numer() as u64) * count as u64,
            rho.denom() as u64,
        ),
        "seed": args.seed,
        "default_rho": rho == three_quarters(),
        "family": report::spanning_family(&fam),
    });
    Ok(Output {
        json: report::render("spanning", body),
        path: args.out.clone(),
        code: 0,
    })
}

fn round(args: &RoundArgs, dense_limit: u32) -> Outcome {
    let tau = parse_eps(&args.tau)?;
    let loaded = load(&args.source, dense_limit)?;
    let f = &loaded.table;
    let s = round_to_binary(f, args.round_seed)?;
    if let Some(path) = &args.out {
        table_file::write_table(path, &s)?;
    }
    let fams = DeviationFamilies {
        codim_max: args.codim_max,
        random_pairs: args.pairs,
        random_codim_max: args.pair_codim_max,
        seed: args.round_seed,
    };
    let rep = deviation_report(f, &s, tau, fams)?;
    let body = json!({
        "source": loaded.origin,
        "round_seed": args.round_seed,
        "rounded_mean": s.mean(),
        "report": report::rounding(&rep),
    });
    Ok(Output {
        json: report::render("round", body),
        path: args.report.clone(),
        code: 0,
    })
}

fn bench(args: &BenchArgs, dense_limit: u32) -> Outcome {
    use rand::Rng;
    f2reglab::gf2::check_dense(args.n, dense_limit)?;
    let mut rng = f2reglab::rng::stream(args.seed, f2reglab::rng::Purpose::Experiments, 0);
    let values: Vec<f64> = (0..1u64 << args.n).map(|_| rng.gen()).collect();
    let f = FunctionTable::new(args.n, values)?;
    let mut times = Vec::with_capacity(args.reps);
    let mut checksum = 0.0;
    for _ in 0..args.reps.max(1) {
        let start = Instant::now();
        let spec = wht_full(&f);
        times.push(start.elapsed().as_secs_f64());
        checksum = spec.iter().map(|v| v * v).sum::<f64>();
    }
    times.sort_by(f64::total_cmp);
    let body = json!({
        "n": args.n,
        "reps": times.len(),
        "seconds_min": times[0],
        "seconds_median": times[times.len() / 2],
        "parseval_gap": (checksum - f.mean_square()).abs(),
    });
    Ok(Output {
        json: report::render("bench-wht", body),
        path: args.out.clone(),
        code: 0,
    })
}

fn dispatch(cli: &Cli) -> Outcome {
    let limit = cli.dense_limit;
    match &cli.command {
        Command::Gen(a) => gen(a, limit),
        Command::Eval(a) => eval(a, limit),
        Command::Check(a) => check(a, limit),
        Command::Decompose(a) => decompose_cmd(a, limit),
        Command::VerifyLowerbound(a) => verify_lowerbound(a, limit),
        Command::Spanning(a) => spanning(a, limit),
        Command::Round(a) => round(a, limit),
        Command::BenchWht(a) => bench(a, limit),
    }
}

fn emit(json: &str, path: Option<&Path>, stdout: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => write_file(p, json.as_bytes()),
        None => stdout
            .write_all(json.as_bytes())
            .map_err(|e| Failure::usage(format!("stdout: {e}"))),
    }
}

fn threads(cli: &Cli) -> Option<usize> {
    cli.threads.or_else(|| {
        std::env::var("F2REGLAB_THREADS")
            .ok()
            .and_then(|v| v.trim().parse().ok())
    })
}

/// Runs one command line, writing the report and diagnostics to the given streams.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 {
                write!(stdout, "{e}")
            } else {
                write!(stderr, "{e}")
            };
            return code;
        }
    };
    let outcome = match threads(&cli).filter(|&t| t > 0) {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(Failure::usage(format!("thread pool: {e}"))),
        },
        None => dispatch(&cli),
    };
    let result = outcome.and_then(|out| {
        emit(&out.json, out.path.as_deref(), stdout)?;
        Ok(out.code)
    });
    match result {
        Ok(code) => code,
        Err(failure) => {
            if let Some((json, path)) = &failure.report {
                if let Err(e) = emit(json, path.as_deref(), stdout) {
                    let _ = writeln!(stderr, "error: {}", e.message);
                }
            }
            let _ = writeln!(stderr, "error: {}", failure.message);
            failure.code
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout(), &mut std::io::stderr())
}
