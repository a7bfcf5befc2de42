mod config;

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Parser, Subcommand, ValueEnum};
use ktr_core::agents::Role;
use ktr_core::bridge::AgentFailure;
use ktr_core::eval::{
    evaluate_instances, generate_batch, profile_agent, specialization_advantage, DifficultyRange,
    EvalError, NflScenario, SystemReport, DEFAULT_SAMPLES_PER_BAND,
};
use ktr_core::orchestrator::Pipeline;
use ktr_core::problem::Instance;
use serde::Serialize;

use config::Manifest;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(String),
    Io(String),
    Endpoint(String),
    Other(anyhow::Error),
}

impl CliError {
    pub fn io(path: &Path, e: io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Other(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Config(_) => 3,
            CliError::Io(_) => 4,
            CliError::Endpoint(_) => 5,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Config(m) => write!(f, "config: {m}"),
            CliError::Io(m) => write!(f, "i/o: {m}"),
            CliError::Endpoint(m) => write!(f, "endpoint: {m}"),
            CliError::Other(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::MissingRole(_) | EvalError::Bridge(_) => CliError::Config(e.to_string()),
            other => CliError::Other(anyhow!(other)),
        }
    }
}

#[derive(Parser)]
#[command(name = "ktr", version, about = "Run, profile and score agent pipelines on knapsack and assignment problems")]
struct Cli {
    /// Seed for generators and error models [default: config value or 0]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file [default: stdout]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads [default: config value or logical cores]
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// TOML manifest of backends per role
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Problem {
    Ksp,
    Tap,
}

impl Problem {
    fn pipeline(self) -> Pipeline {
        match self {
            Problem::Ksp => Pipeline::Ksp,
            Problem::Tap => Pipeline::Tap,
        }
    }

    fn accepts(self, inst: &Instance) -> bool {
        matches!((self, inst), (Problem::Ksp, Instance::Knapsack(_)) | (Problem::Tap, Instance::Assignment(_)))
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Write seeded instances as JSON lines
    Generate {
        #[arg(long)]
        problem: Problem,
        /// Sizes such as `3-8` or `3,5,9-11`
        #[arg(long, value_parser = parse_sizes)]
        sizes: Sizes,
        /// Instances per size
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
    /// Exact optimum for every instance in a JSON-lines file
    Solve {
        #[arg(long)]
        problem: Problem,
        input: PathBuf,
    },
    /// Run a pipeline over an instance file and score it
    Run {
        #[arg(long)]
        pipeline: Pipeline,
        input: PathBuf,
        /// Directory for one JSON trace per run
        #[arg(long)]
        trace_dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Loop bound for assignment pipelines [default: N squared]
        #[arg(long)]
        max_iters: Option<u64>,
    },
    /// Per-band accuracy of one role's backend, as CSV
    Profile {
        #[arg(long)]
        role: Role,
        /// Difficulty bands such as `1-8,9-16,25+`
        #[arg(long, value_delimiter = ',', required = true, value_parser = parse_band)]
        bands: Vec<DifficultyRange>,
        /// Samples per band
        #[arg(long, default_value_t = DEFAULT_SAMPLES_PER_BAND)]
        samples: usize,
    },
    /// Whether a specialist beats a general model under a prior
    Nfl {
        #[arg(long)]
        eps0: f64,
        #[arg(long)]
        eps1: f64,
        #[arg(long)]
        eps2: f64,
        #[arg(long)]
        p: f64,
    },
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("`{t}` is not a size"));
    let (lo, hi) = match s.split_once('-') {
        Some((a, b)) => (num(a)?, num(b)?),
        None => (num(s)?, num(s)?),
    };
    if lo == 0 || lo > hi {
        return Err(format!("bad size range `{s}`"));
    }
    Ok((lo, hi))
}

#[derive(Debug, Clone)]
struct Sizes(Vec<usize>);

fn parse_sizes(s: &str) -> Result<Sizes, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let (lo, hi) = parse_range(part)?;
        out.extend(lo..=hi);
    }
    Ok(Sizes(out))
}

fn parse_band(s: &str) -> Result<DifficultyRange, String> {
    if let Some(lo) = s.strip_suffix('+') {
        let lo = lo.trim().parse().map_err(|_| format!("bad band `{s}`"))?;
        return Ok(DifficultyRange { lo, hi: None });
    }
    let (lo, hi) = parse_range(s).map_err(|_| format!("bad band `{s}`"))?;
    Ok(DifficultyRange::new(lo as u64, hi as u64))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            }
            fs::write(path, text).map_err(|e| CliError::io(path, e))
        }
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

/// Instances with their 1-based line numbers.
type Numbered = Vec<(usize, Instance)>;

/// Parsed lines plus one message per bad line.
fn read_instances(path: &Path, problem: Option<Problem>) -> Result<(Numbered, Vec<String>), CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let (mut good, mut bad) = (Vec::new(), Vec::new());
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Instance>(&line) {
            Ok(inst) if problem.is_none_or(|p| p.accepts(&inst)) => good.push((i + 1, inst)),
            Ok(inst) => bad.push(format!("line {}: instance `{}` is for the other problem", i + 1, inst.id())),
            Err(e) => bad.push(format!("line {}: {e}", i + 1)),
        }
    }
    Ok((good, bad))
}

#[derive(Serialize)]
struct Answer<'a> {
    id: &'a str,
    optimum: u64,
}

fn generate(problem: Problem, sizes: &[usize], count: usize, seed: u64) -> Result<String, CliError> {
    let batch = generate_batch(problem.pipeline(), sizes, count, seed)?;
    let mut out = String::new();
    for inst in &batch {
        let _ = writeln!(out, "{}", serde_json::to_string(inst).expect("instances serialize"));
    }
    Ok(out)
}

fn solve(problem: Problem, input: &Path) -> Result<String, CliError> {
    let (good, bad) = read_instances(input, Some(problem))?;
    let mut out = String::new();
    for (line, inst) in &good {
        match inst.exact_optimum() {
            Ok(optimum) => {
                let a = Answer { id: inst.id(), optimum };
                let _ = writeln!(out, "{}", serde_json::to_string(&a).expect("answers serialize"));
            }
            Err(e) => eprintln!("line {line}: {e}"),
        }
    }
    for msg in &bad {
        eprintln!("{msg}");
    }
    Ok(out)
}

fn safe_name(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' }).collect()
}

struct RunArgs<'a> {
    pipeline: Pipeline,
    input: &'a Path,
    trace_dir: Option<&'a Path>,
    format: Format,
    max_iters: Option<u64>,
}

fn run(args: RunArgs, manifest: &Manifest, seed: u64, out: Option<&Path>) -> Result<(), CliError> {
    let problem = if args.pipeline.is_knapsack() { Problem::Ksp } else { Problem::Tap };
    let (good, bad) = read_instances(args.input, Some(problem))?;
    if let Some(first) = bad.first() {
        return Err(CliError::Other(anyhow!("{} malformed instance line(s); {first}", bad.len())));
    }
    let plan = manifest.plan(args.pipeline, seed)?;
    let instances: Vec<Instance> = good.into_iter().map(|(_, i)| i).collect();
    let outcomes = evaluate_instances(args.pipeline, &plan, &instances, seed, args.max_iters)?;

    if let Some(dir) = args.trace_dir {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        for (i, o) in outcomes.iter().enumerate() {
            let path = dir.join(format!("{i:06}-{}.json", safe_name(&o.trace.instance_id)));
            fs::write(&path, o.trace.to_json()).map_err(|e| CliError::io(&path, e))?;
        }
    }
    let report = SystemReport::from_outcomes(args.pipeline, &outcomes);
    let text = match args.format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv(),
    };
    emit(out, &text)?;
    eprintln!("{}: {}/{} correct ({:.6})", args.pipeline, report.correct, report.n, report.accuracy);

    let transport = AgentFailure::Transport(String::new()).to_string();
    let unreachable = outcomes
        .iter()
        .flat_map(|o| &o.trace.steps)
        .filter_map(|s| s.error.as_deref())
        .find(|e| e.starts_with(&transport));
    match unreachable {
        Some(e) => Err(CliError::Endpoint(e.to_string())),
        None => Ok(()),
    }
}

fn profile(role: Role, bands: &[DifficultyRange], samples: usize, manifest: &Manifest, seed: u64) -> Result<String, CliError> {
    let backend = manifest
        .backend(role, seed)?
        .build(role, 0, None)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let p = profile_agent(role, backend.as_ref(), bands, samples, seed)?;
    Ok(p.to_csv())
}

fn nfl(eps0: f64, eps1: f64, eps2: f64, p: f64) -> Result<String, CliError> {
    let s = NflScenario::new(eps0, eps1, eps2, p).map_err(|e| CliError::Usage(e.to_string()))?;
    let o = specialization_advantage(&s);
    Ok(serde_json::to_string_pretty(&o).expect("outcomes serialize") + "\n")
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let manifest = Manifest::load(cli.config.as_deref())?;
    let seed = cli.seed.or(manifest.seed).unwrap_or(0);
    let jobs = cli.jobs.or(manifest.jobs).unwrap_or(0);
    if jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Other(anyhow!(e)))?;
    }
    let out = cli.out.as_deref();
    match cli.command {
        Command::Generate { problem, sizes, count } => emit(out, &generate(problem, &sizes.0, count, seed)?),
        Command::Solve { problem, input } => emit(out, &solve(problem, &input)?),
        Command::Run { pipeline, input, trace_dir, format, max_iters } => run(
            RunArgs { pipeline, input: &input, trace_dir: trace_dir.as_deref(), format, max_iters },
            &manifest,
            seed,
            out,
        ),
        Command::Profile { role, bands, samples } => emit(out, &profile(role, &bands, samples, &manifest, seed)?),
        Command::Nfl { eps0, eps1, eps2, p } => emit(out, &nfl(eps0, eps1, eps2, p)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ktr: {e}");
            ExitCode::from(e.code())
        }
    }
}
