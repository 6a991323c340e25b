//! Command-line front end: `analyze`, `simulate walk|sde` and `compare`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{build_hexagonal_heisenberg, GraphSpec, HexParams, QuotientGraph, TransitionKernel};
use crate::harmonic::{analyze, Analysis, Gauge, RealizationFamily};
use crate::simulate::{
    parse_grid, read_samples, sample_diffusion, sample_walk, write_samples, DiffusionConfig, WalkConfig, VERSION,
};
use crate::stats::{compare, write_ecdf, CompareOptions, KS_C_1PCT};

#[derive(Debug, Parser)]
#[command(name = "nilwalk", version, about = "Random walks on nilpotent covering graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Invariant measure, homological direction, Albanese metric, β and drift.
    Analyze(AnalyzeArgs),
    /// Sample scaled random walks or the limiting diffusion.
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Compare two sample files written by `simulate`.
    Compare(CompareArgs),
}

#[derive(Debug, Subcommand)]
pub enum SimulateCommand {
    Walk(WalkArgs),
    Sde(SdeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Graph-spec JSON file.
    #[arg(long, conflicts_with = "preset")]
    pub graph: Option<PathBuf>,
    /// Built-in graph; `hex` is the Heisenberg hexagonal lattice.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub gamma: f64,
    #[arg(long = "alpha-prime", default_value_t = 1.0 / 3.0)]
    pub alpha_prime: f64,
    #[arg(long = "beta-prime", default_value_t = 1.0 / 3.0)]
    pub beta_prime: f64,
    #[arg(long = "gamma-prime", default_value_t = 1.0 / 3.0)]
    pub gamma_prime: f64,
    /// Fix the layer-1 gauge by `Σ m(x) φ(x) = c` (comma-separated `c`).
    #[arg(long = "gauge-mean", conflicts_with = "gauge_anchor")]
    pub gauge_mean: Option<String>,
    /// Fix the layer-1 gauge by `φ(vertex) = 0`.
    #[arg(long = "gauge-anchor")]
    pub gauge_anchor: Option<String>,
    /// Gram–Schmidt order of the layer-1 basis, 1-based, e.g. `2,1`.
    #[arg(long = "frame-order")]
    pub frame_order: Option<String>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
    /// Also write `analysis.json` into this directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = 10_000)]
    pub paths: usize,
    /// Comma-separated times in [0, 1] (fractions like `1/4` allowed), or `k/m`.
    #[arg(long, default_value = "0.5,1")]
    pub grid: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct WalkArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Number of walk steps; the scale is `n^{-1/2}`.
    #[arg(long, default_value_t = 1024)]
    pub n: u64,
    /// Start vertex name (default: the first vertex).
    #[arg(long)]
    pub start: Option<String>,
    /// Start every walk at the identity instead of at `Φ(x*)`.
    #[arg(long = "subtract-start")]
    pub subtract_start: bool,
}

#[derive(Debug, Args)]
pub struct SdeArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Euler steps on [0, 1].
    #[arg(long, default_value_t = 1024)]
    pub steps: usize,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long = "ks-c", default_value_t = KS_C_1PCT)]
    pub ks_c: f64,
    #[arg(long = "max-z", default_value_t = 4.0)]
    pub max_z: f64,
    /// Fit the moment-scaling exponent of this power on both inputs.
    #[arg(long = "fit-power")]
    pub fit_power: Option<f64>,
    /// Also write `ecdf.csv`.
    #[arg(long)]
    pub ecdf: bool,
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("{what}: bad number '{p}'")))
        })
        .collect()
}

impl SourceArgs {
    pub fn load(&self) -> Result<(QuotientGraph, TransitionKernel)> {
        match (&self.graph, &self.preset) {
            (Some(path), None) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
                GraphSpec::from_json(&text)?.build()
            }
            (None, Some(p)) if p == "hex" => build_hexagonal_heisenberg(&HexParams::new(
                self.alpha,
                self.beta,
                self.gamma,
                self.alpha_prime,
                self.beta_prime,
                self.gamma_prime,
            )?),
            (None, Some(p)) => Err(Error::InvalidParameter(format!("unknown preset '{p}'"))),
            _ => Err(Error::InvalidParameter("give exactly one of --graph or --preset".into())),
        }
    }

    pub fn gauge(&self, graph: &QuotientGraph) -> Result<Gauge> {
        if let Some(c) = &self.gauge_mean {
            return Ok(Gauge::Mean(parse_list(c, "--gauge-mean")?));
        }
        if let Some(v) = &self.gauge_anchor {
            return graph
                .vertex_index(v)
                .map(Gauge::Anchor)
                .ok_or_else(|| Error::InvalidParameter(format!("unknown vertex '{v}'")));
        }
        Ok(Gauge::default())
    }

    pub fn frame_order(&self) -> Result<Option<Vec<usize>>> {
        let Some(s) = &self.frame_order else {
            return Ok(None);
        };
        s.split(',')
            .map(|p| match p.trim().parse::<usize>() {
                Ok(i) if i >= 1 => Ok(i - 1),
                _ => Err(Error::Parse(format!("--frame-order: bad index '{p}'"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    fn family(&self) -> Result<RealizationFamily> {
        let (graph, kernel) = self.load()?;
        let gauge = self.gauge(&graph)?;
        RealizationFamily::new(graph, &kernel, gauge)
    }
}

#[derive(Serialize)]
struct AnalyzeOutput<'a> {
    version: &'a str,
    #[serde(flatten)]
    analysis: &'a Analysis,
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<String> {
    let (graph, kernel) = args.source.load()?;
    let gauge = args.source.gauge(&graph)?;
    let order = args.source.frame_order()?;
    let analysis = analyze(&graph, &kernel, args.eps, gauge, order.as_deref())?;
    let text = serde_json::to_string_pretty(&AnalyzeOutput {
        version: VERSION,
        analysis: &analysis,
    })?;
    if let Some(dir) = &args.out {
        ensure_dir(dir)?;
        fs::write(dir.join("analysis.json"), format!("{text}\n"))?;
    }
    Ok(text)
}

fn cmd_walk(args: &WalkArgs) -> Result<String> {
    let fam = args.source.family()?;
    let mut cfg = WalkConfig::new(args.n, parse_grid(&args.run.grid)?, args.run.paths, args.run.seed);
    cfg.workers = args.run.workers;
    cfg.subtract_start = args.subtract_start;
    if let Some(v) = &args.start {
        cfg.start_vertex = fam
            .graph()
            .vertex_index(v)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown vertex '{v}'")))?;
    }
    let samples = sample_walk(&fam, &cfg)?;
    ensure_dir(&args.run.out)?;
    let path = args.run.out.join("walk.csv");
    write_samples(&samples, &path)?;
    Ok(path.display().to_string())
}

fn cmd_sde(args: &SdeArgs) -> Result<String> {
    let fam = args.source.family()?;
    let order = args.source.frame_order()?;
    let generator = fam.generator(order.as_deref())?;
    let mut cfg = DiffusionConfig::new(args.steps, parse_grid(&args.run.grid)?, args.run.paths, args.run.seed);
    cfg.workers = args.run.workers;
    let samples = sample_diffusion(fam.graph().algebra(), &generator.frame, &generator.drift, &cfg)?;
    ensure_dir(&args.run.out)?;
    let path = args.run.out.join("sde.csv");
    write_samples(&samples, &path)?;
    Ok(path.display().to_string())
}

fn cmd_compare(args: &CompareArgs) -> Result<String> {
    let a = read_samples(&args.a)?;
    let b = read_samples(&args.b)?;
    let opts = CompareOptions {
        ks_c: args.ks_c,
        max_mean_z: args.max_z,
        fit_power: args.fit_power,
    };
    let report = compare(&a, &b, &opts)?;
    ensure_dir(&args.out)?;
    let text = serde_json::to_string_pretty(&report)?;
    fs::write(args.out.join("report.json"), format!("{text}\n"))?;
    if args.ecdf {
        write_ecdf(&a, &b, &args.out.join("ecdf.csv"))?;
    }
    Ok(text)
}

pub fn execute(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Simulate(SimulateCommand::Walk(a)) => cmd_walk(a),
        Command::Simulate(SimulateCommand::Sde(a)) => cmd_sde(a),
        Command::Compare(a) => cmd_compare(a),
    }
}

#[derive(Serialize)]
struct ErrorOutput<'a> {
    error: &'a str,
    message: String,
    exit_code: i32,
    version: &'a str,
}

fn error_json(kind: &str, message: String, exit_code: i32) -> String {
    serde_json::to_string(&ErrorOutput {
        error: kind,
        message,
        exit_code,
        version: VERSION,
    })
    .expect("error output serializes")
}

/// Parse arguments, run, print the result to stdout or a JSON error to
/// stderr, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprintln!("{}", error_json("usage", e.to_string().trim_end().to_string(), 1));
            return 1;
        }
    };
    match execute(&cli) {
        Ok(text) => {
            // A closed stdout (e.g. piped into `head`) is not an error.
            let _ = writeln!(std::io::stdout(), "{text}");
            0
        }
        Err(e) => {
            let code = e.exit_code();
            eprintln!("{}", error_json(e.kind(), e.to_string(), code));
            code
        }
    }
}
