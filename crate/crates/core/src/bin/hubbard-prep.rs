use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hubbard_prep::error::{Error, Result};
use hubbard_prep::experiment::{self, ExperimentConfig, LatticeSelector, Mode};
use hubbard_prep::lattice::Boundary;
use hubbard_prep::spin::Spin;

#[derive(Parser)]
#[command(version, about = "Hubbard ground-state preparation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize every (S, L) pair and write sweep.csv.
    Sweep(Options),
    /// Exact spin-sector gaps, pure and optionally disordered.
    Gaps(Options),
    /// One optimization with trace and parameters.
    Run(Options),
    /// Write a CIRCUIT v1 file from a parameter file or a fresh run.
    Export(Options),
}

#[derive(Clone, Copy, ValueEnum)]
enum LatticeKind {
    Betts8,
    Ladder,
}

#[derive(Args)]
struct Options {
    /// Experiment config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    lattice: Option<LatticeKind>,
    /// Lattice spec file (TOML), instead of a built-in geometry.
    #[arg(long, conflicts_with = "lattice")]
    lattice_file: Option<PathBuf>,
    /// Ladder length.
    #[arg(long)]
    length: Option<usize>,
    #[arg(long)]
    boundary: Option<Boundary>,
    #[arg(short = 'u', long)]
    u: Option<f64>,
    /// Total spin; repeat or comma-separate for several sectors.
    #[arg(long = "spin", value_delimiter = ',')]
    spins: Vec<f64>,
    /// Layer counts, e.g. `1-20` or `4,8,12`.
    #[arg(long)]
    layers: Option<String>,
    /// Enable disorder with this realization seed.
    #[arg(long)]
    disorder_seed: Option<u64>,
    #[arg(long)]
    hopping_std: Option<f64>,
    #[arg(long)]
    u_min: Option<f64>,
    #[arg(long)]
    u_max: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    grad_tol: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    init_amplitude: Option<f64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Parameter file for `export`.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Also write circuit.txt after `run`.
    #[arg(long)]
    circuit: bool,
}

fn parse_layers(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidConfig(format!("cannot parse layer list `{text}`"));
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    Ok(out)
}

fn build_config(mode: Mode, o: Options) -> Result<ExperimentConfig> {
    let mut cfg = match &o.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let lattice = LatticeSelector::Betts8 {};
            ExperimentConfig::new(mode, lattice, o.output.clone().unwrap_or_else(|| PathBuf::from("out")))
        }
    };
    cfg.mode = mode;
    if let Some(path) = o.lattice_file {
        cfg.lattice = LatticeSelector::File { path };
    }
    match o.lattice {
        Some(LatticeKind::Betts8) => cfg.lattice = LatticeSelector::Betts8 {},
        Some(LatticeKind::Ladder) => {
            cfg.lattice = LatticeSelector::Ladder {
                legs: 2,
                length: o.length.unwrap_or(4),
                boundary: o.boundary.unwrap_or(Boundary::Open),
            }
        }
        None => {
            if let LatticeSelector::Ladder { length, boundary, .. } = &mut cfg.lattice {
                *length = o.length.unwrap_or(*length);
                *boundary = o.boundary.unwrap_or(*boundary);
            } else if o.length.is_some() || o.boundary.is_some() {
                return Err(Error::InvalidConfig("--length and --boundary apply to ladders only".into()));
            }
        }
    }
    cfg.u = o.u.or(cfg.u);
    if !o.spins.is_empty() {
        cfg.spins = o.spins.iter().map(|&s| Spin::from_f64(s)).collect::<Result<_>>()?;
    }
    if let Some(text) = &o.layers {
        cfg.layers = parse_layers(text)?;
    }
    let wants_disorder = o.disorder_seed.is_some() || o.hopping_std.is_some() || o.u_min.is_some() || o.u_max.is_some();
    if wants_disorder {
        let mut d = cfg.disorder.unwrap_or_default();
        d.seed = o.disorder_seed.unwrap_or(d.seed);
        d.hopping_std = o.hopping_std.unwrap_or(d.hopping_std);
        d.u_min = o.u_min.unwrap_or(d.u_min);
        d.u_max = o.u_max.unwrap_or(d.u_max);
        cfg.disorder = Some(d);
    }
    let opt = &mut cfg.optimizer;
    opt.seed = o.seed.unwrap_or(opt.seed);
    opt.grad_tol = o.grad_tol.unwrap_or(opt.grad_tol);
    opt.max_iterations = o.max_iterations.unwrap_or(opt.max_iterations);
    opt.restarts = o.restarts.unwrap_or(opt.restarts);
    opt.init_amplitude = o.init_amplitude.unwrap_or(opt.init_amplitude);
    if let Some(out) = o.output {
        cfg.output_dir = out;
    }
    cfg.params = o.params.or(cfg.params);
    cfg.export_circuit |= o.circuit;
    Ok(cfg)
}

fn exit_code(err: &Error) -> u8 {
    match err.category() {
        "invalid-config" | "parse" => 2,
        "io" => 3,
        "invalid-geometry" | "invalid-sector" | "invalid-spin" | "incompatible-basis" => 4,
        "parameter-layout" | "dimension-mismatch" | "jw-adjacency" => 5,
        "solver-failure" | "insufficient-k" => 6,
        _ => 7,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, options) = match cli.command {
        Command::Sweep(o) => (Mode::Sweep, o),
        Command::Gaps(o) => (Mode::GapTable, o),
        Command::Run(o) => (Mode::SingleRun, o),
        Command::Export(o) => (Mode::ExportCircuit, o),
    };
    match build_config(mode, options).and_then(|cfg| experiment::run(&cfg)) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error[{}]: {err}", err.category());
            ExitCode::from(exit_code(&err))
        }
    }
}
