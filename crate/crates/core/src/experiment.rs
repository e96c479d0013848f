//! Experiment driver: configuration, sweeps, gap tables, single runs and
//! circuit export, each writing into its own output directory.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ansatz::{initial_state, AnsatzProgram, CompiledAnsatz, ParameterVector};
use crate::circuit::{self, GateList};
use crate::error::{Error, Result};
use crate::lattice::{apply_disorder, build_betts8, build_ladder, Boundary, DisorderConfig, LatticeSpec};
use crate::optimize::{metrics, minimize, write_trace_csv, OptimizationConfig, OptimizationResult, VariationalProblem};
use crate::solver::{spin_sector_gap, write_gap_csv, GapRow, SolverOptions, SpinSector};
use crate::spin::Spin;
use crate::state::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Sweep,
    GapTable,
    SingleRun,
    ExportCircuit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum LatticeSelector {
    Betts8 {},
    Ladder {
        #[serde(default = "two")]
        legs: usize,
        length: usize,
        boundary: Boundary,
    },
    File {
        path: PathBuf,
    },
}

fn two() -> usize {
    2
}

impl LatticeSelector {
    pub fn build(&self) -> Result<LatticeSpec> {
        match self {
            LatticeSelector::Betts8 {} => Ok(build_betts8()),
            LatticeSelector::Ladder { legs, length, boundary } => build_ladder(*legs, *length, *boundary),
            LatticeSelector::File { path } => LatticeSpec::load(path),
        }
    }
}

/// Everything needed to reproduce one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub lattice: LatticeSelector,
    /// Uniform on-site interaction; `None` keeps the lattice's own values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disorder: Option<DisorderConfig>,
    #[serde(default = "default_spins")]
    pub spins: Vec<Spin>,
    #[serde(default = "default_layers")]
    pub layers: Vec<usize>,
    #[serde(default)]
    pub optimizer: OptimizationConfig,
    pub output_dir: PathBuf,
    /// Parameter file used by circuit export instead of a fresh optimization.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<PathBuf>,
    /// Also write a circuit file after a single run.
    #[serde(default)]
    pub export_circuit: bool,
}

fn default_spins() -> Vec<Spin> {
    vec![Spin::integer(0)]
}

pub fn default_layers() -> Vec<usize> {
    (1..=20).collect()
}

impl ExperimentConfig {
    pub fn new(mode: Mode, lattice: LatticeSelector, output_dir: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            mode,
            lattice,
            u: None,
            disorder: None,
            spins: default_spins(),
            layers: default_layers(),
            optimizer: OptimizationConfig::default(),
            output_dir: output_dir.into(),
            params: None,
            export_circuit: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(u) = self.u {
            if !(u >= 0.0) {
                return Err(Error::InvalidConfig(format!("U must be non-negative, got {u}")));
            }
        }
        if let Some(d) = &self.disorder {
            d.validate()?;
        }
        self.optimizer.validate()?;
        if self.spins.is_empty() {
            return Err(Error::InvalidConfig("spin list is empty".into()));
        }
        if self.layers.contains(&0) {
            return Err(Error::InvalidConfig("layer counts must be positive".into()));
        }
        match self.mode {
            Mode::Sweep if self.layers.is_empty() => Err(Error::InvalidConfig("sweep needs at least one layer count".into())),
            Mode::SingleRun | Mode::ExportCircuit if self.spins.len() != 1 => {
                Err(Error::InvalidConfig("single runs take exactly one spin".into()))
            }
            Mode::SingleRun if self.layers.len() != 1 => Err(Error::InvalidConfig("single runs take exactly one layer count".into())),
            Mode::ExportCircuit if self.params.is_none() && self.layers.len() != 1 => Err(Error::InvalidConfig(
                "export without a parameter file takes exactly one layer count".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    /// Lattice with the configured interaction, without disorder.
    pub fn pure_lattice(&self) -> Result<LatticeSpec> {
        let spec = self.lattice.build()?;
        Ok(match self.u {
            Some(u) => spec.with_interaction(u),
            None => spec,
        })
    }

    /// Lattice the experiment actually runs on.
    pub fn lattice(&self) -> Result<LatticeSpec> {
        let pure = self.pure_lattice()?;
        match &self.disorder {
            Some(d) => apply_disorder(&pure, d),
            None => Ok(pure),
        }
    }
}

/// Exact reference data for one spin sector.
pub struct SectorReference {
    pub sector: SpinSector,
    pub energy: f64,
    pub ground: Vec<StateVector>,
}

impl SectorReference {
    pub fn new(spec: &LatticeSpec, spin: Spin) -> Result<Self> {
        let sector = SpinSector::new(spec, spin)?;
        let (energy, ground) = sector.ground(&SolverOptions::default())?;
        Ok(SectorReference { sector, energy, ground })
    }

    pub fn problem(&self, layers: usize) -> Result<VariationalProblem> {
        let basis = self.sector.basis.clone();
        let program = AnsatzProgram::new(basis.n_sites(), layers);
        let psi0 = initial_state(basis.clone(), self.sector.spin)?;
        VariationalProblem::new(CompiledAnsatz::new(program, basis)?, psi0, self.sector.hamiltonian.clone())
    }

    /// Optimizes an `layers`-layer ansatz and scores it against this sector.
    pub fn optimize(&self, layers: usize, cfg: &OptimizationConfig) -> Result<RunOutcome> {
        let mut problem = self.problem(layers)?;
        let result = minimize(&mut problem, cfg)?;
        let psi = problem.final_state(&result.best_params)?;
        let m = metrics(&psi, &self.ground, result.final_energy, self.energy)?;
        Ok(RunOutcome {
            spin: self.sector.spin,
            layers,
            seed: cfg.seed,
            exact_energy: self.energy,
            relative_error: m.relative_error,
            infidelity: m.infidelity,
            result,
        })
    }

    /// Runs up to `starts` independent optimizations with seeds `cfg.seed`,
    /// `cfg.seed + 1`, ... The first run with infidelity at most `target` is
    /// returned; otherwise the one with the lowest energy.
    pub fn optimize_multistart(
        &self,
        layers: usize,
        cfg: &OptimizationConfig,
        starts: usize,
        target: f64,
    ) -> Result<RunOutcome> {
        let mut best: Option<RunOutcome> = None;
        for k in 0..starts.max(1) as u64 {
            let seeded = OptimizationConfig { seed: cfg.seed.wrapping_add(k), ..cfg.clone() };
            let run = self.optimize(layers, &seeded)?;
            if run.infidelity <= target {
                return Ok(run);
            }
            if best.as_ref().is_none_or(|b| run.result.final_energy < b.result.final_energy) {
                best = Some(run);
            }
        }
        Ok(best.expect("at least one start"))
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub spin: Spin,
    pub layers: usize,
    pub seed: u64,
    pub exact_energy: f64,
    pub relative_error: f64,
    pub infidelity: f64,
    pub result: OptimizationResult,
}

impl RunOutcome {
    pub fn parameters(&self, spec: &LatticeSpec) -> Result<ParameterVector> {
        let program = AnsatzProgram::new(spec.n_sites, self.layers);
        ParameterVector::new(&program, spec.name.clone(), self.result.best_params.clone())
    }
}

pub const SWEEP_HEADER: &str =
    "lattice,U,S,L,n_params,final_energy,exact_energy,relative_error,infidelity,iterations,converged,attempts";

fn uniform_u(spec: &LatticeSpec) -> String {
    match spec.onsite_u.first() {
        Some(&u) if spec.onsite_u.iter().all(|&v| v == u) => u.to_string(),
        _ => "site-dependent".into(),
    }
}

fn write_sweep_row(out: &mut impl Write, spec: &LatticeSpec, r: &RunOutcome) -> Result<()> {
    writeln!(
        out,
        "{},{},{},{},{},{:.12},{:.12},{:.6e},{:.6e},{},{},{}",
        spec.name,
        uniform_u(spec),
        r.spin.value(),
        r.layers,
        r.result.best_params.len(),
        r.result.final_energy,
        r.exact_energy,
        r.relative_error,
        r.infidelity,
        r.result.iterations,
        r.result.converged,
        r.result.attempts.len()
    )?;
    Ok(())
}

fn prepare_output(cfg: &ExperimentConfig, spec: &LatticeSpec) -> Result<()> {
    fs::create_dir_all(&cfg.output_dir)?;
    fs::write(cfg.output_dir.join("config.toml"), cfg.to_toml()?)?;
    spec.save(cfg.output_dir.join("lattice.toml"))?;
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a> {
    software: &'a str,
    version: &'a str,
    mode: Mode,
    lattice: &'a str,
    optimizer_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    disorder_seed: Option<u64>,
    files: Vec<String>,
}

fn write_manifest(cfg: &ExperimentConfig, spec: &LatticeSpec, files: &[PathBuf]) -> Result<()> {
    let manifest = Manifest {
        software: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        mode: cfg.mode,
        lattice: &spec.name,
        optimizer_seed: cfg.optimizer.seed,
        disorder_seed: cfg.disorder.map(|d| d.seed),
        files: files
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect(),
    };
    let text = toml::to_string(&manifest).map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(cfg.output_dir.join("manifest.toml"), text)?;
    Ok(())
}

/// Output of [`run_layer_sweep`].
#[derive(Debug)]
pub struct SweepReport {
    pub csv: PathBuf,
    pub rows: Vec<RunOutcome>,
}

/// Optimizes every `(S, L)` combination and writes `sweep.csv` plus one
/// parameter file per row.
pub fn run_layer_sweep(cfg: &ExperimentConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let spec = cfg.lattice()?;
    prepare_output(cfg, &spec)?;
    let csv = cfg.output_dir.join("sweep.csv");
    let mut out = std::io::BufWriter::new(fs::File::create(&csv)?);
    writeln!(out, "{SWEEP_HEADER}")?;
    let mut rows = Vec::new();
    let mut files = vec![csv.clone()];
    for &spin in &cfg.spins {
        let reference = SectorReference::new(&spec, spin).map_err(|e| e.tagged(format!("S={spin}")))?;
        for &layers in &cfg.layers {
            let tag = |e: Error| e.tagged(format!("L={layers}, S={spin}"));
            let run = reference.optimize(layers, &cfg.optimizer).map_err(tag)?;
            write_sweep_row(&mut out, &spec, &run)?;
            out.flush()?;
            let path = cfg.output_dir.join(format!("params_S{}_L{layers}.csv", spin.value()));
            run.parameters(&spec).and_then(|p| p.save(&path)).map_err(tag)?;
            files.push(path);
            rows.push(run);
        }
    }
    write_manifest(cfg, &spec, &files)?;
    Ok(SweepReport { csv, rows })
}

/// Spin-sector gaps of the pure lattice, and of the disordered one when a
/// disorder model is configured. Writes `gaps.csv`.
pub fn run_gap_table(cfg: &ExperimentConfig) -> Result<Vec<GapRow>> {
    cfg.validate()?;
    let pure = cfg.pure_lattice()?;
    let mut lattices = vec![pure.clone()];
    if let Some(d) = &cfg.disorder {
        lattices.push(apply_disorder(&pure, d)?);
    }
    prepare_output(cfg, lattices.last().expect("nonempty"))?;
    let mut rows = Vec::new();
    for spec in &lattices {
        for &spin in &cfg.spins {
            rows.push(spin_sector_gap(spec, spin).map_err(|e| e.tagged(format!("{} S={spin}", spec.name)))?);
        }
    }
    let csv = cfg.output_dir.join("gaps.csv");
    write_gap_csv(&rows, std::io::BufWriter::new(fs::File::create(&csv)?))?;
    write_manifest(cfg, &pure, &[csv])?;
    Ok(rows)
}

#[derive(Debug)]
pub struct SingleReport {
    pub outcome: RunOutcome,
    pub params: PathBuf,
    pub trace: PathBuf,
    pub circuit: Option<PathBuf>,
}

#[derive(Serialize)]
struct ResultFile {
    lattice: String,
    spin: f64,
    layers: usize,
    final_energy: f64,
    exact_energy: f64,
    relative_error: f64,
    infidelity: f64,
    iterations: usize,
    converged: bool,
    attempt_energies: Vec<f64>,
}

/// One optimization with full trace, parameters, a result summary and an
/// optional circuit file.
pub fn run_single(cfg: &ExperimentConfig) -> Result<SingleReport> {
    cfg.validate()?;
    let spec = cfg.lattice()?;
    let (spin, layers) = (cfg.spins[0], cfg.layers[0]);
    prepare_output(cfg, &spec)?;
    let reference = SectorReference::new(&spec, spin)?;
    let outcome = reference.optimize(layers, &cfg.optimizer)?;

    let trace = cfg.output_dir.join("trace.csv");
    write_trace_csv(&outcome.result, Some(outcome.exact_energy), std::io::BufWriter::new(fs::File::create(&trace)?))?;
    let params = cfg.output_dir.join("params.csv");
    outcome.parameters(&spec)?.save(&params)?;
    let summary = ResultFile {
        lattice: spec.name.clone(),
        spin: spin.value(),
        layers,
        final_energy: outcome.result.final_energy,
        exact_energy: outcome.exact_energy,
        relative_error: outcome.relative_error,
        infidelity: outcome.infidelity,
        iterations: outcome.result.iterations,
        converged: outcome.result.converged,
        attempt_energies: outcome.result.attempts.iter().map(|a| a.final_energy).collect(),
    };
    let result = cfg.output_dir.join("result.toml");
    fs::write(&result, toml::to_string(&summary).map_err(|e| Error::Parse(e.to_string()))?)?;

    let mut files = vec![trace.clone(), params.clone(), result];
    let circuit = if cfg.export_circuit {
        let path = cfg.output_dir.join("circuit.txt");
        circuit::compile(&AnsatzProgram::new(spec.n_sites, layers), &outcome.result.best_params, spin)?.save(&path)?;
        files.push(path.clone());
        Some(path)
    } else {
        None
    };
    write_manifest(cfg, &spec, &files)?;
    Ok(SingleReport { outcome, params, trace, circuit })
}

/// Energy of persisted parameters on the configured lattice.
pub fn replay(spec: &LatticeSpec, spin: Spin, params: &ParameterVector) -> Result<f64> {
    if params.n_sites != spec.n_sites {
        return Err(Error::DimensionMismatch { expected: spec.n_sites, found: params.n_sites });
    }
    let sector = SpinSector::new(spec, spin)?;
    let program = params.program();
    let psi0 = initial_state(sector.basis.clone(), spin)?;
    let ansatz = CompiledAnsatz::new(program, sector.basis.clone())?;
    VariationalProblem::new(ansatz, psi0, sector.hamiltonian)?.energy(&params.values)
}

#[derive(Debug)]
pub struct ExportReport {
    pub circuit: PathBuf,
    pub gates: GateList,
    /// `1 - |⟨ansatz|circuit⟩|` when the register was small enough to simulate.
    pub round_trip_error: Option<f64>,
}

/// Largest register checked by simulation during export.
pub const EXPORT_CHECK_QUBITS: usize = 20;

/// Writes `circuit.txt` for persisted parameters, or for a fresh single
/// run when no parameter file is configured.
pub fn run_export(cfg: &ExperimentConfig) -> Result<ExportReport> {
    cfg.validate()?;
    let spec = cfg.lattice()?;
    let spin = cfg.spins[0];
    let params = match &cfg.params {
        Some(path) => ParameterVector::load(path)?,
        None => {
            let single = ExperimentConfig { mode: Mode::SingleRun, export_circuit: false, ..cfg.clone() };
            let report = run_single(&single)?;
            ParameterVector::load(report.params)?
        }
    };
    if params.n_sites != spec.n_sites {
        return Err(Error::DimensionMismatch { expected: spec.n_sites, found: params.n_sites });
    }
    prepare_output(cfg, &spec)?;
    let program = params.program();
    let gates = circuit::compile(&program, &params.values, spin)?;
    let path = cfg.output_dir.join("circuit.txt");
    gates.save(&path)?;

    let round_trip_error = if gates.n_qubits <= EXPORT_CHECK_QUBITS {
        let reread = GateList::load(&path)?;
        let sector = SpinSector::new(&spec, spin)?;
        let (simulated, _) = circuit::restrict_to_sector(&circuit::simulate(&reread)?, sector.basis.clone())?;
        let reference = crate::ansatz::run_ansatz(&program, &params.values, &initial_state(sector.basis, spin)?)?;
        Some(1.0 - reference.inner(&simulated).norm())
    } else {
        None
    };
    write_manifest(cfg, &spec, std::slice::from_ref(&path))?;
    Ok(ExportReport { circuit: path, gates, round_trip_error })
}

/// Dispatches on `cfg.mode` and returns a one-line human summary.
pub fn run(cfg: &ExperimentConfig) -> Result<String> {
    Ok(match cfg.mode {
        Mode::Sweep => {
            let r = run_layer_sweep(cfg)?;
            format!("{} rows written to {}", r.rows.len(), r.csv.display())
        }
        Mode::GapTable => {
            let rows = run_gap_table(cfg)?;
            format!("{} gaps written to {}", rows.len(), cfg.output_dir.join("gaps.csv").display())
        }
        Mode::SingleRun => {
            let r = run_single(cfg)?;
            format!(
                "E = {:.10} (exact {:.10}), infidelity {:.3e}, {} iterations",
                r.outcome.result.final_energy, r.outcome.exact_energy, r.outcome.infidelity, r.outcome.result.iterations
            )
        }
        Mode::ExportCircuit => {
            let r = run_export(cfg)?;
            let check = r.round_trip_error.map_or("not simulated".to_string(), |e| format!("{e:.1e}"));
            format!("{} gates written to {} (round-trip error {check})", r.gates.len(), r.circuit.display())
        }
    })
}
