//! Energy minimization over the ansatz parameters.
//!
//! Gradients come from a single adjoint sweep: run the circuit forward,
//! form `λ = H ψ`, then walk the generators backwards, reading off
//! `∂E/∂θ_m = -2 Im⟨λ_m|G_m|ψ_m⟩` before undoing each gate on both vectors.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzProgram, CompiledAnsatz};
use crate::error::{Error, Result};
use crate::lbfgs::{self, LbfgsOptions, Termination};
use crate::operator::SparseOperator;
use crate::solver::subspace_weight;
use crate::state::StateVector;

/// Imaginary energy components at or above this are reported as errors.
pub const IMAGINARY_TOL: f64 = 1e-10;

/// Energy landscape `E(θ) = ⟨ψ(θ)|H|ψ(θ)⟩` with reusable work buffers.
pub struct VariationalProblem {
    ansatz: CompiledAnsatz,
    psi0: StateVector,
    hamiltonian: SparseOperator,
    psi: Vec<Complex64>,
    lam: Vec<Complex64>,
}

impl VariationalProblem {
    pub fn new(ansatz: CompiledAnsatz, psi0: StateVector, hamiltonian: SparseOperator) -> Result<Self> {
        let dim = ansatz.basis().dim();
        for found in [psi0.dim(), hamiltonian.dim()] {
            if found != dim {
                return Err(Error::DimensionMismatch { expected: dim, found });
            }
        }
        Ok(VariationalProblem {
            ansatz,
            psi0,
            hamiltonian,
            psi: vec![Complex64::default(); dim],
            lam: vec![Complex64::default(); dim],
        })
    }

    pub fn program(&self) -> &AnsatzProgram {
        self.ansatz.program()
    }

    pub fn parameter_count(&self) -> usize {
        self.ansatz.program().parameter_count()
    }

    pub fn basis(&self) -> &Arc<crate::basis::SectorBasis> {
        self.ansatz.basis()
    }

    pub fn hamiltonian(&self) -> &SparseOperator {
        &self.hamiltonian
    }

    pub fn initial_state(&self) -> &StateVector {
        &self.psi0
    }

    pub fn final_state(&self, params: &[f64]) -> Result<StateVector> {
        self.ansatz.run(params, &self.psi0)
    }

    fn forward(&mut self, params: &[f64]) -> Result<()> {
        self.psi.copy_from_slice(self.psi0.amplitudes());
        self.ansatz.apply(params, &mut self.psi)
    }

    fn real_energy(&self) -> Result<f64> {
        let e: Complex64 = crate::state::inner(&self.psi, &self.lam);
        if e.im.abs() >= IMAGINARY_TOL {
            return Err(Error::HermiticityViolation(e.im));
        }
        Ok(e.re)
    }

    pub fn energy(&mut self, params: &[f64]) -> Result<f64> {
        self.forward(params)?;
        self.hamiltonian.apply_complex(&self.psi, &mut self.lam);
        self.real_energy()
    }

    pub fn energy_and_gradient(&mut self, params: &[f64], grad: &mut [f64]) -> Result<f64> {
        if grad.len() != params.len() {
            return Err(Error::ParameterLayout { expected: params.len(), found: grad.len() });
        }
        let e = self.energy(params)?;
        self.ansatz.backward(params, &mut self.psi, &mut self.lam, grad);
        Ok(e)
    }
}

/// `⟨ψ_f|H|ψ_f⟩` for the ansatz output.
pub fn energy(program: &AnsatzProgram, params: &[f64], psi0: &StateVector, h: &SparseOperator) -> Result<f64> {
    let ansatz = CompiledAnsatz::new(*program, psi0.basis().clone())?;
    VariationalProblem::new(ansatz, psi0.clone(), h.clone())?.energy(params)
}

/// Exact gradient of [`energy`] with respect to every parameter.
pub fn gradient(program: &AnsatzProgram, params: &[f64], psi0: &StateVector, h: &SparseOperator) -> Result<Vec<f64>> {
    let ansatz = CompiledAnsatz::new(*program, psi0.basis().clone())?;
    let mut problem = VariationalProblem::new(ansatz, psi0.clone(), h.clone())?;
    let mut grad = vec![0.0; params.len()];
    problem.energy_and_gradient(params, &mut grad)?;
    Ok(grad)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizationConfig {
    /// Start parameters are uniform in `[-init_amplitude, init_amplitude]`.
    pub init_amplitude: f64,
    /// Gradient L2 norm at which a run counts as converged.
    pub grad_tol: f64,
    pub max_iterations: usize,
    pub history_size: usize,
    pub seed: u64,
    /// Extra attempts allowed after a line-search failure.
    pub restarts: usize,
}

impl Default for OptimizationConfig {
    fn default() -> Self {
        OptimizationConfig {
            init_amplitude: 1e-3,
            grad_tol: 1e-3,
            max_iterations: 20_000,
            history_size: 10,
            seed: 0,
            restarts: 3,
        }
    }
}

impl OptimizationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.init_amplitude > 0.0) || !(self.grad_tol > 0.0) || self.max_iterations == 0 || self.history_size == 0 {
            return Err(Error::InvalidConfig(
                "init_amplitude, grad_tol, max_iterations and history_size must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttemptSummary {
    pub final_energy: f64,
    pub iterations: usize,
    pub termination: Termination,
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub best_params: Vec<f64>,
    /// Energy at the start point and after every accepted step of the best attempt.
    pub energy_trace: Vec<f64>,
    pub grad_norm_trace: Vec<f64>,
    pub final_energy: f64,
    pub iterations: usize,
    pub converged: bool,
    pub attempts: Vec<AttemptSummary>,
}

/// L-BFGS minimization from a small random start.
///
/// An attempt that ends in a line-search failure is followed, while restarts
/// remain, by a fresh attempt from its end point plus a new uniform
/// perturbation. The attempt with the lowest final energy is returned.
pub fn minimize(problem: &mut VariationalProblem, cfg: &OptimizationConfig) -> Result<OptimizationResult> {
    cfg.validate()?;
    let n = problem.parameter_count();
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let amp = cfg.init_amplitude;
    let mut start: Vec<f64> = (0..n).map(|_| rng.random_range(-amp..=amp)).collect();
    let opts = LbfgsOptions {
        history: cfg.history_size,
        max_iterations: cfg.max_iterations,
        grad_tol: cfg.grad_tol,
        ..Default::default()
    };
    let mut attempts = Vec::new();
    let mut best: Option<lbfgs::LbfgsReport> = None;
    for _ in 0..=cfg.restarts {
        let report = lbfgs::minimize(|x, g| problem.energy_and_gradient(x, g), start.clone(), &opts)?;
        attempts.push(AttemptSummary {
            final_energy: report.value,
            iterations: report.iterations,
            termination: report.termination,
        });
        let failed = report.termination == Termination::LineSearchFailed;
        start = report.x.iter().map(|x| x + rng.random_range(-amp..=amp)).collect();
        if best.as_ref().is_none_or(|b| report.value < b.value) {
            best = Some(report);
        }
        if !failed {
            break;
        }
    }
    let best = best.expect("at least one attempt");
    Ok(OptimizationResult {
        best_params: best.x,
        energy_trace: best.trace.iter().map(|t| t.0).collect(),
        grad_norm_trace: best.trace.iter().map(|t| t.1).collect(),
        final_energy: best.value,
        iterations: best.iterations,
        converged: best.termination == Termination::GradientTolerance,
        attempts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub relative_error: f64,
    pub infidelity: f64,
}

/// Relative energy error `(E_gs - E) / E_gs` and infidelity against an
/// orthonormal ground subspace.
pub fn metrics(psi: &StateVector, ground: &[StateVector], energy: f64, e_gs: f64) -> Result<Metrics> {
    if e_gs == 0.0 {
        return Err(Error::UndefinedMetric("ground-state energy is zero".into()));
    }
    for g in ground {
        if g.dim() != psi.dim() {
            return Err(Error::DimensionMismatch { expected: psi.dim(), found: g.dim() });
        }
    }
    Ok(Metrics {
        relative_error: (e_gs - energy) / e_gs,
        infidelity: 1.0 - subspace_weight(ground, psi.amplitudes()),
    })
}

/// Convergence trace as CSV: `iteration,energy,grad_norm,relative_error`.
///
/// `relative_error` is left empty when no reference energy is given.
pub fn write_trace_csv(result: &OptimizationResult, e_gs: Option<f64>, mut out: impl Write) -> Result<()> {
    writeln!(out, "iteration,energy,grad_norm,relative_error")?;
    for (i, (e, g)) in result.energy_trace.iter().zip(&result.grad_norm_trace).enumerate() {
        match e_gs {
            Some(r) => writeln!(out, "{i},{e:.16e},{g:.6e},{:.6e}", (r - e) / r)?,
            None => writeln!(out, "{i},{e:.16e},{g:.6e},")?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::initial_state;
    use crate::basis::SectorBasis;
    use crate::lattice::{Boundary, Edge, LatticeSpec};
    use crate::operator::build_hubbard;
    use crate::spin::Spin;

    fn dimer_problem(layers: usize) -> VariationalProblem {
        let spec = LatticeSpec::new("dimer", 2, vec![Edge(0, 1, 1.0)], vec![8.0; 2], vec![0, 1], Boundary::Open).unwrap();
        let basis = Arc::new(SectorBasis::enumerate(2, 1, 1).unwrap());
        let h = build_hubbard(&spec, &basis).unwrap();
        let psi0 = initial_state(basis.clone(), Spin::integer(0)).unwrap();
        let ansatz = CompiledAnsatz::new(AnsatzProgram::new(2, layers), basis).unwrap();
        VariationalProblem::new(ansatz, psi0, h).unwrap()
    }

    #[test]
    fn zero_parameters_give_initial_energy() {
        let mut p = dimer_problem(1);
        assert_eq!(p.energy(&[0.0; 3]).unwrap(), 8.0);
    }

    #[test]
    fn dimer_reaches_ground_energy() {
        let mut p = dimer_problem(2);
        let cfg = OptimizationConfig { grad_tol: 1e-9, ..Default::default() };
        let r = minimize(&mut p, &cfg).unwrap();
        assert!(r.converged);
        assert!((r.final_energy - (4.0 - 2.0 * 5f64.sqrt())).abs() < 1e-6);
        assert_eq!(*r.energy_trace.last().unwrap(), r.final_energy);
        assert_eq!(r.energy_trace.len(), r.grad_norm_trace.len());
        assert!(r.energy_trace.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let cfg = OptimizationConfig { grad_tol: 1e-8, seed: 11, ..Default::default() };
        let a = minimize(&mut dimer_problem(2), &cfg).unwrap();
        let b = minimize(&mut dimer_problem(2), &cfg).unwrap();
        assert_eq!(a.energy_trace, b.energy_trace);
        assert_eq!(a.best_params, b.best_params);
    }

    #[test]
    fn metric_edge_cases() {
        let basis = Arc::new(SectorBasis::enumerate(2, 1, 1).unwrap());
        let a = StateVector::product(basis.clone(), basis.word(0)).unwrap();
        let b = StateVector::product(basis.clone(), basis.word(1)).unwrap();
        let m = metrics(&a, std::slice::from_ref(&a), -1.0, -1.0).unwrap();
        assert_eq!((m.relative_error, m.infidelity), (0.0, 0.0));
        assert_eq!(metrics(&b, std::slice::from_ref(&a), -1.0, -1.0).unwrap().infidelity, 1.0);
        assert!(matches!(metrics(&a, &[], 1.0, 0.0), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn invalid_config() {
        let cfg = OptimizationConfig { grad_tol: 0.0, ..Default::default() };
        assert!(minimize(&mut dimer_problem(1), &cfg).is_err());
    }

    #[test]
    fn trace_csv_layout() {
        let r = minimize(&mut dimer_problem(1), &OptimizationConfig::default()).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&r, Some(-0.5), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("iteration,energy,grad_norm,relative_error"));
        assert_eq!(lines.count(), r.energy_trace.len());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        use crate::lattice::{apply_disorder, build_ladder, DisorderConfig};
        let spec = apply_disorder(&build_ladder(2, 3, Boundary::Open).unwrap(), &DisorderConfig { seed: 3, ..Default::default() }).unwrap();
        let basis = Arc::new(SectorBasis::enumerate(6, 3, 3).unwrap());
        let h = build_hubbard(&spec, &basis).unwrap();
        let psi0 = initial_state(basis.clone(), Spin::integer(0)).unwrap();
        let program = AnsatzProgram::new(6, 2);
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let x: Vec<f64> = (0..program.parameter_count()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g = gradient(&program, &x, &psi0, &h).unwrap();
        let step = 1e-5;
        for m in 0..x.len() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[m] += step;
            xm[m] -= step;
            let fd = (energy(&program, &xp, &psi0, &h).unwrap() - energy(&program, &xm, &psi0, &h).unwrap()) / (2.0 * step);
            assert!((fd - g[m]).abs() < 1e-6 * g[m].abs().max(1.0), "param {m}: {fd} vs {}", g[m]);
        }
    }
}
