//! Compiles optimized parameters into a qubit circuit, writes it in the
//! `CIRCUIT v1` text format, reads it back and checks the simulated state
//! against the ansatz engine.
//!
//!     cargo run --release --example circuit_export -- [output-file]

use hubbard_prep::ansatz::{initial_state, run_ansatz, AnsatzProgram};
use hubbard_prep::circuit::{compile, gate_counts, restrict_to_sector, simulate, GateList};
use hubbard_prep::experiment::SectorReference;
use hubbard_prep::lattice::{build_ladder, Boundary};
use hubbard_prep::optimize::OptimizationConfig;
use hubbard_prep::spin::Spin;

fn main() -> hubbard_prep::error::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "ladder-2x2.circuit".into());
    let spec = build_ladder(2, 2, Boundary::Open)?.with_interaction(4.0);
    let spin = Spin::integer(0);
    let layers = 6;

    let reference = SectorReference::new(&spec, spin)?;
    let run = reference.optimize(layers, &OptimizationConfig::default())?;
    println!("optimized: E={:.10} exact={:.10} infidelity={:.2e}", run.result.final_energy, run.exact_energy, run.infidelity);

    let program = AnsatzProgram::new(spec.n_sites, layers);
    let summary = gate_counts(&program);
    println!(
        "per layer: {} GIVENS, {} RZZ, {} RZ; total {} gates; depth {}",
        summary.per_layer.givens,
        summary.per_layer.rzz,
        summary.per_layer.rz,
        summary.total.total(),
        summary.depth
    );

    let circuit = compile(&program, &run.result.best_params, spin)?;
    circuit.save(&path)?;
    let reread = GateList::load(&path)?;
    assert_eq!(reread, circuit);

    let basis = reference.sector.basis.clone();
    let (simulated, leakage) = restrict_to_sector(&simulate(&reread)?, basis.clone())?;
    let expected = run_ansatz(&program, &run.result.best_params, &initial_state(basis, spin)?)?;
    let overlap = expected.inner(&simulated);
    println!("wrote {path}: |<ansatz|circuit>| = {:.15}, leakage = {leakage:.1e}", overlap.norm());
    Ok(())
}
