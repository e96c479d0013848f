//! Variational ground state of the Hubbard dimer, compared with the closed
//! form `E0 = U/2 - sqrt(U²/4 + 4t²)`.
//!
//!     cargo run --release --example two_site_vqe -- [U]

use std::sync::Arc;

use hubbard_prep::ansatz::{initial_state, AnsatzProgram, CompiledAnsatz};
use hubbard_prep::basis::SectorBasis;
use hubbard_prep::lattice::{Boundary, Edge, LatticeSpec};
use hubbard_prep::operator::build_hubbard;
use hubbard_prep::optimize::{minimize, OptimizationConfig, VariationalProblem};
use hubbard_prep::spin::Spin;

fn main() -> hubbard_prep::error::Result<()> {
    let u: f64 = std::env::args().nth(1).map_or(8.0, |a| a.parse().expect("U must be a number"));
    let spec = LatticeSpec::new("dimer", 2, vec![Edge(0, 1, 1.0)], vec![u; 2], vec![0, 1], Boundary::Open)?;
    let basis = Arc::new(SectorBasis::enumerate(2, 1, 1)?);
    let h = build_hubbard(&spec, &basis)?;
    let exact = u / 2.0 - (u * u / 4.0 + 4.0).sqrt();

    for layers in 1..=3 {
        let program = AnsatzProgram::new(2, layers);
        let psi0 = initial_state(basis.clone(), Spin::integer(0))?;
        let mut problem = VariationalProblem::new(CompiledAnsatz::new(program, basis.clone())?, psi0, h.clone())?;
        let cfg = OptimizationConfig { grad_tol: 1e-10, ..Default::default() };
        let r = minimize(&mut problem, &cfg)?;
        println!(
            "L={layers}  params={}  E={:.12}  exact={exact:.12}  |dE|={:.1e}  iterations={}",
            program.parameter_count(),
            r.final_energy,
            (r.final_energy - exact).abs(),
            r.iterations
        );
    }
    Ok(())
}
