//! Optimizes the ansatz on a two-leg ladder and reports energy error and
//! fidelity against exact diagonalization.
//!
//!     cargo run --release --example ladder_ground_state -- [length] [layers] [U] [open|periodic]

use std::time::Instant;

use hubbard_prep::experiment::SectorReference;
use hubbard_prep::lattice::{build_ladder, Boundary};
use hubbard_prep::optimize::OptimizationConfig;
use hubbard_prep::spin::Spin;

fn main() -> hubbard_prep::error::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let length: usize = args.first().map_or(4, |a| a.parse().expect("length"));
    let layers: usize = args.get(1).map_or(12, |a| a.parse().expect("layers"));
    let u: f64 = args.get(2).map_or(2.0, |a| a.parse().expect("U"));
    let boundary: Boundary = args.get(3).map_or(Ok(Boundary::Open), |a| a.parse())?;
    let spec = build_ladder(2, length, boundary)?.with_interaction(u);

    let t = Instant::now();
    let reference = SectorReference::new(&spec, Spin::integer(0))?;
    println!(
        "{}: dim {}, exact E0 = {:.10} ({} ground states, {:.1?})",
        spec.name,
        reference.sector.basis.dim(),
        reference.energy,
        reference.ground.len(),
        t.elapsed()
    );

    let t = Instant::now();
    let run = reference.optimize(layers, &OptimizationConfig::default())?;
    println!(
        "L={layers}  params={}  E={:.10}  relative error={:.2e}  fidelity={:.6}  iterations={}  ({:.1?})",
        run.result.best_params.len(),
        run.result.final_energy,
        run.relative_error,
        1.0 - run.infidelity,
        run.result.iterations,
        t.elapsed()
    );
    Ok(())
}
