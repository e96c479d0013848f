//! Exact spin-resolved gaps of the 8-site Betts cluster, pure and with one
//! disorder realization, written as CSV to stdout.
//!
//!     cargo run --release --example spin_gap_table -- [U] [disorder-seed]

use hubbard_prep::lattice::{apply_disorder, build_betts8, DisorderConfig};
use hubbard_prep::solver::{spin_sector_gap, write_gap_csv};
use hubbard_prep::spin::Spin;

fn main() -> hubbard_prep::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let u: f64 = args.next().map_or(8.0, |a| a.parse().expect("U must be a number"));
    let seed: Option<u64> = args.next().map(|a| a.parse().expect("seed must be an integer"));

    let pure = build_betts8().with_interaction(u);
    let mut lattices = vec![pure.clone()];
    if let Some(seed) = seed {
        lattices.push(apply_disorder(&pure, &DisorderConfig { seed, ..Default::default() })?);
    }
    let mut rows = Vec::new();
    for spec in &lattices {
        for s in 0..4 {
            rows.push(spin_sector_gap(spec, Spin::integer(s))?);
        }
    }
    write_gap_csv(&rows, std::io::stdout().lock())
}
