//! Builds every supported geometry, prints its couplings and Jordan-Wigner
//! path, and writes the lattice files to a directory.
//!
//!     cargo run --example lattices -- [output-dir]

use hubbard_prep::lattice::{apply_disorder, build_betts8, build_ladder, Boundary, DisorderConfig, LatticeSpec};

fn describe(spec: &LatticeSpec) {
    println!("{} ({} sites, {} bonds, {})", spec.name, spec.n_sites, spec.edges.len(), spec.boundary);
    println!("  jw path:  {:?}", spec.jw_order);
    println!("  degrees:  {:?}", spec.degree());
    for e in &spec.edges {
        println!("  bond {}-{}  t = {:+.4}", e.0, e.1, e.2);
    }
    let u: Vec<String> = spec.onsite_u.iter().map(|u| format!("{u:.3}")).collect();
    println!("  U:        [{}]", u.join(", "));
}

fn main() -> hubbard_prep::error::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "lattices".into());
    std::fs::create_dir_all(&dir)?;

    let betts = build_betts8().with_interaction(8.0);
    let specs = [
        build_ladder(2, 4, Boundary::Open)?.with_interaction(2.0),
        build_ladder(2, 4, Boundary::Periodic)?.with_interaction(2.0),
        build_ladder(2, 5, Boundary::Open)?.with_interaction(2.0),
        apply_disorder(&betts, &DisorderConfig { seed: 1, ..Default::default() })?,
        betts,
    ];
    for spec in &specs {
        describe(spec);
        let path = format!("{dir}/{}.toml", spec.name);
        spec.save(&path)?;
        assert_eq!(&LatticeSpec::load(&path)?, spec);
    }
    println!("wrote {} lattice files to {dir}/", specs.len());
    Ok(())
}
