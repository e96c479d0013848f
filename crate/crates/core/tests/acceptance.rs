//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any failed.

use std::sync::Arc;
use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use hubbard_prep::ansatz::{initial_state, run_ansatz, AnsatzProgram, CompiledAnsatz};
use hubbard_prep::basis::SectorBasis;
use hubbard_prep::circuit::{compile, gate_counts, restrict_to_sector, simulate, GateList};
use hubbard_prep::experiment::SectorReference;
use hubbard_prep::lattice::{apply_disorder, build_betts8, build_ladder, Boundary, DisorderConfig, Edge, LatticeSpec};
use hubbard_prep::operator::{build_hubbard, build_s_squared, SparseOperator};
use hubbard_prep::optimize::{energy, gradient, minimize, OptimizationConfig, VariationalProblem};
use hubbard_prep::solver::spin_sector_gap;
use hubbard_prep::spin::Spin;
use hubbard_prep::state::StateVector;

const GAP_TOL: f64 = 1e-4;
const DIMER_TOL: f64 = 1e-6;
const FD_STEP: f64 = 1e-5;
const FD_REL_TOL: f64 = 1e-6;
const UNITARY_TOL: f64 = 1e-10;
const SPIN_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-12;
const ROUND_TRIP_TOL: f64 = 1e-8;
const LADDER_FIDELITY: f64 = 0.99;
const INFIDELITY_TARGET: f64 = 1e-2;
const MAX_LAYERS: usize = 20;
/// One initial start plus up to three seeded restarts.
const STARTS: usize = 4;
const MIN_DISORDER_GAP: f64 = 0.1;
const DISORDER_LAYERS: [usize; 3] = [8, 14, MAX_LAYERS];

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    format!("error: {e}")
}

fn dimer(u: f64) -> LatticeSpec {
    LatticeSpec::new("dimer", 2, vec![Edge(0, 1, 1.0)], vec![u; 2], vec![0, 1], Boundary::Open).unwrap()
}

fn random_params(rng: &mut ChaCha20Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

fn random_state(rng: &mut ChaCha20Rng, basis: Arc<SectorBasis>) -> StateVector {
    let amps = (0..basis.dim())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let mut psi = StateVector::from_amplitudes(basis, amps).unwrap();
    psi.normalize();
    psi
}

fn table_gaps() -> Outcome {
    let expected = [1.12945, 0.62746, 0.78693, 1.63385];
    let spec = build_betts8().with_interaction(8.0);
    let mut worst: f64 = 0.0;
    let mut gaps = Vec::new();
    for (s, want) in expected.iter().enumerate() {
        let row = spin_sector_gap(&spec, Spin::integer(s as u32)).map_err(fail)?;
        worst = worst.max((row.gap - want).abs());
        gaps.push(format!("{:.5}", row.gap));
    }
    check(worst <= GAP_TOL, format!("gaps [{}], max deviation {worst:.1e} (tol {GAP_TOL:.0e})", gaps.join(", ")))
}

fn ladder_fidelity(length: usize, layers: usize) -> Result<(f64, usize), String> {
    let spec = build_ladder(2, length, Boundary::Open).map_err(fail)?.with_interaction(2.0);
    let reference = SectorReference::new(&spec, Spin::integer(0)).map_err(fail)?;
    let cfg = OptimizationConfig::default();
    let run = reference.optimize_multistart(layers, &cfg, STARTS, 1.0 - LADDER_FIDELITY).map_err(fail)?;
    Ok((1.0 - run.infidelity, run.result.best_params.len()))
}

fn table_ladders() -> Outcome {
    let (f4, p4) = ladder_fidelity(4, 12)?;
    let (f5, p5) = ladder_fidelity(5, 15)?;
    check(
        f4 >= LADDER_FIDELITY && f5 >= LADDER_FIDELITY && p4 == 180 && p5 == 285,
        format!("2x4 L=12 ({p4} params) fidelity {f4:.5}; 2x5 L=15 ({p5} params) fidelity {f5:.5} (need >= {LADDER_FIDELITY})"),
    )
}

fn strong_coupling() -> Outcome {
    let spec = build_betts8().with_interaction(8.0);
    let reference = SectorReference::new(&spec, Spin::integer(0)).map_err(fail)?;
    let cfg = OptimizationConfig::default();
    let mut rows = Vec::new();
    for l in [3, 5, 7, 10, 14, MAX_LAYERS] {
        let run = reference.optimize_multistart(l, &cfg, STARTS, INFIDELITY_TARGET).map_err(fail)?;
        eprintln!("  S=0 L={l}: infidelity {:.2e}, seed {}", run.infidelity, run.seed);
        rows.push((l, run.infidelity, run.seed));
    }
    let best = |max_l: usize| rows.iter().filter(|r| r.0 <= max_l).map(|r| r.1).fold(f64::INFINITY, f64::min);
    let (b7, b14, b20) = (best(7), best(14), best(MAX_LAYERS));
    let listing: Vec<String> = rows.iter().map(|(l, i, s)| format!("L={l}: {i:.1e} (seed {s})")).collect();
    check(
        b20 <= INFIDELITY_TARGET && b14 <= b7,
        format!("infidelity {}; best L<=7 {b7:.1e}, L<=14 {b14:.1e}, L<=20 {b20:.1e}", listing.join(", ")),
    )
}

fn two_site() -> Outcome {
    let spec = dimer(8.0);
    let basis = Arc::new(SectorBasis::enumerate(2, 1, 1).map_err(fail)?);
    let h = build_hubbard(&spec, &basis).map_err(fail)?;
    let psi0 = initial_state(basis.clone(), Spin::integer(0)).map_err(fail)?;
    let ansatz = CompiledAnsatz::new(AnsatzProgram::new(2, 2), basis).map_err(fail)?;
    let mut problem = VariationalProblem::new(ansatz, psi0, h).map_err(fail)?;
    let cfg = OptimizationConfig { grad_tol: 1e-9, ..Default::default() };
    let r = minimize(&mut problem, &cfg).map_err(fail)?;
    let exact = 4.0 - 2.0 * 5f64.sqrt();
    let err = (r.final_energy - exact).abs();
    check(err < DIMER_TOL, format!("E = {:.12}, 4 - 2 sqrt 5 = {exact:.12}, |dE| = {err:.1e}", r.final_energy))
}

fn gradient_suite() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(2024);
    let cases = [
        (dimer(8.0), 3),
        (build_ladder(2, 4, Boundary::Open).unwrap().with_interaction(4.0), 2),
        (build_betts8().with_interaction(8.0), 2),
    ];
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for (spec, layers) in &cases {
        let basis = Arc::new(SectorBasis::half_filling(spec.n_sites, 0).map_err(fail)?);
        let h = build_hubbard(spec, &basis).map_err(fail)?;
        let psi0 = initial_state(basis, Spin::integer(0)).map_err(fail)?;
        let program = AnsatzProgram::new(spec.n_sites, *layers);
        for _ in 0..20 {
            let x = random_params(&mut rng, program.parameter_count(), std::f64::consts::PI);
            let g = gradient(&program, &x, &psi0, &h).map_err(fail)?;
            for m in 0..x.len() {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[m] += FD_STEP;
                xm[m] -= FD_STEP;
                let ep = energy(&program, &xp, &psi0, &h).map_err(fail)?;
                let em = energy(&program, &xm, &psi0, &h).map_err(fail)?;
                let fd = (ep - em) / (2.0 * FD_STEP);
                worst = worst.max((fd - g[m]).abs() / g[m].abs().max(1.0));
                checked += 1;
            }
        }
    }
    check(worst < FD_REL_TOL, format!("{checked} components, max relative error {worst:.1e} (tol {FD_REL_TOL:.0e})"))
}

/// `c†_p c_q` on an occupation word, signs counted operator by operator.
fn fermion_hop(word: u64, p: usize, q: usize) -> Option<(u64, f64)> {
    if word >> q & 1 == 0 {
        return None;
    }
    let mut sign = if (word & ((1 << q) - 1)).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
    let w = word & !(1 << q);
    if w >> p & 1 == 1 {
        return None;
    }
    if (w & ((1 << p) - 1)).count_ones() % 2 == 1 {
        sign = -sign;
    }
    Some((w | 1 << p, sign))
}

/// Dense `exp(iθG)` of a real symmetric generator.
fn expm_i(g: &DMatrix<f64>, theta: f64) -> DMatrix<Complex64> {
    let eig = SymmetricEigen::new(g.clone());
    let v = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, theta * l)));
    &v * d * v.adjoint()
}

fn dense_generators(basis: &SectorBasis) -> Vec<DMatrix<f64>> {
    let n = basis.n_sites();
    let dim = basis.dim();
    let hop = |k: usize| {
        let mut g = DMatrix::zeros(dim, dim);
        for (j, &w) in basis.states().iter().enumerate() {
            for off in [0, n] {
                for (p, q) in [(k + off, k + 1 + off), (k + 1 + off, k + off)] {
                    if let Some((w2, s)) = fermion_hop(w, p, q) {
                        g[(basis.index_of(w2).unwrap(), j)] += s;
                    }
                }
            }
        }
        g
    };
    let onsite = |k: usize| {
        DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            dim,
            basis.states().iter().map(|w| ((w >> k) & (w >> (k + n)) & 1) as f64),
        ))
    };
    let mut layer = Vec::new();
    layer.extend((1..n.saturating_sub(1)).step_by(2).map(hop));
    layer.extend((0..n.saturating_sub(1)).step_by(2).map(hop));
    layer.extend((0..n).map(onsite));
    layer
}

fn unitary_suite() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for n in 1..=4 {
        for n_up in 0..=n {
            for n_dn in 0..=n {
                let basis = Arc::new(SectorBasis::enumerate(n, n_up, n_dn).map_err(fail)?);
                let generators = dense_generators(&basis);
                for layers in [1, 3] {
                    let program = AnsatzProgram::new(n, layers);
                    let params = random_params(&mut rng, program.parameter_count(), 3.0);
                    let psi0 = random_state(&mut rng, basis.clone());
                    let got = run_ansatz(&program, &params, &psi0).map_err(fail)?;
                    let mut want = nalgebra::DVector::from_column_slice(psi0.amplitudes());
                    for (m, theta) in params.iter().enumerate() {
                        want = expm_i(&generators[m % generators.len()], *theta) * want;
                    }
                    for (a, b) in got.amplitudes().iter().zip(want.iter()) {
                        worst = worst.max((a - b).norm());
                    }
                    cases += 1;
                }
            }
        }
    }
    check(worst < UNITARY_TOL, format!("{cases} sector/depth cases with N <= 4, max |diff| {worst:.1e} (tol {UNITARY_TOL:.0e})"))
}

fn symmetry_suite() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let mut worst_s: f64 = 0.0;
    let mut worst_n: f64 = 0.0;
    let mut sectors = 0;
    let lattices = [build_betts8(), build_ladder(2, 3, Boundary::Open).unwrap()];
    for spec in &lattices {
        for twice in (0..=spec.n_sites).step_by(2) {
            let spin = Spin::from_twice(twice as u32);
            let basis = Arc::new(SectorBasis::half_filling(spec.n_sites, twice).map_err(fail)?);
            let s2: SparseOperator = build_s_squared(&basis);
            let psi0 = initial_state(basis.clone(), spin).map_err(fail)?;
            let ansatz = CompiledAnsatz::new(AnsatzProgram::new(spec.n_sites, 2), basis.clone()).map_err(fail)?;
            let count = ansatz.program().parameter_count();
            for _ in 0..100 {
                let x = random_params(&mut rng, count, std::f64::consts::PI);
                let psi = ansatz.run(&x, &psi0).map_err(fail)?;
                worst_n = worst_n.max((psi.norm() - 1.0).abs());
                worst_s = worst_s.max((s2.expectation(psi.amplitudes()).re - spin.casimir()).abs());
            }
            sectors += 1;
        }
    }
    check(
        worst_s < SPIN_TOL && worst_n < NORM_TOL,
        format!("{sectors} sectors x 100 points, max |<S2> - S(S+1)| {worst_s:.1e}, max |norm - 1| {worst_n:.1e}"),
    )
}

fn circuit_suite() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for n in 1..=4 {
        for twice in (n % 2..=n).step_by(2) {
            let spin = Spin::from_twice(twice as u32);
            let basis = Arc::new(SectorBasis::half_filling(n, twice).map_err(fail)?);
            for layers in 1..=3 {
                let program = AnsatzProgram::new(n, layers);
                let params = random_params(&mut rng, program.parameter_count(), 3.0);
                let text = compile(&program, &params, spin).map_err(fail)?.to_text();
                let list = GateList::read_text(text.as_bytes()).map_err(fail)?;
                let (sim, _) = restrict_to_sector(&simulate(&list).map_err(fail)?, basis.clone()).map_err(fail)?;
                let want = run_ansatz(&program, &params, &initial_state(basis.clone(), spin).map_err(fail)?).map_err(fail)?;
                worst = worst.max(1.0 - want.inner(&sim).norm());
                cases += 1;
            }
        }
    }
    let counts_ok = (1..=10).all(|n| (1..=20).all(|l| gate_counts(&AnsatzProgram::new(n, l)).parameters == (2 * n - 1) * l))
        && AnsatzProgram::new(8, 1).parameter_count() == 15;
    check(
        worst < ROUND_TRIP_TOL && counts_ok,
        format!("{cases} circuits, max 1 - |overlap| {worst:.1e} (tol {ROUND_TRIP_TOL:.0e}); parameter counts M*L: {counts_ok}"),
    )
}

/// First disorder seed whose spin-sector gaps are all at least `MIN_DISORDER_GAP`.
/// Near-degenerate realizations make infidelity ill-conditioned regardless of
/// the optimizer, so they are skipped by spectrum alone.
fn well_gapped_realization() -> Result<(DisorderConfig, LatticeSpec, f64), String> {
    for seed in 0..32 {
        let cfg = DisorderConfig { hopping_std: 0.2, u_min: 0.0, u_max: 16.0, seed };
        let spec = apply_disorder(&build_betts8(), &cfg).map_err(fail)?;
        let mut min_gap = f64::INFINITY;
        for s in 0..4 {
            min_gap = min_gap.min(spin_sector_gap(&spec, Spin::integer(s)).map_err(fail)?.gap);
        }
        if min_gap >= MIN_DISORDER_GAP {
            return Ok((cfg, spec, min_gap));
        }
    }
    Err("no well-gapped realization among seeds 0..32".into())
}

fn disorder_robustness() -> Outcome {
    let (cfg, spec, min_gap) = well_gapped_realization()?;
    let opt = OptimizationConfig::default();
    let mut parts = Vec::new();
    let mut ok = true;
    for s in 0..4 {
        let reference = SectorReference::new(&spec, Spin::integer(s)).map_err(fail)?;
        let mut reached = None;
        let mut best = f64::INFINITY;
        for l in DISORDER_LAYERS {
            let run = reference.optimize_multistart(l, &opt, STARTS, INFIDELITY_TARGET).map_err(fail)?;
            eprintln!("  S={s} L={l}: infidelity {:.2e}, seed {}", run.infidelity, run.seed);
            best = best.min(run.infidelity);
            if run.infidelity <= INFIDELITY_TARGET {
                reached = Some((l, run.infidelity, run.seed));
                break;
            }
        }
        ok &= reached.is_some();
        parts.push(match reached {
            Some((l, i, seed)) => format!("S={s}: L={l} {i:.1e} (seed {seed})"),
            None => format!("S={s}: best {best:.1e}"),
        });
    }
    check(
        ok,
        format!(
            "realization {} (smallest gap {min_gap:.3}) reaches infidelity <= {INFIDELITY_TARGET:.0e}: {}",
            cfg.seed,
            parts.join(", ")
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 spin-sector gaps, Betts-8 U=8", table_gaps),
        ("2 ladder fidelities, U=2", table_ladders),
        ("3 strong-coupling fidelity, Betts-8 U=8 S=0", strong_coupling),
        ("4 two-site analytic energy", two_site),
        ("5 adjoint gradient vs finite differences", gradient_suite),
        ("6 ansatz vs dense exponentials", unitary_suite),
        ("7 spin and norm conservation", symmetry_suite),
        ("8 circuit round trip and counts", circuit_suite),
        ("9 disorder robustness, Betts-8", disorder_robustness),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !only.is_empty() && !only.iter().any(|o| name.starts_with(o.as_str())) {
            continue;
        }
        let t = Instant::now();
        let outcome = run();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
