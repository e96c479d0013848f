//! Exact-diagonalization oracle.
//!
//! Small operators are diagonalized densely. Larger ones go through a Lanczos
//! iteration with full reorthogonalization and explicit locking: each run
//! works in the orthogonal complement of the eigenvectors found so far, and
//! the search stops only once a fresh run reports nothing at or below the
//! `k`-th eigenvalue. This picks up every copy of a degenerate level, which a
//! single-vector Krylov space cannot see.
//!
//! Spin-resolved quantities use the shifted operator
//! `H + c (S² - S(S+1))` on the `S_z = S` sector. There every state has total
//! spin at least `S`, so the shift is non-negative and vanishes exactly on the
//! spin-`S` states; `c` is chosen so that all higher-spin states are pushed
//! above the whole spectrum of `H`.

use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::SectorBasis;
use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;
use crate::operator::{build_hubbard, build_s_squared, SparseOperator};
use crate::spin::Spin;
use crate::state::StateVector;

/// Residual bound for every reported eigenpair, relative to the operator's
/// norm bound (floored at 1).
pub const RESIDUAL_TOL: f64 = 1e-11;
/// Eigenvalues closer than this are treated as one level.
pub const DEGENERACY_TOL: f64 = 1e-9;
/// `|⟨S²⟩ - S(S+1)|` below this labels a state as spin `S`.
pub const SPIN_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Operators up to this dimension are diagonalized densely.
    pub dense_max_dim: usize,
    /// Relative residual bound; see [`RESIDUAL_TOL`].
    pub residual_tol: f64,
    pub krylov_max: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            dense_max_dim: 1000,
            residual_tol: RESIDUAL_TOL,
            krylov_max: 250,
            max_restarts: 30,
            seed: 0x5eed,
        }
    }
}

/// Lowest eigenpairs of an operator, ascending.
#[derive(Debug, Clone)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// Eigenpairs tagged with total spin.
#[derive(Debug, Clone)]
pub struct SpectrumSlice {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<StateVector>,
    pub s_values: Vec<Option<Spin>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `‖A v - λ v‖`.
pub fn residual(op: &SparseOperator, value: f64, v: &[f64]) -> f64 {
    let mut av = vec![0.0; v.len()];
    op.apply_real(v, &mut av);
    axpy(-value, v, &mut av);
    norm(&av)
}

/// The `k` lowest eigenpairs, using default options.
pub fn lowest_eigenpairs(op: &SparseOperator, k: usize) -> Result<Eigenpairs> {
    lowest_eigenpairs_with(op, k, &SolverOptions::default())
}

pub fn lowest_eigenpairs_with(op: &SparseOperator, k: usize, opts: &SolverOptions) -> Result<Eigenpairs> {
    let mut all = lowest_with_degenerate(op, k, opts)?;
    all.values.truncate(k);
    all.vectors.truncate(k);
    Ok(all)
}

/// At least the `k` lowest eigenpairs, extended by every copy of a level
/// degenerate with the `k`-th one.
pub fn lowest_with_degenerate(op: &SparseOperator, k: usize, opts: &SolverOptions) -> Result<Eigenpairs> {
    let dim = op.dim();
    if k == 0 || k > dim {
        return Err(Error::InvalidConfig(format!("requested {k} eigenpairs of a {dim}-dimensional operator")));
    }
    let mut pairs = if dim <= opts.dense_max_dim {
        dense_lowest(op, dim)
    } else {
        lanczos_lowest(op, k, opts)?
    };
    let cutoff = pairs.values[k - 1] + DEGENERACY_TOL;
    let keep = pairs.values.iter().take_while(|&&v| v <= cutoff).count().max(k);
    pairs.values.truncate(keep);
    pairs.vectors.truncate(keep);
    let limit = residual_limit(op, opts);
    for (v, x) in pairs.values.iter().zip(&pairs.vectors) {
        let r = residual(op, *v, x);
        if r >= limit {
            return Err(Error::SolverFailure { residual: r, iterations: 0 });
        }
    }
    Ok(pairs)
}

fn residual_limit(op: &SparseOperator, opts: &SolverOptions) -> f64 {
    opts.residual_tol * op.norm_bound().max(1.0)
}

/// Full dense diagonalization; returns the `k` lowest pairs.
pub fn dense_lowest(op: &SparseOperator, k: usize) -> Eigenpairs {
    let eig = SymmetricEigen::new(op.to_dense());
    let mut order: Vec<usize> = (0..op.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    order.truncate(k);
    Eigenpairs {
        values: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        vectors: order.iter().map(|&i| eig.eigenvectors.column(i).iter().copied().collect()).collect(),
    }
}

/// Lanczos with locking; see the module docs.
pub fn lanczos_lowest(op: &SparseOperator, k: usize, opts: &SolverOptions) -> Result<Eigenpairs> {
    let dim = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut locked_vals: Vec<f64> = Vec::new();
    let mut locked: Vec<Vec<f64>> = Vec::new();
    let max_runs = 4 * k + 20;
    for _ in 0..max_runs {
        if locked.len() >= dim {
            break;
        }
        let want = k.saturating_sub(locked.len()).max(1);
        let found = lanczos_run(op, &locked, want, opts, &mut rng)?;
        if locked.len() >= k {
            let mut sorted = locked_vals.clone();
            sorted.sort_by(f64::total_cmp);
            if found[0].0 > sorted[k - 1] + DEGENERACY_TOL {
                break;
            }
        }
        for (v, x) in found {
            locked_vals.push(v);
            locked.push(x);
        }
    }
    let mut order: Vec<usize> = (0..locked.len()).collect();
    order.sort_by(|&a, &b| locked_vals[a].total_cmp(&locked_vals[b]));
    Ok(Eigenpairs {
        values: order.iter().map(|&i| locked_vals[i]).collect(),
        vectors: order.into_iter().map(|i| std::mem::take(&mut locked[i])).collect(),
    })
}

fn orthogonalize(w: &mut [f64], against: &[Vec<f64>]) {
    for u in against {
        let c = dot(u, w);
        axpy(-c, u, w);
    }
}

/// One restarted Lanczos run in the complement of `locked`; returns at least
/// one converged pair, lowest first.
fn lanczos_run(
    op: &SparseOperator,
    locked: &[Vec<f64>],
    want: usize,
    opts: &SolverOptions,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let dim = op.dim();
    let m_max = opts.krylov_max.min(dim - locked.len()).max(1);
    let scale = op.norm_bound().max(1.0);
    let limit = residual_limit(op, opts);
    let mut start: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut best_residual = f64::INFINITY;
    let mut iterations = 0;

    for _ in 0..=opts.max_restarts {
        orthogonalize(&mut start, locked);
        orthogonalize(&mut start, locked);
        let n0 = norm(&start);
        if n0 < 1e-14 {
            return Err(Error::SolverFailure { residual: f64::NAN, iterations });
        }
        start.iter_mut().for_each(|x| *x /= n0);

        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut w = vec![0.0; dim];
        let mut ritz: Option<(Vec<f64>, DMatrix<f64>)> = None;
        let mut n_conv = 0;

        for j in 0..m_max {
            iterations += 1;
            op.apply_real(&basis[j], &mut w);
            let alpha = dot(&basis[j], &w);
            axpy(-alpha, &basis[j], &mut w);
            if j > 0 {
                axpy(-betas[j - 1], &basis[j - 1], &mut w);
            }
            for _ in 0..2 {
                orthogonalize(&mut w, locked);
                orthogonalize(&mut w, &basis);
            }
            let beta = norm(&w);
            alphas.push(alpha);

            let exhausted = beta < 1e-12 * scale || j + 1 == m_max;
            if exhausted || (j + 1) % 10 == 0 || j + 1 == want {
                let m = j + 1;
                let mut t = DMatrix::<f64>::zeros(m, m);
                for i in 0..m {
                    t[(i, i)] = alphas[i];
                    if i + 1 < m {
                        t[(i, i + 1)] = betas[i];
                        t[(i + 1, i)] = betas[i];
                    }
                }
                let eig = SymmetricEigen::new(t);
                let mut order: Vec<usize> = (0..m).collect();
                order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
                let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
                let vecs = DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])]);
                n_conv = (0..m.min(want))
                    .take_while(|&c| (beta * vecs[(m - 1, c)]).abs() < 0.05 * limit)
                    .count();
                ritz = Some((vals, vecs));
                if n_conv >= want.min(m) || exhausted {
                    break;
                }
            }
            betas.push(beta);
            w.iter_mut().for_each(|x| *x /= beta);
            basis.push(std::mem::replace(&mut w, vec![0.0; dim]));
        }

        let (vals, vecs) = ritz.expect("at least one Ritz evaluation");
        let m = vals.len();
        let form = |c: usize| -> Vec<f64> {
            let mut y = vec![0.0; dim];
            for (r, b) in basis.iter().take(m).enumerate() {
                axpy(vecs[(r, c)], b, &mut y);
            }
            let n = norm(&y);
            y.iter_mut().for_each(|x| *x /= n);
            y
        };
        let mut accepted = Vec::new();
        for c in 0..n_conv.max(1).min(m) {
            let y = form(c);
            let value = {
                let mut ay = vec![0.0; dim];
                op.apply_real(&y, &mut ay);
                dot(&y, &ay)
            };
            let r = residual(op, value, &y);
            if r < limit {
                accepted.push((value, y));
            } else {
                best_residual = best_residual.min(r);
                break;
            }
        }
        if !accepted.is_empty() {
            return Ok(accepted);
        }
        start = form(0);
    }
    Err(Error::SolverFailure { residual: best_residual, iterations })
}

/// Rotates every degenerate cluster onto `S²` eigenvectors and labels spins.
fn resolve_spins(values: &[f64], vectors: &mut [Vec<f64>], s2: &SparseOperator) -> Vec<Option<Spin>> {
    let n = values.len();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[start] < 1e-8 * values[start].abs().max(1.0) {
            end += 1;
        }
        if end - start > 1 {
            let m = end - start;
            let applied: Vec<Vec<f64>> = vectors[start..end]
                .iter()
                .map(|v| {
                    let mut out = vec![0.0; v.len()];
                    s2.apply_real(v, &mut out);
                    out
                })
                .collect();
            let proj = DMatrix::from_fn(m, m, |a, b| dot(&vectors[start + a], &applied[b]));
            let eig = SymmetricEigen::new((&proj + proj.transpose()) * 0.5);
            let old: Vec<Vec<f64>> = vectors[start..end].to_vec();
            for c in 0..m {
                let mut y = vec![0.0; old[0].len()];
                for (a, v) in old.iter().enumerate() {
                    axpy(eig.eigenvectors[(a, c)], v, &mut y);
                }
                vectors[start + c] = y;
            }
        }
        start = end;
    }
    vectors
        .iter()
        .map(|v| {
            let mut out = vec![0.0; v.len()];
            s2.apply_real(v, &mut out);
            Spin::classify(dot(v, &out), SPIN_TOL)
        })
        .collect()
}

fn to_states(basis: &Arc<SectorBasis>, vectors: Vec<Vec<f64>>) -> Vec<StateVector> {
    vectors
        .into_iter()
        .map(|v| StateVector::from_real(basis.clone(), &v).expect("vector length matches basis"))
        .collect()
}

/// Lowest eigenpairs of `h` with spin labels from `s2`.
pub fn spectrum_slice(
    h: &SparseOperator,
    s2: &SparseOperator,
    basis: &Arc<SectorBasis>,
    k: usize,
    opts: &SolverOptions,
) -> Result<SpectrumSlice> {
    let Eigenpairs { values, mut vectors } = lowest_with_degenerate(h, k, opts)?;
    let s_values = resolve_spins(&values, &mut vectors, s2);
    Ok(SpectrumSlice {
        eigenvalues: values,
        eigenvectors: to_states(basis, vectors),
        s_values,
    })
}

/// Hamiltonian, spin operator and basis of the half-filled `S_z = S` sector.
pub struct SpinSector {
    pub basis: Arc<SectorBasis>,
    pub hamiltonian: SparseOperator,
    pub s_squared: SparseOperator,
    pub spin: Spin,
}

impl SpinSector {
    pub fn new(spec: &LatticeSpec, spin: Spin) -> Result<Self> {
        let twice = spin.twice() as usize;
        if twice > spec.n_sites || (spec.n_sites + twice) % 2 != 0 {
            return Err(Error::InvalidSpin(format!(
                "S = {spin} is not reachable at half filling on {} sites",
                spec.n_sites
            )));
        }
        let basis = Arc::new(SectorBasis::half_filling(spec.n_sites, twice)?);
        let hamiltonian = build_hubbard(spec, &basis)?;
        let s_squared = build_s_squared(&basis);
        Ok(SpinSector { basis, hamiltonian, s_squared, spin })
    }

    /// `H + c (S² - S(S+1))`, which is `H` on spin-`S` states and lies above
    /// the spectrum of `H` on every higher spin.
    pub fn penalized(&self) -> Result<SparseOperator> {
        let c = self.hamiltonian.norm_bound().max(1.0) / (self.spin.value() + 1.0);
        self.hamiltonian.combine(1.0, &self.s_squared, c, -c * self.spin.casimir())
    }

    /// At least `count` lowest spin-`S` eigenpairs of `H`.
    pub fn lowest_states(&self, count: usize, opts: &SolverOptions) -> Result<SpectrumSlice> {
        let shifted = self.penalized()?;
        let k = count.min(shifted.dim());
        let Eigenpairs { mut vectors, .. } = lowest_with_degenerate(&shifted, k, opts)?;
        let values: Vec<f64> = vectors
            .iter()
            .map(|v| {
                let mut hv = vec![0.0; v.len()];
                self.hamiltonian.apply_real(v, &mut hv);
                dot(v, &hv)
            })
            .collect();
        let limit = residual_limit(&shifted, opts);
        for (e, v) in values.iter().zip(&vectors) {
            let r = residual(&self.hamiltonian, *e, v);
            if r >= limit {
                return Err(Error::SolverFailure { residual: r, iterations: 0 });
            }
        }
        let s_values = resolve_spins(&values, &mut vectors, &self.s_squared);
        let n_match = s_values.iter().filter(|s| **s == Some(self.spin)).count();
        if n_match < count {
            return Err(Error::InsufficientStates { found: n_match, needed: count });
        }
        Ok(SpectrumSlice {
            eigenvalues: values,
            eigenvectors: to_states(&self.basis, vectors),
            s_values,
        })
    }

    /// Ground energy and orthonormal ground eigenspace among spin-`S` states.
    pub fn ground(&self, opts: &SolverOptions) -> Result<(f64, Vec<StateVector>)> {
        let slice = self.lowest_states(1, opts)?;
        let e0 = slice.eigenvalues[0];
        let vecs = slice
            .eigenvalues
            .iter()
            .zip(slice.eigenvectors)
            .filter(|(e, _)| **e - e0 <= DEGENERACY_TOL)
            .map(|(_, v)| v)
            .collect();
        Ok((e0, vecs))
    }
}

/// One row of a spin-gap table.
#[derive(Debug, Clone, PartialEq)]
pub struct GapRow {
    pub lattice: String,
    pub u: f64,
    pub spin: Spin,
    pub e0: f64,
    pub e1: f64,
    pub gap: f64,
}

/// Gap between the two lowest eigenstates of total spin `S` at half filling.
///
/// Both states are taken from the `S_z = S` sector, so a multiplet counts
/// once; degenerate copies of the lowest level count as separate states.
pub fn spin_sector_gap(spec: &LatticeSpec, spin: Spin) -> Result<GapRow> {
    spin_sector_gap_with(spec, spin, &SolverOptions::default())
}

pub fn spin_sector_gap_with(spec: &LatticeSpec, spin: Spin, opts: &SolverOptions) -> Result<GapRow> {
    let sector = SpinSector::new(spec, spin)?;
    let slice = sector.lowest_states(2, opts)?;
    let energies: Vec<f64> = slice
        .eigenvalues
        .iter()
        .zip(&slice.s_values)
        .filter(|(_, s)| **s == Some(spin))
        .map(|(e, _)| *e)
        .collect();
    let (e0, e1) = (energies[0], energies[1]);
    Ok(GapRow {
        lattice: spec.name.clone(),
        u: spec.onsite_u.first().copied().unwrap_or(0.0),
        spin,
        e0,
        e1,
        gap: e1 - e0,
    })
}

/// Orthonormal ground eigenspace of the `(n_up, n_dn)` sector.
pub fn ground_subspace(spec: &LatticeSpec, n_up: usize, n_dn: usize) -> Result<(f64, Vec<StateVector>)> {
    let basis = Arc::new(SectorBasis::enumerate(spec.n_sites, n_up, n_dn)?);
    let h = build_hubbard(spec, &basis)?;
    let pairs = lowest_with_degenerate(&h, 1, &SolverOptions::default())?;
    let e0 = pairs.values[0];
    let vecs: Vec<Vec<f64>> = pairs
        .values
        .iter()
        .zip(pairs.vectors)
        .filter(|(e, _)| **e - e0 <= DEGENERACY_TOL)
        .map(|(_, v)| v)
        .collect();
    Ok((e0, to_states(&basis, vecs)))
}

/// Writes gap rows as CSV with columns `lattice,U,S,E0,E1,gap`.
pub fn write_gap_csv(rows: &[GapRow], mut out: impl Write) -> Result<()> {
    writeln!(out, "lattice,U,S,E0,E1,gap")?;
    for r in rows {
        writeln!(out, "{},{},{},{:.12},{:.12},{:.12}", r.lattice, r.u, r.spin.value(), r.e0, r.e1, r.gap)?;
    }
    Ok(())
}

/// Overlap-weight `Σ_d |⟨g_d|ψ⟩|²` of `psi` on an orthonormal set.
pub fn subspace_weight(subspace: &[StateVector], psi: &[Complex64]) -> f64 {
    subspace
        .iter()
        .map(|g| crate::state::inner(g.amplitudes(), psi).norm_sqr())
        .sum()
}
