//! Layered paired-Givens ansatz on a fixed-particle-number state vector.
//!
//! One layer is, in application order,
//!
//! 1. the `T'` group: paired hops on orbital pairs `(1,2), (3,4), ...`,
//! 2. the `T` group: paired hops on orbital pairs `(0,1), (2,3), ...`,
//! 3. one on-site phase `exp(iφ n_↑ n_↓)` per orbital,
//!
//! for `M = 2N - 1` parameters per layer. A paired hop on orbitals
//! `(k, k+1)` applies `exp[iθ(c†_k c_{k+1} + h.c.)]` to both spin species
//! with a shared angle. Orbitals are adjacent along the Jordan-Wigner path,
//! so no parity string enters and each hop is a plain two-level rotation
//! mixing `|10⟩` and `|01⟩` with `cos θ` and `i sin θ`.

use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use crate::basis::SectorBasis;
use crate::error::{Error, Result};
use crate::spin::Spin;
use crate::state::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Group {
    /// Hops starting on odd orbitals, applied first in each layer.
    HopOdd,
    /// Hops starting on even orbitals.
    HopEven,
    OnSite,
}

impl Group {
    pub fn label(self) -> &'static str {
        match self {
            Group::HopOdd => "hop-odd",
            Group::HopEven => "hop-even",
            Group::OnSite => "onsite",
        }
    }
}

/// One parameterized primitive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    /// Paired-spin hop between orbitals `k` and `k + 1`.
    Hop { orbital: usize },
    /// Interaction phase on orbital `k`.
    OnSite { orbital: usize },
}

impl Generator {
    pub fn group(self) -> Group {
        match self {
            Generator::Hop { orbital } if orbital % 2 == 1 => Group::HopOdd,
            Generator::Hop { .. } => Group::HopEven,
            Generator::OnSite { .. } => Group::OnSite,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnsatzProgram {
    pub n_sites: usize,
    pub n_layers: usize,
}

impl AnsatzProgram {
    pub fn new(n_sites: usize, n_layers: usize) -> Self {
        AnsatzProgram { n_sites, n_layers }
    }

    /// `M = 2N - 1`.
    pub fn params_per_layer(&self) -> usize {
        2 * self.n_sites - 1
    }

    pub fn parameter_count(&self) -> usize {
        self.params_per_layer() * self.n_layers
    }

    /// Generators of a single layer in application order.
    pub fn layer(&self) -> Vec<Generator> {
        let n = self.n_sites;
        let odd = (1..n.saturating_sub(1)).step_by(2).map(|orbital| Generator::Hop { orbital });
        let even = (0..n.saturating_sub(1)).step_by(2).map(|orbital| Generator::Hop { orbital });
        let onsite = (0..n).map(|orbital| Generator::OnSite { orbital });
        odd.chain(even).chain(onsite).collect()
    }

    /// All generators, one per parameter, ordered `(layer, group, generator)`.
    pub fn generators(&self) -> Vec<Generator> {
        let layer = self.layer();
        (0..self.n_layers).flat_map(|_| layer.iter().copied()).collect()
    }

    fn check(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.parameter_count() {
            return Err(Error::ParameterLayout {
                expected: self.parameter_count(),
                found: params.len(),
            });
        }
        Ok(())
    }
}

/// Flat ansatz parameters ordered `(layer, group, generator)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector {
    pub n_sites: usize,
    pub n_layers: usize,
    pub lattice: String,
    pub values: Vec<f64>,
}

const PARAMS_HEADER: &str = "# hubbard-prep parameters v1";

impl ParameterVector {
    pub fn new(program: &AnsatzProgram, lattice: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        program.check(&values)?;
        Ok(ParameterVector {
            n_sites: program.n_sites,
            n_layers: program.n_layers,
            lattice: lattice.into(),
            values,
        })
    }

    pub fn program(&self) -> AnsatzProgram {
        AnsatzProgram::new(self.n_sites, self.n_layers)
    }

    /// CSV with a three-line header and one value per line.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "{PARAMS_HEADER}")?;
        writeln!(out, "n_sites,n_layers,lattice")?;
        writeln!(out, "{},{},{}", self.n_sites, self.n_layers, self.lattice)?;
        writeln!(out, "value")?;
        for v in &self.values {
            writeln!(out, "{v:.16e}")?;
        }
        Ok(())
    }

    pub fn read_csv(input: impl BufRead) -> Result<Self> {
        let mut lines = input.lines();
        let mut next = |what: &str| -> Result<String> {
            lines
                .next()
                .transpose()?
                .ok_or_else(|| Error::Parse(format!("parameter file ends before {what}")))
        };
        if next("header")?.trim() != PARAMS_HEADER {
            return Err(Error::Parse("missing parameter file header".into()));
        }
        if next("column names")?.trim() != "n_sites,n_layers,lattice" {
            return Err(Error::Parse("unexpected metadata columns".into()));
        }
        let meta = next("metadata")?;
        let mut parts = meta.trim().splitn(3, ',');
        let mut field = |name: &str| parts.next().ok_or_else(|| Error::Parse(format!("missing {name}")));
        let n_sites: usize = field("n_sites")?.parse().map_err(|_| Error::Parse("bad n_sites".into()))?;
        let n_layers: usize = field("n_layers")?.parse().map_err(|_| Error::Parse("bad n_layers".into()))?;
        let lattice = field("lattice")?.to_string();
        if next("value header")?.trim() != "value" {
            return Err(Error::Parse("expected `value` column header".into()));
        }
        let mut values = Vec::new();
        for line in lines {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            values.push(t.parse::<f64>().map_err(|_| Error::Parse(format!("bad value {t:?}")))?);
        }
        ParameterVector::new(&AnsatzProgram::new(n_sites, n_layers), lattice, values)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(&mut f)?;
        f.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

/// Occupation word of the product initial state with total spin `S`.
///
/// The first `2S` orbitals of the Jordan-Wigner path hold one spin-up
/// electron each; after them `N/2 - S` doublons alternate with as many holes
/// (`u u D 0 D 0 ...`).
pub fn initial_word(n_sites: usize, spin: Spin) -> Result<u64> {
    let twice = spin.twice() as usize;
    if twice > n_sites || (n_sites - twice) % 2 != 0 {
        return Err(Error::InvalidSpin(format!("S = {spin} is not reachable at half filling on {n_sites} sites")));
    }
    let doublons = (n_sites - twice) / 2;
    let mut word = 0u64;
    for k in 0..twice {
        word |= 1 << k;
    }
    for d in 0..doublons {
        let k = twice + 2 * d;
        word |= 1 << k;
        word |= 1 << (n_sites + k);
    }
    Ok(word)
}

/// Product initial state with total spin `S` and `S_z = S` in `basis`.
pub fn initial_state(basis: Arc<SectorBasis>, spin: Spin) -> Result<StateVector> {
    let n = basis.n_sites();
    let twice = spin.twice() as usize;
    if basis.n_up() + basis.n_dn() != n || basis.n_up() != basis.n_dn() + twice {
        return Err(Error::InvalidSpin(format!(
            "basis ({}, {}) is not the half-filled S_z = {spin} sector",
            basis.n_up(),
            basis.n_dn()
        )));
    }
    let word = initial_word(n, spin)?;
    StateVector::product(basis, word)
}

/// Index pairs `(from, to)` where `from` has `mode_a` occupied and `mode_b`
/// empty, and `to` is the same word with the electron moved to `mode_b`.
fn hop_pairs(basis: &SectorBasis, mode_a: usize, mode_b: usize) -> Vec<[u32; 2]> {
    let (ba, bb) = (1u64 << mode_a, 1u64 << mode_b);
    basis
        .states()
        .iter()
        .enumerate()
        .filter(|(_, &w)| w & ba != 0 && w & bb == 0)
        .map(|(i, &w)| {
            let j = basis.index_of(w ^ ba ^ bb).expect("hop stays in sector");
            [i as u32, j as u32]
        })
        .collect()
}

fn doublon_indices(basis: &SectorBasis, orbital: usize) -> Vec<u32> {
    let mask = (1u64 << orbital) | (1u64 << (basis.n_sites() + orbital));
    basis
        .states()
        .iter()
        .enumerate()
        .filter(|(_, &w)| w & mask == mask)
        .map(|(i, _)| i as u32)
        .collect()
}

#[inline]
fn rotate(amps: &mut [Complex64], pairs: &[[u32; 2]], c: f64, s: f64) {
    for &[a, b] in pairs {
        let (a, b) = (a as usize, b as usize);
        let x = amps[a];
        let y = amps[b];
        amps[a] = Complex64::new(c * x.re - s * y.im, c * x.im + s * y.re);
        amps[b] = Complex64::new(c * y.re - s * x.im, c * y.im + s * x.re);
    }
}

/// Applies `exp[iθ(c†_a c_b + h.c.)]` for both spin species, `|a - b| = 1`.
pub fn apply_paired_givens(psi: &mut StateVector, orbital_a: usize, orbital_b: usize, theta: f64) -> Result<()> {
    let n = psi.basis().n_sites();
    if orbital_a.abs_diff(orbital_b) != 1 || orbital_a.max(orbital_b) >= n {
        return Err(Error::JwAdjacency(orbital_a, orbital_b));
    }
    let basis = psi.basis().clone();
    let (c, s) = (theta.cos(), theta.sin());
    for offset in [0, n] {
        let pairs = hop_pairs(&basis, orbital_a + offset, orbital_b + offset);
        rotate(psi.amplitudes_mut(), &pairs, c, s);
    }
    Ok(())
}

/// Multiplies every word with `orbital` doubly occupied by `e^{iφ}`.
pub fn apply_onsite_phase(psi: &mut StateVector, orbital: usize, phi: f64) {
    let basis = psi.basis().clone();
    let phase = Complex64::from_polar(1.0, phi);
    let amps = psi.amplitudes_mut();
    for i in doublon_indices(&basis, orbital) {
        amps[i as usize] *= phase;
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Kernel {
    Hop { up: Vec<[u32; 2]>, dn: Vec<[u32; 2]> },
    Phase { doublons: Vec<u32> },
}

impl Kernel {
    fn apply(&self, theta: f64, amps: &mut [Complex64]) {
        match self {
            Kernel::Hop { up, dn } => {
                let (c, s) = (theta.cos(), theta.sin());
                rotate(amps, up, c, s);
                rotate(amps, dn, c, s);
            }
            Kernel::Phase { doublons } => {
                let phase = Complex64::from_polar(1.0, theta);
                for &i in doublons {
                    amps[i as usize] *= phase;
                }
            }
        }
    }

    /// `⟨lam|G|psi⟩` for the Hermitian generator `G`.
    fn matrix_element(&self, lam: &[Complex64], psi: &[Complex64]) -> Complex64 {
        match self {
            Kernel::Hop { up, dn } => up
                .iter()
                .chain(dn)
                .map(|&[a, b]| {
                    let (a, b) = (a as usize, b as usize);
                    lam[a].conj() * psi[b] + lam[b].conj() * psi[a]
                })
                .sum(),
            Kernel::Phase { doublons } => doublons.iter().map(|&i| lam[i as usize].conj() * psi[i as usize]).sum(),
        }
    }

    /// Returns `⟨lam|G|psi⟩`, then applies `exp(-iθG)` to both vectors.
    fn element_then_undo(&self, theta: f64, lam: &mut [Complex64], psi: &mut [Complex64]) -> Complex64 {
        let g = self.matrix_element(lam, psi);
        self.apply(-theta, psi);
        self.apply(-theta, lam);
        g
    }

    /// Dense generator matrix, for tests.
    #[cfg(test)]
    pub(crate) fn dense(&self, dim: usize) -> nalgebra::DMatrix<Complex64> {
        let mut m = nalgebra::DMatrix::zeros(dim, dim);
        match self {
            Kernel::Hop { up, dn } => {
                for &[a, b] in up.iter().chain(dn) {
                    m[(a as usize, b as usize)] += Complex64::new(1.0, 0.0);
                    m[(b as usize, a as usize)] += Complex64::new(1.0, 0.0);
                }
            }
            Kernel::Phase { doublons } => {
                for &i in doublons {
                    m[(i as usize, i as usize)] = Complex64::new(1.0, 0.0);
                }
            }
        }
        m
    }
}

/// Ansatz program bound to a basis, with per-generator index tables.
#[derive(Debug, Clone)]
pub struct CompiledAnsatz {
    program: AnsatzProgram,
    basis: Arc<SectorBasis>,
    layer: Vec<Kernel>,
}

impl CompiledAnsatz {
    pub fn new(program: AnsatzProgram, basis: Arc<SectorBasis>) -> Result<Self> {
        if basis.n_sites() != program.n_sites {
            return Err(Error::IncompatibleBasis(format!(
                "ansatz on {} sites, basis on {}",
                program.n_sites,
                basis.n_sites()
            )));
        }
        let n = program.n_sites;
        let layer = program
            .layer()
            .into_iter()
            .map(|g| match g {
                Generator::Hop { orbital } => Kernel::Hop {
                    up: hop_pairs(&basis, orbital, orbital + 1),
                    dn: hop_pairs(&basis, n + orbital, n + orbital + 1),
                },
                Generator::OnSite { orbital } => Kernel::Phase {
                    doublons: doublon_indices(&basis, orbital),
                },
            })
            .collect();
        Ok(CompiledAnsatz { program, basis, layer })
    }

    pub fn program(&self) -> &AnsatzProgram {
        &self.program
    }

    pub fn basis(&self) -> &Arc<SectorBasis> {
        &self.basis
    }

    pub(crate) fn kernel(&self, m: usize) -> &Kernel {
        &self.layer[m % self.layer.len()]
    }

    /// Applies the full parameterized circuit to `amps` in place.
    pub fn apply(&self, params: &[f64], amps: &mut [Complex64]) -> Result<()> {
        self.program.check(params)?;
        if amps.len() != self.basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.basis.dim(),
                found: amps.len(),
            });
        }
        for (m, &theta) in params.iter().enumerate() {
            self.kernel(m).apply(theta, amps);
        }
        Ok(())
    }

    pub fn run(&self, params: &[f64], psi0: &StateVector) -> Result<StateVector> {
        let mut out = psi0.clone();
        self.apply(params, out.amplitudes_mut())?;
        Ok(out)
    }

    /// Adjoint sweep: with `psi` the final state and `lam = H psi`, returns
    /// `dE/dθ_m = -2 Im⟨lam_m|G_m|psi_m⟩` for every parameter. Both buffers
    /// are rewound to the initial state in the process.
    pub(crate) fn backward(&self, params: &[f64], psi: &mut [Complex64], lam: &mut [Complex64], grad: &mut [f64]) {
        for m in (0..params.len()).rev() {
            let g = self.kernel(m).element_then_undo(params[m], lam, psi);
            grad[m] = -2.0 * g.im;
        }
    }
}

/// Runs `program` with `params` on `psi0`.
pub fn run_ansatz(program: &AnsatzProgram, params: &[f64], psi0: &StateVector) -> Result<StateVector> {
    program.check(params)?;
    CompiledAnsatz::new(*program, psi0.basis().clone())?.run(params, psi0)
}
