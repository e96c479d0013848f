//! Lattice geometries for the Hubbard model.
//!
//! A [`LatticeSpec`] carries the hopping graph, per-site interactions and the
//! one-dimensional Jordan-Wigner ordering of the sites. Orbital `k` of the
//! fermionic basis is the `k`-th site along that ordering, so every other
//! module works in JW positions and only the Hamiltonian builder looks at the
//! geometric site labels.

use std::collections::BTreeSet;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Header value written into every serialized lattice.
pub const LATTICE_FORMAT: &str = "lattice-spec v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "open" => Ok(Boundary::Open),
            "periodic" => Ok(Boundary::Periodic),
            other => Err(Error::InvalidConfig(format!("unknown boundary `{other}`"))),
        }
    }
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Boundary::Open => f.write_str("open"),
            Boundary::Periodic => f.write_str("periodic"),
        }
    }
}

/// An undirected, spin-conserving hopping bond `(i, j)` with amplitude `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge(pub usize, pub usize, pub f64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub name: String,
    pub n_sites: usize,
    pub boundary: Boundary,
    /// `jw_order[k]` is the site at position `k` of the Jordan-Wigner path.
    pub jw_order: Vec<usize>,
    pub onsite_u: Vec<f64>,
    pub edges: Vec<Edge>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LatticeFile {
    format: String,
    #[serde(flatten)]
    spec: LatticeSpec,
}

impl LatticeSpec {
    /// Builds and validates a lattice from raw parts.
    pub fn new(
        name: impl Into<String>,
        n_sites: usize,
        edges: Vec<Edge>,
        onsite_u: Vec<f64>,
        jw_order: Vec<usize>,
        boundary: Boundary,
    ) -> Result<Self> {
        let spec = LatticeSpec {
            name: name.into(),
            n_sites,
            boundary,
            jw_order,
            onsite_u,
            edges,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_sites;
        if n == 0 {
            return Err(Error::InvalidGeometry("lattice has no sites".into()));
        }
        if self.onsite_u.len() != n {
            return Err(Error::InvalidGeometry(format!(
                "{} on-site interactions for {n} sites",
                self.onsite_u.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for &Edge(i, j, t) in &self.edges {
            if i >= n || j >= n {
                return Err(Error::InvalidGeometry(format!("edge ({i}, {j}) out of range")));
            }
            if i == j {
                return Err(Error::InvalidGeometry(format!("self loop at site {i}")));
            }
            if !t.is_finite() {
                return Err(Error::InvalidGeometry(format!("non-finite hopping on ({i}, {j})")));
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(Error::InvalidGeometry(format!("duplicate edge ({i}, {j})")));
            }
        }
        if self.jw_order.len() != n {
            return Err(Error::InvalidGeometry("jw_order length differs from n_sites".into()));
        }
        let mut hit = vec![false; n];
        for &s in &self.jw_order {
            if s >= n || hit[s] {
                return Err(Error::InvalidGeometry("jw_order is not a permutation".into()));
            }
            hit[s] = true;
        }
        Ok(())
    }

    /// Inverse of `jw_order`: position of each site along the path.
    pub fn jw_position(&self) -> Vec<usize> {
        let mut pos = vec![0; self.n_sites];
        for (k, &s) in self.jw_order.iter().enumerate() {
            pos[s] = k;
        }
        pos
    }

    /// Sets every on-site interaction to `u`.
    pub fn with_interaction(mut self, u: f64) -> Self {
        self.onsite_u = vec![u; self.n_sites];
        self
    }

    /// True when all hoppings equal 1 and all interactions are equal.
    pub fn is_pure(&self) -> bool {
        let u0 = self.onsite_u.first().copied().unwrap_or(0.0);
        self.edges.iter().all(|e| e.2 == 1.0) && self.onsite_u.iter().all(|&u| u == u0)
    }

    pub fn degree(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_sites];
        for &Edge(i, j, _) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    pub fn to_toml(&self) -> Result<String> {
        let file = LatticeFile {
            format: LATTICE_FORMAT.to_string(),
            spec: self.clone(),
        };
        toml::to_string(&file).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: LatticeFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if file.format != LATTICE_FORMAT {
            return Err(Error::Parse(format!(
                "unsupported lattice format {:?}, expected {LATTICE_FORMAT:?}",
                file.format
            )));
        }
        file.spec.validate()?;
        Ok(file.spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_toml()?)?;
        Ok(())
    }
}

/// Two-leg ladder of `length` columns with unit hopping and zero interaction.
///
/// Site `(row, col)` has label `2 * col + row`. The Jordan-Wigner path is the
/// column-major zigzag `(0,0), (1,0), (1,1), (0,1), (0,2), (1,2), ...`, which
/// makes every rung adjacent along the path. Periodic ladders wrap along the
/// leg direction only.
pub fn build_ladder(legs: usize, length: usize, boundary: Boundary) -> Result<LatticeSpec> {
    if legs != 2 {
        return Err(Error::InvalidGeometry(format!("only two-leg ladders are supported, got {legs}")));
    }
    if length < 2 {
        return Err(Error::InvalidGeometry(format!("ladder length {length} < 2")));
    }
    let site = |row: usize, col: usize| 2 * col + row;
    let mut edges = Vec::new();
    for col in 0..length {
        edges.push(Edge(site(0, col), site(1, col), 1.0));
    }
    for row in 0..2 {
        for col in 0..length - 1 {
            edges.push(Edge(site(row, col), site(row, col + 1), 1.0));
        }
    }
    // A length-2 wrap would duplicate the existing leg bonds.
    if boundary == Boundary::Periodic && length > 2 {
        for row in 0..2 {
            edges.push(Edge(site(row, length - 1), site(row, 0), 1.0));
        }
    }
    let jw_order = (0..length)
        .flat_map(|col| {
            if col % 2 == 0 {
                [site(0, col), site(1, col)]
            } else {
                [site(1, col), site(0, col)]
            }
        })
        .collect();
    LatticeSpec::new(
        format!("ladder-2x{length}-{boundary}"),
        2 * length,
        edges,
        vec![0.0; 2 * length],
        jw_order,
        boundary,
    )
}

/// The 8-site tilted periodic square cluster with periodicity vectors
/// `(2, 2)` and `(2, -2)`.
///
/// Sites are labelled so that label parity equals sublattice parity; every
/// even site then neighbours all four odd sites.
pub fn build_betts8() -> LatticeSpec {
    // Coset representatives (x, y) with x in 0..4, y in 0..2.
    let reduce = |x: i64, y: i64| -> (usize, usize) {
        let yr = y.rem_euclid(2);
        let shift = (y - yr) / 2;
        let xr = (x - 2 * shift).rem_euclid(4);
        (xr as usize, yr as usize)
    };
    let label = |x: usize, y: usize| 4 * y + (x + y) % 4;
    let mut set = BTreeSet::new();
    for y in 0..2i64 {
        for x in 0..4i64 {
            let a = label(x as usize, y as usize);
            for (dx, dy) in [(1, 0), (0, 1)] {
                let (nx, ny) = reduce(x + dx, y + dy);
                let b = label(nx, ny);
                set.insert((a.min(b), a.max(b)));
            }
        }
    }
    let edges = set.into_iter().map(|(i, j)| Edge(i, j, 1.0)).collect();
    LatticeSpec::new("betts8", 8, edges, vec![0.0; 8], (0..8).collect(), Boundary::Periodic)
        .expect("betts cluster construction is valid")
}

/// Parameters of the random-coupling model.
///
/// Realizations are drawn from `ChaCha20Rng::seed_from_u64(seed)`: first one
/// standard normal per edge in edge-list order, then one uniform per site in
/// label order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DisorderConfig {
    pub hopping_std: f64,
    pub u_min: f64,
    pub u_max: f64,
    pub seed: u64,
}

impl Default for DisorderConfig {
    fn default() -> Self {
        DisorderConfig {
            hopping_std: 0.2,
            u_min: 0.0,
            u_max: 16.0,
            seed: 0,
        }
    }
}

impl DisorderConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.hopping_std >= 0.0) {
            return Err(Error::InvalidConfig("hopping_std must be non-negative".into()));
        }
        if !(self.u_min <= self.u_max) {
            return Err(Error::InvalidConfig("u_min must not exceed u_max".into()));
        }
        Ok(())
    }
}

/// Replaces each hopping `t` by `t + hopping_std * g` and each interaction by a
/// uniform draw from `[u_min, u_max]`.
pub fn apply_disorder(spec: &LatticeSpec, cfg: &DisorderConfig) -> Result<LatticeSpec> {
    cfg.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut out = spec.clone();
    for edge in &mut out.edges {
        let g: f64 = StandardNormal.sample(&mut rng);
        edge.2 += cfg.hopping_std * g;
    }
    for u in &mut out.onsite_u {
        *u = if cfg.u_min == cfg.u_max {
            cfg.u_min
        } else {
            rng.random_range(cfg.u_min..=cfg.u_max)
        };
    }
    out.name = format!("{}-disorder{}", spec.name, cfg.seed);
    Ok(out)
}
