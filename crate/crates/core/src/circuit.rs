//! Qubit-level export of the ansatz.
//!
//! Spin-up orbital `k` maps to qubit `k` and spin-down orbital `k` to qubit
//! `k + N`, so a qubit basis index equals the occupation word used by
//! [`SectorBasis`]. Every hop acts on neighbouring orbitals along the
//! Jordan-Wigner path, which makes each one a bare two-qubit Givens gate.
//!
//! Gate definitions:
//!
//! | gate | unitary |
//! |------|---------|
//! | `X(q)` | Pauli X |
//! | `GIVENS(a, b, θ)` | `exp(iθ (X_a X_b + Y_a Y_b) / 2)` |
//! | `RZZ(a, b, θ)` | `exp(-iθ Z_a Z_b / 2)` |
//! | `RZ(q, θ)` | `exp(-iθ Z_q / 2)` |
//! | `GLOBALPHASE(θ)` | `exp(iθ)` |
//!
//! With these, `exp(iφ n_↑ n_↓)` is `RZZ(-φ/2) RZ_↑(φ/2) RZ_↓(φ/2)` times a
//! global phase `φ/4`.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::ansatz::{initial_word, AnsatzProgram, Generator, Group};
use crate::basis::SectorBasis;
use crate::error::{Error, Result};
use crate::spin::Spin;
use crate::state::StateVector;

pub const HEADER_PREFIX: &str = "CIRCUIT v1 nqubits=";

/// Largest register the reference simulator accepts.
pub const MAX_SIMULATED_QUBITS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    X(usize),
    Givens(usize, usize, f64),
    Rzz(usize, usize, f64),
    Rz(usize, f64),
    GlobalPhase(f64),
}

impl Gate {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::X(_) => "X",
            Gate::Givens(..) => "GIVENS",
            Gate::Rzz(..) => "RZZ",
            Gate::Rz(..) => "RZ",
            Gate::GlobalPhase(_) => "GLOBALPHASE",
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::X(q) | Gate::Rz(q, _) => vec![q],
            Gate::Givens(a, b, _) | Gate::Rzz(a, b, _) => vec![a, b],
            Gate::GlobalPhase(_) => Vec::new(),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::X(q) => write!(f, "X {q}"),
            Gate::Givens(a, b, t) => write!(f, "GIVENS {a},{b},{t:.16e}"),
            Gate::Rzz(a, b, t) => write!(f, "RZZ {a},{b},{t:.16e}"),
            Gate::Rz(q, t) => write!(f, "RZ {q},{t:.16e}"),
            Gate::GlobalPhase(t) => write!(f, "GLOBALPHASE {t:.16e}"),
        }
    }
}

/// Which part of the circuit a block of gates belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tag {
    Init,
    Layer(usize, Group),
}

fn group_symbol(g: Group) -> &'static str {
    match g {
        Group::HopOdd => "T'",
        Group::HopEven => "T",
        Group::OnSite => "U",
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tag::Init => f.write_str("init"),
            Tag::Layer(l, g) => write!(f, "layer {l} {}", group_symbol(*g)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub tag: Tag,
    pub gates: Vec<Gate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateList {
    pub n_qubits: usize,
    pub blocks: Vec<Block>,
}

impl GateList {
    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.blocks.iter().flat_map(|b| b.gates.iter())
    }

    pub fn len(&self) -> usize {
        self.blocks.iter().map(|b| b.gates.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn counts(&self) -> GateCounts {
        let mut c = GateCounts::default();
        for g in self.gates() {
            c.add(g);
        }
        c
    }

    /// Sum of all `GLOBALPHASE` angles.
    pub fn global_phase(&self) -> f64 {
        self.gates()
            .map(|g| match g {
                Gate::GlobalPhase(t) => *t,
                _ => 0.0,
            })
            .sum()
    }

    fn validate(&self) -> Result<()> {
        for g in self.gates() {
            let qs = g.qubits();
            if qs.iter().any(|&q| q >= self.n_qubits) || (qs.len() == 2 && qs[0] == qs[1]) {
                return Err(Error::Parse(format!("gate `{g}` has invalid qubits for {} qubits", self.n_qubits)));
            }
        }
        Ok(())
    }

    pub fn write_text(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "{HEADER_PREFIX}{}", self.n_qubits)?;
        for b in &self.blocks {
            writeln!(out, "# {}", b.tag)?;
            for g in &b.gates {
                writeln!(out, "{g}")?;
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn read_text(input: impl BufRead) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        let header = lines.next().map(|(_, l)| l).transpose()?.unwrap_or_default();
        let n_qubits = header
            .trim()
            .strip_prefix(HEADER_PREFIX)
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad circuit header `{header}`")))?;
        let mut blocks: Vec<Block> = Vec::new();
        for (i, line) in lines {
            let line = line?;
            let line = line.trim();
            let at = |msg: &str| Error::Parse(format!("line {}: {msg}: `{line}`", i + 1));
            if line.is_empty() {
                continue;
            }
            if let Some(tag) = line.strip_prefix('#') {
                let tag = parse_tag(tag.trim()).ok_or_else(|| at("unknown block tag"))?;
                blocks.push(Block { tag, gates: Vec::new() });
                continue;
            }
            let gate = parse_gate(line).ok_or_else(|| at("malformed gate"))?;
            match blocks.last_mut() {
                Some(b) => b.gates.push(gate),
                None => return Err(at("gate before first block tag")),
            }
        }
        let list = GateList { n_qubits, blocks };
        list.validate()?;
        Ok(list)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        self.write_text(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_text(std::io::BufReader::new(file))
    }
}

fn parse_tag(s: &str) -> Option<Tag> {
    if s == "init" {
        return Some(Tag::Init);
    }
    let mut it = s.split_whitespace();
    if it.next()? != "layer" {
        return None;
    }
    let l = it.next()?.parse().ok()?;
    let g = match it.next()? {
        "T'" => Group::HopOdd,
        "T" => Group::HopEven,
        "U" => Group::OnSite,
        _ => return None,
    };
    it.next().is_none().then_some(Tag::Layer(l, g))
}

fn parse_gate(line: &str) -> Option<Gate> {
    let (name, args) = line.split_once(' ')?;
    let args: Vec<&str> = args.split(',').map(str::trim).collect();
    let q = |i: usize| args.get(i)?.parse::<usize>().ok();
    let a = |i: usize| args.get(i)?.parse::<f64>().ok().filter(|v| v.is_finite());
    let gate = match (name, args.len()) {
        ("X", 1) => Gate::X(q(0)?),
        ("GIVENS", 3) => Gate::Givens(q(0)?, q(1)?, a(2)?),
        ("RZZ", 3) => Gate::Rzz(q(0)?, q(1)?, a(2)?),
        ("RZ", 2) => Gate::Rz(q(0)?, a(1)?),
        ("GLOBALPHASE", 1) => Gate::GlobalPhase(a(0)?),
        _ => return None,
    };
    Some(gate)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GateCounts {
    pub x: usize,
    pub givens: usize,
    pub rzz: usize,
    pub rz: usize,
    pub global_phase: usize,
}

impl GateCounts {
    fn add(&mut self, g: &Gate) {
        match g {
            Gate::X(_) => self.x += 1,
            Gate::Givens(..) => self.givens += 1,
            Gate::Rzz(..) => self.rzz += 1,
            Gate::Rz(..) => self.rz += 1,
            Gate::GlobalPhase(_) => self.global_phase += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.x + self.givens + self.rzz + self.rz + self.global_phase
    }
}

/// Resource summary of a compiled program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResourceSummary {
    pub parameters: usize,
    pub init: GateCounts,
    pub per_layer: GateCounts,
    pub total: GateCounts,
    /// Parallel depth with all-to-all connectivity.
    pub depth: usize,
}

/// Gate counts for `program` at half filling, independent of the angles.
pub fn gate_counts(program: &AnsatzProgram) -> ResourceSummary {
    let n = program.n_sites;
    let hops = n.saturating_sub(1);
    let init = GateCounts { x: n, ..Default::default() };
    let per_layer = GateCounts {
        givens: 2 * hops,
        rzz: n,
        rz: 2 * n,
        global_phase: n,
        ..Default::default()
    };
    let l = program.n_layers;
    let total = GateCounts {
        x: n,
        givens: per_layer.givens * l,
        rzz: per_layer.rzz * l,
        rz: per_layer.rz * l,
        global_phase: per_layer.global_phase * l,
    };
    ResourceSummary {
        parameters: program.parameter_count(),
        init,
        per_layer,
        total,
        depth: 3 * l + 1,
    }
}

/// Gate list preparing the ansatz state for `params` from the product state
/// of total spin `spin`.
pub fn compile(program: &AnsatzProgram, params: &[f64], spin: Spin) -> Result<GateList> {
    if params.len() != program.parameter_count() {
        return Err(Error::ParameterLayout {
            expected: program.parameter_count(),
            found: params.len(),
        });
    }
    let n = program.n_sites;
    let word = initial_word(n, spin)?;
    let mut blocks = vec![Block {
        tag: Tag::Init,
        gates: (0..2 * n).filter(|q| word >> q & 1 == 1).map(Gate::X).collect(),
    }];
    let layer = program.layer();
    for (l, chunk) in params.chunks(program.params_per_layer().max(1)).enumerate() {
        for (generator, &angle) in layer.iter().zip(chunk) {
            let tag = Tag::Layer(l, generator.group());
            if blocks.last().is_none_or(|b| b.tag != tag) {
                blocks.push(Block { tag, gates: Vec::new() });
            }
            let gates = &mut blocks.last_mut().expect("pushed above").gates;
            match *generator {
                Generator::Hop { orbital: k } => {
                    gates.push(Gate::Givens(k, k + 1, angle));
                    gates.push(Gate::Givens(k + n, k + 1 + n, angle));
                }
                Generator::OnSite { orbital: k } => {
                    gates.push(Gate::Rzz(k, k + n, -angle / 2.0));
                    gates.push(Gate::Rz(k, angle / 2.0));
                    gates.push(Gate::Rz(k + n, angle / 2.0));
                    gates.push(Gate::GlobalPhase(angle / 4.0));
                }
            }
        }
    }
    Ok(GateList { n_qubits: 2 * n, blocks })
}

/// Dense state-vector simulation from `|0…0⟩`; index bit `q` is qubit `q`.
pub fn simulate(list: &GateList) -> Result<Vec<Complex64>> {
    if list.n_qubits > MAX_SIMULATED_QUBITS {
        return Err(Error::InvalidConfig(format!(
            "{} qubits exceed the simulator limit of {MAX_SIMULATED_QUBITS}",
            list.n_qubits
        )));
    }
    list.validate()?;
    let mut amps = vec![Complex64::default(); 1 << list.n_qubits];
    amps[0] = Complex64::new(1.0, 0.0);
    for g in list.gates() {
        apply_gate(&mut amps, g);
    }
    Ok(amps)
}

fn z(i: usize, q: usize) -> f64 {
    if i >> q & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

fn apply_gate(amps: &mut [Complex64], gate: &Gate) {
    match *gate {
        Gate::X(q) => {
            let bit = 1 << q;
            for i in 0..amps.len() {
                if i & bit == 0 {
                    amps.swap(i, i | bit);
                }
            }
        }
        Gate::Givens(a, b, t) => {
            let (ba, bb) = (1 << a, 1 << b);
            let (c, s) = (Complex64::new(t.cos(), 0.0), Complex64::new(0.0, t.sin()));
            for i in 0..amps.len() {
                if i & ba != 0 && i & bb == 0 {
                    let j = i ^ ba ^ bb;
                    let (x, y) = (amps[i], amps[j]);
                    amps[i] = c * x + s * y;
                    amps[j] = s * x + c * y;
                }
            }
        }
        Gate::Rzz(a, b, t) => {
            for (i, v) in amps.iter_mut().enumerate() {
                *v *= Complex64::from_polar(1.0, -0.5 * t * z(i, a) * z(i, b));
            }
        }
        Gate::Rz(q, t) => {
            for (i, v) in amps.iter_mut().enumerate() {
                *v *= Complex64::from_polar(1.0, -0.5 * t * z(i, q));
            }
        }
        Gate::GlobalPhase(t) => {
            let p = Complex64::from_polar(1.0, t);
            amps.iter_mut().for_each(|v| *v *= p);
        }
    }
}

/// Projects a full register state onto `basis`; also returns the norm
/// left outside the sector.
pub fn restrict_to_sector(amps: &[Complex64], basis: std::sync::Arc<SectorBasis>) -> Result<(StateVector, f64)> {
    let n_modes = basis.n_modes();
    if amps.len() != 1 << n_modes {
        return Err(Error::DimensionMismatch { expected: 1 << n_modes, found: amps.len() });
    }
    let inside: Vec<Complex64> = basis.states().iter().map(|&w| amps[w as usize]).collect();
    let kept: f64 = inside.iter().map(|a| a.norm_sqr()).sum();
    let total: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    Ok((StateVector::from_amplitudes(basis, inside)?, (total - kept).max(0.0)))
}
