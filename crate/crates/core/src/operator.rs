//! Sector-restricted Hubbard Hamiltonian and total-spin operator.

use num_complex::Complex64;

use crate::basis::{hop, SectorBasis};
use crate::error::{Error, Result};
use crate::lattice::{Edge, LatticeSpec};
use crate::state::StateVector;

/// Real sparse matrix in row-compressed layout with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SparseOperator {
    /// Assembles an operator row by row; `row(i, &mut entries)` pushes
    /// `(column, value)` pairs, duplicates are summed and exact zeros dropped.
    pub fn from_rows(dim: usize, mut row: impl FnMut(usize, &mut Vec<(usize, f64)>)) -> Self {
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut entries = Vec::new();
        row_ptr.push(0);
        for i in 0..dim {
            entries.clear();
            row(i, &mut entries);
            entries.sort_unstable_by_key(|e| e.0);
            let mut k = 0;
            while k < entries.len() {
                let c = entries[k].0;
                let mut v = 0.0;
                while k < entries.len() && entries[k].0 == c {
                    v += entries[k].1;
                    k += 1;
                }
                if v != 0.0 {
                    cols.push(c as u32);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        SparseOperator { dim, row_ptr, cols, vals }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_rows(dim, |i, e| e.push((i, 1.0)))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self::from_rows(values.len(), |i, e| e.push((i, values[i])))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().map(|&c| c as usize).zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&(j as u32)) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal_entries(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|i| self.row(i).all(|(j, _)| j == i))
    }

    /// True if `|A_ij - A_ji| <= tol` for every stored entry.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.dim).all(|i| self.row(i).all(|(j, v)| (v - self.get(j, i)).abs() <= tol))
    }

    /// Upper bound on the spectral radius (max absolute row sum).
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `alpha * self + beta * other + shift * I`.
    pub fn combine(&self, alpha: f64, other: &SparseOperator, beta: f64, shift: f64) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(Self::from_rows(self.dim, |i, e| {
            e.extend(self.row(i).map(|(j, v)| (j, alpha * v)));
            e.extend(other.row(i).map(|(j, v)| (j, beta * v)));
            if shift != 0.0 {
                e.push((i, shift));
            }
        }))
    }

    /// `y = A x` on real vectors.
    pub fn apply_real(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for (i, yi) in y.iter_mut().enumerate() {
            let r = self.row_ptr[i]..self.row_ptr[i + 1];
            *yi = self.cols[r.clone()]
                .iter()
                .zip(&self.vals[r])
                .map(|(&c, &v)| v * x[c as usize])
                .sum();
        }
    }

    /// `y = A x` on complex vectors.
    pub fn apply_complex(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for (i, yi) in y.iter_mut().enumerate() {
            let r = self.row_ptr[i]..self.row_ptr[i + 1];
            let mut acc = Complex64::new(0.0, 0.0);
            for (&c, &v) in self.cols[r.clone()].iter().zip(&self.vals[r]) {
                acc += x[c as usize] * v;
            }
            *yi = acc;
        }
    }

    /// Real part of `⟨v|A|v⟩` together with its imaginary residue.
    pub fn expectation(&self, v: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, vi) in v.iter().enumerate() {
            let r = self.row_ptr[i]..self.row_ptr[i + 1];
            let mut row = Complex64::new(0.0, 0.0);
            for (&c, &val) in self.cols[r.clone()].iter().zip(&self.vals[r]) {
                row += v[c as usize] * val;
            }
            acc += vi.conj() * row;
        }
        acc
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }
}

/// Sparse matrix-vector product; the result is not normalized.
pub fn matvec(op: &SparseOperator, v: &StateVector) -> Result<StateVector> {
    if op.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            found: v.dim(),
        });
    }
    let mut out = StateVector::zeros(v.basis().clone());
    op.apply_complex(v.amplitudes(), out.amplitudes_mut());
    Ok(out)
}

/// Hubbard Hamiltonian `-Σ t_ij c†_iσ c_jσ + h.c. + Σ U_i n_i↑ n_i↓` on `basis`.
///
/// Sites are mapped to orbitals through the lattice's Jordan-Wigner order.
pub fn build_hubbard(spec: &LatticeSpec, basis: &SectorBasis) -> Result<SparseOperator> {
    if spec.n_sites != basis.n_sites() {
        return Err(Error::IncompatibleBasis(format!(
            "lattice has {} sites, basis has {}",
            spec.n_sites,
            basis.n_sites()
        )));
    }
    let n = spec.n_sites;
    let pos = spec.jw_position();
    let u_orb: Vec<f64> = {
        let mut u = vec![0.0; n];
        for (site, &k) in pos.iter().enumerate() {
            u[k] = spec.onsite_u[site];
        }
        u
    };
    let bonds: Vec<(usize, usize, f64)> = spec
        .edges
        .iter()
        .map(|&Edge(i, j, t)| (pos[i], pos[j], t))
        .collect();
    Ok(SparseOperator::from_rows(basis.dim(), |row, entries| {
        let w = basis.word(row);
        let doubles = (w & (w >> n)) & ((1u64 << n) - 1);
        let diag: f64 = (0..n).filter(|&k| doubles >> k & 1 == 1).map(|k| u_orb[k]).sum();
        entries.push((row, diag));
        for &(a, b, t) in &bonds {
            for offset in [0, n] {
                let (p, q) = (a + offset, b + offset);
                for (x, y) in [(p, q), (q, p)] {
                    if let Some((w2, sign)) = hop(w, x, y) {
                        let col = basis.index_of(w2).expect("hop stays in sector");
                        entries.push((col, -t * sign));
                    }
                }
            }
        }
    }))
}

/// Total spin `S² = S_z² + S_z + S⁻S⁺` restricted to `basis`.
pub fn build_s_squared(basis: &SectorBasis) -> SparseOperator {
    let n = basis.n_sites();
    let sz = (basis.n_up() as f64 - basis.n_dn() as f64) / 2.0;
    SparseOperator::from_rows(basis.dim(), |row, entries| {
        let w = basis.word(row);
        entries.push((row, sz * sz + sz));
        // S⁺_j = c†_{j↑} c_{j↓}, then S⁻_i = c†_{i↓} c_{i↑}.
        for j in 0..n {
            let Some((w1, s1)) = hop(w, j, n + j) else { continue };
            for i in 0..n {
                if let Some((w2, s2)) = hop(w1, n + i, i) {
                    let col = basis.index_of(w2).expect("S⁻S⁺ stays in sector");
                    entries.push((col, s1 * s2));
                }
            }
        }
    })
}

/// Total spin `S_z` of every state in `basis` (constant in-sector).
pub fn s_z(basis: &SectorBasis) -> f64 {
    (basis.n_up() as f64 - basis.n_dn() as f64) / 2.0
}
