use std::sync::Arc;

use num_complex::Complex64;

use crate::basis::SectorBasis;
use crate::error::{Error, Result};

/// Complex amplitudes over a [`SectorBasis`].
#[derive(Debug, Clone)]
pub struct StateVector {
    basis: Arc<SectorBasis>,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zeros(basis: Arc<SectorBasis>) -> Self {
        let amps = vec![Complex64::new(0.0, 0.0); basis.dim()];
        StateVector { basis, amps }
    }

    pub fn from_amplitudes(basis: Arc<SectorBasis>, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: amps.len(),
            });
        }
        Ok(StateVector { basis, amps })
    }

    pub fn from_real(basis: Arc<SectorBasis>, values: &[f64]) -> Result<Self> {
        Self::from_amplitudes(basis, values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Computational basis state for `word`.
    pub fn product(basis: Arc<SectorBasis>, word: u64) -> Result<Self> {
        let idx = basis.index_of(word).ok_or_else(|| {
            Error::InvalidSector {
                n_sites: basis.n_sites(),
                n_up: (word & ((1 << basis.n_sites()) - 1)).count_ones() as usize,
                n_dn: (word >> basis.n_sites()).count_ones() as usize,
            }
        })?;
        let mut s = Self::zeros(basis);
        s.amps[idx] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn basis(&self) -> &Arc<SectorBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= n);
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        inner(&self.amps, &other.amps)
    }
}

/// `Σ conj(a_k) b_k`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
