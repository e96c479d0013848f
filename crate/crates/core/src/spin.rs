use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Total spin quantum number, stored as `2S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Spin(u32);

impl Spin {
    pub const fn from_twice(twice: u32) -> Self {
        Spin(twice)
    }

    pub const fn integer(s: u32) -> Self {
        Spin(2 * s)
    }

    /// Accepts non-negative integers and half-integers.
    pub fn from_f64(s: f64) -> Result<Self> {
        let twice = 2.0 * s;
        if !(s >= 0.0) || (twice - twice.round()).abs() > 1e-9 || twice > 64.0 {
            return Err(Error::InvalidSpin(format!("{s} is not a non-negative half-integer")));
        }
        Ok(Spin(twice.round() as u32))
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// Eigenvalue `S(S + 1)` of the total-spin Casimir.
    pub fn casimir(self) -> f64 {
        let s = self.value();
        s * (s + 1.0)
    }

    /// Labels a `⟨S²⟩` expectation value when it lies within `tol` of some `S(S+1)`.
    pub fn classify(s_squared: f64, tol: f64) -> Option<Spin> {
        let s = (-1.0 + (1.0 + 4.0 * s_squared.max(0.0)).sqrt()) / 2.0;
        let spin = Spin((2.0 * s).round() as u32);
        ((s_squared - spin.casimir()).abs() < tol).then_some(spin)
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl Serialize for Spin {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.value())
    }
}

impl<'de> Deserialize<'de> for Spin {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(deserializer)?;
        Spin::from_f64(v).map_err(serde::de::Error::custom)
    }
}
