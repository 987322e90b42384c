use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite measure on the real line made of weighted atoms.
///
/// Atoms are kept sorted by location with equal locations merged; every
/// stored mass is strictly positive. The empty measure is the null measure.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AtomicMeasure {
    atoms: Vec<(f64, f64)>,
}

impl AtomicMeasure {
    pub fn null() -> Self {
        Self { atoms: Vec::new() }
    }

    pub fn unit(location: f64) -> Result<Self> {
        Self::new(vec![(location, 1.0)])
    }

    /// Build from `(location, mass)` pairs. Zero masses are dropped; negative
    /// or non-finite masses and non-finite locations are rejected.
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (x, m) in atoms {
            if !x.is_finite() {
                return Err(Error::Invariant(format!(
                    "atom location {x} is not a real number (no mass at ±∞ allowed)"
                )));
            }
            if !m.is_finite() || m < 0.0 {
                return Err(Error::Invariant(format!(
                    "atom at {x} has invalid mass {m}"
                )));
            }
            if m > 0.0 {
                out.push((x, m));
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(out.len());
        for (x, m) in out {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += m,
                _ => merged.push((x, m)),
            }
        }
        Ok(Self { atoms: merged })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn is_null(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    /// Mass of the open interval `(lo, hi)`.
    pub fn mass_open(&self, lo: f64, hi: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|(x, _)| *x > lo && *x < hi)
            .map(|a| a.1)
            .sum()
    }

    /// Mass of the half-open interval `(lo, hi]`.
    pub fn mass_left_open(&self, lo: f64, hi: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|(x, _)| *x > lo && *x <= hi)
            .map(|a| a.1)
            .sum()
    }

    /// Mass of the half-open interval `[lo, hi)`.
    pub fn mass_right_open(&self, lo: f64, hi: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|(x, _)| *x >= lo && *x < hi)
            .map(|a| a.1)
            .sum()
    }

    /// Restriction to the open interval `(-r, r)`.
    pub fn restrict_open(&self, r: f64) -> Self {
        Self {
            atoms: self
                .atoms
                .iter()
                .copied()
                .filter(|(x, _)| x.abs() < r)
                .collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.atoms.iter().map(|&(x, m)| (x, m * factor)))
    }
}
