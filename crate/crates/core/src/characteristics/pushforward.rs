//! Maps from the joint limit of `(η, λ)` to the mixing measure of the limit
//! law over stable parameters.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::SpectralParams;
use crate::error::{Error, Result};
use crate::mixture::MixingMeasure;
use crate::special::stable_scale_constant;
use crate::stable::StableParams;

/// One atom of the joint law of the smoothed mean and the spectral measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nu12Atom {
    pub eta: f64,
    pub spectral: SpectralParams,
    pub weight: f64,
}

/// Image mixing measure together with the location consistency check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pushforward {
    pub mixing: MixingMeasure,
    /// Location of the first atom.
    pub gamma: f64,
    /// Largest deviation of any atom's location from `gamma`.
    pub gamma_spread: f64,
    /// `true` when all atoms share one location.
    pub gamma_constant: bool,
}

/// `π csc(πα/2) / (2Γ(α))`, continuous at `α = 1` where it equals `π/2`.
pub fn pushforward_constant(alpha: f64) -> f64 {
    stable_scale_constant(alpha)
}

const GAMMA_TOL: f64 = 1e-9;

fn merge(atoms: Vec<(StableParams, f64)>) -> Result<MixingMeasure> {
    let mut merged: Vec<(StableParams, f64)> = Vec::with_capacity(atoms.len());
    for (p, w) in atoms {
        match merged.iter_mut().find(|(q, _)| *q == p) {
            Some(slot) => slot.1 += w,
            None => merged.push((p, w)),
        }
    }
    let total: f64 = merged.iter().map(|a| a.1).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::param(
            "weight",
            format!("atom weights sum to {total}, not 1"),
        ));
    }
    // remove rounding before the strict mixing-measure check
    for a in merged.iter_mut() {
        a.1 /= total;
    }
    MixingMeasure::new(merged)
}

/// `c = π csc(πα/2)/(2Γ(α)) λ(−1, 1)`, `β = (c⁺ − c⁻)/(c⁺ + c⁻)` (zero for the
/// null measure) and `γ = η − (c⁺ − c⁻)/(1 − α)` per atom.
pub fn pushforward_alpha(atoms: &[Nu12Atom], alpha: f64) -> Result<Pushforward> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::param("alpha", format!("{alpha} is outside (0, 2)")));
    }
    if (alpha - 1.0).abs() < 1e-3 {
        return Err(Error::param(
            "alpha",
            "within 1e-3 of 1; the location formula has a pole there, use pushforward_one",
        ));
    }
    if atoms.is_empty() {
        return Err(Error::param("atoms", "need at least one atom"));
    }
    let k = pushforward_constant(alpha);
    let mut out = Vec::with_capacity(atoms.len());
    let mut gammas = Vec::with_capacity(atoms.len());
    for a in atoms {
        let s = a.spectral;
        if !s.is_null() && s.alpha != alpha {
            return Err(Error::param(
                "alpha",
                format!(
                    "atom has spectral index {} but {alpha} was requested",
                    s.alpha
                ),
            ));
        }
        let total = s.total();
        let skew = s.c_plus - s.c_minus;
        let beta = if total == 0.0 { 0.0 } else { skew / total };
        let gamma = a.eta - skew / (1.0 - alpha);
        gammas.push(gamma);
        out.push((StableParams::new(alpha, gamma, k * total, beta)?, a.weight));
    }
    let gamma = gammas[0];
    let gamma_spread = gammas.iter().map(|g| (g - gamma).abs()).fold(0.0, f64::max);
    Ok(Pushforward {
        mixing: merge(out)?,
        gamma,
        gamma_spread,
        gamma_constant: gamma_spread <= GAMMA_TOL * (1.0 + gamma.abs()),
    })
}

/// `α = 1`: checks `|c⁺ − c⁻| ≤ tol (c⁺ + c⁻)` per atom and emits
/// `(γ = η, c = (π/2)(c⁺ + c⁻), β = 0)`.
pub fn pushforward_one(atoms: &[Nu12Atom], symmetric_check: f64) -> Result<MixingMeasure> {
    if atoms.is_empty() {
        return Err(Error::param("atoms", "need at least one atom"));
    }
    let mut out = Vec::with_capacity(atoms.len());
    for (i, a) in atoms.iter().enumerate() {
        let s = a.spectral;
        if !s.is_null() && s.alpha != 1.0 {
            return Err(Error::param(
                "alpha",
                format!("atom {i} has spectral index {}, expected 1", s.alpha),
            ));
        }
        if (s.c_plus - s.c_minus).abs() > symmetric_check * s.total() {
            return Err(Error::Invariant(format!(
                "atom {i} (eta = {}, c- = {}, c+ = {}) is asymmetric beyond tolerance {symmetric_check}",
                a.eta, s.c_minus, s.c_plus
            )));
        }
        out.push((
            StableParams::new(1.0, a.eta, FRAC_PI_2 * s.total(), 0.0)?,
            a.weight,
        ));
    }
    merge(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixture::mixture_cf;
    use crate::stable::stable_cf;
    use std::f64::consts::PI;

    fn atom(eta: f64, alpha: f64, cm: f64, cp: f64, weight: f64) -> Nu12Atom {
        Nu12Atom {
            eta,
            spectral: SpectralParams::new(alpha, cm, cp).unwrap(),
            weight,
        }
    }

    #[test]
    fn symmetric_atom() {
        let p = pushforward_alpha(&[atom(0.4, 1.5, 0.3, 0.3, 1.0)], 1.5).unwrap();
        let (params, w) = p.mixing.atoms()[0];
        assert_eq!(w, 1.0);
        assert_eq!(params.beta(), 0.0);
        assert_eq!(params.gamma(), 0.4);
        assert!(p.gamma_constant);
        // the image c.f. is the symmetric stable c.f.
        let direct = StableParams::new(1.5, 0.4, pushforward_constant(1.5) * 0.6, 0.0).unwrap();
        for t in [-2.0, 0.3, 1.7] {
            assert!((mixture_cf(t, &p.mixing) - stable_cf(t, &direct)).norm() < 1e-15);
        }
    }

    #[test]
    fn constant_is_continuous_at_one() {
        for a in [1.0 - 1e-6, 1.0 + 1e-6] {
            assert!((pushforward_constant(a) / FRAC_PI_2 - 1.0).abs() <= 1e-4);
        }
    }

    #[test]
    fn null_atom_is_point_mass() {
        let p = pushforward_alpha(&[atom(0.2, 1.5, 0.0, 0.0, 1.0)], 1.5).unwrap();
        let (params, _) = p.mixing.atoms()[0];
        assert!(params.is_point_mass());
        assert_eq!(params.gamma(), 0.2);
        assert_eq!(params.beta(), 0.0);
    }

    #[test]
    fn inconsistent_locations_are_flagged() {
        let p = pushforward_alpha(
            &[atom(0.0, 1.5, 0.3, 0.3, 0.5), atom(1.0, 1.5, 0.3, 0.3, 0.5)],
            1.5,
        )
        .unwrap();
        assert!(!p.gamma_constant);
        assert!((p.gamma_spread - 1.0).abs() < 1e-15);
        assert!(pushforward_alpha(&[atom(0.0, 1.2, 0.3, 0.3, 1.0)], 1.5).is_err());
        assert!(pushforward_alpha(&[atom(0.0, 1.0, 0.3, 0.3, 1.0)], 1.0).is_err());
    }

    #[test]
    fn alpha_one_cases() {
        let m = pushforward_one(&[atom(0.0, 1.0, 1.0 / PI, 1.0 / PI, 1.0)], 0.05).unwrap();
        let (p, _) = m.atoms()[0];
        assert!((p.c() - 1.0).abs() < 1e-15);
        let m = pushforward_one(&[atom(0.0, 1.0, 2.0 / PI, 2.0 / PI, 1.0)], 0.05).unwrap();
        assert!((m.atoms()[0].0.c() - 2.0).abs() < 1e-15);
        let m = pushforward_one(&[atom(0.3, 1.0, 0.0, 0.0, 1.0)], 0.05).unwrap();
        assert!(m.atoms()[0].0.is_point_mass());
        assert!(pushforward_one(&[atom(0.0, 1.0, 0.0, 1.0, 1.0)], 0.1).is_err());
    }
}
