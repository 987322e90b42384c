//! Mixtures of stable and infinitely divisible characteristic functions.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::Quadrature;
use crate::stable::{levy_khintchine_psi, stable_cf, LevyKhintchinePair, StableParams};

const WEIGHT_TOL: f64 = 1e-12;

fn check_weights(weights: impl Iterator<Item = f64>) -> Result<()> {
    let mut total = 0.0;
    let mut count = 0;
    for w in weights {
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::param("weight", format!("{w} must be positive")));
        }
        total += w;
        count += 1;
    }
    if count == 0 {
        return Err(Error::param(
            "atoms",
            "a mixing measure needs at least one atom",
        ));
    }
    if (total - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::param(
            "weight",
            format!("weights sum to {total}, not 1"),
        ));
    }
    Ok(())
}

/// Finite mixing measure over stable parameters.
///
/// Degenerate atoms (`c = 0`) are compatible with any index. Atoms with
/// different indices are only accepted through [`MixingMeasure::heterogeneous`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingMeasure {
    atoms: Vec<(StableParams, f64)>,
    heterogeneous: bool,
}

impl MixingMeasure {
    pub fn new(atoms: Vec<(StableParams, f64)>) -> Result<Self> {
        check_weights(atoms.iter().map(|a| a.1))?;
        let mut alpha = None;
        for (p, _) in &atoms {
            if p.is_point_mass() {
                continue;
            }
            match alpha {
                None => alpha = Some(p.alpha()),
                Some(a) if a != p.alpha() => {
                    return Err(Error::param(
                        "alpha",
                        "atoms have different indices; use MixingMeasure::heterogeneous",
                    ))
                }
                _ => {}
            }
        }
        Ok(Self {
            atoms,
            heterogeneous: false,
        })
    }

    /// Mixture allowed to combine different indices (counterexample input).
    pub fn heterogeneous(atoms: Vec<(StableParams, f64)>) -> Result<Self> {
        check_weights(atoms.iter().map(|a| a.1))?;
        let mut m = Self {
            atoms,
            heterogeneous: false,
        };
        let indices: Vec<f64> = m
            .atoms
            .iter()
            .filter(|a| !a.0.is_point_mass())
            .map(|a| a.0.alpha())
            .collect();
        m.heterogeneous = indices.windows(2).any(|w| w[0] != w[1]);
        Ok(m)
    }

    pub fn degenerate(params: StableParams) -> Self {
        Self {
            atoms: vec![(params, 1.0)],
            heterogeneous: false,
        }
    }

    pub fn atoms(&self) -> &[(StableParams, f64)] {
        &self.atoms
    }

    pub fn is_heterogeneous(&self) -> bool {
        self.heterogeneous
    }

    /// Common index of the non-degenerate atoms.
    pub fn alpha(&self) -> Option<f64> {
        if self.heterogeneous {
            return None;
        }
        self.atoms
            .iter()
            .find(|a| !a.0.is_point_mass())
            .map(|a| a.0.alpha())
    }
}

/// Finite mixing measure over Lévy–Khintchine pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdMixingMeasure {
    atoms: Vec<(LevyKhintchinePair, f64)>,
}

impl IdMixingMeasure {
    pub fn new(atoms: Vec<(LevyKhintchinePair, f64)>) -> Result<Self> {
        check_weights(atoms.iter().map(|a| a.1))?;
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[(LevyKhintchinePair, f64)] {
        &self.atoms
    }
}

pub fn mixture_cf(t: f64, mix: &MixingMeasure) -> Complex64 {
    mix.atoms.iter().map(|(p, w)| *w * stable_cf(t, p)).sum()
}

/// `Σ w ∏_k φ(t_k)`: a mixture of products.
pub fn joint_mixture_cf(ts: &[f64], mix: &MixingMeasure) -> Complex64 {
    mix.atoms
        .iter()
        .map(|(p, w)| {
            let g: Complex64 = ts.iter().map(|&t| crate::stable::eval_g(t, p)).sum();
            *w * g.exp()
        })
        .sum()
}

pub fn id_mixture_cf(ts: &[f64], mix: &IdMixingMeasure) -> Complex64 {
    mix.atoms
        .iter()
        .map(|(pair, w)| {
            let psi: Complex64 = ts.iter().map(|&t| levy_khintchine_psi(t, pair)).sum();
            *w * psi.exp()
        })
        .sum()
}

/// `∫₀^∞ e^{−t²σ²/2} √(2/π) e^{−1/(2σ²)} σ^{−2} dσ`, integrated in `u = 1/σ`.
pub fn example1_gaussian_mixture(t: f64, quadrature_tol: f64) -> Result<f64> {
    example1_scaled(t, quadrature_tol, 1.0)
}

/// The same integral with the mixing density multiplied by `factor`.
#[doc(hidden)]
pub fn example1_scaled(t: f64, quadrature_tol: f64, factor: f64) -> Result<f64> {
    if !(quadrature_tol > 0.0) {
        return Err(Error::param("quadrature_tol", "must be positive"));
    }
    let norm = factor * (2.0 / PI).sqrt();
    let t2 = t * t;
    let q = Quadrature {
        abs_tol: quadrature_tol * 0.1,
        rel_tol: 1e-15,
        max_intervals: 4000,
    };
    let est = q
        .integrate(
            |u| {
                if u == 0.0 {
                    return if t2 == 0.0 { norm } else { 0.0 };
                }
                norm * (-0.5 * t2 / (u * u) - 0.5 * u * u).exp()
            },
            0.0,
            f64::INFINITY,
        )
        .map_err(|e| match e {
            Error::Quadrature {
                achieved,
                requested,
                ..
            } => Error::Quadrature {
                context: format!("Gaussian scale mixture at t = {t}"),
                achieved,
                requested,
            },
            other => other,
        })?;
    if est.error > quadrature_tol {
        return Err(Error::Quadrature {
            context: format!("Gaussian scale mixture at t = {t}"),
            achieved: est.error,
            requested: quadrature_tol,
        });
    }
    Ok(est.value)
}

/// Residuals of the Gaussian scale mixture identity on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub quadrature_tol: f64,
    pub points: Vec<(f64, f64, f64)>,
    pub max_residual: f64,
}

/// Evaluate the identity `e^{−|t|} = ∫ …` at `t = 0, 0.25, …, 5`.
pub fn verify_example1(quadrature_tol: f64, factor: f64) -> Result<IdentityCheck> {
    let mut points = Vec::with_capacity(21);
    let mut max_residual = 0.0f64;
    for k in 0..=20 {
        let t = 0.25 * k as f64;
        let v = example1_scaled(t, quadrature_tol, factor)?;
        let target = (-t).exp();
        max_residual = max_residual.max((v - target).abs());
        points.push((t, v, target));
    }
    Ok(IdentityCheck {
        quadrature_tol,
        points,
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::AtomicMeasure;

    fn sp(a: f64, g: f64, c: f64, b: f64) -> StableParams {
        StableParams::new(a, g, c, b).unwrap()
    }

    #[test]
    fn two_atom_cauchy() {
        let mix = MixingMeasure::new(vec![
            (sp(1.0, 0.0, 1.0, 0.0), 0.5),
            (sp(1.0, 0.0, 2.0, 0.0), 0.5),
        ])
        .unwrap();
        let one = mixture_cf(1.0, &mix);
        let want = 0.5 * ((-1.0f64).exp() + (-2.0f64).exp());
        assert!((one.re - want).abs() < 1e-15 && one.im.abs() < 1e-15);
        assert!((want - 0.251_607).abs() < 1e-6);
        let joint = joint_mixture_cf(&[1.0, 1.0], &mix).re;
        let want_joint = 0.5 * ((-2.0f64).exp() + (-4.0f64).exp());
        assert!((joint - want_joint).abs() < 1e-15);
        assert!((joint - one.re * one.re - 0.013_520).abs() < 1e-6);
    }

    #[test]
    fn single_atom_factorizes() {
        let mix = MixingMeasure::degenerate(sp(1.5, 0.3, 1.2, 0.4));
        let ts = [0.5, -1.0, 2.0];
        let joint = joint_mixture_cf(&ts, &mix);
        let prod: Complex64 = ts.iter().map(|&t| mixture_cf(t, &mix)).product();
        assert!((joint - prod).norm() < 1e-14);
        assert!((joint_mixture_cf(&[0.7], &mix) - mixture_cf(0.7, &mix)).norm() == 0.0);
    }

    #[test]
    fn mixed_indices_need_opt_in() {
        let atoms = vec![(sp(1.0, 0.0, 1.0, 0.0), 0.5), (sp(1.5, 0.0, 1.0, 0.0), 0.5)];
        assert!(MixingMeasure::new(atoms.clone()).is_err());
        let m = MixingMeasure::heterogeneous(atoms).unwrap();
        assert!(m.is_heterogeneous());
        assert_eq!(m.alpha(), None);
        let with_point = MixingMeasure::new(vec![
            (sp(1.5, 0.0, 1.0, 0.0), 0.5),
            (StableParams::point_mass(0.0), 0.5),
        ])
        .unwrap();
        assert_eq!(with_point.alpha(), Some(1.5));
    }

    #[test]
    fn weights_must_sum_to_one() {
        assert!(MixingMeasure::new(vec![(sp(1.0, 0.0, 1.0, 0.0), 0.6)]).is_err());
    }

    #[test]
    fn id_mixture_matches_gaussian_atoms() {
        let a = (1.0, 0.3);
        let b = (-0.5, 2.0);
        let stable = MixingMeasure::new(vec![
            (sp(2.0, a.0, a.1, 0.0), 0.25),
            (sp(2.0, b.0, b.1, 0.0), 0.75),
        ])
        .unwrap();
        let id = IdMixingMeasure::new(vec![
            (LevyKhintchinePair::gaussian(a.0, a.1).unwrap(), 0.25),
            (LevyKhintchinePair::gaussian(b.0, b.1).unwrap(), 0.75),
        ])
        .unwrap();
        for k in -20..=20 {
            let t = 0.2 * k as f64;
            assert!((mixture_cf(t, &stable) - id_mixture_cf(&[t], &id)).norm() <= 1e-12);
        }
    }

    #[test]
    fn id_translations() {
        let mix = IdMixingMeasure::new(vec![
            (LevyKhintchinePair::new(1.0, AtomicMeasure::null()), 0.5),
            (LevyKhintchinePair::new(-2.0, AtomicMeasure::null()), 0.5),
        ])
        .unwrap();
        let v = id_mixture_cf(&[0.3, 0.4], &mix);
        let want = 0.5 * (Complex64::new(0.0, 0.7).exp() + Complex64::new(0.0, -1.4).exp());
        assert!((v - want).norm() < 1e-15);
        let g = IdMixingMeasure::new(vec![(
            LevyKhintchinePair::new(0.0, AtomicMeasure::unit(0.0).unwrap()),
            1.0,
        )])
        .unwrap();
        assert!((id_mixture_cf(&[2.0], &g).re - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn example1_identity() {
        assert!((example1_gaussian_mixture(0.0, 1e-10).unwrap() - 1.0).abs() < 1e-10);
        assert!((example1_gaussian_mixture(3.0, 1e-10).unwrap() - (-3.0f64).exp()).abs() < 1e-8);
        let check = verify_example1(1e-10, 1.0).unwrap();
        assert!(check.max_residual <= 1e-8);
        let bad = verify_example1(1e-10, 1.01).unwrap();
        assert!(bad.max_residual > 1e-3);
        let tight = verify_example1(1e-12, 1.0).unwrap();
        assert!(tight.max_residual <= 1e-8);
    }

    #[test]
    fn bochner_matrix_is_psd() {
        use nalgebra::DMatrix;
        let mix = MixingMeasure::new(vec![
            (sp(1.0, 0.5, 1.0, 0.3), 0.4),
            (sp(1.0, -1.0, 0.2, -0.8), 0.6),
        ])
        .unwrap();
        let grid: Vec<f64> = (-12..=12).map(|k| 0.4 * k as f64).collect();
        let n = grid.len();
        // Hermitian [φ(t_i − t_j)] as the real symmetric 2n×2n embedding
        let mut m = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let z = mixture_cf(grid[i] - grid[j], &mix);
                m[(i, j)] = z.re;
                m[(i + n, j + n)] = z.re;
                m[(i, j + n)] = -z.im;
                m[(i + n, j)] = z.im;
            }
        }
        let eig = m.symmetric_eigen();
        assert!(eig.eigenvalues.iter().all(|&e| e >= -1e-9));
    }
}
