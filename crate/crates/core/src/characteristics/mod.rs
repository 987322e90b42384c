//! Per-realization characteristic quantities, discretized spectral measures,
//! the `d#` metric and the pushforward maps to mixing measures.
//!
//! All quantities are functionals of one realization `p*` at one `n`, with
//! `b = b_n` and `c = c_n` taken from a [`NormingSequence`].

mod prokhorov;
mod pushforward;

pub use prokhorov::{dsharp, prokhorov};
pub use pushforward::{
    pushforward_alpha, pushforward_constant, pushforward_one, Nu12Atom, Pushforward,
};

use serde::{Deserialize, Serialize};

use crate::directing::DirectingMeasure;
use crate::error::{Error, Result};
use crate::measure::AtomicMeasure;
use crate::stable::{norming_values, NormingSequence};

/// Default truncation of the outer `d#` integral.
pub const DEFAULT_R_MAX: f64 = 20.0;

/// Spectral function `Λ_α` of a stable law: `c⁺x^α` on `(0, ∞)` and
/// `−c⁻|x|^α` on `(−∞, 0)`. Both constants zero encodes the null measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralParams {
    pub alpha: f64,
    pub c_minus: f64,
    pub c_plus: f64,
}

impl SpectralParams {
    pub fn new(alpha: f64, c_minus: f64, c_plus: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::param("alpha", format!("{alpha} is outside (0, 2)")));
        }
        if !(c_minus >= 0.0 && c_plus >= 0.0 && c_minus.is_finite() && c_plus.is_finite()) {
            return Err(Error::param(
                "c",
                "spectral constants must be finite and nonnegative",
            ));
        }
        Ok(Self {
            alpha,
            c_minus,
            c_plus,
        })
    }

    pub fn null(alpha: f64) -> Self {
        Self {
            alpha,
            c_minus: 0.0,
            c_plus: 0.0,
        }
    }

    pub fn is_null(&self) -> bool {
        self.c_minus == 0.0 && self.c_plus == 0.0
    }

    /// `λ(−1, 1) = c⁻ + c⁺`
    pub fn total(&self) -> f64 {
        self.c_minus + self.c_plus
    }
}

/// `Λ_α(x)`; zero at the origin.
pub fn spectral_cdf(params: &SpectralParams, x: f64) -> f64 {
    if x > 0.0 {
        params.c_plus * x.powf(params.alpha)
    } else if x < 0.0 {
        -params.c_minus * (-x).powf(params.alpha)
    } else {
        0.0
    }
}

/// `±2^k` for `k = −10, …, 10`, sorted.
pub fn default_grid() -> Vec<f64> {
    let pos: Vec<f64> = (-10..=10).map(|k| 2f64.powi(k)).collect();
    let mut g: Vec<f64> = pos.iter().rev().map(|x| -x).collect();
    g.extend(pos);
    g
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::param("n", "must be at least 1"))
    } else {
        Ok(())
    }
}

/// `m_n*(τ) = (n/b_n) ∫_{|x| < τb_n} x p*(dx)`
pub fn trunc_mean(
    p: &DirectingMeasure,
    norming: &NormingSequence,
    n: u64,
    tau: f64,
) -> Result<f64> {
    check_n(n)?;
    if !(tau > 0.0) {
        return Err(Error::param("tau", "must be positive"));
    }
    let b = norming.b(n);
    Ok(n as f64 / b * p.truncated_mean(tau * b)?)
}

/// `m₁ₙ* = n ∫ b_n x / (b_n² + x²) p*(dx)`
pub fn smooth_mean(p: &DirectingMeasure, norming: &NormingSequence, n: u64) -> Result<f64> {
    check_n(n)?;
    Ok(n as f64 * p.smooth_mean(norming.b(n))?)
}

/// `σ_n*(η)² = (n/b_n²) [∫_{|x|<ηb_n} x² − (∫_{|x|<ηb_n} x)²]`, clamped at 0.
pub fn trunc_variance(
    p: &DirectingMeasure,
    norming: &NormingSequence,
    n: u64,
    eta: f64,
) -> Result<f64> {
    check_n(n)?;
    if !(eta > 0.0) {
        return Err(Error::param("eta", "must be positive"));
    }
    let b = norming.b(n);
    let [_, m1, m2] = p.truncated_moments(eta * b, false)?;
    Ok((n as f64 / (b * b) * (m2 - m1 * m1)).max(0.0))
}

/// Finite-window stand-in for `σ̄*(1/n)²`: the largest `σ_m*(η)²` over
/// `m` in the window with `η = 1/n_anchor`, `n_anchor` the largest window
/// element.
pub fn sigma_bar_proxy(
    p: &DirectingMeasure,
    norming: &NormingSequence,
    window: &[u64],
) -> Result<f64> {
    let anchor = *window
        .iter()
        .max()
        .ok_or_else(|| Error::param("window", "must not be empty"))?;
    if window.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("window", "must be increasing"));
    }
    let eta = 1.0 / anchor as f64;
    window.iter().try_fold(0.0f64, |acc, &m| {
        Ok(acc.max(trunc_variance(p, norming, m, eta)?))
    })
}

/// `L_n*(x)`: `n F*(xb_n)` for `x < 0`, `−n(1 − F*(xb_n))` for `x > 0`.
pub fn tail_function_l(
    p: &DirectingMeasure,
    norming: &NormingSequence,
    n: u64,
    x: f64,
) -> Result<f64> {
    check_n(n)?;
    let nf = n as f64;
    let b = norming.b(n);
    if x < 0.0 {
        Ok(nf * p.cdf(x * b)?)
    } else if x > 0.0 {
        Ok(-nf * p.sf(x * b)?)
    } else {
        Err(Error::Domain("L_n*(x) is undefined at x = 0".into()))
    }
}

/// `L_n*(−ε) − L_n*(ε) = n q*(εb_n)`
pub fn q_eps(p: &DirectingMeasure, norming: &NormingSequence, n: u64, eps: f64) -> Result<f64> {
    check_n(n)?;
    if !(eps > 0.0) {
        return Err(Error::param("eps", "must be positive"));
    }
    Ok(n as f64 * p.tail(eps * norming.b(n))?)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|&x| x == 0.0 || !x.is_finite()) {
        return Err(Error::param(
            "grid",
            "must consist of finite nonzero points",
        ));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("grid", "must be strictly increasing"));
    }
    Ok(())
}

// cells of a sorted grid: on each half-line the atom sits at the grid point
// farther from the origin, the innermost cell reaching to 0
fn discretize<P, N>(grid: &[f64], pos_upto: P, neg_from: N) -> Result<AtomicMeasure>
where
    P: Fn(f64) -> Result<f64>,
    N: Fn(f64) -> Result<f64>,
{
    check_grid(grid)?;
    let mut atoms = Vec::with_capacity(grid.len());
    let mut push = |x: f64, mass: f64| -> Result<()> {
        if mass < -1e-12 * (1.0 + mass.abs()) {
            return Err(Error::Invariant(format!(
                "spectral increment {mass:e} at {x} is negative"
            )));
        }
        atoms.push((x, mass.max(0.0)));
        Ok(())
    };
    let mut prev = 0.0;
    for &x in grid.iter().filter(|&&x| x > 0.0) {
        let cur = pos_upto(x)?;
        push(x, cur - prev)?;
        prev = cur;
    }
    // λ([x, 0)) for x < 0, walked outward from the origin
    let mut prev = 0.0;
    for &x in grid.iter().rev().filter(|&&x| x < 0.0) {
        let cur = neg_from(x)?;
        push(x, cur - prev)?;
        prev = cur;
    }
    AtomicMeasure::new(atoms)
}

/// Discretized `λ_n*`, the Lebesgue–Stieltjes measure of
/// `G_n*(x) = −nF*(b_n/x)` (`x < 0`), `n(1 − F*(b_n/x))` (`x > 0`).
pub fn spectral_measure_lambda(
    p: &DirectingMeasure,
    norming: &NormingSequence,
    n: u64,
    grid: &[f64],
) -> Result<AtomicMeasure> {
    check_n(n)?;
    let nf = n as f64;
    let b = norming.b(n);
    discretize(grid, |x| Ok(nf * p.sf(b / x)?), |x| Ok(nf * p.cdf(b / x)?))
}

/// `Λ_α` discretized with the same cell convention as
/// [`spectral_measure_lambda`].
pub fn discretize_spectral(params: &SpectralParams, grid: &[f64]) -> Result<AtomicMeasure> {
    discretize(
        grid,
        |x| Ok(spectral_cdf(params, x)),
        |x| Ok(-spectral_cdf(params, x)),
    )
}

/// Result of fitting `Λ_α` to a discretized spectral measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralFit {
    pub params: SpectralParams,
    /// `d#` between the measure and the fitted `Λ_α`, both on the grid.
    pub residual: f64,
    /// `d#` between the measure and the null measure.
    pub null_distance: f64,
}

/// Fit `c±` with `α` fixed by least squares of `log λ((0, x])` against
/// `log c⁺ + α log x` over grid points `x` in `window` (and mirrored for
/// `c⁻`). A side with no mass in the window gets constant 0.
pub fn fit_spectral(
    lambda: &AtomicMeasure,
    alpha: f64,
    grid: &[f64],
    window: (f64, f64),
) -> Result<SpectralFit> {
    check_grid(grid)?;
    let fit_side = |sign: f64| -> f64 {
        let mut acc = 0.0;
        let mut count = 0usize;
        let mut pts: Vec<f64> = grid.iter().map(|x| x * sign).filter(|&x| x > 0.0).collect();
        pts.sort_by(f64::total_cmp);
        for x in pts {
            // λ((0, x]) or λ([−x, 0))
            let cum = if sign > 0.0 {
                lambda.mass_left_open(0.0, x)
            } else {
                lambda.mass_right_open(-x, 0.0)
            };
            if x >= window.0 && x <= window.1 && cum > 0.0 {
                acc += cum.ln() - alpha * x.ln();
                count += 1;
            }
        }
        if count == 0 {
            0.0
        } else {
            (acc / count as f64).exp()
        }
    };
    let params = SpectralParams::new(alpha, fit_side(-1.0), fit_side(1.0))?;
    let fitted = discretize_spectral(&params, grid)?;
    Ok(SpectralFit {
        params,
        residual: dsharp(lambda, &fitted, DEFAULT_R_MAX),
        null_distance: dsharp(lambda, &AtomicMeasure::null(), DEFAULT_R_MAX),
    })
}

/// The per-realization bundle of characteristic quantities at one `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharQuantities {
    pub n: u64,
    pub tau: f64,
    pub m_trunc: f64,
    pub m_smooth: f64,
    pub sigma2_trunc: f64,
    pub sigma2_bar_proxy: f64,
    pub lambda_n: AtomicMeasure,
    pub eps: f64,
    pub q_eps: f64,
}

/// Evaluate every characteristic quantity of `p` at `n`. The `σ̄*` proxy
/// uses `window`; `λ_n*` uses `grid`.
pub fn char_quantities(
    p: &DirectingMeasure,
    norming: &NormingSequence,
    n: u64,
    tau: f64,
    eps: f64,
    window: &[u64],
    grid: &[f64],
) -> Result<CharQuantities> {
    Ok(CharQuantities {
        n,
        tau,
        m_trunc: trunc_mean(p, norming, n, tau)?,
        m_smooth: smooth_mean(p, norming, n)?,
        sigma2_trunc: trunc_variance(p, norming, n, tau)?,
        sigma2_bar_proxy: sigma_bar_proxy(p, norming, window)?,
        lambda_n: spectral_measure_lambda(p, norming, n, grid)?,
        eps,
        q_eps: q_eps(p, norming, n, eps)?,
    })
}

/// Accompanying infinitely divisible pair of the row sum at `n`.
///
/// With `Y = X/b_n`, `m` the mean of `Y` over `|Y| ≤ τ` and `Y' = Y − m`:
/// `μ = n m + n E[Y'/(1 + Y'²)] − c_n` and `ψ(B) = n E[Y'²/(1 + Y'²); Y' ∈ B]`,
/// discretized on `grid` (cells between grid points, the two innermost cells
/// carried by an atom at 0, the unbounded outer cells by the outermost grid
/// points; interior cells by their geometric midpoint).
pub fn accompanying_pair(
    p: &DirectingMeasure,
    norming: &NormingSequence,
    n: u64,
    tau: f64,
    grid: &[f64],
) -> Result<(f64, AtomicMeasure)> {
    check_n(n)?;
    check_grid(grid)?;
    if !(tau > 0.0) {
        return Err(Error::param("tau", "must be positive"));
    }
    let nf = n as f64;
    let (b, c) = norming_values(norming, n)?;
    let m = p.truncated_moments(tau * b, true)?[1] / b;
    let shifted = |x: f64| x / b - m;
    let drift = p.expect_on(
        |x| {
            let y = shifted(x);
            y / (1.0 + y * y)
        },
        f64::NEG_INFINITY,
        f64::INFINITY,
    )?;
    let mu = nf * m + nf * drift - c;
    let weight = |y: f64| y * y / (1.0 + y * y);
    let mut edges = vec![f64::NEG_INFINITY];
    edges.extend(grid.iter().copied().filter(|&x| x < 0.0));
    edges.push(0.0);
    edges.extend(grid.iter().copied().filter(|&x| x > 0.0));
    edges.push(f64::INFINITY);
    let first_pos = grid.iter().copied().find(|&x| x > 0.0);
    let last_neg = grid.iter().copied().rfind(|&x| x < 0.0);
    let mut atoms = Vec::with_capacity(edges.len());
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let at = if lo == f64::NEG_INFINITY {
            hi
        } else if hi == f64::INFINITY {
            lo
        } else if Some(hi) == first_pos || Some(lo) == last_neg || lo == 0.0 || hi == 0.0 {
            0.0
        } else {
            lo.signum() * (lo * hi).sqrt()
        };
        // Y' ∈ [lo, hi)  ⇔  X ∈ [b(lo + m), b(hi + m))
        let mass = p.expect_on(|x| weight(shifted(x)), b * (lo + m), b * (hi + m))?;
        atoms.push((at, nf * mass));
    }
    Ok((mu, AtomicMeasure::new(atoms)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::directing::BaseFamily;
    use crate::quadrature::integrate;
    use std::f64::consts::PI;

    fn cauchy() -> DirectingMeasure {
        BaseFamily::Cauchy {
            location: 0.0,
            scale: 1.0,
        }
        .realize()
    }

    #[test]
    fn trunc_mean_examples() {
        let u = BaseFamily::Uniform { lo: -1.0, hi: 1.0 }.realize();
        let sq = NormingSequence::power(2.0);
        assert_eq!(trunc_mean(&u, &sq, 100, 1.0).unwrap(), 0.0);
        let a = BaseFamily::PointMass { at: 0.7 }.realize();
        let lin = NormingSequence::power(1.0);
        assert!((trunc_mean(&a, &lin, 100, 1.0).unwrap() - 0.7).abs() < 1e-15);
        assert_eq!(trunc_mean(&cauchy(), &lin, 1000, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn smooth_mean_examples() {
        let lin = NormingSequence::power(1.0);
        assert_eq!(smooth_mean(&cauchy(), &lin, 50).unwrap(), 0.0);
        let a = 3.0;
        let p = BaseFamily::PointMass { at: a }.realize();
        let n = 40.0;
        let v = smooth_mean(&p, &lin, 40).unwrap();
        assert!((v - n * n * a / (n * n + a * a)).abs() < 1e-12);
    }

    #[test]
    fn smooth_mean_gaussian_matches_monte_carlo() {
        use rand::SeedableRng;
        let p = BaseFamily::Gaussian { mean: 0.8, sd: 1.0 }.realize();
        let sq = NormingSequence::power(2.0);
        let n = 25u64;
        let b = 5.0;
        let v = smooth_mean(&p, &sq, n).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let draws = 400_000;
        let mc: f64 = (0..draws)
            .map(|_| {
                let x = p.sample(&mut rng);
                b * x / (b * b + x * x)
            })
            .sum::<f64>()
            / draws as f64
            * n as f64;
        assert!((v - mc).abs() < 1e-2, "{v} vs {mc}");
    }

    #[test]
    fn trunc_variance_examples() {
        let u = BaseFamily::Uniform { lo: -1.0, hi: 1.0 }.realize();
        let sq = NormingSequence::power(2.0);
        assert!((trunc_variance(&u, &sq, 100, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        let a = BaseFamily::PointMass { at: 2.0 }.realize();
        assert_eq!(
            trunc_variance(&a, &NormingSequence::power(1.0), 100, 1.0).unwrap(),
            0.0
        );
        let n: f64 = 1000.0;
        let v = trunc_variance(&cauchy(), &NormingSequence::power(1.0), 1000, 1.0).unwrap();
        assert!((v - 2.0 / PI * (n - n.atan()) / n).abs() < 1e-12);
    }

    #[test]
    fn sigma_bar_examples() {
        let lin = NormingSequence::power(1.0);
        let window = [1000, 2000, 5000, 10_000];
        let v = sigma_bar_proxy(&cauchy(), &lin, &window).unwrap();
        assert!(v <= 1e-3);
        let g = BaseFamily::Gaussian { mean: 0.0, sd: 1.0 }.realize();
        let v = sigma_bar_proxy(&g, &NormingSequence::power(2.0), &window).unwrap();
        assert!(v < 1e-6);
        let a = BaseFamily::PointMass { at: 1.0 }.realize();
        assert_eq!(sigma_bar_proxy(&a, &lin, &window).unwrap(), 0.0);
    }

    #[test]
    fn tail_function_examples() {
        let lin = NormingSequence::power(1.0);
        let v = tail_function_l(&cauchy(), &lin, 100_000, 1.0).unwrap();
        assert!((v + 1.0 / PI).abs() < 1e-5);
        let g = BaseFamily::Gaussian { mean: 0.0, sd: 1.0 }.realize();
        let v = tail_function_l(&g, &NormingSequence::power(2.0), 100, 1.0).unwrap();
        assert!((v / -7.619_853_024_160_5e-22 - 1.0).abs() < 1e-9);
        let z = BaseFamily::PointMass { at: 0.0 }.realize();
        assert_eq!(tail_function_l(&z, &lin, 10, 0.5).unwrap(), 0.0);
        assert!(tail_function_l(&z, &lin, 10, 0.0).is_err());
    }

    #[test]
    fn lambda_examples() {
        let grid = default_grid();
        let lin = NormingSequence::power(1.0);
        let lam = spectral_measure_lambda(&cauchy(), &lin, 100_000, &grid).unwrap();
        assert!((lam.mass_left_open(0.0, 1.0) - 1.0 / PI).abs() < 1e-6);
        assert!((lam.mass_open(-1.5, 1.5) - 2.0 / PI).abs() < 1e-6);
        let g = BaseFamily::Gaussian { mean: 0.0, sd: 1.0 }.realize();
        let lam =
            spectral_measure_lambda(&g, &NormingSequence::power(2.0), 100_000, &grid).unwrap();
        assert!(lam.mass_open(-20.0, 20.0) < 1e-12);
        let z = BaseFamily::PointMass { at: 0.0 }.realize();
        assert!(spectral_measure_lambda(&z, &lin, 10, &grid)
            .unwrap()
            .is_null());
    }

    #[test]
    fn lambda_is_additive_under_refinement() {
        let coarse = default_grid();
        let mut fine = coarse.clone();
        fine.extend(
            coarse
                .windows(2)
                .filter(|w| w[0] * w[1] > 0.0)
                .map(|w| 0.5 * (w[0] + w[1])),
        );
        fine.sort_by(f64::total_cmp);
        let p = BaseFamily::ParetoSkewed {
            tail_index: 1.5,
            scale: 1.0,
            right_weight: 0.7,
        }
        .realize();
        let norming = NormingSequence::power(1.5);
        let a = spectral_measure_lambda(&p, &norming, 1000, &coarse).unwrap();
        let b = spectral_measure_lambda(&p, &norming, 1000, &fine).unwrap();
        for x in [0.25, 1.0, 8.0] {
            assert!((a.mass_left_open(0.0, x) - b.mass_left_open(0.0, x)).abs() < 1e-12);
            assert!((a.mass_right_open(-x, 0.0) - b.mass_right_open(-x, 0.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn spectral_cdf_examples() {
        let s = SpectralParams::new(1.0, 1.0 / PI, 1.0 / PI).unwrap();
        assert!((spectral_cdf(&s, 1.0) - 1.0 / PI).abs() < 1e-16);
        assert!(spectral_cdf(&s, 1e-12).abs() < 1e-12);
        let one_sided = SpectralParams::new(1.5, 0.0, 2.0).unwrap();
        assert_eq!(spectral_cdf(&one_sided, -1.0), 0.0);
    }

    #[test]
    fn cauchy_fit_recovers_constants() {
        let grid = default_grid();
        let lam = spectral_measure_lambda(&cauchy(), &NormingSequence::power(1.0), 100_000, &grid)
            .unwrap();
        let fit = fit_spectral(&lam, 1.0, &grid, (1.0 / 16.0, 8.0)).unwrap();
        assert!((fit.params.c_plus - 1.0 / PI).abs() < 1e-4);
        assert!((fit.params.c_minus - 1.0 / PI).abs() < 1e-4);
        assert!(fit.residual < 1e-3);
        let wrong = fit_spectral(&lam, 1.5, &grid, (1.0 / 16.0, 8.0)).unwrap();
        assert!(wrong.residual > 10.0 * fit.residual);
    }

    #[test]
    fn accompanying_pair_examples() {
        let grid = default_grid();
        let z = BaseFamily::PointMass { at: 0.0 }.realize();
        let (mu, psi) =
            accompanying_pair(&z, &NormingSequence::power(1.0), 100, 1.0, &grid).unwrap();
        assert_eq!(mu, 0.0);
        assert!(psi.is_null());

        let g = BaseFamily::Gaussian { mean: 0.0, sd: 1.0 }.realize();
        let sq = NormingSequence::power(2.0);
        let (_, psi) = accompanying_pair(&g, &sq, 1_000_000, 1.0, &grid).unwrap();
        assert!((psi.total_mass() - 1.0).abs() < 1e-4);
        assert!(psi.mass_open(-0.01, 0.01) / psi.total_mass() > 0.99);

        // Cauchy: total mass n E[X²/(n² + X²)] = n/(n + 1)
        let lin = NormingSequence::power(1.0);
        let (mu, psi) = accompanying_pair(&cauchy(), &lin, 100, 1.0, &grid).unwrap();
        assert!(mu.abs() < 1e-12);
        assert!((psi.total_mass() - 100.0 / 101.0).abs() < 1e-8);
        let n = 100.0;
        let inner = integrate(
            |x: f64| {
                let y = x / n;
                n * y * y / (1.0 + y * y) / (PI * (1.0 + x * x))
            },
            0.0,
            n,
            "oracle",
        )
        .unwrap();
        assert!(
            (psi.mass_left_open(0.0, 1.0) + 0.5 * psi.mass_open(-1e-300, 1e-300) - inner).abs()
                < 1e-8
        );
    }
}
