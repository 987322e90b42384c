//! Stable and infinitely divisible characteristic functions, exact stable
//! sampling, and norming sequences.
//!
//! Parameterization: the log characteristic function of a stable law is
//!
//! ```text
//! g(t; γ, c, β) = iγt − c|t|^α [1 + iβ w(t, α) sgn t]
//! w(t, α) = tan(πα/2)        α ≠ 1
//! w(t, 1) = (2/π) log|t|
//! ```
//!
//! The `α = 1` branch uses the classical constant `2/π`. Some typeset sources
//! print `log|t| / 2π`; that variant is not used anywhere in this crate.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::directing::BaseFamily;
use crate::error::{Error, Result};
use crate::measure::AtomicMeasure;
use crate::rng::{stream, BLOCK_STREAM};

/// One stable law, `(α, γ, c, β)`.
///
/// A zero scale is a point mass; it is stored in the canonical form
/// `(1, γ, 0, 0)` whatever `α` and `β` were supplied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStableParams")]
pub struct StableParams {
    alpha: f64,
    gamma: f64,
    c: f64,
    beta: f64,
}

#[derive(Deserialize)]
struct RawStableParams {
    alpha: f64,
    gamma: f64,
    c: f64,
    beta: f64,
}

impl TryFrom<RawStableParams> for StableParams {
    type Error = Error;
    fn try_from(raw: RawStableParams) -> Result<Self> {
        StableParams::new(raw.alpha, raw.gamma, raw.c, raw.beta)
    }
}

impl StableParams {
    pub fn new(alpha: f64, gamma: f64, c: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::param("alpha", format!("{alpha} is outside (0, 2]")));
        }
        if !gamma.is_finite() {
            return Err(Error::param("gamma", format!("{gamma} is not finite")));
        }
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::param(
                "c",
                format!("{c} must be a finite nonnegative scale"),
            ));
        }
        if !(-1.0..=1.0).contains(&beta) {
            return Err(Error::param("beta", format!("{beta} is outside [-1, 1]")));
        }
        if c == 0.0 {
            return Ok(Self::point_mass(gamma));
        }
        Ok(Self {
            alpha,
            gamma,
            c,
            beta,
        })
    }

    pub fn point_mass(gamma: f64) -> Self {
        Self {
            alpha: 1.0,
            gamma,
            c: 0.0,
            beta: 0.0,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_point_mass(&self) -> bool {
        self.c == 0.0
    }
}

/// `w(t, α)`; errors at `t = 0` when `α = 1`.
pub fn eval_w(t: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::param("alpha", format!("{alpha} is outside (0, 2]")));
    }
    if alpha == 1.0 {
        if t == 0.0 {
            return Err(Error::Domain("w(t, 1) is singular at t = 0".into()));
        }
        Ok(2.0 / PI * t.abs().ln())
    } else {
        Ok((PI * alpha / 2.0).tan())
    }
}

pub fn eval_g(t: f64, params: &StableParams) -> Complex64 {
    if t == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let p = params;
    let drift = Complex64::new(0.0, t * p.gamma);
    if p.c == 0.0 {
        return drift;
    }
    // α = 2: the skewness term multiplies tan(π) and is dropped exactly.
    let skew = if p.alpha == 2.0 || p.beta == 0.0 {
        0.0
    } else {
        p.beta * eval_w(t, p.alpha).expect("t != 0") * t.signum()
    };
    drift - p.c * t.abs().powf(p.alpha) * Complex64::new(1.0, skew)
}

pub fn stable_cf(t: f64, params: &StableParams) -> Complex64 {
    eval_g(t, params).exp()
}

/// Lévy–Khintchine pair `(μ, ρ)` with `ρ` a finite atomic measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyKhintchinePair {
    pub mu: f64,
    pub rho: AtomicMeasure,
}

impl LevyKhintchinePair {
    pub fn new(mu: f64, rho: AtomicMeasure) -> Self {
        Self { mu, rho }
    }

    /// The Gaussian pair with the same characteristic function as the α = 2
    /// stable law `(2, γ, c, ·)`: `ρ = 2c δ₀`, `μ = γ`.
    pub fn gaussian(gamma: f64, c: f64) -> Result<Self> {
        Ok(Self {
            mu: gamma,
            rho: AtomicMeasure::new(vec![(0.0, 2.0 * c)])?,
        })
    }
}

/// `(e^{itx} − 1 − itx/(1+x²)) (1+x²)/x²`, extended by `−t²/2` at `x = 0`.
pub fn lk_kernel(t: f64, x: f64) -> Complex64 {
    if x == 0.0 {
        return Complex64::new(-0.5 * t * t, 0.0);
    }
    let u = t * x;
    let x2 = x * x;
    // (e^{iu} − 1 − iu)/u², with a series near u = 0
    let core = if u.abs() < 1e-2 {
        let u2 = u * u;
        Complex64::new(
            -0.5 + u2 / 24.0 - u2 * u2 / 720.0,
            -u / 6.0 + u * u2 / 120.0 - u * u2 * u2 / 5040.0,
        )
    } else {
        (Complex64::new(0.0, u).exp() - 1.0 - Complex64::new(0.0, u)) / (u * u)
    };
    core * (t * t * (1.0 + x2)) + Complex64::new(0.0, u)
}

pub fn levy_khintchine_psi(t: f64, pair: &LevyKhintchinePair) -> Complex64 {
    pair.rho
        .atoms()
        .iter()
        .fold(Complex64::new(0.0, pair.mu * t), |acc, &(x, w)| {
            acc + w * lk_kernel(t, x)
        })
}

const SAMPLE_BLOCK: usize = 4096;

/// Standard stable variate in the `S_α(1, β, 0)` parameterization, by a
/// trigonometric transformation of a uniform angle and a unit exponential.
pub(crate) fn standard_stable<R: Rng + ?Sized>(alpha: f64, beta_st: f64, rng: &mut R) -> f64 {
    let v = PI * (rng.random::<f64>() - 0.5);
    let w: f64 = Exp1.sample(rng);
    if alpha == 1.0 {
        let shifted = FRAC_PI_2 + beta_st * v;
        2.0 / PI * (shifted * v.tan() - beta_st * ((FRAC_PI_2 * w * v.cos()) / shifted).ln())
    } else {
        let tan_half = (PI * alpha / 2.0).tan();
        let b = (beta_st * tan_half).atan() / alpha;
        let s = (1.0 + beta_st * beta_st * tan_half * tan_half).powf(1.0 / (2.0 * alpha));
        let arg = alpha * (v + b);
        s * arg.sin() / v.cos().powf(1.0 / alpha)
            * ((v - arg).cos() / w).powf((1.0 - alpha) / alpha)
    }
}

/// Draw one variate of the stable law `params`.
pub fn draw_stable<R: Rng + ?Sized>(params: &StableParams, rng: &mut R) -> f64 {
    let p = params;
    if p.c == 0.0 {
        return p.gamma;
    }
    if p.alpha == 2.0 {
        let z: f64 = StandardNormal.sample(rng);
        return p.gamma + (2.0 * p.c).sqrt() * z;
    }
    if p.alpha == 1.0 {
        let sigma = p.c;
        let z = standard_stable(1.0, p.beta, rng);
        sigma * z + p.gamma + 2.0 / PI * p.beta * sigma * sigma.ln()
    } else {
        // tan(πα/2) enters with the opposite sign convention to S-T.
        let sigma = p.c.powf(1.0 / p.alpha);
        sigma * standard_stable(p.alpha, -p.beta, rng) + p.gamma
    }
}

/// `count` i.i.d. draws from the stable law `params`.
///
/// Draws are produced in blocks of 4096, block `k` from the stream
/// `(seed, BLOCK_STREAM, k)`, so the output does not depend on the number of
/// worker threads.
pub fn sample_stable(params: &StableParams, count: usize, seed: u64) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::param("count", "must be at least 1"));
    }
    let blocks = count.div_ceil(SAMPLE_BLOCK);
    let mut out = vec![0.0; count];
    out.par_chunks_mut(SAMPLE_BLOCK)
        .enumerate()
        .for_each(|(k, chunk)| {
            let mut rng: ChaCha8Rng = stream(seed, &[BLOCK_STREAM, k as u64]);
            for x in chunk.iter_mut() {
                *x = draw_stable(params, &mut rng);
            }
        });
    debug_assert_eq!(out.len().div_ceil(SAMPLE_BLOCK), blocks);
    Ok(out)
}

/// Slowly varying factor `h(n)` of a norming sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SlowVariation {
    Constant,
    /// `h(n) = (1 + log n)^p`
    LogPower {
        p: f64,
    },
    /// `h(n) = (1 + log(1 + log n))^p`
    LogLogPower {
        p: f64,
    },
}

impl SlowVariation {
    pub fn eval(&self, n: f64) -> f64 {
        match *self {
            SlowVariation::Constant => 1.0,
            SlowVariation::LogPower { p } => (1.0 + n.ln()).powf(p),
            SlowVariation::LogLogPower { p } => (1.0 + (1.0 + n.ln()).ln()).powf(p),
        }
    }
}

/// Choice of the centering constants `a_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Centering {
    /// `a_n = 0`
    Zero,
    /// `a_n = n · mean`
    Linear { mean: f64 },
    /// `a_n = n ∫_{|x| < τ b_n} x F(dx)` for a fixed reference law `F`.
    TruncatedMean { tau: f64, reference: BaseFamily },
}

/// Norming constants `b_n = scale · n^{1/α} · h(n)` and centering
/// `c_n = a_n / b_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormingSequence {
    pub alpha: f64,
    #[serde(default = "default_slow")]
    pub slow: SlowVariation,
    #[serde(default = "default_scale")]
    pub scale: f64,
    #[serde(default = "default_centering")]
    pub centering: Centering,
    /// Test-only degenerate norming `b_n ≡ scale`; violates `b_n → ∞`.
    #[serde(default)]
    pub frozen: bool,
}

fn default_slow() -> SlowVariation {
    SlowVariation::Constant
}
fn default_scale() -> f64 {
    1.0
}
fn default_centering() -> Centering {
    Centering::Zero
}

impl NormingSequence {
    pub fn power(alpha: f64) -> Self {
        Self {
            alpha,
            slow: SlowVariation::Constant,
            scale: 1.0,
            centering: Centering::Zero,
            frozen: false,
        }
    }

    pub fn with_centering(mut self, centering: Centering) -> Self {
        self.centering = centering;
        self
    }

    pub fn with_slow(mut self, slow: SlowVariation) -> Self {
        self.slow = slow;
        self
    }

    pub fn frozen(scale: f64) -> Self {
        Self {
            alpha: 2.0,
            slow: SlowVariation::Constant,
            scale,
            centering: Centering::Zero,
            frozen: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(Error::param(
                "alpha",
                format!("{} is outside (0, 2]", self.alpha),
            ));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::param("scale", "must be positive"));
        }
        if let Centering::TruncatedMean { tau, reference } = &self.centering {
            if !(*tau > 0.0) {
                return Err(Error::param("tau", "must be positive"));
            }
            reference.validate()?;
        }
        Ok(())
    }

    pub fn b(&self, n: u64) -> f64 {
        if self.frozen {
            return self.scale;
        }
        let nf = n as f64;
        self.scale * nf.powf(1.0 / self.alpha) * self.slow.eval(nf)
    }

    pub fn a(&self, n: u64) -> Result<f64> {
        let nf = n as f64;
        Ok(match &self.centering {
            Centering::Zero => 0.0,
            Centering::Linear { mean } => nf * mean,
            Centering::TruncatedMean { tau, reference } => {
                nf * reference.realize().truncated_mean(tau * self.b(n))?
            }
        })
    }
}

/// `(b_n, c_n)` for the given sequence.
pub fn norming_values(seq: &NormingSequence, n: u64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    seq.validate()?;
    let b = seq.b(n);
    Ok((b, seq.a(n)? / b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn sp(a: f64, g: f64, c: f64, b: f64) -> StableParams {
        StableParams::new(a, g, c, b).unwrap()
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn w_values() {
        assert!((eval_w(2.0, 1.5).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(eval_w(1.0, 1.0).unwrap(), 0.0);
        assert!((eval_w(E, 1.0).unwrap() - 0.636_619_772_367_581_4).abs() < 1e-15);
        assert!(matches!(eval_w(0.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn g_values() {
        for beta in [-1.0, 0.0, 0.3, 1.0] {
            let g = eval_g(1.0, &sp(2.0, 0.0, 1.0, beta));
            assert_eq!(g, Complex64::new(-1.0, 0.0));
        }
        assert_eq!(
            eval_g(0.0, &sp(1.0, 3.0, 2.0, 0.5)),
            Complex64::new(0.0, 0.0)
        );
        let cauchy = stable_cf(1.0, &sp(1.0, 0.0, 1.0, 0.0));
        assert!((cauchy.re - (-1.0f64).exp()).abs() < 1e-16);
        assert_eq!(cauchy.im, 0.0);
    }

    #[test]
    fn cf_values() {
        let gauss = stable_cf(2.0, &sp(2.0, 0.0, 1.0, 0.0));
        assert!((gauss.re - (-4.0f64).exp()).abs() < 1e-16);
        // w = tan(3π/4) = -1, so g(1) = -1 + 0.5 i
        let v = stable_cf(1.0, &sp(1.5, 0.0, 1.0, 0.5));
        let e = (-1.0f64).exp();
        assert!((v.re - e * 0.5f64.cos()).abs() < 1e-15);
        assert!((v.im - e * 0.5f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn point_mass_is_canonical() {
        let p = sp(0.7, 5.0, 0.0, 0.9);
        assert_eq!(
            (p.alpha(), p.gamma(), p.c(), p.beta()),
            (1.0, 5.0, 0.0, 0.0)
        );
        assert!(StableParams::new(2.5, 0.0, 1.0, 0.0).is_err());
        assert!(StableParams::new(1.0, 0.0, -1.0, 0.0).is_err());
        assert!(StableParams::new(1.0, 0.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn psi_values() {
        let gauss = LevyKhintchinePair::new(0.0, AtomicMeasure::unit(0.0).unwrap());
        assert_eq!(levy_khintchine_psi(2.0, &gauss), Complex64::new(-2.0, 0.0));
        let shift = LevyKhintchinePair::new(3.0, AtomicMeasure::null());
        assert_eq!(
            levy_khintchine_psi(1.7, &shift),
            Complex64::new(0.0, 3.0 * 1.7)
        );
        let one = LevyKhintchinePair::new(0.0, AtomicMeasure::unit(1.0).unwrap());
        let expected = (Complex64::new(0.0, 1.0).exp() - 1.0 - Complex64::new(0.0, 0.5)) * 2.0;
        assert!((levy_khintchine_psi(1.0, &one) - expected).norm() < 1e-15);
    }

    #[test]
    fn kernel_is_continuous_at_origin() {
        for t in [0.5, 1.0, 3.0] {
            let at0 = lk_kernel(t, 0.0);
            for x in [1e-3, 1e-5, 1e-8] {
                assert!((lk_kernel(t, x) - at0).norm() < 2.0 * (t + t * t * t) * x);
            }
            // series and direct branches agree across the switch
            let below = lk_kernel(t, 0.999e-2 / t);
            let above = lk_kernel(t, 1.001e-2 / t);
            assert!((below - above).norm() < 1e-4);
        }
    }

    #[test]
    fn point_mass_sampling() {
        let xs = sample_stable(&sp(1.0, 5.0, 0.0, 0.0), 100, 1).unwrap();
        assert!(xs.iter().all(|&x| x == 5.0));
        assert!(sample_stable(&sp(1.0, 5.0, 0.0, 0.0), 0, 1).is_err());
    }

    #[test]
    fn gaussian_sample_variance() {
        let xs = sample_stable(&sp(2.0, 0.0, 1.0, 0.0), 100_000, 11).unwrap();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((1.9..=2.1).contains(&var), "variance {var}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let p = sp(1.3, 0.2, 0.7, -0.4);
        assert_eq!(
            sample_stable(&p, 9000, 5).unwrap(),
            sample_stable(&p, 9000, 5).unwrap()
        );
        assert_ne!(
            sample_stable(&p, 10, 5).unwrap(),
            sample_stable(&p, 10, 6).unwrap()
        );
    }

    #[test]
    fn norming_ratios() {
        let sq = NormingSequence::power(2.0);
        assert!((sq.b(4) / sq.b(1) - 2.0).abs() < 1e-15);
        let lin = NormingSequence::power(1.0);
        assert_eq!(lin.b(37), 37.0);
        assert!((lin.b(5 * 37) / lin.b(37) - 5.0).abs() < 1e-15);
        let (b, c) = norming_values(
            &NormingSequence::power(1.0).with_centering(Centering::Linear { mean: 2.0 }),
            10,
        )
        .unwrap();
        assert_eq!((b, c), (10.0, 2.0));
        assert_eq!(NormingSequence::frozen(1.0).b(1000), 1.0);
        assert!(norming_values(&lin, 0).is_err());
    }

    #[test]
    fn log_power_ratio_is_measured() {
        // b_{mn}/b_n = m² (1 + log mn)/(1 + log n) for α = 1/2, h = 1 + log n
        let seq = NormingSequence::power(0.5).with_slow(SlowVariation::LogPower { p: 1.0 });
        let n = (E * E).round() as u64;
        for m in [2u64, 3] {
            let ratio = seq.b(m * n) / seq.b(n);
            let nf = n as f64;
            let expected = (m * m) as f64 * (1.0 + (m as f64 * nf).ln()) / (1.0 + nf.ln());
            assert!((ratio / expected - 1.0).abs() < 1e-12);
        }
    }
}
