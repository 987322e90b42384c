//! Random directing measures, exchangeable array sampling and normed sums.
//!
//! A [`DirectingLaw`] is a base family plus a randomizer acting on one of its
//! parameters. Drawing from it yields a [`DirectingMeasure`], one realization
//! of the random probability measure `p*`; given that realization every entry
//! of the array is i.i.d. One realization is shared by all rows and columns
//! of a replicate.
//!
//! Seeding: replicate `r` of a run with base seed `s` owns the seed
//! `derive_seed(s, [r])`. Its directing measure is drawn from the stream
//! `(DIRECTING_STREAM)` and row `i` from `(ROW_STREAM, i)` under that seed.

use std::f64::consts::{FRAC_1_PI, PI};

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::Quadrature;
use crate::rng::{derive_seed, stream, DIRECTING_STREAM, ROW_STREAM};
use crate::special::{normal_cdf, normal_interval, normal_pdf, normal_sf};
use crate::stable::{draw_stable, stable_cf, NormingSequence, StableParams};
use crate::stable_dist;

/// Parametric family of the directing measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BaseFamily {
    Gaussian {
        mean: f64,
        sd: f64,
    },
    Cauchy {
        location: f64,
        scale: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// Density `α s^α |x|^{−α−1} / 2` on `|x| ≥ s`.
    ParetoSymmetric {
        tail_index: f64,
        scale: f64,
    },
    /// Pareto tails of index `α` beyond `±s` with mass `right_weight` on the
    /// right and the rest on the left.
    ParetoSkewed {
        tail_index: f64,
        scale: f64,
        right_weight: f64,
    },
    Stable {
        params: StableParams,
    },
    PointMass {
        at: f64,
    },
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(
            name,
            format!("{v} must be positive and finite"),
        ))
    }
}

fn finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("{v} is not finite")))
    }
}

impl BaseFamily {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BaseFamily::Gaussian { mean, sd } => {
                finite("mean", mean)?;
                positive("sd", sd)
            }
            BaseFamily::Cauchy { location, scale } => {
                finite("location", location)?;
                positive("scale", scale)
            }
            BaseFamily::Uniform { lo, hi } => {
                finite("lo", lo)?;
                finite("hi", hi)?;
                if lo < hi {
                    Ok(())
                } else {
                    Err(Error::param("hi", "uniform bounds need lo < hi"))
                }
            }
            BaseFamily::ParetoSymmetric { tail_index, scale } => {
                positive("tail_index", tail_index)?;
                positive("scale", scale)
            }
            BaseFamily::ParetoSkewed {
                tail_index,
                scale,
                right_weight,
            } => {
                positive("tail_index", tail_index)?;
                positive("scale", scale)?;
                if (0.0..=1.0).contains(&right_weight) {
                    Ok(())
                } else {
                    Err(Error::param("right_weight", "must lie in [0, 1]"))
                }
            }
            BaseFamily::Stable { .. } => Ok(()),
            BaseFamily::PointMass { at } => finite("at", at),
        }
    }

    /// The measure itself, with stable laws that have closed forms mapped to
    /// their named family.
    pub fn realize(&self) -> DirectingMeasure {
        let law = match *self {
            BaseFamily::Gaussian { mean, sd } => Law::Gaussian { mean, sd },
            BaseFamily::Cauchy { location, scale } => Law::Cauchy { location, scale },
            BaseFamily::Uniform { lo, hi } => Law::Uniform { lo, hi },
            BaseFamily::ParetoSymmetric { tail_index, scale } => Law::Pareto {
                alpha: tail_index,
                scale,
                right: 0.5,
            },
            BaseFamily::ParetoSkewed {
                tail_index,
                scale,
                right_weight,
            } => Law::Pareto {
                alpha: tail_index,
                scale,
                right: right_weight,
            },
            BaseFamily::PointMass { at } => Law::Point { at },
            BaseFamily::Stable { params } => stable_law(params),
        };
        DirectingMeasure {
            family: self.clone(),
            law,
        }
    }
}

fn stable_law(p: StableParams) -> Law {
    if p.is_point_mass() {
        return Law::Point { at: p.gamma() };
    }
    if p.alpha() == 2.0 {
        return Law::Gaussian {
            mean: p.gamma(),
            sd: (2.0 * p.c()).sqrt(),
        };
    }
    if p.alpha() == 1.0 && p.beta() == 0.0 {
        return Law::Cauchy {
            location: p.gamma(),
            scale: p.c(),
        };
    }
    let (sigma, beta_st, shift) = if p.alpha() == 1.0 {
        let s = p.c();
        (s, p.beta(), p.gamma() + 2.0 / PI * p.beta() * s * s.ln())
    } else {
        (p.c().powf(1.0 / p.alpha()), -p.beta(), p.gamma())
    };
    Law::Stable {
        params: p,
        sigma,
        beta_st,
        shift,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Law {
    Gaussian {
        mean: f64,
        sd: f64,
    },
    Cauchy {
        location: f64,
        scale: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    Pareto {
        alpha: f64,
        scale: f64,
        right: f64,
    },
    Stable {
        params: StableParams,
        sigma: f64,
        beta_st: f64,
        shift: f64,
    },
    Point {
        at: f64,
    },
}

fn quad() -> Quadrature {
    Quadrature {
        abs_tol: 1e-13,
        rel_tol: 1e-10,
        max_intervals: 4000,
    }
}

// expm1(z)/z with the removable singularity filled in
fn expm1_ratio(z: f64) -> f64 {
    if z.abs() < 1e-8 {
        1.0 + z / 2.0
    } else {
        z.exp_m1() / z
    }
}

// α s^α ∫_s^T x^{k−α−1} dx
fn pareto_side(alpha: f64, s: f64, t: f64, k: i32) -> f64 {
    if t <= s {
        return 0.0;
    }
    let l = (t / s).ln();
    alpha * s.powi(k) * l * expm1_ratio((k as f64 - alpha) * l)
}

/// One realization of the directing measure `p*`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectingMeasure {
    family: BaseFamily,
    law: Law,
}

impl DirectingMeasure {
    pub fn family(&self) -> &BaseFamily {
        &self.family
    }

    /// Family-level symmetry about zero.
    pub fn is_symmetric(&self) -> bool {
        match self.law {
            Law::Gaussian { mean, .. } => mean == 0.0,
            Law::Cauchy { location, .. } => location == 0.0,
            Law::Uniform { lo, hi } => lo == -hi,
            Law::Pareto { right, .. } => right == 0.5,
            Law::Stable { params, .. } => params.gamma() == 0.0 && params.beta() == 0.0,
            Law::Point { at } => at == 0.0,
        }
    }

    pub fn is_point_mass(&self) -> bool {
        matches!(self.law, Law::Point { .. })
    }

    /// `(P(X ≤ x), P(X > x))`, each accurate on its own tail.
    pub fn cdf_sf(&self, x: f64) -> Result<(f64, f64)> {
        Ok(match self.law {
            Law::Gaussian { mean, sd } => {
                let z = (x - mean) / sd;
                (normal_cdf(z), normal_sf(z))
            }
            Law::Cauchy { location, scale } => (
                scale.atan2(location - x) * FRAC_1_PI,
                scale.atan2(x - location) * FRAC_1_PI,
            ),
            Law::Uniform { lo, hi } => {
                let f = ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
                let s = ((hi - x) / (hi - lo)).clamp(0.0, 1.0);
                (f, s)
            }
            Law::Pareto {
                alpha,
                scale,
                right,
            } => {
                let left = 1.0 - right;
                if x <= -scale {
                    let lower = left * (scale / -x).powf(alpha);
                    (lower, 1.0 - lower)
                } else if x < scale {
                    (left, right)
                } else {
                    let upper = right * (scale / x).powf(alpha);
                    (1.0 - upper, upper)
                }
            }
            Law::Stable {
                params,
                sigma,
                beta_st,
                shift,
            } => stable_dist::standard_cdf_sf(params.alpha(), beta_st, (x - shift) / sigma)?,
            Law::Point { at } => {
                if at <= x {
                    (1.0, 0.0)
                } else {
                    (0.0, 1.0)
                }
            }
        })
    }

    /// `P(X ≤ x)`
    pub fn cdf(&self, x: f64) -> Result<f64> {
        Ok(self.cdf_sf(x)?.0)
    }

    /// `P(X > x)`
    pub fn sf(&self, x: f64) -> Result<f64> {
        Ok(self.cdf_sf(x)?.1)
    }

    /// `q*(x) = P(X ≤ −x) + P(X > x)`
    pub fn tail(&self, x: f64) -> Result<f64> {
        Ok(self.cdf(-x)? + self.sf(x)?)
    }

    /// Lebesgue density, `None` for a point mass.
    pub fn density(&self, x: f64) -> Result<Option<f64>> {
        Ok(Some(match self.law {
            Law::Gaussian { mean, sd } => normal_pdf((x - mean) / sd) / sd,
            Law::Cauchy { location, scale } => {
                let u = (x - location) / scale;
                FRAC_1_PI / (scale * (1.0 + u * u))
            }
            Law::Uniform { lo, hi } => {
                if (lo..=hi).contains(&x) {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            Law::Pareto {
                alpha,
                scale,
                right,
            } => {
                if x.abs() < scale {
                    0.0
                } else {
                    let w = if x > 0.0 { right } else { 1.0 - right };
                    w * alpha * scale.powf(alpha) * x.abs().powf(-alpha - 1.0)
                }
            }
            Law::Stable {
                params,
                sigma,
                beta_st,
                shift,
            } => {
                stable_dist::standard_density(params.alpha(), beta_st, (x - shift) / sigma)? / sigma
            }
            Law::Point { .. } => return Ok(None),
        }))
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b = vec![0.0];
        match self.law {
            Law::Gaussian { mean, .. } => b.push(mean),
            Law::Cauchy { location, .. } => b.push(location),
            Law::Uniform { lo, hi } => b.extend([lo, hi]),
            Law::Pareto { scale, .. } => b.extend([-scale, scale]),
            Law::Stable { shift, .. } => b.push(shift),
            Law::Point { at } => b.push(at),
        }
        b
    }

    /// `∫_{[lo, hi)} f dp*`; either bound may be infinite.
    pub fn expect_on<F: Fn(f64) -> f64>(&self, f: F, lo: f64, hi: f64) -> Result<f64> {
        if lo >= hi {
            return Ok(0.0);
        }
        if let Law::Point { at } = self.law {
            return Ok(if lo <= at && at < hi { f(at) } else { 0.0 });
        }
        let (lo, hi) = match self.law {
            Law::Uniform { lo: a, hi: b } => (lo.max(a), hi.min(b)),
            _ => (lo, hi),
        };
        if lo >= hi {
            return Ok(0.0);
        }
        let mut cuts: Vec<f64> = vec![lo];
        cuts.extend(self.breakpoints().into_iter().filter(|&x| x > lo && x < hi));
        cuts.push(hi);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if let Law::Pareto { scale, .. } = self.law {
                if a >= -scale && b <= scale {
                    continue;
                }
            }
            let failure = std::cell::RefCell::new(None);
            let est = quad().integrate(
                |x| match self.density(x) {
                    Ok(Some(d)) if d > 0.0 => f(x) * d,
                    Ok(_) => 0.0,
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        0.0
                    }
                },
                a,
                b,
            );
            if let Some(e) = failure.into_inner() {
                return Err(e);
            }
            total += est?.value;
        }
        Ok(total)
    }

    /// `[∫ 1, ∫ x, ∫ x²]` over `|x| < t` (or `|x| ≤ t` when `closed`).
    pub fn truncated_moments(&self, t: f64, closed: bool) -> Result<[f64; 3]> {
        if !(t > 0.0) {
            return Ok([0.0; 3]);
        }
        Ok(match self.law {
            Law::Gaussian { mean, sd } => {
                let a = (-t - mean) / sd;
                let b = (t - mean) / sd;
                let p = normal_interval(a, b);
                let (fa, fb) = (normal_pdf(a), normal_pdf(b));
                let e1 = fa - fb;
                let e2 = p + a * fa - b * fb;
                [
                    p,
                    mean * p + sd * e1,
                    mean * mean * p + 2.0 * mean * sd * e1 + sd * sd * e2,
                ]
            }
            Law::Cauchy { location, scale } => {
                let ua = (-t - location) / scale;
                let ub = (t - location) / scale;
                let a = ub.atan() - ua.atan();
                let l = (1.0 + ub * ub).ln() - (1.0 + ua * ua).ln();
                [
                    a * FRAC_1_PI,
                    (location * a + 0.5 * scale * l) * FRAC_1_PI,
                    (location * location * a
                        + location * scale * l
                        + scale * scale * ((ub - ua) - a))
                        * FRAC_1_PI,
                ]
            }
            Law::Uniform { lo, hi } => {
                let l = lo.max(-t);
                let u = hi.min(t);
                if u <= l {
                    [0.0; 3]
                } else {
                    let w = hi - lo;
                    [
                        (u - l) / w,
                        (u * u - l * l) / (2.0 * w),
                        (u * u * u - l * l * l) / (3.0 * w),
                    ]
                }
            }
            Law::Pareto {
                alpha,
                scale,
                right,
            } => {
                let m0 = pareto_side(alpha, scale, t, 0);
                let m1 = pareto_side(alpha, scale, t, 1);
                let m2 = pareto_side(alpha, scale, t, 2);
                [m0, (2.0 * right - 1.0) * m1, m2]
            }
            Law::Point { at } => {
                let inside = if closed { at.abs() <= t } else { at.abs() < t };
                if inside {
                    [1.0, at, at * at]
                } else {
                    [0.0; 3]
                }
            }
            Law::Stable { .. } => [
                self.expect_on(|_| 1.0, -t, t)?,
                if self.is_symmetric() {
                    0.0
                } else {
                    self.expect_on(|x| x, -t, t)?
                },
                self.expect_on(|x| x * x, -t, t)?,
            ],
        })
    }

    /// `∫_{|x| < t} x dp*`
    pub fn truncated_mean(&self, t: f64) -> Result<f64> {
        Ok(self.truncated_moments(t, false)?[1])
    }

    /// `∫_{|x| < t} x² dp*`
    pub fn truncated_second(&self, t: f64) -> Result<f64> {
        Ok(self.truncated_moments(t, false)?[2])
    }

    /// `∫ b x / (b² + x²) dp*`
    pub fn smooth_mean(&self, b: f64) -> Result<f64> {
        if !(b > 0.0) {
            return Err(Error::param("b", "must be positive"));
        }
        if self.is_symmetric() {
            return Ok(0.0);
        }
        match self.law {
            Law::Cauchy { location, scale } => {
                let d = b + scale;
                Ok(b * location / (d * d + location * location))
            }
            Law::Uniform { lo, hi } => {
                Ok(0.5 * b * ((b * b + hi * hi).ln() - (b * b + lo * lo).ln()) / (hi - lo))
            }
            Law::Point { at } => Ok(b * at / (b * b + at * at)),
            Law::Pareto {
                alpha,
                scale,
                right,
            } => {
                let side = quad().integrate(
                    |y| {
                        b * scale * y / (b * b + scale * scale * y * y)
                            * alpha
                            * y.powf(-alpha - 1.0)
                    },
                    1.0,
                    f64::INFINITY,
                )?;
                Ok((2.0 * right - 1.0) * side.value)
            }
            Law::Gaussian { mean, sd } => {
                // Im ∫₀^∞ e^{−v} φ(v/b) dv
                let est = quad().integrate(
                    |v| {
                        let u = v / b;
                        (-v - 0.5 * sd * sd * u * u).exp() * (mean * u).sin()
                    },
                    0.0,
                    f64::INFINITY,
                )?;
                Ok(est.value)
            }
            Law::Stable { params, .. } => {
                let est = quad().integrate(
                    |v| (-v).exp() * stable_cf(v / b, &params).im,
                    0.0,
                    f64::INFINITY,
                )?;
                Ok(est.value)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.law {
            Law::Gaussian { mean, sd } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + sd * z
            }
            Law::Cauchy { location, scale } => {
                location + scale * (PI * (rng.random::<f64>() - 0.5)).tan()
            }
            Law::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            Law::Pareto {
                alpha,
                scale,
                right,
            } => {
                let side = rng.random::<f64>() < right;
                // 1 − U lies in (0, 1]
                let u = 1.0 - rng.random::<f64>();
                let x = scale * u.powf(-1.0 / alpha);
                if side {
                    x
                } else {
                    -x
                }
            }
            Law::Stable { params, .. } => draw_stable(&params, rng),
            Law::Point { at } => at,
        }
    }
}

/// Atom of a discrete prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorAtom {
    pub value: f64,
    pub weight: f64,
}

/// Prior law of the randomized parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Prior {
    Atoms {
        atoms: Vec<PriorAtom>,
    },
    Exponential {
        rate: f64,
    },
    LogNormal {
        m: f64,
        s: f64,
    },
    Normal {
        mean: f64,
        sd: f64,
    },
    /// `scale / Z²` with `Z` standard normal.
    Levy {
        scale: f64,
    },
}

impl Prior {
    pub fn atoms(pairs: &[(f64, f64)]) -> Self {
        Prior::Atoms {
            atoms: pairs
                .iter()
                .map(|&(value, weight)| PriorAtom { value, weight })
                .collect(),
        }
    }

    fn validate(&self, positive_support: bool) -> Result<()> {
        match self {
            Prior::Atoms { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::param("atoms", "prior needs at least one atom"));
                }
                let mut total = 0.0;
                for a in atoms {
                    finite("value", a.value)?;
                    positive("weight", a.weight)?;
                    if positive_support && a.value <= 0.0 {
                        return Err(Error::param("value", "scale prior atoms must be positive"));
                    }
                    total += a.weight;
                }
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::param(
                        "weight",
                        format!("weights sum to {total}, not 1"),
                    ));
                }
                Ok(())
            }
            Prior::Exponential { rate } => positive("rate", *rate),
            Prior::LogNormal { m, s } => {
                finite("m", *m)?;
                positive("s", *s)
            }
            Prior::Normal { mean, sd } => {
                if positive_support {
                    return Err(Error::param("prior", "a normal prior cannot drive a scale"));
                }
                finite("mean", *mean)?;
                positive("sd", *sd)
            }
            Prior::Levy { scale } => positive("scale", *scale),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Prior::Atoms { atoms } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for a in atoms {
                    acc += a.weight;
                    if u < acc {
                        return a.value;
                    }
                }
                atoms.last().map(|a| a.value).unwrap_or(0.0)
            }
            Prior::Exponential { rate } => {
                let e: f64 = Exp1.sample(rng);
                e / rate
            }
            Prior::LogNormal { m, s } => {
                let z: f64 = StandardNormal.sample(rng);
                (m + s * z).exp()
            }
            Prior::Normal { mean, sd } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + sd * z
            }
            Prior::Levy { scale } => {
                let z: f64 = StandardNormal.sample(rng);
                scale / (z * z)
            }
        }
    }
}

/// How a draw of `p*` perturbs the base family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Randomizer {
    None,
    /// Multiply the family's scale parameter by a prior draw.
    Scale {
        prior: Prior,
    },
    /// Multiply the family's scale parameter by the square root of a draw.
    Variance {
        prior: Prior,
    },
    /// Shift the family's location by a prior draw.
    Location {
        prior: Prior,
    },
}

/// Law of the random directing measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectingLaw {
    pub base: BaseFamily,
    #[serde(default = "no_randomizer")]
    pub randomizer: Randomizer,
}

fn no_randomizer() -> Randomizer {
    Randomizer::None
}

impl DirectingLaw {
    pub fn fixed(base: BaseFamily) -> Self {
        Self {
            base,
            randomizer: Randomizer::None,
        }
    }

    pub fn new(base: BaseFamily, randomizer: Randomizer) -> Result<Self> {
        let law = Self { base, randomizer };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        match &self.randomizer {
            Randomizer::None => Ok(()),
            Randomizer::Scale { prior } | Randomizer::Variance { prior } => {
                if matches!(self.base, BaseFamily::PointMass { .. }) {
                    return Err(Error::param("randomizer", "a point mass has no scale"));
                }
                if let BaseFamily::Stable { params } = &self.base {
                    if params.is_point_mass() {
                        return Err(Error::param("randomizer", "a point mass has no scale"));
                    }
                }
                prior.validate(true)
            }
            Randomizer::Location { prior } => {
                if matches!(
                    self.base,
                    BaseFamily::ParetoSymmetric { .. } | BaseFamily::ParetoSkewed { .. }
                ) {
                    return Err(Error::param(
                        "randomizer",
                        "Pareto families are anchored at zero and take no location prior",
                    ));
                }
                prior.validate(false)
            }
        }
    }

    /// `true` when every draw yields the same measure.
    pub fn is_degenerate(&self) -> bool {
        match &self.randomizer {
            Randomizer::None => true,
            Randomizer::Scale { prior }
            | Randomizer::Variance { prior }
            | Randomizer::Location { prior } => match prior {
                Prior::Atoms { atoms } => atoms.len() == 1,
                _ => false,
            },
        }
    }

    fn apply_scale(&self, factor: f64) -> BaseFamily {
        match self.base.clone() {
            BaseFamily::Gaussian { mean, sd } => BaseFamily::Gaussian {
                mean,
                sd: sd * factor,
            },
            BaseFamily::Cauchy { location, scale } => BaseFamily::Cauchy {
                location,
                scale: scale * factor,
            },
            BaseFamily::Uniform { lo, hi } => {
                let mid = 0.5 * (lo + hi);
                let half = 0.5 * (hi - lo) * factor;
                BaseFamily::Uniform {
                    lo: mid - half,
                    hi: mid + half,
                }
            }
            BaseFamily::ParetoSymmetric { tail_index, scale } => BaseFamily::ParetoSymmetric {
                tail_index,
                scale: scale * factor,
            },
            BaseFamily::ParetoSkewed {
                tail_index,
                scale,
                right_weight,
            } => BaseFamily::ParetoSkewed {
                tail_index,
                scale: scale * factor,
                right_weight,
            },
            BaseFamily::Stable { params } => BaseFamily::Stable {
                params: StableParams::new(
                    params.alpha(),
                    params.gamma(),
                    params.c() * factor.powf(params.alpha()),
                    params.beta(),
                )
                .expect("scaled parameters stay valid"),
            },
            other @ BaseFamily::PointMass { .. } => other,
        }
    }

    fn apply_shift(&self, shift: f64) -> BaseFamily {
        match self.base.clone() {
            BaseFamily::Gaussian { mean, sd } => BaseFamily::Gaussian {
                mean: mean + shift,
                sd,
            },
            BaseFamily::Cauchy { location, scale } => BaseFamily::Cauchy {
                location: location + shift,
                scale,
            },
            BaseFamily::Uniform { lo, hi } => BaseFamily::Uniform {
                lo: lo + shift,
                hi: hi + shift,
            },
            BaseFamily::Stable { params } => BaseFamily::Stable {
                params: StableParams::new(
                    params.alpha(),
                    params.gamma() + shift,
                    params.c(),
                    params.beta(),
                )
                .expect("shifted parameters stay valid"),
            },
            BaseFamily::PointMass { at } => BaseFamily::PointMass { at: at + shift },
            other => other,
        }
    }

    /// Realized base family for a given prior draw.
    pub fn instantiate(&self, draw: f64) -> BaseFamily {
        match &self.randomizer {
            Randomizer::None => self.base.clone(),
            Randomizer::Scale { .. } => self.apply_scale(draw),
            Randomizer::Variance { .. } => self.apply_scale(draw.sqrt()),
            Randomizer::Location { .. } => self.apply_shift(draw),
        }
    }

    /// The randomized parameter of one draw (`None` without a randomizer).
    pub fn draw_parameter<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<f64> {
        match &self.randomizer {
            Randomizer::None => None,
            Randomizer::Scale { prior }
            | Randomizer::Variance { prior }
            | Randomizer::Location { prior } => Some(prior.draw(rng)),
        }
    }
}

/// One realization of `p*`, deterministic in `seed`.
pub fn draw_directing(law: &DirectingLaw, seed: u64) -> Result<DirectingMeasure> {
    law.validate()?;
    Ok(draw_unchecked(law, seed))
}

fn draw_unchecked(law: &DirectingLaw, seed: u64) -> DirectingMeasure {
    let mut rng = stream(seed, &[DIRECTING_STREAM]);
    match law.draw_parameter(&mut rng) {
        None => law.base.realize(),
        Some(v) => law.instantiate(v).realize(),
    }
}

/// Seed owned by replicate `r` of a run with base seed `seed`.
pub fn replicate_seed(seed: u64, r: usize) -> u64 {
    derive_seed(seed, &[r as u64])
}

/// The directing measure of replicate `r`.
pub fn replicate_directing(law: &DirectingLaw, seed: u64, r: usize) -> Result<DirectingMeasure> {
    draw_directing(law, replicate_seed(seed, r))
}

/// Normed row sums `S_in − c_n` of exchangeable arrays.
///
/// Values are stored replicate-major: the `rows` sums of replicate 0, then
/// those of replicate 1, and so on. All rows of a replicate share one draw
/// of the directing measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowSums {
    pub n: u64,
    pub rows: usize,
    pub replicates: usize,
    pub seed: u64,
    pub b_n: f64,
    pub c_n: f64,
    values: Vec<f64>,
}

impl RowSums {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, replicate: usize, row: usize) -> f64 {
        self.values[replicate * self.rows + row]
    }

    pub fn replicate(&self, replicate: usize) -> &[f64] {
        &self.values[replicate * self.rows..(replicate + 1) * self.rows]
    }

    /// Row `row` across all replicates.
    pub fn row(&self, row: usize) -> Vec<f64> {
        (0..self.replicates).map(|r| self.get(r, row)).collect()
    }
}

// Neumaier compensated summation of n draws.
fn row_sum<R: Rng + ?Sized>(p: &DirectingMeasure, n: u64, rng: &mut R) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for _ in 0..n {
        let x = p.sample(rng);
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `replicates` independent arrays of `rows` rows, each with its own draw of
/// the directing measure.
pub fn sample_array_replicates(
    law: &DirectingLaw,
    norming: &NormingSequence,
    n: u64,
    rows: usize,
    replicates: usize,
    seed: u64,
) -> Result<RowSums> {
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    if rows == 0 {
        return Err(Error::param("rows", "must be at least 1"));
    }
    if replicates == 0 {
        return Err(Error::param("replicates", "must be at least 1"));
    }
    law.validate()?;
    let (b_n, c_n) = crate::stable::norming_values(norming, n)?;
    let measures: Vec<DirectingMeasure> = (0..replicates)
        .into_par_iter()
        .map(|r| draw_unchecked(law, replicate_seed(seed, r)))
        .collect();
    let mut values = vec![0.0; rows * replicates];
    values.par_iter_mut().enumerate().for_each(|(k, out)| {
        let (r, i) = (k / rows, k % rows);
        let mut rng = stream(replicate_seed(seed, r), &[ROW_STREAM, i as u64]);
        *out = row_sum(&measures[r], n, &mut rng) / b_n - c_n;
    });
    Ok(RowSums {
        n,
        rows,
        replicates,
        seed,
        b_n,
        c_n,
        values,
    })
}

/// One array: a single draw of `p*` shared by all `rows` rows.
pub fn sample_array_sums(
    law: &DirectingLaw,
    norming: &NormingSequence,
    n: u64,
    rows: usize,
    seed: u64,
) -> Result<RowSums> {
    sample_array_replicates(law, norming, n, rows, 1, seed)
}

/// Single-row normed sums `T_n − c_n`, one independent draw of `p*` per
/// replicate, tagged with the replicate (draw) index.
pub fn replicate_sums(
    law: &DirectingLaw,
    norming: &NormingSequence,
    n: u64,
    replicates: usize,
    seed: u64,
) -> Result<Vec<(u64, f64)>> {
    let sums = sample_array_replicates(law, norming, n, 1, replicates, seed)?;
    Ok(sums
        .values
        .iter()
        .enumerate()
        .map(|(r, &v)| (r as u64, v))
        .collect())
}
