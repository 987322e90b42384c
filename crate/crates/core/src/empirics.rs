//! Empirical characteristic functions, analytic targets and scenario runs.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::characteristics::{q_eps, smooth_mean, trunc_mean, trunc_variance};
use crate::criteria::{
    check_cauchy_mixture, check_degenerate, check_gaussian_mixture, check_sec5_conditions,
    check_single_row_cauchy, check_single_row_gaussian, check_single_row_stable,
    check_stable_mixture, check_uan, check_wlln, Criterion, CriterionVerdict, NGrid,
    StatTestConfig, Summary,
};
use crate::directing::{
    replicate_directing, sample_array_replicates, BaseFamily, DirectingLaw, Prior, Randomizer,
    RowSums,
};
use crate::error::{Error, Result};
use crate::mixture::{joint_mixture_cf, mixture_cf, verify_example1, IdentityCheck, MixingMeasure};
use crate::rng::derive_seed;
use crate::stable::{norming_values, stable_cf, Centering, NormingSequence, StableParams};

/// Version of the [`ScenarioReport`] layout.
pub const SCHEMA_VERSION: u32 = 1;

const SAMPLE_STREAM: u64 = 0x5341_4d50_0000_0004;
const CRITERIA_STREAM: u64 = 0x4352_4954_0000_0005;

/// Points at which a 1-D characteristic function is evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTGrid")]
pub struct TGrid {
    points: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTGrid {
    points: Vec<f64>,
}

impl TryFrom<RawTGrid> for TGrid {
    type Error = Error;
    fn try_from(raw: RawTGrid) -> Result<Self> {
        TGrid::new(raw.points)
    }
}

impl TGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.iter().any(|t| !t.is_finite()) {
            return Err(Error::param("t_grid", "points must be finite"));
        }
        if !points.contains(&0.0) {
            return Err(Error::param("t_grid", "must include 0"));
        }
        Ok(Self { points })
    }

    /// `−max, −max + step, …, max`.
    pub fn symmetric(max: f64, step: f64) -> Result<Self> {
        if !(max > 0.0 && step > 0.0) {
            return Err(Error::param("t_grid", "max and step must be positive"));
        }
        let k = (max / step).round() as i64;
        Self::new((-k..=k).map(|i| i as f64 * step).collect())
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
}

impl Default for TGrid {
    /// `−5, −4.75, …, 5`.
    fn default() -> Self {
        Self::symmetric(5.0, 0.25).expect("valid default grid")
    }
}

/// Points `(t, s)` for two-row characteristic functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawJointGrid")]
pub struct JointGrid {
    points: Vec<(f64, f64)>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJointGrid {
    points: Vec<(f64, f64)>,
}

impl TryFrom<RawJointGrid> for JointGrid {
    type Error = Error;
    fn try_from(raw: RawJointGrid) -> Result<Self> {
        JointGrid::new(raw.points)
    }
}

impl JointGrid {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
            return Err(Error::param("joint_grid", "points must be finite"));
        }
        if !points.contains(&(0.0, 0.0)) {
            return Err(Error::param("joint_grid", "must include (0, 0)"));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }
}

impl Default for JointGrid {
    /// The product grid `{−2, −1, −½, 0, ½, 1, 2}²`.
    fn default() -> Self {
        let axis = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0];
        let points = axis
            .iter()
            .flat_map(|&t| axis.iter().map(move |&s| (t, s)))
            .collect();
        Self { points }
    }
}

#[derive(Default, Clone, Copy)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.comp
    }
}

// (1/N) Σ exp(i u_j) for phases u_j, compensated
fn mean_phase(phases: impl Iterator<Item = f64>) -> Complex64 {
    let (mut re, mut im) = (Neumaier::default(), Neumaier::default());
    let mut count = 0usize;
    for u in phases {
        let (s, c) = u.sin_cos();
        re.add(c);
        im.add(s);
        count += 1;
    }
    Complex64::new(re.value(), im.value()) / count as f64
}

/// `(1/N) Σ exp(i t x_j)` at each grid point. The value at `t = 0` is exactly
/// 1 and values at `−t` are conjugates of those at `t`.
pub fn empirical_cf(samples: &[f64], grid: &TGrid) -> Result<Vec<Complex64>> {
    if samples.is_empty() {
        return Err(Error::param("samples", "must not be empty"));
    }
    Ok(grid
        .points()
        .par_iter()
        .map(|&t| {
            if t == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                let a = t.abs();
                let v = mean_phase(samples.iter().map(|&x| a * x));
                if t < 0.0 {
                    v.conj()
                } else {
                    v
                }
            }
        })
        .collect())
}

/// `(1/R) Σ_r exp(i(t S_{r,1} + s S_{r,2}))` from the first two rows of each
/// replicate.
pub fn empirical_joint_cf(rowsums: &RowSums, grid: &JointGrid) -> Result<Vec<Complex64>> {
    if rowsums.rows < 2 {
        return Err(Error::param(
            "rows",
            "the joint c.f. needs at least two rows",
        ));
    }
    Ok(grid
        .points()
        .par_iter()
        .map(|&(t, s)| {
            if t == 0.0 && s == 0.0 {
                return Complex64::new(1.0, 0.0);
            }
            mean_phase((0..rowsums.replicates).map(|r| {
                let row = rowsums.replicate(r);
                t * row[0] + s * row[1]
            }))
        })
        .collect())
}

/// Joint c.f. against the product of marginals at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapPoint {
    pub t: f64,
    pub s: f64,
    pub joint_re: f64,
    pub joint_im: f64,
    pub product_re: f64,
    pub product_im: f64,
    pub gap: f64,
    pub target_re: Option<f64>,
    pub target_im: Option<f64>,
}

/// Factorization gap `|φ̂(t, s) − φ̂(t) φ̂(s)|`. The joint term averages over
/// all ordered pairs of distinct rows within a replicate; the marginal pools
/// every row.
pub fn factorization_gap(
    rowsums: &RowSums,
    grid: &JointGrid,
    target: Option<&TargetLaw>,
) -> Result<Vec<GapPoint>> {
    let rows = rowsums.rows;
    if rows < 2 {
        return Err(Error::param(
            "rows",
            "the factorization gap needs at least two rows",
        ));
    }
    let pooled = rowsums.values();
    grid.points()
        .par_iter()
        .map(|&(t, s)| {
            let joint = if t == 0.0 && s == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                mean_phase((0..rowsums.replicates).flat_map(|r| {
                    let row = rowsums.replicate(r);
                    (0..rows).flat_map(move |i| {
                        (0..rows)
                            .filter(move |&j| j != i)
                            .map(move |j| t * row[i] + s * row[j])
                    })
                }))
            };
            let marginal = |u: f64| {
                if u == 0.0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    mean_phase(pooled.iter().map(|&x| u * x))
                }
            };
            let product = marginal(t) * marginal(s);
            let tv = target.map(|tl| tl.joint_cf(&[t, s])).transpose()?;
            Ok(GapPoint {
                t,
                s,
                joint_re: joint.re,
                joint_im: joint.im,
                product_re: product.re,
                product_im: product.im,
                gap: (joint - product).norm(),
                target_re: tv.map(|v| v.re),
                target_im: tv.map(|v| v.im),
            })
        })
        .collect()
}

/// Weighted stable law, one atom of a [`TargetLaw::Mixture`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetAtom {
    pub params: StableParams,
    pub weight: f64,
}

/// Analytic limit law of the row sums, with its joint law across rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetLaw {
    /// Rows converge to independent copies of one stable law.
    Stable { params: StableParams },
    /// A mixture of stable laws, shared across rows.
    Mixture { atoms: Vec<TargetAtom> },
    /// Centred Gaussians whose shared variance follows `prior`.
    GaussianVariance { prior: Prior },
    /// Every row equals one location drawn from `prior`.
    SharedLocation { prior: Prior },
}

impl TargetLaw {
    pub fn mixture(atoms: &[(StableParams, f64)]) -> Self {
        TargetLaw::Mixture {
            atoms: atoms
                .iter()
                .map(|&(params, weight)| TargetAtom { params, weight })
                .collect(),
        }
    }

    fn mixing(&self) -> Result<Option<MixingMeasure>> {
        match self {
            TargetLaw::Mixture { atoms } => Ok(Some(MixingMeasure::new(
                atoms.iter().map(|a| (a.params, a.weight)).collect(),
            )?)),
            _ => Ok(None),
        }
    }

    /// Joint c.f. of the first `ts.len()` rows.
    pub fn joint_cf(&self, ts: &[f64]) -> Result<Complex64> {
        match self {
            TargetLaw::Stable { params } => Ok(ts.iter().map(|&t| stable_cf(t, params)).product()),
            TargetLaw::Mixture { .. } => {
                Ok(joint_mixture_cf(ts, &self.mixing()?.expect("mixture")))
            }
            TargetLaw::GaussianVariance { prior } => {
                let lambda = 0.5 * ts.iter().map(|t| t * t).sum::<f64>();
                laplace(prior, lambda).map(|v| Complex64::new(v, 0.0))
            }
            TargetLaw::SharedLocation { prior } => location_cf(prior, ts.iter().sum()),
        }
    }

    pub fn cf(&self, t: f64) -> Result<Complex64> {
        match self {
            TargetLaw::Mixture { .. } => Ok(mixture_cf(t, &self.mixing()?.expect("mixture"))),
            _ => self.joint_cf(&[t]),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.mixing()?;
        self.joint_cf(&[1.0, 0.5]).map(|_| ())
    }
}

// E exp(−λ V) for V ~ prior
fn laplace(prior: &Prior, lambda: f64) -> Result<f64> {
    match prior {
        Prior::Atoms { atoms } => Ok(atoms
            .iter()
            .map(|a| a.weight * (-lambda * a.value).exp())
            .sum()),
        Prior::Exponential { rate } => Ok(rate / (rate + lambda)),
        Prior::Levy { scale } => Ok((-(2.0 * lambda * scale).sqrt()).exp()),
        _ => Err(Error::Config(
            "gaussian_variance targets support atoms, exponential and levy priors".into(),
        )),
    }
}

// E exp(i u M) for M ~ prior
fn location_cf(prior: &Prior, u: f64) -> Result<Complex64> {
    match prior {
        Prior::Atoms { atoms } => Ok(atoms
            .iter()
            .map(|a| a.weight * Complex64::new(0.0, u * a.value).exp())
            .sum()),
        Prior::Normal { mean, sd } => Ok(Complex64::new(-0.5 * sd * sd * u * u, u * mean).exp()),
        _ => Err(Error::Config(
            "shared_location targets support atoms and normal priors".into(),
        )),
    }
}

/// Full description of a scenario run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub law: DirectingLaw,
    pub norming: NormingSequence,
    /// Grid and draw count of the criterion checkers.
    #[serde(default)]
    pub ngrid: NGrid,
    /// Row lengths simulated for the empirical c.f.
    #[serde(default = "default_sample_sizes")]
    pub sample_sizes: Vec<u64>,
    /// Independent arrays per sample size.
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_rows")]
    pub rows: usize,
    #[serde(default)]
    pub t_grid: TGrid,
    #[serde(default)]
    pub joint_grid: JointGrid,
    #[serde(default = "default_tau")]
    pub tau: f64,
    /// Stable index for the criteria that need one; defaults to the norming
    /// index.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default = "default_x_grid")]
    pub x_grid: Vec<f64>,
    #[serde(default)]
    pub criteria: Vec<Criterion>,
    #[serde(default)]
    pub stat: StatTestConfig,
    pub seed: u64,
    #[serde(default)]
    pub target: Option<TargetLaw>,
    /// Also verify the Gaussian scale mixture identity for the Cauchy c.f.
    #[serde(default)]
    pub identity_check: bool,
}

fn default_sample_sizes() -> Vec<u64> {
    vec![256, 1024, 4096]
}
fn default_replicates() -> usize {
    2000
}
fn default_rows() -> usize {
    2
}
fn default_tau() -> f64 {
    1.0
}
fn default_x_grid() -> Vec<f64> {
    vec![1e2, 1e3, 1e4]
}

impl ScenarioConfig {
    /// A scenario with default grids and no criteria.
    pub fn new(name: &str, law: DirectingLaw, norming: NormingSequence, seed: u64) -> Self {
        Self {
            name: name.into(),
            law,
            norming,
            ngrid: NGrid::default(),
            sample_sizes: default_sample_sizes(),
            replicates: default_replicates(),
            rows: default_rows(),
            t_grid: TGrid::default(),
            joint_grid: JointGrid::default(),
            tau: default_tau(),
            alpha: None,
            x_grid: default_x_grid(),
            criteria: Vec::new(),
            stat: StatTestConfig::default(),
            seed,
            target: None,
            identity_check: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let config = |msg: String| Err(Error::Config(msg));
        if self.name.trim().is_empty() {
            return config("name must not be empty".into());
        }
        if self.sample_sizes.is_empty() {
            return config("sample_sizes must not be empty".into());
        }
        if self.sample_sizes[0] == 0 || self.sample_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return config("sample_sizes must be positive and strictly increasing".into());
        }
        if self.replicates == 0 {
            return config("replicates must be at least 1".into());
        }
        if self.rows == 0 {
            return config("rows must be at least 1".into());
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return config(format!("tau = {} must be positive", self.tau));
        }
        if self.x_grid.is_empty()
            || self.x_grid[0] <= 0.0
            || self.x_grid.windows(2).any(|w| w[0] >= w[1])
        {
            return config("x_grid must be positive and strictly increasing".into());
        }
        let wrap = |field: &str, e: Error| Error::Config(format!("{field}: {e}"));
        self.law.validate().map_err(|e| wrap("law", e))?;
        self.norming.validate().map_err(|e| wrap("norming", e))?;
        self.stat.validate().map_err(|e| wrap("stat", e))?;
        if let Some(t) = &self.target {
            t.validate().map_err(|e| wrap("target", e))?;
        }
        let alpha = self.alpha();
        if !(alpha > 0.0 && alpha <= 2.0) {
            return config(format!("alpha = {alpha} is outside (0, 2]"));
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(self.norming.alpha)
    }

    fn criteria_config(&self) -> StatTestConfig {
        self.stat
            .clone()
            .with_seed(derive_seed(self.seed, &[CRITERIA_STREAM]))
    }

    fn sample_seed(&self) -> u64 {
        derive_seed(self.seed, &[SAMPLE_STREAM])
    }
}

/// Run one named checker with the scenario's law, norming and thresholds.
pub fn run_criterion(criterion: Criterion, config: &ScenarioConfig) -> Result<CriterionVerdict> {
    let (law, norming, ngrid) = (&config.law, &config.norming, &config.ngrid);
    let (tau, alpha) = (config.tau, config.alpha());
    let cfg = config.criteria_config();
    let needs = match criterion {
        Criterion::StableMixture | Criterion::RowStable => {
            (alpha > 0.0 && alpha < 2.0 && alpha != 1.0)
                .then_some(())
                .ok_or("(0, 1) or (1, 2)")
        }
        Criterion::Sec5 => (alpha > 0.0 && alpha < 2.0).then_some(()).ok_or("(0, 2)"),
        _ => Ok(()),
    };
    if let Err(range) = needs {
        return Err(Error::Config(format!(
            "criterion {criterion} needs alpha in {range}, got {alpha}; set `alpha`"
        )));
    }
    match criterion {
        Criterion::Uan => check_uan(law, norming, ngrid, &cfg),
        Criterion::GaussianMixture => check_gaussian_mixture(law, norming, ngrid, tau, &cfg),
        Criterion::Degenerate => check_degenerate(law, norming, ngrid, tau, &cfg),
        Criterion::StableMixture => check_stable_mixture(law, norming, ngrid, alpha, &cfg),
        Criterion::CauchyMixture => check_cauchy_mixture(law, norming, ngrid, &cfg),
        Criterion::Wlln => check_wlln(law, norming, ngrid, tau, &cfg),
        Criterion::RowGaussian => check_single_row_gaussian(law, norming, ngrid, tau, &cfg),
        Criterion::RowStable => check_single_row_stable(law, norming, ngrid, alpha, &cfg),
        Criterion::RowCauchy => check_single_row_cauchy(law, norming, ngrid, &cfg),
        Criterion::Sec5 => check_sec5_conditions(law, norming, ngrid, alpha, &config.x_grid, &cfg),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CfPoint {
    pub t: f64,
    pub re: f64,
    pub im: f64,
    pub target_re: Option<f64>,
    pub target_im: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfTable {
    pub n: u64,
    pub points: Vec<CfPoint>,
    /// Largest modulus of the difference to the target, if any.
    pub sup_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointTable {
    pub n: u64,
    pub points: Vec<GapPoint>,
}

/// Distribution over draws of `p*` of the characteristic quantities at one
/// `n`: truncated mean and variance at `tau`, smoothed mean (all centred)
/// and the tail mass `n q*(b_n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharSummary {
    pub n: u64,
    pub b_n: f64,
    pub c_n: f64,
    pub trunc_mean: Summary,
    pub trunc_variance: Summary,
    pub smooth_mean: Summary,
    pub tail_mass: Summary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub base: u64,
    pub sampling: u64,
    pub criteria: u64,
}

/// Wall-clock timings in milliseconds; excluded from determinism checks.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Timing {
    pub sampling_ms: f64,
    pub characteristics_ms: f64,
    pub criteria_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub schema_version: u32,
    pub scenario: String,
    pub config: ScenarioConfig,
    pub seeds: Seeds,
    pub identity: Option<IdentityCheck>,
    pub cf: Vec<CfTable>,
    pub joint: Vec<JointTable>,
    pub characteristics: Vec<CharSummary>,
    /// Sup-distance per sample size, and whether it is non-increasing up to
    /// Monte Carlo noise.
    pub sup_distance: Vec<(u64, f64)>,
    pub sup_distance_decreasing: Option<bool>,
    pub verdicts: Vec<CriterionVerdict>,
    pub timing: Timing,
}

impl ScenarioReport {
    /// The report with wall-clock fields zeroed.
    pub fn without_timing(&self) -> Self {
        Self {
            timing: Timing::default(),
            ..self.clone()
        }
    }
}

/// `values` non-increasing, each step allowed to rise by `slack`, with at
/// most one larger rise.
pub fn decreasing_within(values: &[f64], slack: f64) -> bool {
    values.windows(2).filter(|w| w[1] > w[0] + slack).count() <= 1
}

fn characteristics(config: &ScenarioConfig) -> Result<Vec<CharSummary>> {
    let draws = config.ngrid.replicates();
    let seed = config.criteria_config().seed;
    let measures = (0..draws)
        .into_par_iter()
        .map(|r| replicate_directing(&config.law, seed, r))
        .collect::<Result<Vec<_>>>()?;
    config
        .ngrid
        .values()
        .iter()
        .map(|&n| {
            let (b_n, c_n) = norming_values(&config.norming, n)?;
            let rows = measures
                .par_iter()
                .map(|p| {
                    Ok([
                        trunc_mean(p, &config.norming, n, config.tau)? - c_n,
                        trunc_variance(p, &config.norming, n, config.tau)?,
                        smooth_mean(p, &config.norming, n)? - c_n,
                        q_eps(p, &config.norming, n, 1.0)?,
                    ])
                })
                .collect::<Result<Vec<[f64; 4]>>>()?;
            let col = |k: usize| Summary::of(&rows.iter().map(|r| r[k]).collect::<Vec<_>>());
            Ok(CharSummary {
                n,
                b_n,
                c_n,
                trunc_mean: col(0),
                trunc_variance: col(1),
                smooth_mean: col(2),
                tail_mass: col(3),
            })
        })
        .collect()
}

fn run_inner(config: &ScenarioConfig) -> Result<ScenarioReport> {
    config.validate()?;
    let start = Instant::now();
    let mut timing = Timing::default();
    let target = config.target.as_ref();
    let identity = if config.identity_check {
        Some(verify_example1(1e-10, 1.0)?)
    } else {
        None
    };

    let t0 = Instant::now();
    let mut cf = Vec::with_capacity(config.sample_sizes.len());
    let mut joint = Vec::new();
    for &n in &config.sample_sizes {
        let sums = sample_array_replicates(
            &config.law,
            &config.norming,
            n,
            config.rows,
            config.replicates,
            config.sample_seed(),
        )?;
        let values = empirical_cf(sums.values(), &config.t_grid)?;
        let mut points = Vec::with_capacity(values.len());
        let mut sup: Option<f64> = None;
        for (&t, v) in config.t_grid.points().iter().zip(&values) {
            if v.norm() > 1.0 + 1e-12 {
                return Err(Error::Invariant(format!(
                    "empirical c.f. modulus {} at t = {t}",
                    v.norm()
                )));
            }
            let tv = target.map(|tl| tl.cf(t)).transpose()?;
            if let Some(tv) = tv {
                let d = (v - tv).norm();
                sup = Some(sup.map_or(d, |s: f64| s.max(d)));
            }
            points.push(CfPoint {
                t,
                re: v.re,
                im: v.im,
                target_re: tv.map(|z| z.re),
                target_im: tv.map(|z| z.im),
            });
        }
        cf.push(CfTable {
            n,
            points,
            sup_distance: sup,
        });
        if config.rows >= 2 {
            joint.push(JointTable {
                n,
                points: factorization_gap(&sums, &config.joint_grid, target)?,
            });
        }
    }
    timing.sampling_ms = t0.elapsed().as_secs_f64() * 1e3;

    let t0 = Instant::now();
    let characteristics = characteristics(config)?;
    timing.characteristics_ms = t0.elapsed().as_secs_f64() * 1e3;

    let t0 = Instant::now();
    let verdicts = config
        .criteria
        .iter()
        .map(|&c| run_criterion(c, config))
        .collect::<Result<Vec<_>>>()?;
    timing.criteria_ms = t0.elapsed().as_secs_f64() * 1e3;

    let sup_distance: Vec<(u64, f64)> = cf
        .iter()
        .filter_map(|c| c.sup_distance.map(|d| (c.n, d)))
        .collect();
    let slack = 3.0 / ((config.replicates * config.rows) as f64).sqrt();
    let sup_distance_decreasing = (!sup_distance.is_empty())
        .then(|| decreasing_within(&sup_distance.iter().map(|p| p.1).collect::<Vec<_>>(), slack));
    timing.total_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(ScenarioReport {
        schema_version: SCHEMA_VERSION,
        scenario: config.name.clone(),
        config: config.clone(),
        seeds: Seeds {
            base: config.seed,
            sampling: config.sample_seed(),
            criteria: config.criteria_config().seed,
        },
        identity,
        cf,
        joint,
        characteristics,
        sup_distance,
        sup_distance_decreasing,
        verdicts,
        timing,
    })
}

/// Sample, evaluate and check one scenario.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioReport> {
    run_inner(config).map_err(|e| Error::Scenario {
        scenario: config.name.clone(),
        source: Box::new(e),
    })
}

/// Names of the builtin scenarios.
pub const BUILTIN_SCENARIOS: [&str; 10] = [
    "example1",
    "gauss-expmix",
    "cauchy-mix",
    "cauchy-iid",
    "pareto-mix",
    "point-mass",
    "uniform",
    "gauss-fixed",
    "pareto-asym",
    "location-mix",
];

fn two_scales() -> Prior {
    Prior::atoms(&[(1.0, 0.5), (2.0, 0.5)])
}

fn with_prior(base: BaseFamily, randomizer: Randomizer) -> DirectingLaw {
    DirectingLaw::new(base, randomizer).expect("builtin law is valid")
}

fn sp(alpha: f64, gamma: f64, c: f64, beta: f64) -> StableParams {
    StableParams::new(alpha, gamma, c, beta).expect("builtin parameters are valid")
}

/// Analytic limit of a builtin scenario.
pub fn target_for(name: &str) -> Option<TargetLaw> {
    let k = crate::characteristics::pushforward_constant(1.5);
    Some(match name {
        "example1" => TargetLaw::GaussianVariance {
            prior: Prior::Levy { scale: 1.0 },
        },
        "gauss-expmix" => TargetLaw::GaussianVariance {
            prior: Prior::Exponential { rate: 1.0 },
        },
        "cauchy-mix" => {
            TargetLaw::mixture(&[(sp(1.0, 0.0, 1.0, 0.0), 0.5), (sp(1.0, 0.0, 2.0, 0.0), 0.5)])
        }
        "cauchy-iid" => TargetLaw::Stable {
            params: sp(1.0, 0.0, 1.0, 0.0),
        },
        // c = K s^{3/2} for scales s ∈ {1, 2}
        "pareto-mix" => TargetLaw::mixture(&[
            (sp(1.5, 0.0, k, 0.0), 0.5),
            (sp(1.5, 0.0, k * 2f64.powf(1.5), 0.0), 0.5),
        ]),
        "point-mass" => TargetLaw::Stable {
            params: StableParams::point_mass(0.0),
        },
        "uniform" => TargetLaw::Stable {
            params: sp(2.0, 0.0, 1.0 / 6.0, 0.0),
        },
        "gauss-fixed" => TargetLaw::Stable {
            params: sp(2.0, 0.0, 0.5, 0.0),
        },
        // centred by the mean, so γ = 0; heavier right tail means β < 0 in
        // the c.f. convention of `stable_cf`
        "pareto-asym" => TargetLaw::Stable {
            params: sp(1.5, 0.0, k, -0.6),
        },
        "location-mix" => TargetLaw::SharedLocation {
            prior: Prior::Normal { mean: 0.0, sd: 1.0 },
        },
        _ => return None,
    })
}

/// Builtin scenario `name` with the given seed.
pub fn builtin(name: &str, seed: u64) -> Option<ScenarioConfig> {
    let root_n = NormingSequence::power(2.0);
    let linear = NormingSequence::power(1.0);
    let p15 = NormingSequence::power(1.5);
    let (law, norming, criteria) = match name {
        "example1" => (
            with_prior(
                BaseFamily::Gaussian { mean: 0.0, sd: 1.0 },
                Randomizer::Variance {
                    prior: Prior::Levy { scale: 1.0 },
                },
            ),
            root_n,
            vec![Criterion::GaussianMixture],
        ),
        "gauss-expmix" => (
            with_prior(
                BaseFamily::Gaussian { mean: 0.0, sd: 1.0 },
                Randomizer::Variance {
                    prior: Prior::Exponential { rate: 1.0 },
                },
            ),
            root_n,
            vec![Criterion::GaussianMixture, Criterion::RowGaussian],
        ),
        "cauchy-mix" => (
            with_prior(
                BaseFamily::Cauchy {
                    location: 0.0,
                    scale: 1.0,
                },
                Randomizer::Scale {
                    prior: two_scales(),
                },
            ),
            linear,
            vec![Criterion::CauchyMixture, Criterion::RowCauchy],
        ),
        "cauchy-iid" => (
            DirectingLaw::fixed(BaseFamily::Cauchy {
                location: 0.0,
                scale: 1.0,
            }),
            linear,
            vec![Criterion::Uan, Criterion::CauchyMixture],
        ),
        "pareto-mix" => (
            with_prior(
                BaseFamily::ParetoSymmetric {
                    tail_index: 1.5,
                    scale: 1.0,
                },
                Randomizer::Scale {
                    prior: two_scales(),
                },
            ),
            p15,
            vec![
                Criterion::StableMixture,
                Criterion::RowStable,
                Criterion::Sec5,
            ],
        ),
        "point-mass" => (
            DirectingLaw::fixed(BaseFamily::PointMass { at: 0.5 }),
            linear.with_centering(Centering::Linear { mean: 0.5 }),
            vec![Criterion::Degenerate, Criterion::Wlln],
        ),
        "uniform" => (
            DirectingLaw::fixed(BaseFamily::Uniform { lo: -1.0, hi: 1.0 }),
            root_n,
            vec![Criterion::GaussianMixture],
        ),
        "gauss-fixed" => (
            DirectingLaw::fixed(BaseFamily::Gaussian { mean: 0.0, sd: 1.0 }),
            root_n,
            vec![Criterion::GaussianMixture],
        ),
        "pareto-asym" => (
            DirectingLaw::fixed(BaseFamily::ParetoSkewed {
                tail_index: 1.5,
                scale: 1.0,
                right_weight: 0.8,
            }),
            p15.with_centering(Centering::Linear { mean: 1.8 }),
            vec![Criterion::StableMixture],
        ),
        "location-mix" => (
            with_prior(
                BaseFamily::PointMass { at: 0.0 },
                Randomizer::Location {
                    prior: Prior::Normal { mean: 0.0, sd: 1.0 },
                },
            ),
            linear,
            vec![Criterion::RowGaussian],
        ),
        _ => return None,
    };
    let mut config = ScenarioConfig::new(name, law, norming, seed);
    config.criteria = criteria;
    config.target = target_for(name);
    config.identity_check = name == "example1";
    if name == "example1" {
        // the variance prior is heavy tailed, so the tail condition settles late
        config.ngrid = NGrid::new(
            vec![100, 1_000, 10_000, 100_000, 1_000_000, 10_000_000],
            400,
        )
        .expect("valid grid");
    }
    Some(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stable::sample_stable;

    #[test]
    fn cf_of_zeros_is_one() {
        let v = empirical_cf(&[0.0; 17], &TGrid::default()).unwrap();
        assert!(v.iter().all(|z| *z == Complex64::new(1.0, 0.0)));
        assert!(empirical_cf(&[], &TGrid::default()).is_err());
    }

    #[test]
    fn cf_is_conjugate_symmetric() {
        let xs = [0.3, -1.2, 2.5, 0.01];
        let g = TGrid::default();
        let v = empirical_cf(&xs, &g).unwrap();
        let pts = g.points();
        for (i, &t) in pts.iter().enumerate() {
            let j = pts.iter().position(|&u| u == -t).unwrap();
            assert_eq!(v[i], v[j].conj());
        }
        let zero = pts.iter().position(|&t| t == 0.0).unwrap();
        assert_eq!(v[zero], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn cauchy_sample_cf() {
        let n = 200_000;
        let xs = sample_stable(&StableParams::new(1.0, 0.0, 1.0, 0.0).unwrap(), n, 3).unwrap();
        let g = TGrid::default();
        let v = empirical_cf(&xs, &g).unwrap();
        let sup = g
            .points()
            .iter()
            .zip(&v)
            .map(|(t, z)| (z - (-t.abs()).exp()).norm())
            .fold(0.0, f64::max);
        assert!(sup <= 0.02, "{sup}");
        // interleaved halves agree within 2 · 3/√(N/2)
        let a: Vec<f64> = xs.iter().step_by(2).copied().collect();
        let b: Vec<f64> = xs.iter().skip(1).step_by(2).copied().collect();
        let (va, vb) = (empirical_cf(&a, &g).unwrap(), empirical_cf(&b, &g).unwrap());
        let bound = 2.0 * 3.0 / ((n / 2) as f64).sqrt();
        assert!(va.iter().zip(&vb).all(|(x, y)| (x - y).norm() <= bound));
    }

    #[test]
    fn joint_cf_needs_two_rows() {
        let law = DirectingLaw::fixed(BaseFamily::Cauchy {
            location: 0.0,
            scale: 1.0,
        });
        let one = sample_array_replicates(&law, &NormingSequence::power(1.0), 10, 1, 5, 1).unwrap();
        assert!(empirical_joint_cf(&one, &JointGrid::default()).is_err());
        let two = sample_array_replicates(&law, &NormingSequence::power(1.0), 10, 2, 5, 1).unwrap();
        let v = empirical_joint_cf(&two, &JointGrid::default()).unwrap();
        let zero = JointGrid::default()
            .points()
            .iter()
            .position(|&p| p == (0.0, 0.0))
            .unwrap();
        assert_eq!(v[zero], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn joint_cf_of_iid_and_mixed_cauchy() {
        let grid = JointGrid::new(vec![(0.0, 0.0), (1.0, 1.0)]).unwrap();
        let iid = DirectingLaw::fixed(BaseFamily::Cauchy {
            location: 0.0,
            scale: 1.0,
        });
        let sums =
            sample_array_replicates(&iid, &NormingSequence::power(1.0), 256, 2, 4000, 5).unwrap();
        let v = empirical_joint_cf(&sums, &grid).unwrap()[1];
        assert!((v.re - (-2.0f64).exp()).abs() < 0.05);
        let mixed = builtin("cauchy-mix", 0).unwrap().law;
        let sums =
            sample_array_replicates(&mixed, &NormingSequence::power(1.0), 256, 2, 4000, 5).unwrap();
        let v = empirical_joint_cf(&sums, &grid).unwrap()[1];
        let want = 0.5 * ((-2.0f64).exp() + (-4.0f64).exp());
        assert!((want - 0.0768).abs() < 1e-4);
        assert!((v.re - want).abs() < 0.05);
    }

    #[test]
    fn targets_agree_with_closed_forms() {
        let t = 1.3;
        let e1 = target_for("example1").unwrap();
        assert!((e1.cf(t).unwrap().re - (-t).exp()).abs() < 1e-15);
        // the joint law is not the product of its marginals
        let j = e1.joint_cf(&[1.0, 1.0]).unwrap().re;
        assert!((j - (-(2f64).sqrt()).exp()).abs() < 1e-15);
        let g = target_for("gauss-expmix").unwrap();
        assert!((g.cf(t).unwrap().re - 1.0 / (1.0 + t * t / 2.0)).abs() < 1e-15);
        let c = target_for("cauchy-mix").unwrap();
        let want = 0.5 * ((-t).exp() + (-2.0 * t).exp());
        assert!((c.cf(t).unwrap().re - want).abs() < 1e-15);
        let l = target_for("location-mix").unwrap();
        assert!((l.joint_cf(&[0.5, 0.5]).unwrap().re - (-0.5f64).exp()).abs() < 1e-15);
        for name in BUILTIN_SCENARIOS {
            target_for(name).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn builtins_validate() {
        for name in BUILTIN_SCENARIOS {
            let c = builtin(name, 1).unwrap();
            c.validate().unwrap();
            assert_eq!(c.name, name);
        }
        assert!(builtin("nope", 1).is_none());
    }

    #[test]
    fn empty_sample_sizes_are_rejected() {
        let mut c = builtin("uniform", 1).unwrap();
        c.sample_sizes.clear();
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        assert!(matches!(run_scenario(&c), Err(Error::Scenario { .. })));
    }

    #[test]
    fn decreasing_allows_noise_and_one_rise() {
        assert!(decreasing_within(&[0.3, 0.1, 0.11, 0.05], 0.02));
        assert!(decreasing_within(&[0.3, 0.5, 0.1], 0.0));
        assert!(!decreasing_within(&[0.1, 0.3, 0.2, 0.5], 0.0));
    }
}
