//! Monte Carlo evaluation of the convergence criteria.
//!
//! Every checker draws `replicates` directing measures once, evaluates the
//! relevant characteristic quantities of each draw along the n-grid and
//! turns them into tri-state verdicts:
//!
//! * `Z_n →P z`: the fraction of draws with `|Z_n − z| > delta` must be at
//!   most `prob_bound` at the largest `n` and may rise at most once along the
//!   grid; a fraction of at least one half is a failure.
//! * `Z_n ⇒ Z`: the Lévy distance between the empirical laws at the last two
//!   grid points must be at most `weak_tol`; above `weak_tol + margin` fails.
//! * positive share: at least `margin` of the draws, failing at or below
//!   `prob_bound`.
//!
//! All thresholds are calibration choices.

mod checks;
pub mod stats;

use serde::{Deserialize, Serialize};

pub use checks::{
    check_cauchy_mixture, check_degenerate, check_gaussian_mixture, check_sec5_conditions,
    check_single_row_cauchy, check_single_row_gaussian, check_single_row_stable,
    check_stable_mixture, check_uan, check_wlln,
};
pub use stats::{levy_distance, Summary};

use crate::characteristics::default_grid;
use crate::error::{Error, Result};
use crate::mixture::MixingMeasure;

/// Increasing sample sizes and the number of directing-measure draws.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawNGrid")]
pub struct NGrid {
    values: Vec<u64>,
    replicates: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNGrid {
    values: Vec<u64>,
    replicates: usize,
}

impl TryFrom<RawNGrid> for NGrid {
    type Error = Error;
    fn try_from(raw: RawNGrid) -> Result<Self> {
        NGrid::new(raw.values, raw.replicates)
    }
}

impl NGrid {
    pub fn new(values: Vec<u64>, replicates: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::param("ngrid.values", "must not be empty"));
        }
        if values[0] == 0 || values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param(
                "ngrid.values",
                "must be positive and strictly increasing",
            ));
        }
        if replicates < 100 {
            return Err(Error::param(
                "ngrid.replicates",
                format!("{replicates} is below 100"),
            ));
        }
        Ok(Self { values, replicates })
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn replicates(&self) -> usize {
        self.replicates
    }

    pub fn largest(&self) -> u64 {
        *self.values.last().expect("validated nonempty")
    }
}

impl Default for NGrid {
    /// `{10², 10³, 10⁴, 10⁵}` with 400 draws.
    fn default() -> Self {
        Self {
            values: vec![100, 1_000, 10_000, 100_000],
            replicates: 400,
        }
    }
}

/// Thresholds of the statistical tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatTestConfig {
    /// Width of the band around the limit in `→P` tests.
    pub delta: f64,
    /// Largest admissible exceedance fraction at the largest `n`.
    pub prob_bound: f64,
    /// Tolerance for the Lévy distance between consecutive empirical laws.
    #[serde(alias = "ks_tol")]
    pub weak_tol: f64,
    /// Width of the inconclusive band, and the smallest positive share.
    pub margin: f64,
    /// Largest `d#` residual of an accepted spectral fit.
    pub fit_tol: f64,
    /// `d#` to the null measure below which `λ_n*` counts as null.
    pub null_tol: f64,
    /// Relative tolerance on `|c⁺ − c⁻|`.
    pub sym_tol: f64,
    /// Relative tolerance when grouping fitted constants into atoms.
    pub cluster_tol: f64,
    /// Values of `ε` in tail conditions.
    pub eps: Vec<f64>,
    /// Grid points used by the least-squares spectral fit.
    pub fit_window: (f64, f64),
    /// Seed of the directing-measure draws.
    pub seed: u64,
}

impl Default for StatTestConfig {
    fn default() -> Self {
        Self {
            delta: 0.05,
            prob_bound: 0.05,
            weak_tol: 0.05,
            margin: 0.1,
            fit_tol: 0.02,
            null_tol: 0.01,
            sym_tol: 0.1,
            cluster_tol: 0.05,
            eps: vec![0.1, 1.0],
            fit_window: (1.0 / 16.0, 8.0),
            seed: 0,
        }
    }
}

impl StatTestConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("delta", self.delta),
            ("prob_bound", self.prob_bound),
            ("weak_tol", self.weak_tol),
            ("margin", self.margin),
            ("fit_tol", self.fit_tol),
            ("null_tol", self.null_tol),
            ("sym_tol", self.sym_tol),
            ("cluster_tol", self.cluster_tol),
        ];
        for (name, v) in named {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("{v} is not positive")));
            }
        }
        if self.prob_bound >= 0.5 {
            return Err(Error::param("prob_bound", "must be below 0.5"));
        }
        if self.eps.is_empty() || self.eps.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return Err(Error::param(
                "eps",
                "must be a nonempty list of positive values",
            ));
        }
        let (lo, hi) = self.fit_window;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::param("fit_window", "must satisfy 0 < lo < hi"));
        }
        if !default_grid().iter().any(|&x| x >= lo && x <= hi) {
            return Err(Error::param("fit_window", "contains no grid point"));
        }
        Ok(())
    }
}

/// Tri-state outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    /// Pass when all pass, fail when any fails, inconclusive otherwise.
    pub fn all(vs: impl IntoIterator<Item = Verdict>) -> Verdict {
        let mut out = Verdict::Pass;
        for v in vs {
            match v {
                Verdict::Fail => return Verdict::Fail,
                Verdict::Inconclusive => out = Verdict::Inconclusive,
                Verdict::Pass => {}
            }
        }
        out
    }

    /// Pass when any passes, fail when all fail.
    pub fn any(vs: impl IntoIterator<Item = Verdict>) -> Verdict {
        let mut out = Verdict::Fail;
        for v in vs {
            match v {
                Verdict::Pass => return Verdict::Pass,
                Verdict::Inconclusive => out = Verdict::Inconclusive,
                Verdict::Fail => {}
            }
        }
        out
    }
}

/// One test inside a criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubCheck {
    pub name: String,
    pub verdict: Verdict,
    /// What `per_n` holds.
    pub statistic: String,
    pub per_n: Vec<(u64, f64)>,
    pub detail: String,
}

/// Limit estimated from the draws at the largest `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct EstimatedLimit {
    pub gamma: Option<f64>,
    pub mixing: Option<MixingMeasure>,
    pub law: Option<Summary>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionVerdict {
    pub name: String,
    pub holds: Verdict,
    pub evidence: Vec<SubCheck>,
    pub estimated_limit: Option<EstimatedLimit>,
    /// A hypothesis of the criterion itself is violated.
    pub hypothesis_violated: bool,
    /// Branch selected by a criterion with alternative conclusions.
    pub branch: Option<String>,
    /// The criterion is a conjecture rather than a theorem.
    pub experimental: bool,
}

impl CriterionVerdict {
    pub fn passed(&self) -> bool {
        self.holds == Verdict::Pass
    }

    pub fn sub(&self, name: &str) -> Option<&SubCheck> {
        self.evidence.iter().find(|s| s.name == name)
    }
}

/// Registered criterion names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Uan,
    GaussianMixture,
    Degenerate,
    StableMixture,
    CauchyMixture,
    Wlln,
    RowGaussian,
    RowStable,
    RowCauchy,
    Sec5,
}

impl Criterion {
    pub const ALL: [Criterion; 10] = [
        Criterion::Uan,
        Criterion::GaussianMixture,
        Criterion::Degenerate,
        Criterion::StableMixture,
        Criterion::CauchyMixture,
        Criterion::Wlln,
        Criterion::RowGaussian,
        Criterion::RowStable,
        Criterion::RowCauchy,
        Criterion::Sec5,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::Uan => "uan",
            Criterion::GaussianMixture => "gaussian_mixture",
            Criterion::Degenerate => "degenerate",
            Criterion::StableMixture => "stable_mixture",
            Criterion::CauchyMixture => "cauchy_mixture",
            Criterion::Wlln => "wlln",
            Criterion::RowGaussian => "row_gaussian",
            Criterion::RowStable => "row_stable",
            Criterion::RowCauchy => "row_cauchy",
            Criterion::Sec5 => "sec5",
        }
    }

    /// Needs a stable index.
    pub fn uses_alpha(self) -> bool {
        matches!(
            self,
            Criterion::StableMixture | Criterion::RowStable | Criterion::Sec5
        )
    }
}

impl std::fmt::Display for Criterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Criterion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Criterion::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown criterion `{s}`")))
    }
}

/// Criteria assume a single stable index; heterogeneous mixing measures are
/// refused.
pub fn refuse_heterogeneous(mix: &MixingMeasure) -> Result<()> {
    if mix.is_heterogeneous() {
        Err(Error::param(
            "mixing",
            "atoms carry different stable indices; criteria require a common index",
        ))
    } else {
        Ok(())
    }
}
