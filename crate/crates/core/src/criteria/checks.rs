use rayon::prelude::*;

use super::stats::{in_probability, positive_fraction, weak_convergence, Summary};
use super::{CriterionVerdict, EstimatedLimit, NGrid, StatTestConfig, SubCheck, Verdict};
use crate::characteristics::{
    default_grid, fit_spectral, pushforward_alpha, pushforward_one, q_eps, sigma_bar_proxy,
    smooth_mean, spectral_measure_lambda, trunc_mean, trunc_variance, Nu12Atom, SpectralParams,
};
use crate::directing::{replicate_directing, DirectingLaw, DirectingMeasure};
use crate::error::{Error, Result};
use crate::stable::{norming_values, NormingSequence};

struct Setup<'a> {
    draws: Vec<DirectingMeasure>,
    norming: &'a NormingSequence,
    ns: Vec<u64>,
    cfg: &'a StatTestConfig,
}

impl<'a> Setup<'a> {
    fn new(
        law: &DirectingLaw,
        norming: &'a NormingSequence,
        ngrid: &NGrid,
        cfg: &'a StatTestConfig,
    ) -> Result<Self> {
        law.validate()?;
        norming.validate()?;
        cfg.validate()?;
        let draws = (0..ngrid.replicates())
            .into_par_iter()
            .map(|r| replicate_directing(law, cfg.seed, r))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            draws,
            norming,
            ns: ngrid.values().to_vec(),
            cfg,
        })
    }

    fn centering(&self, n: u64) -> Result<f64> {
        Ok(norming_values(self.norming, n)?.1)
    }

    // values[k][r] = f(draw r, n_k, k)
    fn per_n<T, F>(&self, f: F) -> Result<Vec<Vec<T>>>
    where
        T: Send,
        F: Fn(&DirectingMeasure, u64, usize) -> Result<T> + Sync,
    {
        self.ns
            .iter()
            .enumerate()
            .map(|(k, &n)| self.draws.par_iter().map(|p| f(p, n, k)).collect())
            .collect()
    }

    fn in_prob(&self, name: &str, values: &[Vec<f64>], target: Option<f64>) -> (SubCheck, f64) {
        in_probability(name, &self.ns, values, target, self.cfg)
    }

    fn weak(&self, name: &str, values: &[Vec<f64>]) -> SubCheck {
        weak_convergence(name, &self.ns, values, self.cfg)
    }

    fn share(
        &self,
        name: &str,
        values: &[Vec<f64>],
        pred: impl Fn(f64) -> bool,
        what: &str,
    ) -> SubCheck {
        positive_fraction(name, &self.ns, values, pred, what, self.cfg)
    }

    fn trunc_mean_centered(&self, tau: f64) -> Result<Vec<Vec<f64>>> {
        let cs = self
            .ns
            .iter()
            .map(|&n| self.centering(n))
            .collect::<Result<Vec<_>>>()?;
        self.per_n(|p, n, k| Ok(trunc_mean(p, self.norming, n, tau)? - cs[k]))
    }

    fn smooth_mean_centered(&self) -> Result<Vec<Vec<f64>>> {
        let cs = self
            .ns
            .iter()
            .map(|&n| self.centering(n))
            .collect::<Result<Vec<_>>>()?;
        self.per_n(|p, n, k| Ok(smooth_mean(p, self.norming, n)? - cs[k]))
    }

    fn trunc_var(&self, tau: f64) -> Result<Vec<Vec<f64>>> {
        self.per_n(|p, n, _| trunc_variance(p, self.norming, n, tau))
    }

    fn sigma_bar(&self) -> Result<Vec<Vec<f64>>> {
        self.per_n(|p, _, k| sigma_bar_proxy(p, self.norming, &self.ns[..=k]))
    }

    // `n q*(εb_n) →P 0` for every configured ε
    fn tail_checks(&self, label: &str) -> Result<Vec<SubCheck>> {
        self.cfg
            .eps
            .iter()
            .map(|&eps| {
                let v = self.per_n(|p, n, _| q_eps(p, self.norming, n, eps))?;
                Ok(self
                    .in_prob(&format!("{label}(eps={eps})"), &v, Some(0.0))
                    .0)
            })
            .collect()
    }

    fn spectral(&self, alpha: f64) -> Result<Spectral> {
        let grid = default_grid();
        let fits = self.per_n(|p, n, _| {
            let lambda = spectral_measure_lambda(p, self.norming, n, &grid)?;
            let fit = fit_spectral(&lambda, alpha, &grid, self.cfg.fit_window)?;
            let class = if fit.null_distance <= self.cfg.null_tol {
                Class::Null
            } else if fit.residual <= self.cfg.fit_tol {
                Class::Member
            } else {
                Class::Misfit
            };
            let params = if class == Class::Null {
                SpectralParams::null(alpha)
            } else {
                fit.params
            };
            Ok((class, params, fit.residual))
        })?;
        Ok(Spectral { fits })
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Class {
    Null,
    Member,
    Misfit,
}

struct Spectral {
    fits: Vec<Vec<(Class, SpectralParams, f64)>>,
}

impl Spectral {
    fn map(&self, f: impl Fn(&(Class, SpectralParams, f64)) -> f64) -> Vec<Vec<f64>> {
        self.fits
            .iter()
            .map(|v| v.iter().map(&f).collect())
            .collect()
    }

    fn misfit(&self) -> Vec<Vec<f64>> {
        self.map(|f| (f.0 == Class::Misfit) as u8 as f64)
    }

    fn member(&self) -> Vec<Vec<f64>> {
        self.map(|f| (f.0 == Class::Member) as u8 as f64)
    }

    fn asymmetry(&self, tol: f64) -> Vec<Vec<f64>> {
        self.map(|f| {
            let s = f.1;
            (f.0 == Class::Member && (s.c_plus - s.c_minus).abs() > tol * s.total()) as u8 as f64
        })
    }

    fn c_plus(&self) -> Vec<Vec<f64>> {
        self.map(|f| f.1.c_plus)
    }

    fn c_minus(&self) -> Vec<Vec<f64>> {
        self.map(|f| f.1.c_minus)
    }

    fn total(&self) -> Vec<Vec<f64>> {
        self.map(|f| f.1.total())
    }

    fn residual_median(&self, ns: &[u64]) -> SubCheck {
        let per_n = ns
            .iter()
            .zip(&self.fits)
            .map(|(&n, v)| {
                let r: Vec<f64> = v.iter().map(|f| f.2).collect();
                (n, super::stats::median(&r))
            })
            .collect();
        SubCheck {
            name: "fit_residual".into(),
            verdict: Verdict::Pass,
            statistic: "median d# residual of the spectral fit".into(),
            per_n,
            detail: "reported only".into(),
        }
    }

    // group the last-n draws into atoms of the joint law of (η, λ)
    fn atoms(&self, etas: &[f64], tol: f64) -> Vec<Nu12Atom> {
        let last = self.fits.last().expect("nonempty grid");
        let kept: Vec<(f64, SpectralParams)> = last
            .iter()
            .zip(etas)
            .filter(|(f, _)| f.0 != Class::Misfit)
            .map(|(f, &eta)| (eta, f.1))
            .collect();
        let mut order: Vec<usize> = (0..kept.len()).collect();
        order.sort_by(|&i, &j| kept[i].1.total().total_cmp(&kept[j].1.total()));
        let close = |a: f64, b: f64| (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-12);
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for i in order {
            let s = kept[i].1;
            let joined = groups.iter_mut().find(|g| {
                let h = kept[g[0]].1;
                close(h.c_plus, s.c_plus) && close(h.c_minus, s.c_minus)
            });
            match joined {
                Some(g) => g.push(i),
                None => groups.push(vec![i]),
            }
        }
        let total = kept.len() as f64;
        groups
            .iter()
            .map(|g| {
                let k = g.len() as f64;
                let mean = |f: &dyn Fn(usize) -> f64| g.iter().map(|&i| f(i)).sum::<f64>() / k;
                let spectral = SpectralParams {
                    alpha: kept[g[0]].1.alpha,
                    c_minus: mean(&|i| kept[i].1.c_minus),
                    c_plus: mean(&|i| kept[i].1.c_plus),
                };
                Nu12Atom {
                    eta: mean(&|i| kept[i].0),
                    spectral,
                    weight: k / total,
                }
            })
            .collect()
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::param("tau", format!("{tau} is not positive")))
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 2.0 && alpha != 1.0 {
        Ok(())
    } else {
        Err(Error::param(
            "alpha",
            format!("{alpha} is outside (0, 1) ∪ (1, 2)"),
        ))
    }
}

fn verdict(
    name: &str,
    evidence: Vec<SubCheck>,
    estimated_limit: Option<EstimatedLimit>,
) -> CriterionVerdict {
    CriterionVerdict {
        name: name.into(),
        holds: Verdict::all(evidence.iter().map(|s| s.verdict)),
        evidence,
        estimated_limit,
        hypothesis_violated: false,
        branch: None,
        experimental: false,
    }
}

/// Verdict of a criterion whose conclusion is only examined when its
/// hypotheses hold.
fn conditional(
    name: &str,
    hypotheses: Vec<SubCheck>,
    conclusions: Vec<SubCheck>,
    estimated_limit: Option<EstimatedLimit>,
) -> CriterionVerdict {
    let hyp = Verdict::all(hypotheses.iter().map(|s| s.verdict));
    let concl = Verdict::all(conclusions.iter().map(|s| s.verdict));
    let holds = match hyp {
        Verdict::Pass => concl,
        Verdict::Fail => Verdict::Fail,
        Verdict::Inconclusive => {
            if concl == Verdict::Fail {
                Verdict::Fail
            } else {
                Verdict::Inconclusive
            }
        }
    };
    let mut evidence: Vec<SubCheck> = hypotheses
        .into_iter()
        .map(|mut s| {
            s.name = format!("hypothesis:{}", s.name);
            s
        })
        .collect();
    evidence.extend(conclusions);
    CriterionVerdict {
        name: name.into(),
        holds,
        evidence,
        estimated_limit: if holds == Verdict::Pass {
            estimated_limit
        } else {
            None
        },
        hypothesis_violated: hyp == Verdict::Fail,
        branch: None,
        experimental: false,
    }
}

fn last(v: &[Vec<f64>]) -> &[f64] {
    v.last().expect("nonempty grid")
}

/// Uniform asymptotic negligibility: `q*(εb_n) →P 0` for each configured `ε`.
pub fn check_uan(
    law: &DirectingLaw,
    norming: &NormingSequence,
    ngrid: &NGrid,
    config: &StatTestConfig,
) -> Result<CriterionVerdict> {
    let s = Setup::new(law, norming, ngrid, config)?;
    let mut evidence = Vec::new();
    for &eps in &config.eps {
        let v = s.per_n(|p, n, _| p.tail(eps * norming.b(n)))?;
        evidence.push(s.in_prob(&format!("max_tail(eps={eps})"), &v, Some(0.0)).0);
    }
    Ok(verdict("uan", evidence, None))
}

/// Convergence to a mixture of centred Gaussians with a common location.
pub fn check_gaussian_mixture(
    law: &DirectingLaw,
    norming: &NormingSequence,
    ngrid: &NGrid,
    tau: f64,
    config: &StatTestConfig,
) -> Result<CriterionVerdict> {
    check_tau(tau)?;
    let s = Setup::new(law, norming, ngrid, config)?;
    let m = s.trunc_mean_centered(tau)?;
    let (loc, gamma) = s.in_prob("location", &m, None);
    let var = s.trunc_var(tau)?;
    let weak = s.weak("variance_converges", &var);
    let nondegenerate = s.share(
        "variance_nondegenerate",
        &var,
        |x| x > config.delta,
        "above delta",
    );
    let mut evidence = vec![loc, weak, nondegenerate];
    evidence.extend(s.tail_checks("tail")?);
    let limit = EstimatedLimit {
        gamma: Some(gamma),
        law: Some(Summary::of(last(&var))),
        note: Some("law of the conditional variance".into()),
        ..Default::default()
    };
    Ok(verdict("gaussian_mixture", evidence, Some(limit)))
}

/// Convergence to a point mass.
pub fn check_degenerate(
    law: &DirectingLaw,
    norming: &NormingSequence,
    ngrid: &NGrid,
    tau: f64,
    config: &StatTestConfig,
) -> Result<CriterionVerdict> {
    check_tau(tau)?;
    let s = Setup::new(law, norming, ngrid, config)?;
    let m = s.trunc_mean_centered(tau)?;
    let (loc, gamma) = s.in_prob("location", &m, None);
    let var = s.trunc_var(tau)?;
    let (var_check, _) = s.in_prob("variance_vanishes", &var, Some(0.0));
    let mut evidence = vec![loc, var_check];
    evidence.extend(s.tail_checks("tail")?);
    let limit = EstimatedLimit {
        gamma: Some(gamma),
        ..Default::default()
    };
    Ok(verdict("degenerate", evidence, Some(limit)))
}

fn stable_like(name: &str, s: &Setup, alpha: f64) -> Result<(Vec<SubCheck>, Vec<f64>, Spectral)> {
    let cfg = s.cfg;
    let sigma = s.sigma_bar()?;
    let spectral = s.spectral(alpha)?;
    let eta = s.smooth_mean_centered()?;
    let mut evidence = vec![
        s.in_prob("small_jumps_vanish", &sigma, Some(0.0)).0,
        s.in_prob("spectral_fit", &spectral.misfit(), Some(0.0)).0,
        s.weak("smooth_mean_converges", &eta),
        s.weak("c_minus_converges", &spectral.c_minus()),
        s.weak("c_plus_converges", &spectral.c_plus()),
        s.share(
            "stable_share",
            &spectral.member(),
            |x| x > 0.5,
            &format!("fitting a nonnull {name}"),
        ),
        spectral.residual_median(&s.ns),
    ];
    evidence[5]
        .detail
        .push_str(&format!(", fit tolerance {}", cfg.fit_tol));
    Ok((evidence, last(&eta).to_vec(), spectral))
}

/// Convergence to a mixture of `α`-stable laws, `α ≠ 1`.
pub fn check_stable_mixture(
    law: &DirectingLaw,
    norming: &NormingSequence,
    ngrid: &NGrid,
    alpha: f64,
    config: &StatTestConfig,
) -> Result<CriterionVerdict> {
    check_alpha(alpha)?;
    let s = Setup::new(law, norming, ngrid, config)?;
    let (evidence, eta, spectral) = stable_like("stable law", &s, alpha)?;
    let mut v = verdict("stable_mixture", evidence, None);
    if v.holds == Verdict::Pass {
        let p = pushforward_alpha(&spectral.atoms(&eta, config.cluster_tol), alpha)?;
        v.estimated_limit = Some(EstimatedLimit {
            gamma: Some(p.gamma),
            mixing: Some(p.mixing),
            note: (!p.gamma_constant)
                .then(|| format!("atom locations spread by {:.3e}", p.gamma_spread)),
            ..Default::default()
        });
    }
    Ok(v)
}

/// Convergence to a mixture of Cauchy laws.
pub fn check_cauchy_mixture(
    law: &DirectingLaw,
    norming: &NormingSequence,
    ngrid: &NGrid,
    config: &StatTestConfig,
) -> Result<CriterionVerdict> {
    let s = Setup::new(law, norming, ngrid, config)?;
    let (mut evidence, eta, spectral) = stable_like("Cauchy law", &s, 1.0)?;
    evidence.push(
        s.in_prob("symmetry", &spectral.asymmetry(config.sym_tol), Some(0.0))
            .0,
    );
    let mut v = verdict("cauchy_mixture", evidence, None);
    if v.holds == Verdict::Pass {
        let mix = pushforward_one(&spectral.atoms(&eta, config.cluster_tol), config.sym_tol)?;
        v.estimated_limit = Some(EstimatedLimit {
            mixing: Some(mix),
            ..Default::default()
        });
    }
    Ok(v)
}

/// Weak law of large numbers: the normed sums converge in probability to 0.
pub fn check_wlln(
    law: &DirectingLaw,
    norming: &NormingSequence,
    ngrid: &NGrid,
    tau: f64,
    config: &StatTestConfig,
) -> Result<CriterionVerdict> {
    check_tau(tau)?;
    let s = Setup::new(law, norming, ngrid, config)?;
    let cs =
        s.ns.iter()
            .map(|&n| s.centering(n))
            .collect::<Result<Vec<_>>>()?;
    let m = s.per_n(|p, n, k| {
        let b = norming.b(n);
        Ok(n as f64 / b * p.truncated_moments(tau * b, true)?[1] - cs[k])
    })?;
    let var = s.per_n(|p, n, _| {
        let b = norming.b(n);
        let [_, m1, m2] = p.truncated_moments(tau * b, true)?;
        Ok((n as f64 / (b * b) * (m2 - m1 * m1)).max(0.0))
    })?;
    let mut evidence = vec![
        s.in_prob("mean", &m, Some(0.0)).0,
        s.in_prob("variance", &var, Some(0.0)).0,
    ];
    evidence.extend(s.tail_checks("tail")?);
    Ok(verdict("wlln", evidence, None))
}

/// Single-row convergence to a Gaussian-type limit, with its two branches.
pub fn check_single_row_gaussian(
    law: &DirectingLaw,
    norming: &NormingSequence,
    ngrid: &NGrid,
    tau: f64,
    config: &StatTestConfig,
) -> Result<CriterionVerdict> {
    check_tau(tau)?;
    let s = Setup::new(law, norming, ngrid, config)?;
    let hypotheses = s.tail_checks("tail")?;
    let m = s.trunc_mean_centered(tau)?;
    let var = s.trunc_var(tau)?;
    let (loc, gamma) = s.in_prob("variance_branch:location", &m, None);
    let variance_branch = vec![
        loc,
        s.weak("variance_branch:variance_converges", &var),
        s.share(
            "variance_branch:variance_nondegenerate",
            &var,
            |x| x > config.delta,
            "above delta",
        ),
    ];
    let med = super::stats::median(last(&m));
    let location_branch = vec![
        s.in_prob("location_branch:variance_vanishes", &var, Some(0.0))
            .0,
        s.weak("location_branch:location_converges", &m),
        s.share(
            "location_branch:location_nondegenerate",
            &m,
            move |x| (x - med).abs() > config.delta,
            "away from the median",
        ),
    ];
    let vb = Verdict::all(variance_branch.iter().map(|c| c.verdict));
    let lb = Verdict::all(location_branch.iter().map(|c| c.verdict));
    let (branch, limit) = if vb == Verdict::Pass {
        (
            Some("variance".to_string()),
            Some(EstimatedLimit {
                gamma: Some(gamma),
                law: Some(Summary::of(last(&var))),
                note: Some("location fixed, law of the variance".into()),
                ..Default::default()
            }),
        )
    } else if lb == Verdict::Pass {
        (
            Some("location".to_string()),
            Some(EstimatedLimit {
                law: Some(Summary::of(last(&m))),
                note: Some("variance zero, law of the location".into()),
                ..Default::default()
            }),
        )
    } else {
        (None, None)
    };
    let hyp = Verdict::all(hypotheses.iter().map(|c| c.verdict));
    let branches = Verdict::any([vb, lb]);
    let holds = match hyp {
        Verdict::Fail => Verdict::Fail,
        Verdict::Pass => branches,
        Verdict::Inconclusive => {
            if branches == Verdict::Fail {
                Verdict::Fail
            } else {
                Verdict::Inconclusive
            }
        }
    };
    let mut evidence: Vec<SubCheck> = hypotheses
        .into_iter()
        .map(|mut c| {
            c.name = format!("hypothesis:{}", c.name);
            c
        })
        .collect();
    evidence.extend(variance_branch);
    evidence.extend(location_branch);
    Ok(CriterionVerdict {
        name: "row_gaussian".into(),
        holds,
        evidence,
        estimated_limit: if holds == Verdict::Pass { limit } else { None },
        hypothesis_violated: hyp == Verdict::Fail,
        branch: if holds == Verdict::Pass { branch } else { None },
        experimental: false,
    })
}

/// Single-row convergence to a symmetric `α`-stable mixture, `α ≠ 1`.
pub fn check_single_row_stable(
    law: &DirectingLaw,
    norming: &NormingSequence,
    ngrid: &NGrid,
    alpha: f64,
    config: &StatTestConfig,
) -> Result<CriterionVerdict> {
    check_alpha(alpha)?;
    let s = Setup::new(law, norming, ngrid, config)?;
    let spectral = s.spectral(alpha)?;
    let hypotheses = vec![
        s.in_prob("spectral_fit", &spectral.misfit(), Some(0.0)).0,
        s.in_prob("symmetric", &spectral.asymmetry(config.sym_tol), Some(0.0))
            .0,
        s.weak("scale_converges", &spectral.total()),
        s.share(
            "stable_share",
            &spectral.member(),
            |x| x > 0.5,
            "fitting a nonnull stable law",
        ),
    ];
    let eta = s.smooth_mean_centered()?;
    let (loc, gamma) = s.in_prob("location", &eta, None);
    let conclusions = vec![
        loc,
        s.in_prob("small_jumps_vanish", &s.sigma_bar()?, Some(0.0))
            .0,
    ];
    let limit = if Verdict::all(hypotheses.iter().chain(&conclusions).map(|c| c.verdict))
        == Verdict::Pass
    {
        let atoms = spectral.atoms(&vec![gamma; s.draws.len()], config.cluster_tol);
        let symmetric: Vec<Nu12Atom> = atoms
            .into_iter()
            .map(|mut a| {
                let half = 0.5 * a.spectral.total();
                a.spectral.c_minus = half;
                a.spectral.c_plus = half;
                a
            })
            .collect();
        let p = pushforward_alpha(&symmetric, alpha)?;
        Some(EstimatedLimit {
            gamma: Some(gamma),
            mixing: Some(p.mixing),
            note: Some("law of the scale".into()),
            ..Default::default()
        })
    } else {
        None
    };
    Ok(conditional("row_stable", hypotheses, conclusions, limit))
}

/// Single-row convergence to a Cauchy mixture with a common location.
pub fn check_single_row_cauchy(
    law: &DirectingLaw,
    norming: &NormingSequence,
    ngrid: &NGrid,
    config: &StatTestConfig,
) -> Result<CriterionVerdict> {
    let s = Setup::new(law, norming, ngrid, config)?;
    let spectral = s.spectral(1.0)?;
    let eta = s.smooth_mean_centered()?;
    let (loc, gamma) = s.in_prob("location", &eta, None);
    let hypotheses = vec![
        loc,
        s.in_prob("spectral_fit", &spectral.misfit(), Some(0.0)).0,
        s.weak("c_minus_converges", &spectral.c_minus()),
        s.weak("c_plus_converges", &spectral.c_plus()),
        s.share(
            "stable_share",
            &spectral.member(),
            |x| x > 0.5,
            "fitting a nonnull Cauchy law",
        ),
    ];
    let conclusions = vec![
        s.in_prob("small_jumps_vanish", &s.sigma_bar()?, Some(0.0))
            .0,
        s.in_prob("symmetry", &spectral.asymmetry(config.sym_tol), Some(0.0))
            .0,
    ];
    let limit = if Verdict::all(hypotheses.iter().chain(&conclusions).map(|c| c.verdict))
        == Verdict::Pass
    {
        let atoms = spectral.atoms(&vec![gamma; s.draws.len()], config.cluster_tol);
        Some(EstimatedLimit {
            gamma: Some(gamma),
            mixing: Some(pushforward_one(&atoms, config.sym_tol)?),
            note: Some("law of the scale".into()),
            ..Default::default()
        })
    } else {
        None
    };
    Ok(conditional("row_cauchy", hypotheses, conclusions, limit))
}

/// Tail conditions conjectured to characterize stable-mixture limits.
/// `alpha = 1` is accepted as the Cauchy variant.
pub fn check_sec5_conditions(
    law: &DirectingLaw,
    norming: &NormingSequence,
    ngrid: &NGrid,
    alpha: f64,
    x_grid: &[f64],
    config: &StatTestConfig,
) -> Result<CriterionVerdict> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::param("alpha", format!("{alpha} is outside (0, 2)")));
    }
    if x_grid.is_empty() || x_grid[0] <= 0.0 || x_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param(
            "x_grid",
            "must be positive and strictly increasing",
        ));
    }
    let s = Setup::new(law, norming, ngrid, config)?;
    let target = (2.0 - alpha) / alpha;
    let ratio: Vec<Vec<f64>> = x_grid
        .iter()
        .map(|&x| {
            s.draws
                .par_iter()
                .map(|p| {
                    let second = p.truncated_moments(x, true)?[2];
                    let tail = p.tail(x)?;
                    Ok(if second > 0.0 {
                        x * x * tail / second
                    } else {
                        f64::NAN
                    })
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let labels: Vec<u64> = x_grid.iter().map(|&x| x.round() as u64).collect();
    let mut ratio_check = in_probability("tail_ratio", &labels, &ratio, Some(target), config).0;
    ratio_check.statistic.push_str(" (indexed by x)");
    let cstar = s.per_n(|p, n, _| Ok(n as f64 * p.tail(norming.b(n))?))?;
    let skew = s.per_n(|p, n, _| {
        let b = norming.b(n);
        let q = p.tail(b)?;
        Ok(if q > 0.0 {
            (p.sf(b)? - p.cdf(-b)?) / q
        } else {
            0.0
        })
    })?;
    let eta = s.smooth_mean_centered()?;
    let (loc, gamma) = s.in_prob("location", &eta, None);
    let evidence = vec![
        ratio_check,
        s.weak("tail_mass_converges", &cstar),
        s.share(
            "tail_mass_nonzero",
            &cstar,
            |x| x > config.delta,
            "above delta",
        ),
        s.in_prob("tail_balance", &skew, Some(0.0)).0,
        loc,
    ];
    let mut v = verdict("sec5", evidence, None);
    v.experimental = true;
    v.estimated_limit = Some(EstimatedLimit {
        gamma: Some(gamma),
        law: Some(Summary::of(last(&cstar))),
        note: Some("law of the limiting tail mass".into()),
        ..Default::default()
    });
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::directing::{BaseFamily, Prior, Randomizer};
    use crate::stable::Centering;

    fn grid() -> NGrid {
        NGrid::new(vec![100, 1_000, 10_000, 100_000], 100).unwrap()
    }

    fn cfg() -> StatTestConfig {
        StatTestConfig::default().with_seed(11)
    }

    fn cauchy() -> DirectingLaw {
        DirectingLaw::fixed(BaseFamily::Cauchy {
            location: 0.0,
            scale: 1.0,
        })
    }

    #[test]
    fn uan_examples() {
        let pm = DirectingLaw::fixed(BaseFamily::PointMass { at: 0.0 });
        assert!(
            check_uan(&pm, &NormingSequence::power(2.0), &grid(), &cfg())
                .unwrap()
                .passed()
        );
        assert!(
            check_uan(&cauchy(), &NormingSequence::power(1.0), &grid(), &cfg())
                .unwrap()
                .passed()
        );
        let v = check_uan(&cauchy(), &NormingSequence::frozen(1.0), &grid(), &cfg()).unwrap();
        assert_eq!(v.holds, Verdict::Fail);
        // fixed law: every draw has M_n(1) = (2/π) atan(1)
        let frac = v.sub("max_tail(eps=1)").unwrap().per_n.last().unwrap().1;
        assert_eq!(frac, 1.0);
    }

    #[test]
    fn wlln_examples() {
        let n1 = NormingSequence::power(1.0);
        let pm = DirectingLaw::fixed(BaseFamily::PointMass { at: 2.0 });
        let centred = n1.clone().with_centering(Centering::Linear { mean: 2.0 });
        assert!(check_wlln(&pm, &centred, &grid(), 1.0, &cfg())
            .unwrap()
            .passed());
        let u = DirectingLaw::fixed(BaseFamily::Uniform { lo: -1.0, hi: 1.0 });
        assert!(check_wlln(&u, &n1, &grid(), 1.0, &cfg()).unwrap().passed());
        let shifted = DirectingLaw::new(
            BaseFamily::Gaussian { mean: 0.0, sd: 1.0 },
            Randomizer::Location {
                prior: Prior::atoms(&[(1.0, 0.5), (2.0, 0.5)]),
            },
        )
        .unwrap();
        let v = check_wlln(&shifted, &n1, &grid(), 1.0, &cfg()).unwrap();
        assert_eq!(v.holds, Verdict::Fail);
        assert_eq!(v.sub("mean").unwrap().verdict, Verdict::Fail);
    }

    #[test]
    fn single_row_gaussian_location_branch() {
        let law = DirectingLaw::new(
            BaseFamily::PointMass { at: 0.0 },
            Randomizer::Location {
                prior: Prior::Normal { mean: 0.0, sd: 1.0 },
            },
        )
        .unwrap();
        let v = check_single_row_gaussian(&law, &NormingSequence::power(1.0), &grid(), 1.0, &cfg())
            .unwrap();
        assert!(v.passed());
        assert_eq!(v.branch.as_deref(), Some("location"));
        let summary = v.estimated_limit.unwrap().law.unwrap();
        assert!(summary.mean.abs() < 0.3 && (summary.sd - 1.0).abs() < 0.2);

        let v = check_single_row_gaussian(
            &cauchy(),
            &NormingSequence::power(1.0),
            &grid(),
            1.0,
            &cfg(),
        )
        .unwrap();
        assert!(v.hypothesis_violated);
        assert_eq!(v.holds, Verdict::Fail);
    }

    #[test]
    fn single_row_cauchy_rejects_random_location() {
        let law = DirectingLaw::new(
            BaseFamily::Cauchy {
                location: 0.0,
                scale: 1.0,
            },
            Randomizer::Location {
                prior: Prior::Normal { mean: 0.0, sd: 1.0 },
            },
        )
        .unwrap();
        let v =
            check_single_row_cauchy(&law, &NormingSequence::power(1.0), &grid(), &cfg()).unwrap();
        assert!(v.hypothesis_violated);
        let g = DirectingLaw::fixed(BaseFamily::Gaussian { mean: 0.0, sd: 1.0 });
        let v = check_single_row_cauchy(&g, &NormingSequence::power(1.0), &grid(), &cfg()).unwrap();
        assert!(v.hypothesis_violated);
    }

    #[test]
    fn sec5_ratio_for_pareto_and_cauchy() {
        let pareto = DirectingLaw::fixed(BaseFamily::ParetoSymmetric {
            tail_index: 1.5,
            scale: 1.0,
        });
        let xs = [100.0, 1_000.0, 10_000.0];
        let n = NormingSequence::power(1.5);
        let v = check_sec5_conditions(&pareto, &n, &grid(), 1.5, &xs, &cfg()).unwrap();
        assert_eq!(v.sub("tail_ratio").unwrap().verdict, Verdict::Pass);
        assert_eq!(v.sub("tail_balance").unwrap().verdict, Verdict::Pass);
        assert!(v.experimental);
        let v = check_sec5_conditions(
            &cauchy(),
            &NormingSequence::power(1.0),
            &grid(),
            1.0,
            &xs,
            &cfg(),
        )
        .unwrap();
        assert_eq!(v.sub("tail_ratio").unwrap().verdict, Verdict::Pass);
        assert!(check_sec5_conditions(&cauchy(), &n, &grid(), 1.5, &[2.0, 1.0], &cfg()).is_err());
    }

    #[test]
    fn single_row_stable_examples() {
        let mix = DirectingLaw::new(
            BaseFamily::ParetoSymmetric {
                tail_index: 1.5,
                scale: 1.0,
            },
            Randomizer::Scale {
                prior: Prior::atoms(&[(1.0, 0.5), (2.0, 0.5)]),
            },
        )
        .unwrap();
        let v = check_single_row_stable(&mix, &NormingSequence::power(1.5), &grid(), 1.5, &cfg())
            .unwrap();
        assert!(v.passed());
        // two scale atoms: c = K s^{3/2} for s ∈ {1, 2}
        let k = crate::characteristics::pushforward_constant(1.5);
        let mut cs: Vec<f64> = v
            .estimated_limit
            .unwrap()
            .mixing
            .unwrap()
            .atoms()
            .iter()
            .map(|a| a.0.c())
            .collect();
        cs.sort_by(f64::total_cmp);
        assert!(
            (cs[0] / k - 1.0).abs() < 1e-6 && (cs[1] / (k * 2f64.powf(1.5)) - 1.0).abs() < 1e-6
        );

        let v = check_single_row_stable(&mix, &NormingSequence::power(2.0), &grid(), 1.5, &cfg())
            .unwrap();
        assert_ne!(v.holds, Verdict::Pass);

        let skew = DirectingLaw::fixed(BaseFamily::ParetoSkewed {
            tail_index: 1.5,
            scale: 1.0,
            right_weight: 0.8,
        });
        let n = NormingSequence::power(1.5).with_centering(Centering::Linear { mean: 1.8 });
        let v = check_single_row_stable(&skew, &n, &grid(), 1.5, &cfg()).unwrap();
        assert!(v.hypothesis_violated);
    }

    #[test]
    fn gaussian_mixture_rejects_cauchy_under_root_norming() {
        let v = check_gaussian_mixture(
            &cauchy(),
            &NormingSequence::power(2.0),
            &grid(),
            1.0,
            &cfg(),
        )
        .unwrap();
        assert_eq!(v.holds, Verdict::Fail);
        assert_eq!(v.sub("variance_converges").unwrap().verdict, Verdict::Fail);
    }

    #[test]
    fn alpha_preconditions() {
        let n = NormingSequence::power(1.0);
        assert!(check_stable_mixture(&cauchy(), &n, &grid(), 1.0, &cfg()).is_err());
        assert!(check_single_row_stable(&cauchy(), &n, &grid(), 2.0, &cfg()).is_err());
        assert!(check_degenerate(&cauchy(), &n, &grid(), 0.0, &cfg()).is_err());
    }
}
