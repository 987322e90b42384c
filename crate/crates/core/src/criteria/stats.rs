//! Statistical building blocks shared by the checkers.

use serde::{Deserialize, Serialize};

use super::{StatTestConfig, SubCheck, Verdict};

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn median(xs: &[f64]) -> f64 {
    let v = sorted(xs);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

// right-continuous empirical distribution function of sorted data
fn ecdf(v: &[f64], x: f64) -> f64 {
    v.partition_point(|&y| y <= x) as f64 / v.len() as f64
}

fn ecdf_left(v: &[f64], x: f64) -> f64 {
    v.partition_point(|&y| y < x) as f64 / v.len() as f64
}

/// Lévy distance between the empirical laws of two samples.
///
/// `inf{h ≥ 0 : F(x − h) − h ≤ G(x) ≤ F(x + h) + h for all x}`, located by
/// bisection to `1e-9`. The condition only needs checking at the jump points
/// of both functions.
pub fn levy_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 1.0;
    }
    let f = sorted(a);
    let g = sorted(b);
    let holds = |h: f64| -> bool {
        let ok = |p: &[f64], q: &[f64]| {
            // Q(x) ≤ P(x + h) + h and P(x − h) − h ≤ Q(x), for x at jumps of Q
            // and at jumps of P shifted by ∓h
            let check = |x: f64| {
                let qx = ecdf(q, x);
                let qlx = ecdf_left(q, x);
                qx <= ecdf(p, x + h) + h + 1e-12 && ecdf_left(p, x - h) - h <= qlx + 1e-12
            };
            q.iter().all(|&x| check(x)) && p.iter().all(|&y| check(y - h) && check(y + h))
        };
        ok(&f, &g) && ok(&g, &f)
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if holds(0.0) {
        return 0.0;
    }
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Location and spread of a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    /// 10%, 25%, 50%, 75% and 90% quantiles.
    pub quantiles: [f64; 5],
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let v = sorted(xs);
        let n = v.len();
        let mean = v.iter().sum::<f64>() / n as f64;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n.max(2) - 1) as f64;
        let q = |p: f64| v[((p * (n - 1) as f64).round() as usize).min(n - 1)];
        Self {
            count: n,
            mean,
            sd: var.sqrt(),
            quantiles: [q(0.1), q(0.25), q(0.5), q(0.75), q(0.9)],
        }
    }
}

fn fraction(xs: &[f64], pred: impl Fn(f64) -> bool) -> f64 {
    xs.iter().filter(|&&x| pred(x)).count() as f64 / xs.len() as f64
}

fn at_most_one_rise(fr: &[f64]) -> bool {
    fr.windows(2).filter(|w| w[1] > w[0] + 1e-12).count() <= 1
}

/// `Z_n →P target` (or the median at the largest `n` when `target` is
/// `None`), judged by the fraction of replicates with `|Z_n − z| > δ`.
pub fn in_probability(
    name: &str,
    ns: &[u64],
    values: &[Vec<f64>],
    target: Option<f64>,
    cfg: &StatTestConfig,
) -> (SubCheck, f64) {
    let last = values.last().expect("nonempty grid");
    let z = target.unwrap_or_else(|| median(last));
    let fr: Vec<f64> = values
        .iter()
        .map(|v| fraction(v, |x| !((x - z).abs() <= cfg.delta)))
        .collect();
    let f_last = *fr.last().unwrap();
    let verdict = if f_last <= cfg.prob_bound && at_most_one_rise(&fr) {
        Verdict::Pass
    } else if f_last >= 0.5 {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    };
    (
        SubCheck {
            name: name.into(),
            verdict,
            statistic: "exceedance fraction".into(),
            per_n: ns.iter().copied().zip(fr).collect(),
            detail: format!("limit {z:.6}, delta {}", cfg.delta),
        },
        z,
    )
}

/// Weak convergence of a real statistic: Lévy distance between the
/// empirical laws at the last two grid points.
pub fn weak_convergence(
    name: &str,
    ns: &[u64],
    values: &[Vec<f64>],
    cfg: &StatTestConfig,
) -> SubCheck {
    let k = values.len();
    let mut per_n = Vec::with_capacity(k);
    for i in 1..k {
        per_n.push((ns[i], levy_distance(&values[i - 1], &values[i])));
    }
    let d = per_n.last().map(|p| p.1).unwrap_or(0.0);
    let verdict = if d <= cfg.weak_tol {
        Verdict::Pass
    } else if d > cfg.weak_tol + cfg.margin {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    };
    SubCheck {
        name: name.into(),
        verdict,
        statistic: "Levy distance to previous n".into(),
        per_n,
        detail: format!("tolerance {}", cfg.weak_tol),
    }
}

/// A positive share of replicates satisfies `pred` at the largest `n`.
pub fn positive_fraction(
    name: &str,
    ns: &[u64],
    values: &[Vec<f64>],
    pred: impl Fn(f64) -> bool,
    what: &str,
    cfg: &StatTestConfig,
) -> SubCheck {
    let fr: Vec<f64> = values.iter().map(|v| fraction(v, &pred)).collect();
    let f_last = *fr.last().unwrap();
    let verdict = if f_last >= cfg.margin {
        Verdict::Pass
    } else if f_last <= cfg.prob_bound {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    };
    SubCheck {
        name: name.into(),
        verdict,
        statistic: format!("fraction {what}"),
        per_n: ns.iter().copied().zip(fr).collect(),
        detail: format!("needs at least {}", cfg.margin),
    }
}
