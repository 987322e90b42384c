//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Infinite endpoints are handled by the map `x = a + (1 - s)/s` on `(0, 1]`,
//! which never evaluates the integrand at the singular end of the map.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            abs_tol: 1e-11,
            rel_tol: 1e-11,
            max_intervals: 2000,
        }
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

impl Quadrature {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    /// Integrate `f` over `[a, b]`; either endpoint may be infinite.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<Estimate> {
        if a == b {
            return Ok(Estimate {
                value: 0.0,
                error: 0.0,
                evaluations: 0,
            });
        }
        if a > b {
            return self.integrate(f, b, a).map(|e| Estimate {
                value: -e.value,
                ..e
            });
        }
        match (a.is_finite(), b.is_finite()) {
            (true, true) => self.finite(&f, a, b),
            (true, false) => self.finite(
                &|s: f64| {
                    let t = (1.0 - s) / s;
                    f(a + t) / (s * s)
                },
                0.0,
                1.0,
            ),
            (false, true) => self.finite(
                &|s: f64| {
                    let t = (1.0 - s) / s;
                    f(b - t) / (s * s)
                },
                0.0,
                1.0,
            ),
            (false, false) => self.finite(
                &|s: f64| {
                    let t = (1.0 - s) / s;
                    (f(t) + f(-t)) / (s * s)
                },
                0.0,
                1.0,
            ),
        }
    }

    fn finite<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> Result<Estimate> {
        let (value, error) = kronrod(f, a, b);
        let mut heap = BinaryHeap::new();
        heap.push(Segment { a, b, value, error });
        let mut total = value;
        let mut total_err = error;
        let mut evaluations = 15;
        while total_err > self.abs_tol.max(self.rel_tol * total.abs()) {
            if heap.len() >= self.max_intervals {
                return Err(Error::Quadrature {
                    context: format!("[{a}, {b}]"),
                    achieved: total_err,
                    requested: self.abs_tol.max(self.rel_tol * total.abs()),
                });
            }
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                // interval cannot be split further in floating point
                heap.push(worst);
                return Err(Error::Quadrature {
                    context: format!("[{a}, {b}] (interval exhausted)"),
                    achieved: total_err,
                    requested: self.abs_tol.max(self.rel_tol * total.abs()),
                });
            }
            let (v1, e1) = kronrod(f, worst.a, mid);
            let (v2, e2) = kronrod(f, mid, worst.b);
            evaluations += 30;
            total += v1 + v2 - worst.value;
            total_err += e1 + e2 - worst.error;
            heap.push(Segment {
                a: worst.a,
                b: mid,
                value: v1,
                error: e1,
            });
            heap.push(Segment {
                a: mid,
                b: worst.b,
                value: v2,
                error: e2,
            });
            if heap.len() % 64 == 0 {
                // re-sum to shed accumulated rounding in the running totals
                total = heap.iter().map(|s| s.value).sum();
                total_err = heap.iter().map(|s| s.error).sum();
            }
        }
        Ok(Estimate {
            value: total,
            error: total_err,
            evaluations,
        })
    }
}

/// Integrate with the default tolerances, labelling failures with `context`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, context: &str) -> Result<f64> {
    Quadrature::default()
        .integrate(f, a, b)
        .map(|e| e.value)
        .map_err(|e| match e {
            Error::Quadrature {
                context: inner,
                achieved,
                requested,
            } => Error::Quadrature {
                context: format!("{context} {inner}"),
                achieved,
                requested,
            },
            other => other,
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exact() {
        let q = Quadrature::default();
        let e = q.integrate(|x| x * x * x - 2.0 * x, 0.0, 3.0).unwrap();
        assert!((e.value - (81.0 / 4.0 - 9.0)).abs() < 1e-13);
    }

    #[test]
    fn semi_infinite_and_infinite() {
        let q = Quadrature::default();
        let e = q.integrate(|x| (-x).exp(), 0.0, f64::INFINITY).unwrap();
        assert!((e.value - 1.0).abs() < 1e-11);
        let c = q
            .integrate(
                |x| 1.0 / (PI * (1.0 + x * x)),
                f64::NEG_INFINITY,
                f64::INFINITY,
            )
            .unwrap();
        assert!((c.value - 1.0).abs() < 1e-10);
        let g = q
            .integrate(|x| (-x * x).exp(), f64::NEG_INFINITY, 1.0)
            .unwrap();
        let expected = PI.sqrt() * 0.5 * (1.0 + libm::erf(1.0));
        assert!((g.value - expected).abs() < 1e-11);
    }

    #[test]
    fn reversed_limits_negate() {
        let q = Quadrature::default();
        let fwd = q.integrate(f64::sin, 0.0, 2.0).unwrap().value;
        let rev = q.integrate(f64::sin, 2.0, 0.0).unwrap().value;
        assert_eq!(fwd, -rev);
    }

    #[test]
    fn endpoint_singularity() {
        let q = Quadrature::default();
        let e = q.integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0).unwrap();
        assert!((e.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn budget_exhaustion_reports_error() {
        let q = Quadrature {
            abs_tol: 1e-15,
            rel_tol: 0.0,
            max_intervals: 4,
        };
        let err = q
            .integrate(|x| (50.0 * x).sin().abs(), 0.0, 10.0)
            .unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }
}
