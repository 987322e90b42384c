//! Distribution function and density of a standard stable law
//! `S_α(1, β, 0)` (the parameterization where `β > 0` skews right) from its
//! integral representation: non-oscillatory integrals over a finite angle.
//!
//! Far in the tails the integrands are concentrated near the angle where
//! `scale · V(θ) = 1`; that angle is located by bisection and used as a
//! breakpoint.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::Result;
use crate::quadrature::Quadrature;

fn quad() -> Quadrature {
    Quadrature {
        abs_tol: 1e-15,
        rel_tol: 1e-11,
        max_intervals: 4000,
    }
}

#[derive(Clone, Copy)]
enum Integrand {
    // exp(−w)
    Body,
    // 1 − exp(−w)
    Complement,
    // w exp(−w)
    Density,
}

fn integrand(kind: Integrand, w: f64) -> f64 {
    match kind {
        Integrand::Body => {
            if w.is_finite() {
                (-w).exp()
            } else {
                0.0
            }
        }
        Integrand::Complement => {
            if w.is_finite() {
                -(-w).exp_m1()
            } else {
                1.0
            }
        }
        Integrand::Density => {
            if w.is_finite() && w < 745.0 {
                w * (-w).exp()
            } else {
                0.0
            }
        }
    }
}

// ∫_lo^hi integrand(scale · V(θ)) dθ, split where scale · V = 1.
fn angular<V: Fn(f64) -> f64>(v: V, scale: f64, lo: f64, hi: f64, kind: Integrand) -> Result<f64> {
    let w = |th: f64| {
        let x = v(th);
        if x.is_nan() {
            f64::INFINITY
        } else {
            scale * x
        }
    };
    let log_excess = |th: f64| w(th).ln();
    let eps = 1e-12 * (hi - lo);
    let (mut a, mut b) = (lo + eps, hi - eps);
    let (fa, fb) = (log_excess(a), log_excess(b));
    let mut cuts = vec![lo];
    if fa.signum() != fb.signum() {
        let rising = fa < fb;
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            let fm = log_excess(m);
            if (fm < 0.0) == rising {
                a = m;
            } else {
                b = m;
            }
            if b - a < 1e-15 * (hi - lo) {
                break;
            }
        }
        let star = 0.5 * (a + b);
        // geometric breakpoints on both sides of the peak
        let near = (star - lo).min(hi - star).max(1e-300);
        let mut d = near * 1e-3;
        while d < hi - lo {
            for c in [star - d, star + d] {
                if c > lo && c < hi {
                    cuts.push(c);
                }
            }
            d *= 4.0;
        }
        cuts.push(star);
    }
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut total = 0.0;
    for s in cuts.windows(2) {
        total += quad()
            .integrate(|th| integrand(kind, w(th)), s[0], s[1])?
            .value;
    }
    Ok(total)
}

struct Kernel {
    alpha: f64,
    beta: f64,
    theta0: f64,
}

impl Kernel {
    fn new(alpha: f64, beta: f64) -> Self {
        let theta0 = if alpha == 1.0 {
            FRAC_PI_2
        } else {
            (beta * (PI * alpha / 2.0).tan()).atan() / alpha
        };
        Self {
            alpha,
            beta,
            theta0,
        }
    }

    // α ≠ 1
    fn v(&self, theta: f64) -> f64 {
        let a = self.alpha;
        let t0 = self.theta0;
        let base = (a * t0).cos().powf(1.0 / (a - 1.0));
        let ratio = theta.cos() / (a * (t0 + theta)).sin();
        let tail = (a * t0 + (a - 1.0) * theta).cos() / theta.cos();
        base * ratio.powf(a / (a - 1.0)) * tail
    }

    // α = 1, β > 0
    fn v1(&self, theta: f64) -> f64 {
        let b = self.beta;
        let s = FRAC_PI_2 + b * theta;
        2.0 / PI * (s / theta.cos()) * ((s * theta.tan()) / b).exp()
    }
}

/// `(P(Y ≤ y), P(Y > y))` for `Y ~ S_α(1, β, 0)`, each computed without
/// cancellation on its own side.
pub(crate) fn standard_cdf_sf(alpha: f64, beta: f64, y: f64) -> Result<(f64, f64)> {
    if alpha == 1.0 {
        if beta < 0.0 {
            let (lo, hi) = standard_cdf_sf(1.0, -beta, -y)?;
            return Ok((hi, lo));
        }
        if beta == 0.0 {
            return Ok(((1.0f64).atan2(-y) / PI, (1.0f64).atan2(y) / PI));
        }
        let k = Kernel::new(1.0, beta);
        let e = (-PI * y / (2.0 * beta)).exp();
        let v = |th| k.v1(th);
        let cdf = angular(v, e, -FRAC_PI_2, FRAC_PI_2, Integrand::Body)?;
        let sf = angular(v, e, -FRAC_PI_2, FRAC_PI_2, Integrand::Complement)?;
        return Ok((cdf / PI, sf / PI));
    }
    if y < 0.0 {
        let (lo, hi) = standard_cdf_sf(alpha, -beta, -y)?;
        return Ok((hi, lo));
    }
    let k = Kernel::new(alpha, beta);
    let at_zero = (FRAC_PI_2 - k.theta0) / PI;
    if y == 0.0 {
        return Ok((at_zero, 1.0 - at_zero));
    }
    let scale = y.powf(alpha / (alpha - 1.0));
    let v = |th| k.v(th);
    let body = angular(v, scale, -k.theta0, FRAC_PI_2, Integrand::Body)? / PI;
    let complement = angular(v, scale, -k.theta0, FRAC_PI_2, Integrand::Complement)? / PI;
    if alpha > 1.0 {
        // F = 1 − (1/π)∫ e^{−w}
        Ok((at_zero + complement, body))
    } else {
        // F = (π/2 − θ₀)/π + (1/π)∫ e^{−w}
        Ok((at_zero + body, complement))
    }
}

/// Density of `S_α(1, β, 0)` at `y`.
pub(crate) fn standard_density(alpha: f64, beta: f64, y: f64) -> Result<f64> {
    if alpha == 1.0 {
        if beta < 0.0 {
            return standard_density(1.0, -beta, -y);
        }
        if beta == 0.0 {
            return Ok(1.0 / (PI * (1.0 + y * y)));
        }
        let k = Kernel::new(1.0, beta);
        let e = (-PI * y / (2.0 * beta)).exp();
        let int = angular(|th| k.v1(th), e, -FRAC_PI_2, FRAC_PI_2, Integrand::Density)?;
        return Ok(int / (2.0 * beta));
    }
    if y < 0.0 {
        return standard_density(alpha, -beta, -y);
    }
    let k = Kernel::new(alpha, beta);
    if y == 0.0 {
        return Ok(crate::special::gamma(1.0 + 1.0 / alpha)
            * k.theta0.cos()
            * (alpha * k.theta0).cos().powf(1.0 / alpha)
            / PI);
    }
    let scale = y.powf(alpha / (alpha - 1.0));
    let int = angular(
        |th| k.v(th),
        scale,
        -k.theta0,
        FRAC_PI_2,
        Integrand::Density,
    )?;
    // α y^{1/(α−1)} ∫ V e^{−y^{α/(α−1)} V} / (π|α−1|), with y^{α/(α−1)} V folded into w
    Ok(alpha * int / (PI * (alpha - 1.0).abs() * y))
}
