//! Fixtures shared by the kernel benchmarks.

use exclt_core::{AtomicMeasure, BaseFamily, DirectingLaw, Prior, Randomizer, StableParams};

pub fn cauchy_scale_mixture() -> DirectingLaw {
    DirectingLaw::new(
        BaseFamily::Cauchy {
            location: 0.0,
            scale: 1.0,
        },
        Randomizer::Scale {
            prior: Prior::atoms(&[(1.0, 0.5), (2.0, 0.5)]),
        },
    )
    .expect("valid law")
}

pub fn pareto(tail_index: f64) -> DirectingLaw {
    DirectingLaw::fixed(BaseFamily::ParetoSymmetric {
        tail_index,
        scale: 1.0,
    })
}

pub fn stable(alpha: f64, beta: f64) -> StableParams {
    StableParams::new(alpha, 0.0, 1.0, beta).expect("valid parameters")
}

/// `k` atoms at evenly spaced points of `[lo, hi]` with masses from `mass`.
pub fn spread_measure(k: usize, lo: f64, hi: f64, mass: impl Fn(usize) -> f64) -> AtomicMeasure {
    let step = if k > 1 {
        (hi - lo) / (k - 1) as f64
    } else {
        0.0
    };
    AtomicMeasure::new((0..k).map(|i| (lo + step * i as f64, mass(i)))).expect("valid measure")
}
