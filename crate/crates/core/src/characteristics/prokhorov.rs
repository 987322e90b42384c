//! Exact Lévy–Prokhorov distance between finite atomic measures on the line
//! and the `d#` metric built from it.
//!
//! For atomic measures the excess `sup_F μ(F) − ν(F^ε)` is attained on a set
//! of atoms of `μ`; it is found by a dynamic program over the sorted atoms in
//! which consecutive chosen atoms share the overlap of their
//! `ε`-neighbourhoods. The excess only changes when `ε` crosses a distance
//! between an atom of `μ` and an atom of `ν`, so the infimum over `ε` is
//! located by a search over those distances rather than by bisection.
//!
//! `d_r` is constant between consecutive atom radii, which makes the outer
//! integral of `d#` a finite sum.

use crate::measure::AtomicMeasure;

struct Prefix {
    xs: Vec<f64>,
    cum: Vec<f64>,
}

impl Prefix {
    fn new(m: &AtomicMeasure) -> Self {
        let xs = m.atoms().iter().map(|a| a.0).collect();
        let mut cum = Vec::with_capacity(m.len() + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        for &(_, w) in m.atoms() {
            acc += w;
            cum.push(acc);
        }
        Self { xs, cum }
    }

    // mass of the closed interval [lo, hi]
    fn closed(&self, lo: f64, hi: f64) -> f64 {
        if hi < lo {
            return 0.0;
        }
        let a = self.xs.partition_point(|&x| x < lo);
        let b = self.xs.partition_point(|&x| x <= hi);
        if b <= a {
            0.0
        } else {
            self.cum[b] - self.cum[a]
        }
    }
}

// sup over atom subsets S of μ of μ(S) − ν(S^ε), closed neighbourhoods
fn excess(mu: &AtomicMeasure, nu: &Prefix, eps: f64) -> f64 {
    let atoms = mu.atoms();
    let mut best: Vec<f64> = Vec::with_capacity(atoms.len());
    let mut overall = 0.0f64;
    // best value over chains ending far enough left that neighbourhoods are disjoint
    let mut disjoint_best = 0.0f64;
    let mut frontier = 0usize;
    for (i, &(x, w)) in atoms.iter().enumerate() {
        while frontier < i && x - atoms[frontier].0 > 2.0 * eps {
            disjoint_best = disjoint_best.max(best[frontier]);
            frontier += 1;
        }
        let own = w - nu.closed(x - eps, x + eps);
        let mut prev = disjoint_best;
        for (j, &bj) in best.iter().enumerate().take(i).skip(frontier) {
            let xj = atoms[j].0;
            prev = prev.max(bj + nu.closed(x - eps, xj + eps));
        }
        let v = own + prev;
        best.push(v);
        overall = overall.max(v);
    }
    overall
}

/// Lévy–Prokhorov distance between two finite atomic measures.
pub fn prokhorov(mu: &AtomicMeasure, nu: &AtomicMeasure) -> f64 {
    if mu == nu {
        return 0.0;
    }
    let pm = Prefix::new(mu);
    let pn = Prefix::new(nu);
    let g = |eps: f64| excess(mu, &pn, eps).max(excess(nu, &pm, eps));
    let mut d: Vec<f64> = vec![0.0];
    for &(x, _) in mu.atoms() {
        for &(y, _) in nu.atoms() {
            d.push((x - y).abs());
        }
    }
    d.sort_by(f64::total_cmp);
    d.dedup();
    // g is constant on [d_k, d_{k+1}); find the first k with g(d_k) < d_{k+1}
    let upper = |k: usize| d.get(k + 1).copied().unwrap_or(f64::INFINITY);
    let (mut lo, mut hi) = (0usize, d.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if g(d[mid]) < upper(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    d[lo].max(g(d[lo]))
}

/// `d#(μ, ν) = ∫₀^∞ d_r / (1 + d_r) e^{−r} dr` with `d_r` the Prokhorov
/// distance between the restrictions to `(−r, r)`, truncated at `r_max`.
pub fn dsharp(mu: &AtomicMeasure, nu: &AtomicMeasure, r_max: f64) -> f64 {
    let mut radii: Vec<f64> = mu
        .atoms()
        .iter()
        .chain(nu.atoms())
        .map(|a| a.0.abs())
        .filter(|&r| r < r_max)
        .collect();
    radii.push(0.0);
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let mut total = 0.0;
    for (k, &r) in radii.iter().enumerate() {
        let next = radii.get(k + 1).copied().unwrap_or(r_max);
        // for r' in (r, next] the restriction keeps atoms with |x| ≤ r
        let keep = |m: &AtomicMeasure| {
            AtomicMeasure::new(m.atoms().iter().copied().filter(|a| a.0.abs() <= r))
                .expect("restriction of a valid measure")
        };
        let dr = prokhorov(&keep(mu), &keep(nu));
        total += dr / (1.0 + dr) * ((-r).exp() - (-next).exp());
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(atoms: &[(f64, f64)]) -> AtomicMeasure {
        AtomicMeasure::new(atoms.iter().copied()).unwrap()
    }

    // brute force over all subsets and a fine ε scan
    fn brute(mu: &AtomicMeasure, nu: &AtomicMeasure) -> f64 {
        let ex = |a: &AtomicMeasure, b: &AtomicMeasure, eps: f64| {
            let n = a.len();
            let mut best = 0.0f64;
            for mask in 0u32..(1 << n) {
                let chosen: Vec<f64> = (0..n)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| a.atoms()[i].0)
                    .collect();
                let ma: f64 = (0..n)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| a.atoms()[i].1)
                    .sum();
                let nb: f64 = b
                    .atoms()
                    .iter()
                    .filter(|(y, _)| chosen.iter().any(|x| (x - y).abs() <= eps))
                    .map(|a| a.1)
                    .sum();
                best = best.max(ma - nb);
            }
            best
        };
        let mut eps = 0.0;
        loop {
            if ex(mu, nu, eps).max(ex(nu, mu, eps)) <= eps {
                return eps;
            }
            eps += 1e-4;
        }
    }

    #[test]
    fn matches_brute_force() {
        let cases = [
            (m(&[(0.0, 0.5), (1.0, 0.3)]), m(&[(0.2, 0.4), (1.5, 0.4)])),
            (m(&[(0.0, 1.0)]), m(&[(0.3, 1.0)])),
            (
                m(&[(-1.0, 0.2), (0.0, 0.2), (2.0, 0.6)]),
                m(&[(-0.9, 0.1), (2.2, 0.7)]),
            ),
            (m(&[(0.0, 2.0)]), m(&[(0.0, 1.0)])),
        ];
        for (a, b) in &cases {
            let exact = prokhorov(a, b);
            let bf = brute(a, b);
            assert!((exact - bf).abs() <= 1.01e-4, "{exact} vs {bf}");
        }
    }

    #[test]
    fn unit_atom_shift() {
        // two unit atoms at distance 0.3: distance is 0.3
        assert!((prokhorov(&m(&[(0.0, 1.0)]), &m(&[(0.3, 1.0)])) - 0.3).abs() < 1e-15);
        // far apart: distance is the mass 1
        assert_eq!(prokhorov(&m(&[(0.0, 1.0)]), &m(&[(5.0, 1.0)])), 1.0);
    }

    #[test]
    fn null_against_unit_atom() {
        let d = dsharp(&AtomicMeasure::null(), &m(&[(0.5, 1.0)]), 20.0);
        let want = 0.5 * (-0.5f64).exp() - 0.5 * (-20.0f64).exp();
        assert!((d - want).abs() < 1e-15);
        assert!((d - 0.3033).abs() < 1e-4);
        assert_eq!(
            dsharp(&AtomicMeasure::null(), &AtomicMeasure::null(), 20.0),
            0.0
        );
    }

    #[test]
    fn identity_and_symmetry() {
        let a = m(&[(-2.0, 0.4), (0.1, 1.2), (3.0, 0.7)]);
        let b = m(&[(-1.5, 0.3), (0.4, 1.0)]);
        assert_eq!(dsharp(&a, &a, 20.0), 0.0);
        assert_eq!(dsharp(&a, &b, 20.0), dsharp(&b, &a, 20.0));
        assert!(dsharp(&a, &b, 20.0) > 0.0);
    }
}
