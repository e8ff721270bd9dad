//! One-dimensional optimal transport.
//!
//! On the line, the optimal plan for any convex cost `|x - z|^p` matches
//! sorted samples in order, so the cost is a single pass over the two sorted
//! vectors. [`brute_force_ot`] enumerates every assignment and is kept as an
//! independent check on tiny inputs.

use crate::error::{invalid, Result};
use crate::transform::{QuantileTransform, SampleVector};

/// Largest input [`brute_force_ot`] accepts.
pub const BRUTE_FORCE_MAX: usize = 6;

/// A transport cost in distance convention: `(mean |x - z|^p)^(1/p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportCost {
    pub value: f64,
    pub exponent: f64,
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 || p.is_infinite() {
        return Err(invalid(format!(
            "cost exponent {p} must be a finite value >= 1"
        )));
    }
    Ok(())
}

fn finish(mean_power: f64, p: f64) -> TransportCost {
    let value = if p == 1.0 {
        mean_power
    } else {
        mean_power.powf(1.0 / p)
    };
    TransportCost { value, exponent: p }
}

#[inline]
fn cost(d: f64, p: f64) -> f64 {
    if p == 1.0 {
        d.abs()
    } else {
        d.abs().powf(p)
    }
}

fn sorted(v: &SampleVector) -> Vec<f64> {
    let mut s = v.as_slice().to_vec();
    s.sort_unstable_by(f64::total_cmp);
    s
}

/// Empirical quantile function of sorted data: `s[ceil(u·n) - 1]`.
fn quantile_at(s: &[f64], u: f64) -> f64 {
    let k = (u * s.len() as f64).ceil() as usize;
    s[k.clamp(1, s.len()) - 1]
}

/// `W_p` between two empirical distributions.
///
/// Equal lengths use exact sorted matching. Unequal lengths evaluate both
/// quantile functions at the midpoints of a uniform grid of
/// `4 · max(|a|, |b|)` cells.
pub fn wasserstein_1d(a: &SampleVector, b: &SampleVector, p: f64) -> Result<TransportCost> {
    check_exponent(p)?;
    let (sa, sb) = (sorted(a), sorted(b));
    let mean = if sa.len() == sb.len() {
        let total: f64 = sa.iter().zip(&sb).map(|(x, z)| cost(x - z, p)).sum();
        total / sa.len() as f64
    } else {
        let cells = 4 * sa.len().max(sb.len());
        let total: f64 = (0..cells)
            .map(|k| {
                let u = (k as f64 + 0.5) / cells as f64;
                cost(quantile_at(&sa, u) - quantile_at(&sb, u), p)
            })
            .sum();
        total / cells as f64
    };
    Ok(finish(mean, p))
}

/// Cost of the plan `x ↦ t(x)` over the given samples.
pub fn map_transport_cost(
    samples: &SampleVector,
    t: &QuantileTransform,
    p: f64,
) -> Result<TransportCost> {
    check_exponent(p)?;
    let xs = samples.as_slice();
    let total: f64 = xs.iter().map(|&x| cost(x - t.apply(x), p)).sum();
    Ok(finish(total / xs.len() as f64, p))
}

/// Exhaustive minimum over all pairings of two equal-size point sets.
pub fn brute_force_ot(a: &SampleVector, b: &SampleVector, p: f64) -> Result<TransportCost> {
    check_exponent(p)?;
    let n = a.len();
    if n != b.len() {
        return Err(invalid("brute-force transport needs equal sizes"));
    }
    if n > BRUTE_FORCE_MAX {
        return Err(invalid(format!(
            "brute-force transport limited to {BRUTE_FORCE_MAX} points, got {n}"
        )));
    }
    let (a, b) = (a.as_slice(), b.as_slice());
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    permute(&mut perm, 0, &mut |pi| {
        let total: f64 = pi
            .iter()
            .enumerate()
            .map(|(i, &j)| cost(a[i] - b[j], p))
            .sum();
        best = best.min(total);
    });
    Ok(finish(best / n as f64, p))
}

fn permute(perm: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == perm.len() {
        visit(perm);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute(perm, k + 1, visit);
        perm.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::{fit_band, TargetDistribution};

    fn sv(v: &[f64]) -> SampleVector {
        SampleVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn wasserstein_examples() {
        let a = sv(&[3.0, -1.0, 2.0]);
        assert_eq!(wasserstein_1d(&a, &a, 1.0).unwrap().value, 0.0);
        assert_eq!(
            wasserstein_1d(&sv(&[0.0, 1.0]), &sv(&[1.0, 2.0]), 1.0)
                .unwrap()
                .value,
            1.0
        );
        assert_eq!(
            wasserstein_1d(&sv(&[0.0]), &sv(&[3.0]), 1.0).unwrap().value,
            3.0
        );
        assert!(wasserstein_1d(&a, &a, 0.5).is_err());
    }

    #[test]
    fn brute_force_examples() {
        let (a, b) = (sv(&[0.0, 1.0]), sv(&[1.0, 2.0]));
        assert_eq!(brute_force_ot(&a, &b, 1.0).unwrap().value, 1.0);
        assert_eq!(brute_force_ot(&a, &a, 1.0).unwrap().value, 0.0);
        let c = brute_force_ot(&sv(&[0.0, 2.0]), &sv(&[1.0, 1.0]), 2.0).unwrap();
        assert_eq!(c.value, 1.0);
        assert_eq!(c.exponent, 2.0);
        assert_eq!(
            wasserstein_1d(&sv(&[0.0, 2.0]), &sv(&[1.0, 1.0]), 2.0)
                .unwrap()
                .value,
            1.0
        );

        let seven = sv(&[0.0; 7]);
        assert!(brute_force_ot(&seven, &seven, 1.0).is_err());
        assert!(brute_force_ot(&a, &sv(&[1.0]), 1.0).is_err());
    }

    #[test]
    fn unequal_lengths_use_quantile_grid() {
        // {0,1} vs {0,0,1,1}: identical distributions
        let d = wasserstein_1d(&sv(&[0.0, 1.0]), &sv(&[1.0, 0.0, 1.0, 0.0]), 1.0).unwrap();
        assert_eq!(d.value, 0.0);
        // point mass shift is exact on any grid
        let d = wasserstein_1d(&sv(&[2.0, 2.0, 2.0]), &sv(&[5.0]), 1.0).unwrap();
        assert_eq!(d.value, 3.0);
        // quantile functions differ by 1 on (1/3, 1/2] and (2/3, 1]: 1/6 + 1/3
        let d = wasserstein_1d(&sv(&[0.0, 1.0]), &sv(&[0.0, 1.0, 2.0]), 1.0).unwrap();
        assert!((d.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn map_cost_examples() {
        let t = fit_band(&sv(&[0.0, 4.0, 8.0]), 3, TargetDistribution::uniform(), 0).unwrap();
        let c = map_transport_cost(&sv(&[6.0; 5]), &t, 1.0).unwrap();
        assert!((c.value - (6.0 - t.apply(6.0)).abs()).abs() < 1e-15);

        // samples on the quantiles land on the grid
        let q = [1.0, 2.0, 5.0, 7.0];
        let t = fit_band(&sv(&q), 4, TargetDistribution::uniform(), 0).unwrap();
        assert_eq!(t.quantiles(), &q);
        let expect = q
            .iter()
            .enumerate()
            .map(|(i, &x)| (x - i as f64 / 3.0).abs())
            .sum::<f64>()
            / 4.0;
        let c = map_transport_cost(&sv(&q), &t, 1.0).unwrap();
        assert!((c.value - expect).abs() < 1e-15);
    }
}
