//! Diagnostic series for external plotting: Gaussian KDE curves and Q-Q points.

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::fmt::shortest;
use crate::transform::{compute_quantiles, SampleVector};

/// Default number of Q-Q points.
pub const DEFAULT_QQ_POINTS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    Kde,
    Qq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticSeries {
    pub kind: SeriesKind,
    pub points: Vec<(f64, f64)>,
}

impl DiagnosticSeries {
    /// One `x<TAB>y` line per point.
    pub fn to_tsv(&self) -> String {
        self.points
            .iter()
            .map(|&(x, y)| format!("{}\t{}\n", shortest(x), shortest(y)))
            .collect()
    }
}

/// Silverman's rule of thumb, `1.06 σ̂ n^(-1/5)`; falls back to 1 for
/// constant samples.
pub fn silverman_bandwidth(samples: &SampleVector) -> f64 {
    let xs = samples.as_slice();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let h = 1.06 * var.sqrt() * n.powf(-0.2);
    if h > 0.0 {
        h
    } else {
        1.0
    }
}

/// Gaussian KDE `(1/(n h)) Σ φ((g - x_i)/h)` at each grid point.
pub fn kde(samples: &SampleVector, bandwidth: f64, grid: &[f64]) -> Result<DiagnosticSeries> {
    if grid.is_empty() {
        return Err(invalid("KDE grid is empty"));
    }
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(invalid(format!("bandwidth {bandwidth} must be positive")));
    }
    let xs = samples.as_slice();
    let norm = 1.0 / (xs.len() as f64 * bandwidth * (2.0 * PI).sqrt());
    let points = grid
        .iter()
        .map(|&g| {
            let s: f64 = xs
                .iter()
                .map(|x| {
                    let z = (g - x) / bandwidth;
                    (-0.5 * z * z).exp()
                })
                .sum();
            (g, s * norm)
        })
        .collect();
    Ok(DiagnosticSeries {
        kind: SeriesKind::Kde,
        points,
    })
}

/// `count` evenly spaced points spanning `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// Pairs the `k` empirical quantiles of `a` and `b`.
pub fn qq_points(a: &SampleVector, b: &SampleVector, k: usize) -> Result<DiagnosticSeries> {
    let qa = compute_quantiles(a, k)?;
    let qb = compute_quantiles(b, k)?;
    Ok(DiagnosticSeries {
        kind: SeriesKind::Qq,
        points: qa.into_iter().zip(qb).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(v: &[f64]) -> SampleVector {
        SampleVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn kde_single_point() {
        let s = kde(&sv(&[0.0]), 1.0, &[0.0]).unwrap();
        assert!((s.points[0].1 - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
        assert!((s.points[0].1 - 0.39894).abs() < 1e-5);
    }

    #[test]
    fn kde_integrates_to_one() {
        let xs = sv(&[-1.0, 0.3, 0.4, 2.5, 7.0]);
        let h = 0.6;
        let grid = linspace(-1.0 - 6.0 * h, 7.0 + 6.0 * h, 4001);
        let s = kde(&xs, h, &grid).unwrap();
        let area: f64 = s
            .points
            .windows(2)
            .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
            .sum();
        assert!((area - 1.0).abs() < 0.01, "{area}");
        assert!(s.points.iter().all(|p| p.1 >= 0.0));
    }

    #[test]
    fn kde_symmetric() {
        let s = kde(&sv(&[-2.0, 2.0]), 0.8, &linspace(-5.0, 5.0, 101)).unwrap();
        for i in 0..101 {
            assert!((s.points[i].1 - s.points[100 - i].1).abs() < 1e-15);
        }
        assert!(kde(&sv(&[1.0]), 1.0, &[]).is_err());
        assert!(kde(&sv(&[1.0]), 0.0, &[1.0]).is_err());
    }

    #[test]
    fn qq_examples() {
        let a = sv(&[3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0, 5.0, 3.0]);
        let s = qq_points(&a, &a, 7).unwrap();
        assert_eq!(s.points.len(), 7);
        assert!(s.points.iter().all(|(x, y)| x == y));
        assert!(s.points.windows(2).all(|w| w[0].0 <= w[1].0));

        let shifted = sv(&a.as_slice().iter().map(|v| v + 2.5).collect::<Vec<_>>());
        let s = qq_points(&a, &shifted, 5).unwrap();
        assert!(s.points.iter().all(|(x, y)| *y == x + 2.5));
        assert!(qq_points(&a, &a, 1).is_err());
    }

    #[test]
    fn silverman_default() {
        let xs = sv(&[1.0, 2.0, 3.0, 4.0]);
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((silverman_bandwidth(&xs) - 1.06 * sd * 4f64.powf(-0.2)).abs() < 1e-15);
        assert_eq!(silverman_bandwidth(&sv(&[2.0, 2.0])), 1.0);
    }

    #[test]
    fn tsv_lines() {
        let s = DiagnosticSeries {
            kind: SeriesKind::Qq,
            points: vec![(0.5, 1.0), (1e-7, -2.25)],
        };
        assert_eq!(s.to_tsv(), "0.5\t1\n1e-7\t-2.25\n");
    }
}
