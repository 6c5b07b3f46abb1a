//! Distortion-vs-k scans and knee detection.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use super::kmeans::{
    kmeans_fit, lloyd, model_from_run, nearest, validate_points, KMeansConfig, KMeansModel,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElbowResult {
    pub k_values: Vec<usize>,
    /// Inertia of the best fit at each k.
    pub distortions: Vec<f64>,
    pub knee: Option<usize>,
}

/// Knee of a decreasing distortion curve.
///
/// Both axes are rescaled to the unit square; the knee is the point lying
/// farthest below the chord joining the first and last points. Returns
/// `None` when no point is more than 1e-9 below the chord (a straight or
/// flat curve).
pub fn detect_knee(k_values: &[usize], distortions: &[f64]) -> Result<Option<usize>> {
    if k_values.len() != distortions.len() {
        return Err(Error::LengthMismatch {
            left: k_values.len(),
            right: distortions.len(),
        });
    }
    let n = k_values.len();
    if n < 3 {
        return Err(Error::TooFewKneePoints(n));
    }
    if distortions.iter().any(|d| !d.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    let (k0, k1) = (k_values[0] as f64, k_values[n - 1] as f64);
    let lo = distortions.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = distortions
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if k1 <= k0 || hi - lo <= 0.0 {
        return Ok(None);
    }
    let norm = |i: usize| {
        (
            (k_values[i] as f64 - k0) / (k1 - k0),
            (distortions[i] - lo) / (hi - lo),
        )
    };
    let (x0, y0) = norm(0);
    let (xn, yn) = norm(n - 1);
    let (ux, uy) = (xn - x0, yn - y0);
    let len = ux.hypot(uy);

    let mut best: Option<(usize, f64)> = None;
    for i in 1..n - 1 {
        let (x, y) = norm(i);
        // Positive below the chord for a decreasing curve.
        let below = -(ux * (y - y0) - uy * (x - x0)) / len;
        if best.is_none_or(|(_, b)| below > b) {
            best = Some((i, below));
        }
    }
    Ok(best.filter(|&(_, d)| d >= 1e-9).map(|(i, _)| k_values[i]))
}

/// Fit every k in `k_range` and locate the knee of the distortion curve.
pub fn elbow_scan(
    points: &[Vec<f64>],
    k_range: RangeInclusive<usize>,
    template: &KMeansConfig,
) -> Result<ElbowResult> {
    elbow_scan_models(points, k_range, template).map(|(r, _)| r)
}

/// [`elbow_scan`] that also returns the fitted model for every k.
///
/// Besides the seeded restarts, each k > first also tries a warm start from
/// the previous k's centroids plus the point farthest from them, so the
/// reported distortions never increase with k.
pub fn elbow_scan_models(
    points: &[Vec<f64>],
    k_range: RangeInclusive<usize>,
    template: &KMeansConfig,
) -> Result<(ElbowResult, Vec<KMeansModel>)> {
    if k_range.is_empty() {
        return Err(Error::EmptyRange);
    }
    validate_points(points)?;
    let n = points.len();
    let (&first, &last) = (k_range.start(), k_range.end());
    if first < 1 || last > n {
        return Err(Error::InvalidK {
            k: if first < 1 { first } else { last },
            n,
        });
    }

    let mut models: Vec<KMeansModel> = Vec::with_capacity(last - first + 1);
    for k in k_range.clone() {
        let cfg = KMeansConfig {
            k,
            ..template.clone()
        };
        let mut model = kmeans_fit(points, &cfg)?;
        if let Some(prev) = models.last() {
            let farthest = points
                .iter()
                .enumerate()
                .map(|(i, p)| (i, nearest(p, &prev.centroids).1))
                .fold((0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b })
                .0;
            let mut init = prev.centroids.clone();
            init.push(points[farthest].clone());
            let warm = lloyd(points, init, cfg.max_iter, cfg.tol);
            if warm.inertia < model.inertia {
                model = model_from_run(warm, &cfg);
            }
        }
        models.push(model);
    }

    let k_values: Vec<usize> = k_range.collect();
    let distortions: Vec<f64> = models.iter().map(|m| m.inertia).collect();
    let knee = if k_values.len() >= 3 {
        detect_knee(&k_values, &distortions)?
    } else {
        None
    };
    Ok((
        ElbowResult {
            k_values,
            distortions,
            knee,
        },
        models,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force oracle: normalized distance of every interior point from
    /// the chord, via the point-to-line formula |ax + by + c| / sqrt(a² + b²).
    fn oracle_knee(ks: &[f64], ds: &[f64]) -> usize {
        let (lo, hi) = (ds[ds.len() - 1], ds[0]);
        let xs: Vec<f64> = ks
            .iter()
            .map(|k| (k - ks[0]) / (ks[ks.len() - 1] - ks[0]))
            .collect();
        let ys: Vec<f64> = ds.iter().map(|d| (d - lo) / (hi - lo)).collect();
        // Chord from (0, 1) to (1, 0): x + y - 1 = 0.
        (1..ks.len() - 1)
            .max_by(|&a, &b| {
                let da = (xs[a] + ys[a] - 1.0).abs() / 2f64.sqrt();
                let db = (xs[b] + ys[b] - 1.0).abs() / 2f64.sqrt();
                da.total_cmp(&db)
            })
            .unwrap()
    }

    #[test]
    fn knee_of_sharp_drop() {
        let ks: Vec<usize> = (1..=6).collect();
        let ds = [100.0, 10.0, 9.0, 8.5, 8.2, 8.0];
        let kf: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
        assert_eq!(ks[oracle_knee(&kf, &ds)], 2);
        assert_eq!(detect_knee(&ks, &ds).unwrap(), Some(2));
    }

    #[test]
    fn straight_line_has_no_knee() {
        let ks: Vec<usize> = (1..=5).collect();
        assert_eq!(detect_knee(&ks, &[10.0, 8.0, 6.0, 4.0, 2.0]).unwrap(), None);
        assert_eq!(detect_knee(&ks, &[0.0; 5]).unwrap(), None);
    }

    #[test]
    fn constructed_corner() {
        // Slope -2 down to k = 4, slope -0.5 afterwards.
        let ks: Vec<usize> = (1..=8).collect();
        let ds = [10.0, 8.0, 6.0, 4.0, 3.5, 3.0, 2.5, 2.0];
        let kf: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
        assert_eq!(ks[oracle_knee(&kf, &ds)], 4);
        assert_eq!(detect_knee(&ks, &ds).unwrap(), Some(4));
    }

    #[test]
    fn knee_errors() {
        assert!(matches!(
            detect_knee(&[1, 2], &[2.0, 1.0]),
            Err(Error::TooFewKneePoints(2))
        ));
        assert!(matches!(
            detect_knee(&[1, 2, 3], &[2.0, f64::NAN, 1.0]),
            Err(Error::NonFiniteInput)
        ));
    }

    #[test]
    fn scan_rejects_bad_ranges() {
        let pts = vec![vec![0.0], vec![1.0], vec![2.0]];
        let cfg = KMeansConfig::new(1);
        #[allow(clippy::reversed_empty_ranges)]
        let empty = 3..=1;
        assert!(matches!(
            elbow_scan(&pts, empty, &cfg),
            Err(Error::EmptyRange)
        ));
        assert!(matches!(
            elbow_scan(&pts, 1..=4, &cfg),
            Err(Error::InvalidK { k: 4, n: 3 })
        ));
        assert!(matches!(
            elbow_scan(&pts, 0..=2, &cfg),
            Err(Error::InvalidK { k: 0, n: 3 })
        ));
    }

    #[test]
    fn constant_data_has_flat_curve() {
        let pts = vec![vec![1.0, 1.0]; 12];
        let r = elbow_scan(&pts, 1..=10, &KMeansConfig::new(1)).unwrap();
        assert!(r.distortions.iter().all(|&d| d == 0.0));
        assert_eq!(r.knee, None);
    }
}
