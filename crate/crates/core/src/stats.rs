//! Pearson correlation, correlation matrices, correlation-driven feature
//! selection and z-score standardization.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dataset::{HerdTable, MeasurementKey};
use crate::error::{Error, Result};

/// Arithmetic mean with one refinement pass. Returns NaN for an empty slice.
pub fn mean(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    m + xs.iter().map(|x| x - m).sum::<f64>() / n
}

/// Sample variance (`n - 1` denominator); 0 for fewer than two values.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn sample_std(xs: &[f64]) -> f64 {
    sample_variance(xs).sqrt()
}

/// Linear-interpolation quantile of an ascending slice: position
/// `h = (n - 1) p`, value `x[floor h] + frac(h) (x[floor h + 1] - x[floor h])`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty() && (0.0..=1.0).contains(&p));
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    match sorted.get(lo + 1) {
        Some(&next) if frac > 0.0 => sorted[lo] + frac * (next - sorted[lo]),
        _ => sorted[lo],
    }
}

fn is_constant(xs: &[f64]) -> bool {
    xs.iter().all(|&x| x == xs[0])
}

/// Pearson product-moment correlation.
///
/// Fails on length mismatch, fewer than two observations, or a constant
/// input; a zero-variance column never silently yields `r = 0`.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooFewObservations {
            needed: 2,
            got: x.len(),
        });
    }
    if is_constant(x) {
        return Err(Error::ZeroVariance("x".into()));
    }
    if is_constant(y) {
        return Err(Error::ZeroVariance("y".into()));
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Symmetric matrix of pairwise Pearson correlations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    keys: Vec<MeasurementKey>,
    r: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    /// Assemble a matrix from known coefficients, e.g. published values.
    /// The matrix must be square, symmetric, within `[-1, 1]` and have a
    /// unit diagonal.
    pub fn from_parts(keys: Vec<MeasurementKey>, r: Vec<Vec<f64>>) -> Result<Self> {
        let d = keys.len();
        if r.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: r.len(),
            });
        }
        for (i, row) in r.iter().enumerate() {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
            if row[i] != 1.0 {
                return Err(Error::Domain("correlation diagonal must be 1"));
            }
            for (j, &v) in row.iter().enumerate() {
                if !(-1.0..=1.0).contains(&v) {
                    return Err(Error::Domain("correlation outside [-1, 1]"));
                }
                if v != r[j][i] {
                    return Err(Error::Domain("correlation matrix must be symmetric"));
                }
            }
        }
        Ok(CorrelationMatrix { keys, r })
    }

    pub fn keys(&self) -> &[MeasurementKey] {
        &self.keys
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.r
    }

    fn index(&self, key: &MeasurementKey) -> Result<usize> {
        self.keys
            .iter()
            .position(|k| k == key)
            .ok_or_else(|| Error::UnknownKey(key.to_string()))
    }

    pub fn get(&self, a: &MeasurementKey, b: &MeasurementKey) -> Result<f64> {
        Ok(self.r[self.index(a)?][self.index(b)?])
    }

    /// CSV with a header row and a leading column of keys.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let mut header = vec!["key".to_string()];
        header.extend(self.keys.iter().map(ToString::to_string));
        wtr.write_record(&header)?;
        for (key, row) in self.keys.iter().zip(&self.r) {
            let mut rec = vec![key.to_string()];
            rec.extend(row.iter().map(|v| v.to_string()));
            wtr.write_record(&rec)?;
        }
        wtr.flush().map_err(|e| Error::io("<correlation csv>", e))?;
        Ok(())
    }
}

/// Pairwise correlations of `keys`. Each unordered pair is computed once,
/// so the result is exactly symmetric.
pub fn correlation_matrix(table: &HerdTable, keys: &[MeasurementKey]) -> Result<CorrelationMatrix> {
    let cols = keys
        .iter()
        .map(|k| table.column(k))
        .collect::<Result<Vec<_>>>()?;
    for (k, c) in keys.iter().zip(&cols) {
        if table.n_animals() >= 2 && is_constant(c) {
            return Err(Error::ZeroVariance(k.to_string()));
        }
    }
    let d = keys.len();
    let mut r = vec![vec![1.0; d]; d];
    for i in 0..d {
        for j in (i + 1)..d {
            let v = pearson_r(cols[i], cols[j]).map_err(|e| Error::PairCorrelation {
                left: keys[i].to_string(),
                right: keys[j].to_string(),
                source: Box::new(e),
            })?;
            r[i][j] = v;
            r[j][i] = v;
        }
    }
    Ok(CorrelationMatrix {
        keys: keys.to_vec(),
        r,
    })
}

/// Features ranked by absolute correlation with a target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSelection {
    pub target: MeasurementKey,
    pub selected: Vec<MeasurementKey>,
    pub r_values: Vec<f64>,
}

/// The `count` keys most strongly correlated (in absolute value) with
/// `target`, excluding `exclude` and the target itself. Ties keep matrix
/// key order.
pub fn select_features(
    m: &CorrelationMatrix,
    target: &MeasurementKey,
    count: usize,
    exclude: &[MeasurementKey],
) -> Result<FeatureSelection> {
    select_features_with(m, target, count, exclude, false)
}

/// [`select_features`] with control over whether the target may be selected.
pub fn select_features_with(
    m: &CorrelationMatrix,
    target: &MeasurementKey,
    count: usize,
    exclude: &[MeasurementKey],
    include_target: bool,
) -> Result<FeatureSelection> {
    if count == 0 {
        return Err(Error::Domain("feature count must be positive"));
    }
    let t = m.index(target)?;
    let mut candidates: Vec<(usize, f64)> = m
        .keys
        .iter()
        .enumerate()
        .filter(|(i, k)| (include_target || *i != t) && !exclude.contains(k))
        .map(|(i, _)| (i, m.r[t][i]))
        .collect();
    if count > candidates.len() {
        return Err(Error::NotEnoughCandidates {
            requested: count,
            available: candidates.len(),
        });
    }
    // Stable sort keeps key order among equal |r|.
    candidates.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
    candidates.truncate(count);
    Ok(FeatureSelection {
        target: target.clone(),
        selected: candidates.iter().map(|&(i, _)| m.keys[i].clone()).collect(),
        r_values: candidates.iter().map(|&(_, r)| r).collect(),
    })
}

/// Z-scored columns plus the moments needed to undo (or reapply) the
/// transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizedMatrix {
    pub keys: Vec<MeasurementKey>,
    pub animal_ids: Vec<String>,
    /// Row-major: one row per animal, one column per key.
    pub z: Vec<Vec<f64>>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl StandardizedMatrix {
    pub fn n_points(&self) -> usize {
        self.z.len()
    }

    pub fn dim(&self) -> usize {
        self.keys.len()
    }

    /// Standardize new raw rows with the stored moments.
    pub fn transform(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        rows.iter()
            .map(|row| {
                self.check_dim(row)?;
                Ok(row
                    .iter()
                    .zip(self.means.iter().zip(&self.stds))
                    .map(|(x, (m, s))| (x - m) / s)
                    .collect())
            })
            .collect()
    }

    /// Map standardized rows back to the original units.
    pub fn inverse_transform(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        rows.iter()
            .map(|row| {
                self.check_dim(row)?;
                Ok(row
                    .iter()
                    .zip(self.means.iter().zip(&self.stds))
                    .map(|(z, (m, s))| z * s + m)
                    .collect())
            })
            .collect()
    }

    fn check_dim(&self, row: &[f64]) -> Result<()> {
        if row.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: row.len(),
            });
        }
        Ok(())
    }
}

/// `(x - mean) / sample_std` per column.
pub fn zscore(table: &HerdTable, keys: &[MeasurementKey]) -> Result<StandardizedMatrix> {
    let mut means = Vec::with_capacity(keys.len());
    let mut stds = Vec::with_capacity(keys.len());
    for key in keys {
        let col = table.column(key)?;
        if col.len() < 2 || is_constant(col) {
            return Err(Error::ZeroVariance(key.to_string()));
        }
        means.push(mean(col));
        stds.push(sample_std(col));
    }
    let z = table
        .rows(keys)?
        .into_iter()
        .map(|row| {
            row.iter()
                .zip(means.iter().zip(&stds))
                .map(|(x, (m, s))| (x - m) / s)
                .collect()
        })
        .collect();
    Ok(StandardizedMatrix {
        keys: keys.to_vec(),
        animal_ids: table.animal_ids().to_vec(),
        z,
        means,
        stds,
    })
}

/// Pearson correlation between cluster labels (as numbers) and a column.
pub fn label_correlation(labels: &[usize], table: &HerdTable, key: &MeasurementKey) -> Result<f64> {
    if labels.contains(&0) {
        return Err(Error::InvalidLabel);
    }
    let values = table.column(key)?;
    if labels.len() != values.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: values.len(),
        });
    }
    let numeric: Vec<f64> = labels.iter().map(|&l| l as f64).collect();
    if is_constant(&numeric) {
        return Err(Error::ZeroVariance("labels".into()));
    }
    pearson_r(&numeric, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(s: &str) -> MeasurementKey {
        MeasurementKey::new(s).unwrap()
    }

    fn table(cols: &[(&str, Vec<f64>)]) -> HerdTable {
        let n = cols[0].1.len();
        HerdTable::from_columns(
            (1..=n).map(|i| i.to_string()).collect(),
            cols.iter().map(|(k, v)| (key(k), v.clone())).collect(),
        )
        .unwrap()
    }

    #[test]
    fn quantiles_interpolate() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&xs, 0.0), 1.0);
        assert_eq!(quantile_sorted(&xs, 0.25), 1.75);
        assert_eq!(quantile_sorted(&xs, 0.5), 2.5);
        assert_eq!(quantile_sorted(&xs, 1.0), 4.0);
        assert_eq!(quantile_sorted(&[7.0], 0.75), 7.0);
    }

    #[test]
    fn pearson_basic_values() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson_r(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson_r(&x, &neg).unwrap() + 1.0).abs() < 1e-15);
        // Centered: (-1.5,-.5,.5,1.5) and (-.5,-1.5,1.5,.5); sxy = 3, sxx = syy = 5.
        assert!((pearson_r(&x, &[2.0, 1.0, 4.0, 3.0]).unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn pearson_errors() {
        assert!(matches!(
            pearson_r(&[1.0, 2.0], &[1.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            pearson_r(&[1.0], &[1.0]),
            Err(Error::TooFewObservations { .. })
        ));
        assert!(matches!(
            pearson_r(&[1.0, 2.0], &[3.0, 3.0]),
            Err(Error::ZeroVariance(_))
        ));
    }

    #[test]
    fn matrix_names_offending_column() {
        let t = table(&[("A", vec![1.0, 2.0, 3.0]), ("B", vec![2.0, 2.0, 2.0])]);
        assert!(matches!(
            correlation_matrix(&t, &[key("A"), key("B")]),
            Err(Error::ZeroVariance(ref k)) if k == "B"
        ));
        let t = table(&[("A", vec![1.0, 2.0, 3.0]), ("B", vec![1.0, 2.0, 3.0])]);
        let m = correlation_matrix(&t, &[key("A"), key("B")]).unwrap();
        assert!((m.get(&key("A"), &key("B")).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn matrix_csv_layout() {
        let m = CorrelationMatrix::from_parts(
            vec![key("A"), key("B")],
            vec![vec![1.0, -0.25], vec![-0.25, 1.0]],
        )
        .unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "key,A,B\nA,1,-0.25\nB,-0.25,1\n"
        );
    }

    fn published_bw_matrix() -> CorrelationMatrix {
        // Only the BW and SS rows matter; other off-diagonals are zero.
        let keys: Vec<_> = ["BW", "CH", "WH", "CW", "DL", "DA", "FW", "SS"]
            .iter()
            .map(|k| key(k))
            .collect();
        let bw = [1.0, 0.40, 0.30, 0.85, 0.72, 0.90, 0.95, 0.35];
        let ss = [0.35, -0.31, 0.10, 0.39, 0.20, 0.25, 0.05, 1.0];
        let d = keys.len();
        let mut r = vec![vec![0.0; d]; d];
        for i in 0..d {
            r[i][i] = 1.0;
            r[0][i] = bw[i];
            r[i][0] = bw[i];
            r[7][i] = ss[i];
            r[i][7] = ss[i];
        }
        CorrelationMatrix::from_parts(keys, r).unwrap()
    }

    #[test]
    fn selects_dorsum_and_structure_sets() {
        let m = published_bw_matrix();
        let ex = |v: &[&str]| v.iter().map(|k| key(k)).collect::<Vec<_>>();
        let productivity = ["FW", "DMI", "RFI", "ADG", "SC", "LEA", "S1", "S2", "S3"];
        let mut dorsum_ex = ex(&productivity);
        dorsum_ex.push(key("SS"));
        let s = select_features(&m, &key("BW"), 3, &dorsum_ex).unwrap();
        assert_eq!(s.selected, ex(&["DA", "CW", "DL"]));
        assert_eq!(s.r_values, [0.90, 0.85, 0.72]);

        let s = select_features(&m, &key("SS"), 3, &ex(&productivity)).unwrap();
        assert_eq!(s.selected, ex(&["CW", "BW", "CH"]));
        assert_eq!(s.r_values, [0.39, 0.35, -0.31]);

        let all = select_features(&m, &key("BW"), 7, &[]).unwrap();
        assert_eq!(all.selected[0], key("FW"));
        assert!(!all.selected.contains(&key("BW")));
        assert!(all.r_values.windows(2).all(|w| w[0].abs() >= w[1].abs()));
        let with = select_features_with(&m, &key("BW"), 1, &[], true).unwrap();
        assert_eq!(with.selected, [key("BW")]);

        assert!(matches!(
            select_features(&m, &key("BW"), 8, &[]),
            Err(Error::NotEnoughCandidates {
                requested: 8,
                available: 7
            })
        ));
    }

    #[test]
    fn selection_ties_keep_key_order() {
        let keys: Vec<_> = ["T", "B", "A"].iter().map(|k| key(k)).collect();
        let r = vec![
            vec![1.0, -0.5, 0.5],
            vec![-0.5, 1.0, 0.0],
            vec![0.5, 0.0, 1.0],
        ];
        let m = CorrelationMatrix::from_parts(keys, r).unwrap();
        let s = select_features(&m, &key("T"), 2, &[]).unwrap();
        assert_eq!(s.selected, [key("B"), key("A")]);
    }

    #[test]
    fn zscore_small_column() {
        let t = table(&[("A", vec![1.0, 2.0, 3.0])]);
        let z = zscore(&t, &[key("A")]).unwrap();
        assert_eq!(z.z, [[-1.0], [0.0], [1.0]]);
        let t = table(&[("A", vec![4.0, 4.0])]);
        assert!(matches!(
            zscore(&t, &[key("A")]),
            Err(Error::ZeroVariance(_))
        ));
    }

    #[test]
    fn label_correlation_checks() {
        let t = table(&[("A", vec![1.0, 2.0, 3.0, 4.0])]);
        assert!(matches!(
            label_correlation(&[1, 1, 1, 1], &t, &key("A")),
            Err(Error::ZeroVariance(_))
        ));
        assert!(matches!(
            label_correlation(&[0, 1, 1, 1], &t, &key("A")),
            Err(Error::InvalidLabel)
        ));
        let r = label_correlation(&[1, 1, 2, 2], &t, &key("A")).unwrap();
        assert!((r - 0.894_427_190_999_915_9).abs() < 1e-12);
    }
}
