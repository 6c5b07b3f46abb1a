use std::fmt;

use serde::{Deserialize, Serialize};

use super::distribution::f_sf;
use crate::error::{Error, Result};
use crate::stats::mean;

/// One-way analysis of variance of a response over groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    /// Distinct labels in ascending order.
    pub groups: Vec<usize>,
    pub group_sizes: Vec<usize>,
    pub group_means: Vec<f64>,
    pub grand_mean: f64,
    pub ss_between: f64,
    pub ss_within: f64,
    pub ss_total: f64,
    pub df_between: u64,
    pub df_within: u64,
    /// `None` when the result is degenerate.
    pub f_stat: Option<f64>,
    pub p_value: Option<f64>,
    /// Within-group variance is zero, so F is undefined.
    pub degenerate: bool,
}

impl AnovaResult {
    pub fn ms_within(&self) -> f64 {
        self.ss_within / self.df_within as f64
    }

    /// Significance at `alpha`; `None` for a degenerate result.
    pub fn is_significant(&self, alpha: f64) -> Option<bool> {
        self.p_value.map(|p| p < alpha)
    }
}

impl fmt::Display for AnovaResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<8} {:>5} {:>14} {:>14} {:>10} {:>10}",
            "source", "df", "SS", "MS", "F", "p"
        )?;
        let fmt_opt =
            |v: Option<f64>, prec: usize| v.map_or("NA".to_string(), |x| format!("{x:.prec$}"));
        writeln!(
            f,
            "{:<8} {:>5} {:>14.6} {:>14.6} {:>10} {:>10}",
            "between",
            self.df_between,
            self.ss_between,
            self.ss_between / self.df_between as f64,
            fmt_opt(self.f_stat, 4),
            fmt_opt(self.p_value, 6),
        )?;
        write!(
            f,
            "{:<8} {:>5} {:>14.6} {:>14.6}",
            "within",
            self.df_within,
            self.ss_within,
            self.ms_within()
        )
    }
}

/// Values split by label, labels ascending.
pub(crate) struct Groups {
    pub labels: Vec<usize>,
    pub members: Vec<Vec<f64>>,
}

pub(crate) fn group_values(values: &[f64], labels: &[usize]) -> Result<Groups> {
    if values.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: values.len(),
            right: labels.len(),
        });
    }
    if labels.contains(&0) {
        return Err(Error::InvalidLabel);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    let mut distinct: Vec<usize> = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let mut members = vec![Vec::new(); distinct.len()];
    for (&v, l) in values.iter().zip(labels) {
        let g = distinct.binary_search(l).expect("label collected above");
        members[g].push(v);
    }
    Ok(Groups {
        labels: distinct,
        members,
    })
}

/// One-way ANOVA: `F = MS_between / MS_within`, `p = P(F(k-1, n-k) > F)`.
///
/// Needs at least two groups and more observations than groups. Zero
/// within-group variance yields a result flagged `degenerate` instead of an
/// infinite F.
pub fn one_way_anova(values: &[f64], labels: &[usize]) -> Result<AnovaResult> {
    let groups = group_values(values, labels)?;
    let k = groups.labels.len();
    let n = values.len();
    if k < 2 {
        return Err(Error::TooFewGroups(k));
    }
    if n <= k {
        return Err(Error::TooFewObservations {
            needed: k + 1,
            got: n,
        });
    }
    let grand_mean = mean(values);
    let group_means: Vec<f64> = groups.members.iter().map(|g| mean(g)).collect();
    let ss_between: f64 = groups
        .members
        .iter()
        .zip(&group_means)
        .map(|(g, m)| g.len() as f64 * (m - grand_mean) * (m - grand_mean))
        .sum();
    let ss_within: f64 = groups
        .members
        .iter()
        .zip(&group_means)
        .map(|(g, m)| g.iter().map(|v| (v - m) * (v - m)).sum::<f64>())
        .sum();
    let ss_total: f64 = values
        .iter()
        .map(|v| (v - grand_mean) * (v - grand_mean))
        .sum();
    let (df_between, df_within) = ((k - 1) as u64, (n - k) as u64);

    let degenerate = ss_total == 0.0 || ss_within <= 1e-13 * ss_total;
    let (f_stat, p_value) = if degenerate {
        (None, None)
    } else {
        let f = (ss_between / df_between as f64) / (ss_within / df_within as f64);
        (Some(f), Some(f_sf(f, df_between, df_within)?))
    };
    Ok(AnovaResult {
        groups: groups.labels,
        group_sizes: groups.members.iter().map(Vec::len).collect(),
        group_means,
        grand_mean,
        ss_between,
        ss_within,
        ss_total,
        df_between,
        df_within,
        f_stat,
        p_value,
        degenerate,
    })
}
