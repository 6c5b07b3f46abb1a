use std::fmt;

use serde::{Deserialize, Serialize};

use super::anova::one_way_anova;
use super::distribution::studentized_range_sf;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TukeyPair {
    pub group_a: usize,
    pub group_b: usize,
    /// `mean_b - mean_a`.
    pub mean_diff: f64,
    pub q_stat: f64,
    pub p_adj: f64,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TukeyResult {
    pub alpha: f64,
    pub df_within: u64,
    pub ms_within: f64,
    pub pairs: Vec<TukeyPair>,
}

impl TukeyResult {
    pub fn pair(&self, a: usize, b: usize) -> Option<&TukeyPair> {
        self.pairs
            .iter()
            .find(|p| (p.group_a, p.group_b) == (a.min(b), a.max(b)))
    }
}

impl fmt::Display for TukeyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:>6} {:>6} {:>12} {:>10} {:>10} {:>7}",
            "group1", "group2", "meandiff", "q", "p-adj", "reject"
        )?;
        for p in &self.pairs {
            write!(
                f,
                "\n{:>6} {:>6} {:>12.4} {:>10.4} {:>10.6} {:>7}",
                p.group_a, p.group_b, p.mean_diff, p.q_stat, p.p_adj, p.reject
            )?;
        }
        Ok(())
    }
}

/// Tukey's honestly significant difference test, with the Tukey–Kramer
/// standard error for unequal group sizes:
/// `q = |mean_a - mean_b| / sqrt(MS_within / 2 (1/n_a + 1/n_b))`,
/// `p_adj = P(Q(k, n - k) > q)`.
///
/// Fails with [`Error::ZeroVariance`] when the within-group variance is zero.
pub fn tukey_hsd(values: &[f64], labels: &[usize], alpha: f64) -> Result<TukeyResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain("alpha must lie in (0, 1)"));
    }
    let anova = one_way_anova(values, labels)?;
    if anova.degenerate {
        return Err(Error::ZeroVariance("within-group".into()));
    }
    let k = anova.groups.len() as u32;
    let msw = anova.ms_within();
    let mut pairs = Vec::new();
    for a in 0..anova.groups.len() {
        for b in (a + 1)..anova.groups.len() {
            let diff = anova.group_means[b] - anova.group_means[a];
            let se = (msw / 2.0
                * (1.0 / anova.group_sizes[a] as f64 + 1.0 / anova.group_sizes[b] as f64))
                .sqrt();
            let q = diff.abs() / se;
            let p_adj = studentized_range_sf(q, k, anova.df_within)?;
            pairs.push(TukeyPair {
                group_a: anova.groups[a],
                group_b: anova.groups[b],
                mean_diff: diff,
                q_stat: q,
                p_adj,
                reject: p_adj < alpha,
            });
        }
    }
    Ok(TukeyResult {
        alpha,
        df_within: anova.df_within,
        ms_within: msw,
        pairs,
    })
}
