//! Structural SVG charts built from a finished [`RunReport`].
//!
//! Every chart is plain SVG markup with class attributes on the meaningful
//! elements (`distortion`, `knee`, `point`, `centroid`, `legend`, `box`), so
//! tests can count elements instead of comparing images.

use std::fmt::Write as _;
use std::path::Path;

use phenocluster::clustering::ElbowResult;
use phenocluster::stats::quantile_sorted;

use crate::error::Result;
use crate::report::{write_text, Evaluation, RunReport};

pub const ELBOW_FILE: &str = "elbow.svg";
pub const SCATTER_FILE: &str = "scatter.svg";
pub const BOXPLOT_FILE: &str = "boxplot.svg";

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

/// Colour of cluster `c` (from 1).
pub fn cluster_color(c: usize) -> &'static str {
    PALETTE[(c - 1) % PALETTE.len()]
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Linear map from a data interval onto a pixel interval.
#[derive(Clone, Copy)]
struct Scale {
    d0: f64,
    d1: f64,
    p0: f64,
    p1: f64,
}

impl Scale {
    fn new(lo: f64, hi: f64, p0: f64, p1: f64) -> Self {
        let (lo, hi) = if hi - lo > 0.0 {
            let pad = 0.05 * (hi - lo);
            (lo - pad, hi + pad)
        } else {
            (lo - 1.0, hi + 1.0)
        };
        Scale {
            d0: lo,
            d1: hi,
            p0,
            p1,
        }
    }

    fn map(&self, v: f64) -> f64 {
        self.p0 + (v - self.d0) / (self.d1 - self.d0) * (self.p1 - self.p0)
    }
}

fn extent(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    values
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        })
}

fn open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text class="title" x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    s
}

fn axes(s: &mut String, xlabel: &str, ylabel: &str) {
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(
        s,
        r#"<g class="axes" stroke="black"><line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/><line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/></g>"#
    );
    let _ = writeln!(
        s,
        r#"<text class="xlabel" x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0,
        escape(xlabel)
    );
    let _ = writeln!(
        s,
        r#"<text class="ylabel" x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(ylabel)
    );
}

fn legend(s: &mut String, k: usize) {
    let _ = writeln!(s, r#"<g class="legend">"#);
    for c in 1..=k {
        let y = MARGIN + 4.0 + 18.0 * (c - 1) as f64;
        let x = WIDTH - MARGIN - 70.0;
        let _ = writeln!(
            s,
            r#"<g class="legend-entry" data-cluster="{c}"><rect x="{x}" y="{}" width="12" height="12" fill="{}"/><text x="{}" y="{}">cluster {c}</text></g>"#,
            y - 10.0,
            cluster_color(c),
            x + 18.0,
            y
        );
    }
    let _ = writeln!(s, "</g>");
}

/// Distortion against k, with the knee circled when there is one.
pub fn elbow_svg(elbow: &ElbowResult) -> String {
    let mut s = open("Elbow method");
    axes(&mut s, "k", "distortion");
    let (klo, khi) = extent(elbow.k_values.iter().map(|&k| k as f64));
    let (dlo, dhi) = extent(elbow.distortions.iter().copied());
    let xs = Scale::new(klo, khi, MARGIN, WIDTH - MARGIN);
    let ys = Scale::new(dlo, dhi, HEIGHT - MARGIN, MARGIN);

    let pts: Vec<String> = elbow
        .k_values
        .iter()
        .zip(&elbow.distortions)
        .map(|(&k, &d)| format!("{:.2},{:.2}", xs.map(k as f64), ys.map(d)))
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline class="distortion" fill="none" stroke="#1f77b4" stroke-width="2" points="{}"/>"##,
        pts.join(" ")
    );
    for (&k, &d) in elbow.k_values.iter().zip(&elbow.distortions) {
        let (x, y) = (xs.map(k as f64), ys.map(d));
        let _ = writeln!(
            s,
            r##"<circle class="vertex" cx="{x:.2}" cy="{y:.2}" r="3" fill="#1f77b4"/><text class="tick" x="{x:.2}" y="{:.2}" text-anchor="middle">{k}</text>"##,
            HEIGHT - MARGIN + 16.0
        );
    }
    if let Some(knee) = elbow.knee {
        let i = elbow
            .k_values
            .iter()
            .position(|&k| k == knee)
            .expect("knee within k values");
        let (x, y) = (xs.map(knee as f64), ys.map(elbow.distortions[i]));
        let _ = writeln!(
            s,
            r##"<g class="knee" data-k="{knee}"><circle cx="{x:.2}" cy="{y:.2}" r="8" fill="none" stroke="#d62728" stroke-width="2"/><text x="{:.2}" y="{:.2}" fill="#d62728">knee k = {knee}</text></g>"##,
            x + 10.0,
            y - 10.0
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Standardized points on the first two selected features, coloured by
/// cluster, with each centroid drawn as an X.
pub fn scatter_svg(report: &RunReport) -> String {
    let keys = &report.model.keys;
    let title = format!(
        "Clusters on {}",
        keys.iter()
            .map(|k| k.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    );
    let mut s = open(&title);
    let xlabel = format!("{} (z)", keys[0]);
    let ylabel = keys.get(1).map_or("0".to_string(), |k| format!("{k} (z)"));
    axes(&mut s, &xlabel, &ylabel);

    let coord = |p: &[f64]| (p[0], p.get(1).copied().unwrap_or(0.0));
    let all = report
        .points
        .iter()
        .map(|p| coord(p))
        .chain(report.model.centroids.iter().map(|c| coord(c)));
    let (xy, yx): (Vec<f64>, Vec<f64>) = all.unzip();
    let (xlo, xhi) = extent(xy);
    let (ylo, yhi) = extent(yx);
    let xs = Scale::new(xlo, xhi, MARGIN, WIDTH - MARGIN);
    let ys = Scale::new(ylo, yhi, HEIGHT - MARGIN, MARGIN);

    let _ = writeln!(s, r#"<g class="points">"#);
    for (p, l) in report.points.iter().zip(&report.labels) {
        let (x, y) = coord(p);
        let _ = writeln!(
            s,
            r#"<circle class="point" data-cluster="{}" cx="{:.2}" cy="{:.2}" r="4" fill="{}" fill-opacity="0.8"><title>{}</title></circle>"#,
            l.cluster,
            xs.map(x),
            ys.map(y),
            cluster_color(l.cluster),
            escape(&l.animal)
        );
    }
    let _ = writeln!(s, "</g>");
    for (i, c) in report.model.centroids.iter().enumerate() {
        let (x, y) = coord(c);
        let (x, y) = (xs.map(x), ys.map(y));
        let d = 7.0;
        let _ = writeln!(
            s,
            r#"<g class="centroid" data-cluster="{}" stroke="black" stroke-width="3"><line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/><line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/></g>"#,
            i + 1,
            x - d,
            y - d,
            x + d,
            y + d,
            x - d,
            y + d,
            x + d,
            y - d
        );
    }
    legend(&mut s, report.model.k);
    s.push_str("</svg>\n");
    s
}

/// Five-number summary with whiskers at the most extreme values within
/// 1.5 IQR of the quartiles.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxStats {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_lo: f64,
    pub whisker_hi: f64,
    pub outliers: Vec<f64>,
}

pub fn box_stats(values: &[f64]) -> BoxStats {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let (q1, median, q3) = (
        quantile_sorted(&v, 0.25),
        quantile_sorted(&v, 0.5),
        quantile_sorted(&v, 0.75),
    );
    let iqr = q3 - q1;
    let (fence_lo, fence_hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside: Vec<f64> = v
        .iter()
        .copied()
        .filter(|x| (fence_lo..=fence_hi).contains(x))
        .collect();
    BoxStats {
        q1,
        median,
        q3,
        whisker_lo: inside.first().copied().unwrap_or(q1),
        whisker_hi: inside.last().copied().unwrap_or(q3),
        outliers: v
            .into_iter()
            .filter(|x| !(fence_lo..=fence_hi).contains(x))
            .collect(),
    }
}

/// One box per cluster, in cluster order, for a response variable.
pub fn boxplot_svg(eval: &Evaluation, labels: &[usize], k: usize) -> String {
    let mut s = open(&format!("{} by cluster", eval.response));
    axes(&mut s, "cluster", eval.response.as_str());
    let (lo, hi) = extent(eval.values.iter().copied());
    let ys = Scale::new(lo, hi, HEIGHT - MARGIN, MARGIN);
    let slot = (WIDTH - 2.0 * MARGIN) / k as f64;
    let half = (slot * 0.3).min(30.0);

    for c in 1..=k {
        let members: Vec<f64> = eval
            .values
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l == c)
            .map(|(&v, _)| v)
            .collect();
        let cx = MARGIN + slot * (c as f64 - 0.5);
        let color = cluster_color(c);
        let _ = writeln!(
            s,
            r#"<g class="box" data-cluster="{c}" data-n="{}">"#,
            members.len()
        );
        if !members.is_empty() {
            let b = box_stats(&members);
            let (y1, ym, y3) = (ys.map(b.q1), ys.map(b.median), ys.map(b.q3));
            let (wl, wh) = (ys.map(b.whisker_lo), ys.map(b.whisker_hi));
            let _ = writeln!(
                s,
                r#"<line class="whisker" x1="{cx:.2}" y1="{wl:.2}" x2="{cx:.2}" y2="{y1:.2}" stroke="black"/><line class="whisker" x1="{cx:.2}" y1="{y3:.2}" x2="{cx:.2}" y2="{wh:.2}" stroke="black"/>"#
            );
            for w in [wl, wh] {
                let _ = writeln!(
                    s,
                    r#"<line class="cap" x1="{:.2}" y1="{w:.2}" x2="{:.2}" y2="{w:.2}" stroke="black"/>"#,
                    cx - half / 2.0,
                    cx + half / 2.0
                );
            }
            let _ = writeln!(
                s,
                r#"<rect class="iqr" x="{:.2}" y="{y3:.2}" width="{:.2}" height="{:.2}" fill="{color}" fill-opacity="0.6" stroke="black"/>"#,
                cx - half,
                2.0 * half,
                (y1 - y3).max(0.5)
            );
            let _ = writeln!(
                s,
                r#"<line class="median" x1="{:.2}" y1="{ym:.2}" x2="{:.2}" y2="{ym:.2}" stroke="black" stroke-width="2"/>"#,
                cx - half,
                cx + half
            );
            for o in b.outliers {
                let _ = writeln!(
                    s,
                    r#"<circle class="outlier" cx="{cx:.2}" cy="{:.2}" r="3" fill="none" stroke="black"/>"#,
                    ys.map(o)
                );
            }
        }
        let _ = writeln!(
            s,
            r#"<text class="tick" x="{cx:.2}" y="{:.2}" text-anchor="middle">{c}</text>"#,
            HEIGHT - MARGIN + 16.0
        );
        let _ = writeln!(s, "</g>");
    }
    legend(&mut s, k);
    s.push_str("</svg>\n");
    s
}

/// Write the charts named in `report.artifacts` into `dir`.
pub fn write_charts(report: &RunReport, dir: &Path) -> Result<()> {
    write_text(&dir.join(ELBOW_FILE), &elbow_svg(&report.elbow))?;
    write_text(&dir.join(SCATTER_FILE), &scatter_svg(report))?;
    if let Some(eval) = report.evaluations.first() {
        write_text(
            &dir.join(BOXPLOT_FILE),
            &boxplot_svg(eval, &report.cluster_labels(), report.chosen_k),
        )?;
    }
    Ok(())
}
