//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs without the libtest harness so the lines always show.

#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::too_many_arguments,
    clippy::type_complexity
)]

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use phenocluster::clustering::{
    detect_knee, elbow_scan, kmeans_fit, order_clusters, KMeansConfig, KMeansModel,
};
use phenocluster::dataset::{aggregate_scores, describe_all, load_table};
use phenocluster::inference::{
    f_cdf, one_way_anova, reg_inc_beta, studentized_range_quantile, tukey_hsd,
};
use phenocluster_cli::{run_pipeline, PipelineConfig, Preset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Outcome = Result<String, String>;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn within_time(start: Instant, limit: Duration, what: String) -> Outcome {
    let t = start.elapsed();
    ensure!(
        t < limit,
        "{what}, but took {:.2?} (limit {:.0?})",
        t,
        limit
    );
    Ok(format!("{what} in {t:.2?}"))
}

// Printed per-animal mean and std of the three grades.
const TABLE3: [(f64, f64); 23] = [
    (2.3, 0.58),
    (1.3, 0.58),
    (4.7, 0.58),
    (5.3, 0.58),
    (4.3, 1.15),
    (3.3, 0.58),
    (4.7, 0.58),
    (3.3, 0.58),
    (4.3, 0.58),
    (3.0, 1.00),
    (2.3, 0.58),
    (2.3, 0.58),
    (1.3, 0.58),
    (3.0, 0.00),
    (2.7, 0.58),
    (1.3, 0.58),
    (1.3, 0.58),
    (2.0, 1.00),
    (2.0, 1.00),
    (2.7, 0.58),
    (2.7, 0.58),
    (2.7, 0.58),
    (3.7, 0.58),
];

// Printed descriptive rows: mean, std, min, q25, q50, q75, max.
const TABLE2: [(&str, [f64; 7]); 4] = [
    ("S1", [3.04, 1.22, 2.00, 2.00, 3.00, 4.00, 5.00]),
    ("S2", [3.09, 1.35, 1.00, 2.50, 3.00, 4.00, 6.00]),
    ("S3", [2.57, 1.24, 1.00, 1.50, 3.00, 3.00, 5.00]),
    ("SS", [2.90, 1.17, 1.33, 2.17, 2.67, 3.50, 5.33]),
];

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn score_tables() -> Outcome {
    let start = Instant::now();
    let table = load_table(data("scores.csv"), None).map_err(|e| e.to_string())?;
    let scores = aggregate_scores(&table).map_err(|e| e.to_string())?;
    ensure!(
        scores.len() == 23,
        "expected 23 animals, got {}",
        scores.len()
    );
    for (s, &(m, sd)) in scores.iter().zip(&TABLE3) {
        ensure!(
            (s.mean - m).abs() <= 0.05,
            "animal {}: mean {} vs {m}",
            s.animal_id,
            s.mean
        );
        ensure!(
            (s.std - sd).abs() <= 0.005,
            "animal {}: std {} vs {sd}",
            s.animal_id,
            s.std
        );
    }
    let stats = describe_all(&table);
    for (key, want) in TABLE2 {
        let d = stats
            .iter()
            .find(|d| d.key.as_str() == key)
            .ok_or(format!("no {key} row"))?;
        let got = [d.mean, d.std, d.min, d.q25, d.q50, d.q75, d.max];
        for (g, w) in got.iter().zip(want) {
            ensure!(round2(*g) == w, "{key}: {g} does not print as {w:.2}");
        }
    }
    within_time(
        start,
        Duration::from_secs(1),
        "23 per-animal summaries and 4 descriptive rows match".into(),
    )
}

fn uniform_points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
        .collect()
}

/// Global minimum inertia over every assignment of n points to k non-empty
/// clusters.
fn exhaustive_optimum(points: &[Vec<f64>], k: usize) -> f64 {
    let (n, d) = (points.len(), points[0].len());
    let mut labels = vec![0usize; n];
    let mut best = f64::INFINITY;
    loop {
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for j in 0..d {
                sums[l][j] += p[j];
            }
        }
        if counts.iter().all(|&c| c > 0) {
            let mut cost = 0.0;
            for (p, &l) in points.iter().zip(&labels) {
                for j in 0..d {
                    let diff = p[j] - sums[l][j] / counts[l] as f64;
                    cost += diff * diff;
                }
            }
            best = best.min(cost);
        }
        // Next assignment in base-k counting order.
        let mut i = 0;
        while i < n {
            labels[i] += 1;
            if labels[i] < k {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
        if i == n {
            return best;
        }
    }
}

fn monotone(trace: &[f64]) -> bool {
    trace
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-12)
}

fn kmeans_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let mut matches = 0;
    for inst in 0..100u64 {
        let n = rng.random_range(4..=10);
        let k = rng.random_range(1..=3usize).min(n);
        let d = rng.random_range(1..=3);
        let points = uniform_points(&mut rng, n, d);
        let model = kmeans_fit(
            &points,
            &KMeansConfig::new(k).with_seed(inst).with_restarts(50),
        )
        .map_err(|e| e.to_string())?;
        let opt = exhaustive_optimum(&points, k);
        if (model.inertia - opt).abs() <= 1e-9 * opt.max(f64::MIN_POSITIVE) {
            matches += 1;
        }
        ensure!(
            monotone(&model.inertia_trace),
            "instance {inst}: inertia trace increases"
        );
        for s in 0..5 {
            let single = kmeans_fit(
                &points,
                &KMeansConfig::new(k).with_seed(1000 + s).with_restarts(1),
            )
            .map_err(|e| e.to_string())?;
            ensure!(
                monotone(&single.inertia_trace),
                "instance {inst}, seed {s}: trace increases"
            );
        }
    }
    ensure!(
        matches >= 95,
        "only {matches}/100 instances reached the global optimum"
    );
    within_time(
        start,
        Duration::from_secs(30),
        format!("{matches}/100 instances at the exhaustive optimum, all traces monotone"),
    )
}

fn same_partition(a: &KMeansModel, b: &KMeansModel) -> bool {
    let k = a.k();
    let mut map = vec![0usize; k + 1];
    for (&la, &lb) in a.labels.iter().zip(&b.labels) {
        if map[la] == 0 {
            map[la] = lb;
        } else if map[la] != lb {
            return false;
        }
    }
    let mut seen: Vec<usize> = map[1..].iter().copied().filter(|&m| m != 0).collect();
    let used = seen.len();
    seen.sort_unstable();
    seen.dedup();
    seen.len() == used
}

fn ordering_contract() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..1000u64 {
        let n = rng.random_range(6..=30);
        let k = rng.random_range(1..=5usize).min(n);
        let d = rng.random_range(1..=4);
        let points = uniform_points(&mut rng, n, d);
        let model = kmeans_fit(&points, &KMeansConfig::new(k).with_seed(i).with_restarts(1))
            .map_err(|e| e.to_string())?;
        let ordered = order_clusters(&model);
        ensure!(
            ordered.centroids.windows(2).all(|w| w[0][0] <= w[1][0]),
            "model {i}: first coordinates not ascending"
        );
        ensure!(
            same_partition(&model, &ordered),
            "model {i}: partition changed"
        );
        ensure!(
            ordered.inertia == model.inertia,
            "model {i}: inertia changed"
        );
        ensure!(
            order_clusters(&ordered) == ordered,
            "model {i}: ordering not idempotent"
        );
    }
    let mut ks = Vec::new();
    for preset in [Preset::Dorsum, Preset::Structure] {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let cfg = PipelineConfig::from_preset(preset, data("synthetic_herd.csv"), dir.path());
        let report = run_pipeline(&cfg).map_err(|e| e.to_string())?;
        let firsts: Vec<f64> = report.model.centroids.iter().map(|c| c[0]).collect();
        ensure!(
            firsts.windows(2).all(|w| w[0] < w[1]),
            "{preset:?} centroids not strictly ascending: {firsts:?}"
        );
        ks.push(report.chosen_k);
    }
    Ok(format!(
        "1000 random models ordered, partition and inertia preserved; presets ascend with k = {} and {}",
        ks[0], ks[1]
    ))
}

/// Adaptive Simpson quadrature.
fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, eps: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        eps: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * eps {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, eps, 48)
}

/// F CDF by integrating the density after substituting t = u^2, which
/// removes the t^(-1/2) singularity at zero for d1 = 1.
fn f_cdf_oracle(x: f64, d1: u64, d2: u64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    let (a, b) = (d1 as f64 / 2.0, d2 as f64 / 2.0);
    let ln_beta = ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
    let r = d1 as f64 / d2 as f64;
    let ln_c = a * r.ln() - ln_beta;
    let g = |u: f64| {
        if u == 0.0 {
            return if d1 == 1 { 2.0 * ln_c.exp() } else { 0.0 };
        }
        let t = u * u;
        // 2u * density(t), with u^(2a-2) * u = u^(2a-1)
        2.0 * (ln_c + (2.0 * a - 1.0) * u.ln() - (a + b) * (r * t).ln_1p()).exp()
    };
    simpson(&g, 0.0, x.sqrt(), 1e-13)
}

/// Studentized range quantile by a trapezoid inner integral, Simpson outer
/// integral in s and bisection; shares no code with the library.
fn studentized_range_oracle(p: f64, k: i32, df: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    use statrs::function::gamma::ln_gamma;
    let normal = Normal::new(0.0, 1.0).unwrap();
    let std_pdf = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let h = 0.02;
    let zs: Vec<f64> = (0..=800).map(|i| -8.0 + h * i as f64).collect();
    let range_cdf = |w: f64| -> f64 {
        let vals: Vec<f64> = zs
            .iter()
            .map(|&z| std_pdf(z) * (normal.cdf(z) - normal.cdf(z - w)).powi(k - 1))
            .collect();
        let trap: f64 = vals.windows(2).map(|v| 0.5 * h * (v[0] + v[1])).sum();
        k as f64 * trap
    };
    let ln_norm = (2.0f64).ln() + 0.5 * df * (0.5 * df).ln() - ln_gamma(0.5 * df);
    let cdf = |q: f64| -> f64 {
        let m = 300;
        let (lo, hi) = (1e-6, 3.0);
        let hs = (hi - lo) / m as f64;
        (0..=m)
            .map(|i| {
                let s = lo + hs * i as f64;
                let w = if i == 0 || i == m {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                let dens = (ln_norm + (df - 1.0) * s.ln() - 0.5 * df * s * s).exp();
                w * dens * range_cdf(q * s)
            })
            .sum::<f64>()
            * hs
            / 3.0
    };
    let (mut lo, mut hi) = (0.0, 10.0);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn special_functions() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for x in [0.05, 0.3, 0.8, 1.0, 2.5, 6.0, 15.0, 40.0] {
        for d1 in [1, 2, 3, 5, 12] {
            for d2 in [1, 2, 4, 10, 30] {
                let got = f_cdf(x, d1, d2).map_err(|e| e.to_string())?;
                let want = f_cdf_oracle(x, d1, d2);
                let err = (got - want).abs();
                ensure!(err <= 1e-8, "f_cdf({x}, {d1}, {d2}) = {got}, oracle {want}");
                worst = worst.max(err);
                count += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..1000 {
        let x: f64 = rng.random();
        let a = rng.random_range(0.1..40.0);
        let b = rng.random_range(0.1..40.0);
        let lhs = reg_inc_beta(x, a, b).map_err(|e| e.to_string())?;
        let rhs = reg_inc_beta(1.0 - x, b, a).map_err(|e| e.to_string())?;
        ensure!(
            (lhs + rhs - 1.0).abs() <= 1e-12,
            "I_x(a,b) + I_(1-x)(b,a) - 1 = {} at x={x} a={a} b={b}",
            lhs + rhs - 1.0
        );
    }
    let q = studentized_range_quantile(0.95, 3, 20).map_err(|e| e.to_string())?;
    let oracle = studentized_range_oracle(0.95, 3, 20.0);
    ensure!((oracle - 3.578).abs() < 2e-3, "oracle itself off: {oracle}");
    ensure!(
        (q - oracle).abs() <= 5e-3,
        "quantile {q} vs oracle {oracle}"
    );
    within_time(
        start,
        Duration::from_secs(60),
        format!("{count} F CDF points (max err {worst:.1e}), 1000 reflections, q(0.95; 3, 20) = {q:.4} vs {oracle:.4}"),
    )
}

fn random_groups(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<usize>) {
    let k = rng.random_range(2..=6);
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let scale = 10f64.powf(rng.random_range(-2.0..3.0));
    for g in 0..k {
        let shift: f64 = rng.random_range(-3.0..3.0);
        for _ in 0..rng.random_range(2..=10) {
            let z: f64 = rng.sample(StandardNormal);
            values.push(scale * (shift + z));
            labels.push(g + 1);
        }
    }
    (values, labels)
}

fn statistical_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for i in 0..1000 {
        let (values, labels) = random_groups(&mut rng);
        let a = one_way_anova(&values, &labels).map_err(|e| e.to_string())?;
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let total: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        let rel = (a.ss_between + a.ss_within - total).abs() / total;
        ensure!(rel <= 1e-9, "dataset {i}: decomposition off by {rel:e}");
        let (m, c) = (
            rng.random_range(0.1..50.0) * if rng.random() { -1.0 } else { 1.0 },
            rng.random_range(-1e3..1e3),
        );
        let moved: Vec<f64> = values.iter().map(|v| m * v + c).collect();
        let b = one_way_anova(&moved, &labels).map_err(|e| e.to_string())?;
        let (fa, fb) = (a.f_stat.unwrap(), b.f_stat.unwrap());
        ensure!(
            (fa - fb).abs() <= 1e-8 * fa.abs().max(1.0),
            "dataset {i}: F {fa} vs {fb} after affine map"
        );
    }
    let alphas = [0.001, 0.01, 0.025, 0.05, 0.1, 0.2, 0.5];
    let mut checked = 0;
    for i in 0..60 {
        let n = rng.random_range(2..=12);
        let shift = rng.random_range(0.0..2.0);
        let mut values = Vec::new();
        let mut labels = Vec::new();
        for g in 0..2 {
            for _ in 0..n {
                let z: f64 = rng.sample(StandardNormal);
                values.push(z + shift * g as f64);
                labels.push(g + 1);
            }
        }
        let anova = one_way_anova(&values, &labels).map_err(|e| e.to_string())?;
        let p = anova.p_value.unwrap();
        for &alpha in &alphas {
            let t = tukey_hsd(&values, &labels, alpha).map_err(|e| e.to_string())?;
            let pair = &t.pairs[0];
            if (p - alpha).abs() < 1e-7 {
                continue;
            }
            ensure!(
                pair.reject == (p < alpha),
                "dataset {i}, alpha {alpha}: Tukey p {} vs ANOVA p {p}",
                pair.p_adj
            );
            checked += 1;
        }
    }
    Ok(format!(
        "1000 decompositions and affine checks hold; {checked} k=2 Tukey/ANOVA decisions agree"
    ))
}

fn blobs(rng: &mut ChaCha8Rng, c: usize, n: usize) -> Vec<Vec<f64>> {
    // Simplex vertices 10 * e_i, pairwise 14.1 within-blob stds apart.
    (0..n)
        .map(|i| {
            let g = i % c;
            (0..c)
                .map(|j| {
                    let z: f64 = rng.sample(StandardNormal);
                    z + if j == g { 10.0 } else { 0.0 }
                })
                .collect()
        })
        .collect()
}

fn elbow_behaviour() -> Outcome {
    let mut summary = Vec::new();
    for c in 2..=5 {
        let mut hits = 0;
        for trial in 0..40u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 * c as u64 + trial);
            let points = blobs(&mut rng, c, 60);
            let e = elbow_scan(&points, 1..=10, &KMeansConfig::new(1).with_seed(trial))
                .map_err(|e| e.to_string())?;
            ensure!(
                e.distortions.windows(2).all(|w| w[1] <= w[0] + 1e-9),
                "c={c} trial {trial}: distortions increase"
            );
            let knee = detect_knee(&e.k_values, &e.distortions).map_err(|e| e.to_string())?;
            ensure!(knee == e.knee, "scan and detect_knee disagree");
            if knee == Some(c) {
                hits += 1;
            }
        }
        ensure!(hits >= 36, "c={c}: knee found in only {hits}/40 trials");
        summary.push(format!("c={c}: {hits}/40"));
    }
    Ok(format!("knee equals blob count ({})", summary.join(", ")))
}

fn strip_timestamp(json: &str) -> String {
    json.lines()
        .filter(|l| !l.trim_start().starts_with("\"timestamp\":"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cfg =
        PipelineConfig::from_preset(Preset::Structure, data("synthetic_herd.csv"), dir.path());
    cfg.seed = 2024;
    cfg.emit_charts = true;
    let mut runs = Vec::new();
    for _ in 0..2 {
        let report = run_pipeline(&cfg).map_err(|e| e.to_string())?;
        let mut files = Vec::new();
        for name in &report.artifacts {
            let bytes = std::fs::read(dir.path().join(name)).map_err(|e| format!("{name}: {e}"))?;
            files.push((name.clone(), bytes));
        }
        runs.push(files);
    }
    let mut compared = 0;
    for ((name, a), (_, b)) in runs[0].iter().zip(&runs[1]) {
        let (a, b) = (String::from_utf8_lossy(a), String::from_utf8_lossy(b));
        if name == "report.json" {
            ensure!(a.contains("\"timestamp\""), "report has no timestamp field");
            ensure!(
                strip_timestamp(&a) == strip_timestamp(&b),
                "report.json differs beyond the timestamp"
            );
        } else {
            ensure!(a == b, "{name} differs between runs");
        }
        compared += 1;
    }
    Ok(format!(
        "{compared} artifacts identical across two runs (report modulo timestamp)"
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("score-table reproduction", score_tables),
        ("k-means oracle equivalence", kmeans_oracle),
        ("centroid ordering contract", ordering_contract),
        ("special-function accuracy", special_functions),
        ("statistical invariants", statistical_invariants),
        ("elbow behaviour", elbow_behaviour),
        ("end-to-end determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
