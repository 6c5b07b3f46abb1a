"""Generate data/synthetic_herd.csv.

The file is SYNTHETIC. The grader scores S1..S3 are the real published scores
(data/scores.csv); every other column is simulated. Each simulated column is
affinely rescaled so that its mean and sample standard deviation equal the
published descriptive statistics exactly. Candidate datasets are drawn from a
seeded generator and the first one whose correlation pattern and elbow knees
match the published analysis is written out:

* BW is most strongly correlated with DA, CW, DL (in that order) among the
  image measurements, each within 0.03 of the published coefficient;
* SS is most strongly correlated with CW, BW (positive) and CH (negative)
  among the non-productivity measurements, each within 0.03 of the published
  coefficient;
* the knee of the distortion curve over k = 1..10 is 3 for z-scored
  (DA, CW, DL) and 4 for z-scored (CW, BW, CH).

Run: python3 data/make_synthetic.py
"""

import csv
import os

import numpy as np
from sklearn.cluster import KMeans

HERE = os.path.dirname(os.path.abspath(__file__))

# Published mean and sample std per measurement.
MOMENTS = {
    "BW": (422.85, 36.18),
    "CH": (130.45, 2.82),
    "WH": (122.07, 2.64),
    "RH": (65.75, 2.08),
    "SL": (136.47, 3.98),
    "SVH": (55.91, 3.00),
    "SA": (9718.98, 586.53),
    "CW": (50.12, 2.29),
    "DL": (153.98, 5.22),
    "DA": (7298.45, 414.67),
    "FW": (565.11, 77.82),
    "DMI": (12.95, 1.07),
    "RFI": (0.18, 0.69),
    "ADG": (1.74, 0.36),
    "SC": (33.28, 2.44),
    "LEA": (80.54, 9.99),
}
IMAGE = ["CH", "WH", "RH", "SL", "SVH", "SA", "CW", "DL", "DA"]


def z(v):
    return (v - v.mean()) / v.std(ddof=1)


def r(a, b):
    return float(np.corrcoef(a, b)[0, 1])


def knee(inertia):
    ks = np.arange(1, len(inertia) + 1, dtype=float)
    d = np.minimum.accumulate(inertia)
    x = (ks - ks[0]) / (ks[-1] - ks[0])
    y = (d - d.min()) / (d.max() - d.min())
    ux, uy = x[-1] - x[0], y[-1] - y[0]
    below = -(ux * (y - y[0]) - uy * (x - x[0])) / np.hypot(ux, uy)
    i = int(np.argmax(below[1:-1])) + 1
    return int(ks[i])


def elbow(points):
    inertia = np.array(
        [KMeans(k, n_init=20, random_state=0).fit(points).inertia_ for k in range(1, 11)]
    )
    return knee(inertia)


def structure_block(rng, ss):
    n = len(ss)
    u = z(ss)
    # Structure groups, loosely ordered by score.
    order = np.argsort(u + rng.normal(0, rng.uniform(1.5, 3.5), n))
    s = np.empty(n, dtype=int)
    start = 0
    for g, size in enumerate([2, 4, 8, 9]):
        s[order[start : start + size]] = g
        start += size
    cw_c = np.array([-1.98, -0.90, 0.26, 0.74])
    bw_c = np.array([-1.33, -1.22, 0.11, 0.89])
    ch_c = rng.normal(0, 1.0, 4)
    sig = rng.uniform(0.2, 0.45)
    cw = cw_c[s] + rng.normal(0, sig, n)
    bw = bw_c[s] + rng.normal(0, sig, n)
    ch = ch_c[s] - rng.uniform(0.2, 0.8) * u + rng.normal(0, sig, n)
    return {"BW": z(bw), "CH": z(ch), "CW": z(cw)}


def structure_ok(cols, ss):
    if abs(r(cols["CW"], cols["BW"]) - 0.85) > 0.03:
        return False
    targets = {"CW": 0.39, "BW": 0.35, "CH": -0.31}
    if any(abs(r(cols[k], ss) - t) > 0.03 for k, t in targets.items()):
        return False
    if r(cols["CW"], ss) < r(cols["BW"], ss) + 0.02:
        return False
    return elbow(np.column_stack([cols["CW"], cols["BW"], cols["CH"]])) == 4


def dorsum_block(rng, cols):
    n = len(cols["BW"])
    bw, cw = cols["BW"], cols["CW"]
    out = dict(cols)
    out["DA"] = z(0.55 * bw + 0.45 * cw + rng.normal(0, rng.uniform(0.1, 0.4), n))
    out["DL"] = z(0.6 * bw + rng.normal(0, rng.uniform(0.5, 0.9), n))
    for k in ["WH", "RH", "SL", "SVH", "SA"]:
        out[k] = z(rng.uniform(-0.3, 0.5) * bw + rng.normal(0, 1, n))
    out["FW"] = z(0.5 * bw + rng.normal(0, 1, n))
    out["DMI"] = z(0.7 * out["FW"] + rng.normal(0, 0.7, n))
    out["ADG"] = z(0.4 * out["WH"] + rng.normal(0, 1, n))
    out["RFI"] = z(-0.4 * out["SL"] + rng.normal(0, 1, n))
    out["SC"] = z(rng.normal(0, 1, n))
    out["LEA"] = z(0.3 * bw + rng.normal(0, 1, n))
    return out


def dorsum_ok(cols, ss):
    bw = cols["BW"]
    targets = {"DA": 0.90, "CW": 0.85, "DL": 0.72}
    if any(abs(r(cols[k], bw) - t) > 0.03 for k, t in targets.items()):
        return False
    if r(cols["DA"], bw) < r(cols["CW"], bw) + 0.03:
        return False
    others = [abs(r(cols[k], bw)) for k in IMAGE if k not in targets]
    if max(others) >= 0.65:
        return False
    weakest = min(abs(r(cols[k], ss)) for k in ("CW", "BW", "CH"))
    rest = [abs(r(cols[k], ss)) for k in IMAGE if k not in ("CW", "CH")]
    if max(rest) >= weakest - 0.02:
        return False
    return elbow(np.column_stack([cols["DA"], cols["CW"], cols["DL"]])) == 3


def main():
    with open(os.path.join(HERE, "scores.csv")) as f:
        rows = list(csv.DictReader(f))
    grades = np.array([[float(r_[g]) for g in ("S1", "S2", "S3")] for r_ in rows])
    ss = grades.mean(axis=1)
    rng = np.random.default_rng(20240611)

    def search():
        for attempt in range(100000):
            base = structure_block(rng, ss)
            if not structure_ok(base, ss):
                continue
            for _ in range(2000):
                cols = dorsum_block(rng, base)
                if dorsum_ok(cols, ss):
                    print(f"accepted structure candidate {attempt}")
                    return cols
        raise SystemExit("no candidate found")

    cols = search()

    keys = list(MOMENTS)
    out = os.path.join(HERE, "synthetic_herd.csv")
    with open(out, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["animal"] + keys + ["S1", "S2", "S3"])
        for i, row in enumerate(rows):
            vals = []
            for k in keys:
                m, s = MOMENTS[k]
                vals.append(f"{m + s * cols[k][i]:.6f}")
            w.writerow([row["animal"]] + vals + [row["S1"], row["S2"], row["S3"]])
    print(f"wrote {out}")
    for k in ["DA", "CW", "DL"]:
        print(f"r(BW,{k}) = {r(cols[k], cols['BW']):+.3f}")
    for k in ["CW", "BW", "CH"]:
        print(f"r(SS,{k}) = {r(cols[k], ss):+.3f}")


if __name__ == "__main__":
    main()
