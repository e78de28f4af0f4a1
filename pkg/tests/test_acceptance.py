"""Acceptance gate: one test per criterion, each reporting a PASS/FAIL/SKIP line.

The lines are collected and printed in the "acceptance criteria" section
at the end of the pytest run.

Criteria 4 and 5 need the public MIT-BIH heartbeat CSV (``mitbih_train.csv``,
187 amplitudes + label per line). Point ``ECGWAVE_DATA_DIR`` at the
directory holding it; criterion 5 (the full-data run) additionally needs
``ECGWAVE_FULL=1``.
"""

import json
import math
import os
import time

import numpy as np
import pytest

from ecgwave.classifiers import KNNClassifier, MLPClassifier, ModelSpec, fit, mlp_gradient_check
from ecgwave.cli import main as cli_main
from ecgwave.data import class_histogram, load_csv, synth_beats
from ecgwave.evaluation import confusion, metrics
from ecgwave.features import band_features, extract_dataset
from ecgwave.wavelets import (
    SUPPORTED_WAVELETS,
    cwt,
    dwt_step,
    idwt_step,
    make_wavelet,
    max_depth,
    ricker,
    ricker_peak_scale,
    wavedec,
    waverec,
)

from conftest import ACCEPTANCE_LINES, DATA_DIR, dataset_dir
from test_classifiers import knn_oracle
from test_evaluation import naive_confusion, naive_metrics
from test_features import naive_stats

TREE_FAMILY = ("decision_tree", "random_forest", "gradient_boost", "adaboost")


def record(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def skip(number, title, reason):
    line = f"[SKIP] criterion {number}: {title} | {reason}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    pytest.skip(reason)


def soft(number, title, detail):
    line = f"[SOFT] criterion {number}: {title} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


# --- 1 --------------------------------------------------------------------

def test_criterion_1_perfect_reconstruction():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst, cases = 0.0, 0
    for _ in range(1000):
        n = int(rng.integers(1, 257))
        x = rng.normal(size=n)
        for name in SUPPORTED_WAVELETS:
            top = max_depth(n, name)
            if top == 0:
                # no multilevel decomposition exists; the single analysis
                # step must still invert exactly
                a, d = dwt_step(x, name)
                worst = max(worst, float(np.max(np.abs(idwt_step(a, d, name, n) - x))))
                cases += 1
                continue
            for depth in range(1, top + 1):
                rec = waverec(wavedec(x, name, depth))
                worst = max(worst, float(np.max(np.abs(rec - x))))
                cases += 1
    elapsed = time.perf_counter() - t0
    record(1, "waverec(wavedec(x)) == x", worst < 1e-9 and elapsed < 10.0,
           f"{cases} (signal, wavelet, depth) cases, max abs error {worst:.2e} < 1e-9, "
           f"{elapsed:.1f}s < 10s")


# --- 2 --------------------------------------------------------------------

def test_criterion_2_filters_and_golden_beat():
    worst = 0.0
    for name in SUPPORTED_WAVELETS:
        fp = make_wavelet(name)
        k = np.arange(fp.filter_len)
        worst = max(
            worst,
            abs(fp.dec_lo.sum() - math.sqrt(2.0)),
            abs(fp.dec_hi.sum()),
            abs((fp.dec_lo**2).sum() - 1.0),
            float(np.max(np.abs(fp.dec_hi - (-1.0) ** (k + 1) * fp.dec_lo[::-1]))),
        )
    golden = json.loads((DATA_DIR / "sym5_golden_187.json").read_text())
    dec = wavedec(golden["beat"], "sym5", 4)
    gap = max(float(np.max(np.abs(b - np.array(golden["bands"][n]))))
              for n, b in zip(dec.band_names, dec.bands))
    record(2, "filter identities + sym5 golden beat", worst < 1e-12 and gap < 1e-10,
           f"max identity error {worst:.1e} < 1e-12; max gap to reference DWT {gap:.1e} < 1e-10")


# --- 3 --------------------------------------------------------------------

def test_criterion_3_feature_width_determinism_runtime():
    ds = synth_beats(2000, seed=31)  # 10,000 beats
    t0 = time.perf_counter()
    X1, _ = extract_dataset(ds)
    elapsed = time.perf_counter() - t0
    X2, _ = extract_dataset(ds)
    lengths = wavedec(ds.samples[0], "sym5", 4).lengths
    ok = (
        X1.shape == (10_000, 40)
        and X1.tobytes() == X2.tobytes()
        and lengths == [20, 20, 31, 53, 98]
        and elapsed < 30.0
    )
    record(3, "40 features, bitwise deterministic, band lengths", ok,
           f"shape {X1.shape}, identical={X1.tobytes() == X2.tobytes()}, lengths {lengths}, "
           f"10,000 beats in {elapsed:.2f}s < 30s")


# --- 4 and 5 ----------------------------------------------------------------

def _train_eval(train_csv, out, models, subset=None):
    argv = ["train-eval", "--train", str(train_csv), "--seed", "0", "--out", str(out)]
    if subset:
        argv += ["--subset", str(subset)]
    for m in models:
        argv += ["--model", m]
    t0 = time.perf_counter()
    code = cli_main(argv)
    elapsed = time.perf_counter() - t0
    reports = {r["name"]: r for r in json.loads((out / "comparison.json").read_text())}
    return code, reports, elapsed


def test_criterion_4_desk_scale_reproduction(tmp_path):
    title = "desk-scale reproduction (10,000-beat subsample)"
    d = dataset_dir()
    if d is None or not (d / "mitbih_train.csv").is_file():
        skip(4, title, "dataset not available; set ECGWAVE_DATA_DIR to the folder with mitbih_train.csv")
    kinds = ["knn", "gaussian_nb", "decision_tree", "random_forest", "linear_svc", "adaboost", "mlp"]
    code, reps, elapsed = _train_eval(d / "mitbih_train.csv", tmp_path, kinds, subset=10_000)
    acc = {k: reps[k]["accuracy"] for k in reps}
    gates = {
        "random_forest": acc["random_forest"] >= 0.90,
        "decision_tree": acc["decision_tree"] >= 0.88,
        "knn": acc["knn"] >= 0.83,
        "gaussian_nb": abs(acc["gaussian_nb"] - 0.66) <= 0.10,
    }
    detail = ", ".join(f"{k} {acc[k]:.4f}" for k in kinds) + f"; {elapsed:.0f}s < 600s"
    record(4, title, code == 0 and all(gates.values()) and elapsed < 600, detail)


def test_criterion_5_full_data(tmp_path):
    title = "full-data random_forest within 0.96 +- 0.03"
    d = dataset_dir()
    if d is None or not (d / "mitbih_train.csv").is_file():
        skip(5, title, "dataset not available; set ECGWAVE_DATA_DIR")
    if os.environ.get("ECGWAVE_FULL") != "1":
        skip(5, title, "long run; set ECGWAVE_FULL=1 to enable")
    n = int(class_histogram(load_csv(d / "mitbih_train.csv")).sum())
    code, reps, elapsed = _train_eval(d / "mitbih_train.csv", tmp_path,
                                      ["random_forest", "linear_svc", "mlp", "gradient_boost"])
    for kind, target in (("linear_svc", 0.91), ("mlp", 0.95)):
        a = reps[kind]["accuracy"]
        soft(5, f"{kind} vs {target} +- 0.06", f"{a:.4f} ({'within' if abs(a - target) <= 0.06 else 'outside'})")
    soft(5, "gradient_boost at 300 stages (not gated)", f"{reps['gradient_boost']['accuracy']:.4f}")
    rf = reps["random_forest"]["accuracy"]
    record(5, title, code == 0 and n == 87_554 and abs(rf - 0.96) <= 0.03,
           f"{n} beats, random_forest {rf:.4f}, {elapsed:.0f}s")


# --- 6 --------------------------------------------------------------------

def test_criterion_6_oracle_equivalences():
    rng = np.random.default_rng(606)
    Xtr = rng.normal(size=(300, 8))
    ytr = rng.integers(0, 5, 300)
    Q = rng.normal(size=(200, 8))
    knn_ok = all(
        np.array_equal(KNNClassifier(k=k, p=p).fit(Xtr, ytr).predict(Q), knn_oracle(Xtr, ytr, Q, k, p))
        for k, p in ((5, 1), (1, 2), (4, 2))
    )

    metrics_ok = True
    for _ in range(10):
        yt = rng.integers(0, 5, 1000)
        yp = np.where(rng.random(1000) < 0.7, yt, rng.integers(0, 5, 1000))
        classes = sorted(set(yt.tolist()) | set(yp.tolist()))
        cm = confusion(yt, yp)
        rep = metrics(cm)
        ref = naive_metrics(yt.tolist(), yp.tolist(), classes)
        metrics_ok &= cm.counts.tolist() == naive_confusion(yt.tolist(), yp.tolist(), classes)
        metrics_ok &= all(
            np.allclose(getattr(rep, key), ref[key], rtol=0, atol=1e-15)
            for key in ("precision", "recall", "f1")
        ) and abs(rep.accuracy - ref["accuracy"]) < 1e-15

    stat_gap = 0.0
    for _ in range(200):
        c = rng.normal(size=int(rng.integers(1, 120))) * rng.uniform(0.01, 10)
        stat_gap = max(stat_gap, float(np.max(np.abs(band_features(c) - naive_stats(c)))))

    record(6, "KNN / metrics / statistics oracles", knn_ok and metrics_ok and stat_gap < 1e-12,
           f"knn 200 queries x 3 settings equal={knn_ok}; confusion+metrics equal={metrics_ok}; "
           f"band statistics max gap {stat_gap:.1e} < 1e-12")


# --- 7 --------------------------------------------------------------------

def test_criterion_7_mlp_gradient_check():
    t0 = time.perf_counter()
    errors = []
    for seed in range(5):
        r = np.random.default_rng(700 + seed)
        n, d = int(r.integers(5, 21)), int(r.integers(3, 11))
        X = r.normal(size=(n, d))
        y = r.integers(0, 4, n)
        errors.append(mlp_gradient_check(MLPClassifier(hidden=(7, 6), random_state=seed), X, y))
    elapsed = time.perf_counter() - t0
    record(7, "MLP backprop vs central differences", max(errors) < 1e-5 and elapsed < 5.0,
           f"max relative error {max(errors):.1e} < 1e-5 over 5 instances, {elapsed:.2f}s < 5s")


# --- 8 --------------------------------------------------------------------

def test_criterion_8_scale_laws():
    rng = np.random.default_rng(808)
    worst = 0.0
    for _ in range(300):
        c = rng.normal(size=int(rng.integers(2, 120)))
        alpha = float(np.exp(rng.uniform(math.log(1e-3), math.log(1e3))))
        b, s = band_features(c), band_features(alpha * c)
        rel = [
            abs(s[i] - alpha * b[i]) / max(abs(alpha * b[i]), alpha) for i in (0, 1, 2, 4)
        ] + [abs(s[3] - alpha**2 * b[3]) / max(alpha**2 * b[3], alpha**2)]
        inv = [abs(s[i] - b[i]) for i in (5, 6, 7)]
        worst = max(worst, *rel, *inv)

    X = rng.normal(size=(200, 6))
    y = (X[:, 0] > 0).astype(int) + (X[:, 1] + X[:, 3] > 0.5).astype(int)
    Q = rng.normal(size=(300, 6))
    scale = np.exp(rng.uniform(-4, 4, size=6))
    same = {}
    for kind in TREE_FAMILY:
        params = {"n_estimators": 50} if kind == "gradient_boost" else {}
        a = fit(ModelSpec(kind, params, seed=8), X, y).predict(Q)
        b = fit(ModelSpec(kind, params, seed=8), X * scale, y).predict(Q * scale)
        same[kind] = bool(np.array_equal(a, b))
    record(8, "statistic scale laws + tree-family rescaling invariance",
           worst < 1e-10 and all(same.values()),
           f"max statistic deviation {worst:.1e} < 1e-10; labels unchanged: {same}")


# --- 9 --------------------------------------------------------------------

def _brute_energy(x, a):
    t = np.arange(x.size, dtype=float)
    kernel = ricker((t[None, :] - t[:, None]) / a) / math.sqrt(a)
    return float(np.sum((kernel @ x) ** 2))


def test_criterion_9_cwt_energy_peak():
    step = 0.25
    rows = []
    ok = True
    for period in (10.0, 16.0, 24.0):
        x = np.sin(2 * np.pi * np.arange(187) / period)
        coarse = np.arange(1.0, 12.0 + step / 2, step)
        found = coarse[int(np.argmax(cwt(x, coarse).energy()))]
        dense = np.arange(1.0, 12.0, 0.01)
        truth = dense[int(np.argmax([_brute_energy(x, a) for a in dense]))]
        predicted = ricker_peak_scale(period)
        ok &= abs(found - truth) <= step
        rows.append(f"T={period:g}: cwt {found:.2f}, scan {truth:.2f}, sqrt(5/2)/w {predicted:.2f}")
    record(9, "Ricker CWT energy peak vs dense brute-force scan (grid step 0.25)", ok, "; ".join(rows))
