"""Acceptance criteria, one test per criterion.

Each test prints a single ``[criterion NN] PASS/FAIL`` line (visible
with ``pytest -s``) and then asserts. Tolerances are fixed here, not
tuned at runtime. Run order follows the criterion numbering.
"""

import dataclasses
import datetime as dt
import hashlib
import math
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from tailnet import network, risk, synthlab, tail
from tailnet.cli import main as cli_main
from tailnet.drivers import ols_hac
from tailnet.network import (
    SignedAdjacency,
    adjacent_gaps,
    breakpoint_theta,
    build_adjacency,
    correlation_set,
    cosine_similarity,
    phi_transform,
)
from tailnet.risk import decompose_score, systemic_score
from tailnet.tail import TailConfig, coes_pair, expected_shortfall, historical_var

ALPHA = 0.05
WINDOW = 250
THETA_BAR = 0.1


def report(number, ok, detail):
    line = f"[criterion {number:02d}] {'PASS' if ok else 'FAIL'} {detail}"
    print(line)
    assert ok, line


def random_signed_adjacency(rng, n):
    upper = np.triu(rng.integers(-1, 2, size=(n, n)), k=1)
    return SignedAdjacency(date=dt.date(2020, 1, 1), a=(upper + upper.T).astype(np.int8))


def test_criterion_01_decomposition_additivity():
    rng = np.random.default_rng(1001)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(3, 31))
        adj = random_signed_adjacency(rng, n)
        caps = rng.lognormal(mean=20.0, sigma=2.0, size=n)
        score = systemic_score(adj, caps)
        total = decompose_score(adj, caps).sum()
        worst = max(worst, abs(total - score) / max(1.0, abs(score)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 1.0
    report(1, ok, f"additivity: max rel err {worst:.2e} over 1000 instances "
                  f"({elapsed:.2f} s)")


def test_criterion_02_cap_homogeneity():
    rng = np.random.default_rng(1002)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(3, 31))
        adj = random_signed_adjacency(rng, n)
        caps = rng.lognormal(mean=18.0, sigma=1.5, size=n)
        base_score = systemic_score(adj, caps)
        base_contrib = decompose_score(adj, caps)
        for lam in (0.5, 2.0, 10.0):
            scaled_score = systemic_score(adj, lam * caps)
            scaled_contrib = decompose_score(adj, lam * caps)
            worst = max(
                worst,
                abs(scaled_score - lam**2 * base_score) / max(1.0, abs(lam**2 * base_score)),
            )
            denom = np.maximum(1.0, np.abs(lam**2 * base_contrib))
            worst = max(
                worst, float(np.max(np.abs(scaled_contrib - lam**2 * base_contrib) / denom))
            )
    ok = worst <= 1e-9
    report(2, ok, f"homogeneity: max rel err {worst:.2e} for lambda in {{0.5, 2, 10}}")


def test_criterion_03_adjacency_well_formed_under_fuzz():
    rng = np.random.default_rng(1003)
    failures = 0
    for _ in range(500):
        n = int(rng.integers(3, 31))
        scale = 10.0 ** rng.integers(-4, 4)
        coes = rng.standard_normal((n, n)) * scale
        if rng.random() < 0.2:  # correlated rows stress the tight-cluster path
            coes = coes @ rng.standard_normal((n, n)) * scale
        adj, bp = build_adjacency(correlation_set(coes), THETA_BAR)
        good = (
            np.array_equal(adj.a, adj.a.T)
            and np.all(np.diagonal(adj.a) == 0)
            and set(np.unique(adj.a)) <= {-1, 0, 1}
            and bp.n1 + bp.n2 + bp.n_zero == n * (n - 1) // 2
        )
        failures += not good
    ok = failures == 0
    report(3, ok, f"adjacency fuzz: {failures} malformed results in 500 matrices")


def _oracle_split(gaps, theta_bar):
    """Independent definitional exhaustive minimizer."""
    values = [float(g) for g in gaps]
    m = len(values)

    def robust(x, rounder):
        nearest = round(x)
        if abs(x - nearest) <= 1e-9 * max(1.0, abs(nearest)):
            return int(nearest)
        return rounder(x)

    lo = max(1, robust(theta_bar * m, math.ceil))
    hi = min(m - 1, robust((1.0 - theta_bar) * m, math.floor))
    if m < 2 or lo > hi:
        return None

    def sse_of(segment):
        mean = sum(segment) / len(segment)
        total = 0.0
        for v in segment:
            d = v - mean
            total += d * d
        return total

    best = None
    for s in range(lo, hi + 1):
        sse = sse_of(values[:s]) + sse_of(values[s:])
        if best is None or sse < best[1]:
            best = (s, sse)
    return best


def test_criterion_04_breakpoint_oracle_equivalence():
    rng = np.random.default_rng(1004)
    mismatches = 0
    for trial in range(10_000):
        m = int(rng.integers(2, 51))
        style = trial % 4
        if style == 0:
            gaps = rng.random(m)
        elif style == 1:
            gaps = rng.exponential(0.02, m)
        elif style == 2:
            gaps = np.repeat(rng.random(m // 3 + 1), 3)[:m].copy()  # exact ties
        else:
            gaps = np.abs(np.diff(np.sort(rng.standard_normal(m + 1))))
        theta_bar = float(rng.choice([0.1, 0.2, 0.3]))
        est = breakpoint_theta(gaps, theta_bar)
        expected = _oracle_split(gaps, theta_bar)
        if expected is None:
            mismatches += est is not None
            continue
        if est is None or (est.split_index, est.sse) != expected:
            mismatches += 1
    ok = mismatches == 0
    report(4, ok, f"breakpoint oracle: {mismatches} mismatches in 10000 trials "
                  f"(split index and SSE compared exactly)")


def test_criterion_05_tail_estimator_identities():
    rng = np.random.default_rng(1005)
    worst_gap = -np.inf
    exact_failures = 0
    worst_cosine = 0.0
    for _ in range(1000):
        w = int(rng.integers(20, 400))
        window = rng.standard_normal(w) * rng.uniform(0.001, 0.2)
        alpha = float(rng.uniform(0.02, 0.5))
        if alpha * w < 1:
            continue
        var = historical_var(window, alpha)
        es = expected_shortfall(window, alpha)
        worst_gap = max(worst_gap, es - var)
        exact_failures += coes_pair(window, window, alpha) != es
    for _ in range(500):
        x = rng.standard_normal(12)
        y = rng.standard_normal(12)
        c = 10.0 ** rng.uniform(-6, 6)
        worst_cosine = max(
            worst_cosine, abs(cosine_similarity(c * x, y) - cosine_similarity(x, y))
        )
    ok = worst_gap <= 1e-12 and exact_failures == 0 and worst_cosine <= 1e-12
    report(5, ok, f"tail identities: max ES-VaR gap {worst_gap:.2e}, "
                  f"{exact_failures} self-CoES mismatches, "
                  f"cosine scale drift {worst_cosine:.2e}")


def _market_run(spec, theta_bar=THETA_BAR):
    panel = synthlab.generate_panel(spec)
    matrices = tail.rolling_coes(panel, TailConfig(ALPHA, WINDOW))
    adjacencies, ratios = [], []
    for m in matrices:
        cs = correlation_set(m)
        adj, _ = build_adjacency(cs, theta_bar, m.date)
        adjacencies.append(adj)
        ratios.append(risk.negative_ratio(cs))
    return panel, adjacencies, np.asarray(ratios)


def test_criterion_06_stablecoin_contribution_signs():
    start = time.perf_counter()
    good_seeds = 0
    n_seeds = 50
    for seed in range(n_seeds):
        spec = synthlab.preset_spec(
            "tether-like", n_assets=25, horizon=1460, seed=3000 + seed
        )
        panel, adjacencies, ratios = _market_run(spec)
        series = risk.risk_series(adjacencies, panel, negative_ratios=ratios)
        _, table, _ = risk.annual_table(series)
        mean_annual = table.mean(axis=1)
        good_seeds += mean_annual[-1] < 0 and bool(np.all(mean_annual[:-1] > 0))
    elapsed = time.perf_counter() - start
    ok = good_seeds >= math.ceil(0.95 * n_seeds) and elapsed < 120.0
    report(6, ok, f"stablecoin signs: {good_seeds}/{n_seeds} seeds clean "
                  f"({elapsed:.0f} s)")


def test_criterion_07_negative_ratio_tracks_score_inversely():
    n_sweeps = 50
    negative = 0
    for sweep in range(n_sweeps):
        mean_ratio, mean_score = [], []
        for negatives in range(1, 9):
            spec = synthlab.FactorSpec(
                n_assets=25,
                betas=(1.0,) * (25 - negatives) + (-1.0,) * negatives,
                idio_vol=(0.02,) * 25,
                factor_vol=0.04,
                cap_profile=(1e9,) * 25,
                seed=1000 * sweep + negatives,
                horizon=330,
            )
            _, adjacencies, ratios = _market_run(spec)
            panel = synthlab.generate_panel(spec)
            series = risk.risk_series(adjacencies, panel, negative_ratios=ratios)
            mean_ratio.append(series.negative_ratio.mean())
            mean_score.append(series.score.mean())
        rho = stats.spearmanr(mean_ratio, mean_score).statistic
        negative += rho < 0
    ok = negative >= math.ceil(0.9 * n_sweeps)
    report(7, ok, f"ratio-vs-score: Spearman negative in {negative}/{n_sweeps} sweeps")


def test_criterion_08_regime_densification():
    n_seeds = 50
    diffs = np.empty(n_seeds)
    for seed in range(n_seeds):
        pre = synthlab.FactorSpec(
            n_assets=10, betas=(1.0,) * 10, idio_vol=(0.03,) * 10,
            factor_vol=0.01, cap_profile=(1e9,) * 10,
            seed=500 + seed, horizon=700,
        )
        post = dataclasses.replace(pre, factor_vol=0.02, seed=9000 + seed)
        panel = synthlab.regime_panel(pre, post, 350)
        matrices = tail.rolling_coes(panel, TailConfig(ALPHA, WINDOW))
        counts = np.array(
            [
                build_adjacency(correlation_set(m), THETA_BAR, m.date)[0].edge_count(1)
                for m in matrices
            ]
        )
        diffs[seed] = counts[350:].mean() - counts[:101].mean()
    pvalue = stats.ttest_1samp(diffs, 0.0, alternative="greater").pvalue
    ok = pvalue < 0.05 and diffs.mean() > 0
    report(8, ok, f"densification: mean edge gain {diffs.mean():+.1f}, "
                  f"one-sided p = {pvalue:.2e} over {n_seeds} seeds")


def _tree_digest(root: Path) -> dict:
    return {
        str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


def test_criterion_09_pipeline_speed_and_determinism(tmp_path):
    spec = synthlab.preset_spec("tether-like", n_assets=25, horizon=1460, seed=1009)
    prices = tmp_path / "prices.csv"
    synthlab.write_price_csv(synthlab.generate_panel(spec), prices)

    start = time.perf_counter()
    rc = cli_main(["run", "--input", str(prices), "--annual-table",
                   "--out", str(tmp_path / "a")])
    elapsed = time.perf_counter() - start
    rc2 = cli_main(["run", "--input", str(prices), "--annual-table",
                    "--out", str(tmp_path / "b")])
    identical = _tree_digest(tmp_path / "a") == _tree_digest(tmp_path / "b")

    import csv

    with open(tmp_path / "a" / "network" / "breakpoints.csv") as fh:
        n_networks = len(list(csv.DictReader(fh)))
    with open(tmp_path / "a" / "score" / "scores.csv") as fh:
        n_scores = len(list(csv.DictReader(fh)))
    ok = (
        rc == 0 and rc2 == 0 and elapsed < 10.0 and identical
        and n_networks == 1211 and n_scores == 1211
    )
    report(9, ok, f"pipeline: {n_networks} networks in {elapsed:.1f} s, "
                  f"reruns byte-identical = {identical}")


def test_criterion_10_hac_recovers_true_coefficients():
    n_reps = 200
    hits = 0
    for rep in range(n_reps):
        rng = np.random.default_rng(20_000 + rep)
        T = 500
        shock_x = rng.standard_normal(T)
        shock_u = rng.standard_normal(T)
        x = np.empty(T)
        u = np.empty(T)
        x[0], u[0] = shock_x[0], shock_u[0]
        for t in range(1, T):
            x[t] = 0.5 * x[t - 1] + shock_x[t]
            u[t] = 0.5 * u[t - 1] + shock_u[t]
        y = 1.0 + 0.5 * x + u
        result = ols_hac(y, np.column_stack([np.ones(T), x]))
        hits += (
            abs(result.coef[0] - 1.0) <= 3 * result.se[0]
            and abs(result.coef[1] - 0.5) <= 3 * result.se[1]
        )
    ok = hits >= math.ceil(0.95 * n_reps)
    report(10, ok, f"driver calibration: {hits}/{n_reps} replications within "
                   f"3 HAC standard errors of (1, 0.5)")
