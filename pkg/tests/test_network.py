"""Similarity sets, breakpoint segmentation, and signed adjacency."""

import math

import numpy as np
import pytest

from tailnet.errors import DegenerateRiskStructureError, InputError
from tailnet.network import (
    adjacent_gaps,
    admissible_range,
    breakpoint_theta,
    build_adjacency,
    build_adjacency_fixed,
    correlation_set,
    cosine_similarity,
    export_graphml,
    phi_transform,
    split_groups,
)


def brute_force_split(gaps, theta_bar):
    """Definitional exhaustive minimizer, kept independent of the library."""
    gaps = [float(g) for g in gaps]
    m = len(gaps)

    def robust(x, f):
        nearest = round(x)
        if abs(x - nearest) <= 1e-9 * max(1.0, abs(nearest)):
            return int(nearest)
        return f(x)

    lo = max(1, robust(theta_bar * m, math.ceil))
    hi = min(m - 1, robust((1.0 - theta_bar) * m, math.floor))
    if m < 2 or lo > hi:
        return None

    def seg_sse(seg):
        mu = sum(seg) / len(seg)
        total = 0.0
        for v in seg:
            d = v - mu
            total += d * d
        return total

    best = None
    for s in range(lo, hi + 1):
        sse = seg_sse(gaps[:s]) + seg_sse(gaps[s:])
        if best is None or sse < best[1]:
            best = (s, sse)
    return best


# ---------------------------------------------------------------- cosine


def test_cosine_self_similarity():
    assert cosine_similarity([3.0, -1.0, 2.0], [3.0, -1.0, 2.0]) == 1.0


def test_cosine_orthogonal():
    assert cosine_similarity([1.0, 0.0], [0.0, 1.0]) == 0.0


def test_cosine_hand_computed():
    # dot = 8, norms 3 * 3
    assert cosine_similarity([1, 2, 2], [2, 1, 2]) == pytest.approx(8 / 9, abs=1e-15)


def test_cosine_zero_norm_raises():
    with pytest.raises(DegenerateRiskStructureError, match="degenerate risk structure"):
        cosine_similarity([0.0, 0.0], [1.0, 2.0])


def test_cosine_scale_invariance():
    rng = np.random.default_rng(31)
    for _ in range(100):
        x = rng.standard_normal(8)
        y = rng.standard_normal(8)
        c = float(rng.uniform(1e-6, 1e6))
        assert abs(cosine_similarity(c * x, y) - cosine_similarity(x, y)) <= 1e-12


def test_cosine_stays_clamped():
    x = np.full(30, 1e-154)
    assert cosine_similarity(x, x) <= 1.0


# ------------------------------------------------------- correlation sets


def test_pair_counts():
    rng = np.random.default_rng(32)
    assert correlation_set(rng.standard_normal((3, 3))).n_pairs == 3
    assert correlation_set(rng.standard_normal((25, 25))).n_pairs == 300


def test_pair_index_is_bijection_row_major():
    rng = np.random.default_rng(33)
    cs = correlation_set(rng.standard_normal((5, 5)))
    expected = [(i, j) for i in range(5) for j in range(i + 1, 5)]
    assert [tuple(p) for p in cs.pairs] == expected


def test_identical_rows_have_unit_similarity():
    rng = np.random.default_rng(34)
    m = rng.standard_normal((4, 4))
    m[2] = m[0]
    cs = correlation_set(m)
    pair = [tuple(p) for p in cs.pairs].index((0, 2))
    assert cs.rho[pair] == pytest.approx(1.0, abs=1e-12)
    assert cs.rho[pair] <= 1.0


def test_zero_row_names_the_asset():
    m = np.ones((3, 3))
    m[1] = 0.0
    with pytest.raises(DegenerateRiskStructureError, match="ETH"):
        correlation_set(m, symbols=["BTC", "ETH", "XRP"])


def test_matches_scalar_cosine():
    rng = np.random.default_rng(35)
    m = rng.standard_normal((6, 6))
    cs = correlation_set(m)
    for p, (i, j) in enumerate(cs.pairs):
        assert cs.rho[p] == pytest.approx(cosine_similarity(m[i], m[j]), abs=1e-12)


# ------------------------------------------------------------ sign groups


def _cs_from_rho(rho):
    """Correlation set with prescribed values (pairs of a small panel)."""
    rho = np.asarray(rho, dtype=np.float64)
    n = int(round((1 + math.sqrt(1 + 8 * rho.size)) / 2))
    iu, ju = np.triu_indices(n, k=1)
    from tailnet.network import CorrelationSet

    return CorrelationSet(rho=rho, pairs=np.column_stack([iu, ju]), n_assets=n)


def test_split_groups_sign_partition():
    groups = split_groups(_cs_from_rho([0.5, -0.2, 0.9]))
    assert list(groups.positive) == [0.5, 0.9]
    assert list(groups.negative) == [-0.2]
    assert groups.zero_pairs.size == 0


def test_split_groups_all_positive():
    groups = split_groups(_cs_from_rho([0.5, 0.2, 0.9]))
    assert groups.negative.size == 0


def test_split_groups_routes_exact_zero():
    groups = split_groups(_cs_from_rho([0.5, 0.0, -0.1]))
    assert list(groups.zero_pairs) == [1]
    assert groups.positive.size == 1 and groups.negative.size == 1


# ---------------------------------------------------------- phi transform


def test_phi_at_zero():
    assert phi_transform([0.0], 7)[0] == 0.5


def test_phi_at_extremes_n25():
    # 0.5 * erfc(-5 / sqrt(2)) and its mirror, checked against erfc tables
    assert phi_transform([1.0], 25)[0] == pytest.approx(0.9999997133484281, abs=1e-12)
    assert phi_transform([-1.0], 25)[0] == pytest.approx(2.866515718791946e-07, rel=1e-9)


def test_phi_preserves_order():
    rng = np.random.default_rng(36)
    group = np.sort(rng.uniform(-1, 1, 40))
    out = phi_transform(group, 25)
    assert np.all(np.diff(out) >= 0)


def test_adjacent_gaps_examples():
    assert np.allclose(adjacent_gaps([0.1, 0.4, 0.9]), [0.3, 0.5])
    assert np.all(adjacent_gaps([0.2, 0.2, 0.2]) == 0.0)
    assert adjacent_gaps([0.4]).size == 0


# ------------------------------------------------------------- breakpoint


def test_breakpoint_spec_example():
    est = breakpoint_theta(np.array([1.0, 1.0, 1.0, 10.0, 10.0, 10.0]), 0.1)
    assert est.split_index == 3
    assert est.theta_hat == 0.5
    assert est.sse == 0.0


def test_breakpoint_constant_gaps_tie_break():
    est = breakpoint_theta(np.full(8, 0.3), 0.1)
    assert est.split_index == 1  # smallest admissible split wins ties


def test_breakpoint_symmetric_bump():
    gaps = np.array([5.0, 1.0, 1.0, 1.0, 1.0, 5.0])
    est = breakpoint_theta(gaps, 0.1)
    oracle = brute_force_split(gaps, 0.1)
    assert (est.split_index, est.sse) == oracle


def test_breakpoint_absent_for_short_groups():
    assert breakpoint_theta(np.array([0.5]), 0.1) is None
    assert breakpoint_theta(np.array([]), 0.1) is None


def test_breakpoint_absent_when_range_empty():
    # m = 3 with heavy trimming leaves no integer candidate
    assert breakpoint_theta(np.array([0.1, 0.2, 0.3]), 0.49) is None


def test_admissible_range_robust_to_float_noise():
    assert admissible_range(30, 0.1) == (3, 27)   # 0.1 * 30 must not ceil to 4
    assert admissible_range(10, 0.3) == (3, 7)    # 0.7 * 10 must not floor to 6
    with pytest.raises(InputError):
        admissible_range(10, 0.6)


def test_breakpoint_matches_oracle_fuzz():
    rng = np.random.default_rng(37)
    for _ in range(500):
        m = int(rng.integers(2, 51))
        gaps = rng.exponential(0.05, m)
        theta_bar = float(rng.choice([0.1, 0.2, 0.3]))
        est = breakpoint_theta(gaps, theta_bar)
        oracle = brute_force_split(gaps, theta_bar)
        assert (est.split_index, est.sse) == oracle


# -------------------------------------------------------------- adjacency


def cluster_coes():
    """Four near-parallel loss profiles plus one nearly orthogonal asset."""
    rng = np.random.default_rng(99)
    base = np.array([-1.0, -1.1, -0.9, -1.05, -0.95])
    rows = [base + 0.12 * rng.standard_normal(5) for _ in range(4)]
    ortho = np.array([1.0, -1.0, 1.0, -1.0, 0.0])
    ortho = ortho - (ortho @ base) / (base @ base) * base
    rows.append(0.15 * base / np.linalg.norm(base) * np.linalg.norm(ortho) + ortho)
    return np.array(rows)


def test_adjacency_high_cluster_becomes_edges():
    cs = correlation_set(cluster_coes())
    adj, bp = build_adjacency(cs, 0.1)
    # the tight high cluster is the 6 pairs among assets 0..3
    for i in range(4):
        for j in range(i + 1, 4):
            assert adj.a[i, j] == 1
    assert np.all(adj.a[4] == 0) and np.all(adj.a[:, 4] == 0)
    assert bp.n1 == 10 and bp.n2 == 0
    # oracle agreement: edges are exactly the pairs ranked above the split
    order = np.argsort(cs.rho, kind="stable")
    split = brute_force_split(
        np.diff(phi_transform(cs.rho[order], 5)), 0.1
    )[0]
    expected_edges = {tuple(cs.pairs[p]) for p in order[split:]}
    actual_edges = {(i, j) for i in range(5) for j in range(i + 1, 5) if adj.a[i, j] == 1}
    assert actual_edges == expected_edges


def test_adjacency_single_pair_stays_empty():
    cs = correlation_set(np.array([[1.0, 0.5], [0.4, 1.2]]))
    adj, bp = build_adjacency(cs, 0.1)
    assert np.all(adj.a == 0)
    assert bp.theta_plus is None and bp.theta_minus is None


def stablecoin_coes():
    """Five co-crashing assets and one that rallies in their tails."""
    rng = np.random.default_rng(7)
    n = 6
    coes = np.empty((n, n))
    for i in range(n - 1):
        row = -0.05 + 0.004 * rng.standard_normal(n)
        row[n - 1] = 0.03 + 0.004 * rng.standard_normal()
        row[i] = -0.06
        coes[i] = row
    stb = 0.04 + 0.004 * rng.standard_normal(n)
    stb[n - 1] = -0.02
    coes[n - 1] = stb
    return coes


def test_adjacency_stablecoin_row_is_negative():
    cs = correlation_set(stablecoin_coes())
    adj, bp = build_adjacency(cs, 0.1)
    assert (adj.a[5] == -1).any()
    assert np.all(adj.a[:5, :5] >= 0)  # no risk-diversification edges elsewhere
    assert bp.n2 == 5  # exactly the stablecoin pairs


def test_breakpoint_result_counts_partition_pairs():
    rng = np.random.default_rng(38)
    for _ in range(50):
        n = int(rng.integers(3, 12))
        cs = correlation_set(rng.standard_normal((n, n)))
        _, bp = build_adjacency(cs, 0.1)
        assert bp.n1 + bp.n2 + bp.n_zero == cs.n_pairs
        assert (bp.theta_plus is None) == (bp.n1 < 3)
        assert (bp.theta_minus is None) == (bp.n2 < 3)


def test_adjacency_thresholds_bound_edges():
    rng = np.random.default_rng(39)
    for _ in range(30):
        n = int(rng.integers(4, 10))
        cs = correlation_set(rng.standard_normal((n, n)))
        adj, bp = build_adjacency(cs, 0.1)
        for p, (i, j) in enumerate(cs.pairs):
            if adj.a[i, j] == 1:
                assert cs.rho[p] > bp.threshold_plus
            if adj.a[i, j] == -1:
                assert cs.rho[p] < bp.threshold_minus


def test_adjacency_well_formed_fuzz():
    rng = np.random.default_rng(40)
    for _ in range(100):
        n = int(rng.integers(3, 15))
        scale = 10.0 ** rng.integers(-3, 3)
        cs = correlation_set(rng.standard_normal((n, n)) * scale)
        adj, _ = build_adjacency(cs, 0.1)
        assert np.array_equal(adj.a, adj.a.T)
        assert np.all(np.diagonal(adj.a) == 0)
        assert set(np.unique(adj.a)) <= {-1, 0, 1}


def test_fixed_threshold_fallback():
    cs = _cs_from_rho([0.95, 0.5, -0.8, -0.1, 0.2, 0.99])
    adj = build_adjacency_fixed(cs, 0.9, -0.5)
    plus = {tuple(cs.pairs[p]) for p in np.flatnonzero(cs.rho > 0.9)}
    minus = {tuple(cs.pairs[p]) for p in np.flatnonzero(cs.rho < -0.5)}
    for i, j in plus:
        assert adj.a[i, j] == 1
    for i, j in minus:
        assert adj.a[i, j] == -1
    assert np.count_nonzero(adj.a) == 2 * (len(plus) + len(minus))
    with pytest.raises(InputError):
        build_adjacency_fixed(cs, -0.5, 0.9)


def test_graphml_export_roundtrip(tmp_path):
    import networkx as nx

    cs = correlation_set(stablecoin_coes())
    adj, _ = build_adjacency(cs, 0.1)
    symbols = ["A1", "A2", "A3", "A4", "A5", "STB"]
    caps = [5e10, 4e10, 3e10, 2e10, 1e10, 8e9]
    contribs = [1.0, 2.0, 3.0, 4.0, 5.0, -6.0]
    path = tmp_path / "net.graphml"
    export_graphml(adj, symbols, caps, path, contributions=contribs)
    graph = nx.read_graphml(path)
    assert set(graph.nodes) == set(symbols)
    assert graph.nodes["STB"]["market_cap"] == 8e9
    assert graph.nodes["STB"]["contribution"] == -6.0
    for i, j in zip(*np.nonzero(np.triu(adj.a, k=1))):
        assert graph.edges[symbols[i], symbols[j]]["sign"] == adj.a[i, j]
    assert graph.number_of_edges() == np.count_nonzero(np.triu(adj.a, k=1))
