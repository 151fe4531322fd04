"""Similarity networks over risk-structure vectors.

Each date's CoES matrix yields N(N-1)/2 pairwise cosine similarities.
Their sign splits them into a positive and a negative group; within each
group, sorted values are pushed through the standard normal CDF (scaled
by sqrt(N)), adjacent differences are segmented into two clusters by a
least-squares breakpoint, and only the pairs beyond the break become
edges: +1 above the positive break, -1 below the negative break, 0
elsewhere. Groups with fewer than 3 members produce no edges.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from tailnet._kernels import breakpoint_scan
from tailnet.errors import DegenerateRiskStructureError, InputError
from tailnet.tail import CoESMatrix

_INT_EPS = 1e-9


def cosine_similarity(x, y) -> float:
    """Dot product over the product of norms, clamped to [-1, 1]."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    nx = float(np.linalg.norm(x))
    ny = float(np.linalg.norm(y))
    if nx == 0.0 or ny == 0.0:
        raise DegenerateRiskStructureError("degenerate risk structure: zero-norm vector")
    return float(np.clip(float(x @ y) / (nx * ny), -1.0, 1.0))


@dataclass(frozen=True)
class CorrelationSet:
    """All pairwise similarities at one date.

    ``rho[p]`` belongs to the unordered asset pair ``pairs[p] = (i, j)``
    with i < j, enumerated row-major.
    """

    rho: np.ndarray
    pairs: np.ndarray
    n_assets: int

    @property
    def n_pairs(self) -> int:
        return self.rho.size


def correlation_set(coes, symbols=None) -> CorrelationSet:
    """Pairwise cosine similarities between the rows of a CoES matrix."""
    values = coes.values if isinstance(coes, CoESMatrix) else np.asarray(coes, float)
    n = values.shape[0]
    if values.ndim != 2 or values.shape[1] != n:
        raise InputError("CoES matrix must be square")
    if n < 2:
        raise InputError("need at least 2 assets to form pairs")
    norms = np.linalg.norm(values, axis=1)
    dead = np.flatnonzero(norms == 0.0)
    if dead.size:
        name = symbols[dead[0]] if symbols is not None else f"asset {dead[0]}"
        raise DegenerateRiskStructureError(f"degenerate risk structure for {name}")
    unit = values / norms[:, None]
    gram = unit @ unit.T
    iu, ju = np.triu_indices(n, k=1)
    rho = np.clip(gram[iu, ju], -1.0, 1.0)
    pairs = np.column_stack([iu, ju])
    rho.flags.writeable = False
    pairs.flags.writeable = False
    return CorrelationSet(rho=rho, pairs=pairs, n_assets=n)


@dataclass(frozen=True)
class SplitGroups:
    """Sign partition of a correlation set, each group sorted ascending.

    ``positive_pairs``/``negative_pairs`` give the linear pair index of
    each sorted group member; exact zeros go straight to ``zero_pairs``.
    """

    positive: np.ndarray
    negative: np.ndarray
    positive_pairs: np.ndarray
    negative_pairs: np.ndarray
    zero_pairs: np.ndarray


def split_groups(cs: CorrelationSet) -> SplitGroups:
    rho = cs.rho
    pos_idx = np.flatnonzero(rho > 0.0)
    neg_idx = np.flatnonzero(rho < 0.0)
    zero_idx = np.flatnonzero(rho == 0.0)
    pos_order = pos_idx[np.argsort(rho[pos_idx], kind="stable")]
    neg_order = neg_idx[np.argsort(rho[neg_idx], kind="stable")]
    return SplitGroups(
        positive=rho[pos_order],
        negative=rho[neg_order],
        positive_pairs=pos_order,
        negative_pairs=neg_order,
        zero_pairs=zero_idx,
    )


def phi_transform(group, n_assets: int) -> np.ndarray:
    """Elementwise standard normal CDF of sqrt(N) * rho; order-preserving."""
    group = np.asarray(group, dtype=np.float64)
    return ndtr(math.sqrt(n_assets) * group)


def adjacent_gaps(phi) -> np.ndarray:
    """Differences between consecutive sorted transformed values."""
    phi = np.asarray(phi, dtype=np.float64)
    return np.diff(phi)


def _robust_ceil(x: float) -> int:
    nearest = round(x)
    if abs(x - nearest) <= _INT_EPS * max(1.0, abs(nearest)):
        return int(nearest)
    return math.ceil(x)


def _robust_floor(x: float) -> int:
    nearest = round(x)
    if abs(x - nearest) <= _INT_EPS * max(1.0, abs(nearest)):
        return int(nearest)
    return math.floor(x)


@dataclass(frozen=True)
class BreakpointEstimate:
    """Two-segment split of a gap vector: prefix length and its SSE."""

    theta_hat: float
    split_index: int
    sse: float


def admissible_range(m: int, theta_bar: float) -> tuple[int, int]:
    """Candidate prefix lengths [ceil(theta_bar*m), floor((1-theta_bar)*m)],
    clamped so both segments stay non-empty."""
    if not (0.0 < theta_bar < 0.5):
        raise InputError(f"theta_bar must lie in (0, 0.5), got {theta_bar}")
    lo = max(1, _robust_ceil(theta_bar * m))
    hi = min(m - 1, _robust_floor((1.0 - theta_bar) * m))
    return lo, hi


def breakpoint_theta(gaps, theta_bar: float = 0.1) -> BreakpointEstimate | None:
    """Least-SSE two-segment split of the gap vector.

    Scans every admissible prefix length s, fitting each segment by its
    mean; ties break toward the smallest s and theta_hat = s / len(gaps).
    Returns None when no admissible split exists (group too small).
    """
    gaps = np.ascontiguousarray(gaps, dtype=np.float64)
    m = gaps.size
    if m < 2:
        return None
    lo, hi = admissible_range(m, theta_bar)
    if lo > hi:
        return None
    split, sse = breakpoint_scan(gaps, lo, hi)
    return BreakpointEstimate(theta_hat=split / m, split_index=split, sse=sse)


@dataclass(frozen=True)
class BreakpointResult:
    """Per-date breakpoint diagnostics for both sign groups.

    Estimates are None when a group had fewer than 3 members (or no
    admissible split). ``threshold_plus`` is the largest positive
    similarity that did NOT become an edge; ``threshold_minus`` the
    smallest negative one. n1 + n2 + n_zero equals the pair count.
    """

    theta_plus: float | None
    theta_minus: float | None
    threshold_plus: float | None
    threshold_minus: float | None
    n1: int
    n2: int
    n_zero: int


@dataclass(frozen=True)
class SignedAdjacency:
    """Symmetric {-1, 0, +1} adjacency with zero diagonal at one date."""

    date: dt.date
    a: np.ndarray

    def __post_init__(self):
        a = self.a
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InputError("adjacency must be square")
        if np.any(np.diagonal(a) != 0):
            raise InputError("adjacency diagonal must be zero")
        if not np.array_equal(a, a.T):
            raise InputError("adjacency must be symmetric")
        if not np.isin(a, (-1, 0, 1)).all():
            raise InputError("adjacency entries must be -1, 0, or +1")

    @property
    def n_assets(self) -> int:
        return self.a.shape[0]

    def edge_count(self, sign: int) -> int:
        """Number of undirected edges carrying the given sign."""
        return int(np.count_nonzero(np.triu(self.a, k=1) == sign))


def build_adjacency(
    cs: CorrelationSet,
    theta_bar: float = 0.1,
    date: dt.date | None = None,
) -> tuple[SignedAdjacency, BreakpointResult]:
    """Classify every pair as +1 / -1 / 0 via per-group breakpoints.

    Positive group: pairs ranked strictly above the split become +1.
    Negative group: pairs ranked at or below the split become -1.
    Exact zeros, the diagonal, and groups without a split stay 0.
    """
    groups = split_groups(cs)
    n = cs.n_assets
    a = np.zeros((n, n), dtype=np.int8)

    theta_plus = threshold_plus = None
    if groups.positive.size >= 3:
        est = breakpoint_theta(
            adjacent_gaps(phi_transform(groups.positive, n)), theta_bar
        )
        if est is not None:
            s = est.split_index
            theta_plus = est.theta_hat
            threshold_plus = float(groups.positive[s - 1])
            for p in groups.positive_pairs[s:]:
                i, j = cs.pairs[p]
                a[i, j] = a[j, i] = 1

    theta_minus = threshold_minus = None
    if groups.negative.size >= 3:
        est = breakpoint_theta(
            adjacent_gaps(phi_transform(groups.negative, n)), theta_bar
        )
        if est is not None:
            s = est.split_index
            theta_minus = est.theta_hat
            threshold_minus = float(groups.negative[s])
            for p in groups.negative_pairs[:s]:
                i, j = cs.pairs[p]
                a[i, j] = a[j, i] = -1

    a.flags.writeable = False
    result = BreakpointResult(
        theta_plus=theta_plus,
        theta_minus=theta_minus,
        threshold_plus=threshold_plus,
        threshold_minus=threshold_minus,
        n1=int(groups.positive.size),
        n2=int(groups.negative.size),
        n_zero=int(groups.zero_pairs.size),
    )
    return SignedAdjacency(date=date or dt.date(1970, 1, 1), a=a), result


def build_adjacency_fixed(
    cs: CorrelationSet,
    pos_threshold: float,
    neg_threshold: float,
    date: dt.date | None = None,
) -> SignedAdjacency:
    """Debug fallback: fixed similarity cutoffs instead of breakpoints."""
    if neg_threshold >= pos_threshold:
        raise InputError("fixed thresholds must satisfy neg < pos")
    n = cs.n_assets
    a = np.zeros((n, n), dtype=np.int8)
    for p in np.flatnonzero(cs.rho > pos_threshold):
        i, j = cs.pairs[p]
        a[i, j] = a[j, i] = 1
    for p in np.flatnonzero(cs.rho < neg_threshold):
        i, j = cs.pairs[p]
        a[i, j] = a[j, i] = -1
    a.flags.writeable = False
    return SignedAdjacency(date=date or dt.date(1970, 1, 1), a=a)


def export_graphml(
    adjacency: SignedAdjacency,
    symbols,
    caps,
    path,
    contributions=None,
) -> None:
    """Write one date's network as GraphML.

    Nodes carry symbol and market_cap (plus contribution when given);
    edges carry their sign.
    """
    import networkx as nx

    symbols = list(symbols)
    caps = np.asarray(caps, dtype=np.float64)
    n = adjacency.n_assets
    if len(symbols) != n or caps.size != n:
        raise InputError("symbols/caps do not match adjacency size")
    graph = nx.Graph()
    for i, sym in enumerate(symbols):
        attrs = {"symbol": sym, "market_cap": float(caps[i])}
        if contributions is not None:
            attrs["contribution"] = float(contributions[i])
        graph.add_node(sym, **attrs)
    for i in range(n):
        for j in range(i + 1, n):
            sign = int(adjacency.a[i, j])
            if sign != 0:
                graph.add_edge(symbols[i], symbols[j], sign=sign)
    nx.write_graphml(graph, path, named_key_ids=True)
