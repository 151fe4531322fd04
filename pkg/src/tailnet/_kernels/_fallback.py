"""Pure-Python kernel implementations.

Used when the compiled extension is unavailable (or when
``TAILNET_PURE_PYTHON`` is set). Same contracts as ``_core``:

* ``rolling_coes_kernel`` agrees with the compiled kernel to floating
  round-off (different summation order via BLAS).
* ``breakpoint_scan`` is bit-identical to the compiled kernel: both run
  the definitional two-pass mean/SSE loops left to right, which is also
  what a plain brute-force reimplementation produces.
"""

import numpy as np

BACKEND_NAME = "python"


def rolling_coes_kernel(returns, window, k):
    """All rolling-window CoES matrices for a return panel.

    returns : (T, N) float64, window : W, k : tail order statistic rank.
    Gives (coes, var) with shapes (T-W+1, N, N) and (T-W+1, N), where
    coes[w, i, j] is the mean of asset i's window returns over the dates
    on which asset j sits at or below its k-th smallest return.
    """
    T, n = returns.shape
    n_out = T - window + 1
    coes = np.empty((n_out, n, n), dtype=np.float64)
    var = np.empty((n_out, n), dtype=np.float64)
    for w in range(n_out):
        block = returns[w : w + window]
        var[w] = np.sort(block, axis=0)[k - 1]
        mask = (block <= var[w]).astype(np.float64)
        counts = mask.sum(axis=0)
        coes[w] = (block.T @ mask) / counts
    return coes, var


def breakpoint_scan(gaps, lo, hi):
    """Best two-segment split of ``gaps`` by total within-segment SSE.

    Candidate prefix lengths run over ``lo..hi`` inclusive (1-based,
    both segments non-empty). Returns (split, sse); ties go to the
    smallest split. Sums accumulate left to right so results match the
    compiled kernel and a naive reimplementation exactly.
    """
    g = [float(v) for v in gaps]
    m = len(g)
    if not (1 <= lo <= hi <= m - 1):
        raise ValueError(f"admissible split range [{lo}, {hi}] invalid for {m} gaps")
    best_split = -1
    best_sse = float("inf")
    for s in range(lo, hi + 1):
        acc = 0.0
        for i in range(s):
            acc += g[i]
        mu1 = acc / s
        sse1 = 0.0
        for i in range(s):
            d = g[i] - mu1
            sse1 += d * d
        acc = 0.0
        for i in range(s, m):
            acc += g[i]
        mu2 = acc / (m - s)
        sse2 = 0.0
        for i in range(s, m):
            d = g[i] - mu2
            sse2 += d * d
        sse = sse1 + sse2
        if sse < best_sse:
            best_sse = sse
            best_split = s
    return best_split, best_sse
