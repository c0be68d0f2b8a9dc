"""Pure NumPy/Python fallback for the compiled kernels.

Every function here must be draw-for-draw identical to its counterpart in
``_core.pyx``: same inputs, bit-identical integer outputs.  The sampling
helpers consume pre-drawn uniforms so that outcome streams do not depend on
which backend is active.
"""

from __future__ import annotations

import numpy as np


def categorical_sample(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF draw: smallest index k with u < cdf[k].

    ``cdf`` is a non-decreasing array ending at 1.0; ``u`` holds uniforms in
    [0, 1).  Returns int64 indices, clipped to the last bin as a guard.
    """
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, len(cdf) - 1).astype(np.int64)


def categorical_sample_rows(cdf_rows: np.ndarray, rows: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Row-indexed inverse-CDF draw: sample i uses the CDF in cdf_rows[rows[i]]."""
    sub = cdf_rows[rows]
    idx = (u[:, None] >= sub).sum(axis=1)
    return np.minimum(idx, cdf_rows.shape[1] - 1).astype(np.int64)


def match_nearest(t_upper: np.ndarray, t_lower: np.ndarray, window: float):
    """Greedy nearest-neighbor pairing of two time-sorted click streams.

    Walks upper clicks in time order; each grabs the nearest still-unused
    lower click within +/- window (ties resolved toward the earlier lower
    click).  Every click is used at most once.  Returns (upper_idx, lower_idx)
    index arrays of the matched pairs, ordered by upper click.
    """
    n_u = len(t_upper)
    n_l = len(t_lower)
    used = np.zeros(n_l, dtype=bool)
    out_u: list[int] = []
    out_l: list[int] = []
    start = 0
    for i in range(n_u):
        t = t_upper[i]
        lo = t - window
        hi = t + window
        while start < n_l and (used[start] or t_lower[start] < lo):
            start += 1
        best = -1
        best_d = np.inf
        j = start
        while j < n_l and t_lower[j] <= hi:
            if not used[j]:
                d = abs(t_lower[j] - t)
                if d < best_d:
                    best_d = d
                    best = j
            j += 1
        if best >= 0:
            used[best] = True
            out_u.append(i)
            out_l.append(best)
    return np.asarray(out_u, dtype=np.int64), np.asarray(out_l, dtype=np.int64)
