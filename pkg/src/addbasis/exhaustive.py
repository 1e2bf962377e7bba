"""Desk-scale exhaustive oracles: exact laws by enumeration over all subsets.

For ground sets of g <= 22 integers, every subset's k-fold sumset fits one
uint64, and the full table over all 2^g subsets is built by a doubling pass:
masks with highest element a extend masks without a, so
S_k[m] = S_k[m - 2^a] | shift_a(S_{k-1}[m]).  Expectations then reduce to
weighted reductions over the table.  These oracles deliberately share no code
with the production kernel; they exist to check it and the closed forms.
"""

from __future__ import annotations

import numpy as np

from .errors import EnumerationLimitError

_MAX_GROUND_BITS = 22


def _check_ground(g: int, k: int, modular: bool, n: int) -> None:
    if g > _MAX_GROUND_BITS:
        raise EnumerationLimitError(
            f"enumeration bound exceeded: ground size {g} > {_MAX_GROUND_BITS}"
        )
    top = n if modular else k * (g - 1)
    if top >= 64:
        raise EnumerationLimitError(f"sumset range {top} does not fit a 64-bit word")


def subset_sumset_table(n: int, k: int, modular: bool = False) -> np.ndarray:
    """uint64 sumset bitmap of every subset of the ground set, indexed by subset mask.

    Ground set is {0,...,n} (g = n+1) or, modularly, {0,...,n-1} (g = n);
    subset mask bit i means integer i is in the set.
    """
    g = n if modular else n + 1
    _check_ground(g, k, modular, n)
    size = 1 << g
    masks = np.arange(size, dtype=np.uint64)
    levels = [np.zeros(size, dtype=np.uint64) for _ in range(k - 1)]  # 2-fold .. k-fold
    res_mask = np.uint64((1 << n) - 1) if modular else None
    for a in range(g):
        cur = np.arange(1 << a, 1 << (a + 1), dtype=np.int64)
        prev = cur - (1 << a)
        lower = masks[cur]  # 1-fold sums of the subsets at cur
        for lvl in levels:
            if modular:
                shifted = ((lower << np.uint64(a)) | (lower >> np.uint64(n - a))) & res_mask
            else:
                shifted = lower << np.uint64(a)
            lvl[cur] = lvl[prev] | shifted
            lower = lvl[cur]
    return levels[-1] if levels else masks.copy()


def subset_weights(ground_size: int, p: float) -> np.ndarray:
    """Bernoulli(p) probability of every subset mask of a ground set."""
    if ground_size > _MAX_GROUND_BITS:
        raise EnumerationLimitError(
            f"enumeration bound exceeded: ground size {ground_size} > {_MAX_GROUND_BITS}"
        )
    masks = np.arange(1 << ground_size, dtype=np.uint64)
    pc = np.bitwise_count(masks).astype(np.float64)
    if p == 0.0 or p == 1.0:
        target = 0.0 if p == 0.0 else float(ground_size)
        return (pc == target).astype(np.float64)
    return np.exp(pc * np.log(p) + (ground_size - pc) * np.log1p(-p))


def missing_counts(table: np.ndarray, lo: int, hi: int) -> np.ndarray:
    """Per-subset count of window targets absent from the sumset table."""
    width = hi - lo + 1
    window = np.uint64(((1 << width) - 1) << lo)
    gaps = np.bitwise_and(np.bitwise_not(table), window)
    return np.bitwise_count(gaps).astype(np.int64)


def exhaustive_mean_missing(n: int, p: float, lo: int, hi: int, k: int = 2,
                            modular: bool = False) -> float:
    """Exact E(X) over [lo, hi] by full enumeration."""
    table = subset_sumset_table(n, k, modular=modular)
    w = subset_weights(n if modular else n + 1, p)
    return float(np.dot(w, missing_counts(table, lo, hi)))


def exhaustive_basis_prob(n: int, p: float, lo: int, hi: int, k: int = 2,
                          modular: bool = False) -> float:
    """Exact P(X = 0) over [lo, hi] by full enumeration."""
    table = subset_sumset_table(n, k, modular=modular)
    w = subset_weights(n if modular else n + 1, p)
    return float(w[missing_counts(table, lo, hi) == 0].sum())


def exhaustive_missing_prob(j: int, n: int, p: float, k: int = 2,
                            modular: bool = False) -> float:
    """Exact P(target j uncovered) by full enumeration."""
    table = subset_sumset_table(n, k, modular=modular)
    w = subset_weights(n if modular else n + 1, p)
    uncovered = (table >> np.uint64(j)) & np.uint64(1) == 0
    return float(w[uncovered].sum())
