"""Exact combinatorics of k-sum multisets over {0,...,n}.

A size-k multiset from {0,...,n} with sum j is, after dropping zeros, a
partition of j into at most k parts each at most n, so the count |S_j| is the
q-binomial coefficient array of (n+k choose k)_q evaluated at exponent j.  The
coefficient array is built by the standard polynomial recurrence
multiply-by-(1-q^(n+i)), divide-by-(1-q^i), which stays integral at every step
and runs in O(k^2 n) big-int additions.  Counts grow past 64 bits quickly
(n=1000, k=5 already does), so everything stays in Python integers.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache


@dataclass(frozen=True)
class QBinomial:
    """Coefficient array a_0..a_{nk} of the gaussian binomial (n+k choose k)_q."""

    n: int
    k: int
    coefficients: tuple[int, ...]


@dataclass(frozen=True)
class TupleCounts:
    """Counts of size-k multisets from {0,...,n} with sum j, split by distinct values.

    by_distinct[d-1] counts multisets using exactly d distinct values;
    the last entry is the all-distinct count |T_j|.
    """

    j: int
    k: int
    n: int
    total: int
    by_distinct: tuple[int, ...]


def _mul_one_minus_qm(coeffs: list[int], m: int) -> list[int]:
    out = coeffs + [0] * m
    for i in range(len(coeffs)):
        out[i + m] -= coeffs[i]
    return out


def _div_one_minus_qm(coeffs: list[int], m: int) -> list[int]:
    # Synthetic division: if f = g*(1-q^m) then g_i = f_i + g_{i-m}.
    out = coeffs[: len(coeffs) - m]
    for i in range(m, len(out)):
        out[i] += out[i - m]
    return out


@lru_cache(maxsize=512)
def _qbinomial_coeffs(n: int, k: int) -> tuple[int, ...]:
    coeffs = [1]
    for i in range(1, k + 1):
        coeffs = _div_one_minus_qm(_mul_one_minus_qm(coeffs, n + i), i)
    return tuple(coeffs)


def gaussian_binomial(n: int, k: int) -> QBinomial:
    """Exact coefficients of (n+k choose k)_q; a_j = #partitions of j into <= k parts <= n."""
    if n < 0 or k < 0:
        raise ValueError(f"n and k must be non-negative, got n={n}, k={k}")
    return QBinomial(n=n, k=k, coefficients=_qbinomial_coeffs(n, k))


def count_sumtuples(j: int, k: int, n: int) -> int:
    """|S_j|: size-k multisets from {0,...,n} summing to j (0 outside [0, kn])."""
    if j < 0 or j > k * n:
        return 0
    return _qbinomial_coeffs(n, k)[j]


@lru_cache(maxsize=64)
def _distinct_tables(k: int, n: int) -> tuple[tuple[int, ...], ...]:
    """tables[d][j] = #multisets of size k from {0..n}, sum j, exactly d+1 distinct values.

    Iterative DP over candidate values v = 0..n; state is (distinct used,
    elements used, running sum), so the table is bounded by O(k^2 * kn) cells.
    """
    top = k * n
    # state[(d, c)][s] with d = distinct values used, c = multiset size so far
    state: dict[tuple[int, int], list[int]] = {(0, 0): [1] + [0] * top}
    for v in range(n + 1):
        nxt: dict[tuple[int, int], list[int]] = {}
        for (d, c), sums in state.items():
            # multiplicity 0 of v: carry over
            tgt = nxt.setdefault((d, c), [0] * (top + 1))
            for s, w in enumerate(sums):
                if w:
                    tgt[s] += w
            if d == k:
                continue
            for mult in range(1, k - c + 1):
                add = mult * v
                tgt = nxt.setdefault((d + 1, c + mult), [0] * (top + 1))
                for s, w in enumerate(sums):
                    if w and s + add <= top:
                        tgt[s + add] += w
        state = nxt
    out = []
    for d in range(1, k + 1):
        sums = state.get((d, k))
        out.append(tuple(sums) if sums is not None else tuple([0] * (top + 1)))
    return tuple(out)


def count_by_distinct(j: int, k: int, n: int) -> TupleCounts:
    """Exact stratification c_1..c_k of |S_j| by number of distinct values used."""
    if j < 0 or j > k * n:
        return TupleCounts(j=j, k=k, n=n, total=0, by_distinct=tuple([0] * k))
    tables = _distinct_tables(k, n)
    by_d = tuple(tables[d][j] for d in range(k))
    return TupleCounts(j=j, k=k, n=n, total=sum(by_d), by_distinct=by_d)
