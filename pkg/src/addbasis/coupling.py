"""Pair-resampling coupling for k=2: realizes the law of the set conditioned
on a chosen target being uncovered.

Given that target j IS covered, every fully available pair {x, j-x} is
resampled to one of its three "not both present" states with the conditional
probabilities p(1-p)/(1-p^2), p(1-p)/(1-p^2), (1-p)^2/(1-p^2) (remove first,
remove second, remove both); a present diagonal element j/2 is removed
outright.  Pairs with at most one element present, and integers not involved
in any pair summing to j, are untouched.  Because the pairs are disjoint, the
post-coupling set has exactly the conditional law given j uncovered, which the
total-variation check verifies against a full-enumeration oracle.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import AddBasisError, ValidationError
from .exhaustive import subset_sumset_table, subset_weights
from .model import GroundSet, SampledSet
from .sumset import _kfold_bits


class CouplingInvariantError(AddBasisError):
    """A simulated outcome violated one-sided domination (a covered target reappeared)."""


@dataclass(frozen=True)
class CouplingOutcome:
    before: SampledSet
    after: SampledSet
    target_j: int
    removed: tuple[int, ...]

    def __post_init__(self):
        before = set(self.before.elements)
        after = set(self.after.elements)
        if not after <= before:
            raise ValidationError("coupled set is not a subset of the original")
        if tuple(sorted(before - after)) != self.removed:
            raise ValidationError("removed list does not match before \\ after")


def couple_given_missing(sampled: SampledSet, j: int, n: int, p: float,
                         rng: np.random.Generator) -> CouplingOutcome:
    """De-select elements so the post state has target j uncovered, with the
    conditional law of the original set given j uncovered."""
    if not 0.0 < p < 1.0:
        raise ValidationError(f"p must be in (0,1), got {p}")
    if not 0 <= j <= 2 * n:
        raise ValidationError(f"target {j} outside [0, {2 * n}]")
    member = 0
    for e in sampled.elements:
        member |= 1 << e
    remove_only = p / (1.0 + p)            # p(1-p)/(1-p^2)
    keep_neither = remove_only * 2.0       # then (1-p)^2/(1-p^2) fills [2q, 1)
    removed = []
    for x in range(max(0, j - n), (j - 1) // 2 + 1):
        y = j - x
        if (member >> x) & 1 and (member >> y) & 1:
            u = rng.random()
            if u < remove_only:
                removed.append(x)
            elif u < keep_neither:
                removed.append(y)
            else:
                removed.append(x)
                removed.append(y)
    if j % 2 == 0 and j // 2 <= n and (member >> (j // 2)) & 1:
        removed.append(j // 2)
    if not removed:
        return CouplingOutcome(before=sampled, after=sampled, target_j=j, removed=())
    gone = set(removed)
    after = SampledSet(tuple(e for e in sampled.elements if e not in gone), sampled.ground)
    return CouplingOutcome(before=sampled, after=after, target_j=j,
                           removed=tuple(sorted(gone)))


def _missing_mask(elements: tuple[int, ...], n: int) -> int:
    """Bitmask of targets in [0, 2n] with no 2-sum representation in `elements`."""
    full = (1 << (2 * n + 1)) - 1
    return ~int(_kfold_bits(elements, 2, n)) & full


def conditional_law_exact(n: int, p: float, j: int) -> dict[int, float]:
    """Exact law of the missing-indicator vector given target j uncovered.

    Keys are bitmasks over targets 0..2n with bit j cleared (it is forced by
    the conditioning); values sum to 1.  Enumerates all 2^(n+1) subsets, so
    n <= 20.
    """
    if n > 20:
        raise ValidationError(f"enumeration bound exceeded: n={n} > 20")
    if not 0 <= j <= 2 * n:
        raise ValidationError(f"target {j} outside [0, {2 * n}]")
    table = subset_sumset_table(n, 2)
    w = subset_weights(n + 1, p)
    uncovered = (table >> np.uint64(j)) & np.uint64(1) == 0
    total = float(w[uncovered].sum())
    if total <= 0.0:
        raise ValidationError(f"conditioning event has probability zero (p={p}, j={j})")
    full = np.uint64((1 << (2 * n + 1)) - 1)
    miss = np.bitwise_and(np.bitwise_not(table[uncovered]), full)
    miss = np.bitwise_and(miss, np.uint64(full ^ np.uint64(1 << j)))
    vals, inverse = np.unique(miss, return_inverse=True)
    probs = np.bincount(inverse, weights=w[uncovered], minlength=len(vals))
    return {int(v): float(q / total) for v, q in zip(vals.tolist(), probs.tolist())}


def coupling_tv_check(n: int, p: float, j: int, samples: int,
                      rng: np.random.Generator) -> float:
    """Total-variation distance between the coupled simulation and the exact
    conditional law of the missing-indicator vector.

    Every simulated outcome is also checked for one-sided domination: a target
    missing before the coupling must stay missing after it.
    """
    if n > 16:
        raise ValidationError(f"enumeration bound exceeded: n={n} > 16")
    if samples < 1:
        raise ValidationError(f"samples must be >= 1, got {samples}")
    exact = conditional_law_exact(n, p, j)
    ground = GroundSet(n, modular=False)
    drop_j = ~(1 << j)
    counts: Counter[int] = Counter()
    for _ in range(samples):
        u = rng.random(n + 1)
        elements = tuple(int(i) for i in np.flatnonzero(u < p))
        sampled = SampledSet(elements, ground)
        before_miss = _missing_mask(elements, n)
        outcome = couple_given_missing(sampled, j, n, p, rng)
        after_miss = _missing_mask(outcome.after.elements, n)
        if before_miss & ~after_miss:
            raise CouplingInvariantError(
                f"covered target reappeared: before={elements}, removed={outcome.removed}"
            )
        counts[after_miss & drop_j] += 1
    tv = 0.0
    for key in exact.keys() | counts.keys():
        tv += abs(counts.get(key, 0) / samples - exact.get(key, 0.0))
    return 0.5 * tv
