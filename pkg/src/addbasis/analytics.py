"""Closed-form and asymptotic quantities for missing-target counts.

For k=2 the per-target probabilities are exact: the unordered pairs {x, j-x}
are pairwise disjoint, so P(target j uncovered) factors into (1-p^2) per fully
available off-diagonal pair and (1-p) for the diagonal element when j is even.
For general k only the leading-order mean and a product lower bound (via the
correlation inequality for monotone events) are available here; exactness
would need inclusion-exclusion over overlapping representations.

Products of many (1-p^d) factors are evaluated in log space, sums with
compensated summation, so the formulas stay usable out to n ~ 10^7.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.integrate import quad

from .counting import count_by_distinct
from .errors import ValidationError
from .model import Mode, window_bounds


@dataclass(frozen=True)
class PoissonModel:
    """Poisson law with mean lam; the reference law for the missing count."""

    lam: float

    def __post_init__(self):
        if not self.lam >= 0.0:
            raise ValidationError(f"lambda must be non-negative, got {self.lam}")

    def pmf(self, v: int) -> float:
        if v < 0:
            return 0.0
        if self.lam == 0.0:
            return 1.0 if v == 0 else 0.0
        return math.exp(-self.lam + v * math.log(self.lam) - math.lgamma(v + 1))

    def truncated_support(self, tail_eps: float = 1e-12) -> tuple[int, list[float]]:
        """Smallest V with P(Y > V) < tail_eps, plus the pmf values on 0..V."""
        masses = [self.pmf(0)]
        total = masses[0]
        v = 0
        while 1.0 - total >= tail_eps:
            v += 1
            masses.append(masses[-1] * self.lam / v)
            total += masses[-1]
        return v, masses

    def tail_beyond(self, v: int) -> float:
        """P(Y > v), by direct summation of the pmf."""
        total = 0.0
        term = self.pmf(0)
        for i in range(v + 1):
            if i > 0:
                term = term * self.lam / i
            total += term
        return max(0.0, 1.0 - total)


@dataclass(frozen=True)
class SteinChenDiagnostics:
    """Total-variation bound pieces for the k=2 truncated missing count.

    sigma1/sigma2 sum the per-target coupling-disagreement bounds over the whole
    window (an upper bound for the max over targets, since the summand does not
    depend on the conditioning target); c_p is the per-pair removal bound
    2p + 2p^3 + p^2; tv_bound = sigma1 + sigma2 + max_term.
    """

    c_p: float
    sigma1: float
    sigma2: float
    max_term: float
    tv_bound: float


def _pair_counts_k2(j: int, n: int) -> tuple[int, int]:
    """(#off-diagonal pairs {x, j-x} within [0,n], diagonal indicator) for target j."""
    x_min = max(0, j - n)
    c_off = max(0, (j + 1) // 2 - x_min)
    diag = 1 if j % 2 == 0 else 0
    return c_off, diag


def exact_missing_prob_k2(j: int, n: int, p: float, mode: Mode) -> float:
    """Exact P(target j has no 2-sum representation) under Bernoulli(p) sampling."""
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"p out of [0,1]: {p}")
    if mode is Mode.MODULAR:
        if not 0 <= j < n:
            raise ValidationError(f"residue {j} outside [0, {n - 1}]")
        # t = #solutions of 2x = j (mod n); solvable classes each need one element.
        if n % 2 == 1:
            t = 1
        else:
            t = 2 if j % 2 == 0 else 0
        c_off = (n - t) // 2
        diag = t
    else:
        if not 0 <= j <= 2 * n:
            raise ValidationError(f"target {j} outside [0, {2 * n}]")
        c_off, diag = _pair_counts_k2(j, n)
    if p == 1.0:
        return 1.0 if (c_off == 0 and diag == 0) else 0.0
    return math.exp(c_off * math.log1p(-p * p) + diag * math.log1p(-p))


def exact_mean_missing_k2(n: int, p: float, alpha: float, mode: Mode) -> float:
    """Exact E(X) for k=2: sum of exact missing probabilities over the window."""
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"p out of [0,1]: {p}")
    if mode is Mode.MODULAR:
        if n % 2 == 1:
            counts = [((n - 1) // 2, 1, n)]
        else:
            counts = [((n - 2) // 2, 2, n // 2), (n // 2, 0, n // 2)]
        if p == 1.0:
            return 0.0
        l2, l1 = math.log1p(-p * p), math.log1p(-p)
        return math.fsum(mult * math.exp(c * l2 + d * l1) for c, d, mult in counts)
    lo, hi = window_bounds(n, 2, alpha)
    if p == 1.0:
        return 0.0
    if p == 0.0:
        return float(hi - lo + 1)
    js = np.arange(lo, hi + 1, dtype=np.int64)
    x_min = np.maximum(0, js - n)
    c_off = np.maximum(0, (js + 1) // 2 - x_min)
    diag = (js % 2 == 0).astype(np.int64)
    terms = np.exp(c_off * math.log1p(-p * p) + diag * math.log1p(-p))
    return math.fsum(terms.tolist())


def asympt_mean_missing(n: int, p: float, alpha: float, k: int, mode: Mode) -> float:
    """Leading-order E(X).

    Truncated: (2 (k-2)! k! / (alpha^(k-2) n^(k-2) p^k)) *
               exp(-alpha^(k-1) n^(k-1) p^k / ((k-1)! k!));
    for k=2 this is (4/p^2) exp(-n p^2 alpha / 2).  Modular (any k):
    n exp(-n^(k-1) p^k / k!).
    """
    if p <= 0.0:
        raise ValidationError(f"asymptotic mean is singular at p={p}")
    if k < 2:
        raise ValidationError(f"k must be >= 2, got {k}")
    log_pk = k * math.log(p)
    if mode is Mode.MODULAR:
        return n * math.exp(-math.exp((k - 1) * math.log(n) + log_pk) / math.factorial(k))
    decay = (
        alpha ** (k - 1)
        * math.exp((k - 1) * math.log(n) + log_pk)
        / (math.factorial(k - 1) * math.factorial(k))
    )
    prefactor = (
        2.0
        * math.factorial(k - 2)
        * math.factorial(k)
        / (alpha ** (k - 2) * math.exp((k - 2) * math.log(n) + log_pk))
    )
    return prefactor * math.exp(-decay)


def janson_lower_missing_prob(j: int, k: int, n: int, p: float) -> float:
    """Product lower bound on P(target j uncovered): prod_d (1-p^d)^(c_d(j)).

    Each representation multiset with d distinct values is fully available with
    probability p^d; the product over all representations lower-bounds the
    probability that none is available (the events are positively correlated).
    """
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"p out of [0,1]: {p}")
    counts = count_by_distinct(j, k, n).by_distinct
    if p == 1.0:
        return 1.0 if all(c == 0 for c in counts) else 0.0
    log_prob = 0.0
    for d, c in enumerate(counts, start=1):
        if c:
            log_prob += float(c) * math.log1p(-(p**d))
    return math.exp(log_prob)


class PsiTail(NamedTuple):
    quadrature: float
    upper: float


def psi_tail(t: float, k: int, c: float, rel_tol: float = 1e-8) -> PsiTail:
    """Tail integral of exp(-c x^(k-1)) on [t, inf) plus its closed-form upper bound.

    quadrature: adaptive integration on [t, T], doubling T until the remaining
    tail is provably below tolerance using the same bound applied at T;
    upper: exp(-c t^(k-1)) / (c (k-1) t^(k-2)), which always dominates.
    """
    if k < 3:
        raise ValidationError(f"tail bound needs k >= 3, got {k}")
    if t <= 0 or c <= 0:
        raise ValidationError(f"t and c must be positive, got t={t}, c={c}")

    def bound_at(x: float) -> float:
        return math.exp(-c * x ** (k - 1)) / (c * (k - 1) * x ** (k - 2))

    def integrand(x: float) -> float:
        return math.exp(-c * x ** (k - 1))

    total = 0.0
    left, right = t, 2.0 * t
    while True:
        seg, _ = quad(integrand, left, right, epsabs=0.0, epsrel=rel_tol / 10.0, limit=200)
        total += seg
        if bound_at(right) <= rel_tol * total:
            break
        left, right = right, 2.0 * right
    return PsiTail(quadrature=total, upper=bound_at(t))


def stein_chen_c_p(p: float) -> float:
    """Per-pair removal-probability bound 2p + 2p^3 + p^2 from the k=2 coupling."""
    return 2.0 * p + 2.0 * p**3 + p**2


def stein_chen_diagnostics(n: int, p: float, alpha: float) -> SteinChenDiagnostics:
    """Total-variation bound pieces for the truncated k=2 missing count.

    With f(i) = ceil((i+1)/2) pairs available to target i:
      sigma1 = sum_i (1-p) [ (1-p^2+p^2 c_p)^(f(i)-1) - (1-p^2)^(f(i)-1) ]
      sigma2 = c_p p sum_i (1-p^2+c_p p^2)^(f(i)-1)
      max_term = exact missing probability at the left window edge.
    """
    if not 0.0 < p < 1.0:
        raise ValidationError(f"p must be in (0,1), got {p}")
    c_p = stein_chen_c_p(p)
    lo, hi = window_bounds(n, 2, alpha)
    i_vals = np.arange(lo, hi + 1, dtype=np.int64)
    m = (i_vals + 2) // 2 - 1  # f(i) - 1
    log_b1 = math.log1p(-p * p + c_p * p * p)
    log_b2 = math.log1p(-p * p)
    pow_b1 = np.exp(m * log_b1)
    sigma1 = (1.0 - p) * float((pow_b1 - np.exp(m * log_b2)).sum())
    sigma2 = c_p * p * float(pow_b1.sum())
    max_term = exact_missing_prob_k2(lo, n, p, Mode.TRUNCATED)
    return SteinChenDiagnostics(
        c_p=c_p,
        sigma1=sigma1,
        sigma2=sigma2,
        max_term=max_term,
        tv_bound=sigma1 + sigma2 + max_term,
    )
