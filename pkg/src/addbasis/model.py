"""Experiment configurations, random-set sampling, and threshold/limit formulas.

A model fixes the ground set ({0,...,n} truncated, {0,...,n-1} modular), the
basis order k, the window parameter alpha, and the sampling scheme (independent
Bernoulli(p) inclusion, or a uniformly random subset of fixed size m).  The
threshold evaluations use natural logarithms throughout; the limiting-probability
constants only come out right in base e.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from .errors import ThresholdRangeError, ValidationError

# Slack for turning alpha*n into integer window endpoints: float rounding on
# alpha*n is below 1e-9 absolute for every n this package targets (n <= 1e9).
_ENDPOINT_EPS = 1e-9


class Mode(Enum):
    TRUNCATED = "truncated"
    MODULAR = "modular"


@dataclass(frozen=True)
class Bernoulli:
    """Each ground-set integer is included independently with probability p."""


@dataclass(frozen=True)
class FixedSize:
    """A uniformly random subset of exactly m ground-set integers."""

    m: int


Sampling = Union[Bernoulli, FixedSize]


@dataclass(frozen=True)
class GroundSet:
    """The pool of candidate integers: {0,...,n} or, modularly, {0,...,n-1}."""

    n: int
    modular: bool

    @property
    def size(self) -> int:
        return self.n if self.modular else self.n + 1

    @property
    def max_element(self) -> int:
        return self.n - 1 if self.modular else self.n

    def __contains__(self, x: int) -> bool:
        return 0 <= x <= self.max_element


@dataclass(frozen=True)
class SampledSet:
    """A sorted duplicate-free set of chosen integers from a ground set."""

    elements: tuple[int, ...]
    ground: GroundSet

    def __post_init__(self):
        prev = -1
        mx = self.ground.max_element
        for x in self.elements:
            if x <= prev:
                raise ValidationError(f"elements must be strictly increasing, got {x} after {prev}")
            if x > mx:
                raise ValidationError(f"element {x} outside ground set [0, {mx}]")
            prev = x

    def __len__(self) -> int:
        return len(self.elements)


@dataclass(frozen=True)
class Model:
    """Validated experiment configuration."""

    n: int
    k: int
    alpha: float
    p: float
    mode: Mode
    sampling: Sampling

    def __post_init__(self):
        if self.k < 2:
            raise ValidationError(f"k must be >= 2, got {self.k}")
        if self.n < self.k:
            raise ValidationError(f"n must be >= k, got n={self.n}, k={self.k}")
        if self.mode is Mode.TRUNCATED and not 0.0 < self.alpha < 1.0:
            raise ValidationError(f"alpha out of (0,1): {self.alpha}")
        if not 0.0 <= self.p <= 1.0:
            raise ValidationError(f"p out of [0,1]: {self.p}")
        if isinstance(self.sampling, FixedSize):
            if self.sampling.m < 0:
                raise ValidationError(f"fixed size must be non-negative, got {self.sampling.m}")
            if self.sampling.m > self.ground.size:
                raise ValidationError(
                    f"fixed size exceeds ground set of {self.ground.size}"
                )

    @property
    def ground(self) -> GroundSet:
        return GroundSet(self.n, modular=self.mode is Mode.MODULAR)

    @property
    def window(self) -> tuple[int, int]:
        """Inclusive target window: [ceil(alpha n), floor((k-alpha) n)] or all residues."""
        if self.mode is Mode.MODULAR:
            return (0, self.n - 1)
        return window_bounds(self.n, self.k, self.alpha)


def window_bounds(n: int, k: int, alpha: float) -> tuple[int, int]:
    """Integer endpoints of the truncated window [ceil(alpha n), floor((k-alpha) n)]."""
    lo = math.ceil(alpha * n - _ENDPOINT_EPS)
    hi = math.floor((k - alpha) * n + _ENDPOINT_EPS)
    return lo, hi


def make_model(n: int, k: int, alpha: float, p: float, mode: Mode, sampling: Sampling) -> Model:
    """Validate parameters and build a Model; raises ValidationError naming the bad field."""
    return Model(n=n, k=k, alpha=alpha, p=p, mode=mode, sampling=sampling)


def sample_bernoulli(model: Model, rng: np.random.Generator) -> SampledSet:
    """Include each ground-set integer independently with probability model.p."""
    if not isinstance(model.sampling, Bernoulli):
        raise ValidationError("model.sampling is not Bernoulli")
    g = model.ground
    chosen = np.flatnonzero(rng.random(g.size) < model.p)
    return SampledSet(tuple(chosen.tolist()), g)


def sample_fixed_size(model: Model, rng: np.random.Generator) -> SampledSet:
    """Draw a uniformly random m-subset of the ground set."""
    if not isinstance(model.sampling, FixedSize):
        raise ValidationError("model.sampling is not FixedSize")
    g = model.ground
    m = model.sampling.m
    chosen = np.sort(rng.choice(g.size, size=m, replace=False))
    return SampledSet(tuple(chosen.tolist()), g)


def sample_set(model: Model, rng: np.random.Generator) -> SampledSet:
    """Dispatch to the model's sampling scheme."""
    if isinstance(model.sampling, Bernoulli):
        return sample_bernoulli(model, rng)
    return sample_fixed_size(model, rng)


def threshold_constant(k: int, alpha: float, mode: Mode) -> float:
    """The constant K inside the threshold radicand: k!(k-1)!/alpha^(k-1), or k! modularly."""
    if mode is Mode.MODULAR:
        return float(math.factorial(k))
    return math.factorial(k) * math.factorial(k - 1) / alpha ** (k - 1)


@dataclass(frozen=True)
class ThresholdSpec:
    """Shift a_n plus the mode constant K; evaluates the threshold probability at n."""

    a_n: float
    big_k: float
    k: int
    mode: Mode

    def __post_init__(self):
        if not self.big_k > 0:
            raise ValidationError(f"threshold constant K must be positive, got {self.big_k}")

    def p_at(self, n: int) -> float:
        if n < 3:
            raise ValidationError(f"threshold needs n >= 3 (log log n > 0), got {n}")
        log_n = math.log(n)
        if self.mode is Mode.MODULAR:
            radicand = self.big_k * log_n + self.a_n
        else:
            radicand = self.big_k * (log_n - math.log(log_n)) + self.a_n
        if radicand <= 0.0:
            raise ThresholdRangeError(
                f"below expressible threshold: radicand {radicand:.6g} <= 0 at n={n}"
            )
        # p = (radicand / n^(k-1))^(1/k), evaluated in log space and clamped to [0,1].
        log_p = (math.log(radicand) - (self.k - 1) * log_n) / self.k
        return min(1.0, math.exp(log_p))


def threshold_spec(k: int, alpha: float, a_n: float, mode: Mode) -> ThresholdSpec:
    return ThresholdSpec(a_n=a_n, big_k=threshold_constant(k, alpha, mode), k=k, mode=mode)


def threshold_p(n: int, k: int, alpha: float, a_n: float, mode: Mode) -> float:
    """Mode-appropriate threshold probability at ground-set bound n.

    Truncated: p = ((K log n - K log log n + a_n)/n^(k-1))^(1/k) with
    K = k!(k-1)!/alpha^(k-1) (for k=2 this is the familiar
    sqrt(((2/alpha)(log n - log log n) + a_n)/n)).  Modular drops the
    log log term and uses K = k!.
    """
    return threshold_spec(k, alpha, a_n, mode).p_at(n)


def limit_basis_prob(k: int, alpha: float, a: float, mode: Mode) -> float:
    """Limiting probability that the sampled set is a basis when the shift tends to a.

    Truncated: exp(-(2 alpha/(k-1)) e^(-a/K)); modular: exp(-e^(-a/k!)).
    """
    if mode is Mode.MODULAR:
        return math.exp(-math.exp(-a / math.factorial(k)))
    big_k = threshold_constant(k, alpha, mode)
    return math.exp(-(2.0 * alpha / (k - 1)) * math.exp(-a / big_k))
