"""Monte Carlo engine: independent trials, basis-probability estimates, and
parameter sweeps along the threshold curve.

Trial t of a run draws its generator from (seed, t) by a counter-keyed spawn,
so results are bit-identical for any worker count or execution order; merging
partial histograms is plain integer addition.  The histogram of the missing
count X stays sparse because X concentrates near small values at threshold.
"""

from __future__ import annotations

import math
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional

import gmpy2
import numpy as np

from .analytics import PoissonModel, asympt_mean_missing, exact_mean_missing_k2
from .errors import AddBasisError, ResourceLimitError, ValidationError
from .model import (
    Bernoulli,
    Mode,
    Model,
    limit_basis_prob,
    make_model,
    sample_set,
    threshold_p,
)
from .sumset import _kfold_bits, _kfold_modular_bits

_WILSON_Z = 1.959963984540054  # two-sided 95% normal quantile

WORKERS_ENV = "ADDBASIS_WORKERS"
BITMAP_CAP_ENV = "ADDBASIS_MAX_BITMAP_BITS"
_DEFAULT_BITMAP_CAP = 1 << 31


@dataclass(frozen=True)
class TrialStats:
    """Histogram of the missing count X over independent trials."""

    trials: int
    basis_successes: int
    x_histogram: dict[int, int]
    mean_x: float
    seed: int


@dataclass(frozen=True)
class SweepPoint:
    """One grid point of a threshold sweep."""

    n: int
    k: int
    alpha: float
    a_n: float
    mode: Mode


@dataclass(frozen=True)
class SweepRow:
    """Result record for one sweep grid point; `error` set means the row failed."""

    n: int
    k: int
    alpha: float
    a_n: float
    p: Optional[float]
    mode: str
    trials: int
    basis_prob_hat: Optional[float]
    ci_lo: Optional[float]
    ci_hi: Optional[float]
    exact_lambda: Optional[float]
    asympt_lambda: Optional[float]
    limit_prob: Optional[float]
    tv_hat: Optional[float]
    seed: int
    error: Optional[str] = None


def trial_rng(seed: int, t: int) -> np.random.Generator:
    """Generator for trial t: a counter-keyed spawn of the master seed."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(t,)))


def _bitmap_bits(model: Model) -> int:
    return model.n if model.mode is Mode.MODULAR else model.k * model.n + 1


def _run_range(model: Model, seed: int, t0: int, t1: int) -> Counter:
    lo, hi = model.window
    width = hi - lo + 1
    window_mask = (gmpy2.mpz(1) << width) - 1
    modular = model.mode is Mode.MODULAR
    hist: Counter[int] = Counter()
    for t in range(t0, t1):
        rng = trial_rng(seed, t)
        sampled = sample_set(model, rng)
        if modular:
            bits = _kfold_modular_bits(sampled.elements, model.k, model.n)
        else:
            bits = _kfold_bits(sampled.elements, model.k, model.n)
        x = width - gmpy2.popcount((bits >> lo) & window_mask)
        hist[x] += 1
    return hist


def run_trials(model: Model, trials: int, seed: int,
               workers: Optional[int] = None) -> TrialStats:
    """Run independent trials; deterministic in (model, trials, seed) for any worker count."""
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    cap = int(os.environ.get(BITMAP_CAP_ENV, _DEFAULT_BITMAP_CAP))
    need = _bitmap_bits(model)
    if need > cap:
        raise ResourceLimitError(f"sum bitmap needs {need} bits, over the cap of {cap}")
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    if workers <= 1 or trials == 1:
        hist = _run_range(model, seed, 0, trials)
    else:
        workers = min(workers, trials)
        bounds = [round(i * trials / workers) for i in range(workers + 1)]
        hist = Counter()
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_run_range, model, seed, bounds[i], bounds[i + 1])
                for i in range(workers)
            ]
            for fut in futures:
                hist.update(fut.result())
    mean_x = sum(v * c for v, c in hist.items()) / trials
    return TrialStats(
        trials=trials,
        basis_successes=hist.get(0, 0),
        x_histogram=dict(sorted(hist.items())),
        mean_x=mean_x,
        seed=seed,
    )


def estimate_basis_prob(stats: TrialStats) -> tuple[float, float, float]:
    """(p_hat, ci_lo, ci_hi): point estimate with 95% Wilson score interval."""
    n = stats.trials
    p_hat = stats.basis_successes / n
    z2 = _WILSON_Z * _WILSON_Z
    denom = 1.0 + z2 / n
    center = (p_hat + z2 / (2.0 * n)) / denom
    half = _WILSON_Z * math.sqrt(p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)) / denom
    return p_hat, max(0.0, center - half), min(1.0, center + half)


def tv_empirical_poisson(stats: TrialStats, lam: float) -> float:
    """Total-variation distance between the empirical law of X and Poisson(lam).

    The Poisson mass beyond the histogram support enters exactly, not by
    truncation: tail values all have empirical frequency zero.
    """
    pm = PoissonModel(lam)
    max_v = max(stats.x_histogram) if stats.x_histogram else 0
    diff = 0.0
    cdf = 0.0
    term = pm.pmf(0)
    for v in range(max_v + 1):
        if v > 0:
            term = term * lam / v
        cdf += term
        diff += abs(stats.x_histogram.get(v, 0) / stats.trials - term)
    tail = max(0.0, 1.0 - cdf)
    return 0.5 * (diff + tail)


def _row_seed(seed: int, index: int) -> int:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return int(ss.generate_state(1, np.uint64)[0])


def sweep(points: Iterable[SweepPoint], trials: int, seed: int,
          with_tv: bool = False, workers: Optional[int] = None) -> list[SweepRow]:
    """Run the grid at its threshold probabilities; per-point failures become
    error rows instead of aborting the sweep."""
    rows = []
    for index, pt in enumerate(points):
        row_seed = _row_seed(seed, index)
        mode_name = pt.mode.value
        try:
            p = threshold_p(pt.n, pt.k, pt.alpha, pt.a_n, pt.mode)
            model = make_model(pt.n, pt.k, pt.alpha, p, pt.mode, Bernoulli())
            stats = run_trials(model, trials, row_seed, workers=workers)
            p_hat, ci_lo, ci_hi = estimate_basis_prob(stats)
            exact_lam = (
                exact_mean_missing_k2(pt.n, p, pt.alpha, pt.mode) if pt.k == 2 else None
            )
            asympt_lam = asympt_mean_missing(pt.n, p, pt.alpha, pt.k, pt.mode)
            limit = limit_basis_prob(pt.k, pt.alpha, pt.a_n, pt.mode)
            tv = None
            if with_tv:
                tv = tv_empirical_poisson(
                    stats, exact_lam if exact_lam is not None else asympt_lam
                )
            rows.append(SweepRow(
                n=pt.n, k=pt.k, alpha=pt.alpha, a_n=pt.a_n, p=p, mode=mode_name,
                trials=trials, basis_prob_hat=p_hat, ci_lo=ci_lo, ci_hi=ci_hi,
                exact_lambda=exact_lam, asympt_lambda=asympt_lam, limit_prob=limit,
                tv_hat=tv, seed=row_seed,
            ))
        except AddBasisError as exc:
            rows.append(SweepRow(
                n=pt.n, k=pt.k, alpha=pt.alpha, a_n=pt.a_n, p=None, mode=mode_name,
                trials=trials, basis_prob_hat=None, ci_lo=None, ci_hi=None,
                exact_lambda=None, asympt_lambda=None, limit_prob=None,
                tv_hat=None, seed=row_seed, error=str(exc),
            ))
    return rows
