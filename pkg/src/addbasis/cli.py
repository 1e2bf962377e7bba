"""Command-line surface: simulation, exact analytics, counting, coupling
verification, Stein-Chen diagnostics, and threshold sweeps, emitted as CSV or
JSON tables.

Every subcommand accepts --seed (default DEFAULT_SEED) and is fully
reproducible: same invocation, byte-identical output.  Row-shaped reports use
the fixed column order

    n,k,alpha,a_n,p,mode,trials,basis_prob_hat,ci_lo,ci_hi,
    exact_lambda,asympt_lambda,limit_prob,tv_hat,seed

plus a trailing `error` column for per-row failures.  Numbers are rendered
with 17 significant digits; missing values are empty CSV cells / JSON nulls.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from itertools import product
from typing import Optional

from . import analytics, coupling, counting, experiments
from .errors import AddBasisError, ResourceLimitError, ValidationError
from .model import Bernoulli, FixedSize, Mode, Sampling, limit_basis_prob, make_model
from .experiments import SweepPoint, SweepRow

DEFAULT_SEED = 271828

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RESOURCE = 3
EXIT_IO = 4

ROW_COLUMNS = (
    "n", "k", "alpha", "a_n", "p", "mode", "trials", "basis_prob_hat",
    "ci_lo", "ci_hi", "exact_lambda", "asympt_lambda", "limit_prob",
    "tv_hat", "seed", "error",
)
_INT_COLUMNS = {"n", "k", "trials", "seed", "j", "samples", "coefficient", "total"}
_STR_COLUMNS = {"mode", "error", "note"}


@dataclass(frozen=True)
class RunConfig:
    """Parsed invocation; exactly one subcommand."""

    subcommand: str
    n_values: tuple[int, ...] = ()
    k: int = 2
    alpha: float = 0.5
    p_values: tuple[float, ...] = ()
    a_values: tuple[float, ...] = ()
    mode: Mode = Mode.TRUNCATED
    sampling: Sampling = field(default_factory=Bernoulli)
    trials: int = 100
    seed: int = DEFAULT_SEED
    samples: int = 100000
    j: Optional[int] = None
    delta: float = 1.0
    with_tv: bool = False
    out_format: str = "csv"
    out_path: Optional[str] = None
    workers: Optional[int] = None


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _render(value) -> Optional[str]:
    """17-significant-digit text for numbers; None for missing/NaN."""
    if value is None:
        return None
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            return None
        return f"{value:.17g}"
    return str(value)


def serialize(records: list[dict], fmt: str, columns: Optional[tuple[str, ...]] = None) -> bytes:
    """Encode records as CSV (header + rows, LF) or a JSON array of objects."""
    if columns is None:
        columns = tuple(records[0].keys()) if records else ()
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for rec in records:
            writer.writerow(["" if (v := _render(rec.get(c))) is None else v for c in columns])
        return buf.getvalue().encode("utf-8")
    if fmt == "json":
        lines = []
        for rec in records:
            parts = []
            for c in columns:
                v = rec.get(c)
                rendered = _render(v)
                if rendered is None:
                    parts.append(f"{json.dumps(c)}: null")
                elif isinstance(v, str):
                    parts.append(f"{json.dumps(c)}: {json.dumps(v)}")
                else:
                    parts.append(f"{json.dumps(c)}: {rendered}")
            lines.append("  {" + ", ".join(parts) + "}")
        return ("[\n" + ",\n".join(lines) + "\n]\n" if lines else "[]\n").encode("utf-8")
    raise ValidationError(f"unknown output format: {fmt}")


def _coerce(column: str, raw) -> object:
    if raw is None:
        return None
    if column in _STR_COLUMNS:
        return str(raw)
    if column in _INT_COLUMNS:
        return int(raw)
    return float(raw)


def deserialize(data: bytes, fmt: str) -> list[dict]:
    """Inverse of serialize, with per-column type coercion."""
    text = data.decode("utf-8")
    if fmt == "csv":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            return []
        header = rows[0]
        return [
            {c: _coerce(c, cell if cell != "" else None) for c, cell in zip(header, row)}
            for row in rows[1:]
        ]
    if fmt == "json":
        return [
            {c: _coerce(c, v) for c, v in rec.items()}
            for rec in json.loads(text)
        ]
    raise ValidationError(f"unknown output format: {fmt}")


def row_to_record(row: SweepRow) -> dict:
    return {c: getattr(row, c) for c in ROW_COLUMNS}


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------

def _one(values: tuple, flag: str):
    if len(values) != 1:
        raise ValidationError(f"{flag} expects exactly one value, got {len(values)}")
    return values[0]


def _simulate(cfg: RunConfig) -> tuple[list[dict], tuple[str, ...]]:
    n = _one(cfg.n_values, "--n")
    p = _one(cfg.p_values, "--p")
    model = make_model(n, cfg.k, cfg.alpha, p, cfg.mode, cfg.sampling)
    stats = experiments.run_trials(model, cfg.trials, cfg.seed, workers=cfg.workers)
    p_hat, ci_lo, ci_hi = experiments.estimate_basis_prob(stats)
    exact_lam = (
        analytics.exact_mean_missing_k2(n, p, cfg.alpha, cfg.mode) if cfg.k == 2 else None
    )
    asympt_lam = analytics.asympt_mean_missing(n, p, cfg.alpha, cfg.k, cfg.mode) if p > 0 else None
    tv = None
    if cfg.with_tv and exact_lam is not None:
        tv = experiments.tv_empirical_poisson(stats, exact_lam)
    rec = {
        "n": n, "k": cfg.k, "alpha": cfg.alpha, "a_n": None, "p": p,
        "mode": cfg.mode.value, "trials": cfg.trials, "basis_prob_hat": p_hat,
        "ci_lo": ci_lo, "ci_hi": ci_hi, "exact_lambda": exact_lam,
        "asympt_lambda": asympt_lam, "limit_prob": None, "tv_hat": tv,
        "seed": cfg.seed, "error": None,
    }
    return [rec], ROW_COLUMNS


def _exact(cfg: RunConfig) -> tuple[list[dict], tuple[str, ...]]:
    n = _one(cfg.n_values, "--n")
    if not cfg.p_values:
        raise ValidationError("--p requires at least one value")
    a_n = cfg.a_values[0] if cfg.a_values else None
    records = []
    for p in cfg.p_values:
        exact_lam = (
            analytics.exact_mean_missing_k2(n, p, cfg.alpha, cfg.mode) if cfg.k == 2 else None
        )
        asympt_lam = (
            analytics.asympt_mean_missing(n, p, cfg.alpha, cfg.k, cfg.mode) if p > 0 else None
        )
        limit = limit_basis_prob(cfg.k, cfg.alpha, a_n, cfg.mode) if a_n is not None else None
        records.append({
            "n": n, "k": cfg.k, "alpha": cfg.alpha, "a_n": a_n, "p": p,
            "mode": cfg.mode.value, "trials": 0, "basis_prob_hat": None,
            "ci_lo": None, "ci_hi": None, "exact_lambda": exact_lam,
            "asympt_lambda": asympt_lam, "limit_prob": limit, "tv_hat": None,
            "seed": cfg.seed, "error": None,
        })
    return records, ROW_COLUMNS


def _sweep(cfg: RunConfig) -> tuple[list[dict], tuple[str, ...]]:
    if not cfg.n_values:
        raise ValidationError("--n requires at least one value")
    a_values = cfg.a_values if cfg.a_values else (0.0,)
    points = [
        SweepPoint(n=n, k=cfg.k, alpha=cfg.alpha, a_n=a, mode=cfg.mode)
        for n, a in product(cfg.n_values, a_values)
    ]
    rows = experiments.sweep(points, cfg.trials, cfg.seed,
                             with_tv=cfg.with_tv, workers=cfg.workers)
    for row in rows:
        print(f"sweep n={row.n} a_n={row.a_n} p={row.p} "
              f"p_hat={row.basis_prob_hat} error={row.error or ''}", file=sys.stderr)
    return [row_to_record(r) for r in rows], ROW_COLUMNS


def _counts(cfg: RunConfig) -> tuple[list[dict], tuple[str, ...]]:
    n = _one(cfg.n_values, "--n")
    if cfg.j is None:
        qb = counting.gaussian_binomial(n, cfg.k)
        records = [
            {"n": n, "k": cfg.k, "j": j, "coefficient": a}
            for j, a in enumerate(qb.coefficients)
        ]
        return records, ("n", "k", "j", "coefficient")
    tc = counting.count_by_distinct(cfg.j, cfg.k, n)
    rec = {"n": n, "k": cfg.k, "j": cfg.j, "total": tc.total}
    for d, c in enumerate(tc.by_distinct, start=1):
        rec[f"c_{d}"] = c
    return [rec], tuple(rec.keys())


def _couple(cfg: RunConfig) -> tuple[list[dict], tuple[str, ...]]:
    n = _one(cfg.n_values, "--n")
    p = _one(cfg.p_values, "--p")
    if cfg.j is None:
        raise ValidationError("--j is required for couple")
    rng = experiments.trial_rng(cfg.seed, 0)
    tv = coupling.coupling_tv_check(n, p, cfg.j, cfg.samples, rng)
    rec = {"n": n, "p": p, "j": cfg.j, "samples": cfg.samples,
           "tv_hat": tv, "seed": cfg.seed}
    return [rec], tuple(rec.keys())


_DIAG_NOTE = "sigma terms sum over the full window (upper bound for the max over targets)"


def _diagnose(cfg: RunConfig) -> tuple[list[dict], tuple[str, ...]]:
    if not cfg.n_values:
        raise ValidationError("--n requires at least one value")
    records = []
    for n in cfg.n_values:
        if cfg.p_values:
            p = _one(cfg.p_values, "--p")
        else:
            p = math.sqrt((1.0 / cfg.alpha + cfg.delta) * math.log(n) / n)
        diag = analytics.stein_chen_diagnostics(n, p, cfg.alpha)
        records.append({
            "n": n, "p": p, "alpha": cfg.alpha, "c_p": diag.c_p,
            "sigma1": diag.sigma1, "sigma2": diag.sigma2,
            "max_term": diag.max_term, "tv_bound": diag.tv_bound,
            "note": _DIAG_NOTE,
        })
    return records, ("n", "p", "alpha", "c_p", "sigma1", "sigma2",
                     "max_term", "tv_bound", "note")


_HANDLERS = {
    "simulate": _simulate,
    "exact": _exact,
    "sweep": _sweep,
    "counts": _counts,
    "couple": _couple,
    "diagnose": _diagnose,
}


def dispatch(cfg: RunConfig) -> tuple[int, bytes]:
    """Run the subcommand; returns (exit status, serialized report)."""
    records, columns = _HANDLERS[cfg.subcommand](cfg)
    return EXIT_OK, serialize(records, cfg.out_format, columns)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.split(",") if tok)


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split(",") if tok)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="addbasis",
        description="Random additive-basis simulation and exact analytics.",
    )
    parser.add_argument("--config", help="key=value file supplying flag defaults (flags win)")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(sp, with_p=False, with_a=False, with_trials=False):
        sp.add_argument("--n", type=_int_list, required=True,
                        help="ground-set bound(s), comma separated")
        sp.add_argument("--k", type=int, default=2)
        sp.add_argument("--alpha", type=float, default=0.5)
        sp.add_argument("--mode", choices=["truncated", "modular"], default="truncated")
        if with_p:
            sp.add_argument("--p", type=_float_list, default=(),
                            help="selection probability (comma list allowed)")
        if with_a:
            sp.add_argument("--a-n", dest="a_n", type=_float_list, default=(),
                            help="threshold shift(s) A_n, comma separated")
        if with_trials:
            sp.add_argument("--trials", type=int, default=100)
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED,
                        help=f"master seed (default {DEFAULT_SEED})")
        sp.add_argument("--format", dest="out_format", choices=["csv", "json"], default="csv")
        sp.add_argument("--output", dest="out_path", default=None)
        sp.add_argument("--workers", type=int, default=None)

    sp = sub.add_parser("simulate", help="Monte Carlo at an explicit p")
    common(sp, with_p=True, with_trials=True)
    sp.add_argument("--fixed-size", type=int, default=None,
                    help="use a uniformly random subset of this size instead of Bernoulli")
    sp.add_argument("--tv", dest="with_tv", action="store_true",
                    help="also report the TV distance to the fitted Poisson law")

    sp = sub.add_parser("exact", help="exact/asymptotic mean missing-count table")
    common(sp, with_p=True, with_a=True)

    sp = sub.add_parser("sweep", help="threshold sweep over an (n, a_n) grid")
    common(sp, with_a=True, with_trials=True)
    sp.add_argument("--tv", dest="with_tv", action="store_true")

    sp = sub.add_parser("counts", help="q-binomial coefficients / k-sum multiset counts")
    common(sp)
    sp.add_argument("--j", type=int, default=None,
                    help="dump by-distinct counts for one target sum instead of all coefficients")

    sp = sub.add_parser("couple", help="coupling total-variation check against the exact law")
    common(sp, with_p=True)
    sp.add_argument("--j", type=int, required=True)
    sp.add_argument("--samples", type=int, default=100000)

    sp = sub.add_parser("diagnose", help="Stein-Chen total-variation bound pieces")
    common(sp, with_p=True)
    sp.add_argument("--delta", type=float, default=1.0,
                    help="p = sqrt((1/alpha + delta) log n / n) when --p is absent")
    return parser


def _load_config_defaults(path: str) -> dict:
    defaults = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or "=" not in line:
                continue
            key, _, value = line.partition("=")
            defaults[key.strip().replace("-", "_")] = value.strip()
    return defaults


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    sampling: Sampling = Bernoulli()
    if getattr(args, "fixed_size", None) is not None:
        sampling = FixedSize(args.fixed_size)
    return RunConfig(
        subcommand=args.subcommand,
        n_values=args.n,
        k=args.k,
        alpha=args.alpha,
        p_values=getattr(args, "p", ()) or (),
        a_values=getattr(args, "a_n", ()) or (),
        mode=Mode(args.mode),
        sampling=sampling,
        trials=getattr(args, "trials", 100),
        seed=args.seed,
        samples=getattr(args, "samples", 100000),
        j=getattr(args, "j", None),
        delta=getattr(args, "delta", 1.0),
        with_tv=getattr(args, "with_tv", False),
        out_format=args.out_format,
        out_path=args.out_path,
        workers=args.workers,
    )


def _write_atomic(path: str, payload: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".addbasis-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _error_record(exc: Exception) -> str:
    return json.dumps({"error": type(exc).__name__, "message": str(exc)})


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    # a config file only supplies defaults; explicit flags win
    if "--config" in argv:
        idx = argv.index("--config")
        try:
            defaults = _load_config_defaults(argv[idx + 1])
        except OSError as exc:
            print(_error_record(exc), file=sys.stderr)
            return EXIT_IO
        for action in parser._subparsers._group_actions[0].choices.values():  # noqa: SLF001
            typed = {}
            for act in action._actions:  # noqa: SLF001
                if act.dest in defaults:
                    raw = defaults[act.dest]
                    typed[act.dest] = act.type(raw) if act.type is not None else raw
            action.set_defaults(**typed)
    try:
        args = parser.parse_args(argv)
        cfg = _config_from_args(args)
        status, payload = dispatch(cfg)
    except ResourceLimitError as exc:
        print(_error_record(exc), file=sys.stderr)
        return EXIT_RESOURCE
    except (ValidationError, AddBasisError, ValueError) as exc:
        print(_error_record(exc), file=sys.stderr)
        return EXIT_VALIDATION
    try:
        if cfg.out_path:
            _write_atomic(cfg.out_path, payload)
        else:
            sys.stdout.buffer.write(payload)
            sys.stdout.buffer.flush()
    except OSError as exc:
        print(_error_record(exc), file=sys.stderr)
        return EXIT_IO
    return status


if __name__ == "__main__":
    raise SystemExit(main())
