"""k-fold sumsets as word-packed bit vectors.

The kernel iterates S_{i+1} = { s + a : s in S_i, a in A } as shift-OR passes
over one big integer, so a pass over a set of size m costs m shifted ORs of a
(k n)-bit vector.  At threshold densities m is around n^(1/k) polylog(n), which
keeps this comfortably cheap at desk scale without any transform machinery.
gmpy2 integers back the hot loop; the public bitmap type stores a plain int.
"""

from __future__ import annotations

from dataclasses import dataclass

import gmpy2

from .errors import ValidationError
from .model import Mode, Model, SampledSet


@dataclass(frozen=True)
class SumBitmap:
    """Presence bit vector of achievable k-sums.

    Bit j is set iff j is a sum (mod n when modular) of k elements of the
    source set, repetition allowed.  Length is k*n+1 over the plain range,
    n over residues.
    """

    bits: int
    k: int
    n: int
    modular: bool

    @property
    def length(self) -> int:
        return self.n if self.modular else self.k * self.n + 1

    def test(self, i: int) -> bool:
        if not 0 <= i < self.length:
            raise ValidationError(f"index {i} outside bitmap domain [0, {self.length - 1}]")
        return bool((self.bits >> i) & 1)

    def to_indices(self) -> tuple[int, ...]:
        """All set positions, ascending (small instances / tests)."""
        out = []
        b = self.bits
        while b:
            low = b & -b
            out.append(low.bit_length() - 1)
            b ^= low
        return tuple(out)


@dataclass(frozen=True)
class MissingReport:
    """Count and sorted list of window targets absent from a sum bitmap."""

    x: int
    missing: tuple[int, ...]
    window: tuple[int, int]


def _mask_from_elements(elements, nbits: int) -> gmpy2.mpz:
    m = gmpy2.mpz(0)
    for e in elements:
        m |= gmpy2.mpz(1) << e
    return m


def _kfold_bits(elements, k: int, n: int) -> gmpy2.mpz:
    """Shift-OR kernel over [0, kn]; elements must lie in [0, n]."""
    s = _mask_from_elements(elements, n + 1)
    for _ in range(k - 1):
        acc = gmpy2.mpz(0)
        for e in elements:
            acc |= s << e
        s = acc
    return s


def _kfold_modular_bits(elements, k: int, n: int) -> gmpy2.mpz:
    """Rotate-OR kernel over residues mod n; elements must lie in [0, n-1]."""
    mask = (gmpy2.mpz(1) << n) - 1
    s = _mask_from_elements(elements, n)
    for _ in range(k - 1):
        acc = gmpy2.mpz(0)
        for e in elements:
            acc |= ((s << e) | (s >> (n - e))) & mask
        s = acc
    return s


def kfold_sumset(sampled: SampledSet, k: int, n: int) -> SumBitmap:
    """Bitmap of all k-fold sums (with repetition) of the sampled set."""
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if sampled.elements and sampled.elements[-1] > n:
        raise ValidationError(f"element {sampled.elements[-1]} exceeds ground bound {n}")
    return SumBitmap(bits=int(_kfold_bits(sampled.elements, k, n)), k=k, n=n, modular=False)


def kfold_modular_sumset(sampled: SampledSet, k: int, n: int) -> SumBitmap:
    """Bitmap of all k-fold sums mod n of the sampled set."""
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if sampled.elements and sampled.elements[-1] >= n:
        raise ValidationError(f"element {sampled.elements[-1]} outside residues mod {n}")
    return SumBitmap(bits=int(_kfold_modular_bits(sampled.elements, k, n)), k=k, n=n, modular=True)


def missing_in_window(bitmap: SumBitmap, lo: int, hi: int) -> MissingReport:
    """Count X and list the unset positions of the bitmap inside [lo, hi]."""
    if lo > hi:
        raise ValidationError(f"empty window: lo={lo} > hi={hi}")
    if lo < 0 or hi >= bitmap.length:
        raise ValidationError(f"window [{lo}, {hi}] outside bitmap domain [0, {bitmap.length - 1}]")
    width = hi - lo + 1
    gaps = (~bitmap.bits >> lo) & ((1 << width) - 1)
    x = gaps.bit_count()
    missing = []
    while gaps:
        low = gaps & -gaps
        missing.append(lo + low.bit_length() - 1)
        gaps ^= low
    return MissingReport(x=x, missing=tuple(missing), window=(lo, hi))


def count_missing_in_window(bits, lo: int, hi: int) -> int:
    """Missing-target count only; `bits` may be int or mpz (hot-loop variant)."""
    width = hi - lo + 1
    covered = gmpy2.popcount((gmpy2.mpz(bits) >> lo) & ((gmpy2.mpz(1) << width) - 1))
    return width - covered


def is_basis(sampled: SampledSet, model: Model) -> bool:
    """True iff every window target (every residue, modularly) is a k-sum of the set."""
    lo, hi = model.window
    if model.mode is Mode.MODULAR:
        bits = _kfold_modular_bits(sampled.elements, model.k, model.n)
    else:
        bits = _kfold_bits(sampled.elements, model.k, model.n)
    return count_missing_in_window(bits, lo, hi) == 0
