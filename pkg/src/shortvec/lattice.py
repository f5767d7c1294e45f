"""Unit-covolume lattices stored as a scaled integer lattice, and the exact
observables attached to their short vectors (lengths, ball volumes,
symmetrized angles)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np


class DegenerateBasisError(ValueError):
    pass


def bareiss_det(rows: Sequence[Sequence[int]]) -> int:
    """Exact determinant of a square integer matrix (fraction-free elimination)."""
    a = [list(map(int, r)) for r in rows]
    n = len(a)
    if any(len(r) != n for r in a):
        raise ValueError("matrix must be square")
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
            row_i[k] = 0
        prev = akk
    return sign * a[n - 1][n - 1] if n else 1


def integer_rank(rows: Sequence[Sequence[int]]) -> int:
    """Exact rank over Q of an integer matrix given as a list of rows."""
    a = [list(map(int, r)) for r in rows if any(r)]
    if not a:
        return 0
    ncols = len(a[0])
    rank = 0
    prev = 1
    for col in range(ncols):
        piv = next((i for i in range(rank, len(a)) if a[i][col] != 0), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        p = a[rank][col]
        for i in range(rank + 1, len(a)):
            f = a[i][col]
            a[i] = [(x * p - f * y) // prev for x, y in zip(a[i], a[rank])]
        prev = p
        rank += 1
        if rank == len(a):
            break
    return rank


def hermite_normal_form(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Row-style Hermite normal form of the lattice spanned by ``rows``.

    Returns the nonzero rows: upper triangular (echelon), positive pivots, and
    every entry above a pivot reduced into ``[0, pivot)``.  Two generating
    sets span the same lattice iff their HNFs are equal.
    """
    a = [list(map(int, r)) for r in rows]
    if not a:
        return []
    ncols = len(a[0])
    r = 0
    for col in range(ncols):
        # gcd-combine every row below r into row r on this column
        for i in range(r + 1, len(a)):
            if a[i][col] == 0:
                continue
            x, y = a[r][col], a[i][col]
            g, s, t = _xgcd(x, y)
            u, v = x // g, y // g
            ra, rb = a[r], a[i]
            a[r] = [s * p + t * q for p, q in zip(ra, rb)]
            a[i] = [u * q - v * p for p, q in zip(ra, rb)]
        if r < len(a) and a[r][col] != 0:
            if a[r][col] < 0:
                a[r] = [-x for x in a[r]]
            piv = a[r][col]
            for i in range(r):
                q = a[i][col] // piv
                if q:
                    a[i] = [x - q * y for x, y in zip(a[i], a[r])]
            r += 1
            if r == len(a):
                break
    return [row for row in a[:r]]


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        a, s0, t0 = -a, -s0, -t0
    return a, s0, t0


@dataclass(frozen=True)
class LatticeBasis:
    """Lattice ``scale * span_Z(rows)``; rows are exact Python integers."""

    rows: tuple[tuple[int, ...], ...]
    scale: float = 1.0

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise ValueError("basis must be a nonempty square matrix")
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    @classmethod
    def unit_covolume(cls, rows) -> "LatticeBasis":
        """Wrap integer rows with the scale that makes the covolume one."""
        det = abs(bareiss_det(rows))
        if det == 0:
            raise DegenerateBasisError("degenerate basis")
        n = len(rows)
        return cls(rows, math.exp(-math.log(det) / n))

    @property
    def dim(self) -> int:
        return len(self.rows)

    @cached_property
    def det(self) -> int:
        """Exact determinant of the unscaled integer rows."""
        return bareiss_det(self.rows)

    @cached_property
    def max_abs_entry(self) -> int:
        return max(abs(x) for r in self.rows for x in r)

    def as_int64(self) -> np.ndarray:
        """Rows as an int64 array (caller must check they fit)."""
        return np.array(self.rows, dtype=np.int64)

    def with_rows(self, rows) -> "LatticeBasis":
        return LatticeBasis(rows, self.scale)

    def rescaled(self, factor: float) -> "LatticeBasis":
        return LatticeBasis(self.rows, self.scale * factor)

    def log_scale(self) -> float:
        return math.log(self.scale)


@dataclass(frozen=True, order=True)
class LatticeVector:
    """Nonzero lattice vector in ambient integer coordinates, sign-canonical."""

    norm_sq: int
    coeffs: tuple[int, ...] = field(compare=True)

    def __post_init__(self):
        coeffs = tuple(int(x) for x in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if sum(c * c for c in coeffs) != self.norm_sq:
            raise ValueError("norm_sq does not match coeffs")

    @classmethod
    def from_coeffs(cls, coeffs, canonical: bool = True) -> "LatticeVector":
        c = [int(x) for x in coeffs]
        if canonical:
            c = canonical_sign(c)
        return cls(sum(x * x for x in c), tuple(c))

    @property
    def is_zero(self) -> bool:
        return self.norm_sq == 0

    def dot(self, other: "LatticeVector") -> int:
        return sum(a * b for a, b in zip(self.coeffs, other.coeffs))

    def length(self, scale: float = 1.0) -> float:
        return scale * math.sqrt(self.norm_sq)

    def __neg__(self) -> "LatticeVector":
        return LatticeVector(self.norm_sq, tuple(-x for x in self.coeffs))


def canonical_sign(coeffs: Sequence[int]) -> list[int]:
    """Flip the sign so that the first nonzero entry is positive."""
    for x in coeffs:
        if x:
            return list(coeffs) if x > 0 else [-y for y in coeffs]
    return list(coeffs)


def covolume(basis: LatticeBasis) -> float:
    det = abs(basis.det)
    if det == 0:
        raise DegenerateBasisError("degenerate basis")
    return math.exp(math.log(det) + basis.dim * math.log(basis.scale))


def cos_sq_fraction(v: LatticeVector, w: LatticeVector) -> Fraction:
    """Exact squared cosine of the angle between two lattice vectors."""
    if v.is_zero or w.is_zero:
        raise ValueError("angle undefined for the zero vector")
    d = v.dot(w)
    return Fraction(d * d, v.norm_sq * w.norm_sq)


def symmetrized_angle(v: LatticeVector, w: LatticeVector) -> float:
    """Angle between v and w folded into [0, pi/2] (so it ignores signs)."""
    c2 = cos_sq_fraction(v, w)
    # int/int true division is correctly rounded even for huge operands
    return math.acos(min(1.0, math.sqrt(c2.numerator / c2.denominator)))


def symmetrized_angle_int(dot: int, nv: int, nw: int) -> float:
    if nv <= 0 or nw <= 0:
        raise ValueError("angle undefined for the zero vector")
    return math.acos(min(1.0, math.sqrt((dot * dot) / (nv * nw))))


def scaled_angle(n: int, phi: float) -> float:
    if not 0.0 <= phi <= math.pi / 2 + 1e-15:
        raise ValueError(f"phi={phi} outside [0, pi/2]")
    return math.sqrt(n) * (math.pi / 2 - phi)


def log_unit_ball_volume(n: int) -> float:
    return 0.5 * n * math.log(math.pi) - math.lgamma(0.5 * n + 1)


def ball_volume(n: int, ell: float) -> float:
    """Volume of the n-ball of radius ell, evaluated in the log domain."""
    if n < 1 or not ell > 0:
        raise ValueError("need n >= 1 and ell > 0")
    return math.exp(log_unit_ball_volume(n) + n * math.log(ell))
