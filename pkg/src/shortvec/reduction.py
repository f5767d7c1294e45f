"""LLL reduction, complete enumeration of short vectors, successive minima and
assembly of the per-lattice spectrum."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .lattice import (
    LatticeBasis,
    LatticeVector,
    integer_rank,
    log_unit_ball_volume,
    scaled_angle,
    symmetrized_angle_int,
)

DEFAULT_DELTA = 0.99
NODE_CAP = 1 << 20
_ENUM_SLACK = 1e-6


class RadiusCapError(RuntimeError):
    pass


def _int64_bound(n: int) -> int:
    # keeps every exact dot product of two rows below 2**62
    return math.isqrt((1 << 62) // n)


@dataclass(frozen=True)
class GramSchmidtData:
    mu: np.ndarray  # lower triangular, unit diagonal
    bstar_norm_sq: np.ndarray


def gram_schmidt(basis: LatticeBasis) -> GramSchmidtData:
    """Floating Gram-Schmidt data of the unscaled rows, from exact dot products."""
    if basis.max_abs_entry <= _int64_bound(basis.dim):
        mu, bs = K.gram_schmidt(basis.as_int64())
        return GramSchmidtData(mu, bs)
    rows = basis.rows
    n = basis.dim
    mu = np.eye(n)
    r = np.zeros((n, n))
    for k in range(n):
        for j in range(k):
            acc = float(sum(a * b for a, b in zip(rows[k], rows[j])))
            acc -= sum(mu[j, i] * r[k, i] for i in range(j))
            r[k, j] = acc
            mu[k, j] = acc / r[j, j]
        r[k, k] = float(sum(a * a for a in rows[k])) - sum(mu[k, j] * r[k, j] for j in range(k))
    return GramSchmidtData(mu, np.diag(r).copy())


def _lll_python(rows, delta: float) -> list[list[int]]:
    b = [list(r) for r in rows]
    n = len(b)

    def dot(u, v):
        return sum(x * y for x, y in zip(u, v))

    mu = [[0.0] * n for _ in range(n)]
    r = [[0.0] * n for _ in range(n)]

    def gs_row(k):
        for j in range(k):
            acc = float(dot(b[k], b[j])) - sum(mu[j][i] * r[k][i] for i in range(j))
            r[k][j] = acc
            mu[k][j] = acc / r[j][j]
        r[k][k] = float(dot(b[k], b[k])) - sum(mu[k][j] * r[k][j] for j in range(k))

    gs_row(0)
    k = 1
    while k < n:
        while True:
            gs_row(k)
            changed = False
            for j in range(k - 1, -1, -1):
                if abs(mu[k][j]) > K.ETA:
                    q = round(mu[k][j])
                    b[k] = [x - q * y for x, y in zip(b[k], b[j])]
                    for i in range(j):
                        mu[k][i] -= q * mu[j][i]
                    mu[k][j] -= q
                    changed = True
            if not changed:
                break
        if r[k][k] < (delta - mu[k][k - 1] ** 2) * r[k - 1][k - 1]:
            b[k], b[k - 1] = b[k - 1], b[k]
            if k == 1:
                gs_row(0)
            else:
                k -= 1
        else:
            k += 1
    return b


def lll_reduce(basis: LatticeBasis, delta: float = DEFAULT_DELTA) -> LatticeBasis:
    """LLL-reduce ``basis`` by exact integer row operations (same lattice)."""
    if not 0.25 < delta < 1:
        raise ValueError("delta must lie in (1/4, 1)")
    if basis.dim == 1:
        return basis
    bound = _int64_bound(basis.dim)
    if basis.max_abs_entry <= bound:
        B = basis.as_int64()
        if K.lll_inplace(B, delta, bound) == K.LLL_OK:
            return basis.with_rows(B.tolist())
    return basis.with_rows(_lll_python(basis.rows, delta))


class _Enumerator:
    """Ball enumeration on a fixed LLL-reduced basis."""

    def __init__(self, reduced: LatticeBasis):
        n = reduced.dim
        self.basis = reduced
        if reduced.max_abs_entry > _int64_bound(n):
            raise OverflowError("reduced basis entries too large for int64 enumeration")
        self.B = reduced.as_int64()
        self.mu, self.bs = K.gram_schmidt(self.B)
        self.row_norm_sq = sorted(int(x) for x in np.einsum("ij,ij->i", self.B, self.B))
        self._buf = np.zeros((64, n), dtype=np.int64)

    def ball(self, bound_sq) -> tuple[np.ndarray, np.ndarray]:
        """Canonical-sign coordinates and exact norms of all nonzero vectors with
        norm_sq <= bound_sq, sorted by (norm_sq, lexicographic coordinates)."""
        n = self.basis.dim
        if bound_sq * n >= 2**62:
            raise RadiusCapError("radius cap exceeded: squared radius too large for exact int64 norms")
        radius = float(bound_sq) * (1 + _ENUM_SLACK) + _ENUM_SLACK
        while True:
            count, status = K.enumerate_ball(self.mu, self.bs, radius, self._buf, NODE_CAP)
            if status == K.ENUM_BUFFER_FULL:
                self._buf = np.zeros((2 * self._buf.shape[0], n), dtype=np.int64)
                continue
            if status == K.ENUM_NODE_CAP:
                raise RadiusCapError(
                    f"radius cap exceeded: more than {NODE_CAP} nodes on one level "
                    f"(n={n}, squared radius {bound_sq})"
                )
            break
        # int64 matmul wraps modulo 2**64; the true coordinates are small, so
        # the wrapped result is exact
        coords = self._buf[:count] @ self.B
        nsq = np.einsum("ij,ij->i", coords, coords)
        keep = nsq <= bound_sq
        coords, nsq = coords[keep], nsq[keep]
        first_nz = np.argmax(coords != 0, axis=1)
        neg = coords[np.arange(len(coords)), first_nz] < 0
        coords[neg] *= -1
        order = np.lexsort([coords[:, j] for j in range(n - 1, -1, -1)] + [nsq])
        return coords[order], nsq[order]

    def at_least(self, count: int, start_sq: int) -> tuple[np.ndarray, np.ndarray]:
        """All vectors up to a radius holding at least ``count`` pairs; the radius
        starts at ``start_sq`` and doubles."""
        r = start_sq
        coords, nsq = self.ball(r)
        while len(nsq) < count:
            r *= 2
            coords, nsq = self.ball(r)
        q = int(nsq[count - 1])
        if q < r:
            # confirm with an exact pass at the count-th smallest norm
            c2, n2 = self.ball(q)
            if len(n2) < count or not np.array_equal(c2[:count], coords[:count]):
                raise RuntimeError("enumeration confirm pass disagrees")
        return coords, nsq


def _to_vectors(coords, nsq) -> list[LatticeVector]:
    return [LatticeVector(int(q), tuple(int(x) for x in c)) for c, q in zip(coords, nsq)]


def _start_radius(en: _Enumerator, count: int) -> int:
    rows = en.row_norm_sq
    return rows[min(count, len(rows)) - 1]


def enumerate_shortest(basis: LatticeBasis, N: int, delta: float = DEFAULT_DELTA) -> list[LatticeVector]:
    """The N shortest +-pairs of nonzero lattice vectors (one canonical-sign
    representative each), sorted by norm with lexicographic tie-break."""
    if N < 1:
        raise ValueError("N must be >= 1")
    en = _Enumerator(lll_reduce(basis, delta))
    coords, nsq = en.at_least(N, _start_radius(en, N))
    return _to_vectors(coords[:N], nsq[:N])


def vectors_within(basis: LatticeBasis, bound_sq: int, delta: float = DEFAULT_DELTA) -> list[LatticeVector]:
    """Every +-pair with unscaled squared norm <= bound_sq, sorted."""
    en = _Enumerator(lll_reduce(basis, delta))
    coords, nsq = en.ball(int(bound_sq))
    return _to_vectors(coords, nsq)


def _greedy_independent(coords: np.ndarray, count: int) -> list[int]:
    chosen: list[int] = []
    rows: list[list[int]] = []
    for idx in range(len(coords)):
        cand = rows + [coords[idx].tolist()]
        if integer_rank(cand) == len(cand):
            rows = cand
            chosen.append(idx)
            if len(chosen) == count:
                break
    return chosen


def _minima_from(en: _Enumerator, coords, nsq, count: int):
    chosen = _greedy_independent(coords, count)
    r = int(nsq[-1]) if len(nsq) else en.row_norm_sq[0]
    while len(chosen) < count:
        # the count smallest basis rows are independent, so this terminates
        r *= 2
        coords, nsq = en.ball(r)
        chosen = _greedy_independent(coords, count)
    return [int(nsq[i]) for i in chosen], chosen == list(range(count))


def successive_minima(basis: LatticeBasis, N: int, delta: float = DEFAULT_DELTA) -> tuple[list[float], bool]:
    """First N successive minima and whether they coincide with |v_1|..|v_N|."""
    if not 1 <= N <= basis.dim:
        raise ValueError("need 1 <= N <= dim")
    en = _Enumerator(lll_reduce(basis, delta))
    coords, nsq = en.ball(_start_radius(en, N))
    q, coincide = _minima_from(en, coords, nsq, N)
    return [basis.scale * math.sqrt(x) for x in q], coincide


@dataclass(frozen=True)
class SpectrumResult:
    n: int
    vectors: tuple[LatticeVector, ...]
    lengths: tuple[float, ...]
    volumes: tuple[float, ...]
    raw_angles: np.ndarray  # strictly upper triangular
    scaled_angles: np.ndarray
    successive_minima: tuple[float, ...]
    minima_coincide: bool
    has_ties: bool

    @property
    def N(self) -> int:
        return len(self.vectors)

    def pairs(self):
        return [(i, j) for i in range(self.N) for j in range(i + 1, self.N)]


def log_volume(n: int, log_scale: float, norm_sq: int) -> float:
    return log_unit_ball_volume(n) + n * log_scale + 0.5 * n * math.log(norm_sq)


def spectrum(basis: LatticeBasis, N: int, delta: float = DEFAULT_DELTA) -> SpectrumResult:
    """Lengths, ball volumes, symmetrized and scaled angles, and successive
    minima of the N shortest vector pairs.

    ``has_ties`` also flags a tie between the N-th and (N+1)-th pair, since
    that makes the choice of v_N ambiguous as well.  Successive minima are
    reported for the first min(N, n) indices.
    """
    n = basis.dim
    if N < 1 or N > 2 * n * n:
        raise ValueError("need 1 <= N <= 2 n^2")
    en = _Enumerator(lll_reduce(basis, delta))
    M = min(N, n)
    start = max(_start_radius(en, N), _start_radius(en, M))
    coords, nsq = en.at_least(N, start)
    top = coords[:N]
    q = [int(x) for x in nsq[:N]]
    ls = basis.log_scale()
    lengths = tuple(math.exp(ls + 0.5 * math.log(x)) for x in q)
    volumes = tuple(math.exp(log_volume(n, ls, x)) for x in q)
    raw = np.zeros((N, N))
    scaled = np.zeros((N, N))
    gram = top @ top.T
    for i in range(N):
        for j in range(i + 1, N):
            phi = symmetrized_angle_int(int(gram[i, j]), q[i], q[j])
            raw[i, j] = phi
            scaled[i, j] = scaled_angle(n, phi)
    # every vector outside the enumerated ball is strictly longer, so a tie at
    # the N/N+1 boundary shows up here if it exists
    ties = any(nsq[j] == nsq[j + 1] for j in range(min(N, len(nsq) - 1)))
    mq, coincide = _minima_from(en, coords, nsq, M)
    minima = tuple(math.exp(ls + 0.5 * math.log(x)) for x in mq)
    return SpectrumResult(
        n=n,
        vectors=tuple(_to_vectors(top, nsq[:N])),
        lengths=lengths,
        volumes=volumes,
        raw_angles=raw,
        scaled_angles=scaled,
        successive_minima=minima,
        minima_coincide=coincide,
        has_ties=bool(ties),
    )
