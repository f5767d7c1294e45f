"""Shared independent oracles for the test suite.

Nothing here calls into the enumeration or rank code under test: the oracles
use plain numpy boxes and Fraction arithmetic.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []

HEX_M = 10**6
# near-hexagonal integer lattice: v=(M,0), w=(M/2, round(M*sqrt(3)/2))
HEX_ROWS = [[HEX_M, 0], [HEX_M // 2, round(HEX_M * math.sqrt(3) / 2)]]
HEX_L1 = (4.0 / 3.0) ** 0.25


def _half_box(n: int, radius: int) -> np.ndarray:
    """Coefficient vectors in the box whose first nonzero entry is positive."""
    rng = np.arange(-radius, radius + 1, dtype=np.int64)
    grids = np.meshgrid(*([rng] * n), indexing="ij")
    C = np.stack([g.ravel() for g in grids], axis=1)
    nz = C != 0
    first = np.argmax(nz, axis=1)
    keep = nz.any(axis=1) & (C[np.arange(len(C)), first] > 0)
    return C[keep]


_BOXES: dict = {}


def box_vectors(rows, radius: int = 25, limit: int | None = None):
    """Nonzero vectors sum c_k rows_k with |c_k| <= radius, one canonical-sign
    representative per +-pair, sorted by (norm_sq, lexicographic coords).

    With ``limit`` only vectors no longer than the limit-th shortest are kept.
    """
    B = np.array(rows, dtype=np.int64)
    n = B.shape[0]
    key = (n, radius)
    if key not in _BOXES:
        _BOXES[key] = _half_box(n, radius)
    X = _BOXES[key] @ B
    nsq = np.einsum("ij,ij->i", X, X)
    if limit is not None and limit < len(nsq):
        cut = np.partition(nsq, limit - 1)[limit - 1]
        X, nsq = X[nsq <= cut], nsq[nsq <= cut]
    first = np.argmax(X != 0, axis=1)
    neg = X[np.arange(len(X)), first] < 0
    X[neg] *= -1
    order = np.lexsort([X[:, j] for j in range(n - 1, -1, -1)] + [nsq])
    return X[order], nsq[order]


def brute_shortest(rows, count: int, radius: int = 25):
    X, nsq = box_vectors(rows, radius, limit=count)
    return [(int(q), tuple(int(v) for v in x)) for x, q in zip(X[:count], nsq[:count])]


def fraction_rank(rows) -> int:
    """Rank over Q by Gaussian elimination on Fractions."""
    m = [[Fraction(int(x)) for x in r] for r in rows]
    rank = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        piv = next((r for r in range(rank, len(m)) if m[r][c] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for r in range(len(m)):
            if r != rank and m[r][c] != 0:
                f = m[r][c] / m[rank][c]
                m[r] = [a - f * b for a, b in zip(m[r], m[rank])]
        rank += 1
    return rank


def brute_minima(rows, count: int, radius: int = 25):
    """Greedy successive minima over the box: (norm_sq list, coincide flag)."""
    for limit in (16 * count, 256 * count, None):
        X, nsq = box_vectors(rows, radius, limit=limit)
        chosen, picked = [], []
        for i, x in enumerate(X):
            cand = picked + [list(map(int, x))]
            if fraction_rank(cand) == len(cand):
                picked = cand
                chosen.append(i)
                if len(chosen) == count:
                    return [int(nsq[i]) for i in chosen], chosen == list(range(count))
    raise AssertionError("box too small for the oracle")


def fraction_det(rows) -> Fraction:
    m = [[Fraction(int(x)) for x in r] for r in rows]
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            m[r] = [a - f * b for a, b in zip(m[r], m[c])]
    return det


def in_lattice_mod(v, a, p) -> bool:
    """v in Za + pZ^n  <=>  v = t a (mod p) for some t."""
    v = [x % p for x in v]
    a = [x % p for x in a]
    k = next(i for i, x in enumerate(a) if x)
    t = v[k] * pow(a[k], -1, p) % p
    return all((t * y - x) % p == 0 for x, y in zip(v, a))


def fd_jacobian_det(f, x: np.ndarray, h: float = 1e-6) -> float:
    """Central finite-difference Jacobian determinant of f: R^d -> R^d."""
    d = len(x)
    J = np.zeros((d, d))
    for c in range(d):
        e = np.zeros(d)
        e[c] = h
        J[:, c] = (f(x + e) - f(x - e)) / (2 * h)
    return float(np.linalg.det(J))


def upper_pairs(k: int):
    return list(itertools.combinations(range(k), 2))


@pytest.fixture
def hex_rows():
    return [list(r) for r in HEX_ROWS]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
