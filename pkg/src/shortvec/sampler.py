"""Random inputs: Hecke-point lattices, uniform sphere directions, and draws
from the Poisson/half-normal limiting process.

Every draw comes from a Philox stream keyed by (seed, trial_index, purpose),
so trials can run in any order or process and still reproduce bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .lattice import LatticeBasis

DEFAULT_PRIME = 1_000_003  # smallest prime >= 10**6

_PURPOSES = {"lattice": 0, "sphere": 1, "limit": 2}

# deterministic Miller-Rabin witnesses, valid for n < 3.3e24
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


@lru_cache(maxsize=64)
def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class SamplerConfig:
    dim: int
    prime: int = DEFAULT_PRIME
    seed: int = 0
    trial_index: int = 0

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("dim must be >= 2")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.trial_index < 0:
            raise ValueError("trial_index must be nonnegative")
        if not is_prime(self.prime):
            raise ValueError(f"{self.prime} is not prime")

    def for_trial(self, trial_index: int) -> "SamplerConfig":
        return SamplerConfig(self.dim, self.prime, self.seed, trial_index)


def substream(seed: int, trial_index: int, purpose: str) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(trial_index, _PURPOSES[purpose]))
    return np.random.Generator(np.random.Philox(ss))


def hecke_rows(a, p: int) -> list[list[int]]:
    """Hermite normal form of the lattice ``Z a + p Z^n``.

    This is the set of integer vectors congruent mod p to a multiple of
    ``a``; for ``a != 0 (mod p)`` it has index ``p**(n-1)`` in ``Z^n``.
    """
    a = [int(x) % p for x in a]
    n = len(a)
    k = next((i for i, x in enumerate(a) if x), None)
    if k is None:
        raise ValueError("a must be nonzero mod p")
    inv = pow(a[k], -1, p)
    a = [x * inv % p for x in a]
    rows = []
    for i in range(n):
        if i == k:
            rows.append(a)
        else:
            r = [0] * n
            r[i] = p
            rows.append(r)
    return rows


def hecke_lattice(a, p: int) -> LatticeBasis:
    n = len(a)
    rows = hecke_rows(a, p)
    # |det| = p**(n-1) exactly by construction
    return LatticeBasis(rows, math.exp(-(n - 1) / n * math.log(p)))


def _nonzero_residue_vector(rng: np.random.Generator, n: int, p: int) -> list[int]:
    while True:
        if p < 2**62:
            a = rng.integers(0, p, size=n).tolist()
        else:
            a = [int.from_bytes(rng.bytes(16), "little") % p for _ in range(n)]
        if any(a):
            return a


def sample_residue(cfg: SamplerConfig) -> list[int]:
    """The uniform nonzero point of (Z/pZ)^n drawn for this trial."""
    rng = substream(cfg.seed, cfg.trial_index, "lattice")
    return _nonzero_residue_vector(rng, cfg.dim, cfg.prime)


def sample_lattice(cfg: SamplerConfig) -> LatticeBasis:
    return hecke_lattice(sample_residue(cfg), cfg.prime)


def sample_sphere_directions(n: int, count: int, cfg: SamplerConfig) -> np.ndarray:
    """``count`` independent uniform unit vectors in R^n, as rows."""
    if n < 2 or count < 2:
        raise ValueError("need n >= 2 and count >= 2")
    rng = substream(cfg.seed, cfg.trial_index, "sphere")
    u = rng.standard_normal((count, n))
    norms = np.linalg.norm(u, axis=1)
    while np.any(norms < 1e-150):
        bad = norms < 1e-150
        u[bad] = rng.standard_normal((int(bad.sum()), n))
        norms = np.linalg.norm(u, axis=1)
    return u / norms[:, None]


@dataclass(frozen=True)
class LimitLawSample:
    points: np.ndarray  # T_1 < ... < T_N
    angles: np.ndarray  # N x N, strictly upper triangle holds Phi_ij

    def angle(self, i: int, j: int) -> float:
        return float(self.angles[min(i, j), max(i, j)])


def _limit_draw(rng: np.random.Generator, count: int) -> LimitLawSample:
    gaps = rng.exponential(2.0, size=count)
    points = np.cumsum(gaps)
    phi = np.abs(rng.standard_normal((count, count)))
    return LimitLawSample(points, np.triu(phi, k=1))


def sample_limit_law(count: int, cfg: SamplerConfig) -> LimitLawSample:
    """First ``count`` points of a rate-1/2 Poisson process with independent
    half-normal angle variables for every pair of points."""
    if count < 1:
        raise ValueError("count must be >= 1")
    return _limit_draw(substream(cfg.seed, cfg.trial_index, "limit"), count)


def sample_limit_process(horizon: float, cfg: SamplerConfig) -> LimitLawSample:
    """All points of the limiting process in (0, horizon], with their angles."""
    rng = substream(cfg.seed, cfg.trial_index, "limit")
    # gaps are drawn in blocks; about horizon/2 points are expected
    block = 8 + int(horizon)
    pts = np.cumsum(rng.exponential(2.0, size=block))
    while pts[-1] <= horizon:
        pts = np.concatenate([pts, pts[-1] + np.cumsum(rng.exponential(2.0, size=block))])
    pts = pts[: np.searchsorted(pts, horizon, side="right")]
    m = len(pts)
    phi = np.abs(rng.standard_normal((m, m)))
    return LimitLawSample(pts, np.triu(phi, k=1))
