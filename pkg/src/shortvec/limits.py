"""Closed-form limit laws and finite-n reference integrals.

Gamma and erf come from the C library (``math.lgamma``, ``math.erf``); both
are accurate to a few ulp, far inside the 1e-12 budget used here.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy import integrate, special

HALF_PI = 0.5 * math.pi


def log_sphere_surface(n: int) -> float:
    return math.log(2.0) + 0.5 * n * math.log(math.pi) - math.lgamma(0.5 * n)


def sphere_surface(n: int) -> float:
    """(n-1)-dimensional volume of the unit sphere in R^n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.exp(log_sphere_surface(n))


def surface_ratio(n: int) -> float:
    """omega_{n-1} / omega_n, computed without forming either factor."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return math.exp(log_sphere_surface(n - 1) - log_sphere_surface(n))


def poisson_gap_cdf(N: int, V: float) -> float:
    """P(V_N <= V) for the N-th point of a rate-1/2 Poisson process."""
    if N < 1 or V < 0:
        raise ValueError("need N >= 1 and V >= 0")
    return float(special.gammainc(N, 0.5 * V))


def exp_gap_cdf(x: float) -> float:
    """CDF of an exponential gap with mean 2."""
    return -math.expm1(-0.5 * x) if x > 0 else 0.0


def half_normal_cdf(c: float) -> float:
    """CDF of |X| with X standard normal."""
    if c < 0:
        raise ValueError("c must be nonnegative")
    return math.erf(c / math.sqrt(2.0))


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def concentration_limit(C: float) -> float:
    if not C > 0:
        raise ValueError("C must be positive")
    return 0.5 * math.erf(C / math.sqrt(2.0))


def _sin_power_integral(n: int, a: float, b: float) -> float:
    m = n - 2
    if m == 0:
        return b - a

    def f(phi):
        s = math.sin(phi)
        return math.exp(m * math.log(s)) if s > 0 else 0.0

    # the integrand is a spike of width ~1/sqrt(n) at pi/2
    w = 10.0 / math.sqrt(n)
    cuts = sorted({a, b, *(x for x in (HALF_PI - w, HALF_PI, HALF_PI + w) if a < x < b)})
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        val, _ = integrate.quad(f, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=200)
        total += val
    return total


def finite_n_angle_mass(n: int, phi1: float, phi2: float) -> float:
    """Probability that the angle between two independent uniform directions
    in R^n lies in [phi1, phi2]."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 0.0 <= phi1 < phi2 <= math.pi:
        raise ValueError(f"invalid interval [{phi1}, {phi2}]")
    return surface_ratio(n) * _sin_power_integral(n, phi1, phi2)


def rogers_pair_expectation(n: int, V: float, phi1: float, phi2: float) -> float:
    """Main term of the mean number of unordered pairs of distinct vector
    pairs in the ball of volume V whose symmetrized angle is in [phi1, phi2].

    The O(2^-n) remainder of the mean value formula is not included.
    """
    if n < 3:
        raise ValueError("n must be >= 3")
    if not 0.0 <= phi1 < phi2 <= HALF_PI:
        raise ValueError(f"invalid interval [{phi1}, {phi2}]")
    return 0.25 * V * V * finite_n_angle_mass(n, phi1, phi2)


def rogers_concentration_limit(V: float, C: float) -> float:
    """n -> infinity limit of the same mean over the window [pi/2 - C/sqrt(n), pi/2]."""
    return V * V / 8.0 * math.erf(C / math.sqrt(2.0))


def campbell_box_expectation(box: Sequence[tuple[float, float]]) -> float:
    """Mean number of ordered k-tuples of distinct rate-1/2 Poisson points
    with the j-th point in the j-th interval."""
    if len(box) < 2:
        raise ValueError("need at least two intervals")
    out = 2.0 ** (-len(box))
    for a, b in box:
        if b < a or a < 0:
            raise ValueError(f"invalid interval [{a}, {b}]")
        out *= b - a
    return out


def half_normal_mass(a: float, b: float) -> float:
    return half_normal_cdf(b) - half_normal_cdf(a)


def campbell_expectation(box, angle_box=None) -> float:
    """Campbell mean with every pairwise angle of the tuple restricted to
    ``angle_box`` (if given)."""
    out = campbell_box_expectation(box)
    if angle_box is not None:
        k = len(box)
        out *= half_normal_mass(*angle_box) ** (k * (k - 1) // 2)
    return out


def _check_chart(phis: np.ndarray, k: int) -> np.ndarray:
    phis = np.asarray(phis, dtype=float)
    if phis.shape != (k, k):
        raise ValueError(f"chart must be a {k}x{k} matrix")
    iu = np.triu_indices(k, 1)
    if np.any(phis[iu] <= 0) or np.any(phis[iu] >= math.pi):
        raise ValueError("chart angles must lie in (0, pi)")
    return phis


def chart_vectors(phis: np.ndarray, k: int) -> np.ndarray:
    """Unit vectors u_1..u_k (rows, in R^k) in the nested spherical chart:
    u_j = (cos p_1j, sin p_1j cos p_2j, ..., sin p_1j ... sin p_(j-1)j, 0, ...)."""
    phis = _check_chart(phis, k)
    u = np.zeros((k, k))
    u[0, 0] = 1.0
    for j in range(1, k):
        s = 1.0
        for m in range(j):
            u[j, m] = s * math.cos(phis[m, j])
            s *= math.sin(phis[m, j])
        u[j, j] = s
    return u


def chart_to_angles(phis: np.ndarray, k: int) -> np.ndarray:
    """Pairwise angles alpha_ij = arccos(u_i . u_j) (strict upper triangle)."""
    u = chart_vectors(phis, k)
    g = np.clip(u @ u.T, -1.0, 1.0)
    alphas = np.triu(np.arccos(g), 1)
    # u_1 . u_j = cos p_1j, so the first row is the chart itself
    alphas[0, 1:] = np.asarray(phis, dtype=float)[0, 1:]
    return alphas


def chart_jacobian_det(phis: np.ndarray, k: int) -> float:
    """det d(alpha)/d(phi) = prod_{i<j} sin(p_ij)^(k-i) / sin(alpha_ij), i 1-based."""
    phis = _check_chart(phis, k)
    alphas = chart_to_angles(phis, k)
    out = 1.0
    for i in range(k):
        for j in range(i + 1, k):
            sa = math.sin(alphas[i, j])
            if sa <= 0.0:
                raise ValueError("chart degenerate")
            out *= math.sin(phis[i, j]) ** (k - 1 - i) / sa
    return out
