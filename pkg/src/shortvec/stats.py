"""Empirical-distribution checks and the report records they produce."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import special
from scipy.stats import chi2

KS_CRITICAL_001 = 1.63  # asymptotic alpha = 0.01 critical value of sqrt(m) D
DEFAULT_ALLOWANCE = 0.05


@dataclass
class StatReport:
    name: str
    sample_size: int
    statistic: float
    threshold: float
    verdict: bool
    p_value: Optional[float] = None
    mean: Optional[float] = None
    std_err: Optional[float] = None
    reference: Optional[float] = None
    notes: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["verdict"] = "pass" if self.verdict else "fail"
        return d


def ks_statistic(sample: Sequence[float], cdf: Callable[[float], float]) -> tuple[float, float]:
    """One-sample Kolmogorov-Smirnov distance and its asymptotic p-value."""
    x = np.sort(np.asarray(sample, dtype=float))
    m = len(x)
    if m == 0:
        raise ValueError("empty sample")
    f = np.array([cdf(v) for v in x])
    i = np.arange(1, m + 1)
    d = float(max(np.max(i / m - f), np.max(f - (i - 1) / m)))
    d = min(max(d, 0.0), 1.0)
    return d, float(special.kolmogorov(math.sqrt(m) * d))


def ks_threshold(m: int, allowance: float = DEFAULT_ALLOWANCE) -> float:
    return max(KS_CRITICAL_001 / math.sqrt(m), allowance)


def mean_ci(sample: Sequence[float]) -> tuple[float, float]:
    """Mean and its standard error (unbiased variance)."""
    x = np.asarray(sample, dtype=float)
    if len(x) < 2:
        raise ValueError("need at least two observations")
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(len(x)))


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) != len(y) or len(x) < 3:
        raise ValueError("need equal lengths >= 3")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise ValueError("zero variance")
    return float(np.clip((dx @ dy) / math.sqrt(sxx * syy), -1.0, 1.0))


def quadrant_chi2(x: Sequence[float], y: Sequence[float]) -> tuple[float, float, float]:
    """2x2 chi-square on median splits: (statistic, p_value, phi coefficient)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a = x > np.median(x)
    b = y > np.median(y)
    table = np.array(
        [[np.sum(a & b), np.sum(a & ~b)], [np.sum(~a & b), np.sum(~a & ~b)]], dtype=float
    )
    rows, cols = table.sum(axis=1), table.sum(axis=0)
    m = table.sum()
    if np.any(rows == 0) or np.any(cols == 0):
        raise ValueError("degenerate median split")
    expected = np.outer(rows, cols) / m
    stat = float(((table - expected) ** 2 / expected).sum())
    phi = (table[0, 0] * table[1, 1] - table[0, 1] * table[1, 0]) / math.sqrt(
        rows.prod() * cols.prod()
    )
    return stat, float(chi2.sf(stat, 1)), float(phi)


def ks_report(name: str, sample, cdf, allowance: float = DEFAULT_ALLOWANCE, notes: str = "") -> StatReport:
    d, p = ks_statistic(sample, cdf)
    m = len(sample)
    thr = ks_threshold(m, allowance)
    return StatReport(name, m, d, thr, d <= thr, p_value=p, notes=notes)


def correlation_report(name: str, x, y, tol: float) -> StatReport:
    r = pearson(x, y)
    return StatReport(name, len(x), r, tol, abs(r) <= tol)


def quadrant_report(name: str, x, y, tol: float) -> StatReport:
    stat, p, phi = quadrant_chi2(x, y)
    return StatReport(
        name, len(x), phi, tol, abs(phi) <= tol, p_value=p,
        notes=f"chi2={stat:.6g}; statistic is the 2x2 phi coefficient",
    )


def mean_report(name: str, sample, reference: float, rel_tol: float = 0.0, notes: str = "",
                resolution: float = 0.0) -> StatReport:
    """Passes if |mean - reference| <= max(3 SE, rel_tol * |reference|).

    ``resolution`` is a floor on the standard error.  For integer counts
    pass 1/m: a sample that is identically zero has a plug-in SE of 0 even
    though one more hit would move the mean by 1/m.
    """
    mean, se = mean_ci(sample)
    se = max(se, resolution)
    thr = max(3 * se, rel_tol * abs(reference))
    return StatReport(
        name, len(sample), abs(mean - reference), thr, abs(mean - reference) <= thr,
        mean=mean, std_err=se, reference=reference, notes=notes,
    )
