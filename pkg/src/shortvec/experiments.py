"""Monte Carlo experiments comparing lattice (and sphere) statistics with the
closed-form limit laws.

Each experiment draws ``trials`` independent samples, streams one raw row per
trial to an optional sink in trial-index order, and returns a list of
StatReports.  Trials are pure functions of (config, trial index), so the
output does not depend on the number of worker processes.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from functools import partial
from typing import Callable, Iterable, Optional

import numpy as np
from scipy import special

from . import limits
from .lattice import log_unit_ball_volume
from .reduction import RadiusCapError, _Enumerator, lll_reduce, log_volume, spectrum
from .sampler import (
    DEFAULT_PRIME,
    SamplerConfig,
    sample_lattice,
    sample_limit_process,
    sample_sphere_directions,
)
from .stats import (
    DEFAULT_ALLOWANCE,
    StatReport,
    correlation_report,
    ks_report,
    mean_ci,
    mean_report,
    quadrant_report,
)

EXPERIMENTS = (
    "joint-law",
    "sphere-angles",
    "concentration",
    "rogers-expectation",
    "campbell",
    "successive-minima",
)

Row = list
Sink = Optional[Callable[[Row], None]]


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str
    n: int = 30
    N: int = 3
    trials: int = 10_000
    prime: int = DEFAULT_PRIME
    seed: int = 0
    C: tuple[float, ...] = (6.0,)
    V: float = 2.0
    phi1: float = 0.0
    phi2: float = math.pi / 2
    box: tuple[tuple[float, float], ...] = ((0.0, 1.0), (0.0, 1.0))
    angle_box: Optional[tuple[float, float]] = None
    lattice_trials: int = 2000
    allowance: float = DEFAULT_ALLOWANCE
    corr_tol: float = 0.05
    rel_tol: float = 0.1
    coincidence_min: float = 0.95
    delta: float = 0.99
    parallelism: int = 1
    out_path: Optional[str] = None
    format: str = "csv"

    def validate(self) -> "ExperimentConfig":
        e = self.experiment
        if e not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {e!r}")
        if self.n < 2 or self.N < 1 or self.trials < 1 or self.parallelism < 1:
            raise ConfigError("n >= 2, N >= 1, trials >= 1 and parallelism >= 1 are required")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        try:
            SamplerConfig(self.n, self.prime, self.seed)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if e == "joint-law" and (self.N < 2 or self.n < max(8, self.N + 2)):
            raise ConfigError("joint-law needs N >= 2 and n >= max(8, N + 2)")
        if e == "sphere-angles" and (self.n < 2 or self.N < 2):
            raise ConfigError("sphere-angles needs n >= 2 and N >= 2")
        if e == "concentration" and (self.N < 2 or not self.C or min(self.C) < 0):
            raise ConfigError("concentration needs N >= 2 and thresholds C >= 0")
        if e == "rogers-expectation":
            if self.n < 3 or self.V <= 0 or not 0 <= self.phi1 < self.phi2 <= math.pi / 2:
                raise ConfigError("rogers-expectation needs n >= 3, V > 0, 0 <= phi1 < phi2 <= pi/2")
        if e == "campbell":
            k = len(self.box)
            if k < 2:
                raise ConfigError("campbell needs at least two intervals")
            if k > 4:
                raise ConfigError("campbell supports at most 4 intervals")
            if any(a < 0 or b < a for a, b in self.box):
                raise ConfigError("campbell intervals must satisfy 0 <= a <= b")
            if self.angle_box is not None and not 0 <= self.angle_box[0] <= self.angle_box[1]:
                raise ConfigError("angle box must satisfy 0 <= a <= b")
        if e == "successive-minima" and self.N > self.n:
            raise ConfigError("successive-minima needs N <= n")
        return self

    def sampler(self, trial: int = 0) -> SamplerConfig:
        return SamplerConfig(self.n, self.prime, self.seed, trial)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["C"] = list(self.C)
        d["box"] = [list(b) for b in self.box]
        d["angle_box"] = list(self.angle_box) if self.angle_box else None
        return d


def map_trials(fn, cfg: ExperimentConfig, count: int) -> Iterable:
    """Apply ``fn(cfg, t)`` for t in range(count), yielding in trial order."""
    if cfg.parallelism <= 1 or count < 2:
        for t in range(count):
            yield fn(cfg, t)
        return
    chunk = max(1, min(64, count // (8 * cfg.parallelism)))
    with ProcessPoolExecutor(max_workers=cfg.parallelism) as ex:
        yield from ex.map(partial(fn, cfg), range(count), chunksize=chunk)


def _collect(fn, cfg, count, sink: Sink, to_row) -> list:
    out = []
    for res in map_trials(fn, cfg, count):
        out.append(res)
        if sink is not None:
            sink(to_row(res))
    return out


def _pairs(N: int):
    return [(i, j) for i in range(N) for j in range(i + 1, N)]


# ---------------------------------------------------------------- joint law

def joint_law_header(N: int) -> list[str]:
    return (["trial"] + [f"V{j + 1}" for j in range(N)]
            + [f"phi{i + 1}{j + 1}" for i, j in _pairs(N)] + ["ties"])


def _joint_trial(cfg: ExperimentConfig, t: int):
    sp = spectrum(sample_lattice(cfg.sampler(t)), cfg.N, cfg.delta)
    phis = [float(sp.scaled_angles[i, j]) for i, j in _pairs(cfg.N)]
    return t, list(sp.volumes), phis, sp.has_ties


def _joint_row(res) -> Row:
    t, vols, phis, ties = res
    return [t, *vols, *phis, ties]


def run_joint_law(cfg: ExperimentConfig, sink: Sink = None) -> list[StatReport]:
    N = cfg.N
    res = _collect(_joint_trial, cfg, cfg.trials, sink, _joint_row)
    vols = np.array([r[1] for r in res])
    phis = np.array([r[2] for r in res])
    ties = np.array([r[3] for r in res], dtype=bool)
    clean = ~ties
    note = f"{int(ties.sum())} tie-flagged trials excluded"
    reports = []
    for j in range(N):
        reports.append(ks_report(f"KS V{j + 1} vs Poisson(1/2) point {j + 1}", vols[:, j],
                                 partial(limits.poisson_gap_cdf, j + 1), cfg.allowance))
    for j in range(N - 1):
        reports.append(ks_report(f"KS gap V{j + 2}-V{j + 1} vs Exp(mean 2)",
                                 vols[:, j + 1] - vols[:, j], limits.exp_gap_cdf, cfg.allowance))
    reports.append(mean_report("mean V1 vs 2", vols[:, 0], 2.0))
    pairs = _pairs(N)
    if clean.sum() < 3:
        reports.append(StatReport("tie-free trials", int(clean.sum()), float(clean.sum()), 3.0, False,
                                  notes=f"{note}; too few left for the angle checks"))
        return reports
    for c, (i, j) in enumerate(pairs):
        reports.append(ks_report(f"KS phi{i + 1}{j + 1} vs half-normal", phis[clean, c],
                                 limits.half_normal_cdf, cfg.allowance, notes=note))
    for k in range(N):
        for c, (i, j) in enumerate(pairs):
            x, y = vols[clean, k], phis[clean, c]
            reports.append(correlation_report(f"corr V{k + 1} phi{i + 1}{j + 1}", x, y, cfg.corr_tol))
            reports.append(quadrant_report(f"quadrant V{k + 1} phi{i + 1}{j + 1}", x, y, cfg.corr_tol))
    for a, b in itertools.combinations(range(len(pairs)), 2):
        (i, j), (k, l) = pairs[a], pairs[b]
        x, y = phis[clean, a], phis[clean, b]
        name = f"phi{i + 1}{j + 1} phi{k + 1}{l + 1}"
        reports.append(correlation_report(f"corr {name}", x, y, cfg.corr_tol))
        reports.append(quadrant_report(f"quadrant {name}", x, y, cfg.corr_tol))
    return reports


# ------------------------------------------------------------ sphere angles

def sphere_header(N: int) -> list[str]:
    return ["trial"] + [f"alpha{i + 1}{j + 1}" for i, j in _pairs(N)]


def angle_cdf(n: int, x):
    """Exact CDF of the angle between two independent uniform directions in R^n."""
    x = np.asarray(x, dtype=float)
    # cos^2 of the angle is Beta(1/2, (n-1)/2)
    c2 = np.cos(x) ** 2
    half = 0.5 * special.betainc(0.5, 0.5 * (n - 1), c2)
    out = np.where(x <= math.pi / 2, 0.5 - half, 0.5 + half)
    return np.clip(np.where(x <= 0, 0.0, np.where(x >= math.pi, 1.0, out)), 0.0, 1.0)


def _sphere_trial(cfg: ExperimentConfig, t: int):
    u = sample_sphere_directions(cfg.n, cfg.N, cfg.sampler(t))
    g = np.clip(u @ u.T, -1.0, 1.0)
    return t, [float(math.acos(g[i, j])) for i, j in _pairs(cfg.N)]


def run_sphere_angles(cfg: ExperimentConfig, sink: Sink = None) -> list[StatReport]:
    res = _collect(_sphere_trial, cfg, cfg.trials, sink, lambda r: [r[0], *r[1]])
    alpha = np.array([r[1] for r in res])
    scaled = math.sqrt(cfg.n) * (alpha - math.pi / 2)
    pairs = _pairs(cfg.N)
    reports = []
    for c, (i, j) in enumerate(pairs):
        reports.append(ks_report(f"KS alpha~{i + 1}{j + 1} vs N(0,1)", scaled[:, c],
                                 limits.normal_cdf, cfg.allowance))
    for c, (i, j) in enumerate(pairs):
        reports.append(ks_report(f"KS alpha{i + 1}{j + 1} vs exact finite-n law", alpha[:, c],
                                 partial(angle_cdf, cfg.n), cfg.allowance))
    for a, b in itertools.combinations(range(len(pairs)), 2):
        (i, j), (k, l) = pairs[a], pairs[b]
        reports.append(correlation_report(f"corr alpha~{i + 1}{j + 1} alpha~{k + 1}{l + 1}",
                                          scaled[:, a], scaled[:, b], cfg.corr_tol))
    reports.append(ks_report("KS |alpha~12| vs half-normal", np.abs(scaled[:, 0]),
                             limits.half_normal_cdf, cfg.allowance))
    return reports


# ------------------------------------------------------------ concentration

def concentration_header(N: int) -> list[str]:
    return ["trial", "maxphi", "ties"]


def _max_angle_trial(cfg: ExperimentConfig, t: int):
    sp = spectrum(sample_lattice(cfg.sampler(t)), cfg.N, cfg.delta)
    return t, float(max(sp.scaled_angles[i, j] for i, j in _pairs(cfg.N))), sp.has_ties


def exceedance(max_scaled: np.ndarray, C: float) -> float:
    """Fraction of trials with some pi/2 - phi_ij > C / sqrt(n)."""
    return float(np.mean(max_scaled > C))


def concentration_limit_probability(N: int, C: float) -> float:
    """Limit of P(max scaled angle > C): independent half-normals."""
    return 1.0 - limits.half_normal_cdf(C) ** (N * (N - 1) // 2)


def run_concentration(cfg: ExperimentConfig, sink: Sink = None) -> list[StatReport]:
    res = _collect(_max_angle_trial, cfg, cfg.trials, sink, lambda r: list(r))
    mx = np.array([r[1] for r in res])
    ties = np.array([r[2] for r in res], dtype=bool)
    mx = mx[~ties]
    m = len(mx)
    reports = []
    for C in cfg.C:
        est = exceedance(mx, C)
        se = math.sqrt(est * (1 - est) / m)
        ref = concentration_limit_probability(cfg.N, C)
        thr = max(3 * se, cfg.allowance)
        heuristic = limits.rogers_concentration_limit(cfg.V, C) if C > 0 else 0.0
        reports.append(StatReport(
            f"P(max phi~ > {C:g})", m, abs(est - ref), thr, abs(est - ref) <= thr,
            mean=est, std_err=se, reference=ref,
            notes=(f"estimate {est:.6g} +- {3 * se:.3g} (3 SE); "
                   f"V^2/8 erf(C/sqrt2) at V={cfg.V:g}: {heuristic:.6g}; "
                   f"{int(ties.sum())} tie-flagged trials excluded"),
        ))
    return reports


# ------------------------------------------------------- Rogers expectation

def volume_bound_sq(n: int, log_scale: float, V: float) -> float:
    """Largest unscaled squared norm whose ball volume is <= V."""
    return math.exp(2.0 / n * (math.log(V) - log_unit_ball_volume(n)) - 2.0 * log_scale)


def _ball_vectors(cfg: ExperimentConfig, t: int, V: float):
    basis = sample_lattice(cfg.sampler(t))
    en = _Enumerator(lll_reduce(basis, cfg.delta))
    bound = volume_bound_sq(cfg.n, basis.log_scale(), V)
    coords, nsq = en.ball(int(math.floor(bound)))
    return basis, coords, nsq


def _rogers_trial(cfg: ExperimentConfig, t: int):
    _, coords, nsq = _ball_vectors(cfg, t, cfg.V)
    m = len(nsq)
    count = 0
    if m >= 2:
        g = coords @ coords.T
        for i in range(m):
            for j in range(i + 1, m):
                c2 = int(g[i, j]) ** 2 / (int(nsq[i]) * int(nsq[j]))
                phi = math.acos(min(1.0, math.sqrt(c2)))
                if cfg.phi1 <= phi <= cfg.phi2:
                    count += 1
    return t, m, count


def run_rogers_expectation(cfg: ExperimentConfig, sink: Sink = None) -> list[StatReport]:
    try:
        res = _collect(_rogers_trial, cfg, cfg.trials, sink, lambda r: list(r))
    except RadiusCapError as exc:
        raise RadiusCapError(f"{exc}; lower V or raise n") from exc
    counts = np.array([r[2] for r in res], dtype=float)
    ref = limits.rogers_pair_expectation(cfg.n, cfg.V, cfg.phi1, cfg.phi2)
    return [mean_report(f"mean M_(V={cfg.V:g}, [{cfg.phi1:.6g}, {cfg.phi2:.6g}])", counts, ref,
                        cfg.rel_tol, notes="reference is the main term (remainder O(2^-n) omitted)",
                        resolution=1.0 / len(counts))]


# ----------------------------------------------------------------- Campbell

def count_tuples(points: np.ndarray, angle: Callable[[int, int], float], box, angle_box=None) -> int:
    """Ordered k-tuples of distinct indices with points[n_j] in box[j] and,
    if given, every pairwise angle in angle_box."""
    k = len(box)
    cands = [[i for i, x in enumerate(points) if a <= x <= b] for a, b in box]
    total = 0
    for tup in itertools.product(*cands):
        if len(set(tup)) < k:
            continue
        if angle_box is not None:
            lo, hi = angle_box
            if not all(lo <= angle(tup[a], tup[b]) <= hi for a, b in itertools.combinations(range(k), 2)):
                continue
        total += 1
    return total


def _campbell_limit_trial(cfg: ExperimentConfig, t: int):
    horizon = max(b for _, b in cfg.box)
    s = sample_limit_process(horizon, cfg.sampler(t))
    return t, count_tuples(s.points, s.angle, cfg.box, cfg.angle_box)


def _campbell_lattice_trial(cfg: ExperimentConfig, t: int):
    horizon = max(b for _, b in cfg.box)
    basis, coords, nsq = _ball_vectors(cfg, t, horizon)
    ls = basis.log_scale()
    vols = np.array([math.exp(log_volume(cfg.n, ls, int(q))) for q in nsq])
    g = coords @ coords.T
    rt = math.sqrt(cfg.n)

    def angle(i, j):
        c2 = int(g[i, j]) ** 2 / (int(nsq[i]) * int(nsq[j]))
        return rt * (math.pi / 2 - math.acos(min(1.0, math.sqrt(c2))))

    return t, count_tuples(vols, angle, cfg.box, cfg.angle_box)


def run_campbell(cfg: ExperimentConfig, sink: Sink = None, lattice_side: bool = True) -> list[StatReport]:
    ref = limits.campbell_expectation(cfg.box, cfg.angle_box)
    lim = _collect(_campbell_limit_trial, cfg, cfg.trials, sink, lambda r: ["limit", *r])
    reports = [mean_report("limit-side tuple sum", np.array([r[1] for r in lim], dtype=float), ref,
                           resolution=1.0 / len(lim))]
    if lattice_side and cfg.lattice_trials > 0:
        lat = _collect(_campbell_lattice_trial, cfg, cfg.lattice_trials, sink, lambda r: ["lattice", *r])
        reports.append(mean_report(f"lattice-side tuple sum (n={cfg.n})",
                                   np.array([r[1] for r in lat], dtype=float), ref, cfg.rel_tol,
                                   resolution=1.0 / len(lat)))
    return reports


# -------------------------------------------------------- successive minima

def minima_header(N: int) -> list[str]:
    return ["trial"] + [f"lambdaV{i + 1}" for i in range(N)] + ["coincide", "ties"]


def _minima_trial(cfg: ExperimentConfig, t: int):
    sp = spectrum(sample_lattice(cfg.sampler(t)), cfg.N, cfg.delta)
    lv = log_unit_ball_volume(cfg.n)
    vols = [math.exp(lv + cfg.n * math.log(x)) for x in sp.successive_minima]
    return t, vols, sp.minima_coincide, sp.has_ties


def run_successive_minima(cfg: ExperimentConfig, sink: Sink = None) -> list[StatReport]:
    res = _collect(_minima_trial, cfg, cfg.trials, sink, lambda r: [r[0], *r[1], r[2], r[3]])
    vols = np.array([r[1] for r in res])
    coincide = np.array([r[2] for r in res], dtype=float)
    frac, se = (float(coincide.mean()), 0.0) if len(coincide) < 2 else mean_ci(coincide)
    reports = [StatReport("coincidence fraction", len(coincide), frac, cfg.coincidence_min,
                          frac >= cfg.coincidence_min, mean=frac, std_err=se)]
    for i in range(cfg.N):
        reports.append(ks_report(f"KS V_n lambda{i + 1}^n vs Poisson(1/2) point {i + 1}", vols[:, i],
                                 partial(limits.poisson_gap_cdf, i + 1), cfg.allowance))
    return reports


RUNNERS = {
    "joint-law": (run_joint_law, joint_law_header),
    "sphere-angles": (run_sphere_angles, sphere_header),
    "concentration": (run_concentration, concentration_header),
    "rogers-expectation": (run_rogers_expectation, lambda N: ["trial", "vectors", "M"]),
    "campbell": (run_campbell, lambda N: ["side", "trial", "count"]),
    "successive-minima": (run_successive_minima, minima_header),
}


def run_experiment(cfg: ExperimentConfig, sink: Sink = None) -> list[StatReport]:
    cfg.validate()
    return RUNNERS[cfg.experiment][0](cfg, sink)
