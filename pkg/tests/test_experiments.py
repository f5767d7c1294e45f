import io
import math

import numpy as np
import pytest

from shortvec import experiments as ex
from shortvec import limits
from shortvec.experiments import ConfigError, ExperimentConfig, run_experiment
from shortvec.io import CsvRowWriter
from shortvec.sampler import SamplerConfig, sample_limit_law


def cfg(**kw):
    return ExperimentConfig(**kw).validate()


def csv_of(c):
    buf = io.StringIO()
    w = CsvRowWriter(buf, ex.RUNNERS[c.experiment][1](c.N))
    reports = run_experiment(c, w)
    return buf.getvalue(), reports


@pytest.mark.parametrize("bad", [
    dict(experiment="nope"),
    dict(experiment="joint-law", n=6, N=3),
    dict(experiment="joint-law", N=1),
    dict(experiment="campbell", box=((0, 1),) * 5),
    dict(experiment="campbell", box=((0, 1),)),
    dict(experiment="campbell", box=((1, 0), (0, 1))),
    dict(experiment="rogers-expectation", phi1=1.0, phi2=0.5),
    dict(experiment="successive-minima", n=3, N=4),
    dict(experiment="concentration", C=(-1.0,)),
    dict(experiment="sphere-angles", prime=10),
    dict(experiment="sphere-angles", trials=0),
])
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        ExperimentConfig(**bad).validate()


def test_joint_law_small_run_and_header():
    text, reports = csv_of(cfg(experiment="joint-law", n=10, N=3, trials=40, seed=1))
    lines = text.split("\n")
    assert lines[0] == "trial,V1,V2,V3,phi12,phi13,phi23,ties"
    assert len(lines) == 42 and lines[-1] == ""
    assert all(len(l.split(",")) == 8 for l in lines[1:-1])
    names = [r.name for r in reports]
    assert any(n.startswith("KS phi12") for n in names) and "mean V1 vs 2" in names
    assert all(r.threshold is not None and r.sample_size > 0 for r in reports)


def test_parallelism_does_not_change_output():
    c1 = cfg(experiment="joint-law", n=10, N=3, trials=30, seed=4)
    c2 = cfg(experiment="joint-law", n=10, N=3, trials=30, seed=4, parallelism=2)
    a, ra = csv_of(c1)
    b, rb = csv_of(c2)
    assert a == b
    assert [r.to_dict() for r in ra] == [r.to_dict() for r in rb]


def test_ties_excluded_from_angle_marginals():
    # a small prime in dimension 8 produces many equal-length vectors
    c = cfg(experiment="joint-law", n=8, N=3, trials=30, prime=7)
    text, reports = csv_of(c)
    ties = sum(int(l.split(",")[-1]) for l in text.split("\n")[1:-1])
    assert 0 < ties < 27
    ks_phi = next(r for r in reports if r.name.startswith("KS phi12"))
    ks_v = next(r for r in reports if r.name.startswith("KS V1"))
    assert ks_phi.sample_size == 30 - ties and ks_v.sample_size == 30
    assert f"{ties} tie-flagged" in ks_phi.notes


def test_all_trials_tied_is_reported_not_crashed():
    reports = run_experiment(cfg(experiment="joint-law", n=8, N=3, trials=10, prime=2))
    last = reports[-1]
    assert last.name == "tie-free trials" and not last.verdict and last.sample_size == 0


def test_sphere_two_dim_uniform():
    reports = run_experiment(cfg(experiment="sphere-angles", n=2, N=2, trials=10**4, allowance=0.02))
    exact = next(r for r in reports if "exact finite-n" in r.name)
    assert exact.statistic <= 0.02 and exact.verdict
    # at n = 2 the exact law is uniform on [0, pi]
    assert float(ex.angle_cdf(2, 1.0)) == pytest.approx(1 / math.pi)


def test_angle_cdf_matches_quadrature():
    for n in (3, 7, 30):
        for x in (0.3, 1.0, 1.5, 2.5):
            assert float(ex.angle_cdf(n, x)) == pytest.approx(limits.finite_n_angle_mass(n, 0.0, x), abs=1e-10)


def test_concentration_nested_and_trivial():
    c = cfg(experiment="concentration", n=12, N=3, trials=200, C=(0.0, 1.0, 2.0, 4.0, 6.0))
    reports = run_experiment(c)
    est = [r.mean for r in reports]
    assert est[0] == 1.0
    assert all(a >= b for a, b in zip(est, est[1:]))
    assert reports[0].reference == 1.0


def test_concentration_limit_probability():
    assert ex.concentration_limit_probability(2, 1.0) == pytest.approx(1 - limits.half_normal_cdf(1.0))
    assert ex.concentration_limit_probability(3, 6.0) < 1e-8


def test_concentration_n30_c6():
    reports = run_experiment(cfg(experiment="concentration", n=30, N=2, trials=5000, C=(6.0,)))
    assert reports[0].mean <= 0.02


def test_rogers_empty_ball():
    (r,) = run_experiment(cfg(experiment="rogers-expectation", n=12, V=0.01, trials=200))
    assert r.mean == 0.0 and r.reference == pytest.approx(1.25e-5)
    assert r.verdict


def test_rogers_counts_against_direct_enumeration():
    from shortvec.lattice import cos_sq_fraction
    from shortvec.reduction import vectors_within
    from shortvec.sampler import sample_lattice

    c = cfg(experiment="rogers-expectation", n=10, V=4.0, phi1=0.0, phi2=1.2, trials=5)
    for t in range(5):
        _, m, count = ex._rogers_trial(c, t)
        b = sample_lattice(c.sampler(t))
        vs = vectors_within(b, math.floor(ex.volume_bound_sq(10, b.log_scale(), 4.0)))
        assert len(vs) == m
        want = sum(1 for i in range(m) for j in range(i + 1, m)
                   if math.acos(math.sqrt(cos_sq_fraction(vs[i], vs[j]))) <= 1.2)
        assert count == want


def test_count_tuples_bruteforce():
    s = sample_limit_law(6, SamplerConfig(2, seed=2))
    box = [(0.0, 8.0), (2.0, 12.0)]
    ab = (0.2, 1.5)
    want = 0
    for i in range(6):
        for j in range(6):
            if i != j and box[0][0] <= s.points[i] <= box[0][1] and box[1][0] <= s.points[j] <= box[1][1]:
                if ab[0] <= s.angle(i, j) <= ab[1]:
                    want += 1
    assert ex.count_tuples(s.points, s.angle, box, ab) == want


def test_campbell_angle_box_limit_side():
    c = cfg(experiment="campbell", box=((0.0, 2.0), (0.0, 2.0)), angle_box=(0.0, 1.0), trials=20000,
            lattice_trials=0)
    (r,) = run_experiment(c)
    assert r.reference == pytest.approx(math.erf(1 / math.sqrt(2)))
    assert r.verdict


def test_campbell_lattice_side_runs():
    c = cfg(experiment="campbell", n=12, trials=100, lattice_trials=50)
    text, reports = csv_of(c)
    assert len(reports) == 2
    rows = text.split("\n")[1:-1]
    assert sum(r.startswith("lattice,") for r in rows) == 50


def test_successive_minima_single():
    reports = run_experiment(cfg(experiment="successive-minima", n=30, N=1, trials=100))
    assert reports[0].statistic == 1.0


def test_volume_bound():
    n, ls = 12, -0.7
    q = ex.volume_bound_sq(n, ls, 2.0)
    vol = math.exp(ex.log_unit_ball_volume(n) + n * ls + 0.5 * n * math.log(q))
    assert vol == pytest.approx(2.0, rel=1e-12)


def test_config_roundtrip_dict():
    d = cfg(experiment="campbell", box=((0, 1), (0, 2)), angle_box=(0, 1)).to_dict()
    assert d["box"] == [[0, 1], [0, 2]] and d["angle_box"] == [0, 1]
    assert list(d)[0] == "experiment"
    assert np.isfinite(d["phi2"])
