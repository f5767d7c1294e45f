import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shortvec.lattice import (
    DegenerateBasisError,
    LatticeBasis,
    LatticeVector,
    ball_volume,
    bareiss_det,
    canonical_sign,
    cos_sq_fraction,
    covolume,
    hermite_normal_form,
    integer_rank,
    scaled_angle,
    symmetrized_angle,
)

from conftest import fraction_det, fraction_rank

small_ints = st.integers(-50, 50)


def vec(*c):
    return LatticeVector.from_coeffs(c)


def square(n_min=1, n_max=5, lo=-9, hi=9):
    return st.integers(n_min, n_max).flatmap(
        lambda n: st.lists(st.lists(st.integers(lo, hi), min_size=n, max_size=n), min_size=n, max_size=n)
    )


# ---------------------------------------------------------------- covolume

def test_covolume_identity():
    assert covolume(LatticeBasis([[1, 0], [0, 1]], 1.0)) == 1.0


def test_covolume_index_two():
    b = LatticeBasis([[2, 0], [0, 1]], 2 ** -0.5)
    assert covolume(b) == pytest.approx(1.0, rel=1e-15)


def test_covolume_unimodular():
    assert covolume(LatticeBasis([[1, 0], [3, 1]], 1.0)) == 1.0


def test_covolume_degenerate():
    with pytest.raises(DegenerateBasisError, match="degenerate basis"):
        covolume(LatticeBasis([[1, 2], [2, 4]], 1.0))
    with pytest.raises(DegenerateBasisError):
        LatticeBasis.unit_covolume([[0, 0], [0, 1]])


def test_unit_covolume_big_determinant():
    p = 1_000_003
    rows = [[p if i == j else 0 for j in range(40)] for i in range(40)]
    rows[0] = [1] + [7] * 39
    b = LatticeBasis.unit_covolume(rows)
    assert b.det == p**39
    assert covolume(b) == pytest.approx(1.0, abs=1e-12)


@given(square())
def test_bareiss_matches_fraction_elimination(rows):
    assert bareiss_det(rows) == fraction_det(rows)


@given(st.lists(st.lists(st.integers(-4, 4), min_size=4, max_size=4), min_size=1, max_size=6))
def test_integer_rank_matches_fractions(rows):
    assert integer_rank(rows) == fraction_rank(rows)


@given(square(2, 4), st.lists(st.integers(-3, 3), min_size=12, max_size=12))
def test_hnf_invariant_under_unimodular_moves(rows, ops):
    if bareiss_det(rows) == 0:
        return
    moved = [list(r) for r in rows]
    n = len(moved)
    for k, c in enumerate(ops):
        i, j = k % n, (k + 1) % n
        moved[i] = [a + c * b for a, b in zip(moved[i], moved[j])]
    moved.reverse()
    assert hermite_normal_form(rows) == hermite_normal_form(moved)


def test_hnf_shape():
    h = hermite_normal_form([[4, 6], [2, 9]])
    assert h[0][0] > 0 and h[1][0] == 0 and 0 <= h[0][1] < h[1][1]
    assert abs(h[0][0] * h[1][1]) == abs(bareiss_det([[4, 6], [2, 9]]))


# ----------------------------------------------------------- LatticeVector

def test_vector_canonical_sign_and_norm():
    v = vec(0, -3, 4)
    assert v.coeffs == (0, 3, -4) and v.norm_sq == 25
    with pytest.raises(ValueError):
        LatticeVector(3, (1, 1))


def test_vector_norms_are_exact_bigints():
    big = 10**30
    v = vec(big, 1)
    assert v.norm_sq == big * big + 1


@given(st.lists(small_ints, min_size=1, max_size=6))
def test_canonical_sign_first_nonzero_positive(c):
    out = canonical_sign(c)
    nz = [x for x in out if x]
    assert not nz or nz[0] > 0
    assert out == c or out == [-x for x in c]


# ------------------------------------------------------- symmetrized angle

def test_angle_examples():
    assert symmetrized_angle(vec(1, 0), vec(0, 1)) == pytest.approx(math.pi / 2, abs=1e-15)
    assert symmetrized_angle(vec(1, 0), vec(1, 1)) == pytest.approx(math.pi / 4, abs=1e-15)
    assert symmetrized_angle(vec(1, 0), LatticeVector.from_coeffs((-3, 0), canonical=False)) == 0.0


def test_angle_zero_vector():
    with pytest.raises(ValueError):
        symmetrized_angle(vec(0, 0), vec(1, 0))


nonzero_vecs = st.integers(2, 6).flatmap(
    lambda n: st.tuples(
        st.lists(small_ints, min_size=n, max_size=n).filter(any),
        st.lists(small_ints, min_size=n, max_size=n).filter(any),
    )
)


@given(nonzero_vecs)
def test_angle_symmetry_and_sign_invariance(pair):
    a, b = pair
    v = LatticeVector.from_coeffs(a, canonical=False)
    w = LatticeVector.from_coeffs(b, canonical=False)
    phi = symmetrized_angle(v, w)
    assert 0.0 <= phi <= math.pi / 2
    assert phi == symmetrized_angle(w, v) == symmetrized_angle(-v, w)


@given(st.integers(2, 40).flatmap(lambda n: st.tuples(
    st.lists(st.integers(-10**4, 10**4), min_size=n, max_size=n).filter(any),
    st.lists(st.integers(-10**4, 10**4), min_size=n, max_size=n).filter(any))))
def test_exact_cos_sq_matches_float(pair):
    v = LatticeVector.from_coeffs(pair[0], canonical=False)
    w = LatticeVector.from_coeffs(pair[1], canonical=False)
    exact = cos_sq_fraction(v, w)
    x, y = np.array(pair[0], float), np.array(pair[1], float)
    flt = (x @ y) ** 2 / ((x @ x) * (y @ y))
    assert abs(float(exact) - flt) <= 1e-12
    assert isinstance(exact, Fraction)


def test_angle_huge_entries_near_orthogonal():
    # a float dot product would lose the +1 completely
    big = 10**20
    v = vec(big, 1)
    w = vec(-1, big)
    assert cos_sq_fraction(v, w) == 0
    w2 = vec(1, big)
    assert 0 < cos_sq_fraction(v, w2) < Fraction(1, 10**38)


# ------------------------------------------------------------ scaled angle

def test_scaled_angle_examples():
    assert scaled_angle(4, math.pi / 2) == 0.0
    assert scaled_angle(2, math.pi / 4) == pytest.approx(math.sqrt(2) * math.pi / 4, rel=1e-15)
    assert scaled_angle(2, math.pi / 4) == pytest.approx(1.11072, abs=1e-5)
    assert scaled_angle(9, 0.0) == pytest.approx(1.5 * math.pi, rel=1e-15)


def test_scaled_angle_domain():
    with pytest.raises(ValueError):
        scaled_angle(3, -0.1)
    with pytest.raises(ValueError):
        scaled_angle(3, 2.0)


# ------------------------------------------------------------- ball volume

def test_ball_volume_examples():
    assert ball_volume(2, 1.0) == pytest.approx(math.pi, rel=1e-14)
    assert ball_volume(3, 1.0) == pytest.approx(4 * math.pi / 3, rel=1e-14)
    assert ball_volume(20, 1.0) == pytest.approx(math.pi**10 / math.factorial(10), rel=1e-13)
    assert ball_volume(20, 1.0) == pytest.approx(0.02580689, abs=1e-8)


def test_ball_volume_large_n_no_overflow():
    v = ball_volume(200, 1.0)
    assert 0 < v < 1e-100
    assert math.isfinite(ball_volume(200, 3.0))


@given(st.integers(1, 200), st.floats(0.1, 3.0), st.floats(0.5, 2.0))
def test_ball_volume_homogeneous(n, ell, c):
    assert ball_volume(n, ell * c) == pytest.approx(c**n * ball_volume(n, ell), rel=1e-12)


@given(st.integers(1, 100), st.floats(0.1, 3.0))
def test_ball_volume_increasing(n, ell):
    assert ball_volume(n, ell * 1.001) > ball_volume(n, ell)
