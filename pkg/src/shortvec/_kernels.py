"""Compiled inner loops: floating Gram-Schmidt LLL on int64 bases and
Fincke-Pohst enumeration of all lattice points in a ball.

Both kernels work on exact int64 basis entries; callers are responsible for
keeping entries small enough that exact dot products cannot overflow.
"""

import numpy as np
from numba import njit

ETA = 0.5 + 1e-9

LLL_OK = 0
LLL_OVERFLOW = -1
LLL_STALLED = -2
MAX_LLL_LOOPS = 50_000_000

ENUM_OK = 0
ENUM_BUFFER_FULL = -1
ENUM_NODE_CAP = -2


@njit(cache=True)
def _idot(B, i, j):
    s = 0
    for t in range(B.shape[1]):
        s += B[i, t] * B[j, t]
    return s


@njit(cache=True)
def _gs_row(B, r, mu, k):
    # r[k, j] = <b_k, b*_j>, mu[k, j] = r[k, j] / r[j, j]
    for j in range(k):
        acc = float(_idot(B, k, j))
        for i in range(j):
            acc -= mu[j, i] * r[k, i]
        r[k, j] = acc
        mu[k, j] = acc / r[j, j]
    acc = float(_idot(B, k, k))
    for j in range(k):
        acc -= mu[k, j] * r[k, j]
    r[k, k] = acc


@njit(cache=True)
def lll_inplace(B, delta, bound):
    """LLL-reduce the rows of int64 matrix B in place.

    Returns LLL_OK, LLL_OVERFLOW if some entry exceeded ``bound``, or
    LLL_STALLED if the loop budget ran out.  On failure B is left in an
    unspecified but still unimodularly equivalent state.
    """
    n = B.shape[0]
    d = B.shape[1]
    mu = np.zeros((n, n))
    r = np.zeros((n, n))
    r[0, 0] = float(_idot(B, 0, 0))
    k = 1
    loops = 0
    while k < n:
        loops += 1
        if loops > MAX_LLL_LOOPS:
            return LLL_STALLED
        for _ in range(100):
            _gs_row(B, r, mu, k)
            changed = False
            for j in range(k - 1, -1, -1):
                m = mu[k, j]
                if abs(m) > ETA:
                    q = np.rint(m)
                    qi = np.int64(q)
                    for t in range(d):
                        B[k, t] -= qi * B[j, t]
                    for i in range(j):
                        mu[k, i] -= q * mu[j, i]
                    mu[k, j] -= q
                    changed = True
            if changed:
                for t in range(d):
                    if abs(B[k, t]) > bound:
                        return LLL_OVERFLOW
            else:
                break
        if r[k, k] < (delta - mu[k, k - 1] * mu[k, k - 1]) * r[k - 1, k - 1]:
            for t in range(d):
                tmp = B[k, t]
                B[k, t] = B[k - 1, t]
                B[k - 1, t] = tmp
            if k == 1:
                r[0, 0] = float(_idot(B, 0, 0))
            else:
                k -= 1
        else:
            k += 1
    return LLL_OK


@njit(cache=True)
def gram_schmidt(B):
    n = B.shape[0]
    mu = np.zeros((n, n))
    r = np.zeros((n, n))
    r[0, 0] = float(_idot(B, 0, 0))
    for k in range(1, n):
        _gs_row(B, r, mu, k)
    bs = np.empty(n)
    for i in range(n):
        bs[i] = r[i, i]
        mu[i, i] = 1.0
    return mu, bs


@njit(cache=True)
def enumerate_ball(mu, bs, radius_sq, out, node_cap):
    """Collect coefficient vectors x != 0 with |sum x_i b_i|^2 <= radius_sq.

    One of each +-pair is produced: the one whose last nonzero coefficient is
    positive.  Results are written to ``out`` (rows = coefficient vectors).
    Returns (count, status).
    """
    n = bs.shape[0]
    x = np.zeros(n, dtype=np.int64)
    hi = np.zeros(n, dtype=np.int64)
    c = np.zeros(n)
    part = np.zeros(n + 1)
    nodes = np.zeros(n, dtype=np.int64)
    count = 0

    i = n - 1
    # all coefficients above the top level are zero: take x >= 0 only
    rad = np.sqrt(radius_sq / bs[i])
    x[i] = -1
    hi[i] = np.int64(np.floor(rad))
    while True:
        x[i] += 1
        if x[i] > hi[i]:
            i += 1
            if i == n:
                break
            continue
        nodes[i] += 1
        if nodes[i] > node_cap:
            return count, ENUM_NODE_CAP
        diff = x[i] - c[i]
        part[i] = part[i + 1] + diff * diff * bs[i]
        if part[i] > radius_sq:
            continue
        if i == 0:
            nz = False
            for t in range(n):
                if x[t] != 0:
                    nz = True
                    break
            if nz:
                if count >= out.shape[0]:
                    return count, ENUM_BUFFER_FULL
                for t in range(n):
                    out[count, t] = x[t]
                count += 1
            continue
        # descend
        above_zero = True
        for t in range(i, n):
            if x[t] != 0:
                above_zero = False
                break
        i -= 1
        ci = 0.0
        for j in range(i + 1, n):
            ci -= x[j] * mu[j, i]
        c[i] = ci
        rem = radius_sq - part[i + 1]
        if rem < 0.0:
            rem = 0.0
        rad = np.sqrt(rem / bs[i])
        if above_zero:
            x[i] = -1
        else:
            x[i] = np.int64(np.ceil(ci - rad)) - 1
        hi[i] = np.int64(np.floor(ci + rad))
    return count, ENUM_OK
