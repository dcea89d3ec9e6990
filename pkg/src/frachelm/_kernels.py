"""Compiled inner loops for the block operator and its block-Jacobi inverse.

Both kernels walk the ``(blocks, n)`` layout block by block in a fixed order,
so results do not depend on scheduling. Boundary entries of the input are
treated as zero in every product (their couplings are lifted to the
right-hand side) and boundary rows of the output copy the input.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _interior_tri(sub, main, sup, x, out):
    n = x.shape[0]
    for j in range(1, n - 1):
        xm = x[j - 1] if j > 1 else 0.0
        xp = x[j + 1] if j < n - 2 else 0.0
        out[j] = sub[j - 1] * xm + main[j] * x[j] + sup[j] * xp


@njit(cache=True)
def block_matvec(X, Ks, Km, Kp, Ms, Mm, Mp, k_sq, c, d, scaled, Y):
    P = c.shape[0]
    n = X.shape[1]

    wv = np.zeros(n, dtype=np.complex128)
    for j in range(1, n - 1):
        wv[j] = X[P, j] + X[P + 1, j]
    coupling = np.zeros(n, dtype=np.complex128)
    _interior_tri(Ms, Mm, Mp, wv, coupling)
    for j in range(n):
        coupling[j] *= -k_sq

    vsum = np.zeros(n, dtype=np.complex128)
    for l in range(P):
        cl = c[l]
        scale = 1.0 / d[l] if scaled else 1.0
        weight = 1.0 if scaled else d[l]
        for j in range(1, n - 1):
            x0 = X[l, j]
            xm = X[l, j - 1] if j > 1 else 0.0
            xp = X[l, j + 1] if j < n - 2 else 0.0
            a = (Ks[j - 1] + cl * Ms[j - 1]) * xm + (Km[j] + cl * Mm[j]) * x0 + (Kp[j] + cl * Mp[j]) * xp
            Y[l, j] = a * scale + coupling[j]
            vsum[j] += weight * x0
        Y[l, 0] = X[l, 0]
        Y[l, n - 1] = X[l, n - 1]

    w = np.zeros(n, dtype=np.complex128)
    diff = np.zeros(n, dtype=np.complex128)
    for j in range(1, n - 1):
        w[j] = X[P, j]
        diff[j] = X[P + 1, j] - vsum[j]
    kw = np.zeros(n, dtype=np.complex128)
    mdiff = np.zeros(n, dtype=np.complex128)
    _interior_tri(Ks, Km, Kp, w, kw)
    _interior_tri(Ms, Mm, Mp, diff, mdiff)
    for j in range(1, n - 1):
        Y[P, j] = kw[j]
        Y[P + 1, j] = mdiff[j]
    for b in range(P, P + 2):
        Y[b, 0] = X[b, 0]
        Y[b, n - 1] = X[b, n - 1]


@njit(cache=True, error_model="numpy")
def block_tridiag_factor(Ks, Km, Ms, Mm, a_k, a_m, scale, inv_pivot, mult):
    """LU factors of the interior of every diagonal block.

    Block ``b`` is ``(a_k[b] K + a_m[b] M1) / scale[b]`` on the interior rows
    (both matrices symmetric). ``mult[b, j]`` is the elimination multiplier
    of interior row ``j + 1``; the upper factor's off-diagonal is
    ``mult * pivot`` by symmetry, so it need not be stored.
    """
    B = a_k.shape[0]
    m = Km.shape[0] - 2
    for b in range(B):
        ak, am, inv = a_k[b], a_m[b], 1.0 / scale[b]
        piv = (ak * Km[1] + am * Mm[1]) * inv
        inv_pivot[b, 0] = 1.0 / piv
        for j in range(1, m):
            off = (ak * Ks[j] + am * Ms[j]) * inv
            ratio = off / piv
            mult[b, j - 1] = ratio
            piv = (ak * Km[j + 1] + am * Mm[j + 1]) * inv - ratio * off
            inv_pivot[b, j] = 1.0 / piv


@njit(cache=True)
def block_tridiag_solve(R, inv_pivot, mult, Y):
    """Apply the factors from :func:`block_tridiag_factor`; boundary rows pass through."""
    B, n = R.shape
    m = n - 2
    for b in range(B):
        Y[b, 0] = R[b, 0]
        Y[b, n - 1] = R[b, n - 1]
        prev = R[b, 1]
        Y[b, 1] = prev
        for j in range(1, m):
            prev = R[b, j + 1] - mult[b, j - 1] * prev
            Y[b, j + 1] = prev
        # upper factor has off-diagonals ratio * pivot, so U x = y gives
        # x_j = (y_j - ratio_j pivot_j x_{j+1}) / pivot_j
        nxt = Y[b, m] * inv_pivot[b, m - 1]
        Y[b, m] = nxt
        for j in range(m - 2, -1, -1):
            nxt = Y[b, j + 1] * inv_pivot[b, j] - mult[b, j] * nxt
            Y[b, j + 1] = nxt


# -- fused BiCG-STAB vector updates (sequential, so reductions are deterministic)

@njit(cache=True)
def update_direction(p, r, v, beta, omega):
    """``p <- r + beta (p - omega v)``."""
    for i in range(p.shape[0]):
        p[i] = r[i] + beta * (p[i] - omega * v[i])


@njit(cache=True)
def scaled_difference(out, a, b, alpha):
    """``out <- a - alpha b``."""
    for i in range(out.shape[0]):
        out[i] = a[i] - alpha * b[i]


@njit(cache=True)
def update_solution(x, r, p, s, t, alpha, omega):
    """``x <- x + alpha p + omega s`` and ``r <- s - omega t``; returns ``||r||^2``."""
    acc = 0.0
    for i in range(x.shape[0]):
        x[i] += alpha * p[i] + omega * s[i]
        ri = s[i] - omega * t[i]
        r[i] = ri
        acc += ri.real * ri.real + ri.imag * ri.imag
    return acc


@njit(cache=True)
def row_sq_norms(R):
    B, n = R.shape
    out = np.zeros(B)
    for b in range(B):
        acc = 0.0
        for j in range(n):
            acc += R[b, j].real * R[b, j].real + R[b, j].imag * R[b, j].imag
        out[b] = acc
    return out
