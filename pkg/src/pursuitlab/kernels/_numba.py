"""numba-compiled twins of the kernels in ``_numpy.py``.

Importing this module requires numba; the dispatcher in ``__init__`` only does
so when the accelerated backend is selected.
"""

import numpy as np
from numba import njit

from ._numpy import SPAN_TOL


@njit(cache=True)
def orthogonal_components(phi, v, z):
    m, n = phi.shape
    k = v.shape[1]
    w = phi.copy()
    energies = np.zeros(n)
    coef = np.zeros(k, dtype=np.complex128)
    zc = np.zeros(k, dtype=np.complex128)
    for col in range(n):
        # zc = Z (V^H phi_col); w_col -= V zc
        for a in range(k):
            acc = 0j
            for i in range(m):
                acc += np.conj(v[i, a]) * phi[i, col]
            coef[a] = acc
        for a in range(k):
            acc = 0j
            for b in range(k):
                acc += z[a, b] * coef[b]
            zc[a] = acc
        e = 0.0
        for i in range(m):
            acc = w[i, col]
            for a in range(k):
                acc -= v[i, a] * zc[a]
            w[i, col] = acc
            e += acc.real * acc.real + acc.imag * acc.imag
        energies[col] = e
    return w, energies


@njit(cache=True)
def _subset_value(phi, r, row, q, w):
    m = phi.shape[0]
    kmax = row.shape[0]
    nq = 0
    total = 0.0
    for j in range(kmax):
        idx = row[j]
        if idx < 0:
            continue
        ref = 0.0
        for i in range(m):
            w[i] = phi[i, idx]
            ref += w[i].real ** 2 + w[i].imag ** 2
        ref = np.sqrt(ref)
        for _ in range(2):
            for l in range(nq):
                dot = 0j
                for i in range(m):
                    dot += np.conj(q[i, l]) * w[i]
                for i in range(m):
                    w[i] -= dot * q[i, l]
        nw = 0.0
        for i in range(m):
            nw += w[i].real ** 2 + w[i].imag ** 2
        nw = np.sqrt(nw)
        if nw <= SPAN_TOL * ref or ref == 0.0:
            continue
        for i in range(m):
            q[i, nq] = w[i] / nw
        # q_j^H R q_j
        quad = 0j
        for i in range(m):
            acc = 0j
            for jj in range(m):
                acc += r[i, jj] * q[jj, nq]
            quad += np.conj(q[i, nq]) * acc
        total += quad.real
        nq += 1
    return total


@njit(cache=True)
def subset_values(phi, r, subsets):
    b, kmax = subsets.shape
    m = phi.shape[0]
    out = np.zeros(b)
    q = np.zeros((m, max(kmax, 1)), dtype=np.complex128)
    w = np.zeros(m, dtype=np.complex128)
    for s in range(b):
        out[s] = _subset_value(phi, r, subsets[s], q, w)
    return out
