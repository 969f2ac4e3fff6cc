"""Pure-numpy implementations of the hot kernels.

Every function here has a twin in ``_numba.py`` with an identical signature.
"""

import numpy as np

# relative norm below which a column counts as lying in the current span
SPAN_TOL = 1e-10


def orthogonal_components(phi, v, z):
    """Return ``W = (I - V Z V^H) phi`` and the squared column norms of ``W``."""
    if v.shape[1] == 0:
        w = phi.copy()
    else:
        w = phi - v @ (z @ (v.conj().T @ phi))
    energies = np.einsum("ij,ij->j", w.conj(), w).real
    return w, energies


def subset_values(phi, r, subsets):
    """Evaluate ``trace(P_S R)`` for a batch of index sets.

    ``subsets`` is an int64 array of shape (B, kmax), rows padded with -1.
    The orthonormal basis of each span is built by twice-iterated Gram-Schmidt,
    vectorised over the batch; columns already in the span contribute nothing.
    """
    b, kmax = subsets.shape
    m = phi.shape[0]
    out = np.zeros(b)
    if b == 0 or kmax == 0:
        return out
    q = np.zeros((b, m, kmax), dtype=np.complex128)
    for j in range(kmax):
        idx = subsets[:, j]
        valid = idx >= 0
        a = phi[:, np.where(valid, idx, 0)].T * valid[:, None]
        ref = np.sqrt(np.einsum("bi,bi->b", a.conj(), a).real)
        w = a.copy()
        for _ in range(2):
            for l in range(j):
                ql = q[:, :, l]
                w -= ql * np.einsum("bi,bi->b", ql.conj(), w)[:, None]
        nw = np.sqrt(np.einsum("bi,bi->b", w.conj(), w).real)
        keep = valid & (nw > SPAN_TOL * ref)
        safe = np.where(keep, nw, 1.0)
        qj = np.where(keep[:, None], w / safe[:, None], 0.0)
        q[:, :, j] = qj
        out += np.einsum("bi,ij,bj->b", qj.conj(), r, qj).real
    return out
