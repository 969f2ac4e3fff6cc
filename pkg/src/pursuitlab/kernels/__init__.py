"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import time. Set ``PURSUITLAB_DISABLE_NUMBA=1``
(or numba's own ``NUMBA_DISABLE_JIT=1``) to force the numpy path; the numpy
path is also used when numba cannot be imported.

Both implementations stay importable as ``kernels.numpy_impl`` and
``kernels.numba_impl`` (the latter is None without numba) so tests and the
benchmark can compare them directly.
"""

import os

import numpy as np

from . import _numpy as numpy_impl
from ._numpy import SPAN_TOL

__all__ = [
    "BACKEND",
    "SPAN_TOL",
    "numba_impl",
    "numpy_impl",
    "orthogonal_components",
    "pack_subsets",
    "subset_values",
]


def _flag(name):
    return os.environ.get(name, "").strip().lower() not in ("", "0", "false", "no")


try:
    from . import _numba as numba_impl
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba_impl = None

if numba_impl is None or _flag("PURSUITLAB_DISABLE_NUMBA") or _flag("NUMBA_DISABLE_JIT"):
    _impl = numpy_impl
    BACKEND = "numpy"
else:
    _impl = numba_impl
    BACKEND = "numba"


def _c128(a):
    return np.ascontiguousarray(a, dtype=np.complex128)


def orthogonal_components(phi, v, z):
    """Components of the columns of ``phi`` orthogonal to ``span(V)``.

    ``Z`` must be ``(V^H V)^-1``. Returns ``(W, energies)`` with ``W`` the same
    shape as ``phi`` and ``energies[j] = ||W[:, j]||^2``.
    """
    return _impl.orthogonal_components(_c128(phi), _c128(v), _c128(z))


def subset_values(phi, r, subsets):
    """``trace(P_S R)`` for every row ``S`` of a -1 padded index array."""
    subsets = np.ascontiguousarray(subsets, dtype=np.int64)
    if subsets.ndim != 2:
        raise ValueError("subsets must be a 2-D array padded with -1")
    return _impl.subset_values(_c128(phi), _c128(r), subsets)


def pack_subsets(sets, width=None):
    """Pack a sequence of index sets into a -1 padded int64 array."""
    sets = [tuple(s) for s in sets]
    if width is None:
        width = max((len(s) for s in sets), default=0)
    out = np.full((len(sets), width), -1, dtype=np.int64)
    for row, s in enumerate(sets):
        out[row, : len(s)] = s
    return out
