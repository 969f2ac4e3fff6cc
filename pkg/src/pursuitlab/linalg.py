"""Complex dense linear algebra: projections and the incremental Gram inverse.

A :class:`GramInverseState` holds the columns ``V`` appended so far together
with ``Z = (V^H V)^-1``. Appending a column updates ``Z`` with the block
(partitioned) inverse formula instead of re-inverting the Gram matrix.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .kernels import SPAN_TOL

__all__ = [
    "DimensionMismatch",
    "GramInverseState",
    "SPAN_TOL",
    "SpanDegeneracy",
    "append_column",
    "as_cvector",
    "gram_inverse_error",
    "orthogonal_component",
    "orthogonal_components",
    "project",
]


class DimensionMismatch(ValueError):
    """Operand lengths do not agree."""


class SpanDegeneracy(ValueError):
    """A column lies numerically inside the span of the current basis."""


def as_cvector(x, name="x"):
    x = np.asarray(x, dtype=np.complex128)
    if x.ndim != 1 or x.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} has non-finite entries")
    return x


@dataclass(frozen=True)
class GramInverseState:
    """Appended columns ``V`` (M x k) and ``Z = (V^H V)^-1`` (k x k)."""

    V: np.ndarray
    Z: np.ndarray

    @classmethod
    def empty(cls, m):
        return cls(np.zeros((m, 0), dtype=np.complex128), np.zeros((0, 0), dtype=np.complex128))

    @property
    def m(self):
        return self.V.shape[0]

    @property
    def k(self):
        return self.V.shape[1]

    def projector(self):
        """Dense ``V Z V^H``. Prefer :func:`project` for matrix-vector work."""
        return self.V @ self.Z @ self.V.conj().T


def _check_rows(basis, x):
    if x.shape[0] != basis.m:
        raise DimensionMismatch(f"expected {basis.m} rows, got {x.shape[0]}")


def project(basis, x):
    """Project ``x`` (vector or M x m matrix) onto ``span(V)``."""
    x = np.asarray(x, dtype=np.complex128)
    _check_rows(basis, x)
    if basis.k == 0:
        return np.zeros_like(x)
    return basis.V @ (basis.Z @ (basis.V.conj().T @ x))


def orthogonal_component(basis, phi):
    """Return ``v = phi - P phi`` and its energy ``||v||^2``."""
    phi = np.asarray(phi, dtype=np.complex128)
    if phi.ndim != 1:
        raise ValueError("phi must be a vector")
    _check_rows(basis, phi)
    v = phi - project(basis, phi)
    return v, float(np.vdot(v, v).real)


def orthogonal_components(basis, phi):
    """Column-wise :func:`orthogonal_component` for an M x N block."""
    phi = np.asarray(phi, dtype=np.complex128)
    _check_rows(basis, phi)
    return kernels.orthogonal_components(phi, basis.V, basis.Z)


def append_column(basis, v, recompute_inverse=False):
    """Return a new state with ``v`` appended to ``V``.

    ``Z`` is extended with the partitioned-inverse update

        Z' = [[F, -a Z b], [-a b^H Z, a]],  b = V^H v,
        a = 1 / (v^H v - b^H Z b),  F = Z + a (Z b)(Z b)^H.

    The denominator is evaluated as ``||v - V Z b||^2``, which equals
    ``v^H v - b^H Z b`` in exact arithmetic but does not cancel.
    ``recompute_inverse=True`` inverts the new Gram matrix directly instead.
    """
    v = as_cvector(v, "v")
    _check_rows(basis, v)
    if basis.k >= basis.m:
        raise SpanDegeneracy("basis already spans the whole space")
    b = basis.V.conj().T @ v
    zb = basis.Z @ b
    resid = v - basis.V @ zb
    denom = float(np.vdot(resid, resid).real)
    scale = float(np.vdot(v, v).real)
    if scale == 0.0 or denom <= (SPAN_TOL**2) * scale:
        raise SpanDegeneracy(
            f"column is in the current span (orthogonal energy {denom:.3e}, norm^2 {scale:.3e})"
        )
    v_new = np.column_stack([basis.V, v])
    if recompute_inverse:
        return GramInverseState(v_new, np.linalg.inv(v_new.conj().T @ v_new))
    alpha = 1.0 / denom
    k = basis.k
    z_new = np.empty((k + 1, k + 1), dtype=np.complex128)
    z_new[:k, :k] = basis.Z + alpha * np.outer(zb, zb.conj())
    z_new[:k, k] = -alpha * zb
    z_new[k, :k] = -alpha * zb.conj()
    z_new[k, k] = alpha
    return GramInverseState(v_new, z_new)


def gram_inverse_error(basis):
    """``max |Z (V^H V) - I|``; zero for an exact inverse."""
    if basis.k == 0:
        return 0.0
    g = basis.V.conj().T @ basis.V
    return float(np.max(np.abs(basis.Z @ g - np.eye(basis.k))))
