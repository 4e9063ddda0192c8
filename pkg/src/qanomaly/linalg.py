"""Dense complex matrices, the real Lie algebra u(n), and realified ranks.

Matrices are plain ``numpy`` complex arrays.  ``u(n)`` is handled as a real
vector space of dimension ``n**2`` through the canonical basis

    i E_kk,   (E_kl - E_lk)/sqrt(2),   i (E_kl + E_lk)/sqrt(2)   (k < l)

which is orthonormal for the pairing ``<a, b> = -tr(a b)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import InputError, NumericalError

__all__ = [
    "AntiHermitianMatrix",
    "anti_hermitize",
    "as_matrix",
    "commutator",
    "frobenius",
    "from_coords",
    "hermiticity_defect",
    "inner",
    "real_rank",
    "realify_map",
    "to_coords",
    "u_basis",
]

HERMITICITY_TOL = 1e-10


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate ``a`` as a finite square matrix and return a complex copy."""
    m = np.array(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise InputError(f"{name} must be a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InputError(f"{name} has non-finite entries")
    return m


def frobenius(a) -> float:
    return float(np.linalg.norm(a))


def commutator(a, b) -> np.ndarray:
    """Return ``ab - ba``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 2:
        raise InputError(f"commutator of incompatible shapes {a.shape} and {b.shape}")
    return a @ b - b @ a


def hermiticity_defect(h) -> float:
    """Frobenius norm of ``h - h^H``."""
    h = np.asarray(h)
    return frobenius(h - h.conj().T)


@dataclass(frozen=True)
class AntiHermitianMatrix:
    """An element of u(n), i.e. a matrix ``a`` with ``a^H = -a``."""

    inner: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.inner, "anti-Hermitian matrix")
        defect = frobenius(m + m.conj().T)
        if defect > HERMITICITY_TOL * max(1.0, frobenius(m)):
            raise InputError(f"matrix is not anti-Hermitian: ||a + a^H||_F = {defect:.3e}")
        m.setflags(write=False)
        object.__setattr__(self, "inner", m)

    @property
    def dim(self) -> int:
        return self.inner.shape[0]

    def hermitian(self) -> np.ndarray:
        """The Hermitian observable ``-i a``."""
        return -1j * self.inner

    def norm(self) -> float:
        return frobenius(self.inner)

    def __array__(self, dtype=None, copy=None):
        return self.inner if dtype is None else self.inner.astype(dtype)


def anti_hermitize(h, tol: float = HERMITICITY_TOL) -> AntiHermitianMatrix:
    """Map a Hermitian ``h`` to ``i h``."""
    m = as_matrix(h, "Hermitian matrix")
    defect = hermiticity_defect(m)
    if defect > tol * max(1.0, frobenius(m)):
        raise InputError(f"matrix is not Hermitian: ||h - h^H||_F = {defect:.3e}")
    return AntiHermitianMatrix(1j * m)


@lru_cache(maxsize=32)
def _u_basis(n: int) -> np.ndarray:
    out = np.zeros((n * n, n, n), dtype=complex)
    idx = 0
    for k in range(n):
        out[idx, k, k] = 1j
        idx += 1
    s = 1.0 / np.sqrt(2.0)
    for k in range(n):
        for l in range(k + 1, n):
            out[idx, k, l] = s
            out[idx, l, k] = -s
            idx += 1
            out[idx, k, l] = 1j * s
            out[idx, l, k] = 1j * s
            idx += 1
    out.setflags(write=False)
    return out


def u_basis(n: int) -> np.ndarray:
    """Canonical orthonormal real basis of u(n), shape ``(n*n, n, n)``."""
    if n < 1:
        raise InputError("u(n) needs n >= 1")
    return _u_basis(int(n))


def inner(a, b) -> float:
    """Real pairing ``-tr(a b)`` on u(n)."""
    return float(-np.einsum("ij,ji->", a, b).real)


def to_coords(a, basis: np.ndarray | None = None) -> np.ndarray:
    """Real coordinates of the anti-Hermitian ``a`` in an orthonormal basis."""
    a = np.asarray(a)
    if basis is None:
        basis = u_basis(a.shape[0])
    return -np.einsum("kij,ji->k", basis, a).real


def from_coords(coords, basis: np.ndarray) -> np.ndarray:
    return np.einsum("k,kij->ij", np.asarray(coords, dtype=float), basis)


def realify_map(
    fn: Callable[..., Sequence[np.ndarray]], n: int, n_inputs: int
) -> np.ndarray:
    """Real matrix of a linear map ``u(n)^n_inputs -> u(n)^m``.

    ``fn`` takes ``n_inputs`` anti-Hermitian matrices and returns a sequence
    of anti-Hermitian matrices.  Columns are indexed by (input slot, basis
    element), rows by (output slot, basis element).
    """
    basis = u_basis(n)
    zero = np.zeros((n, n), dtype=complex)
    columns = []
    for slot in range(n_inputs):
        for e in basis:
            args = [zero] * n_inputs
            args[slot] = e
            out = fn(*args)
            columns.append(np.concatenate([to_coords(o, basis) for o in out]))
    return np.array(columns).T


def real_rank(
    m, tol: float = 1e-9, ambiguity_factor: float | None = None, scale: float = 0.0
) -> int:
    """Number of singular values above ``tol`` times the largest one.

    ``scale`` floors that reference value; pass the size of the data the
    map was built from, so a map that is pure round-off counts as zero.

    With ``ambiguity_factor`` set, a singular value within that factor of the
    threshold (on either side) raises :class:`NumericalError` instead of being
    silently classified.
    """
    m = np.asarray(m)
    if m.ndim != 2:
        raise InputError(f"real_rank expects a 2-d array, got shape {m.shape}")
    if np.iscomplexobj(m):
        raise InputError("real_rank expects a real matrix; realify complex maps first")
    if m.size == 0:
        return 0
    sv = np.linalg.svd(m, compute_uv=False)
    ref = max(float(sv[0]), float(scale))
    if ref == 0.0:
        return 0
    threshold = tol * ref
    if ambiguity_factor is not None:
        lo, hi = threshold / ambiguity_factor, threshold * ambiguity_factor
        near = sv[(sv > lo) & (sv < hi)]
        if near.size:
            raise NumericalError(
                f"rank ambiguous: singular value(s) {near.tolist()} within a factor "
                f"{ambiguity_factor:g} of threshold {threshold:.3e}"
            )
    return int(np.count_nonzero(sv > threshold))
