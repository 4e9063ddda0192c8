"""Chevalley-Eilenberg complex of the abelian pair and of general Lie algebras.

Abelian case: cochains of R^2 with values in u(V),

    degree 0:  w
    degree 1:  c^H x + c^S y
    degree 2:  c^H c^S z

with ``d = c^H ad_H + c^S ad_S``, so that ``d w = (c^H [H,w], c^S [S,w])`` and
``d(c^H x + c^S y) = c^H c^S ([H, y] - [S, x])``.

General case: ``d = c^i ad_{rho(e_i)} - 1/2 f_ij^k c^i c^j d/dc^k`` with the
c's anticommuting, written to the left of matrix coefficients, and the
derivative acting from the left.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Literal, Mapping

import numpy as np

from .errors import InputError, NotExactError, NumericalError, SpectrumError
from .linalg import commutator, frobenius, real_rank, realify_map, u_basis
from .spectral import (
    BlockIndex,
    CommutantBasis,
    JointSpectrum,
    SymmetryPair,
    block_project,
    commutant_basis,
)

__all__ = [
    "Cochain",
    "CohomologyReport",
    "GeneralCochain",
    "LieAlgebraData",
    "cohomology_bruteforce",
    "cohomology_theorem",
    "d_abelian",
    "d_general",
    "homotopy",
]

MAX_DIM_G = 8

_SLOTS = {0: ("w",), 1: ("x", "y"), 2: ("z",), 3: ()}


@dataclass(frozen=True)
class Cochain:
    """Cochain of the abelian complex.

    Degree 3 is the terminal zero cochain produced by applying ``d`` to a
    top-degree cochain; it carries no components but remembers ``dim``.
    """

    degree: int
    w: np.ndarray | None = None
    x: np.ndarray | None = None
    y: np.ndarray | None = None
    z: np.ndarray | None = None
    dim: int = 0
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.degree not in _SLOTS:
            raise InputError(f"cochain degree must be 0..3, got {self.degree}")
        wanted = _SLOTS[self.degree]
        dims = set()
        for name in ("w", "x", "y", "z"):
            value = getattr(self, name)
            if name in wanted:
                if value is None:
                    raise InputError(f"degree-{self.degree} cochain needs component {name!r}")
                value = np.asarray(value, dtype=complex)
                if value.ndim != 2 or value.shape[0] != value.shape[1]:
                    raise InputError(f"component {name!r} must be square, got {value.shape}")
                object.__setattr__(self, name, value)
                dims.add(value.shape[0])
            elif value is not None:
                raise InputError(f"degree-{self.degree} cochain has no component {name!r}")
        if len(dims) > 1:
            raise InputError(f"cochain components disagree in dimension: {sorted(dims)}")
        if dims:
            object.__setattr__(self, "dim", dims.pop())
        elif self.dim < 1:
            raise InputError("terminal cochain needs an explicit dim")

    @classmethod
    def zero(cls, degree: int, dim: int) -> "Cochain":
        zero = np.zeros((dim, dim), dtype=complex)
        return cls(degree, **{k: zero for k in _SLOTS[degree]}, dim=dim)

    @property
    def components(self) -> tuple[np.ndarray, ...]:
        return tuple(getattr(self, k) for k in _SLOTS[self.degree])

    def norm(self) -> float:
        return float(np.sqrt(sum(frobenius(c) ** 2 for c in self.components)))

    def map(self, fn) -> "Cochain":
        return Cochain(
            self.degree, **{k: fn(getattr(self, k)) for k in _SLOTS[self.degree]}, dim=self.dim
        )

    def __add__(self, other: "Cochain") -> "Cochain":
        if not isinstance(other, Cochain) or other.degree != self.degree:
            return NotImplemented
        vals = {k: getattr(self, k) + getattr(other, k) for k in _SLOTS[self.degree]}
        return Cochain(self.degree, **vals, dim=self.dim)

    def __sub__(self, other: "Cochain") -> "Cochain":
        if not isinstance(other, Cochain) or other.degree != self.degree:
            return NotImplemented
        vals = {k: getattr(self, k) - getattr(other, k) for k in _SLOTS[self.degree]}
        return Cochain(self.degree, **vals, dim=self.dim)

    def to_general(self) -> "GeneralCochain":
        """Same cochain with ``c^H = c^0`` and ``c^S = c^1``."""
        if self.degree == 0:
            comps = {(): self.w}
        elif self.degree == 1:
            comps = {(0,): self.x, (1,): self.y}
        elif self.degree == 2:
            comps = {(0, 1): self.z}
        else:
            raise InputError("the terminal cochain has no general counterpart")
        return GeneralCochain(self.degree, comps)


def d_abelian(c: Cochain, pair: SymmetryPair) -> Cochain:
    if c.dim != pair.dim:
        raise InputError(f"cochain dim {c.dim} does not match pair dim {pair.dim}")
    H, S = pair.H, pair.S
    if c.degree == 0:
        return Cochain(1, x=commutator(H, c.w), y=commutator(S, c.w))
    if c.degree == 1:
        return Cochain(2, z=commutator(H, c.y) - commutator(S, c.x))
    return Cochain(3, dim=c.dim)


@dataclass(frozen=True)
class LieAlgebraData:
    """Structure constants ``f[i, j, k]`` and representation matrices ``rep``.

    ``rep_tol=None`` skips the representation check, which is needed for
    truncated representations that only satisfy the brackets on a subspace.
    Entries may be exact (``Fraction`` object arrays); the checks then run
    exactly as well.
    """

    f: np.ndarray
    rep: tuple
    rep_tol: float | None = 1e-10
    jacobi_tol: float = 1e-10

    def __post_init__(self):
        f = np.asarray(self.f)
        dim_g = f.shape[0]
        if f.shape != (dim_g,) * 3 or dim_g < 1:
            raise InputError(f"structure constants must have shape (g, g, g), got {f.shape}")
        if dim_g > MAX_DIM_G:
            raise InputError(f"dim_g={dim_g} exceeds the supported maximum {MAX_DIM_G}")
        if len(self.rep) != dim_g:
            raise InputError(f"{len(self.rep)} representation matrices for dim_g={dim_g}")
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "rep", tuple(np.asarray(r) for r in self.rep))
        if _max_abs(f + f.transpose(1, 0, 2)) > self.jacobi_tol:
            raise InputError("structure constants are not antisymmetric in (i, j)")
        if self.jacobi_violation() > self.jacobi_tol:
            raise InputError(f"Jacobi identity fails by {self.jacobi_violation():.3e}")
        if self.rep_tol is not None and self.rep_violation() > self.rep_tol:
            raise InputError(f"representation property fails by {self.rep_violation():.3e}")

    @property
    def dim_g(self) -> int:
        return self.f.shape[0]

    def jacobi_violation(self) -> float:
        return jacobi_violation(self.f)

    def rep_violation(self) -> float:
        worst = 0.0
        for i in range(self.dim_g):
            for j in range(self.dim_g):
                lhs = commutator(self.rep[i], self.rep[j])
                for k in range(self.dim_g):
                    if self.f[i, j, k] != 0:
                        lhs = lhs - _scalar(self.f[i, j, k]) * self.rep[k]
                worst = max(worst, _max_abs(lhs))
        return worst


def jacobi_violation(f) -> float:
    """Max of ``|f_ij^l f_lk^m + f_jk^l f_li^m + f_ki^l f_lj^m|``."""
    f = np.asarray(f)
    t = np.tensordot(f, f, axes=([2], [0]))  # t[i,j,k,m] = f_ij^l f_lk^m
    total = t + t.transpose(1, 2, 0, 3) + t.transpose(2, 0, 1, 3)
    return _max_abs(total)


def _max_abs(a) -> float:
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(max(abs(v) for v in a.ravel())) if a.dtype == object else float(np.abs(a).max())


def _scalar(v):
    return v.item() if isinstance(v, np.generic) else v


@dataclass(frozen=True)
class GeneralCochain:
    """Degree-``p`` cochain ``sum_I c^I omega_I`` over increasing index tuples ``I``."""

    degree: int
    components: Mapping[tuple, np.ndarray]

    def __post_init__(self):
        comps = {}
        for key, value in self.components.items():
            key = tuple(int(i) for i in key)
            if len(key) != self.degree:
                raise InputError(f"index tuple {key} has wrong length for degree {self.degree}")
            if any(a >= b for a, b in zip(key, key[1:])) or any(i < 0 for i in key):
                raise InputError(f"index tuple {key} is not strictly increasing")
            comps[key] = np.asarray(value)
        object.__setattr__(self, "components", comps)

    def norm(self) -> float:
        return float(
            np.sqrt(sum(np.linalg.norm(np.asarray(v, dtype=complex)) ** 2 for v in self.components.values()))
        )


def _wedge_left(i: int, key: tuple) -> tuple[int, tuple] | None:
    """``c^i c^key = sign * c^sorted``; ``None`` if ``i`` already occurs."""
    if i in key:
        return None
    pos = sum(1 for k in key if k < i)
    return (-1) ** pos, key[:pos] + (i,) + key[pos:]


def d_general(c: GeneralCochain, g: LieAlgebraData) -> GeneralCochain:
    n_g = g.dim_g
    if c.degree >= n_g:
        raise InputError(f"degree {c.degree} has no successor for dim_g={n_g}")
    for key in c.components:
        if key and key[-1] >= n_g:
            raise InputError(f"index tuple {key} out of range for dim_g={n_g}")

    out: dict[tuple, np.ndarray] = {}

    def accumulate(key, value):
        if key in out:
            out[key] = out[key] + value
        else:
            out[key] = value

    for key in sorted(c.components):
        omega = c.components[key]
        # c^i ad_{rho(e_i)}
        for i in range(n_g):
            wedge = _wedge_left(i, key)
            if wedge is None:
                continue
            sign, new_key = wedge
            term = commutator(g.rep[i], omega)
            accumulate(new_key, term if sign > 0 else -term)
        # -1/2 f_ij^k c^i c^j d/dc^k, summed as -f_ij^k c^i c^j over i < j
        for m, k in enumerate(key):
            rest = key[:m] + key[m + 1:]
            dsign = (-1) ** m
            for i, j in combinations(range(n_g), 2):
                coef = _scalar(g.f[i, j, k])
                if coef == 0:
                    continue
                inner_wedge = _wedge_left(j, rest)
                if inner_wedge is None:
                    continue
                s1, key1 = inner_wedge
                outer = _wedge_left(i, key1)
                if outer is None:
                    continue
                s2, key2 = outer
                sign = -dsign * s1 * s2
                accumulate(key2, (sign * coef) * omega)

    return GeneralCochain(c.degree + 1, out)


def _diagonal_norms(c: Cochain, spectrum: JointSpectrum) -> dict[int, float]:
    norms = {}
    for a, sector in enumerate(spectrum.sectors):
        p = sector.projector
        norms[a] = float(np.sqrt(sum(frobenius(p @ m @ p) ** 2 for m in c.components)))
    return norms


def homotopy(
    c: Cochain,
    spectrum: JointSpectrum,
    tol: float = 1e-10,
    gap_tol: float | None = None,
) -> Cochain:
    """Contracting homotopy of the off-diagonal subcomplex.

    On the block ``(a, b)`` the differential acts through ``ad_H = i*lambda_ab``
    and ``ad_S = i*mu_ab`` (with opposite signs on the two off-diagonal
    corners).  The inverse uses the eigenvalue difference of larger magnitude;
    the choice per block is recorded in ``result.meta["branches"]``.
    """
    if c.degree not in (1, 2):
        raise InputError(f"homotopy is defined on degrees 1 and 2, got {c.degree}")
    if c.dim != spectrum.dim:
        raise InputError(f"cochain dim {c.dim} does not match spectrum dim {spectrum.dim}")
    if gap_tol is None:
        gap_tol = spectrum.cluster_tol
    diag = _diagonal_norms(c, spectrum)
    if max(diag.values(), default=0.0) > tol * max(1.0, c.norm()):
        raise NotExactError(
            "cochain has diagonal-block components; it is not in the off-diagonal subcomplex",
            diag,
        )

    n = c.dim
    first = np.zeros((n, n), dtype=complex)   # degree 1 -> w ; degree 2 -> x
    second = np.zeros((n, n), dtype=complex)  # degree 2 -> y
    branches = {}
    for idx in spectrum.off_diagonal_blocks():
        lam, mu = spectrum.gaps(idx)
        if abs(lam) <= gap_tol and abs(mu) <= gap_tol:
            raise SpectrumError(
                f"sectors {idx.first} and {idx.second} share both eigenvalues "
                f"(dlambda={lam:.3e}, dmu={mu:.3e})"
            )
        use_lambda = abs(lam) >= abs(mu)
        branches[(idx.first, idx.second)] = "lambda" if use_lambda else "mu"
        pa = spectrum.sectors[idx.first].projector
        pb = spectrum.sectors[idx.second].projector

        def inverse_ad(m, gap):
            # inverse of ad on the block: corner ab scales by i*gap, corner ba by -i*gap
            return (pa @ m @ pb - pb @ m @ pa) / (1j * gap)

        if c.degree == 1:
            if use_lambda:
                first += inverse_ad(c.x, lam)
            else:
                first += inverse_ad(c.y, mu)
        else:
            if use_lambda:
                second += inverse_ad(c.z, lam)
            else:
                first -= inverse_ad(c.z, mu)

    if c.degree == 1:
        out = Cochain(0, w=first)
    else:
        out = Cochain(1, x=first, y=second)
    out.meta["branches"] = branches
    return out


@dataclass(frozen=True)
class CohomologyReport:
    dims: tuple[int, int, int]
    commutant: CommutantBasis
    method: Literal["theorem", "brute_force"]
    singular_values: dict = field(default_factory=dict, compare=False, repr=False)


def cohomology_theorem(spectrum: JointSpectrum) -> CohomologyReport:
    """``H^0 = Z``, ``H^1 = Z + Z``, ``H^2 = Z`` as real dimensions."""
    basis = commutant_basis(spectrum)
    z = spectrum.commutant_dim
    assert len(basis) == z
    return CohomologyReport((z, 2 * z, z), basis, "theorem")


def differential_matrices(pair: SymmetryPair) -> tuple[np.ndarray, np.ndarray]:
    """Realified ``d0: u(n) -> u(n)^2`` and ``d1: u(n)^2 -> u(n)``."""
    H, S = pair.H, pair.S
    n = pair.dim
    d0 = realify_map(lambda w: (commutator(H, w), commutator(S, w)), n, 1)
    d1 = realify_map(lambda x, y: (commutator(H, y) - commutator(S, x),), n, 2)
    return d0, d1


def cohomology_bruteforce(pair: SymmetryPair, rank_tol: float = 1e-9) -> CohomologyReport:
    """Dimensions from ranks of the realified differentials.

    Independent of the spectral decomposition.  Singular values within a
    factor 10 of the rank threshold raise :class:`NumericalError`.
    """
    n = pair.dim
    d0, d1 = differential_matrices(pair)
    scale = frobenius(pair.H) + frobenius(pair.S)
    r0 = real_rank(d0, rank_tol, ambiguity_factor=10.0, scale=scale)
    r1 = real_rank(d1, rank_tol, ambiguity_factor=10.0, scale=scale)
    nn = n * n
    h0 = nn - r0
    h1 = (2 * nn - r1) - r0
    h2 = nn - r1

    # kernel of d0 is Z; right singular vectors are orthonormal coordinates
    _, sv, vt = np.linalg.svd(d0)
    kernel = vt[r0:]
    basis = u_basis(n)
    elements = np.einsum("qk,kij->qij", kernel, basis)
    if h0 != elements.shape[0]:
        raise NumericalError("kernel size disagrees with rank count")
    elements.setflags(write=False)
    commutant = CommutantBasis(elements, (None,) * h0)
    return CohomologyReport(
        (h0, h1, h2),
        commutant,
        "brute_force",
        {"d0": sv, "d1": np.linalg.svd(d1, compute_uv=False)},
    )
