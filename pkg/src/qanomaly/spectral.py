"""Joint spectrum of a commuting Hermitian pair, block projections, commutant.

The pair ``(h, s)`` is diagonalized in two passes: ``h`` first, then the
restriction of ``s`` to each eigenspace of ``h``.  Sectors are the joint
eigenspaces, sorted lexicographically by ``(lambda, mu)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator

import numpy as np

from .config import DEFAULT_TOLERANCES
from .errors import InputError, NumericalError
from .linalg import as_matrix, commutator, frobenius, hermiticity_defect, u_basis

__all__ = [
    "BlockIndex",
    "CommutantBasis",
    "JointSpectrum",
    "Sector",
    "SymmetryPair",
    "block_project",
    "commutant_basis",
    "joint_diagonalize",
    "structure_constants",
]


@dataclass(frozen=True)
class SymmetryPair:
    """Hamiltonian ``hamiltonian`` and conserved charge ``symmetry``.

    Both are Hermitian; the anti-Hermitian generators used by the complex are
    ``H = i*hamiltonian`` and ``S = i*symmetry``.
    """

    hamiltonian: np.ndarray
    symmetry: np.ndarray
    hermiticity_tol: float = DEFAULT_TOLERANCES.hermiticity
    commute_tol: float = DEFAULT_TOLERANCES.commute

    def __post_init__(self):
        h = as_matrix(self.hamiltonian, "hamiltonian")
        s = as_matrix(self.symmetry, "symmetry")
        if h.shape != s.shape:
            raise InputError(f"hamiltonian {h.shape} and symmetry {s.shape} differ in shape")
        for name, m in (("hamiltonian", h), ("symmetry", s)):
            defect = hermiticity_defect(m)
            if defect > self.hermiticity_tol * max(1.0, frobenius(m)):
                raise InputError(f"{name} is not Hermitian: ||A - A^H||_F = {defect:.3e}")
        resid = frobenius(commutator(h, s))
        if resid > self.commute_tol * frobenius(h) * frobenius(s):
            raise InputError(
                f"hamiltonian and symmetry do not commute: ||[H,S]||_F = {resid:.3e}"
            )
        # symmetrize away sub-tolerance non-hermiticity so eigh sees exact input
        h = 0.5 * (h + h.conj().T)
        s = 0.5 * (s + s.conj().T)
        h.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "symmetry", s)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @cached_property
    def H(self) -> np.ndarray:
        return 1j * self.hamiltonian

    @cached_property
    def S(self) -> np.ndarray:
        return 1j * self.symmetry


@dataclass(frozen=True)
class Sector:
    lam: float
    mu: float
    vectors: np.ndarray = field(repr=False)  # orthonormal columns spanning the sector

    @property
    def multiplicity(self) -> int:
        return self.vectors.shape[1]

    @cached_property
    def projector(self) -> np.ndarray:
        p = self.vectors @ self.vectors.conj().T
        p.setflags(write=False)
        return p


@dataclass(frozen=True, order=True)
class BlockIndex:
    """Unordered pair of sector indices, stored with ``first <= second``."""

    first: int
    second: int

    def __post_init__(self):
        if self.first > self.second:
            a, b = self.second, self.first
            object.__setattr__(self, "first", a)
            object.__setattr__(self, "second", b)

    @property
    def diagonal(self) -> bool:
        return self.first == self.second


@dataclass(frozen=True)
class JointSpectrum:
    sectors: tuple[Sector, ...]
    cluster_tol: float

    @property
    def dim(self) -> int:
        return self.sectors[0].vectors.shape[0]

    @property
    def multiplicities(self) -> list[int]:
        return [s.multiplicity for s in self.sectors]

    @property
    def nondegenerate(self) -> bool:
        return all(m == 1 for m in self.multiplicities)

    @property
    def commutant_dim(self) -> int:
        return sum(m * m for m in self.multiplicities)

    def blocks(self) -> Iterator[BlockIndex]:
        k = len(self.sectors)
        for a in range(k):
            for b in range(a, k):
                yield BlockIndex(a, b)

    def off_diagonal_blocks(self) -> Iterator[BlockIndex]:
        return (b for b in self.blocks() if not b.diagonal)

    def gaps(self, idx: BlockIndex) -> tuple[float, float]:
        """``(lambda_a - lambda_b, mu_a - mu_b)`` for the block."""
        a, b = self.sectors[idx.first], self.sectors[idx.second]
        return a.lam - b.lam, a.mu - b.mu

    def diagonal_part(self, x) -> np.ndarray:
        """Sum of the diagonal-block projections, i.e. the projection onto Z."""
        x = np.asarray(x)
        out = np.zeros_like(x, dtype=complex)
        for s in self.sectors:
            out += s.projector @ x @ s.projector
        return out

    def summary(self) -> list[dict]:
        return [
            {"lambda": s.lam, "mu": s.mu, "multiplicity": s.multiplicity}
            for s in self.sectors
        ]


def _clusters(values: np.ndarray, tol: float) -> list[np.ndarray]:
    """Group ascending ``values`` into runs whose neighbours differ by ``<= tol``."""
    groups = []
    start = 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i] - values[i - 1] > tol:
            group = np.arange(start, i)
            if values[i - 1] - values[start] > tol:
                raise NumericalError(
                    f"eigenvalue cluster [{values[start]:.6g}, {values[i - 1]:.6g}] is wider "
                    f"than cluster_tol={tol:.3e}; degeneracy is ambiguous"
                )
            groups.append(group)
            start = i
    return groups


def default_cluster_tol(pair: SymmetryPair) -> float:
    eh = np.linalg.eigvalsh(pair.hamiltonian)
    es = np.linalg.eigvalsh(pair.symmetry)
    scale = max(eh[-1] - eh[0], es[-1] - es[0], np.abs(eh).max(), np.abs(es).max())
    return 1e-8 * float(scale)


def joint_diagonalize(pair: SymmetryPair, cluster_tol: float | None = None) -> JointSpectrum:
    """Decompose the space into joint eigenspaces of the pair."""
    if cluster_tol is None:
        cluster_tol = default_cluster_tol(pair)
    if cluster_tol < 0:
        raise InputError("cluster_tol must be non-negative")
    try:
        lam, q = np.linalg.eigh(pair.hamiltonian)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed on hamiltonian: {exc}") from exc

    sectors = []
    for group in _clusters(lam, cluster_tol):
        qa = q[:, group]
        restricted = qa.conj().T @ pair.symmetry @ qa
        restricted = 0.5 * (restricted + restricted.conj().T)
        try:
            mu, w = np.linalg.eigh(restricted)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"eigensolver failed on symmetry block: {exc}") from exc
        lam_a = float(lam[group].mean())
        for sub in _clusters(mu, cluster_tol):
            vecs = qa @ w[:, sub]
            vecs.setflags(write=False)
            sectors.append(Sector(lam_a, float(mu[sub].mean()), vecs))

    sectors.sort(key=lambda s: (s.lam, s.mu))
    return JointSpectrum(tuple(sectors), float(cluster_tol))


def block_project(x, spectrum: JointSpectrum, idx: BlockIndex) -> np.ndarray:
    """Orthogonal projection of ``x`` onto the block ``idx``.

    Off-diagonal blocks use ``Pa x Pb + Pb x Pa``, which makes the map
    idempotent and the sum over all unordered blocks the identity.
    """
    x = np.asarray(x)
    k = len(spectrum.sectors)
    if not (0 <= idx.first < k and 0 <= idx.second < k):
        raise InputError(f"block {idx} out of range for {k} sectors")
    if x.shape != (spectrum.dim, spectrum.dim):
        raise InputError(f"matrix shape {x.shape} does not match spectrum dim {spectrum.dim}")
    pa = spectrum.sectors[idx.first].projector
    if idx.diagonal:
        return pa @ x @ pa
    pb = spectrum.sectors[idx.second].projector
    return pa @ x @ pb + pb @ x @ pa


@dataclass(frozen=True)
class CommutantBasis:
    """Orthonormal real basis of the commutant, stacked as ``(k, n, n)``.

    ``sector_of[i]`` is the sector whose diagonal block holds element ``i``
    (``None`` when the basis was not built from a spectrum).
    """

    elements: np.ndarray
    sector_of: tuple

    def __len__(self) -> int:
        return self.elements.shape[0]

    def __iter__(self):
        return iter(self.elements)

    def coords(self, a) -> np.ndarray:
        return -np.einsum("kij,ji->k", self.elements, np.asarray(a)).real

    def combine(self, coords) -> np.ndarray:
        n = self.elements.shape[-1] if len(self) else 0
        if not len(self):
            return np.zeros((n, n), dtype=complex)
        return np.einsum("k,kij->ij", np.asarray(coords, dtype=float), self.elements)


def commutant_basis(spectrum: JointSpectrum) -> CommutantBasis:
    """Basis ``V B V^H`` of Z, with ``B`` running over the canonical basis of u(m)."""
    n = spectrum.dim
    parts = []
    owner = []
    for a, sector in enumerate(spectrum.sectors):
        v = sector.vectors
        local = u_basis(sector.multiplicity)
        parts.append(np.einsum("ip,kpq,jq->kij", v, local, v.conj()))
        owner.extend([a] * len(local))
    elements = np.concatenate(parts) if parts else np.zeros((0, n, n), dtype=complex)
    elements.setflags(write=False)
    return CommutantBasis(elements, tuple(owner))


def structure_constants(basis: CommutantBasis) -> np.ndarray:
    """``f[i, j, k] = -tr([e_i, e_j] e_k)`` for an orthonormal basis."""
    e = basis.elements
    prod = np.einsum("iab,jbc->ijac", e, e)
    comm = prod - prod.transpose(1, 0, 2, 3)
    return -np.einsum("ijab,kba->ijk", comm, e).real
